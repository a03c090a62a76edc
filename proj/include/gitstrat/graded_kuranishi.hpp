#pragma once

// Finite-dimensional graded three-term complexes C0 -> C1 -> C2 with a
// symmetric bilinear bracket C1 x C1 -> C2, and the Kuranishi map
//
//   kappa(x) = x + d1^* Gamma(Q(x)),   Q(x) = [x, x] / 2,
//
// where Gamma is the Green's operator (pseudoinverse) of d1 d1^* on C2. With
// x = beta + phi and [beta, beta] = [phi, phi] = 0, Q(x) is the [beta, phi]
// term. Every space carries a grading; differentials and inner products
// preserve it and the bracket adds grades, so t . w = sum_j t^j w_j commutes
// with kappa.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "gitstrat/errors.hpp"

namespace gitstrat {

using cdouble = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Structure constant: [e_p, e_q]_out = value (and symmetrically [e_q, e_p]).
struct BracketTerm {
  std::size_t out = 0;
  std::size_t p = 0;
  std::size_t q = 0;
  cdouble value;
};

struct GradedComplexData {
  std::vector<int> grades0, grades1, grades2;  // grade of each basis vector
  CMat d0;                                     // C0 -> C1
  CMat d1;                                     // C1 -> C2
  CMat gram0, gram1, gram2;                    // hermitian positive definite
  std::vector<BracketTerm> bracket;
};

enum class GreensStatus { Ok, IllConditioned };

struct GreensOperator {
  CMat gamma;     // pseudoinverse of d1 d1^* on C2
  CMat harmonic;  // orthogonal projector onto ker(d1 d1^*) = H^2
  GreensStatus status = GreensStatus::Ok;
  double smallest_nonzero = 0;  // relative to the largest eigenvalue
};

namespace detail {

inline bool hermitian_pd(const CMat& m) {
  if (m.rows() != m.cols()) return false;
  if ((m - m.adjoint()).norm() > 1e-12 * (1.0 + m.norm())) return false;
  Eigen::LLT<CMat> llt(m);
  return llt.info() == Eigen::Success;
}

inline bool grade_preserving(const CMat& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (rows[static_cast<std::size_t>(i)] != cols[static_cast<std::size_t>(j)] && m(i, j) != cdouble(0))
        return false;
  return true;
}

}  // namespace detail

class GradedComplex {
 public:
  static constexpr double kConditionThreshold = 1e-12;

  explicit GradedComplex(GradedComplexData data) : d_(std::move(data)) {
    const auto n0 = static_cast<Eigen::Index>(d_.grades0.size());
    const auto n1 = static_cast<Eigen::Index>(d_.grades1.size());
    const auto n2 = static_cast<Eigen::Index>(d_.grades2.size());
    auto shape = [](const CMat& m, Eigen::Index r, Eigen::Index c, const char* what) {
      if (m.rows() != r || m.cols() != c) throw DimensionMismatch(std::string("graded complex: ") + what + " has wrong shape");
    };
    shape(d_.d0, n1, n0, "d0");
    shape(d_.d1, n2, n1, "d1");
    shape(d_.gram0, n0, n0, "gram0");
    shape(d_.gram1, n1, n1, "gram1");
    shape(d_.gram2, n2, n2, "gram2");
    if (!detail::hermitian_pd(d_.gram0) || !detail::hermitian_pd(d_.gram1) || !detail::hermitian_pd(d_.gram2))
      throw PreconditionError("graded complex: inner products must be hermitian positive definite");
    if (!detail::grade_preserving(d_.d0, d_.grades1, d_.grades0) || !detail::grade_preserving(d_.d1, d_.grades2, d_.grades1))
      throw PreconditionError("graded complex: differentials must preserve grades");
    if (!detail::grade_preserving(d_.gram0, d_.grades0, d_.grades0) ||
        !detail::grade_preserving(d_.gram1, d_.grades1, d_.grades1) ||
        !detail::grade_preserving(d_.gram2, d_.grades2, d_.grades2))
      throw PreconditionError("graded complex: distinct grades must be orthogonal");
    const double scale = 1.0 + d_.d1.norm() * d_.d0.norm();
    if ((d_.d1 * d_.d0).norm() > 1e-12 * scale) throw PreconditionError("graded complex: d1 d0 != 0");
    for (const auto& t : d_.bracket) {
      if (t.out >= d_.grades2.size() || t.p >= d_.grades1.size() || t.q >= d_.grades1.size())
        throw DimensionMismatch("graded complex: bracket index out of range");
      if (d_.grades2[t.out] != d_.grades1[t.p] + d_.grades1[t.q])
        throw PreconditionError("graded complex: bracket term does not add grades");
    }
    d1_adj_ = d_.gram1.llt().solve(d_.d1.adjoint() * d_.gram2);
    build_greens();
    correction_ = d1_adj_ * greens_.gamma;
  }

  const GradedComplexData& data() const { return d_; }
  std::size_t dim0() const { return d_.grades0.size(); }
  std::size_t dim1() const { return d_.grades1.size(); }
  std::size_t dim2() const { return d_.grades2.size(); }
  std::size_t total_dim() const { return dim0() + dim1() + dim2(); }
  const std::vector<int>& grades1() const { return d_.grades1; }
  const std::vector<int>& grades2() const { return d_.grades2; }

  const CMat& d1_adjoint() const { return d1_adj_; }
  const GreensOperator& greens() const { return greens_; }

  CVec bracket(const CVec& x, const CVec& y) const {
    check1(x);
    check1(y);
    CVec out = CVec::Zero(static_cast<Eigen::Index>(dim2()));
    for (const auto& t : d_.bracket) {
      const auto p = static_cast<Eigen::Index>(t.p), q = static_cast<Eigen::Index>(t.q);
      cdouble v = x(p) * y(q);
      if (t.p != t.q) v += x(q) * y(p);
      out(static_cast<Eigen::Index>(t.out)) += t.value * v;
    }
    return out;
  }

  /// [x, x] / 2.
  CVec quadratic(const CVec& x) const { return 0.5 * bracket(x, x); }

  /// d1^* Gamma applied to an element of C2.
  CVec correction(const CVec& c2) const { return correction_ * c2; }

  void check1(const CVec& x) const { require_dims(static_cast<std::size_t>(x.size()), dim1(), "C1 vector"); }

  /// Inner products on C1 and C2.
  double norm1(const CVec& x) const { return std::sqrt(std::abs(x.dot(d_.gram1 * x))); }
  double norm2(const CVec& x) const { return std::sqrt(std::abs(x.dot(d_.gram2 * x))); }

 private:
  void build_greens() {
    const auto n2 = static_cast<Eigen::Index>(dim2());
    greens_.gamma = CMat::Zero(n2, n2);
    greens_.harmonic = CMat::Identity(n2, n2);
    if (n2 == 0) return;
    // Orthonormal coordinates z = R y with gram2 = R^* R.
    Eigen::LLT<CMat> llt(d_.gram2);
    const CMat r = llt.matrixU();
    const CMat rinv = r.triangularView<Eigen::Upper>().solve(CMat::Identity(n2, n2));
    const CMat lap = d_.d1 * d1_adj_;
    CMat lt = r * lap * rinv;
    lt = 0.5 * (lt + lt.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(lt);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    const double cut = std::max(top, 1.0) * 1e-10;
    CMat g = CMat::Zero(n2, n2), p = CMat::Zero(n2, n2);
    double smallest = top > 0 ? 1.0 : 0.0;
    for (Eigen::Index i = 0; i < n2; ++i) {
      const CVec v = es.eigenvectors().col(i);
      if (std::abs(ev(i)) > cut) {
        g += (v * v.adjoint()) / ev(i);
        smallest = std::min(smallest, std::abs(ev(i)) / top);
      } else {
        p += v * v.adjoint();
      }
    }
    greens_.gamma = rinv * g * r;
    greens_.harmonic = rinv * p * r;
    greens_.smallest_nonzero = smallest;
    greens_.status = smallest < kConditionThreshold ? GreensStatus::IllConditioned : GreensStatus::Ok;
  }

  GradedComplexData d_;
  CMat d1_adj_;
  GreensOperator greens_;
  CMat correction_;
};

inline const GreensOperator& greens_operator(const GradedComplex& cx) { return cx.greens(); }

/// t . w = sum_j t^j w_j.
inline CVec grading_action(const std::vector<int>& grades, cdouble t, const CVec& w) {
  require_dims(static_cast<std::size_t>(w.size()), grades.size(), "grading_action");
  CVec out = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) out(i) *= std::pow(t, grades[static_cast<std::size_t>(i)]);
  return out;
}

inline bool is_positive_slice(const GradedComplex& cx, const CVec& x) {
  cx.check1(x);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (cx.grades1()[static_cast<std::size_t>(i)] <= 0 && x(i) != cdouble(0)) return false;
  return true;
}

inline CVec kuranishi_forward(const GradedComplex& cx, const CVec& x) {
  cx.check1(x);
  return x + cx.correction(cx.quadratic(x));
}

/// The unique y with kappa(y) = x for x in positive grades, built one grade at
/// a time: y_m = x_m - (d1^* Gamma Q(y))_m, where only y_p with p < m enter.
inline CVec kuranishi_inverse_graded(const GradedComplex& cx, const CVec& x) {
  if (!is_positive_slice(cx, x)) throw PreconditionError("kuranishi_inverse_graded: input must lie in positive grades");
  const auto& gr = cx.grades1();
  int top = 0;
  for (auto g : gr) top = std::max(top, g);
  CVec y = CVec::Zero(x.size());
  for (int m = 1; m <= top; ++m) {
    const CVec corr = cx.correction(cx.quadratic(y));
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (gr[static_cast<std::size_t>(i)] == m) y(i) = x(i) - corr(i);
  }
  return y;
}

/// k(x) = P [x, x] / 2.
inline CVec obstruction(const GradedComplex& cx, const CVec& x) {
  return cx.greens().harmonic * cx.quadratic(x);
}

/// d1 x + [x, x] / 2.
inline CVec mc_defect(const GradedComplex& cx, const CVec& x) {
  cx.check1(x);
  return cx.data().d1 * x + cx.quadratic(x);
}

// ---------------------------------------------------------------------------
// Generators.

struct RandomComplexOptions {
  int min_grade = 1;
  int max_grade = 4;
  int max_dim_per_grade = 4;   // per space and grade
  double bracket_density = 0.3;
  bool complex_entries = true;
};

namespace detail {

inline cdouble draw(std::mt19937_64& rng, bool complex_entries) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  return complex_entries ? cdouble(re, n(rng)) : cdouble(re, 0.0);
}

inline std::vector<int> draw_grades(std::mt19937_64& rng, const RandomComplexOptions& o, int lo_dim) {
  std::uniform_int_distribution<int> dim(lo_dim, o.max_dim_per_grade);
  std::vector<int> g;
  for (int j = o.min_grade; j <= o.max_grade; ++j) {
    const int n = dim(rng);
    for (int i = 0; i < n; ++i) g.push_back(j);
  }
  return g;
}

inline CMat random_gram(std::mt19937_64& rng, const std::vector<int>& grades, bool complex_entries) {
  const auto n = static_cast<Eigen::Index>(grades.size());
  CMat b = CMat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (grades[static_cast<std::size_t>(i)] == grades[static_cast<std::size_t>(j)]) b(i, j) = draw(rng, complex_entries);
  CMat m = CMat::Identity(n, n) + 0.25 * b.adjoint() * b / std::max<Eigen::Index>(n, 1);
  return 0.5 * (m + m.adjoint());
}

// Random grade-preserving matrix rows x cols.
inline CMat random_graded_map(std::mt19937_64& rng, const std::vector<int>& rows, const std::vector<int>& cols,
                              bool complex_entries) {
  CMat m = CMat::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (rows[i] == cols[j]) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = draw(rng, complex_entries);
  return m;
}

inline std::vector<BracketTerm> random_bracket(std::mt19937_64& rng, const std::vector<int>& g1,
                                               const std::vector<int>& g2, double density, bool complex_entries) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<BracketTerm> out;
  for (std::size_t p = 0; p < g1.size(); ++p)
    for (std::size_t q = p; q < g1.size(); ++q)
      for (std::size_t c = 0; c < g2.size(); ++c)
        if (g2[c] == g1[p] + g1[q] && u(rng) < density) out.push_back({c, p, q, draw(rng, complex_entries)});
  return out;
}

}  // namespace detail

/// Random valid complex: d1 is a random grade-preserving map composed with the
/// projector killing im d0, so d1 d0 vanishes to rounding.
inline GradedComplex random_graded_complex(std::uint64_t seed, const RandomComplexOptions& o = {}) {
  std::mt19937_64 rng(seed);
  GradedComplexData d;
  d.grades0 = detail::draw_grades(rng, o, 0);
  d.grades1 = detail::draw_grades(rng, o, 1);
  d.grades2 = detail::draw_grades(rng, o, 0);
  d.d0 = detail::random_graded_map(rng, d.grades1, d.grades0, o.complex_entries);
  const auto n1 = static_cast<Eigen::Index>(d.grades1.size());
  CMat kill = CMat::Identity(n1, n1);
  if (d.d0.cols() > 0) {
    // Projector onto the complement of im d0 is grade-preserving because d0 is.
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(d.d0);
    const CMat qm = cod.householderQ();
    const CMat basis = qm.leftCols(cod.rank());
    kill -= basis * basis.adjoint();
    for (Eigen::Index i = 0; i < n1; ++i)
      for (Eigen::Index j = 0; j < n1; ++j)
        if (d.grades1[static_cast<std::size_t>(i)] != d.grades1[static_cast<std::size_t>(j)] || std::abs(kill(i, j)) < 1e-14)
          kill(i, j) = 0;
  }
  d.d1 = detail::random_graded_map(rng, d.grades2, d.grades1, o.complex_entries) * kill;
  for (Eigen::Index i = 0; i < d.d1.rows(); ++i)
    for (Eigen::Index j = 0; j < d.d1.cols(); ++j)
      if (d.grades2[static_cast<std::size_t>(i)] != d.grades1[static_cast<std::size_t>(j)]) d.d1(i, j) = 0;
  d.gram0 = detail::random_gram(rng, d.grades0, o.complex_entries);
  d.gram1 = detail::random_gram(rng, d.grades1, o.complex_entries);
  d.gram2 = detail::random_gram(rng, d.grades2, o.complex_entries);
  d.bracket = detail::random_bracket(rng, d.grades1, d.grades2, o.bracket_density, o.complex_entries);
  return GradedComplex(std::move(d));
}

/// Integer model: d0 = 0, each grade of d1 unit upper triangular (so C2 has
/// no harmonic part in positive grades), identity inner products and integer
/// structure constants.
inline GradedComplex nilpotent_graded_complex(std::uint64_t seed, int max_grade = 4, int dim_per_grade = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coef(-2, 2);
  GradedComplexData d;
  for (int j = 1; j <= max_grade; ++j)
    for (int i = 0; i < dim_per_grade; ++i) {
      d.grades1.push_back(j);
      d.grades2.push_back(j);
    }
  const auto n = static_cast<Eigen::Index>(d.grades1.size());
  d.d0 = CMat::Zero(n, 0);
  d.d1 = CMat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      if (d.grades2[static_cast<std::size_t>(i)] == d.grades1[static_cast<std::size_t>(j)])
        d.d1(i, j) = i == j ? cdouble(1) : cdouble(coef(rng));
  d.gram0 = CMat::Zero(0, 0);
  d.gram1 = CMat::Identity(n, n);
  d.gram2 = CMat::Identity(n, n);
  for (std::size_t p = 0; p < d.grades1.size(); ++p)
    for (std::size_t q = p; q < d.grades1.size(); ++q)
      for (std::size_t c = 0; c < d.grades2.size(); ++c)
        if (d.grades2[c] == d.grades1[p] + d.grades1[q]) {
          const int v = coef(rng);
          if (v != 0) d.bracket.push_back({c, p, q, cdouble(v)});
        }
  return GradedComplex(std::move(d));
}

}  // namespace gitstrat
