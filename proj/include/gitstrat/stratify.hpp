#pragma once

// Iterative stratification of a G-stable vector in a graded representation
// of G x C*: a chain of subtori, weight subsets S_n with rational levels c_n,
// and a one-parameter subgroup (x, sigma) under which u splits into pieces
// with strictly increasing integer t-exponents.
//
// All combinatorial steps use the original amplitudes; only which lines are
// nonzero matters. Kempf-Ness metric updates are reported separately by
// stage_kn_minimizers.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gitstrat/kempf_ness.hpp"
#include "gitstrat/lattice.hpp"
#include "gitstrat/polytope.hpp"
#include "gitstrat/stability.hpp"
#include "gitstrat/torus_rep.hpp"

namespace gitstrat {

/// u is not G-stable; carries the classifier's certificate.
class NotStableError : public Error {
 public:
  NotStableError(StabilityResult r, const std::string& what) : Error(what), result_(std::move(r)) {}
  const StabilityResult& result() const { return result_; }

 private:
  StabilityResult result_;
};

/// A step of the iteration that cannot fail on valid input did fail.
class StratifyInvariantError : public InternalError {
 public:
  enum class Kind { RayEmpty, NonIncreasing, NotPolystable, NoSolution, EmptyRemainder };
  StratifyInvariantError(Kind k, const std::string& what) : InternalError(what), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct StratifyOptions {
  std::int64_t sigma_multiple = 1;  // sigma = multiple * (least sigma clearing denominators)
};

struct StratifyStage {
  Lattice torus;                   // G_n as a sublattice of Z^k
  std::vector<std::size_t> nu;     // lines of nu_n
  std::vector<std::size_t> support;  // lines of P_{S_n}(u)
  std::vector<QVec> hull_points;   // generators of C_n (distinct sheared, restricted points)
  std::vector<std::size_t> face;   // generators of C_n on F_n
  std::size_t hull_dim = 0;        // dim C_n
  std::size_t projected_dim = 0;   // dim q_n(C_n)
  Q c;                             // lower end of the ray through C_n
  Q c_upper;
  QVec x;                          // x_n in X(G)^vee (x) Q
  StabilityClass support_class = StabilityClass::Stable;  // P_{S_n}(u) under G_n
  std::int64_t d = 0;              // c_n * sigma
};

enum class ComponentRole { Nu, Stage, Residual };

inline const char* to_string(ComponentRole r) {
  switch (r) {
    case ComponentRole::Nu: return "nu";
    case ComponentRole::Stage: return "stage";
    case ComponentRole::Residual: return "residual";
  }
  return "?";
}

struct ComponentExponent {
  std::size_t line = 0;
  std::string label;
  ComponentRole role = ComponentRole::Residual;
  std::size_t stage = 0;  // meaningful for Nu and Stage
  std::int64_t exponent = 0;
};

struct StratifyResult {
  std::size_t rank = 0;
  IVec x;                        // sigma * sum of x_n, integral
  std::int64_t sigma = 1;
  QVec x_sum;                    // sum of x_n
  std::vector<StratifyStage> stages;
  std::vector<Lattice> tori;     // G_0, ..., G_k with G_k trivial
  std::vector<std::size_t> residual;  // lines of u_k
  std::vector<ComponentExponent> exponents;  // every effective line, in line order

  std::size_t k() const { return stages.size(); }
  std::vector<std::int64_t> degrees() const {
    std::vector<std::int64_t> d;
    for (const auto& s : stages) d.push_back(s.d);
    return d;
  }
};

namespace detail {

inline void validate_stratify_input(const RepVector& u) {
  if (!u.rep().graded()) throw PreconditionError("stratify: representation must be graded");
  if (u.is_zero()) throw PreconditionError("stratify: u must be nonzero");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.nonzero_at(i) && u.rep()[i].rho < 1)
      throw PreconditionError("stratify: line '" + u.rep()[i].label + "' has rho < 1");
}

inline Q sheared_rho(const WeightLine& l, const QVec& x_prev) {
  return Q(static_cast<long>(l.rho)) + dot(std::span<const std::int64_t>(l.ell), std::span<const Q>(x_prev));
}

}  // namespace detail

inline StratifyResult stratify(const RepVector& u, const StratifyOptions& opt = {}) {
  detail::validate_stratify_input(u);
  if (opt.sigma_multiple < 1) throw PreconditionError("stratify: sigma multiple must be >= 1");
  const std::size_t k = u.rep().rank();
  const auto& lines = u.rep().lines();
  {
    auto cls = classify(forget_grading(u));
    if (cls.cls != StabilityClass::Stable)
      throw NotStableError(cls, std::string("stratify: u is ") + to_string(cls.cls) + ", not stable");
  }

  StratifyResult res;
  res.rank = k;
  res.x_sum = zeros(k);
  std::vector<bool> removed(u.size(), false);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!u.nonzero_at(i)) removed[i] = true;

  Lattice torus = Lattice::whole(k);
  res.tori.push_back(torus);
  Q c_prev = 0;
  while (!torus.empty()) {
    StratifyStage st;
    st.torus = torus;
    const std::size_t r = torus.rank();

    for (std::size_t i = 0; i < u.size(); ++i)
      if (!removed[i] && fixed_by(lines[i].ell, torus)) {
        st.nu.push_back(i);
        removed[i] = true;
      }

    // Sheared points of u - phi_n, restricted to G_n.
    std::vector<std::size_t> rem;
    std::vector<std::size_t> point_of;
    std::map<QVec, std::size_t> point_index;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (removed[i]) continue;
      QVec p = pair_with_basis(torus, to_qvec(lines[i].ell));
      p.push_back(detail::sheared_rho(lines[i], res.x_sum));
      auto [it, inserted] = point_index.emplace(p, st.hull_points.size());
      if (inserted) st.hull_points.push_back(std::move(p));
      rem.push_back(i);
      point_of.push_back(it->second);
    }
    if (rem.empty())
      throw StratifyInvariantError(StratifyInvariantError::Kind::EmptyRemainder,
                                   "stratify: nothing left to stratify on a nontrivial torus");

    PolytopeQ hull(st.hull_points, r + 1);
    st.hull_dim = hull.affine_dim();
    {
      std::vector<QVec> proj;
      for (const auto& p : st.hull_points) proj.emplace_back(p.begin(), p.end() - 1);
      st.projected_dim = PolytopeQ(proj, r).affine_dim();
    }
    const auto ray = ray_intersect(hull);
    if (!ray || ray->lower_open)
      throw StratifyInvariantError(StratifyInvariantError::Kind::RayEmpty,
                                   "stratify: positive ray misses C_" + std::to_string(res.stages.size()));
    st.c = ray->lower;
    st.c_upper = ray->upper;
    if (!(st.c > c_prev))
      throw StratifyInvariantError(StratifyInvariantError::Kind::NonIncreasing,
                                   "stratify: c_n = " + to_string(st.c) + " does not exceed " + to_string(c_prev));

    QVec q = zeros(r + 1);
    q[r] = st.c;
    st.face = minimal_face(hull, q);
    std::vector<bool> on_face(st.hull_points.size(), false);
    for (auto f : st.face) on_face[f] = true;
    for (std::size_t j = 0; j < rem.size(); ++j)
      if (on_face[point_of[j]]) st.support.push_back(rem[j]);

    std::vector<IVec> restricted;
    {
      std::set<IVec> seen;
      for (auto i : st.support) seen.insert(pair_with_basis(torus, lines[i].ell));
      restricted.assign(seen.begin(), seen.end());
    }
    st.support_class = classify_weights(restricted, r).cls;
    if (!is_polystable(st.support_class))
      throw StratifyInvariantError(StratifyInvariantError::Kind::NotPolystable,
                                   "stratify: support of stage " + std::to_string(res.stages.size()) +
                                       " is not polystable");

    std::vector<AffineConstraint> eqs, stricts;
    for (std::size_t p = 0; p < st.hull_points.size(); ++p) {
      const QVec& pt = st.hull_points[p];
      AffineConstraint con{QVec(pt.begin(), pt.end() - 1), st.c - pt[r]};
      (on_face[p] ? eqs : stricts).push_back(std::move(con));
    }
    const auto y = solve_mixed_system(r, eqs, stricts);
    if (!y)
      throw StratifyInvariantError(StratifyInvariantError::Kind::NoSolution,
                                   "stratify: no x_n separates F_" + std::to_string(res.stages.size()));
    st.x = torus.embed(*y);
    res.x_sum = add(res.x_sum, st.x);

    for (auto i : st.support) removed[i] = true;
    torus = compose(torus, saturated_kernel(restricted, r));
    res.tori.push_back(torus);
    c_prev = st.c;
    res.stages.push_back(std::move(st));
  }

  for (std::size_t i = 0; i < u.size(); ++i)
    if (!removed[i]) res.residual.push_back(i);

  const Z sigma0 = denominator_lcm(res.x_sum);
  res.sigma = to_int64(sigma0) * opt.sigma_multiple;
  const Q sig(static_cast<long>(res.sigma));
  res.x = to_ivec(scale(res.x_sum, sig));
  for (auto& st : res.stages) st.d = to_int64(Q(st.c * sig));

  std::vector<std::optional<ComponentExponent>> table(u.size());
  auto put = [&](std::size_t i, ComponentRole role, std::size_t stage) {
    table[i] = ComponentExponent{i, lines[i].label, role, stage, line_exponent(lines[i], res.x, res.sigma)};
  };
  for (std::size_t s = 0; s < res.stages.size(); ++s) {
    for (auto i : res.stages[s].nu) put(i, ComponentRole::Nu, s);
    for (auto i : res.stages[s].support) put(i, ComponentRole::Stage, s);
  }
  for (auto i : res.residual) put(i, ComponentRole::Residual, 0);
  for (auto& e : table)
    if (e) res.exponents.push_back(*e);
  return res;
}

struct VerificationCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct VerificationReport {
  std::vector<VerificationCheck> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const VerificationCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Recomputes every exponent from (x, sigma) and checks all claims of a
/// stratification against u.
inline VerificationReport verify_decomposition(const StratifyResult& r, const RepVector& u) {
  VerificationReport rep;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = {}) {
    rep.checks.push_back({name, ok, ok ? std::string() : detail});
  };
  const auto& lines = u.rep().lines();
  const std::size_t k = u.rep().rank();

  check("sigma-positive", r.sigma >= 1, "sigma = " + std::to_string(r.sigma));
  check("x-dimension", r.x.size() == k, "x has wrong dimension");
  if (r.x.size() != k) return rep;

  const auto exps = one_ps_exponents(u, r.x, r.sigma);
  auto exponent_of = [&](std::size_t i) { return exps.at(lines[i].label); };

  {
    bool ok = true;
    std::int64_t prev = 0;
    for (const auto& s : r.stages) {
      if (s.d <= prev) ok = false;
      prev = s.d;
    }
    check("ladder", ok, "degrees are not strictly increasing from 0");
  }
  {
    bool ok = true;
    std::string bad;
    for (std::size_t s = 0; s < r.stages.size(); ++s)
      for (auto i : r.stages[s].support)
        if (exponent_of(i) != r.stages[s].d) {
          ok = false;
          bad = lines[i].label + " has exponent " + std::to_string(exponent_of(i)) + ", expected d_" +
                std::to_string(s) + " = " + std::to_string(r.stages[s].d);
        }
    check("stage-exponents", ok, bad);
  }
  {
    bool ok = true;
    for (std::size_t s = 0; s < r.stages.size(); ++s) {
      const std::int64_t floor = s == 0 ? 0 : r.stages[s - 1].d;
      for (auto i : r.stages[s].nu)
        if (exponent_of(i) <= floor) ok = false;
    }
    check("nu-bounds", ok, "some nu component exponent is not above d_{i-1}");
  }
  {
    const std::int64_t floor = r.stages.empty() ? 0 : r.stages.back().d;
    bool ok = true;
    for (auto i : r.residual)
      if (exponent_of(i) <= floor) ok = false;
    check("residual-bounds", ok, "some residual exponent is not above d_{k-1}");
  }
  {
    bool ok = true;
    for (const auto& e : r.exponents)
      if (e.exponent != exponent_of(e.line)) ok = false;
    check("exponent-table", ok, "stored exponents differ from recomputed ones");
  }
  {
    bool ok = r.tori.size() == r.stages.size() + 1;
    for (std::size_t s = 0; ok && s < r.stages.size(); ++s) {
      for (auto i : r.stages[s].nu)
        if (!fixed_by(lines[i].ell, r.tori[s])) ok = false;
    }
    check("nu-fixed", ok, "some nu_i is not fixed by G_i");
  }
  {
    bool ok = r.tori.size() == r.stages.size() + 1;
    for (std::size_t s = 0; ok && s < r.stages.size(); ++s) {
      for (auto i : r.stages[s].support)
        if (!fixed_by(lines[i].ell, r.tori[s + 1])) ok = false;
    }
    check("stage-fixed", ok, "some P_{S_i}(u) is not fixed by G_{i+1}");
  }
  {
    bool ok = true;
    for (std::size_t s = 0; s < r.stages.size(); ++s) {
      std::set<IVec> ws;
      for (auto i : r.stages[s].support) ws.insert(pair_with_basis(r.tori[s], lines[i].ell));
      if (ws.empty() || !is_polystable(classify_weights({ws.begin(), ws.end()}, r.tori[s].rank()).cls)) ok = false;
    }
    check("polystable", ok, "some P_{S_i}(u) is not G_i-polystable");
  }
  {
    std::vector<int> hits(u.size(), 0);
    for (const auto& s : r.stages) {
      for (auto i : s.nu) ++hits[i];
      for (auto i : s.support) ++hits[i];
    }
    for (auto i : r.residual) ++hits[i];
    bool ok = true;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (hits[i] != (u.nonzero_at(i) ? 1 : 0)) ok = false;
    check("decomposition", ok, "nu_i, P_{S_i}(u) and u_k do not partition the support of u");
  }
  {
    bool ok = r.stages.size() <= k + 1 && r.tori.size() == r.stages.size() + 1 &&
              r.tori.front() == Lattice::whole(k) && r.tori.back().empty();
    for (std::size_t s = 0; ok && s + 1 < r.tori.size(); ++s)
      if (r.tori[s + 1].rank() >= r.tori[s].rank()) ok = false;
    check("termination", ok, "torus chain does not strictly decrease to the trivial torus");
  }
  {
    bool ok = true;
    Q prev = 0;
    for (const auto& s : r.stages) {
      if (!(s.c > prev) || s.c * Q(static_cast<long>(r.sigma)) != Q(static_cast<long>(s.d))) ok = false;
      prev = s.c;
    }
    check("levels", ok, "c_n not increasing or d_n != c_n sigma");
  }
  {
    QVec sx = scale(r.x_sum, Q(static_cast<long>(r.sigma)));
    check("x-consistent", sx == to_qvec(r.x), "x != sigma * sum x_n");
  }
  return rep;
}

struct StageMinimizer {
  KNResult kn;                     // minimization of P_{S_n}(u) under G_n, in G_n coordinates
  Eigen::VectorXd ambient_shift;   // the same minimizer as a real cocharacter of G
};

/// Kempf-Ness minimizers of each stage's support under its torus. Stages are
/// processed in order and each rescaling is applied to the amplitudes seen
/// by later stages, mirroring the successive metric replacements.
inline std::vector<StageMinimizer> stage_kn_minimizers(const StratifyResult& r, const RepVector& u,
                                                       const KNOptions& opt = {}) {
  std::vector<StageMinimizer> out;
  RepVector current = forget_grading(u);
  const auto k = static_cast<Eigen::Index>(u.rep().rank());
  for (const auto& st : r.stages) {
    std::vector<bool> keep(u.size(), false);
    for (auto i : st.support) keep[i] = true;
    const RepVector piece = restrict_vector(mask(current, keep), st.torus);
    StageMinimizer m;
    m.kn = kn_minimize(piece, opt);
    if (m.kn.status == KNStatus::Failure)
      throw InternalError("stage_kn_minimizers: minimization failed at stage " + std::to_string(out.size()));
    m.ambient_shift = Eigen::VectorXd::Zero(k);
    for (std::size_t b = 0; b < st.torus.rank(); ++b)
      for (Eigen::Index j = 0; j < k; ++j)
        m.ambient_shift(j) += m.kn.minimizer(static_cast<Eigen::Index>(b)) *
                              static_cast<double>(st.torus.basis[b][static_cast<std::size_t>(j)]);
    std::vector<double> shift(m.ambient_shift.data(), m.ambient_shift.data() + k);
    current = act_real(current, shift);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace gitstrat
