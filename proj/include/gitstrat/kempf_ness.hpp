#pragma once

// Kempf-Ness functionals.
//
// Torus case: l_v(x) = sum_i ||v_i||^2 exp(2 <lambda_i, x>) over lines, a
// convex sum of exponentials. Minimization is damped Newton on log l_v in the
// complement of the flat directions; non-attainment is certified by the
// stability classifier, never detected numerically.
//
// Conjugation case: l_phi(g) = ||e^g phi e^-g||^2 for traceless hermitian g,
// evaluation and first variation only.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "gitstrat/lattice.hpp"
#include "gitstrat/stability.hpp"
#include "gitstrat/torus_rep.hpp"

namespace gitstrat {

struct KNEval {
  double value = 0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Value, gradient and hessian of l_v at x.
inline KNEval kn_eval(const RepVector& v, const Eigen::VectorXd& x) {
  const std::size_t k = v.rep().rank();
  require_dims(static_cast<std::size_t>(x.size()), k, "kn_eval point");
  KNEval e;
  e.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  e.hessian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  Eigen::VectorXd lam(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = v.squared_norm(i);
    if (s == 0) continue;
    for (std::size_t j = 0; j < k; ++j) lam(static_cast<Eigen::Index>(j)) = static_cast<double>(v.rep()[i].ell[j]);
    const double term = s * std::exp(2.0 * lam.dot(x));
    e.value += term;
    e.gradient += 2.0 * term * lam;
    e.hessian += 4.0 * term * lam * lam.transpose();
  }
  return e;
}

/// Torus moment map at x: the gradient of l_v (up to the factor convention
/// fixed by kn_eval).
inline Eigen::VectorXd moment_map(const RepVector& v, const Eigen::VectorXd& x) { return kn_eval(v, x).gradient; }

enum class KNStatus { Converged, Diverging, FlatDirections, Failure };

inline const char* to_string(KNStatus s) {
  switch (s) {
    case KNStatus::Converged: return "converged";
    case KNStatus::Diverging: return "diverging";
    case KNStatus::FlatDirections: return "flat-directions";
    case KNStatus::Failure: return "failure";
  }
  return "?";
}

struct KNOptions {
  double tol = 1e-10;
  int max_iter = 500;
};

struct KNResult {
  KNStatus status = KNStatus::Failure;
  StabilityClass stability = StabilityClass::Unstable;
  Eigen::VectorXd minimizer;  // unset when Diverging
  double value = 0;           // minimum, or the limit along descent_ray when Diverging
  double gradient_norm = 0;
  int iterations = 0;
  Lattice flat_space;               // minimizers are minimizer + span(flat_space)
  std::optional<IVec> descent_ray;  // l_v is nonincreasing along it, strictly for some term
};

namespace detail {

struct ReducedKN {
  Eigen::MatrixXd proj;  // rows: lines' weights expressed in reduced coordinates
  Eigen::VectorXd logs;  // log ||v_i||^2

  // log l_v, its gradient and hessian in reduced coordinates.
  double eval(const Eigen::VectorXd& y, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const {
    const Eigen::VectorXd a = logs + 2.0 * (proj * y);
    const double m = a.maxCoeff();
    const Eigen::VectorXd w = (a.array() - m).exp().matrix();
    const double z = w.sum();
    if (grad || hess) {
      const Eigen::VectorXd p = w / z;
      const Eigen::VectorXd mu = 2.0 * proj.transpose() * p;
      if (grad) *grad = mu;
      if (hess) {
        *hess = 4.0 * proj.transpose() * p.asDiagonal() * proj - mu * mu.transpose();
      }
    }
    return m + std::log(z);
  }
};

}  // namespace detail

/// Minimizes l_v. Status follows the stability class of v: Converged iff
/// stable, FlatDirections iff polystable but not stable, Diverging otherwise.
inline KNResult kn_minimize(const RepVector& v, const KNOptions& opt = {}) {
  if (!(opt.tol > 0)) throw PreconditionError("kn_minimize: tolerance must be positive");
  const auto cls = classify(v);
  const std::size_t k = v.rep().rank();
  KNResult r;
  r.stability = cls.cls;
  r.flat_space = cls.certificate.flat;

  if (!is_polystable(cls.cls)) {
    r.status = KNStatus::Diverging;
    IVec ray = *cls.certificate.cocharacter;
    for (auto& c : ray) c = -c;
    r.descent_ray = ray;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v.nonzero_at(i)) continue;
      if (dot(std::span<const std::int64_t>(v.rep()[i].ell), std::span<const std::int64_t>(ray)) == 0)
        r.value += v.squared_norm(i);
    }
    return r;
  }

  // Orthonormal basis of the complement of the flat directions.
  Eigen::MatrixXd comp;
  {
    const Eigen::Index kk = static_cast<Eigen::Index>(k);
    if (r.flat_space.empty()) {
      comp = Eigen::MatrixXd::Identity(kk, kk);
    } else {
      Eigen::MatrixXd flat(kk, static_cast<Eigen::Index>(r.flat_space.rank()));
      for (std::size_t b = 0; b < r.flat_space.rank(); ++b)
        for (std::size_t j = 0; j < k; ++j)
          flat(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)) = static_cast<double>(r.flat_space.basis[b][j]);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(flat);
      const Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(kk, kk);
      comp = full.rightCols(kk - flat.cols());
    }
  }

  detail::ReducedKN f;
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v.squared_norm(i) > 0) active.push_back(i);
  f.proj.resize(static_cast<Eigen::Index>(active.size()), comp.cols());
  f.logs.resize(static_cast<Eigen::Index>(active.size()));
  for (std::size_t a = 0; a < active.size(); ++a) {
    Eigen::VectorXd lam(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) lam(static_cast<Eigen::Index>(j)) = static_cast<double>(v.rep()[active[a]].ell[j]);
    f.proj.row(static_cast<Eigen::Index>(a)) = (comp.transpose() * lam).transpose();
    f.logs(static_cast<Eigen::Index>(a)) = std::log(v.squared_norm(active[a]));
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(comp.cols());
  auto finish = [&](KNStatus ok) {
    r.minimizer = comp * y;
    const auto e = kn_eval(v, r.minimizer);
    r.value = e.value;
    r.gradient_norm = e.gradient.norm();
    r.status = r.gradient_norm < opt.tol ? ok : KNStatus::Failure;
    return r;
  };
  const KNStatus ok = r.flat_space.empty() ? KNStatus::Converged : KNStatus::FlatDirections;
  if (comp.cols() == 0) return finish(ok);

  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
    if (kn_eval(v, comp * y).gradient.norm() < opt.tol) return finish(ok);
    const double fy = f.eval(y, &g, &h);
    Eigen::VectorXd d;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) d = -ldlt.solve(g);
    if (d.size() == 0 || !d.allFinite() || g.dot(d) >= 0) d = -g;
    double t = 1.0;
    const double slope = g.dot(d);
    bool moved = false;
    while (t > 1e-20) {
      const Eigen::VectorXd cand = y + t * d;
      const double fc = f.eval(cand, nullptr, nullptr);
      if (fc <= fy + 1e-4 * t * slope) {
        moved = (cand - y).norm() > 0;
        y = cand;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      // Near the minimum the decrease drops below rounding; take the full
      // step while it still shrinks the gradient.
      const Eigen::VectorXd cand = y + d;
      const double gy = kn_eval(v, comp * y).gradient.norm();
      if (!(kn_eval(v, comp * cand).gradient.norm() < gy)) break;
      y = cand;
    }
  }
  return finish(ok);
}

// ---------------------------------------------------------------------------
// Matrix conjugation case.

using CMatrix = Eigen::MatrixXcd;

/// [phi, phi^dagger].
inline CMatrix moment_map_conjugation(const CMatrix& phi) {
  if (phi.rows() != phi.cols()) throw DimensionMismatch("moment_map_conjugation: phi must be square");
  return phi * phi.adjoint() - phi.adjoint() * phi;
}

/// Orthonormal (trace pairing) basis of traceless hermitian n x n matrices.
inline std::vector<CMatrix> traceless_hermitian_basis(Eigen::Index n) {
  std::vector<CMatrix> out;
  const std::complex<double> i1(0, 1);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b) {
      CMatrix s = CMatrix::Zero(n, n), t = CMatrix::Zero(n, n);
      s(a, b) = s(b, a) = 1.0 / std::sqrt(2.0);
      t(a, b) = -i1 / std::sqrt(2.0);
      t(b, a) = i1 / std::sqrt(2.0);
      out.push_back(s);
      out.push_back(t);
    }
  for (Eigen::Index m = 1; m < n; ++m) {
    CMatrix d = CMatrix::Zero(n, n);
    const double c = 1.0 / std::sqrt(static_cast<double>(m * (m + 1)));
    for (Eigen::Index j = 0; j < m; ++j) d(j, j) = c;
    d(m, m) = -static_cast<double>(m) * c;
    out.push_back(d);
  }
  return out;
}

namespace detail {

inline void require_conjugation_dims(const CMatrix& phi, const CMatrix& g) {
  if (phi.rows() != phi.cols()) throw DimensionMismatch("conjugation: phi must be square");
  if (g.rows() != phi.rows() || g.cols() != phi.cols()) throw DimensionMismatch("conjugation: g must match phi");
}

// (e^{2a} - e^{2b}) / (a - b), continuous across a == b.
inline double exp2_divided_difference(double a, double b) {
  const double d = a - b;
  const double sinhc = std::abs(d) < 1e-6 ? 1.0 + d * d / 6.0 : std::sinh(d) / d;
  return 2.0 * std::exp(a + b) * sinhc;
}

}  // namespace detail

inline double kn_conjugation_value(const CMatrix& phi, const CMatrix& g) {
  detail::require_conjugation_dims(phi, g);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
  const auto& u = es.eigenvectors();
  const Eigen::VectorXd mu = es.eigenvalues();
  const CMatrix eg = u * mu.array().exp().matrix().cast<std::complex<double>>().asDiagonal() * u.adjoint();
  const CMatrix emg = u * (-mu.array()).exp().matrix().cast<std::complex<double>>().asDiagonal() * u.adjoint();
  return (eg * phi * emg).squaredNorm();
}

struct KNConjugationEval {
  double value = 0;
  /// Traceless hermitian G with d/de l_phi(g + e v)|_0 = tr(G v) for every
  /// traceless hermitian v.
  CMatrix gradient;
};

/// Value and first variation at g. With H = e^{2g} the derivative along v
/// is Re tr([phi, H^-1 phi^dagger H] H^-1 DH[v]), DH the Frechet derivative
/// of the exponential; at g = 0 the gradient is 2 [phi, phi^dagger].
inline KNConjugationEval kn_conjugation_eval(const CMatrix& phi, const CMatrix& g) {
  detail::require_conjugation_dims(phi, g);
  const Eigen::Index n = phi.rows();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
  const CMatrix& u = es.eigenvectors();
  const Eigen::VectorXd mu = es.eigenvalues();
  auto diag_fn = [&](auto&& fn) {
    Eigen::VectorXcd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = fn(mu(i));
    return CMatrix(u * d.asDiagonal() * u.adjoint());
  };
  const CMatrix h = diag_fn([](double m) { return std::exp(2 * m); });
  const CMatrix hinv = diag_fn([](double m) { return std::exp(-2 * m); });
  const CMatrix eg = diag_fn([](double m) { return std::exp(m); });
  const CMatrix emg = diag_fn([](double m) { return std::exp(-m); });

  KNConjugationEval out;
  out.value = (eg * phi * emg).squaredNorm();

  const CMatrix conj = hinv * phi.adjoint() * h;
  const CMatrix m = (phi * conj - conj * phi) * hinv;
  // Pull M back through DH: in the eigenbasis DH acts by Hadamard product
  // with the divided differences of e^{2x}, which is self-adjoint.
  CMatrix mp = u.adjoint() * m * u;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) mp(i, j) *= detail::exp2_divided_difference(mu(i), mu(j));
  CMatrix gfull = u * mp * u.adjoint();
  CMatrix herm = 0.5 * (gfull + gfull.adjoint());
  const std::complex<double> tr = herm.trace() / static_cast<double>(n);
  herm -= tr * CMatrix::Identity(n, n);
  out.gradient = herm;
  return out;
}

/// Directional derivative of l_phi at g along v.
inline double kn_conjugation_directional(const CMatrix& phi, const CMatrix& g, const CMatrix& v) {
  return (kn_conjugation_eval(phi, g).gradient * v).trace().real();
}

}  // namespace gitstrat
