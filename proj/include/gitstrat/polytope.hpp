#pragma once

// Polytopes in V-representation and the exact queries the stability and
// stratification code needs. Every answer is decided by an exact LP; no
// tolerances are involved anywhere in this header.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gitstrat/rational.hpp"
#include "gitstrat/simplex.hpp"

namespace gitstrat {

/// Convex hull of a finite list of rational points. Generators need not be
/// vertices and may repeat.
class PolytopeQ {
 public:
  PolytopeQ(std::vector<QVec> generators, std::size_t ambient_dim)
      : gens_(std::move(generators)), dim_(ambient_dim) {
    if (gens_.empty()) throw PreconditionError("PolytopeQ: empty generator list");
    for (const auto& g : gens_) require_dims(g.size(), dim_, "PolytopeQ generator");
  }

  explicit PolytopeQ(std::vector<QVec> generators)
      : PolytopeQ(generators, generators.empty() ? 0 : generators.front().size()) {}

  std::size_t ambient_dim() const { return dim_; }
  std::size_t size() const { return gens_.size(); }
  const std::vector<QVec>& generators() const { return gens_; }
  const QVec& operator[](std::size_t i) const { return gens_[i]; }

  /// Dimension of the affine hull.
  std::size_t affine_dim() const {
    QMat diffs;
    for (std::size_t i = 1; i < gens_.size(); ++i) {
      QVec d(dim_);
      for (std::size_t j = 0; j < dim_; ++j) d[j] = gens_[i][j] - gens_[0][j];
      diffs.push_back(std::move(d));
    }
    return rank(std::move(diffs));
  }

  /// Point given by convex weights over the generators.
  QVec combine(const QVec& weights) const {
    require_dims(weights.size(), gens_.size(), "PolytopeQ::combine");
    QVec out = zeros(dim_);
    for (std::size_t i = 0; i < gens_.size(); ++i)
      for (std::size_t j = 0; j < dim_; ++j) out[j] += weights[i] * gens_[i][j];
    return out;
  }

 private:
  std::vector<QVec> gens_;
  std::size_t dim_;
};

enum class HullPosition { Interior, RelativeInteriorOnly, OnProperFace, Outside };

inline const char* to_string(HullPosition p) {
  switch (p) {
    case HullPosition::Interior: return "interior";
    case HullPosition::RelativeInteriorOnly: return "relative-interior";
    case HullPosition::OnProperFace: return "proper-face";
    case HullPosition::Outside: return "outside";
  }
  return "?";
}

struct HullLocation {
  HullPosition position = HullPosition::Outside;
  /// Convex weights with combine(weights) == q; strictly positive on every
  /// generator when q is in the relative interior. Empty when Outside.
  QVec weights;
};

namespace detail {

// Variables: weights λ_0..λ_{n-1} >= 0 plus `extra` trailing variables.
inline LinearProgram representation_lp(const PolytopeQ& p, const QVec& q, std::size_t extra) {
  const std::size_t n = p.size();
  LinearProgram lp(n + extra);
  QVec ones = zeros(n + extra);
  for (std::size_t i = 0; i < n; ++i) ones[i] = 1;
  lp.add(std::move(ones), Sense::Equal, 1);
  for (std::size_t j = 0; j < p.ambient_dim(); ++j) {
    QVec row = zeros(n + extra);
    for (std::size_t i = 0; i < n; ++i) row[i] = p[i][j];
    lp.add(std::move(row), Sense::Equal, q[j]);
  }
  return lp;
}

inline QVec head(const QVec& v, std::size_t n) { return QVec(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)); }

}  // namespace detail

/// Locates q relative to the hull, with a convex-combination certificate.
inline HullLocation locate(const PolytopeQ& p, const QVec& q) {
  require_dims(q.size(), p.ambient_dim(), "hull query point");
  const std::size_t n = p.size();
  // max t  s.t.  λ_i >= t, t <= 1; t* > 0 iff q has an all-positive representation.
  auto lp = detail::representation_lp(p, q, 1);
  lp.set_free(n);
  for (std::size_t i = 0; i < n; ++i) {
    QVec row = zeros(n + 1);
    row[i] = 1;
    row[n] = -1;
    lp.add(std::move(row), Sense::GreaterEq, 0);
  }
  {
    QVec row = zeros(n + 1);
    row[n] = 1;
    lp.add(std::move(row), Sense::LessEq, 1);
  }
  QVec obj = zeros(n + 1);
  obj[n] = 1;
  lp.maximize(obj);
  const auto res = lp.solve();
  if (res.status != LpStatus::Optimal) return {HullPosition::Outside, {}};
  HullLocation out;
  out.weights = detail::head(res.x, n);
  if (sgn(res.objective) > 0) {
    out.position = p.affine_dim() == p.ambient_dim() ? HullPosition::Interior
                                                     : HullPosition::RelativeInteriorOnly;
  } else {
    out.position = HullPosition::OnProperFace;
  }
  return out;
}

inline HullPosition hull_position(const PolytopeQ& p, const QVec& q) { return locate(p, q).position; }

/// Generators lying on the face whose relative interior contains q.
inline std::vector<std::size_t> minimal_face(const PolytopeQ& p, const QVec& q) {
  const auto loc = locate(p, q);
  if (loc.position == HullPosition::Outside)
    throw PreconditionError("minimal_face: point lies outside the hull");
  std::vector<std::size_t> face;
  if (loc.position != HullPosition::OnProperFace) {
    for (std::size_t i = 0; i < p.size(); ++i) face.push_back(i);
    return face;
  }
  // Generator i is on the minimal face iff some representation of q gives it
  // positive weight.
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (sgn(loc.weights[i]) > 0) {
      face.push_back(i);
      continue;
    }
    auto lp = detail::representation_lp(p, q, 0);
    QVec obj = zeros(p.size());
    obj[i] = 1;
    lp.maximize(obj);
    const auto res = lp.solve();
    if (res.status == LpStatus::Optimal && sgn(res.objective) > 0) face.push_back(i);
  }
  return face;
}

/// Affine functional exposing a face: normal·p == offset on the face and
/// normal·p <= offset - 1 off it.
struct SupportingFunctional {
  QVec normal;
  Q offset;
};

inline std::optional<SupportingFunctional> supporting_functional(const PolytopeQ& p,
                                                                 const std::vector<std::size_t>& face) {
  const std::size_t d = p.ambient_dim();
  std::vector<bool> on(p.size(), false);
  for (auto i : face) on.at(i) = true;
  LinearProgram lp(d + 1);
  lp.set_all_free();
  for (std::size_t i = 0; i < p.size(); ++i) {
    QVec row(p[i]);
    row.push_back(-1);
    lp.add(std::move(row), on[i] ? Sense::Equal : Sense::LessEq, on[i] ? Q(0) : Q(-1));
  }
  // Lexicographically small, bounded-below objective keeps the answer deterministic.
  const auto res = lp.solve();
  if (res.status != LpStatus::Optimal) return std::nullopt;
  SupportingFunctional f;
  f.normal = detail::head(res.x, d);
  f.offset = res.x[d];
  return f;
}

/// Closed interval of ρ > 0 with ρ·e_axis in the hull. When the hull also
/// reaches ρ <= 0 along the axis line, `lower` is 0 and `lower_open` is set.
struct RayInterval {
  Q lower;
  Q upper;
  bool lower_open = false;
  QVec lower_weights;  // convex weights attaining lower (unset when lower_open)
  QVec upper_weights;
};

inline std::optional<RayInterval> ray_intersect(const PolytopeQ& p, std::size_t axis) {
  const std::size_t d = p.ambient_dim();
  if (axis >= d) throw DimensionMismatch("ray_intersect: axis out of range");
  const std::size_t n = p.size();
  LinearProgram lp(n);
  {
    QVec ones(n, Q(1));
    lp.add(std::move(ones), Sense::Equal, 1);
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (j == axis) continue;
    QVec row = zeros(n);
    for (std::size_t i = 0; i < n; ++i) row[i] = p[i][j];
    lp.add(std::move(row), Sense::Equal, 0);
  }
  QVec obj = zeros(n);
  for (std::size_t i = 0; i < n; ++i) obj[i] = p[i][axis];
  lp.maximize(obj);
  const auto hi = lp.solve();
  if (hi.status != LpStatus::Optimal || sgn(hi.objective) <= 0) return std::nullopt;
  lp.minimize(obj);
  const auto lo = lp.solve();
  RayInterval out;
  out.upper = hi.objective;
  out.upper_weights = hi.x;
  if (sgn(lo.objective) > 0) {
    out.lower = lo.objective;
    out.lower_weights = lo.x;
  } else {
    out.lower = 0;
    out.lower_open = true;
  }
  return out;
}

inline std::optional<RayInterval> ray_intersect(const PolytopeQ& p) {
  if (p.ambient_dim() == 0) throw DimensionMismatch("ray_intersect: zero-dimensional ambient space");
  return ray_intersect(p, p.ambient_dim() - 1);
}

/// coeffs·x = rhs (equality) or coeffs·x > rhs (strict inequality).
struct AffineConstraint {
  QVec coeffs;
  Q rhs;
};

/// Deterministic rational solution of a mixed system of equalities and strict
/// inequalities, or nullopt when infeasible.
///
/// Strict rows are relaxed to coeffs·x >= rhs + t and the common margin t
/// (capped at 1) is maximized first; the system is feasible iff the optimal
/// margin is positive. With the margin pinned, the L1 norm of x is minimized,
/// then x_0, x_1, ... lexicographically, which selects a unique vertex.
inline std::optional<QVec> solve_mixed_system(std::size_t num_vars,
                                              const std::vector<AffineConstraint>& equalities,
                                              const std::vector<AffineConstraint>& strict) {
  // Layout: x (free, num_vars) | t (free) | s (num_vars, s_i >= |x_i|)
  const std::size_t tv = num_vars;
  const std::size_t total = 2 * num_vars + 1;
  LinearProgram lp(total);
  for (std::size_t i = 0; i <= num_vars; ++i) lp.set_free(i);
  auto widen = [&](const QVec& c) {
    require_dims(c.size(), num_vars, "solve_mixed_system constraint");
    QVec row = zeros(total);
    for (std::size_t i = 0; i < num_vars; ++i) row[i] = c[i];
    return row;
  };
  for (const auto& e : equalities) lp.add(widen(e.coeffs), Sense::Equal, e.rhs);
  for (const auto& s : strict) {
    QVec row = widen(s.coeffs);
    row[tv] = -1;
    lp.add(std::move(row), Sense::GreaterEq, s.rhs);
  }
  for (std::size_t i = 0; i < num_vars; ++i) {
    QVec a = zeros(total), b = zeros(total);
    a[num_vars + 1 + i] = 1;
    a[i] = -1;
    b[num_vars + 1 + i] = 1;
    b[i] = 1;
    lp.add(std::move(a), Sense::GreaterEq, 0);
    lp.add(std::move(b), Sense::GreaterEq, 0);
  }
  if (!strict.empty()) {
    QVec cap = zeros(total);
    cap[tv] = 1;
    lp.add(cap, Sense::LessEq, 1);
    lp.maximize(cap);
    const auto margin = lp.solve();
    if (margin.status != LpStatus::Optimal || sgn(margin.objective) <= 0) return std::nullopt;
    lp.add(cap, Sense::Equal, margin.objective);
  } else {
    QVec pin = zeros(total);
    pin[tv] = 1;
    lp.add(std::move(pin), Sense::Equal, 0);
  }
  std::vector<QVec> objectives;
  {
    QVec l1 = zeros(total);
    for (std::size_t i = 0; i < num_vars; ++i) l1[num_vars + 1 + i] = 1;
    objectives.push_back(std::move(l1));
  }
  for (std::size_t i = 0; i < num_vars; ++i) {
    QVec e = zeros(total);
    e[i] = 1;
    objectives.push_back(std::move(e));
  }
  const auto res = lp.solve_lexicographic(objectives, /*maximize=*/false);
  if (res.status != LpStatus::Optimal) return std::nullopt;
  return detail::head(res.x, num_vars);
}

}  // namespace gitstrat
