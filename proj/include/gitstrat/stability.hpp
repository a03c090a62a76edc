#pragma once

// Torus stability via the weight polytope: 0 in the interior, relative
// interior, boundary, or outside of the hull of the effective weights.

#include <cstdint>
#include <optional>
#include <vector>

#include "gitstrat/lattice.hpp"
#include "gitstrat/polytope.hpp"
#include "gitstrat/torus_rep.hpp"

namespace gitstrat {

enum class StabilityClass { Unstable, SemistableNotPolystable, PolystableNotStable, Stable };

inline const char* to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::Unstable: return "unstable";
    case StabilityClass::SemistableNotPolystable: return "semistable";
    case StabilityClass::PolystableNotStable: return "polystable";
    case StabilityClass::Stable: return "stable";
  }
  return "?";
}

inline bool is_polystable(StabilityClass c) {
  return c == StabilityClass::Stable || c == StabilityClass::PolystableNotStable;
}

/// Evidence for a classification, checkable with exact arithmetic.
///
/// `combination` expresses 0 as a convex combination of `weights` (strictly
/// positive for the polystable classes). `cocharacter` pairs nonnegatively
/// with every weight and positively with at least one (with all of them when
/// Unstable). `flat` spans the directions pairing to zero with every weight.
struct StabilityCertificate {
  std::vector<IVec> weights;
  QVec combination;
  std::optional<IVec> cocharacter;
  Lattice flat;
};

struct StabilityResult {
  StabilityClass cls = StabilityClass::Unstable;
  StabilityCertificate certificate;
};

namespace detail {

inline std::vector<QVec> to_points(const std::vector<IVec>& ws) {
  std::vector<QVec> pts;
  for (const auto& w : ws) pts.push_back(to_qvec(w));
  return pts;
}

// x with <w, x> >= 1 for every w, or nullopt.
inline std::optional<IVec> separating_cocharacter(const std::vector<IVec>& ws, std::size_t rank) {
  LinearProgram lp(rank);
  lp.set_all_free();
  for (const auto& w : ws) lp.add(to_qvec(w), Sense::GreaterEq, 1);
  const auto res = lp.solve();
  if (res.status != LpStatus::Optimal) return std::nullopt;
  return clear_denominators(res.x);
}

}  // namespace detail

/// Classifies a nonempty list of distinct G-weights (the effective weights).
inline StabilityResult classify_weights(const std::vector<IVec>& weights, std::size_t rank) {
  if (weights.empty()) throw PreconditionError("classify: zero vector has no stability class");
  PolytopeQ hull(detail::to_points(weights), rank);
  const QVec origin = zeros(rank);
  const auto loc = locate(hull, origin);
  StabilityResult r;
  r.certificate.weights = weights;
  r.certificate.combination = loc.weights;
  r.certificate.flat = saturated_kernel(weights, rank);
  switch (loc.position) {
    case HullPosition::Interior:
      r.cls = StabilityClass::Stable;
      break;
    case HullPosition::RelativeInteriorOnly:
      r.cls = StabilityClass::PolystableNotStable;
      break;
    case HullPosition::OnProperFace: {
      r.cls = StabilityClass::SemistableNotPolystable;
      const auto face = minimal_face(hull, origin);
      const auto f = supporting_functional(hull, face);
      if (!f || sgn(f->offset) != 0) throw InternalError("classify: no supporting functional through the origin");
      QVec x = f->normal;
      for (auto& c : x) c = -c;
      r.certificate.cocharacter = clear_denominators(x);
      break;
    }
    case HullPosition::Outside: {
      r.cls = StabilityClass::Unstable;
      r.certificate.cocharacter = detail::separating_cocharacter(weights, rank);
      if (!r.certificate.cocharacter) throw InternalError("classify: origin outside hull but no separating cocharacter");
      break;
    }
  }
  return r;
}

/// Stability of v under its full torus, from its effective G-weights.
inline StabilityResult classify(const RepVector& v) {
  if (v.is_zero()) throw PreconditionError("classify: zero vector has no stability class");
  return classify_weights(effective_g_weights(v), v.rep().rank());
}

/// Re-checks every claim of the certificate exactly.
inline bool verify_certificate(const StabilityResult& r, std::size_t rank) {
  const auto& c = r.certificate;
  if (c.weights.empty()) return false;
  for (const auto& w : c.weights)
    if (w.size() != rank) return false;
  auto pairing = [&](const IVec& w, const IVec& x) {
    return dot(std::span<const std::int64_t>(w), std::span<const std::int64_t>(x));
  };
  auto combination_ok = [&](bool strict) {
    if (c.combination.size() != c.weights.size()) return false;
    Q total = 0;
    QVec sum = zeros(rank);
    for (std::size_t i = 0; i < c.weights.size(); ++i) {
      const int s = sgn(c.combination[i]);
      if (s < 0 || (strict && s == 0)) return false;
      total += c.combination[i];
      for (std::size_t j = 0; j < rank; ++j) sum[j] += c.combination[i] * Q(static_cast<long>(c.weights[i][j]));
    }
    return total == 1 && is_zero(sum);
  };
  auto flat_ok = [&]() {
    if (c.flat.ambient_dim != rank) return false;
    for (const auto& b : c.flat.basis)
      for (const auto& w : c.weights)
        if (pairing(w, b) != 0) return false;
    QMat rows;
    for (const auto& w : c.weights) rows.push_back(to_qvec(w));
    return rank - gitstrat::rank(rows) == c.flat.rank();
  };
  switch (r.cls) {
    case StabilityClass::Stable:
      return combination_ok(true) && flat_ok() && c.flat.empty();
    case StabilityClass::PolystableNotStable:
      return combination_ok(true) && flat_ok() && !c.flat.empty();
    case StabilityClass::SemistableNotPolystable: {
      if (!combination_ok(false) || !c.cocharacter) return false;
      bool some_positive = false;
      for (const auto& w : c.weights) {
        const auto p = pairing(w, *c.cocharacter);
        if (p < 0) return false;
        if (p > 0) some_positive = true;
      }
      return some_positive;
    }
    case StabilityClass::Unstable: {
      if (!c.cocharacter) return false;
      for (const auto& w : c.weights)
        if (pairing(w, *c.cocharacter) <= 0) return false;
      return true;
    }
  }
  return false;
}

/// First integer x != 0 in [-B, B]^k with <w, x> >= 0 for all effective w.
/// Candidates are scanned lexicographically with each coordinate running
/// through 0, 1, -1, 2, -2, ..., so simple directions are found first.
inline std::optional<IVec> destabilizer_bruteforce(const std::vector<IVec>& weights, std::size_t rank,
                                                   std::int64_t box_bound) {
  if (box_bound < 1) throw PreconditionError("destabilizer_bruteforce: box bound must be >= 1");
  if (rank == 0) return std::nullopt;
  std::vector<std::int64_t> order;
  order.push_back(0);
  for (std::int64_t b = 1; b <= box_bound; ++b) {
    order.push_back(b);
    order.push_back(-b);
  }
  std::vector<std::size_t> idx(rank, 0);
  IVec x(rank, 0);
  for (;;) {
    // advance odometer (last coordinate fastest)
    std::size_t pos = rank;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < order.size()) break;
      idx[pos] = 0;
      if (pos == 0) return std::nullopt;
    }
    for (std::size_t j = 0; j < rank; ++j) x[j] = order[idx[j]];
    bool ok = true;
    for (const auto& w : weights) {
      std::int64_t p = 0;
      for (std::size_t j = 0; j < rank; ++j) p += w[j] * x[j];
      if (p < 0) {
        ok = false;
        break;
      }
    }
    if (ok) return x;
  }
}

inline std::optional<IVec> destabilizer_bruteforce(const RepVector& v, std::int64_t box_bound) {
  return destabilizer_bruteforce(effective_g_weights(v), v.rep().rank(), box_bound);
}

}  // namespace gitstrat
