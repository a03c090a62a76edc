#pragma once

// Torus representations as lists of weight-labeled coordinate lines.
//
// A line carries a G-weight ell in Z^rank and, for graded representations, a
// C*-weight rho. Vectors are complex amplitudes, one per line. Only exact
// nonzero-ness of amplitudes enters any combinatorial decision.

#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "gitstrat/lattice.hpp"
#include "gitstrat/rational.hpp"

namespace gitstrat {

using Amplitude = std::complex<double>;

/// Full weight of a line: G-part plus the graded coordinate (0 if ungraded).
struct Weight {
  IVec ell;
  std::int64_t rho = 0;
  auto operator<=>(const Weight&) const = default;
  bool operator==(const Weight&) const = default;
};

struct WeightLine {
  std::string label;
  IVec ell;
  std::int64_t rho = 0;
  double norm_scale = 1.0;  // squared norm of a unit amplitude on this line

  Weight weight() const { return {ell, rho}; }
};

class Representation {
 public:
  Representation() = default;
  Representation(std::size_t rank, bool graded, std::vector<WeightLine> lines)
      : rank_(rank), graded_(graded), lines_(std::move(lines)) {
    std::unordered_set<std::string> seen;
    for (const auto& l : lines_) {
      require_dims(l.ell.size(), rank_, "weight line");
      if (!(l.norm_scale > 0) || !std::isfinite(l.norm_scale))
        throw PreconditionError("line '" + l.label + "': norm scale must be positive and finite");
      if (!graded_ && l.rho != 0) throw PreconditionError("line '" + l.label + "': rho set on an ungraded representation");
      if (!seen.insert(l.label).second) throw PreconditionError("duplicate line label '" + l.label + "'");
    }
  }

  std::size_t rank() const { return rank_; }
  bool graded() const { return graded_; }
  std::size_t size() const { return lines_.size(); }
  const std::vector<WeightLine>& lines() const { return lines_; }
  const WeightLine& operator[](std::size_t i) const { return lines_[i]; }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < lines_.size(); ++i)
      if (lines_[i].label == label) return i;
    throw PreconditionError("unknown line label '" + label + "'");
  }

 private:
  std::size_t rank_ = 0;
  bool graded_ = false;
  std::vector<WeightLine> lines_;
};

class RepVector {
 public:
  RepVector() = default;
  RepVector(Representation rep, std::vector<Amplitude> amplitudes)
      : rep_(std::move(rep)), amps_(std::move(amplitudes)) {
    require_dims(amps_.size(), rep_.size(), "RepVector amplitudes");
    for (const auto& a : amps_)
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw PreconditionError("non-finite amplitude");
  }

  /// Builds a vector from label -> amplitude pairs; unnamed lines are zero.
  static RepVector from_components(Representation rep, const std::map<std::string, Amplitude>& comps) {
    std::vector<Amplitude> a(rep.size());
    for (const auto& [label, value] : comps) a[rep.index_of(label)] = value;
    return RepVector(std::move(rep), std::move(a));
  }

  const Representation& rep() const { return rep_; }
  const std::vector<Amplitude>& amplitudes() const { return amps_; }
  const Amplitude& operator[](std::size_t i) const { return amps_[i]; }
  std::size_t size() const { return amps_.size(); }

  bool nonzero_at(std::size_t i) const { return amps_[i] != Amplitude(0.0, 0.0); }
  bool is_zero() const {
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if (nonzero_at(i)) return false;
    return true;
  }

  /// ||v_i||^2 for line i under the line metric.
  double squared_norm(std::size_t i) const { return rep_[i].norm_scale * std::norm(amps_[i]); }

  RepVector with_amplitudes(std::vector<Amplitude> a) const { return RepVector(rep_, std::move(a)); }

 private:
  Representation rep_;
  std::vector<Amplitude> amps_;
};

/// Sub-torus of a rank-k torus, described by its saturated cocharacter lattice.
using Subtorus = Lattice;

/// Distinct full weights (ell, rho) carrying a nonzero amplitude.
inline std::set<Weight> effective_weights(const RepVector& v) {
  std::set<Weight> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v.nonzero_at(i)) out.insert(v.rep()[i].weight());
  return out;
}

/// Distinct G-weights carrying a nonzero amplitude, in lexicographic order.
inline std::vector<IVec> effective_g_weights(const RepVector& v) {
  std::set<IVec> s;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v.nonzero_at(i)) s.insert(v.rep()[i].ell);
  return {s.begin(), s.end()};
}

/// Keeps the components whose full weight lies in `s`.
inline RepVector project(const RepVector& v, const std::set<Weight>& s) {
  std::vector<Amplitude> a(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (s.contains(v.rep()[i].weight())) a[i] = v[i];
  return v.with_amplitudes(std::move(a));
}

/// Keeps the components selected by `keep`, indexed by line.
inline RepVector mask(const RepVector& v, const std::vector<bool>& keep) {
  require_dims(keep.size(), v.size(), "mask");
  std::vector<Amplitude> a(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (keep[i]) a[i] = v[i];
  return v.with_amplitudes(std::move(a));
}

inline RepVector subtract(const RepVector& a, const RepVector& b) {
  require_dims(b.size(), a.size(), "subtract");
  std::vector<Amplitude> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return a.with_amplitudes(std::move(out));
}

inline bool fixed_by(const IVec& ell, const Subtorus& h) {
  for (const auto& b : h.basis)
    if (dot(std::span<const std::int64_t>(ell), std::span<const std::int64_t>(b)) != 0) return false;
  return true;
}

/// Components whose G-weight pairs to zero with every cocharacter of `h`.
inline RepVector fixed_part(const RepVector& v, const Subtorus& h) {
  require_dims(h.ambient_dim, v.rep().rank(), "fixed_part subtorus");
  std::vector<Amplitude> a(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (fixed_by(v.rep()[i].ell, h)) a[i] = v[i];
  return v.with_amplitudes(std::move(a));
}

/// Lines with each G-weight replaced by its pairings against h's basis.
inline std::vector<WeightLine> restrict_weights(const Representation& rep, const Subtorus& h) {
  require_dims(h.ambient_dim, rep.rank(), "restrict_weights subtorus");
  std::vector<WeightLine> out;
  for (const auto& l : rep.lines()) {
    WeightLine r = l;
    r.ell = pair_with_basis(h, l.ell);
    out.push_back(std::move(r));
  }
  return out;
}

inline Representation restrict_rep(const Representation& rep, const Subtorus& h) {
  return Representation(h.rank(), rep.graded(), restrict_weights(rep, h));
}

inline RepVector restrict_vector(const RepVector& v, const Subtorus& h) {
  return RepVector(restrict_rep(v.rep(), h), v.amplitudes());
}

/// Same vector viewed as a representation of G alone (graded coordinate dropped).
inline RepVector forget_grading(const RepVector& v) {
  std::vector<WeightLine> lines = v.rep().lines();
  for (auto& l : lines) l.rho = 0;
  return RepVector(Representation(v.rep().rank(), false, std::move(lines)), v.amplitudes());
}

/// Exponent sigma*rho + <ell, x> of t on line `line` under (x(t), sigma(t)).
inline Q line_exponent(const WeightLine& line, const QVec& x, const Q& sigma) {
  return sigma * Q(static_cast<long>(line.rho)) + dot(std::span<const std::int64_t>(line.ell), std::span<const Q>(x));
}

inline std::int64_t line_exponent(const WeightLine& line, const IVec& x, std::int64_t sigma) {
  return sigma * line.rho + dot(std::span<const std::int64_t>(line.ell), std::span<const std::int64_t>(x));
}

/// Integer exponents of t on every effective component under the
/// one-parameter subgroup (x(t), sigma(t)).
inline std::map<std::string, std::int64_t> one_ps_exponents(const RepVector& v, const QVec& x, const Q& sigma) {
  require_dims(x.size(), v.rep().rank(), "one_ps_exponents cocharacter");
  if (!is_integral(std::span<const Q>(x))) throw PreconditionError("one_ps_exponents: cocharacter is not integral");
  if (!is_integral(sigma)) throw PreconditionError("one_ps_exponents: sigma is not integral");
  const IVec xi = to_ivec(x);
  const std::int64_t s = to_int64(sigma);
  std::map<std::string, std::int64_t> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v.nonzero_at(i)) out[v.rep()[i].label] = line_exponent(v.rep()[i], xi, s);
  return out;
}

inline std::map<std::string, std::int64_t> one_ps_exponents(const RepVector& v, const IVec& x, std::int64_t sigma) {
  return one_ps_exponents(v, to_qvec(x), Q(static_cast<long>(sigma)));
}

/// exp(x) . v for a real cocharacter x: each amplitude scaled by e^{<ell, x>}.
inline RepVector act_real(const RepVector& v, const std::vector<double>& x) {
  require_dims(x.size(), v.rep().rank(), "act_real cocharacter");
  std::vector<Amplitude> a(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double p = 0;
    for (std::size_t j = 0; j < x.size(); ++j) p += static_cast<double>(v.rep()[i].ell[j]) * x[j];
    a[i] = v[i] * std::exp(p);
  }
  return v.with_amplitudes(std::move(a));
}

}  // namespace gitstrat
