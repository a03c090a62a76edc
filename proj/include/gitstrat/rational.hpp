#pragma once

// Exact rational scalars and small dense vector/matrix helpers.
//
// Everything here is backed by GMP (mpq_class / mpz_class); values are always
// kept in canonical form (reduced, positive denominator).

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gitstrat/errors.hpp"

namespace gitstrat {

using Q = mpq_class;
using Z = mpz_class;
using QVec = std::vector<Q>;
using QMat = std::vector<QVec>;  // row-major, rows share a length
using IVec = std::vector<std::int64_t>;

inline Q make_q(long num, long den = 1) {
  Q q(num, den);
  q.canonicalize();
  return q;
}

/// Parses "p", "-p" or "p/q".
inline Q parse_q(const std::string& text) {
  Q q;
  if (q.set_str(text, 10) != 0 || q.get_den() == 0) {
    throw PreconditionError("not a rational number: '" + text + "'");
  }
  q.canonicalize();
  return q;
}

inline std::string to_string(const Q& q) { return q.get_str(); }

inline QVec to_qvec(std::span<const std::int64_t> v) {
  QVec out;
  out.reserve(v.size());
  for (auto x : v) out.emplace_back(static_cast<long>(x));
  return out;
}

inline QVec zeros(std::size_t n) { return QVec(n, Q(0)); }

inline Q dot(std::span<const Q> a, std::span<const Q> b) {
  require_dims(b.size(), a.size(), "dot");
  Q s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Q dot(std::span<const std::int64_t> a, std::span<const Q> b) {
  require_dims(b.size(), a.size(), "dot");
  Q s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += Q(static_cast<long>(a[i])) * b[i];
  return s;
}

inline std::int64_t dot(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  require_dims(b.size(), a.size(), "dot");
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline QVec add(const QVec& a, const QVec& b) {
  require_dims(b.size(), a.size(), "add");
  QVec out(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

inline QVec scale(const QVec& a, const Q& s) {
  QVec out(a);
  for (auto& x : out) x *= s;
  return out;
}

inline bool is_zero(std::span<const Q> v) {
  for (const auto& x : v)
    if (sgn(x) != 0) return false;
  return true;
}

inline bool is_integral(const Q& q) { return q.get_den() == 1; }

inline bool is_integral(std::span<const Q> v) {
  for (const auto& x : v)
    if (!is_integral(x)) return false;
  return true;
}

inline std::int64_t to_int64(const Z& z) {
  if (!z.fits_slong_p()) throw InternalError("integer overflow converting " + z.get_str());
  return static_cast<std::int64_t>(z.get_si());
}

inline std::int64_t to_int64(const Q& q) {
  if (!is_integral(q)) throw PreconditionError("value is not an integer: " + q.get_str());
  return to_int64(Z(q.get_num()));
}

inline IVec to_ivec(std::span<const Q> v) {
  IVec out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(to_int64(x));
  return out;
}

/// Least common multiple of all denominators in `v` (1 for an empty span).
inline Z denominator_lcm(std::span<const Q> v) {
  Z l = 1;
  for (const auto& x : v) {
    Z d = x.get_den();
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
  }
  return l;
}

/// Smallest positive integer multiple of `v` that is integral.
inline IVec clear_denominators(const QVec& v) {
  const Z l = denominator_lcm(v);
  IVec out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(to_int64(Q(x * Q(l))));
  return out;
}

/// Exact rank over Q by fraction-based Gaussian elimination.
inline std::size_t rank(QMat rows) {
  if (rows.empty()) return 0;
  const std::size_t ncols = rows.front().size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < ncols && r < rows.size(); ++c) {
    std::size_t piv = r;
    while (piv < rows.size() && sgn(rows[piv][c]) == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[r]);
    for (std::size_t i = r + 1; i < rows.size(); ++i) {
      if (sgn(rows[i][c]) == 0) continue;
      const Q f = rows[i][c] / rows[r][c];
      for (std::size_t j = c; j < ncols; ++j) rows[i][j] -= f * rows[r][j];
    }
    ++r;
  }
  return r;
}

}  // namespace gitstrat
