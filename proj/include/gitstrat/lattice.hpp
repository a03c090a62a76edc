#pragma once

// Integer lattices: saturated kernels of weight lists and Hermite normal form.
// Internal arithmetic is mpz; results are narrowed to int64 and checked.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "gitstrat/rational.hpp"

namespace gitstrat {

using ZVec = std::vector<Z>;

/// A saturated sublattice of Z^ambient_dim, given by a basis in row Hermite
/// normal form.
struct Lattice {
  std::size_t ambient_dim = 0;
  std::vector<IVec> basis;

  std::size_t rank() const { return basis.size(); }
  bool empty() const { return basis.empty(); }

  static Lattice whole(std::size_t k) {
    Lattice l{k, {}};
    for (std::size_t i = 0; i < k; ++i) {
      IVec e(k, 0);
      e[i] = 1;
      l.basis.push_back(std::move(e));
    }
    return l;
  }
  static Lattice trivial(std::size_t k) { return Lattice{k, {}}; }

  /// Ambient vector with the given coordinates in this basis.
  IVec embed(const IVec& coords) const {
    require_dims(coords.size(), basis.size(), "Lattice::embed");
    IVec out(ambient_dim, 0);
    for (std::size_t b = 0; b < basis.size(); ++b)
      for (std::size_t j = 0; j < ambient_dim; ++j) out[j] += coords[b] * basis[b][j];
    return out;
  }

  QVec embed(const QVec& coords) const {
    require_dims(coords.size(), basis.size(), "Lattice::embed");
    QVec out = zeros(ambient_dim);
    for (std::size_t b = 0; b < basis.size(); ++b)
      for (std::size_t j = 0; j < ambient_dim; ++j)
        out[j] += coords[b] * Q(static_cast<long>(basis[b][j]));
    return out;
  }

  bool operator==(const Lattice&) const = default;
};

namespace detail {

inline std::vector<ZVec> to_z(const std::vector<IVec>& rows) {
  std::vector<ZVec> out;
  for (const auto& r : rows) {
    ZVec z;
    for (auto v : r) z.emplace_back(static_cast<long>(v));
    out.push_back(std::move(z));
  }
  return out;
}

inline IVec narrow(const ZVec& v) {
  IVec out;
  for (const auto& z : v) out.push_back(to_int64(z));
  return out;
}

// Floor division for mpz (rounds toward -inf).
inline Z floor_div(const Z& a, const Z& b) {
  Z q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

}  // namespace detail

/// Row-style Hermite normal form of the lattice spanned by `rows`: zero rows
/// dropped, pivots positive and increasing in column, entries above each
/// pivot reduced into [0, pivot).
inline std::vector<ZVec> hermite_normal_form(std::vector<ZVec> rows) {
  if (rows.empty()) return rows;
  const std::size_t n = rows.front().size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < rows.size(); ++c) {
    // Euclid on column c among rows r.. until a single nonzero remains.
    for (;;) {
      std::size_t best = rows.size();
      for (std::size_t i = r; i < rows.size(); ++i) {
        if (sgn(rows[i][c]) == 0) continue;
        if (best == rows.size() || abs(rows[i][c]) < abs(rows[best][c])) best = i;
      }
      if (best == rows.size()) break;
      std::swap(rows[r], rows[best]);
      bool others = false;
      for (std::size_t i = r + 1; i < rows.size(); ++i) {
        if (sgn(rows[i][c]) == 0) continue;
        const Z q = detail::floor_div(rows[i][c], rows[r][c]);
        for (std::size_t j = c; j < n; ++j) rows[i][j] -= q * rows[r][j];
        if (sgn(rows[i][c]) != 0) others = true;
      }
      if (!others) break;
    }
    if (sgn(rows[r][c]) == 0) continue;
    if (sgn(rows[r][c]) < 0)
      for (auto& v : rows[r]) v = -v;
    for (std::size_t i = 0; i < r; ++i) {
      const Z q = detail::floor_div(rows[i][c], rows[r][c]);
      if (sgn(q) == 0) continue;
      for (std::size_t j = c; j < n; ++j) rows[i][j] -= q * rows[r][j];
    }
    ++r;
  }
  rows.resize(r);
  return rows;
}

inline std::vector<IVec> hermite_normal_form(const std::vector<IVec>& rows) {
  std::vector<IVec> out;
  for (const auto& z : hermite_normal_form(detail::to_z(rows))) out.push_back(detail::narrow(z));
  return out;
}

/// Basis of the integer kernel lattice {x in Z^dim : <w, x> = 0 for all w}.
/// The kernel of an integer matrix is always saturated; the basis is
/// produced by a unimodular column reduction and canonicalized by HNF.
inline Lattice saturated_kernel(const std::vector<IVec>& weights, std::size_t dim) {
  for (const auto& w : weights) require_dims(w.size(), dim, "saturated_kernel weight");
  auto a = detail::to_z(weights);  // m x dim, reduced by column operations
  std::vector<ZVec> u(dim, ZVec(dim, Z(0)));  // columns of u track the transform
  for (std::size_t i = 0; i < dim; ++i) u[i][i] = 1;
  auto col_axpy = [&](std::size_t dst, std::size_t src, const Z& f) {
    for (auto& row : a) row[dst] -= f * row[src];
    for (auto& row : u) row[dst] -= f * row[src];
  };
  auto col_swap = [&](std::size_t x, std::size_t y) {
    for (auto& row : a) std::swap(row[x], row[y]);
    for (auto& row : u) std::swap(row[x], row[y]);
  };
  std::size_t pivot = 0;
  for (std::size_t i = 0; i < a.size() && pivot < dim; ++i) {
    for (;;) {
      std::size_t best = dim;
      for (std::size_t c = pivot; c < dim; ++c) {
        if (sgn(a[i][c]) == 0) continue;
        if (best == dim || abs(a[i][c]) < abs(a[i][best])) best = c;
      }
      if (best == dim) break;
      col_swap(pivot, best);
      bool others = false;
      for (std::size_t c = pivot + 1; c < dim; ++c) {
        if (sgn(a[i][c]) == 0) continue;
        col_axpy(c, pivot, detail::floor_div(a[i][c], a[i][pivot]));
        if (sgn(a[i][c]) != 0) others = true;
      }
      if (!others) {
        ++pivot;
        break;
      }
    }
  }
  std::vector<ZVec> kernel;
  for (std::size_t c = pivot; c < dim; ++c) {
    ZVec v(dim);
    for (std::size_t j = 0; j < dim; ++j) v[j] = u[j][c];
    kernel.push_back(std::move(v));
  }
  Lattice out{dim, {}};
  for (const auto& z : hermite_normal_form(std::move(kernel))) out.basis.push_back(detail::narrow(z));
  return out;
}

/// Rational weights are scaled row-wise to integers first; the kernel is unchanged.
inline Lattice saturated_kernel(const std::vector<QVec>& weights, std::size_t dim) {
  std::vector<IVec> ints;
  for (const auto& w : weights) {
    require_dims(w.size(), dim, "saturated_kernel weight");
    ints.push_back(clear_denominators(w));
  }
  return saturated_kernel(ints, dim);
}

/// Sublattice of `outer` whose coordinates (in outer's basis) form `inner`.
/// Composing saturated inclusions keeps the result saturated.
inline Lattice compose(const Lattice& outer, const Lattice& inner) {
  require_dims(inner.ambient_dim, outer.rank(), "compose");
  std::vector<IVec> rows;
  for (const auto& c : inner.basis) rows.push_back(outer.embed(c));
  return Lattice{outer.ambient_dim, hermite_normal_form(rows)};
}

/// Pairings <w, b> of `w` against each basis vector.
inline QVec pair_with_basis(const Lattice& l, const QVec& w) {
  require_dims(w.size(), l.ambient_dim, "pair_with_basis");
  QVec out;
  for (const auto& b : l.basis) out.push_back(dot(std::span<const std::int64_t>(b), std::span<const Q>(w)));
  return out;
}

inline IVec pair_with_basis(const Lattice& l, const IVec& w) {
  require_dims(w.size(), l.ambient_dim, "pair_with_basis");
  IVec out;
  for (const auto& b : l.basis) out.push_back(dot(std::span<const std::int64_t>(b), std::span<const std::int64_t>(w)));
  return out;
}

}  // namespace gitstrat
