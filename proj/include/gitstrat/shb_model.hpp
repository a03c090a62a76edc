#pragma once

// Symbolic systems of Hodge bundles: block data, the automorphism torus of a
// polystable SHB with pairwise distinct stable summands, the G x C* weights
// of the positive slice, partition bookkeeping, and conformal degrees.
//
// Index classes are written (i, a, j, b) for Hom(E^i_a, E^j_b): (i, a) is the
// domain block and Hodge index, (j, b) the codomain. The torus t acts on such
// a class by t_i / t_j. Indices are 0-based in code and 1-based in labels.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "gitstrat/lattice.hpp"
#include "gitstrat/stability.hpp"
#include "gitstrat/torus_rep.hpp"

namespace gitstrat {

struct StableBlock {
  std::vector<std::int64_t> ranks;    // r_a, a = 1..hodge_length
  std::vector<std::int64_t> degrees;  // d_a
  std::string tag;                    // distinguishes non-isomorphic blocks with equal numeric data

  std::size_t hodge_length() const { return ranks.size(); }
  std::int64_t rank() const {
    std::int64_t r = 0;
    for (auto x : ranks) r += x;
    return r;
  }

  void validate() const {
    if (ranks.empty()) throw PreconditionError("block: hodge length must be >= 1");
    if (degrees.size() != ranks.size()) throw DimensionMismatch("block: ranks and degrees differ in length");
    std::int64_t total = 0;
    for (auto r : ranks)
      if (r < 1) throw PreconditionError("block: every rank must be >= 1");
    for (auto d : degrees) total += d;
    if (total != 0) throw PreconditionError("block: degrees must sum to 0");
    if (ranks.size() > 1 && (degrees.front() <= 0 || degrees.back() >= 0))
      throw PreconditionError("block: need deg E_1 > 0 and deg E_last < 0 when hodge length > 1");
  }

  bool operator==(const StableBlock&) const = default;
};

struct SHBSpec {
  std::int64_t genus = 2;
  std::vector<StableBlock> blocks;

  std::size_t num_blocks() const { return blocks.size(); }
  std::int64_t total_rank() const {
    std::int64_t r = 0;
    for (const auto& b : blocks) r += b.rank();
    return r;
  }
  std::vector<std::int64_t> block_ranks() const {
    std::vector<std::int64_t> r;
    for (const auto& b : blocks) r.push_back(b.rank());
    return r;
  }

  /// Blocks pairwise distinct as data, standing in for pairwise non-isomorphic.
  bool abelian() const {
    for (std::size_t i = 0; i < blocks.size(); ++i)
      for (std::size_t j = i + 1; j < blocks.size(); ++j)
        if (blocks[i] == blocks[j]) return false;
    return true;
  }

  void validate() const {
    if (genus < 2) throw PreconditionError("shb: genus must be >= 2");
    if (blocks.empty()) throw PreconditionError("shb: at least one block is required");
    for (const auto& b : blocks) b.validate();
  }
};

enum class GradingConvention {
  Default,  // Hom(E_a, E_b) has C*-weight a - b
  Flipped,  // Hom(E_a, E_b) has C*-weight b - a
};

inline std::int64_t beta_rho(std::int64_t a, std::int64_t b, GradingConvention c) {
  return c == GradingConvention::Default ? a - b : b - a;
}

/// Automorphism torus {xi in (C*)^k : prod xi_i^{r_i} = 1}.
struct AutomorphismTorus {
  std::size_t num_blocks = 0;
  std::vector<std::int64_t> relation;  // r_i
  Lattice cochar;                      // cocharacters inside Z^k, rank k - 1

  std::size_t rank() const { return cochar.rank(); }

  /// Restriction of the ambient character sum_i c_i e_i.
  IVec restrict_character(const IVec& c) const { return pair_with_basis(cochar, c); }

  IVec block_difference(std::size_t i, std::size_t j) const {
    IVec c(num_blocks, 0);
    c[i] += 1;
    c[j] -= 1;
    return restrict_character(c);
  }

  /// Ambient cocharacter with coordinates `x` in the basis of cochar.
  IVec lift(const IVec& x) const { return cochar.embed(x); }
};

inline void require_abelian(const SHBSpec& shb, const char* what) {
  shb.validate();
  if (!shb.abelian()) throw PreconditionError(std::string(what) + ": blocks are not pairwise distinct");
}

inline AutomorphismTorus automorphism_torus(const SHBSpec& shb) {
  require_abelian(shb, "automorphism_torus");
  AutomorphismTorus t;
  t.num_blocks = shb.num_blocks();
  t.relation = shb.block_ranks();
  t.cochar = saturated_kernel(std::vector<IVec>{t.relation}, t.num_blocks);
  return t;
}

enum class FormType { Beta, Phi };

struct SliceClass {
  FormType type = FormType::Beta;
  std::size_t i = 0, a = 0, j = 0, b = 0;

  std::string label() const {
    return std::string(type == FormType::Beta ? "beta" : "phi") + "[" + std::to_string(j + 1) + "." +
           std::to_string(b + 1) + "|" + std::to_string(i + 1) + "." + std::to_string(a + 1) + "]";
  }
  auto operator<=>(const SliceClass&) const = default;
};

struct PositiveSlice {
  AutomorphismTorus torus;
  Representation rep;               // graded, over the automorphism torus
  std::vector<SliceClass> classes;  // aligned with rep lines
};

/// Every index class with C*-weight >= 1, as graded weight lines over G.
inline PositiveSlice positive_slice_rep(const SHBSpec& shb, GradingConvention conv = GradingConvention::Default) {
  PositiveSlice ps;
  ps.torus = automorphism_torus(shb);
  std::vector<WeightLine> lines;
  const auto& bl = shb.blocks;
  for (int t = 0; t < 2; ++t) {
    const FormType type = t == 0 ? FormType::Beta : FormType::Phi;
    for (std::size_t i = 0; i < bl.size(); ++i)
      for (std::size_t a = 0; a < bl[i].hodge_length(); ++a)
        for (std::size_t j = 0; j < bl.size(); ++j)
          for (std::size_t b = 0; b < bl[j].hodge_length(); ++b) {
            const std::int64_t rho = beta_rho(static_cast<std::int64_t>(a), static_cast<std::int64_t>(b), conv) +
                                     (type == FormType::Phi ? 1 : 0);
            if (rho < 1) continue;
            SliceClass sc{type, i, a, j, b};
            lines.push_back({sc.label(), ps.torus.block_difference(i, j), rho, 1.0});
            ps.classes.push_back(sc);
          }
  }
  ps.rep = Representation(ps.torus.rank(), true, std::move(lines));
  return ps;
}

/// (r^2 - 1)(g - 1).
inline std::int64_t expected_dim_central_locus(std::int64_t r, std::int64_t g) {
  if (r < 2 || g < 2) throw PreconditionError("expected_dim_central_locus: need r >= 2 and g >= 2");
  return (r * r - 1) * (g - 1);
}

/// Set partition of block indices; parts sorted internally and by first element.
using Partition = std::vector<std::vector<std::size_t>>;

struct PartitionDim {
  std::int64_t dim = 0;
  std::int64_t expected = 0;  // value for the trivial partition
  bool proper = false;
  bool strictly_less = false;
};

/// sum over parts of (r_part^2 - 1)(g - 1), compared against the trivial partition.
inline PartitionDim partition_dim(const Partition& p, const std::vector<std::int64_t>& block_ranks, std::int64_t g) {
  if (g < 2) throw PreconditionError("partition_dim: genus must be >= 2");
  std::vector<int> seen(block_ranks.size(), 0);
  PartitionDim out;
  std::int64_t total = 0;
  for (const auto& part : p) {
    if (part.empty()) throw PreconditionError("partition_dim: empty part");
    std::int64_t rp = 0;
    for (auto i : part) {
      if (i >= block_ranks.size() || seen[i]++) throw PreconditionError("partition_dim: parts must be disjoint block indices");
      rp += block_ranks[i];
    }
    total += rp;
    out.dim += (rp * rp - 1) * (g - 1);
  }
  for (auto s : seen)
    if (s != 1) throw PreconditionError("partition_dim: parts must cover every block");
  out.expected = (total * total - 1) * (g - 1);
  out.proper = p.size() > 1;
  out.strictly_less = out.dim < out.expected;
  return out;
}

/// P > Q: P != Q and every part of Q lies inside a part of P.
inline bool coarser_than(const Partition& p, const Partition& q) {
  if (p == q) return false;
  for (const auto& qp : q) {
    bool inside = false;
    for (const auto& pp : p) {
      bool all = true;
      for (auto x : qp)
        if (std::find(pp.begin(), pp.end(), x) == pp.end()) {
          all = false;
          break;
        }
      if (all) {
        inside = true;
        break;
      }
    }
    if (!inside) return false;
  }
  return true;
}

struct PartitionPoset {
  std::vector<Partition> partitions;
  std::size_t trivial = 0;  // index of the one-part partition, the maximum

  bool greater(std::size_t x, std::size_t y) const { return coarser_than(partitions[x], partitions[y]); }
};

inline constexpr std::size_t kMaxPartitionBlocks = 8;

namespace detail {

inline void grow_partitions(std::size_t i, std::size_t n, Partition& cur, std::vector<Partition>& out) {
  if (i == n) {
    out.push_back(cur);
    return;
  }
  for (std::size_t p = 0; p < cur.size(); ++p) {
    cur[p].push_back(i);
    grow_partitions(i + 1, n, cur, out);
    cur[p].pop_back();
  }
  cur.push_back({i});
  grow_partitions(i + 1, n, cur, out);
  cur.pop_back();
}

}  // namespace detail

/// All set partitions of {0, ..., n-1}.
inline std::vector<Partition> set_partitions(std::size_t n) {
  if (n > kMaxPartitionBlocks) throw PreconditionError("set_partitions: more than 8 blocks");
  std::vector<Partition> out;
  if (n == 0) return out;
  Partition cur;
  detail::grow_partitions(0, n, cur, out);
  return out;
}

inline PartitionPoset partitions_with_order(const SHBSpec& shb) {
  shb.validate();
  PartitionPoset poset;
  poset.partitions = set_partitions(shb.num_blocks());
  for (std::size_t i = 0; i < poset.partitions.size(); ++i)
    if (poset.partitions[i].size() == 1) poset.trivial = i;
  return poset;
}

struct RRBound {
  std::int64_t bound = 0;
  bool positive = false;
};

/// h^1 >= max(0, -deg + r1 r2 (g - 1)) for Hom between stable bundles of ranks r1, r2.
inline RRBound rr_h1_lower_bound(std::int64_t r1, std::int64_t r2, std::int64_t deg, std::int64_t g) {
  if (r1 < 1 || r2 < 1 || g < 2) throw PreconditionError("rr_h1_lower_bound: need r1, r2 >= 1 and g >= 2");
  RRBound out;
  out.bound = std::max<std::int64_t>(0, -deg + r1 * r2 * (g - 1));
  out.positive = out.bound > 0;
  return out;
}

struct CyclicPhi {
  AutomorphismTorus torus;
  RepVector vector;  // lines phi[i+1|i], unit amplitudes
  StabilityResult verdict;
};

/// phi = sum_i phi_i, where xi acts on phi_i by xi_{i+1} / xi_i (indices cyclic).
inline CyclicPhi cyclic_phi_weights(const SHBSpec& shb) {
  require_abelian(shb, "cyclic_phi_weights");
  const std::size_t k = shb.num_blocks();
  if (k < 2) throw PreconditionError("cyclic_phi_weights: need at least two blocks");
  CyclicPhi out;
  out.torus = automorphism_torus(shb);
  std::vector<WeightLine> lines;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t next = (i + 1) % k;
    lines.push_back({"phi[" + std::to_string(next + 1) + "|" + std::to_string(i + 1) + "]",
                     out.torus.block_difference(next, i), 0, 1.0});
  }
  Representation rep(out.torus.rank(), false, std::move(lines));
  out.vector = RepVector(rep, std::vector<Amplitude>(k, Amplitude(1.0, 0.0)));
  out.verdict = classify(out.vector);
  return out;
}

/// Degrees 2 sigma rho_beta(a, b) + 2 x_i - 2 x_j of every index class, for
/// an ambient cocharacter x of (C*)^k.
class ConformalDegreeTable {
 public:
  using Index = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;  // (i, a, j, b)

  ConformalDegreeTable(const SHBSpec& shb, const IVec& x, std::int64_t sigma,
                       GradingConvention conv = GradingConvention::Default)
      : sigma_(sigma) {
    shb.validate();
    require_dims(x.size(), shb.num_blocks(), "conformal_degree_table cocharacter");
    if (sigma < 1) throw PreconditionError("conformal_degree_table: sigma must be >= 1");
    const auto& bl = shb.blocks;
    for (std::size_t i = 0; i < bl.size(); ++i)
      for (std::size_t a = 0; a < bl[i].hodge_length(); ++a)
        for (std::size_t j = 0; j < bl.size(); ++j)
          for (std::size_t b = 0; b < bl[j].hodge_length(); ++b)
            table_[{i, a, j, b}] =
                2 * sigma * beta_rho(static_cast<std::int64_t>(a), static_cast<std::int64_t>(b), conv) +
                2 * x[i] - 2 * x[j];
  }

  std::int64_t sigma() const { return sigma_; }
  std::int64_t degree(std::size_t i, std::size_t a, std::size_t j, std::size_t b) const {
    auto it = table_.find({i, a, j, b});
    if (it == table_.end()) throw PreconditionError("conformal degree: index out of range");
    return it->second;
  }
  std::int64_t degree(const SliceClass& c) const { return degree(c.i, c.a, c.j, c.b); }
  const std::map<Index, std::int64_t>& entries() const { return table_; }

  /// Index classes of degree exactly d.
  std::vector<Index> graded_piece(std::int64_t d) const {
    std::vector<Index> out;
    for (const auto& [k, v] : table_)
      if (v == d) out.push_back(k);
    return out;
  }

  /// Membership of a class in the filtration piece of degree >= d.
  bool in_filtration(const SliceClass& c, std::int64_t d) const { return degree(c) >= d; }

 private:
  std::int64_t sigma_;
  std::map<Index, std::int64_t> table_;
};

inline ConformalDegreeTable conformal_degree_table(const SHBSpec& shb, const IVec& x, std::int64_t sigma,
                                                   GradingConvention conv = GradingConvention::Default) {
  return ConformalDegreeTable(shb, x, sigma, conv);
}

}  // namespace gitstrat
