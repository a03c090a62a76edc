#pragma once

// Cross-check between a stratification of a positive-slice vector and the
// conformal degree table built from the same (x, sigma).

#include <cstdint>
#include <string>
#include <vector>

#include "gitstrat/shb_model.hpp"
#include "gitstrat/stratify.hpp"

namespace gitstrat {

struct BridgeReport {
  std::size_t identities_checked = 0;
  std::size_t filtration_checked = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// For every effective line: deg = 2 e for beta classes and deg = 2 e - 2 sigma
/// for phi classes, e the stratification exponent. For every stage j, every
/// component of u - phi_j has degree >= 2 d_j (beta) or >= 2 d_j - 2 sigma (phi).
inline BridgeReport conformal_bridge(const SHBSpec& shb, const PositiveSlice& ps, const StratifyResult& r,
                                     GradingConvention conv = GradingConvention::Default) {
  BridgeReport rep;
  const IVec x_amb = ps.torus.lift(r.x);
  const auto table = conformal_degree_table(shb, x_amb, r.sigma, conv);
  const std::int64_t s2 = 2 * r.sigma;

  std::vector<std::int64_t> exponent(ps.classes.size(), 0);
  std::vector<bool> effective(ps.classes.size(), false);
  for (const auto& e : r.exponents) {
    exponent[e.line] = e.exponent;
    effective[e.line] = true;
    const auto& c = ps.classes[e.line];
    const std::int64_t deg = table.degree(c);
    const std::int64_t want = c.type == FormType::Beta ? 2 * e.exponent : 2 * e.exponent - s2;
    ++rep.identities_checked;
    if (deg != want)
      rep.failures.push_back(c.label() + ": degree " + std::to_string(deg) + " != " + std::to_string(want));
  }

  // Lines already absorbed into phi_j before stage j's support is removed.
  std::vector<bool> in_phi(ps.classes.size(), false);
  for (std::size_t j = 0; j < r.stages.size(); ++j) {
    for (auto i : r.stages[j].nu) in_phi[i] = true;
    if (j > 0)
      for (auto i : r.stages[j - 1].support) in_phi[i] = true;
    const std::int64_t dj = r.stages[j].d;
    for (std::size_t i = 0; i < ps.classes.size(); ++i) {
      if (!effective[i] || in_phi[i]) continue;
      const auto& c = ps.classes[i];
      const std::int64_t bound = c.type == FormType::Beta ? 2 * dj : 2 * dj - s2;
      ++rep.filtration_checked;
      if (!table.in_filtration(c, bound))
        rep.failures.push_back(c.label() + ": outside F_" + std::to_string(bound) + " at stage " + std::to_string(j));
    }
  }
  return rep;
}

}  // namespace gitstrat
