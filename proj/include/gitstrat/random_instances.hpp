#pragma once

// Seeded random problem instances for the property-test corpus and the
// `gen` subcommand. Every generator is a pure function of its seed.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gitstrat/stability.hpp"
#include "gitstrat/torus_rep.hpp"

namespace gitstrat {

struct RandomRepOptions {
  std::size_t max_rank = 3;
  std::size_t max_lines = 10;
  std::int64_t weight_bound = 4;
  bool graded = false;
  std::int64_t rho_min = 1;
  std::int64_t rho_max = 4;
  double zero_probability = 0.0;  // chance that a line's amplitude is exactly zero
};

inline RepVector random_rep_vector(std::mt19937_64& rng, const RandomRepOptions& o) {
  std::uniform_int_distribution<std::size_t> rank_d(1, o.max_rank);
  std::uniform_int_distribution<std::size_t> lines_d(1, o.max_lines);
  std::uniform_int_distribution<std::int64_t> w(-o.weight_bound, o.weight_bound);
  std::uniform_int_distribution<std::int64_t> rho(o.rho_min, o.rho_max);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t k = rank_d(rng);
  const std::size_t n = lines_d(rng);
  std::vector<WeightLine> lines;
  std::vector<Amplitude> a;
  for (std::size_t i = 0; i < n; ++i) {
    WeightLine l;
    l.label = "l" + std::to_string(i);
    for (std::size_t j = 0; j < k; ++j) l.ell.push_back(w(rng));
    if (o.graded) l.rho = rho(rng);
    l.norm_scale = 0.5 + unit(rng);
    lines.push_back(std::move(l));
    Amplitude z(amp(rng), amp(rng));
    if (unit(rng) < o.zero_probability) z = 0;
    a.push_back(z);
  }
  if (std::all_of(a.begin(), a.end(), [](const Amplitude& z) { return z == Amplitude(0, 0); })) a.front() = 1.0;
  return RepVector(Representation(k, o.graded, std::move(lines)), std::move(a));
}

/// Random graded vector whose G-part is stable: rejection sampling over
/// random_rep_vector with the grading switched on.
inline RepVector random_stable_graded(std::mt19937_64& rng, RandomRepOptions o) {
  o.graded = true;
  for (;;) {
    RepVector v = random_rep_vector(rng, o);
    if (classify(forget_grading(v)).cls == StabilityClass::Stable) return v;
  }
}

}  // namespace gitstrat
