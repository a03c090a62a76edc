// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "gitstrat/gitstrat.hpp"

using namespace gitstrat;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

RepVector make_rep(std::size_t rank, bool graded, const std::vector<std::tuple<IVec, std::int64_t, double, Amplitude>>& items) {
  std::vector<WeightLine> lines;
  std::vector<Amplitude> amps;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& [ell, rho, norm, a] = items[i];
    lines.push_back({"u" + std::to_string(i), ell, rho, norm});
    amps.push_back(a);
  }
  return RepVector(Representation(rank, graded, std::move(lines)), std::move(amps));
}

SHBSpec line_blocks(const std::vector<std::int64_t>& ranks, std::int64_t g = 2) {
  SHBSpec s;
  s.genus = g;
  for (std::size_t i = 0; i < ranks.size(); ++i) s.blocks.push_back({{ranks[i]}, {0}, "L" + std::to_string(i)});
  return s;
}

// 1. classify, kn_minimize and the brute-force oracle agree on stable / not stable.
Outcome tri_equivalence() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  RandomRepOptions opt;
  opt.max_rank = 3;
  opt.max_lines = 10;
  opt.weight_bound = 4;
  opt.zero_probability = 0.15;
  int stable = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto v = random_rep_vector(rng, opt);
    const bool by_hull = classify(v).cls == StabilityClass::Stable;
    const bool by_kn = kn_minimize(v).status == KNStatus::Converged;
    const bool by_brute = !destabilizer_bruteforce(v, 50).has_value();
    stable += by_hull;
    if (by_hull != by_kn || by_hull != by_brute)
      o.fail("disagreement at trial " + std::to_string(trial));
  }
  const double secs = seconds_since(t0);
  if (secs >= 60) o.fail("runtime " + std::to_string(secs) + " s");
  std::ostringstream d;
  d << "500 instances, " << stable << " stable, " << secs << " s";
  if (o.pass) o.detail = d.str();
  return o;
}

// 2. Weights +-1 with squared norms (4, 1).
Outcome closed_form_kn() {
  Outcome o;
  const auto v = make_rep(1, false, {{{1}, 0, 1.0, 2.0}, {{-1}, 0, 1.0, 1.0}});
  const auto r = kn_minimize(v);
  const double ex = -std::log(2.0) / 2;
  const double dx = std::abs(r.minimizer(0) - ex), dv = std::abs(r.value - 4.0);
  if (r.status != KNStatus::Converged) o.fail("status " + std::string(to_string(r.status)));
  if (dx >= 1e-8) o.fail("minimizer error " + std::to_string(dx));
  if (dv >= 1e-8) o.fail("value error " + std::to_string(dv));
  std::ostringstream d;
  d << "|x+ln2/2| = " << dx << ", |l-4| = " << dv;
  if (o.pass) o.detail = d.str();
  return o;
}

// 3. The two worked stratifications.
Outcome worked_examples() {
  Outcome o;
  const auto a = stratify(make_rep(1, true, {{{1}, 1, 1.0, 1.0}, {{-1}, 2, 1.0, 1.0}}));
  if (!(a.x == IVec{1} && a.sigma == 2 && a.k() == 1 && a.degrees() == std::vector<std::int64_t>{3} && a.residual.empty()))
    o.fail("rank-1 example differs");
  const auto b = stratify(make_rep(1, true, {{{0}, 1, 1.0, 1.0}, {{1}, 1, 1.0, 1.0}, {{-1}, 3, 1.0, 1.0}}));
  bool nu_ok = false;
  for (const auto& e : b.exponents)
    if (e.role == ComponentRole::Nu && e.stage == 0) nu_ok = e.exponent == 1;
  if (!(b.k() >= 1 && b.stages[0].c == Q(2) && b.x == IVec{1} && b.sigma == 1 && b.stages[0].d == 2 && nu_ok))
    o.fail("three-line example differs");
  if (o.pass) o.detail = "x=1 sigma=2 d0=3 u1=0; c0=2 x=1 sigma=1 d0=2 nu exponent 1";
  return o;
}

// 4. Postconditions on random stable graded inputs.
Outcome stratification_postconditions() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240602);
  RandomRepOptions opt;
  opt.max_rank = 2;
  opt.rho_min = 1;
  opt.rho_max = 4;
  opt.zero_probability = 0.1;
  std::size_t max_k = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto u = random_stable_graded(rng, opt);
    try {
      const auto r = stratify(u);
      const auto rep = verify_decomposition(r, u);
      for (const auto& c : rep.checks)
        if (!c.passed) o.fail("trial " + std::to_string(trial) + ": " + c.name + " " + c.detail);
      if (r.k() > u.rep().rank() + 1) o.fail("trial " + std::to_string(trial) + ": too many stages");
      max_k = std::max(max_k, r.k());
    } catch (const std::exception& e) {
      o.fail("trial " + std::to_string(trial) + ": " + e.what());
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 120) o.fail("runtime " + std::to_string(secs) + " s");
  std::ostringstream d;
  d << "200 inputs all verified, max stages " << max_k << ", " << secs << " s";
  if (o.pass) o.detail = d.str();
  return o;
}

void rank_multisets(std::int64_t budget, std::int64_t min_part, std::vector<std::int64_t>& cur,
                    const std::function<void(const std::vector<std::int64_t>&)>& visit) {
  if (!cur.empty()) visit(cur);
  for (std::int64_t r = min_part; r <= budget; ++r) {
    cur.push_back(r);
    rank_multisets(budget - r, r, cur, visit);
    cur.pop_back();
  }
}

// 5. Expected dimension table and strict drop on proper partitions.
Outcome dimension_formulas() {
  Outcome o;
  const std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> table = {
      {{2, 2}, 3}, {{2, 3}, 6}, {{3, 2}, 8}, {{3, 3}, 16}, {{4, 2}, 15}, {{4, 3}, 30}};
  for (const auto& [rg, want] : table)
    if (expected_dim_central_locus(rg.first, rg.second) != want)
      o.fail("expected_dim(" + std::to_string(rg.first) + "," + std::to_string(rg.second) + ")");
  std::size_t proper = 0;
  std::vector<std::int64_t> cur;
  rank_multisets(8, 1, cur, [&](const std::vector<std::int64_t>& ranks) {
    std::int64_t total = 0;
    for (auto r : ranks) total += r;
    if (total < 2) return;
    for (std::int64_t g = 2; g <= 4; ++g)
      for (const auto& p : set_partitions(ranks.size())) {
        const auto pd = partition_dim(p, ranks, g);
        if (!pd.proper) continue;
        ++proper;
        if (!(pd.dim < pd.expected) || !pd.strictly_less) o.fail("partition_dim not strictly smaller");
      }
  });
  std::ostringstream d;
  d << "6 table entries, " << proper << " proper partitions checked";
  if (o.pass) o.detail = d.str();
  return o;
}

// 6. Cyclic phi is stable for every rank pattern with 2..5 blocks of rank <= 3.
Outcome cyclic_phi() {
  Outcome o;
  std::size_t patterns = 0;
  for (std::size_t k = 2; k <= 5; ++k) {
    std::vector<std::int64_t> ranks(k, 1);
    for (;;) {
      ++patterns;
      try {
        if (cyclic_phi_weights(line_blocks(ranks)).verdict.cls != StabilityClass::Stable) {
          std::ostringstream w;
          for (auto r : ranks) w << r << ' ';
          o.fail("not stable for ranks " + w.str());
        }
      } catch (const std::exception& e) {
        o.fail(e.what());
      }
      std::size_t pos = 0;
      while (pos < k && ranks[pos] == 3) ranks[pos++] = 1;
      if (pos == k) break;
      ++ranks[pos];
    }
  }
  if (o.pass) o.detail = std::to_string(patterns) + " rank patterns stable";
  return o;
}

// 7. Kuranishi round trip, trivial bracket, equivariance.
Outcome kuranishi() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240607);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> mod(0.3, 1.7), arg(-3.0, 3.0);
  double worst_rt = 0, worst_eq = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RandomComplexOptions opt;
    opt.min_grade = 1;
    opt.max_grade = 4;
    const auto cx = random_graded_complex(seed, opt);
    if (cx.total_dim() > 60) o.fail("seed " + std::to_string(seed) + " exceeds dimension 60");
    CVec x(static_cast<Eigen::Index>(cx.dim1()));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = {n(rng), n(rng)};
    const CVec y = kuranishi_inverse_graded(cx, x);
    worst_rt = std::max(worst_rt, (kuranishi_forward(cx, y) - x).norm() / x.norm());
    const cdouble t = std::polar(mod(rng), arg(rng));
    const CVec lhs = kuranishi_forward(cx, grading_action(cx.grades1(), t, y));
    const CVec rhs = grading_action(cx.grades1(), t, kuranishi_forward(cx, y));
    worst_eq = std::max(worst_eq, (lhs - rhs).norm() / std::max(rhs.norm(), 1e-300));

    opt.bracket_density = 0.0;
    const auto flat = random_graded_complex(seed, opt);
    CVec z(static_cast<Eigen::Index>(flat.dim1()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = {n(rng), n(rng)};
    if (kuranishi_forward(flat, z) != z || kuranishi_inverse_graded(flat, z) != z)
      o.fail("trivial bracket not exact at seed " + std::to_string(seed));
  }
  if (worst_rt >= 1e-9) o.fail("round-trip residual " + std::to_string(worst_rt));
  if (worst_eq >= 1e-9) o.fail("equivariance residual " + std::to_string(worst_eq));
  const double secs = seconds_since(t0);
  if (secs >= 60) o.fail("runtime " + std::to_string(secs) + " s");
  std::ostringstream d;
  d << "100 complexes, round trip " << worst_rt << ", equivariance " << worst_eq << ", " << secs << " s";
  if (o.pass) o.detail = d.str();
  return o;
}

// 8. Degree identities and filtration bounds between stratification and SHB model.
Outcome conformal_bridge_identities() {
  Outcome o;
  std::vector<SHBSpec> specs;
  for (const auto& ranks : std::vector<std::vector<std::int64_t>>{{1, 1}, {1, 2}, {2, 3}, {1, 1, 1}, {1, 2, 1}, {1, 1, 1, 1}})
    specs.push_back(line_blocks(ranks));
  SHBSpec hodge;
  hodge.blocks = {{{1, 1}, {1, -1}, "A"}, {{1}, {0}, "B"}};
  specs.push_back(hodge);
  SHBSpec chain;
  chain.blocks = {{{1, 1, 1}, {2, 0, -2}, "C"}, {{2}, {0}, "D"}};
  specs.push_back(chain);

  std::mt19937_64 rng(20240608);
  std::bernoulli_distribution keep(0.6);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::size_t outputs = 0, identities = 0, filtration = 0;
  for (const auto& shb : specs)
    for (auto conv : {GradingConvention::Default, GradingConvention::Flipped}) {
      const auto ps = positive_slice_rep(shb, conv);
      for (int trial = 0; trial < 25; ++trial) {
        std::vector<Amplitude> a(ps.rep.size());
        for (auto& z : a) z = keep(rng) ? Amplitude(amp(rng), amp(rng)) : Amplitude(0);
        const RepVector u(ps.rep, a);
        if (u.is_zero() || classify(forget_grading(u)).cls != StabilityClass::Stable) continue;
        const auto r = stratify(u);
        const auto br = conformal_bridge(shb, ps, r, conv);
        for (const auto& f : br.failures) o.fail(f);
        identities += br.identities_checked;
        filtration += br.filtration_checked;
        ++outputs;
      }
    }
  if (outputs < 50) o.fail("only " + std::to_string(outputs) + " stratifications reached the bridge");
  std::ostringstream d;
  d << outputs << " stratifications, " << identities << " degree identities, " << filtration << " filtration bounds";
  if (o.pass) o.detail = d.str();
  return o;
}

// 9. Finite differences for kn_eval and the conjugation gradient at 0.
Outcome kn_calculus() {
  Outcome o;
  std::mt19937_64 rng(20240609);
  std::normal_distribution<double> n(0.0, 0.5);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = random_rep_vector(rng, {});
    const auto k = static_cast<Eigen::Index>(v.rep().rank());
    Eigen::VectorXd x(k);
    for (Eigen::Index j = 0; j < k; ++j) x(j) = n(rng);
    const auto e = kn_eval(v, x);
    const double h = 1e-5;
    Eigen::VectorXd fg(k);
    Eigen::MatrixXd fh(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      const auto ep = kn_eval(v, xp), em = kn_eval(v, xm);
      fg(j) = (ep.value - em.value) / (2 * h);
      fh.col(j) = (ep.gradient - em.gradient) / (2 * h);
    }
    const double scale = std::max(1.0, e.value);
    worst = std::max(worst, (fg - e.gradient).norm() / std::max(scale, e.gradient.norm()));
    worst = std::max(worst, (fh - e.hessian).norm() / std::max(scale, e.hessian.norm()));
  }
  if (worst >= 1e-6) o.fail("kn_eval finite-difference error " + std::to_string(worst));

  double worst_conj = 0;
  std::normal_distribution<double> m(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index dim = 2 + trial % 3;
    CMatrix phi(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) phi(i, j) = {m(rng), m(rng)};
    const CMatrix zero = CMatrix::Zero(dim, dim);
    const CMatrix mm = moment_map_conjugation(phi);
    const auto basis = traceless_hermitian_basis(dim);
    Eigen::VectorXd fd(static_cast<Eigen::Index>(basis.size())), pairing(static_cast<Eigen::Index>(basis.size())),
        analytic(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const double h = 1e-5;
      const auto i = static_cast<Eigen::Index>(b);
      fd(i) = (kn_conjugation_value(phi, h * basis[b]) - kn_conjugation_value(phi, -h * basis[b])) / (2 * h);
      pairing(i) = 2.0 * (mm * basis[b]).trace().real();
      analytic(i) = kn_conjugation_directional(phi, zero, basis[b]);
    }
    const double s = std::max(pairing.norm(), 1e-300);
    worst_conj = std::max({worst_conj, (fd - pairing).norm() / s, (analytic - pairing).norm() / s});
  }
  if (worst_conj >= 1e-6) o.fail("conjugation gradient error " + std::to_string(worst_conj));
  std::ostringstream d;
  d << "kn_eval worst rel " << worst << ", conjugation worst rel " << worst_conj;
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    Outcome o;
    o.fail(std::string("exception: ") + e.what());
    return o;
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"stability tri-equivalence", tri_equivalence},
      {"closed-form Kempf-Ness minimum", closed_form_kn},
      {"worked stratifications", worked_examples},
      {"stratification postconditions", stratification_postconditions},
      {"dimension formulas", dimension_formulas},
      {"cyclic phi stability", cyclic_phi},
      {"Kuranishi round trip", kuranishi},
      {"conformal degree bridge", conformal_bridge_identities},
      {"Kempf-Ness calculus", kn_calculus},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto o = guarded(criteria[i].second);
    failures += !o.pass;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
