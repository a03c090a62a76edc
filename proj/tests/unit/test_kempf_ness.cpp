#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gitstrat/kempf_ness.hpp"
#include "gitstrat/random_instances.hpp"
#include "oracles.hpp"

using namespace gitstrat;

namespace {

using CMat = CMatrix;

RepVector lines(std::size_t rank, std::vector<IVec> ws, std::vector<Amplitude> amps) {
  std::vector<WeightLine> ls;
  for (std::size_t i = 0; i < ws.size(); ++i) ls.push_back({"w" + std::to_string(i), ws[i], 0, 1.0});
  return RepVector(Representation(rank, false, std::move(ls)), std::move(amps));
}

Eigen::VectorXd vx(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

CMat random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> d(0.0, 1.0);
  CMat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = {d(rng), d(rng)};
  return m;
}

CMat random_traceless_hermitian(std::mt19937_64& rng, Eigen::Index n, double scale) {
  CMat m = random_matrix(rng, n);
  CMat h = 0.5 * (m + m.adjoint());
  h -= (h.trace() / static_cast<double>(n)) * CMat::Identity(n, n);
  return scale * h;
}

}  // namespace

TEST(KnEval, Examples) {
  auto e = kn_eval(lines(1, {{1}, {-1}}, {1.0, 1.0}), vx({0.0}));
  EXPECT_DOUBLE_EQ(e.value, 2.0);
  EXPECT_DOUBLE_EQ(e.gradient(0), 0.0);
  EXPECT_DOUBLE_EQ(e.hessian(0, 0), 8.0);

  auto f = kn_eval(lines(1, {{1}, {-1}}, {2.0, 1.0}), vx({-std::log(2.0) / 2}));
  EXPECT_NEAR(f.value, 4.0, 1e-12);
  EXPECT_NEAR(f.gradient(0), 0.0, 1e-12);

  auto zero_weight = lines(2, {{0, 0}}, {1.5});
  for (auto x : {vx({0, 0}), vx({3, -1}), vx({-2, 5})}) {
    auto z = kn_eval(zero_weight, x);
    EXPECT_DOUBLE_EQ(z.value, 2.25);
    EXPECT_EQ(z.gradient.norm(), 0.0);
  }
}

TEST(KnMinimize, Examples) {
  auto a = kn_minimize(lines(1, {{1}, {-1}}, {2.0, 1.0}));
  ASSERT_EQ(a.status, KNStatus::Converged);
  EXPECT_NEAR(a.minimizer(0), -std::log(2.0) / 2, 1e-8);
  EXPECT_NEAR(a.value, 4.0, 1e-8);

  auto b = kn_minimize(lines(1, {{1}, {-1}}, {1.0, 1.0}));
  ASSERT_EQ(b.status, KNStatus::Converged);
  EXPECT_NEAR(b.minimizer(0), 0.0, 1e-12);
  EXPECT_NEAR(b.value, 2.0, 1e-12);

  auto c = kn_minimize(lines(1, {{1}, {2}}, {1.0, 1.0}));
  ASSERT_EQ(c.status, KNStatus::Diverging);
  ASSERT_TRUE(c.descent_ray);
  EXPECT_LT((*c.descent_ray)[0], 0);
  EXPECT_EQ(c.value, 0.0);
}

TEST(KnMinimize, FlatDirectionsForPolystable) {
  auto v = lines(2, {{1, 1}, {-1, -1}}, {1.0, 3.0});
  auto r = kn_minimize(v);
  ASSERT_EQ(r.status, KNStatus::FlatDirections);
  EXPECT_EQ(r.flat_space, saturated_kernel(effective_g_weights(v), 2));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x = r.minimizer;
    const double t = n(rng);
    for (std::size_t j = 0; j < 2; ++j) x(static_cast<Eigen::Index>(j)) += t * static_cast<double>(r.flat_space.basis[0][j]);
    EXPECT_NEAR(kn_eval(v, x).value, r.value, 1e-10 * r.value);
  }
}

TEST(KnMinimize, StatusMatchesClassifyAndMomentMapVanishes) {
  std::mt19937_64 rng(41);
  RandomRepOptions o;
  o.zero_probability = 0.2;
  for (int trial = 0; trial < 300; ++trial) {
    auto v = random_rep_vector(rng, o);
    const auto cls = classify(v).cls;
    const auto r = kn_minimize(v);
    ASSERT_NE(r.status, KNStatus::Failure) << "trial " << trial;
    switch (cls) {
      case StabilityClass::Stable: EXPECT_EQ(r.status, KNStatus::Converged); break;
      case StabilityClass::PolystableNotStable: EXPECT_EQ(r.status, KNStatus::FlatDirections); break;
      default: EXPECT_EQ(r.status, KNStatus::Diverging);
    }
    if (is_polystable(cls)) {
      const auto e = kn_eval(v, r.minimizer);
      EXPECT_LT(e.gradient.norm(), 1e-10 * std::max(1.0, e.value)) << "trial " << trial;
    } else {
      // l_v decreases along the ray towards the reported limit.
      Eigen::VectorXd ray(static_cast<Eigen::Index>(v.rep().rank()));
      for (Eigen::Index j = 0; j < ray.size(); ++j) ray(j) = static_cast<double>((*r.descent_ray)[static_cast<std::size_t>(j)]);
      const double far = kn_eval(v, 40.0 * ray).value;
      EXPECT_NEAR(far, r.value, 1e-9 * std::max(1.0, r.value));
      EXPECT_LE(kn_eval(v, 2.0 * ray).value, kn_eval(v, ray).value + 1e-12);
    }
  }
}

TEST(KnEval, FiniteDifferences) {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> n(0.0, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    auto v = random_rep_vector(rng, {});
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.rep().rank()));
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = n(rng);
    const auto e = kn_eval(v, x);
    auto fd_g = oracle::fd_gradient([&](const Eigen::VectorXd& y) { return kn_eval(v, y).value; }, x, 1e-6);
    auto fd_h = oracle::fd_jacobian([&](const Eigen::VectorXd& y) { return kn_eval(v, y).gradient; }, x, 1e-6);
    EXPECT_LT(rel_err(fd_g, e.gradient) / std::max(1.0, e.value), 1e-6) << "trial " << trial;
    EXPECT_LT(rel_err(fd_h, e.hessian) / std::max(1.0, e.value), 1e-6) << "trial " << trial;
  }
}

TEST(Conjugation, MomentMapExamples) {
  CMat diag = CMat::Zero(3, 3);
  diag(0, 0) = {1, 2};
  diag(2, 2) = 3;
  EXPECT_EQ(moment_map_conjugation(diag).norm(), 0.0);

  CMat nil = CMat::Zero(2, 2);
  nil(0, 1) = 1;
  CMat expect = CMat::Zero(2, 2);
  expect(0, 0) = 1;
  expect(1, 1) = -1;
  EXPECT_EQ(moment_map_conjugation(nil), expect);

  std::mt19937_64 rng(2);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(std::abs(moment_map_conjugation(random_matrix(rng, 4)).trace()), 0.0, 1e-12);
}

TEST(Conjugation, GradientExamples) {
  CMat nil = CMat::Zero(2, 2);
  nil(0, 1) = 1;
  CMat v = CMat::Zero(2, 2);
  v(0, 0) = 1;
  v(1, 1) = -1;
  EXPECT_NEAR(kn_conjugation_directional(nil, CMat::Zero(2, 2), v), 4.0, 1e-12);

  std::mt19937_64 rng(3);
  CMat h = random_traceless_hermitian(rng, 3, 1.0);
  CMat normal = h * std::complex<double>(2, 1);  // commutes with its adjoint
  EXPECT_LT(kn_conjugation_eval(normal, CMat::Zero(3, 3)).gradient.norm(), 1e-12);
}

TEST(Conjugation, BasisIsOrthonormalTracelessHermitian) {
  for (Eigen::Index n = 1; n <= 4; ++n) {
    auto basis = traceless_hermitian_basis(n);
    ASSERT_EQ(static_cast<Eigen::Index>(basis.size()), n * n - 1);
    for (std::size_t a = 0; a < basis.size(); ++a) {
      EXPECT_LT((basis[a] - basis[a].adjoint()).norm(), 1e-15);
      EXPECT_LT(std::abs(basis[a].trace()), 1e-15);
      for (std::size_t b = 0; b < basis.size(); ++b)
        EXPECT_NEAR((basis[a] * basis[b]).trace().real(), a == b ? 1.0 : 0.0, 1e-14);
    }
  }
}

TEST(Conjugation, FiniteDifferences) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 2 + trial % 3;
    const CMat phi = random_matrix(rng, n);
    const CMat g = trial % 4 == 0 ? CMat::Zero(n, n) : random_traceless_hermitian(rng, n, 0.4);
    const CMat dir = random_traceless_hermitian(rng, n, 1.0);
    const double h = 1e-5;
    const double fd = (kn_conjugation_value(phi, g + h * dir) - kn_conjugation_value(phi, g - h * dir)) / (2 * h);
    const double an = kn_conjugation_directional(phi, g, dir);
    EXPECT_LT(std::abs(fd - an) / std::max(1.0, std::abs(an)), 1e-6) << "trial " << trial;
  }
}

TEST(Conjugation, GradientAtZeroIsTwiceMomentMap) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat phi = random_matrix(rng, 3);
    const CMat g = kn_conjugation_eval(phi, CMat::Zero(3, 3)).gradient;
    EXPECT_LT((g - 2.0 * moment_map_conjugation(phi)).norm(), 1e-12 * std::max(1.0, g.norm()));
  }
}
