#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mixlab/errors.hpp"
#include "mixlab/kernels.hpp"
#include "mixlab/quadrature.hpp"

using namespace mixlab;

namespace {

Param p1(double a) { return Param::Constant(1, a); }
Param p2(double a, double b) {
  Param t(2);
  t << a, b;
  return t;
}

struct Case {
  KernelPtr kernel;
  std::function<Param(Rng&)> draw;
};

std::vector<Case> builtin_cases() {
  auto u = [](double lo, double hi) {
    return [lo, hi](Rng& r) { return std::uniform_real_distribution<double>(lo, hi)(r); };
  };
  return {
      {make_bernoulli(), [u](Rng& r) { return p1(u(0.02, 0.98)(r)); }},
      {make_gaussian_location(1.3), [u](Rng& r) { return p1(u(-3, 3)(r)); }},
      {make_gamma(), [u](Rng& r) { return p2(u(0.6, 8)(r), u(0.3, 4)(r)); }},
      {make_uniform(), [u](Rng& r) { return p1(u(0.2, 5)(r)); }},
      {make_locscale_exponential(), [u](Rng& r) { return p2(u(-2, 2)(r), u(0.2, 3)(r)); }},
      {make_gaussian_location_mixture(0.7, 2),
       [u](Rng& r) {
         Param t(3);
         t << u(0.1, 0.9)(r), u(-3, -0.5)(r), u(0.5, 3)(r);
         return t;
       }},
      {make_beta_pushforward_dp(0.4),
       [u](Rng& r) {
         Param t(3);
         t << u(0.1, 0.9)(r), u(2.6, 5)(r), u(5.5, 12)(r);
         return t;
       }},
  };
}

double total_mass(const Kernel& k, const Param& t) {
  if (k.is_discrete()) {
    double s = 0;
    for (double x : k.discrete_support()) s += k.density(x, t);
    return s;
  }
  const auto sup = k.effective_support(t, 1e-14);
  auto br = k.breakpoints(t);
  return integrate_1d([&](double x) { return k.density(x, t); }, sup.first, sup.second, br, 1e-12)
      .value;
}

}  // namespace

TEST(Kernels, SpotDensities) {
  EXPECT_NEAR(make_bernoulli()->log_density(1.0, p1(0.3)), std::log(0.3), 1e-15);
  EXPECT_EQ(make_uniform()->log_density(3.0, p1(2.0)), -INFINITY);
  EXPECT_NEAR(make_gamma()->log_density(1.0, p2(2.0, 3.0)), std::log(9.0 * std::exp(-3.0)), 1e-14);
  EXPECT_EQ(make_locscale_exponential()->log_density(-0.1, p2(0.0, 1.0)), -INFINITY);
  EXPECT_THROW(make_gamma()->log_density(1.0, p2(0.0, 3.0)), InvalidParameter);
  EXPECT_THROW(make_bernoulli()->log_density(1.0, p1(1.0)), InvalidParameter);
}

TEST(Kernels, DensitiesNormalize) {
  Rng rng(4);
  for (const auto& c : builtin_cases()) {
    for (int i = 0; i < 100; ++i) {
      const Param t = c.draw(rng);
      EXPECT_NEAR(total_mass(*c.kernel, t), 1.0, 1e-8) << c.kernel->family();
    }
  }
}

TEST(Kernels, SamplerMeansMatch) {
  Rng rng(9);
  for (const auto& c : builtin_cases()) {
    for (int i = 0; i < 5; ++i) {
      const Param t = c.draw(rng);
      const std::size_t n = 20000;
      const auto xs = c.kernel->sample(t, n, rng);
      double m = 0;
      for (double x : xs) m += x;
      m /= n;
      const double se = std::sqrt(c.kernel->variance(t) / n);
      EXPECT_LT(std::abs(m - c.kernel->mean(t)), 4.0 * se) << c.kernel->family();
    }
  }
}

TEST(Kernels, ExpFamilyReconstruction) {
  Rng rng(2);
  for (const auto& c : builtin_cases()) {
    const auto* spec = c.kernel->exp_family();
    if (!spec) continue;
    for (int i = 0; i < 50; ++i) {
      const Param t = c.draw(rng);
      const double x = c.kernel->draw(t, rng);
      EXPECT_NEAR(std::exp(spec->log_density(x, t)), c.kernel->density(x, t), 1e-10);
    }
  }
}

TEST(Kernels, AnalyticGradientsMatchDifferences) {
  Rng rng(6);
  for (const auto& c : builtin_cases()) {
    if (!c.kernel->has_analytic_gradient()) continue;
    for (int i = 0; i < 30; ++i) {
      const Param t = c.draw(rng);
      double x = c.kernel->draw(t, rng);
      const Eigen::VectorXd g = c.kernel->grad_density(x, t);
      const Eigen::VectorXd fd = c.kernel->Kernel::grad_density(x, t);
      EXPECT_LE((g - fd).norm(), 1e-5 * std::max(1.0, g.norm())) << c.kernel->family();
    }
  }
}

TEST(Kernels, GradientSpots) {
  EXPECT_NEAR(make_gaussian_location(1.0)->grad_density(0.4, p1(0.4))[0], 0.0, 1e-15);
  EXPECT_EQ(make_bernoulli()->grad_density(1.0, p1(0.3))[0], 1.0);
  // d f / d beta = (alpha / beta) (f(x|alpha, beta) - f(x|alpha + 1, beta))
  const auto gamma = make_gamma();
  const double lhs = gamma->grad_density(1.0, p2(2, 3))[1];
  const double rhs = (2.0 / 3.0) * (gamma->density(1.0, p2(2, 3)) - gamma->density(1.0, p2(3, 3)));
  EXPECT_NEAR(lhs, rhs, 1e-14);
  EXPECT_NEAR(gamma->Kernel::grad_density(1.0, p2(2, 3))[1], rhs, 1e-8);
  EXPECT_THROW(make_uniform()->grad_density(2.0, p1(2.0)), NonDifferentiablePoint);
  EXPECT_THROW(make_locscale_exponential()->grad_density(0.5, p2(0.5, 1.0)), NonDifferentiablePoint);
}

TEST(Hellinger, ClosedFormSpots) {
  const auto g = make_gaussian_location(1.0);
  const double h = hellinger_expfam(*g->exp_family(), p1(0), p1(1));
  EXPECT_NEAR(h * h, -std::expm1(-1.0 / 8.0), 1e-15);
  const double hq = divergence_numeric(*g, p1(0), p1(1), Divergence::Hellinger).value;
  EXPECT_NEAR(hq * hq, 1.0 - std::exp(-1.0 / 8.0), 1e-9);
  const auto b = make_bernoulli();
  const double hb = hellinger_expfam(*b->exp_family(), p1(0.3), p1(0.7));
  EXPECT_NEAR(hb * hb, 1.0 - 2.0 * std::sqrt(0.21), 1e-14);
  EXPECT_EQ(hellinger_expfam(*b->exp_family(), p1(0.3), p1(0.3)), 0.0);
}

TEST(Hellinger, ClosedFormMatchesQuadrature) {
  Rng rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (const auto& c : builtin_cases()) {
    const auto* spec = c.kernel->exp_family();
    if (!spec) continue;
    for (int i = 0; i < 200; ++i) {
      const Param a = c.draw(rng), b = c.draw(rng);
      EXPECT_NEAR(hellinger_expfam(*spec, a, b),
                  divergence_numeric(*c.kernel, a, b, Divergence::Hellinger).value, 1e-6)
          << c.kernel->family();
    }
  }
}

TEST(Hellinger, MidpointOutsideDomain) {
  // An exponential family whose natural domain is a half-line that the midpoint leaves.
  struct Bent final : ExpFamilySpec {
    int stat_dim() const override { return 1; }
    Eigen::VectorXd sufficient_stat(double x) const override { return Eigen::VectorXd::Constant(1, x); }
    double log_carrier(double) const override { return 0; }
    Eigen::VectorXd natural(const Param& t) const override { return t; }
    Eigen::MatrixXd natural_jacobian(const Param&) const override { return Eigen::MatrixXd::Identity(1, 1); }
    double log_partition(const Eigen::VectorXd& e) const override { return e[0] * e[0]; }
    bool in_natural_domain(const Eigen::VectorXd& e) const override { return std::abs(e[0]) > 1; }
  } spec;
  EXPECT_THROW(hellinger_expfam(spec, p1(-2), p1(2)), MidpointOutsideDomain);
}

TEST(DivergenceNumeric, Spots) {
  const auto b = make_bernoulli();
  EXPECT_NEAR(divergence_numeric(*b, p1(0.3), p1(0.7), Divergence::TV).value, 0.4, 1e-15);
  const auto g = make_gaussian_location(1.0);
  EXPECT_NEAR(divergence_numeric(*g, p1(0), p1(1), Divergence::KL).value, 0.5, 1e-9);
  const auto u = make_uniform();
  EXPECT_NEAR(divergence_numeric(*u, p1(1), p1(2), Divergence::TV).value, 0.5, 1e-10);
  EXPECT_TRUE(std::isinf(divergence_numeric(*u, p1(2), p1(1), Divergence::KL).value));
  const auto e = make_locscale_exponential();
  // TV between shifted exponentials: 1 - exp(-shift / sigma)
  EXPECT_NEAR(divergence_numeric(*e, p2(0, 1), p2(0.3, 1), Divergence::TV).value,
              -std::expm1(-0.3), 1e-9);
}

TEST(DivergenceNumeric, PinskerChain) {
  Rng rng(13);
  for (const auto& c : builtin_cases()) {
    if (c.kernel->family() == "uniform" || c.kernel->family() == "locscale_exponential") continue;
    for (int i = 0; i < 40; ++i) {
      const Param a = c.draw(rng), b = c.draw(rng);
      const double tv = divergence_numeric(*c.kernel, a, b, Divergence::TV).value;
      const double h = divergence_numeric(*c.kernel, a, b, Divergence::Hellinger).value;
      const double kl = divergence_numeric(*c.kernel, a, b, Divergence::KL).value;
      EXPECT_LE(h * h, tv + 1e-8) << c.kernel->family();
      EXPECT_LE(tv, std::sqrt(2.0) * h + 1e-8) << c.kernel->family();
      EXPECT_LE(tv, std::sqrt(kl / 2.0) + 1e-8) << c.kernel->family();
    }
  }
}

TEST(MomentMap, GaussianWorkedPoint) {
  const auto k = make_gaussian_location_mixture(1.0, 2);
  Param t(3);
  t << 0.5, -1.0, 1.0;
  const auto rep = moment_map(*k, t);
  EXPECT_NEAR(rep.lambda[0], 0.0, 1e-15);
  EXPECT_NEAR(rep.lambda[1], 2.0, 1e-15);
  EXPECT_NEAR(rep.lambda[2], 0.0, 1e-15);
  EXPECT_NEAR(rep.det_closed, 4.0, 1e-15);
  EXPECT_NEAR(rep.det_fd, 4.0, 1e-6);
}

TEST(MomentMap, GaussianClosedFormMatchesDifferences) {
  Rng rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k : {2, 3}) {
    const auto kern = make_gaussian_location_mixture(0.8, k);
    for (int trial = 0; trial < 50; ++trial) {
      Param t(2 * k - 1);
      std::vector<double> w(k);
      double s = 0;
      for (auto& x : w) s += (x = 0.2 + u(rng));
      for (int i = 0; i < k - 1; ++i) t[i] = w[i] / s;
      double mu = -2.0;
      for (int i = 0; i < k; ++i) t[k - 1 + i] = (mu += 0.5 + u(rng));
      const auto rep = moment_map(*kern, t);
      EXPECT_LT(std::abs(rep.det_closed - rep.det_fd) / std::max(1.0, rep.det_closed), 1e-4);
    }
  }
}

TEST(MomentMap, BetaPushforward) {
  const auto k = make_beta_pushforward_dp(0.4);
  Param t(3);
  t << 0.5, 3.0, 5.0;
  const auto rep = moment_map(*k, t);
  EXPECT_GT(rep.det_closed, 0.0);
  EXPECT_LT(std::abs(rep.det_closed - rep.det_fd) / std::max(1.0, rep.det_closed), 1e-4);
  EXPECT_NEAR(rep.det_closed, rep.det_fd, 1e-4 * rep.det_closed);
  // lambda_1 is the second moment of the pushforward
  const double m2 = 0.5 * 0.4 * (3 * 0.4 + 1) / 4.0 + 0.5 * 0.4 * (5 * 0.4 + 1) / 6.0;
  EXPECT_NEAR(rep.lambda[0], m2, 1e-15);
  EXPECT_THROW(moment_map(*make_beta_pushforward_dp(0.5), t), DegenerateXi);
  EXPECT_THROW(moment_map(*make_beta_pushforward_dp(1.0 / 3.0), t), DegenerateXi);
  Param bad(3);
  bad << 0.5, 5.0, 3.0;
  EXPECT_THROW(moment_map(*k, bad), InvalidParameter);
  EXPECT_THROW(moment_map(*make_gamma(), p2(1, 1)), InvalidParameter);
}

TEST(MomentMap, GaussianRejectsUnorderedLocations) {
  const auto k = make_gaussian_location_mixture(1.0, 2);
  Param t(3);
  t << 0.5, 1.0, -1.0;
  EXPECT_THROW(moment_map(*k, t), InvalidParameter);
}
