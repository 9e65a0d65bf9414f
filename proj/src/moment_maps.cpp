#include <cmath>
#include <functional>

#include "mixlab/errors.hpp"
#include "mixlab/kernels.hpp"

namespace mixlab {

namespace {

using Real = long double;
using LambdaFn = std::function<std::vector<Real>(const std::vector<Real>&)>;

Real binomial(int n, int r) {
  Real c = 1;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

// E (sigma Y + mu)^j for standard normal Y
Real gaussian_raw_moment(Real mu, Real sigma, int j) {
  Real total = 0, double_factorial = 1;  // (l-1)!! for even l
  for (int l = 0; l <= j; l += 2) {
    if (l > 0) double_factorial *= (l - 1);
    total += binomial(j, l) * std::pow(sigma, l) * double_factorial * std::pow(mu, j - l);
  }
  return total;
}

Eigen::MatrixXd fd_jacobian(const LambdaFn& lambda, const Param& theta) {
  const int q = static_cast<int>(theta.size());
  std::vector<Real> t(theta.data(), theta.data() + q);
  const auto base = lambda(t);
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(base.size()), q);
  for (int j = 0; j < q; ++j) {
    const Real h = 1e-6L * std::max<Real>(1, std::abs(t[j]));
    auto up = t, down = t;
    up[j] += h;
    down[j] -= h;
    const auto fu = lambda(up), fdn = lambda(down);
    for (std::size_t r = 0; r < base.size(); ++r)
      jac(static_cast<Eigen::Index>(r), j) = static_cast<double>((fu[r] - fdn[r]) / (2 * h));
  }
  return jac;
}

MomentMapReport gaussian_mixture_map(double sigma, int k, const Param& theta) {
  LambdaFn lambda = [sigma, k](const std::vector<Real>& t) {
    std::vector<Real> out(static_cast<std::size_t>(2 * k - 1), 0);
    Real last = 1;
    for (int i = 0; i < k - 1; ++i) last -= t[i];
    for (int i = 0; i < k; ++i) {
      const Real pi = i < k - 1 ? t[i] : last, mu = t[k - 1 + i];
      for (int j = 1; j <= 2 * k - 1; ++j) out[j - 1] += pi * gaussian_raw_moment(mu, sigma, j);
    }
    return out;
  };
  MomentMapReport rep;
  const auto lam = lambda(std::vector<Real>(theta.data(), theta.data() + theta.size()));
  rep.lambda.resize(static_cast<Eigen::Index>(lam.size()));
  for (std::size_t i = 0; i < lam.size(); ++i) rep.lambda[static_cast<Eigen::Index>(i)] = static_cast<double>(lam[i]);
  rep.jacobian = fd_jacobian(lambda, theta);
  rep.det_fd = std::abs(rep.jacobian.determinant());
  // (prod_l pi_l) * prod_{a<b} (mu_a - mu_b)^4
  double det = 1.0 - theta.head(k - 1).sum();
  for (int i = 0; i < k - 1; ++i) det *= theta[i];
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) det *= std::pow(theta[k - 1 + a] - theta[k - 1 + b], 4);
  rep.det_closed = std::abs(det);
  return rep;
}

MomentMapReport beta_pushforward_map(double xi, const Param& theta) {
  LambdaFn lambda = [xi](const std::vector<Real>& t) {
    std::vector<Real> out(3, 0);
    const Real pis[2] = {t[0], 1 - t[0]};
    for (int i = 0; i < 2; ++i) {
      const Real a = t[1 + i];
      Real prod = 1;
      for (int l = 0; l <= 3; ++l) {
        prod *= (a * xi + l) / (a + l);
        if (l >= 1) out[l - 1] += pis[i] * prod;
      }
    }
    return out;
  };
  MomentMapReport rep;
  const auto lam = lambda({theta[0], theta[1], theta[2]});
  rep.lambda.resize(3);
  for (int i = 0; i < 3; ++i) rep.lambda[i] = static_cast<double>(lam[static_cast<std::size_t>(i)]);
  rep.jacobian = fd_jacobian(lambda, theta);
  rep.det_fd = std::abs(rep.jacobian.determinant());
  const double p1 = theta[0], a1 = theta[1], a2 = theta[2];
  auto cubic = [](double a) { return (1 + a) * (2 + a) * (3 + a); };
  const double num = 6.0 * std::pow(xi - 1, 3) * std::pow(xi, 3) * (2 * xi - 1) * (3 * xi - 1) *
                     (3 * xi - 2) * p1 * (1 - p1) * std::pow(a1 - a2, 4);
  rep.det_closed = std::abs(num / std::pow(cubic(a1) * cubic(a2), 2));
  return rep;
}

}  // namespace

MomentMapReport moment_map(const Kernel& composite, const Param& theta) {
  const auto fixed = composite.fixed_params();
  if (composite.family() == "gaussian_location_mixture") {
    composite.require_valid(theta);
    return gaussian_mixture_map(fixed.at("sigma"), static_cast<int>(fixed.at("k")), theta);
  }
  if (composite.family() == "beta_pushforward_dp") {
    const double xi = fixed.at("xi");
    for (double bad : {1.0 / 3.0, 0.5, 2.0 / 3.0})
      if (std::abs(xi - bad) < 1e-12)
        throw DegenerateXi("xi in {1/3, 1/2, 2/3} makes the moment map Jacobian singular");
    composite.require_valid(theta);
    return beta_pushforward_map(xi, theta);
  }
  throw InvalidParameter("moment maps exist only for the composite kernels, not " +
                         composite.family());
}

}  // namespace mixlab
