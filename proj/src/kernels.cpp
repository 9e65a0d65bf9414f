#include "mixlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "mixlab/errors.hpp"
#include "mixlab/quadrature.hpp"

namespace mixlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double normal_z(double tail) {
  return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<>(), tail));
}

// ---------------------------------------------------------------- Bernoulli

class BernoulliExpFamily final : public ExpFamilySpec {
 public:
  int stat_dim() const override { return 1; }
  Eigen::VectorXd sufficient_stat(double x) const override { return vec({x}); }
  double log_carrier(double) const override { return 0.0; }
  Eigen::VectorXd natural(const Param& t) const override {
    return vec({std::log(t[0]) - std::log1p(-t[0])});
  }
  Eigen::MatrixXd natural_jacobian(const Param& t) const override {
    return Eigen::MatrixXd::Constant(1, 1, 1.0 / (t[0] * (1.0 - t[0])));
  }
  double log_partition(const Eigen::VectorXd& eta) const override {
    const double e = eta[0];
    return e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
  }
  bool in_natural_domain(const Eigen::VectorXd& eta) const override {
    return std::isfinite(eta[0]);
  }
};

class Bernoulli final : public Kernel {
 public:
  std::string family() const override { return "bernoulli"; }
  int dim() const override { return 1; }
  DataSpace data_space() const override { return DataSpace::Binary; }
  Eigen::VectorXd box_lower() const override { return vec({0.0}); }
  Eigen::VectorXd box_upper() const override { return vec({1.0}); }
  double log_density(double x, const Param& t) const override {
    require_valid(t);
    if (x == 1.0) return std::log(t[0]);
    if (x == 0.0) return std::log1p(-t[0]);
    return -kInf;
  }
  double draw(const Param& t, Rng& rng) const override {
    return std::bernoulli_distribution(t[0])(rng) ? 1.0 : 0.0;
  }
  bool has_analytic_gradient() const override { return true; }
  Eigen::VectorXd grad_density(double x, const Param& t) const override {
    require_valid(t);
    if (x == 1.0) return vec({1.0});
    if (x == 0.0) return vec({-1.0});
    return vec({0.0});
  }
  const ExpFamilySpec* exp_family() const override { return &spec_; }
  std::pair<double, double> effective_support(const Param&, double) const override {
    return {0.0, 1.0};
  }
  double mean(const Param& t) const override { return t[0]; }
  double variance(const Param& t) const override { return t[0] * (1.0 - t[0]); }

 private:
  BernoulliExpFamily spec_;
};

// ------------------------------------------------------- Gaussian location

class GaussianExpFamily final : public ExpFamilySpec {
 public:
  explicit GaussianExpFamily(double sigma) : s2_(sigma * sigma), log_sigma_(std::log(sigma)) {}
  int stat_dim() const override { return 1; }
  Eigen::VectorXd sufficient_stat(double x) const override { return vec({x}); }
  double log_carrier(double x) const override {
    return -0.5 * x * x / s2_ - log_sigma_ - kLogSqrt2Pi;
  }
  Eigen::VectorXd natural(const Param& t) const override { return vec({t[0] / s2_}); }
  Eigen::MatrixXd natural_jacobian(const Param&) const override {
    return Eigen::MatrixXd::Constant(1, 1, 1.0 / s2_);
  }
  double log_partition(const Eigen::VectorXd& eta) const override {
    return 0.5 * s2_ * eta[0] * eta[0];
  }
  bool in_natural_domain(const Eigen::VectorXd& eta) const override {
    return std::isfinite(eta[0]);
  }

 private:
  double s2_, log_sigma_;
};

class GaussianLocation final : public Kernel {
 public:
  explicit GaussianLocation(double sigma) : sigma_(sigma), spec_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw InvalidParameter("gaussian_location needs sigma > 0");
  }
  std::string family() const override { return "gaussian_location"; }
  std::map<std::string, double> fixed_params() const override { return {{"sigma", sigma_}}; }
  int dim() const override { return 1; }
  DataSpace data_space() const override { return DataSpace::RealLine; }
  Eigen::VectorXd box_lower() const override { return vec({-kInf}); }
  Eigen::VectorXd box_upper() const override { return vec({kInf}); }
  double log_density(double x, const Param& t) const override {
    require_valid(t);
    const double z = (x - t[0]) / sigma_;
    return -0.5 * z * z - std::log(sigma_) - kLogSqrt2Pi;
  }
  double draw(const Param& t, Rng& rng) const override {
    return std::normal_distribution<double>(t[0], sigma_)(rng);
  }
  bool has_analytic_gradient() const override { return true; }
  Eigen::VectorXd grad_density(double x, const Param& t) const override {
    return vec({density(x, t) * (x - t[0]) / (sigma_ * sigma_)});
  }
  const ExpFamilySpec* exp_family() const override { return &spec_; }
  std::pair<double, double> effective_support(const Param& t, double tail) const override {
    const double z = normal_z(0.5 * tail);
    return {t[0] - z * sigma_, t[0] + z * sigma_};
  }
  std::vector<double> breakpoints(const Param& t) const override { return {t[0]}; }
  double mean(const Param& t) const override { return t[0]; }
  double variance(const Param&) const override { return sigma_ * sigma_; }

 private:
  double sigma_;
  GaussianExpFamily spec_;
};

// ------------------------------------------------------------------- Gamma
// shape alpha, rate beta: f(x) = beta^alpha / Gamma(alpha) x^(alpha-1) e^(-beta x)

class GammaExpFamily final : public ExpFamilySpec {
 public:
  int stat_dim() const override { return 2; }
  Eigen::VectorXd sufficient_stat(double x) const override { return vec({std::log(x), -x}); }
  double log_carrier(double) const override { return 0.0; }
  Eigen::VectorXd natural(const Param& t) const override { return vec({t[0] - 1.0, t[1]}); }
  Eigen::MatrixXd natural_jacobian(const Param&) const override {
    return Eigen::MatrixXd::Identity(2, 2);
  }
  double log_partition(const Eigen::VectorXd& eta) const override {
    return std::lgamma(eta[0] + 1.0) - (eta[0] + 1.0) * std::log(eta[1]);
  }
  bool in_natural_domain(const Eigen::VectorXd& eta) const override {
    return eta[0] > -1.0 && eta[1] > 0.0 && eta.allFinite();
  }
};

class Gamma final : public Kernel {
 public:
  std::string family() const override { return "gamma"; }
  int dim() const override { return 2; }
  DataSpace data_space() const override { return DataSpace::PositiveReals; }
  Eigen::VectorXd box_lower() const override { return vec({0.0, 0.0}); }
  Eigen::VectorXd box_upper() const override { return vec({kInf, kInf}); }
  double log_density(double x, const Param& t) const override {
    require_valid(t);
    if (!(x > 0.0)) return -kInf;
    const double a = t[0], b = t[1];
    return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(x) - b * x;
  }
  double draw(const Param& t, Rng& rng) const override {
    return std::gamma_distribution<double>(t[0], 1.0 / t[1])(rng);
  }
  bool has_analytic_gradient() const override { return true; }
  Eigen::VectorXd grad_density(double x, const Param& t) const override {
    if (!(x > 0.0)) throw NonDifferentiablePoint("gamma density gradient needs x > 0");
    const double f = density(x, t);
    const double a = t[0], b = t[1];
    return vec({f * (std::log(b) + std::log(x) - boost::math::digamma(a)), f * (a / b - x)});
  }
  const ExpFamilySpec* exp_family() const override { return &spec_; }
  std::pair<double, double> effective_support(const Param& t, double tail) const override {
    const boost::math::gamma_distribution<> d(t[0], 1.0 / t[1]);
    return {boost::math::quantile(d, 0.5 * tail),
            boost::math::quantile(boost::math::complement(d, 0.5 * tail))};
  }
  std::vector<double> breakpoints(const Param& t) const override {
    std::vector<double> out{0.0};
    if (t[0] > 1.0) out.push_back((t[0] - 1.0) / t[1]);
    return out;
  }
  double mean(const Param& t) const override { return t[0] / t[1]; }
  double variance(const Param& t) const override { return t[0] / (t[1] * t[1]); }

 private:
  GammaExpFamily spec_;
};

// --------------------------------------------------------- Uniform(0, theta)

class Uniform final : public Kernel {
 public:
  std::string family() const override { return "uniform"; }
  int dim() const override { return 1; }
  DataSpace data_space() const override { return DataSpace::RealLine; }
  Eigen::VectorXd box_lower() const override { return vec({0.0}); }
  Eigen::VectorXd box_upper() const override { return vec({kInf}); }
  double log_density(double x, const Param& t) const override {
    require_valid(t);
    if (x < 0.0 || x > t[0]) return -kInf;
    return -std::log(t[0]);
  }
  double draw(const Param& t, Rng& rng) const override {
    return std::uniform_real_distribution<double>(0.0, t[0])(rng);
  }
  bool has_analytic_gradient() const override { return true; }
  Eigen::VectorXd grad_density(double x, const Param& t) const override {
    require_valid(t);
    if (x == 0.0 || x == t[0])
      throw NonDifferentiablePoint("uniform density is not differentiable on the support boundary");
    if (x < 0.0 || x > t[0]) return vec({0.0});
    return vec({-1.0 / (t[0] * t[0])});
  }
  std::pair<double, double> effective_support(const Param& t, double) const override {
    return {0.0, t[0]};
  }
  std::vector<double> breakpoints(const Param& t) const override { return {0.0, t[0]}; }
  double mean(const Param& t) const override { return 0.5 * t[0]; }
  double variance(const Param& t) const override { return t[0] * t[0] / 12.0; }
};

// ---------------------------------------- location-scale exponential (xi, sigma)

class LocScaleExponential final : public Kernel {
 public:
  std::string family() const override { return "locscale_exponential"; }
  int dim() const override { return 2; }
  DataSpace data_space() const override { return DataSpace::RealLine; }
  Eigen::VectorXd box_lower() const override { return vec({-kInf, 0.0}); }
  Eigen::VectorXd box_upper() const override { return vec({kInf, kInf}); }
  double log_density(double x, const Param& t) const override {
    require_valid(t);
    if (x < t[0]) return -kInf;
    return -(x - t[0]) / t[1] - std::log(t[1]);
  }
  double draw(const Param& t, Rng& rng) const override {
    return t[0] + std::exponential_distribution<double>(1.0 / t[1])(rng);
  }
  bool has_analytic_gradient() const override { return true; }
  Eigen::VectorXd grad_density(double x, const Param& t) const override {
    require_valid(t);
    if (x == t[0])
      throw NonDifferentiablePoint("exponential density is not differentiable at its location");
    if (x < t[0]) return vec({0.0, 0.0});
    const double f = density(x, t), s = t[1];
    return vec({f / s, f * ((x - t[0]) / (s * s) - 1.0 / s)});
  }
  std::pair<double, double> effective_support(const Param& t, double tail) const override {
    return {t[0], t[0] - t[1] * std::log(0.5 * tail)};
  }
  std::vector<double> breakpoints(const Param& t) const override { return {t[0]}; }
  double mean(const Param& t) const override { return t[0] + t[1]; }
  double variance(const Param& t) const override { return t[1] * t[1]; }
};

// ------------------------------------------------ Gaussian location mixture

class GaussianLocationMixture final : public Kernel {
 public:
  GaussianLocationMixture(double sigma, int k) : sigma_(sigma), k_(k) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw InvalidParameter("gaussian_location_mixture needs sigma > 0");
    if (k < 1) throw InvalidParameter("gaussian_location_mixture needs k >= 1");
  }
  std::string family() const override { return "gaussian_location_mixture"; }
  std::map<std::string, double> fixed_params() const override {
    return {{"sigma", sigma_}, {"k", static_cast<double>(k_)}};
  }
  int dim() const override { return 2 * k_ - 1; }
  DataSpace data_space() const override { return DataSpace::RealLine; }
  Eigen::VectorXd box_lower() const override {
    Eigen::VectorXd lo(dim());
    lo.head(k_ - 1).setZero();
    lo.tail(k_).setConstant(-kInf);
    return lo;
  }
  Eigen::VectorXd box_upper() const override {
    Eigen::VectorXd hi(dim());
    hi.head(k_ - 1).setOnes();
    hi.tail(k_).setConstant(kInf);
    return hi;
  }
  bool valid(const Param& t) const override {
    if (!Kernel::valid(t)) return false;
    if (t.head(k_ - 1).sum() >= 1.0) return false;
    for (int i = 1; i < k_; ++i)
      if (!(t[k_ - 1 + i] > t[k_ - 2 + i])) return false;
    return true;
  }
  double log_density(double x, const Param& t) const override {
    require_valid(t);
    double out = -kInf;
    for (int i = 0; i < k_; ++i) {
      const double z = (x - t[k_ - 1 + i]) / sigma_;
      out = log_sum_exp(out, std::log(weight(t, i)) - 0.5 * z * z);
    }
    return out - std::log(sigma_) - kLogSqrt2Pi;
  }
  double draw(const Param& t, Rng& rng) const override {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    int i = 0;
    for (; i < k_ - 1; ++i) {
      u -= t[i];
      if (u < 0.0) break;
    }
    return std::normal_distribution<double>(t[k_ - 1 + i], sigma_)(rng);
  }
  std::pair<double, double> effective_support(const Param& t, double tail) const override {
    const double z = normal_z(0.5 * tail);
    return {t[k_ - 1] - z * sigma_, t[2 * k_ - 2] + z * sigma_};
  }
  std::vector<double> breakpoints(const Param& t) const override {
    std::vector<double> out;
    for (int i = 0; i < k_; ++i) out.push_back(t[k_ - 1 + i]);
    return out;
  }
  double mean(const Param& t) const override {
    double m = 0.0;
    for (int i = 0; i < k_; ++i) m += weight(t, i) * t[k_ - 1 + i];
    return m;
  }
  double variance(const Param& t) const override {
    double m2 = 0.0;
    for (int i = 0; i < k_; ++i) m2 += weight(t, i) * t[k_ - 1 + i] * t[k_ - 1 + i];
    const double m = mean(t);
    return sigma_ * sigma_ + m2 - m * m;
  }

 private:
  double weight(const Param& t, int i) const {
    return i < k_ - 1 ? t[i] : 1.0 - t.head(k_ - 1).sum();
  }
  double sigma_;
  int k_;
};

// ------------------------------------------------ Beta pushforward of a DP mixture

class BetaPushforward final : public Kernel {
 public:
  explicit BetaPushforward(double xi) : xi_(xi) {
    if (!(xi > 0.0 && xi < 1.0)) throw InvalidParameter("beta_pushforward_dp needs xi in (0, 1)");
  }
  std::string family() const override { return "beta_pushforward_dp"; }
  std::map<std::string, double> fixed_params() const override { return {{"xi", xi_}}; }
  int dim() const override { return 3; }
  DataSpace data_space() const override { return DataSpace::UnitInterval; }
  Eigen::VectorXd box_lower() const override { return vec({0.0, 2.0, 2.0}); }
  Eigen::VectorXd box_upper() const override { return vec({1.0, kInf, kInf}); }
  bool valid(const Param& t) const override { return Kernel::valid(t) && t[1] < t[2]; }
  double log_density(double x, const Param& t) const override {
    require_valid(t);
    if (!(x > 0.0 && x < 1.0)) return -kInf;
    return log_sum_exp(std::log(t[0]) + log_beta_pdf(x, t[1]),
                       std::log1p(-t[0]) + log_beta_pdf(x, t[2]));
  }
  double draw(const Param& t, Rng& rng) const override {
    const double alpha = std::bernoulli_distribution(t[0])(rng) ? t[1] : t[2];
    const double g1 = std::gamma_distribution<double>(alpha * xi_, 1.0)(rng);
    const double g2 = std::gamma_distribution<double>(alpha * (1.0 - xi_), 1.0)(rng);
    return g1 / (g1 + g2);
  }
  std::pair<double, double> effective_support(const Param& t, double tail) const override {
    double lo = 1.0, hi = 0.0;
    for (double alpha : {t[1], t[2]}) {
      const boost::math::beta_distribution<> d(alpha * xi_, alpha * (1.0 - xi_));
      lo = std::min(lo, boost::math::quantile(d, 0.5 * tail));
      hi = std::max(hi, boost::math::quantile(boost::math::complement(d, 0.5 * tail)));
    }
    return {lo, hi};
  }
  std::vector<double> breakpoints(const Param&) const override { return {0.0, 1.0}; }
  double mean(const Param&) const override { return xi_; }
  double variance(const Param& t) const override {
    double m2 = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double a = t[1 + i], w = i == 0 ? t[0] : 1.0 - t[0];
      m2 += w * xi_ * (a * xi_ + 1.0) / (a + 1.0);
    }
    return m2 - xi_ * xi_;
  }

 private:
  double log_beta_pdf(double x, double alpha) const {
    const double a = alpha * xi_, b = alpha * (1.0 - xi_);
    return std::lgamma(alpha) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
           (b - 1.0) * std::log1p(-x);
  }
  double xi_;
};

}  // namespace

// ------------------------------------------------------------- Kernel base

double ExpFamilySpec::log_density(double x, const Param& theta) const {
  const Eigen::VectorXd eta = natural(theta);
  return eta.dot(sufficient_stat(x)) - log_partition(eta) + log_carrier(x);
}

bool Kernel::valid(const Param& theta) const {
  if (theta.size() != dim() || !theta.allFinite()) return false;
  const Eigen::VectorXd lo = box_lower(), hi = box_upper();
  for (Eigen::Index j = 0; j < theta.size(); ++j)
    if (!(theta[j] > lo[j] && theta[j] < hi[j])) return false;
  return true;
}

std::string Kernel::box_description() const {
  const Eigen::VectorXd lo = box_lower(), hi = box_upper();
  std::ostringstream out;
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (j) out << " x ";
    out << "(" << lo[j] << ", " << hi[j] << ")";
  }
  return out.str();
}

void Kernel::require_valid(const Param& theta) const {
  if (valid(theta)) return;
  std::ostringstream msg;
  msg << family() << " parameter (";
  for (Eigen::Index j = 0; j < theta.size(); ++j) msg << (j ? ", " : "") << theta[j];
  msg << ") is outside the parameter box " << box_description();
  if (theta.size() == dim()) {
    if (family() == "gaussian_location_mixture")
      msg << " with increasing locations and weights summing below 1";
    if (family() == "beta_pushforward_dp") msg << " with alpha_1 < alpha_2";
  } else {
    msg << " (expected dimension " << dim() << ")";
  }
  throw InvalidParameter(msg.str());
}

double Kernel::density(double x, const Param& theta) const {
  return std::exp(log_density(x, theta));
}

std::vector<double> Kernel::sample(const Param& theta, std::size_t count, Rng& rng) const {
  require_valid(theta);
  std::vector<double> out(count);
  for (auto& x : out) x = draw(theta, rng);
  return out;
}

Eigen::VectorXd Kernel::grad_density(double x, const Param& theta) const {
  require_valid(theta);
  Eigen::VectorXd g(dim());
  for (int j = 0; j < dim(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta[j]));
    Param up = theta, down = theta;
    up[j] += h;
    down[j] -= h;
    if (!valid(up) || !valid(down))
      throw NonDifferentiablePoint("finite-difference stencil leaves the parameter space");
    g[j] = (density(x, up) - density(x, down)) / (2.0 * h);
  }
  return g;
}

std::vector<double> Kernel::discrete_support() const {
  if (data_space() == DataSpace::Binary) return {0.0, 1.0};
  return {};
}

KernelPtr make_bernoulli() { return std::make_shared<Bernoulli>(); }
KernelPtr make_gaussian_location(double sigma) { return std::make_shared<GaussianLocation>(sigma); }
KernelPtr make_gamma() { return std::make_shared<Gamma>(); }
KernelPtr make_uniform() { return std::make_shared<Uniform>(); }
KernelPtr make_locscale_exponential() { return std::make_shared<LocScaleExponential>(); }
KernelPtr make_gaussian_location_mixture(double sigma, int k) {
  return std::make_shared<GaussianLocationMixture>(sigma, k);
}
KernelPtr make_beta_pushforward_dp(double xi) { return std::make_shared<BetaPushforward>(xi); }

KernelPtr make_kernel(const std::string& family, const std::map<std::string, double>& fixed) {
  auto get = [&](const char* key) {
    const auto it = fixed.find(key);
    if (it == fixed.end())
      throw InvalidParameter(family + " needs fixed parameter '" + key + "'");
    return it->second;
  };
  auto expect = [&](std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : fixed) {
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) throw InvalidParameter(family + " has no fixed parameter '" + key + "'");
    }
  };
  if (family == "bernoulli") return expect({}), make_bernoulli();
  if (family == "gamma") return expect({}), make_gamma();
  if (family == "uniform") return expect({}), make_uniform();
  if (family == "locscale_exponential") return expect({}), make_locscale_exponential();
  if (family == "gaussian_location") {
    expect({"sigma"});
    return make_gaussian_location(fixed.count("sigma") ? get("sigma") : 1.0);
  }
  if (family == "gaussian_location_mixture") {
    expect({"sigma", "k"});
    const double k = get("k");
    if (k != std::floor(k) || k < 1) throw InvalidParameter("k must be a positive integer");
    return make_gaussian_location_mixture(fixed.count("sigma") ? get("sigma") : 1.0,
                                          static_cast<int>(k));
  }
  if (family == "beta_pushforward_dp") {
    expect({"xi"});
    return make_beta_pushforward_dp(get("xi"));
  }
  throw InvalidParameter("unknown kernel family '" + family + "'");
}

// ------------------------------------------------------------- divergences

double hellinger_expfam(const ExpFamilySpec& spec, const Param& theta1, const Param& theta2) {
  const Eigen::VectorXd e1 = spec.natural(theta1), e2 = spec.natural(theta2);
  const Eigen::VectorXd mid = 0.5 * (e1 + e2);
  if (!spec.in_natural_domain(e1) || !spec.in_natural_domain(e2))
    throw MidpointOutsideDomain("natural parameter outside the natural domain");
  if (!spec.in_natural_domain(mid))
    throw MidpointOutsideDomain("midpoint of natural parameters outside the natural domain");
  const double log_affinity =
      spec.log_partition(mid) - 0.5 * (spec.log_partition(e1) + spec.log_partition(e2));
  return std::sqrt(std::max(0.0, -std::expm1(std::min(0.0, log_affinity))));
}

DivergenceValue divergence_numeric(const Kernel& kernel, const Param& theta1, const Param& theta2,
                                   Divergence which) {
  kernel.require_valid(theta1);
  kernel.require_valid(theta2);
  bool infinite = false;
  auto integrand = [&](double x) {
    const double l1 = kernel.log_density(x, theta1), l2 = kernel.log_density(x, theta2);
    switch (which) {
      case Divergence::TV:
        return 0.5 * std::abs(std::exp(l1) - std::exp(l2));
      case Divergence::Hellinger: {
        const double d = std::exp(0.5 * l1) - std::exp(0.5 * l2);
        return 0.5 * d * d;
      }
      case Divergence::KL:
        if (l1 == -kInf) return 0.0;
        if (l2 == -kInf) {
          infinite = true;
          return 0.0;
        }
        return std::exp(l1) * (l1 - l2);
    }
    return 0.0;
  };

  DivergenceValue out;
  if (kernel.is_discrete()) {
    for (double x : kernel.discrete_support()) out.value += integrand(x);
  } else {
    constexpr double kTail = 2.5e-13;
    const auto s1 = kernel.effective_support(theta1, kTail);
    const auto s2 = kernel.effective_support(theta2, kTail);
    std::vector<double> breaks{s1.first, s1.second, s2.first, s2.second};
    for (double b : kernel.breakpoints(theta1)) breaks.push_back(b);
    for (double b : kernel.breakpoints(theta2)) breaks.push_back(b);
    const auto q = integrate_1d(integrand, std::min(s1.first, s2.first),
                                std::max(s1.second, s2.second), breaks, 1e-11);
    if (!(q.error <= 1e-8)) {
      std::ostringstream msg;
      msg << "quadrature error estimate " << q.error << " exceeds 1e-8";
      throw QuadratureNonConvergence(msg.str());
    }
    out.value = q.value;
    out.error = q.error;
  }
  if (infinite) {
    out.value = kInf;
    return out;
  }
  switch (which) {
    case Divergence::TV:
      out.value = std::clamp(out.value, 0.0, 1.0);
      break;
    case Divergence::Hellinger:
      out.value = std::sqrt(std::clamp(out.value, 0.0, 1.0));
      break;
    case Divergence::KL:
      out.value = std::max(0.0, out.value);
      break;
  }
  return out;
}

}  // namespace mixlab
