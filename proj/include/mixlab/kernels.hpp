#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/rng.hpp"

namespace mixlab {

using Param = Eigen::VectorXd;

enum class DataSpace { RealLine, Binary, PositiveReals, UnitInterval };

/// Exponential-family structure f(x|theta) = exp(<eta(theta), T(x)> - A(eta)) h(x).
class ExpFamilySpec {
 public:
  virtual ~ExpFamilySpec() = default;
  virtual int stat_dim() const = 0;
  virtual Eigen::VectorXd sufficient_stat(double x) const = 0;
  virtual double log_carrier(double x) const = 0;
  virtual Eigen::VectorXd natural(const Param& theta) const = 0;
  virtual Eigen::MatrixXd natural_jacobian(const Param& theta) const = 0;
  virtual double log_partition(const Eigen::VectorXd& eta) const = 0;
  virtual bool in_natural_domain(const Eigen::VectorXd& eta) const = 0;

  /// Density rebuilt from the structure; used to cross-check log_density.
  double log_density(double x, const Param& theta) const;
};

/// A parametric family {P_theta} on a one-dimensional data space.
class Kernel {
 public:
  virtual ~Kernel() = default;

  virtual std::string family() const = 0;
  virtual std::map<std::string, double> fixed_params() const { return {}; }
  virtual int dim() const = 0;
  virtual DataSpace data_space() const = 0;
  /// Open box containing the parameter space (entries may be infinite).
  virtual Eigen::VectorXd box_lower() const = 0;
  virtual Eigen::VectorXd box_upper() const = 0;
  /// Box membership plus any extra constraints of the family.
  virtual bool valid(const Param& theta) const;

  virtual double log_density(double x, const Param& theta) const = 0;
  double density(double x, const Param& theta) const;
  virtual double draw(const Param& theta, Rng& rng) const = 0;
  std::vector<double> sample(const Param& theta, std::size_t count, Rng& rng) const;

  virtual bool has_analytic_gradient() const { return false; }
  /// Gradient of the density in theta. The base version uses central
  /// differences with step 1e-6 * max(1, |theta_j|).
  virtual Eigen::VectorXd grad_density(double x, const Param& theta) const;

  virtual const ExpFamilySpec* exp_family() const { return nullptr; }

  /// Interval carrying all but `tail` of the mass (each side gets tail/2).
  virtual std::pair<double, double> effective_support(const Param& theta, double tail) const = 0;
  /// Points where the density may jump or have a kink (support endpoints).
  virtual std::vector<double> breakpoints(const Param& /*theta*/) const { return {}; }

  virtual double mean(const Param& theta) const = 0;
  virtual double variance(const Param& theta) const = 0;

  bool is_discrete() const { return data_space() == DataSpace::Binary; }
  /// The finite data space for discrete kernels.
  std::vector<double> discrete_support() const;

  /// Throws InvalidParameter naming the box when theta is not valid.
  void require_valid(const Param& theta) const;
  std::string box_description() const;
};

using KernelPtr = std::shared_ptr<const Kernel>;

KernelPtr make_bernoulli();
KernelPtr make_gaussian_location(double sigma);
KernelPtr make_gamma();
KernelPtr make_uniform();
KernelPtr make_locscale_exponential();
/// sum_i pi_i N(mu_i, sigma^2) with theta = (pi_1..pi_{k-1}, mu_1..mu_k),
/// mu strictly increasing and pi_1 + .. + pi_{k-1} < 1.
KernelPtr make_gaussian_location_mixture(double sigma, int k);
/// pi_1 Beta(a1 xi, a1 (1-xi)) + (1-pi_1) Beta(a2 xi, a2 (1-xi)) with
/// theta = (pi_1, a1, a2), 2 < a1 < a2. This is the law of X(B) when X is
/// drawn from the two-component Dirichlet-process mixture and xi = H(B).
KernelPtr make_beta_pushforward_dp(double xi);

/// Builds a kernel from its family name and fixed parameters, e.g.
/// ("gaussian_location", {{"sigma", 1}}). Throws InvalidParameter.
KernelPtr make_kernel(const std::string& family, const std::map<std::string, double>& fixed);

double hellinger_expfam(const ExpFamilySpec& spec, const Param& theta1, const Param& theta2);

enum class Divergence { TV, Hellinger, KL };

struct DivergenceValue {
  double value = 0.0;
  double error = 0.0;
};

/// TV, Hellinger (h, not h^2) or KL between two members of a family, by
/// exact summation or adaptive quadrature split at support endpoints.
/// Throws QuadratureNonConvergence when the error estimate exceeds 1e-8.
DivergenceValue divergence_numeric(const Kernel& kernel, const Param& theta1, const Param& theta2,
                                   Divergence which);

struct MomentMapReport {
  Eigen::VectorXd lambda;
  Eigen::MatrixXd jacobian;  ///< central finite differences
  double det_closed = 0.0;   ///< closed-form |det J|
  double det_fd = 0.0;       ///< |det| of the finite-difference Jacobian
};

/// Moment map of a composite kernel. Gaussian location mixture:
/// lambda_j = sum_i pi_i E(sigma Y + mu_i)^j, j = 1..2k-1. Beta pushforward:
/// lambda_j = sum_i pi_i E Z_i^{j+1}, j = 1..3.
MomentMapReport moment_map(const Kernel& composite, const Param& theta);

}  // namespace mixlab
