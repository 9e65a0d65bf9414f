#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/kernels.hpp"
#include "mixlab/measures.hpp"
#include "mixlab/products.hpp"

namespace mixlab {

/// Uniform prior on the box Theta_1 for every atom, uniform on the simplex
/// for the weights.
struct PriorSpec {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// Finite bounds, lower < upper, box inside the kernel's parameter box.
  void validate(const Kernel& kernel) const;
  bool contains(const Point& theta) const;
  double log_volume() const;
};

struct McmcConfig {
  std::size_t iterations = 20000;
  double burn_in_fraction = 0.25;
  double initial_scale = 0.1;
  double target_acceptance = 0.23;
  /// AllProposalsRejected after this many consecutive rejections.
  std::size_t reject_window = 5000;
};

struct Chain {
  /// Post-burn-in draws, canonicalized.
  std::vector<MixingMeasure> draws;
  double acceptance_rate = 0.0;  ///< over the post-burn-in phase
  std::vector<double> scale_trace;  ///< proposal scale after each burn-in step
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
};

/// sum_i log p_{G,N_i}(X^i) + log prior density; -inf outside the prior support.
double log_posterior_unnorm(const MixingMeasure& g, const ExchangeableDataset& data,
                            const Kernel& kernel, const PriorSpec& prior);

MixingMeasure prior_sample(const PriorSpec& prior, std::size_t k0, Rng& rng);

/// Random-walk Metropolis. Atoms move in the box with reflection at its
/// faces; weights move in additive log-ratio coordinates (Jacobian
/// prod_i p_i). The scale adapts toward the target acceptance during burn-in
/// and is frozen afterwards.
Chain mcmc_run(const ExchangeableDataset& data, const Kernel& kernel, const PriorSpec& prior,
               std::size_t k0, const McmcConfig& config, std::uint64_t seed);

/// Batch-means standard error of the mean of a stationary series.
double batch_means_stderr(const std::vector<double>& series, std::size_t batches = 20);

struct ErrorQuantiles {
  double level = 0.0;
  double d_n = 0.0;      ///< D_{N-bar}(G, G0)
  double d_theta = 0.0;  ///< matched atom distance
  double d_p = 0.0;      ///< matched weight distance
};

/// 0.5 / 0.9 / 0.95 quantiles over the chain's draws.
std::vector<ErrorQuantiles> posterior_error_summary(const Chain& chain, const MixingMeasure& g0,
                                                    double n_bar);

/// Constant N (lo == hi) or i.i.d. uniform on {lo..hi}.
struct LengthLaw {
  int lo = 1;
  int hi = 1;
  std::vector<int> draw(std::size_t m, Rng& rng) const;
};

struct ContractionConfig {
  McmcConfig mcmc;
  PriorSpec prior;
  unsigned workers = 1;
  /// Minimum admissible sequence length; 0 picks the family default
  /// (Bernoulli 2k0 - 1, gamma 2, otherwise 1).
  int identifiable_length = 0;
};

struct ContractionRow {
  std::size_t m = 0;
  std::size_t replicate = 0;
  double mean_length = 0.0;
  double total_length = 0.0;
  double median_d_n = 0.0;
  double median_d_theta = 0.0;
  double median_d_p = 0.0;
  double acceptance = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;   ///< 95% Student-t interval
  double ci_high = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// OLS of y on x with a 95% interval for the slope. Needs two distinct x.
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ContractionReport {
  std::vector<ContractionRow> rows;
  SlopeFit d_p_vs_m;            ///< log median d_p on log m
  SlopeFit d_theta_vs_total;    ///< log median d_theta on log sum_i N_i
};

ContractionReport contraction_experiment(const Kernel& kernel, const MixingMeasure& g0,
                                         const std::vector<std::size_t>& m_grid,
                                         const LengthLaw& lengths, std::size_t replicates,
                                         const ContractionConfig& config, std::uint64_t seed);

}  // namespace mixlab
