#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixlab/kernels.hpp"
#include "mixlab/measures.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

/// P_{G,N} = sum_i p_i P_{theta_i}^{(x) N}.
struct ProductMixtureModel {
  ProductMixtureModel(MixingMeasure measure, KernelPtr kernel, int n);
  MixingMeasure measure;
  KernelPtr kernel;
  int n;
};

/// m independent sequences; sequence i holds N_i values.
struct ExchangeableDataset {
  std::vector<std::vector<double>> sequences;
  std::uint64_t seed = 0;

  std::size_t m() const { return sequences.size(); }
  std::vector<int> lengths() const;
  double mean_length() const;
  std::size_t total_length() const;
};

/// Checks that every atom lies in the kernel's parameter space.
void require_atoms_valid(const MixingMeasure& g, const Kernel& kernel);

double log_density_product(const ProductMixtureModel& model, const std::vector<double>& xs);

/// One latent component per sequence, then N_i conditionally i.i.d. draws.
/// The stream is derived from `seed` alone.
ExchangeableDataset sample_dataset(const MixingMeasure& g, const Kernel& kernel,
                                   const std::vector<int>& lengths, std::uint64_t seed);
/// Low-level form that accepts zero weights (a component that is never drawn).
ExchangeableDataset sample_dataset(const std::vector<Param>& atoms,
                                   const std::vector<double>& weights, const Kernel& kernel,
                                   const std::vector<int>& lengths, std::uint64_t seed);

/// min over tau of sqrt(N) max_i h(P_theta_i, P_theta'_tau(i)) + sqrt(sum_i |p_i - p'_tau(i)| / 2).
double hellinger_upper_bound(const MixingMeasure& g, const MixingMeasure& g2, const Kernel& kernel,
                             int n);
/// N >= 2: min over tau of sqrt(2N) max_i h + sum |dp| / 2, i.e. sqrt(N)
/// times the unnormalized Hellinger distance.
/// N = 1: min over tau of max_i V + sum |dp| / 2.
double tv_upper_bound(const MixingMeasure& g, const MixingMeasure& g2, const Kernel& kernel, int n);

/// Hellinger distance between two kernel members, closed form when the
/// kernel has exponential-family structure.
double kernel_hellinger(const Kernel& kernel, const Param& a, const Param& b);

enum class DivergenceMethod { ExactEnumeration, Quadrature, MonteCarlo };
std::string to_string(DivergenceMethod m);

struct DivergenceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  DivergenceMethod method = DivergenceMethod::ExactEnumeration;
  std::size_t samples = 0;
};

struct Budget {
  std::size_t mc_draws = 1000000;
  std::size_t max_draws = 100000000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// Draws per substream. Results depend on (seed, mc_draws, chunk) only.
  std::size_t chunk = 10000;
};

/// TV or Hellinger (h) between P_{G,N} and P_{G2,N}. Bernoulli: exact sum
/// over success counts. Continuous N <= 2: adaptive quadrature. Otherwise
/// Monte Carlo under the proposal (P + Q)/2.
DivergenceEstimate estimate_divergence(const MixingMeasure& g, const MixingMeasure& g2,
                                       const Kernel& kernel, int n, Divergence which,
                                       const Budget& budget = {});

/// sqrt((1/m) sum_i h^2(P_{G,N_i}, P_{G0,N_i})).
DivergenceEstimate d_mh(const MixingMeasure& g, const MixingMeasure& g0, const Kernel& kernel,
                        const std::vector<int>& lengths, const Budget& budget = {});

/// log P_{G,N}(S = s) for Bernoulli kernels, s = 0..N (binomial multiplicity included).
std::vector<double> bernoulli_count_log_pmf(const MixingMeasure& g, int n);

}  // namespace mixlab
