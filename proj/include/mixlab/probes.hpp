#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mixlab/identifiability.hpp"
#include "mixlab/kernels.hpp"
#include "mixlab/measures.hpp"
#include "mixlab/products.hpp"

namespace mixlab {

/// One cell of a ratio table.
struct ProbeRow {
  std::string series;
  double index = 0.0;  ///< l, epsilon or N depending on the probe
  double numerator = 0.0;
  double std_error = 0.0;  ///< of the numerator; 0 for exact values
  double denominator = 0.0;
  double ratio = 0.0;
  std::string method;
};

struct SeriesVerdict {
  std::string series;
  bool vanishing = false;
  bool bounded_away = false;
  /// "vanishing", "bounded-away" or "inconclusive"
  std::string label;
};

struct ProbeReport {
  std::string probe;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<ProbeRow> rows;
  std::vector<SeriesVerdict> verdicts;
  std::vector<std::string> flags;

  std::vector<ProbeRow> series(const std::string& name) const;
  const SeriesVerdict& verdict(const std::string& name) const;
};

/// Calibration constants of the verdict logic.
struct VerdictThresholds {
  double decay = 0.2;       ///< vanishing: ratio(last) / ratio(first) below this
  double band_low = 0.5;    ///< bounded-away: every ratio within [low, high] x median
  double band_high = 2.0;
  double sigmas = 3.0;      ///< required separation in combined standard errors
};

/// Classifies rows ordered by increasing index. Vanishing needs the decay
/// and a drop larger than `sigmas` combined ratio standard errors; bounded
/// away needs the band and a median larger than `sigmas` standard errors.
SeriesVerdict classify_series(const std::string& name, const std::vector<ProbeRow>& rows,
                              const VerdictThresholds& t = {});

struct ProbeOptions {
  Budget budget;
  VerdictThresholds thresholds;
  /// MC cells are refused when the predicted ratio stderr exceeds this
  /// fraction of the predicted ratio.
  double variance_guard = 0.1;
};

/// Scales (a_i / p_i, b_i) so that sum_i (|a_i / p_i| + |b_i|) = 1.
Direction normalize_direction(const MixingMeasure& g0, const Direction& direction);

/// G_l with p_i = p_i0 + b'_i / l and theta_i = theta_i0 + a'_i / l for the
/// normalized direction. Throws InvalidPath when G_l leaves the parameter
/// box or the simplex.
MixingMeasure perturbation_path(const Kernel& kernel, const MixingMeasure& g0,
                                const Direction& normalized, double l);

/// V (or h) between P_{G_l,N} and P_{G0,N} divided by D_1(G_l, G0) over the l grid.
ProbeReport inverse_ratio_probe(const Kernel& kernel, const MixingMeasure& g0,
                                const Direction& direction, int n,
                                const std::vector<double>& l_grid = {10, 100, 1000},
                                Divergence which = Divergence::TV, const ProbeOptions& opt = {});

/// Location-scale exponential pair with equal locations and p_1/sigma_1 =
/// p_2/sigma_2. Series "pair": V(P_{G_l}, P_{H_l}) / D_1(G_l, H_l).
/// Series "one-sided": V(P_{G_l}, P_{G0}) / D_1(G_l, G0).
ProbeReport curvature_probe_locscale(const MixingMeasure& g0,
                                     const std::vector<double>& l_grid = {10, 100, 1000},
                                     const ProbeOptions& opt = {});

/// For each N, ratios of the product-Hellinger upper bound to
/// D_{psi(N)}(G_eps, G0) with psi(N) = N^psi_exponent, moving atom 0 by eps
/// along the first coordinate. Series "N=<N>" per N and "minimum" indexed by N.
ProbeReport sqrtN_sharpness_probe(const Kernel& kernel, const MixingMeasure& g0,
                                  double psi_exponent, const std::vector<int>& n_grid,
                                  const std::vector<double>& eps_grid,
                                  const ProbeOptions& opt = {});

/// Series "D_r1": V / D_{r,1}(G_l, G0); series "W_r^r": V / W_r(G_l, G0)^r (N = 1).
ProbeReport impact_probe_Dr(const Kernel& kernel, const MixingMeasure& g0,
                            const Direction& direction, double r,
                            const std::vector<double>& l_grid = {10, 100, 1000},
                            const ProbeOptions& opt = {});

/// Weight-only path p_0 += 1/l, p_1 -= 1/l with atoms fixed. The ratio
/// V(P_{G_l,N}, P_{G0,N}) / D_N(G_l, G0) never exceeds 1/2.
ProbeReport weight_path_probe(const Kernel& kernel, const MixingMeasure& g0, int n,
                              const std::vector<double>& l_grid = {10, 100, 1000},
                              const ProbeOptions& opt = {});

/// (a/4) ((1-a) / (gamma sqrt(mN)))^(1/beta0).
double lecam_two_point_bound(double m, double n, double gamma, double beta0, double a);

}  // namespace mixlab
