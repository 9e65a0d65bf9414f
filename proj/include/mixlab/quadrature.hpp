#pragma once

#include <functional>
#include <vector>

namespace mixlab {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< absolute error estimate (sum over panels)
};

/// Globally adaptive Gauss-Kronrod (G15/K31) on [a, b], split at every
/// breakpoint that falls strictly inside. The panel with the largest
/// |K - G| is bisected until the summed estimate drops below `abs_tol` or
/// the panel budget runs out; the caller decides whether the returned error
/// is acceptable.
QuadratureResult integrate_1d(const std::function<double(double)>& f, double a, double b,
                              const std::vector<double>& breaks, double abs_tol = 1e-11,
                              int max_panels = 4000);

/// Nested adaptive integral over [a, b]^2 with the same breakpoints on both
/// axes. The reported error adds the outer estimate to the worst inner one
/// scaled by the interval length.
QuadratureResult integrate_2d(const std::function<double(double, double)>& f, double a, double b,
                              const std::vector<double>& breaks, double abs_tol = 1e-10);

/// Composite Gauss-Legendre rule with `panels` equal panels of 20 nodes on
/// each piece of [a, b] delimited by `breaks`.
struct Grid {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Grid gauss_legendre_grid(double a, double b, const std::vector<double>& breaks, int panels);

}  // namespace mixlab
