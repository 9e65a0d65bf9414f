#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mixlab/kernels.hpp"
#include "mixlab/measures.hpp"

namespace mixlab {

enum class VandermondeBasis { Monomial, Bernstein };

/// Determinant of the 2k x 2k matrix whose rows are (f_j(x_a)) and
/// (f_j'(x_a)) for each point, with f_j(x) = x^{j-1} (monomial) or
/// x^{j-1} (1-x)^{2k-1-(j-1)} (Bernstein, n = 2k-1). Computed by LU in
/// extended precision. Equals prod_{a<b} (x_a - x_b)^4 for both bases.
double gen_vandermonde_det(const std::vector<double>& xs, VandermondeBasis basis);

struct LinearSystemReport {
  Eigen::MatrixXd matrix;
  int rank = 0;
  double smallest_singular_value = 0.0;
  double largest_singular_value = 0.0;
  Eigen::MatrixXd nullspace;  ///< orthonormal columns; empty when full column rank
};

/// Rank report via SVD with tolerance sigma_max * max(rows, cols) * 1e-12.
LinearSystemReport analyze_system(const Eigen::MatrixXd& matrix);

/// First-order system of a Bernoulli product mixture of length n over the
/// success counts s = 0..n. Columns are (f(s|theta_i), d/dtheta f(s|theta_i))
/// for each atom in turn, with f(s|t) = t^s (1-t)^(n-s).
LinearSystemReport bernoulli_first_order_system(const MixingMeasure& g, int n);

struct NonIdentWitness {
  MixingMeasure original;
  MixingMeasure witness;
  int n = 0;
  double a = 0.0;
  double max_moment_mismatch = 0.0;
  double tv_at_n = 0.0;
};

/// A second Bernoulli mixing measure with the same law of length-(2k-2)
/// sequences. The free parameter a > 0 selects one member of the infinite
/// family. Throws RootBracketingFailed when the sign pattern breaks down
/// numerically.
NonIdentWitness bernoulli_nonidentifiable_witness(const MixingMeasure& g, double a);

/// Quadrature grid for Gram computations. Explicit points (with optional
/// weights, default 1) are used as given; otherwise composite 20-point
/// Gauss-Legendre panels on the joint effective support are refined by
/// doubling until the smallest eigenvalue changes by less than 1%.
struct GridSpec {
  std::vector<double> points;
  std::vector<double> weights;
  double tail = 1e-10;
  int initial_panels = 2;
  int max_doublings = 7;
};

struct GramReport {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  int functions = 0;
  std::size_t grid_points = 0;
  int panels = 0;
  /// min/max below 1e-8: candidate degeneracy (reported, not enforced)
  bool near_singular = false;
};

/// Smallest eigenvalue of the normalized Gram matrix of
/// {f(.|theta_i), grad f(.|theta_i)}. Each atom's block is first
/// orthonormalized (so rescaling f by any positive c(theta) leaves the
/// spectrum unchanged); the cross-atom Gram then measures linear
/// independence.
GramReport first_order_gram(const Kernel& kernel, const std::vector<Param>& atoms,
                            const GridSpec& grid = {});

/// Same normalized Gram for Bernoulli products of length n, on the success
/// counts with binomial multiplicities (the law of a length-n sequence).
GramReport bernoulli_product_gram(const std::vector<Param>& atoms, int n);

/// (a_1..a_k, b_1..b_k) with a_i in R^q.
struct Direction {
  std::vector<Eigen::VectorXd> a;
  std::vector<double> b;
};

/// max over the grid of |sum_i a_i^T grad f(x|theta_i) + b_i f(x|theta_i)|
/// divided by max over the grid of sum_i f(x|theta_i).
double degenerate_direction_check(const Kernel& kernel, const MixingMeasure& g0,
                                  const Direction& direction, const GridSpec& grid = {});

/// Validates shape, nonzero-ness and sum_i b_i = 0. Throws InvalidParameter.
void require_admissible_direction(const MixingMeasure& g0, const Direction& direction);

}  // namespace mixlab
