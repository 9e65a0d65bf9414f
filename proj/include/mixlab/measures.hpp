#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace mixlab {

using Point = Eigen::VectorXd;

/// A discrete mixing measure G = sum_i p_i delta_{theta_i} with k atoms in R^q.
///
/// Construction validates the invariants: k >= 1, finite coordinates of a
/// common dimension, strictly positive weights summing to one within 1e-12,
/// pairwise distinct atoms. The minimum pairwise gap rho is computed eagerly
/// (rho = +inf when k = 1). Instances are immutable.
class MixingMeasure {
 public:
  MixingMeasure(std::vector<Point> atoms, std::vector<double> weights);

  /// Scalar-atom convenience (q = 1).
  static MixingMeasure from_scalars(const std::vector<double>& atoms,
                                    std::vector<double> weights);

  /// Same as the constructor but first rescales the weights to sum to one.
  /// Used where weights come out of arithmetic with rounding error.
  static MixingMeasure normalized(std::vector<Point> atoms, std::vector<double> weights);

  std::size_t size() const { return atoms_.size(); }
  int dim() const { return static_cast<int>(atoms_.front().size()); }
  const std::vector<Point>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  const Point& atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  double min_gap() const { return rho_; }

  bool operator==(const MixingMeasure& other) const;

 private:
  std::vector<Point> atoms_;
  std::vector<double> weights_;
  double rho_;
};

/// A bijection on {0..k-1}. `perm[i]` is the index in the second measure
/// matched to atom i of the first measure.
using Permutation = std::vector<int>;

struct MatchingResult {
  Permutation permutation;
  double cost = 0.0;
  bool unique = false;
};

/// Atoms sorted lexicographically, weights carried along. Idempotent.
MixingMeasure canonicalize(const MixingMeasure& g);

/// min over permutations of sum_i sqrt(N) |theta_i - theta'_{tau(i)}| + |p_i - p'_{tau(i)}|.
/// N may be any positive real.
double distance_DN(const MixingMeasure& g, const MixingMeasure& g2, double n);

/// min over permutations of sum_i |theta_i - theta'_{tau(i)}|^r1 + |p_i - p'_{tau(i)}|^r2.
double distance_Dr1r2(const MixingMeasure& g, const MixingMeasure& g2, double r1, double r2);

struct AtomWeightDistances {
  double atoms = 0.0;    ///< d_Theta
  double weights = 0.0;  ///< d_p
};

/// d_Theta and d_p, each minimized over permutations independently.
AtomWeightDistances atom_and_weight_distances(const MixingMeasure& g, const MixingMeasure& g2);

/// Exact W_p with Euclidean ground cost; unequal support sizes allowed.
double wasserstein(const MixingMeasure& g, const MixingMeasure& g2, double p);

/// D_1-optimal matching of g against g0. `unique` is set when D_1(g, g0) is
/// strictly below rho(g0)/2 (with 1e-12 slack); in that regime the matching
/// is also optimal for every D_N, N >= 1. Ties among optimal permutations
/// are broken lexicographically (k <= 8) and flagged as not unique.
MatchingResult optimal_matching(const MixingMeasure& g, const MixingMeasure& g0);

/// Cost of a given matching under the D_N cost.
double matching_cost_DN(const MixingMeasure& g, const MixingMeasure& g2,
                        const Permutation& perm, double n);

// Assignment and transport solvers shared by the distances above.

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// O(k^3)). Returns perm with perm[row] = column.
Permutation solve_assignment(const Eigen::MatrixXd& cost);

/// Exact discrete optimal transport by the transportation simplex.
/// Returns the optimal coupling; supply and demand must have equal totals.
Eigen::MatrixXd solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                const Eigen::MatrixXd& cost);

}  // namespace mixlab
