#include "mixlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mixlab/errors.hpp"

namespace mixlab {

namespace {

constexpr double kWeightSumTolerance = 1e-12;
constexpr double kUniquenessSlack = 1e-12;

void require_equal_size(const MixingMeasure& a, const MixingMeasure& b) {
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << "support sizes differ (" << a.size() << " vs " << b.size() << ")";
    throw MismatchedSupportSize(msg.str());
  }
  if (a.dim() != b.dim()) throw MismatchedSupportSize("atom dimensions differ");
}

template <class CellCost>
Eigen::MatrixXd cost_matrix(const MixingMeasure& g, CellCost&& cell) {
  const auto k = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd c(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) c(i, j) = cell(static_cast<std::size_t>(i),
                                                         static_cast<std::size_t>(j));
  return c;
}

double assignment_value(const Eigen::MatrixXd& c) {
  const Permutation perm = solve_assignment(c);
  double total = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) total += c(static_cast<Eigen::Index>(i), perm[i]);
  return total;
}

bool lex_less(const Point& a, const Point& b) {
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    if (a[d] < b[d]) return true;
    if (a[d] > b[d]) return false;
  }
  return false;
}

}  // namespace

MixingMeasure::MixingMeasure(std::vector<Point> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.empty()) throw InvalidMeasure("a mixing measure needs at least one atom");
  if (atoms_.size() != weights_.size())
    throw InvalidMeasure("atoms and weights have different lengths");
  const auto q = atoms_.front().size();
  if (q < 1) throw InvalidMeasure("atoms must have dimension >= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].size() != q) throw InvalidMeasure("atoms have inconsistent dimensions");
    if (!atoms_[i].allFinite()) throw InvalidMeasure("atom coordinates must be finite");
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
      throw InvalidMeasure("weights must be strictly positive");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights sum to " << total << ", not 1";
    throw InvalidMeasure(msg.str());
  }
  rho_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    for (std::size_t j = i + 1; j < atoms_.size(); ++j)
      rho_ = std::min(rho_, (atoms_[i] - atoms_[j]).norm());
  if (!(rho_ > 0.0)) throw InvalidMeasure("atoms must be pairwise distinct");
}

MixingMeasure MixingMeasure::from_scalars(const std::vector<double>& atoms,
                                          std::vector<double> weights) {
  std::vector<Point> pts;
  pts.reserve(atoms.size());
  for (double a : atoms) pts.push_back(Point::Constant(1, a));
  return MixingMeasure(std::move(pts), std::move(weights));
}

MixingMeasure MixingMeasure::normalized(std::vector<Point> atoms, std::vector<double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw InvalidMeasure("weights must be strictly positive");
  for (double& w : weights) w /= total;
  return MixingMeasure(std::move(atoms), std::move(weights));
}

bool MixingMeasure::operator==(const MixingMeasure& other) const {
  if (size() != other.size() || dim() != other.dim()) return false;
  for (std::size_t i = 0; i < size(); ++i)
    if (atoms_[i] != other.atoms_[i] || weights_[i] != other.weights_[i]) return false;
  return true;
}

MixingMeasure canonicalize(const MixingMeasure& g) {
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lex_less(g.atom(a), g.atom(b)); });
  std::vector<Point> atoms;
  std::vector<double> weights;
  for (auto i : order) {
    atoms.push_back(g.atom(i));
    weights.push_back(g.weight(i));
  }
  return MixingMeasure(std::move(atoms), std::move(weights));
}

double matching_cost_DN(const MixingMeasure& g, const MixingMeasure& g2, const Permutation& perm,
                        double n) {
  require_equal_size(g, g2);
  const double s = std::sqrt(n);
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto j = static_cast<std::size_t>(perm[i]);
    total += s * (g.atom(i) - g2.atom(j)).norm() + std::abs(g.weight(i) - g2.weight(j));
  }
  return total;
}

double distance_DN(const MixingMeasure& g, const MixingMeasure& g2, double n) {
  require_equal_size(g, g2);
  if (!(n > 0.0)) throw InvalidParameter("D_N requires N > 0");
  const double s = std::sqrt(n);
  return assignment_value(cost_matrix(g, [&](std::size_t i, std::size_t j) {
    return s * (g.atom(i) - g2.atom(j)).norm() + std::abs(g.weight(i) - g2.weight(j));
  }));
}

double distance_Dr1r2(const MixingMeasure& g, const MixingMeasure& g2, double r1, double r2) {
  require_equal_size(g, g2);
  if (!(r1 >= 1.0) || !(r2 >= 1.0)) throw InvalidParameter("D_{r1,r2} requires r1, r2 >= 1");
  return assignment_value(cost_matrix(g, [&](std::size_t i, std::size_t j) {
    return std::pow((g.atom(i) - g2.atom(j)).norm(), r1) +
           std::pow(std::abs(g.weight(i) - g2.weight(j)), r2);
  }));
}

AtomWeightDistances atom_and_weight_distances(const MixingMeasure& g, const MixingMeasure& g2) {
  require_equal_size(g, g2);
  AtomWeightDistances out;
  out.atoms = assignment_value(cost_matrix(
      g, [&](std::size_t i, std::size_t j) { return (g.atom(i) - g2.atom(j)).norm(); }));
  // Sorting both weight vectors gives the optimal 1-D matching.
  std::vector<double> a = g.weights(), b = g2.weights();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i) out.weights += std::abs(a[i] - b[i]);
  return out;
}

double wasserstein(const MixingMeasure& g, const MixingMeasure& g2, double p) {
  if (!(p >= 1.0)) throw InvalidParameter("W_p requires p >= 1");
  if (g.dim() != g2.dim()) throw MismatchedSupportSize("atom dimensions differ");
  const auto m = static_cast<Eigen::Index>(g.size());
  const auto n = static_cast<Eigen::Index>(g2.size());
  Eigen::MatrixXd cost(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cost(i, j) = std::pow((g.atom(static_cast<std::size_t>(i)) -
                             g2.atom(static_cast<std::size_t>(j))).norm(), p);
  const Eigen::VectorXd supply = Eigen::Map<const Eigen::VectorXd>(g.weights().data(), m);
  Eigen::VectorXd demand = Eigen::Map<const Eigen::VectorXd>(g2.weights().data(), n);
  // Absorb the (<= 1e-12) total-mass mismatch into the largest demand cell.
  Eigen::Index big = 0;
  demand.maxCoeff(&big);
  demand[big] += supply.sum() - demand.sum();
  const Eigen::MatrixXd plan = solve_transport(supply, demand, cost);
  const double total = std::max(0.0, (plan.array() * cost.array()).sum());
  return std::pow(total, 1.0 / p);
}

MatchingResult optimal_matching(const MixingMeasure& g, const MixingMeasure& g0) {
  require_equal_size(g, g0);
  const Eigen::MatrixXd c = cost_matrix(g, [&](std::size_t i, std::size_t j) {
    return (g.atom(i) - g0.atom(j)).norm() + std::abs(g.weight(i) - g0.weight(j));
  });
  MatchingResult out;
  out.permutation = solve_assignment(c);
  out.cost = matching_cost_DN(g, g0, out.permutation, 1.0);
  const bool separated = out.cost + kUniquenessSlack < 0.5 * g0.min_gap();

  constexpr std::size_t kEnumerationLimit = 8;
  if (g.size() <= kEnumerationLimit) {
    // Lexicographically first optimal permutation, and count the ties.
    Permutation perm(g.size());
    std::iota(perm.begin(), perm.end(), 0);
    const double tol = 1e-12 * std::max(1.0, out.cost);
    int ties = 0;
    Permutation first;
    do {
      const double cost = matching_cost_DN(g, g0, perm, 1.0);
      if (cost <= out.cost + tol) {
        if (ties == 0) first = perm;
        ++ties;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.permutation = first;
    out.cost = matching_cost_DN(g, g0, first, 1.0);
    out.unique = separated && ties == 1;
  } else {
    out.unique = separated;
  }
  return out;
}

}  // namespace mixlab
