#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "mixlab/errors.hpp"
#include "mixlab/measures.hpp"

namespace mixlab {

namespace {

struct Basis {
  int rows, cols;
  std::vector<char> basic;  // rows * cols
  bool at(int i, int j) const { return basic[static_cast<std::size_t>(i * cols + j)] != 0; }
  void set(int i, int j, bool b) { basic[static_cast<std::size_t>(i * cols + j)] = b ? 1 : 0; }
};

// Path in the basis tree from row node `row` to column node `col`, as a list
// of cells (row, col) in walking order.
std::vector<std::pair<int, int>> tree_path(const Basis& basis, int row, int col) {
  const int m = basis.rows, n = basis.cols;
  // Nodes: rows are 0..m-1, columns are m..m+n-1.
  std::vector<int> parent(static_cast<std::size_t>(m + n), -1);
  std::vector<char> seen(static_cast<std::size_t>(m + n), 0);
  std::queue<int> frontier;
  frontier.push(row);
  seen[static_cast<std::size_t>(row)] = 1;
  const int target = m + col;
  while (!frontier.empty()) {
    const int node = frontier.front();
    frontier.pop();
    if (node == target) break;
    if (node < m) {
      for (int j = 0; j < n; ++j) {
        if (basis.at(node, j) && !seen[static_cast<std::size_t>(m + j)]) {
          seen[static_cast<std::size_t>(m + j)] = 1;
          parent[static_cast<std::size_t>(m + j)] = node;
          frontier.push(m + j);
        }
      }
    } else {
      const int j = node - m;
      for (int i = 0; i < m; ++i) {
        if (basis.at(i, j) && !seen[static_cast<std::size_t>(i)]) {
          seen[static_cast<std::size_t>(i)] = 1;
          parent[static_cast<std::size_t>(i)] = node;
          frontier.push(i);
        }
      }
    }
  }
  if (!seen[static_cast<std::size_t>(target)])
    throw InvalidParameter("transport basis is not a spanning tree");
  std::vector<std::pair<int, int>> cells;
  for (int node = target; node != row;) {
    const int prev = parent[static_cast<std::size_t>(node)];
    if (node >= m)
      cells.emplace_back(prev, node - m);
    else
      cells.emplace_back(node, prev - m);
    node = prev;
  }
  std::reverse(cells.begin(), cells.end());
  return cells;
}

}  // namespace

Eigen::MatrixXd solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  if (m == 0 || n == 0 || cost.rows() != m || cost.cols() != n)
    throw InvalidParameter("transport problem has inconsistent shapes");
  if ((supply.array() < 0).any() || (demand.array() < 0).any())
    throw InvalidParameter("transport marginals must be nonnegative");

  Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(m, n);
  Basis basis{m, n, std::vector<char>(static_cast<std::size_t>(m * n), 0)};

  // North-west corner start: a staircase of exactly m + n - 1 basic cells.
  {
    Eigen::VectorXd s = supply, d = demand;
    int i = 0, j = 0;
    for (;;) {
      const double amount = std::max(0.0, std::min(s[i], d[j]));
      plan(i, j) = amount;
      basis.set(i, j, true);
      const bool row_done = s[i] <= d[j];
      s[i] -= amount;
      d[j] -= amount;
      if (i == m - 1 && j == n - 1) break;
      if ((row_done && i < m - 1) || j == n - 1)
        ++i;
      else
        ++j;
    }
  }

  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double optimality_tol = 1e-13 * scale;
  const int max_iterations = 100 * (m + n) * (m + n) + 1000;
  std::vector<double> u(static_cast<std::size_t>(m)), v(static_cast<std::size_t>(n));
  for (int iter = 0; iter < max_iterations; ++iter) {
    // Potentials from u_i + v_j = c_ij on basic cells.
    std::vector<char> have_u(static_cast<std::size_t>(m), 0), have_v(static_cast<std::size_t>(n), 0);
    u[0] = 0.0;
    have_u[0] = 1;
    for (bool progress = true; progress;) {
      progress = false;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          if (!basis.at(i, j)) continue;
          if (have_u[i] && !have_v[j]) {
            v[j] = cost(i, j) - u[i];
            have_v[j] = 1;
            progress = true;
          } else if (!have_u[i] && have_v[j]) {
            u[i] = cost(i, j) - v[j];
            have_u[i] = 1;
            progress = true;
          }
        }
    }
    // Entering cell: most negative reduced cost; Bland's first-index rule
    // once we are deep into the iteration budget, to rule out cycling.
    const bool bland = iter > max_iterations / 2;
    int ei = -1, ej = -1;
    double best = -optimality_tol;
    for (int i = 0; i < m && !(bland && ei >= 0); ++i)
      for (int j = 0; j < n; ++j) {
        if (basis.at(i, j)) continue;
        const double reduced = cost(i, j) - u[i] - v[j];
        if (reduced < best) {
          best = reduced;
          ei = i;
          ej = j;
          if (bland) break;
        }
      }
    if (ei < 0) return plan;

    const auto path = tree_path(basis, ei, ej);
    // Odd positions along the path (0-based even indices) lose mass.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = 0;
    for (std::size_t t = 0; t < path.size(); t += 2) {
      const double x = plan(path[t].first, path[t].second);
      if (x < theta) {
        theta = x;
        leave = t;
      }
    }
    theta = std::max(0.0, theta);
    plan(ei, ej) += theta;
    for (std::size_t t = 0; t < path.size(); ++t) {
      auto [i, j] = path[t];
      plan(i, j) += (t % 2 == 0) ? -theta : theta;
    }
    plan(path[leave].first, path[leave].second) = 0.0;
    basis.set(path[leave].first, path[leave].second, false);
    basis.set(ei, ej, true);
  }
  throw InvalidParameter("transportation simplex did not converge");
}

}  // namespace mixlab
