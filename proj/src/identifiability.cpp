#include "mixlab/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "mixlab/errors.hpp"
#include "mixlab/products.hpp"
#include "mixlab/quadrature.hpp"

namespace mixlab {

namespace {


long double ipow(long double x, int e) {
  long double r = 1;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

// Barycentric Lagrange interpolant through (nodes[j], values[j]).
class Barycentric {
 public:
  Barycentric(std::vector<double> nodes, std::vector<double> values)
      : x_(std::move(nodes)), v_(std::move(values)), w_(x_.size(), 1.0) {
    for (std::size_t j = 0; j < x_.size(); ++j)
      for (std::size_t m = 0; m < x_.size(); ++m)
        if (m != j) w_[j] /= (x_[j] - x_[m]);
  }
  double operator()(double x) const {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
      if (x == x_[j]) return v_[j];
      const double t = w_[j] / (x - x_[j]);
      num += t * v_[j];
      den += t;
    }
    return num / den;
  }

 private:
  std::vector<double> x_, v_, w_;
};

double bisect_root(const Barycentric& g, double lo, double hi, double g_lo, double g_hi) {
  if (!(g_lo < 0.0 && g_hi > 0.0) && !(g_lo > 0.0 && g_hi < 0.0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "no sign change of the interpolating polynomial on (" << lo << ", " << hi << ")";
    throw RootBracketingFailed(msg.str());
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= 1e-14 * std::max(1.0, std::abs(lo))) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct EvaluatedGrid {
  std::vector<double> nodes, weights;
  int panels = 0;
};

struct Support {
  double lo, hi;
  std::vector<double> breaks;
};

Support joint_support(const Kernel& kernel, const std::vector<Param>& atoms, double tail) {
  Support s{INFINITY, -INFINITY, {}};
  for (const auto& a : atoms) {
    const auto e = kernel.effective_support(a, tail);
    s.lo = std::min(s.lo, e.first);
    s.hi = std::max(s.hi, e.second);
    s.breaks.push_back(e.first);
    s.breaks.push_back(e.second);
    for (double b : kernel.breakpoints(a)) s.breaks.push_back(b);
  }
  return s;
}

EvaluatedGrid explicit_grid(const GridSpec& spec) {
  EvaluatedGrid g;
  g.nodes = spec.points;
  g.weights = spec.weights.empty() ? std::vector<double>(spec.points.size(), 1.0) : spec.weights;
  if (g.weights.size() != g.nodes.size())
    throw InvalidParameter("grid weights and points differ in length");
  return g;
}

// Columns f, d_1 f, .., d_q f per atom, rows scaled by sqrt(weight).
Eigen::MatrixXd function_matrix(const Kernel& kernel, const std::vector<Param>& atoms,
                                const EvaluatedGrid& grid) {
  const int q = kernel.dim();
  const auto rows = static_cast<Eigen::Index>(grid.nodes.size());
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(atoms.size()) * (q + 1));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double x = grid.nodes[static_cast<std::size_t>(r)];
    const double sw = std::sqrt(grid.weights[static_cast<std::size_t>(r)]);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const auto c0 = static_cast<Eigen::Index>(i) * (q + 1);
      m(r, c0) = sw * kernel.density(x, atoms[i]);
      const Eigen::VectorXd g = kernel.grad_density(x, atoms[i]);
      for (int j = 0; j < q; ++j) m(r, c0 + 1 + j) = sw * g[j];
    }
  }
  return m;
}

// Bernoulli product of length n on the success counts, weighted by C(n, s).
Eigen::MatrixXd bernoulli_product_matrix(const std::vector<Param>& atoms, int n) {
  Eigen::MatrixXd m(n + 1, static_cast<Eigen::Index>(atoms.size()) * 2);
  for (int s = 0; s <= n; ++s) {
    const double sw = std::sqrt(std::exp(std::lgamma(n + 1.0) - std::lgamma(s + 1.0) -
                                         std::lgamma(n - s + 1.0)));
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const double t = atoms[i][0];
      const auto c = static_cast<Eigen::Index>(2 * i);
      m(s, c) = sw * std::pow(t, s) * std::pow(1 - t, n - s);
      const double ds = (s > 0 ? s * std::pow(t, s - 1) * std::pow(1 - t, n - s) : 0.0) -
                        (n - s > 0 ? (n - s) * std::pow(t, s) * std::pow(1 - t, n - s - 1) : 0.0);
      m(s, c + 1) = sw * ds;
    }
  }
  return m;
}

GramReport gram_of(const Eigen::MatrixXd& m, int block) {
  Eigen::MatrixXd q = m;
  for (Eigen::Index start = 0; start < q.cols(); start += block) {
    for (Eigen::Index c = start; c < start + block; ++c) {
      const double original = q.col(c).norm();
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index p = start; p < c; ++p) q.col(c) -= q.col(p).dot(q.col(c)) * q.col(p);
      const double rest = q.col(c).norm();
      if (!(original > 0.0) || rest <= 1e-10 * original)
        q.col(c).setZero();
      else
        q.col(c) /= rest;
    }
  }
  const Eigen::MatrixXd gram = q.transpose() * q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  GramReport rep;
  rep.min_eigenvalue = eig.eigenvalues().minCoeff();
  rep.max_eigenvalue = eig.eigenvalues().maxCoeff();
  rep.functions = static_cast<int>(m.cols());
  rep.grid_points = static_cast<std::size_t>(m.rows());
  rep.near_singular = !(rep.min_eigenvalue > 1e-8 * rep.max_eigenvalue);
  return rep;
}

}  // namespace

double gen_vandermonde_det(const std::vector<double>& xs, VandermondeBasis basis) {
  // Clustered points make this matrix very ill-conditioned, so eliminate in
  // 50 significant digits to keep the relative error far below 1e-8.
  using Big = boost::multiprecision::cpp_bin_float_50;
  const int k = static_cast<int>(xs.size());
  if (k == 0) return 1.0;
  const int size = 2 * k, m = 2 * k - 1;
  auto bpow = [](const Big& x, int e) {
    Big r = 1;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
  };
  std::vector<std::vector<Big>> mat(static_cast<std::size_t>(size), std::vector<Big>(static_cast<std::size_t>(size)));
  for (int a = 0; a < k; ++a) {
    const Big x = xs[static_cast<std::size_t>(a)];
    const Big y = 1 - x;
    for (int j = 0; j < size; ++j) {
      Big value, deriv;
      if (basis == VandermondeBasis::Monomial) {
        value = bpow(x, j);
        deriv = j > 0 ? j * bpow(x, j - 1) : Big(0);
      } else {
        value = bpow(x, j) * bpow(y, m - j);
        deriv = (j > 0 ? j * bpow(x, j - 1) * bpow(y, m - j) : Big(0)) -
                (m - j > 0 ? (m - j) * bpow(x, j) * bpow(y, m - j - 1) : Big(0));
      }
      mat[static_cast<std::size_t>(2 * a)][static_cast<std::size_t>(j)] = value;
      mat[static_cast<std::size_t>(2 * a + 1)][static_cast<std::size_t>(j)] = deriv;
    }
  }
  Big det = 1;
  const auto n = static_cast<std::size_t>(size);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (abs(mat[r][c]) > abs(mat[piv][c])) piv = r;
    if (mat[piv][c] == 0) return 0.0;
    if (piv != c) {
      std::swap(mat[piv], mat[c]);
      det = -det;
    }
    det *= mat[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const Big f = mat[r][c] / mat[c][c];
      for (std::size_t j = c; j < n; ++j) mat[r][j] -= f * mat[c][j];
    }
  }
  return det.convert_to<double>();
}

LinearSystemReport analyze_system(const Eigen::MatrixXd& matrix) {
  LinearSystemReport rep;
  rep.matrix = matrix;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  const auto cols = matrix.cols();
  rep.largest_singular_value = s.size() ? s[0] : 0.0;
  rep.smallest_singular_value = s.size() ? s[s.size() - 1] : 0.0;
  const double tol = rep.largest_singular_value *
                     static_cast<double>(std::max(matrix.rows(), cols)) * 1e-12;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol) ++rep.rank;
  if (rep.rank < cols) rep.nullspace = svd.matrixV().rightCols(cols - rep.rank);
  return rep;
}

LinearSystemReport bernoulli_first_order_system(const MixingMeasure& g, int n) {
  if (n < 0) throw InvalidParameter("sequence length must be >= 0");
  for (const auto& a : g.atoms())
    if (a.size() != 1 || !(a[0] > 0.0 && a[0] < 1.0))
      throw InvalidParameter("Bernoulli atoms must be scalars in (0, 1)");
  Eigen::MatrixXd m(n + 1, static_cast<Eigen::Index>(2 * g.size()));
  for (int s = 0; s <= n; ++s)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const long double t = g.atom(i)[0];
      const auto c = static_cast<Eigen::Index>(2 * i);
      m(s, c) = static_cast<double>(ipow(t, s) * ipow(1 - t, n - s));
      m(s, c + 1) = static_cast<double>((s > 0 ? s * ipow(t, s - 1) * ipow(1 - t, n - s) : 0) -
                                        (n - s > 0 ? (n - s) * ipow(t, s) * ipow(1 - t, n - s - 1) : 0));
    }
  return analyze_system(m);
}

NonIdentWitness bernoulli_nonidentifiable_witness(const MixingMeasure& g_in, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidParameter("free parameter a must be > 0");
  if (g_in.size() < 2) throw InvalidParameter("the witness construction needs k >= 2 atoms");
  for (const auto& t : g_in.atoms())
    if (t.size() != 1 || !(t[0] > 0.0 && t[0] < 1.0))
      throw InvalidParameter("Bernoulli atoms must be scalars in (0, 1)");
  const MixingMeasure g = canonicalize(g_in);
  const int k = static_cast<int>(g.size());
  const int n = 2 * k - 2;

  // 1-based arrays as in the construction: eta[k+1..2k] from G, eta[1..k] unknown.
  std::vector<double> eta(static_cast<std::size_t>(2 * k + 1)), y(eta.size());
  for (int i = 1; i <= k; ++i) {
    const double t = g.atom(static_cast<std::size_t>(i - 1))[0];
    eta[static_cast<std::size_t>(k + i)] = t / (1.0 - t);
    y[static_cast<std::size_t>(k + i)] =
        g.weight(static_cast<std::size_t>(i - 1)) * std::pow(1.0 - t, n);
  }
  const auto E = [&](int i) { return eta[static_cast<std::size_t>(i)]; };
  const auto Y = [&](int i) { return y[static_cast<std::size_t>(i)]; };

  std::vector<double> nodes{0.0}, values{(k % 2 == 1 ? 1.0 : -1.0) * a};
  for (int i = k + 1; i <= 2 * k - 1; ++i) {
    double prod = 1.0;
    for (int l = k + 1; l <= 2 * k - 1; ++l)
      if (l != i) prod *= (E(2 * k) - E(l)) / (E(i) - E(l));
    nodes.push_back(E(i));
    values.push_back(prod / Y(i));
  }
  nodes.push_back(E(2 * k));
  values.push_back(-1.0 / Y(2 * k));
  const Barycentric poly(nodes, values);

  // roots: eta_1 in (0, eta_{k+1}), eta_i in (eta_{k+i-1}, eta_{k+i})
  for (int i = 1; i <= k; ++i) {
    const int lo_node = i - 1;  // nodes[j] = eta_{k+j}, nodes[0] = 0
    const int hi_node = i;
    eta[static_cast<std::size_t>(i)] =
        bisect_root(poly, nodes[static_cast<std::size_t>(lo_node)],
                    nodes[static_cast<std::size_t>(hi_node)],
                    values[static_cast<std::size_t>(lo_node)],
                    values[static_cast<std::size_t>(hi_node)]);
  }

  std::vector<Point> atoms;
  std::vector<double> weights;
  for (int i = 1; i <= k; ++i) {
    double prod = 1.0;
    for (int l = 1; l <= 2 * k - 1; ++l)
      if (l != i) prod *= (E(2 * k) - E(l)) / (E(i) - E(l));
    const double yi = -Y(2 * k) * prod;
    const double w = -yi * std::pow(1.0 + E(i), n);
    if (!(w > 0.0))
      throw RootBracketingFailed("construction produced a nonpositive weight");
    atoms.push_back(Point::Constant(1, E(i) / (1.0 + E(i))));
    weights.push_back(w);
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "witness weights sum to " << total << "; construction lost precision";
    throw RootBracketingFailed(msg.str());
  }

  NonIdentWitness out{g, MixingMeasure::normalized(std::move(atoms), std::move(weights)), n, a,
                      0.0, 0.0};
  for (int j = 0; j <= n; ++j) {
    long double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const long double t = g.atom(i)[0], t2 = out.witness.atom(i)[0];
      rhs += g.weight(i) * ipow(t, j) * ipow(1 - t, n - j);
      lhs += out.witness.weight(i) * ipow(t2, j) * ipow(1 - t2, n - j);
    }
    out.max_moment_mismatch =
        std::max(out.max_moment_mismatch, static_cast<double>(std::abs(lhs - rhs)));
  }
  out.tv_at_n = estimate_divergence(g, out.witness, *make_bernoulli(), n, Divergence::TV).value;
  return out;
}

GramReport first_order_gram(const Kernel& kernel, const std::vector<Param>& atoms,
                            const GridSpec& spec) {
  if (atoms.empty()) throw InvalidParameter("first_order_gram needs at least one atom");
  for (const auto& a : atoms) kernel.require_valid(a);
  const int block = kernel.dim() + 1;

  if (!spec.points.empty())
    return gram_of(function_matrix(kernel, atoms, explicit_grid(spec)), block);
  if (kernel.is_discrete()) {
    GridSpec s = spec;
    s.points = kernel.discrete_support();
    return gram_of(function_matrix(kernel, atoms, explicit_grid(s)), block);
  }
  const Support sup = joint_support(kernel, atoms, spec.tail);
  GramReport prev;
  bool have_prev = false;
  int panels = std::max(1, spec.initial_panels);
  for (int d = 0; d <= spec.max_doublings; ++d, panels *= 2) {
    const Grid g = gauss_legendre_grid(sup.lo, sup.hi, sup.breaks, panels);
    EvaluatedGrid eg{g.nodes, g.weights, panels};
    GramReport rep = gram_of(function_matrix(kernel, atoms, eg), block);
    rep.panels = panels;
    if (have_prev) {
      const double change = std::abs(rep.min_eigenvalue - prev.min_eigenvalue);
      const double floor = 1e-8 * rep.max_eigenvalue;
      if (change < 0.01 * std::max(std::abs(rep.min_eigenvalue), floor)) return rep;
    }
    prev = rep;
    have_prev = true;
  }
  return prev;
}

GramReport bernoulli_product_gram(const std::vector<Param>& atoms, int n) {
  for (const auto& a : atoms)
    if (a.size() != 1 || !(a[0] > 0.0 && a[0] < 1.0))
      throw InvalidParameter("Bernoulli atoms must be scalars in (0, 1)");
  if (n < 1) throw InvalidParameter("sequence length must be >= 1");
  return gram_of(bernoulli_product_matrix(atoms, n), 2);
}

void require_admissible_direction(const MixingMeasure& g0, const Direction& dir) {
  if (dir.a.size() != g0.size() || dir.b.size() != g0.size())
    throw InvalidParameter("direction must have one (a_i, b_i) per atom");
  double norm = 0.0, sum_b = 0.0;
  for (std::size_t i = 0; i < g0.size(); ++i) {
    if (dir.a[i].size() != g0.dim())
      throw InvalidParameter("direction a_i has the wrong dimension");
    norm += dir.a[i].norm() + std::abs(dir.b[i]);
    sum_b += dir.b[i];
  }
  if (!(norm > 0.0)) throw InvalidParameter("direction must be nonzero");
  if (std::abs(sum_b) > 1e-12) throw InvalidParameter("direction must satisfy sum_i b_i = 0");
}

double degenerate_direction_check(const Kernel& kernel, const MixingMeasure& g0,
                                  const Direction& dir, const GridSpec& spec) {
  require_admissible_direction(g0, dir);
  require_atoms_valid(g0, kernel);
  EvaluatedGrid grid;
  if (!spec.points.empty()) {
    grid = explicit_grid(spec);
  } else if (kernel.is_discrete()) {
    grid.nodes = kernel.discrete_support();
  } else {
    const Support sup = joint_support(kernel, g0.atoms(), spec.tail);
    grid.nodes = gauss_legendre_grid(sup.lo, sup.hi, sup.breaks, 64).nodes;
  }
  double worst = 0.0, scale = 0.0;
  for (double x : grid.nodes) {
    double combo = 0.0, dens = 0.0;
    for (std::size_t i = 0; i < g0.size(); ++i) {
      const double f = kernel.density(x, g0.atom(i));
      combo += dir.a[i].dot(kernel.grad_density(x, g0.atom(i))) + dir.b[i] * f;
      dens += f;
    }
    worst = std::max(worst, std::abs(combo));
    scale = std::max(scale, dens);
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace mixlab
