#include "mixlab/products.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "mixlab/errors.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/quadrature.hpp"

namespace mixlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kBruteForceLimit = 7;
constexpr double kTail = 1e-13;

double log_sum_exp(const std::vector<double>& xs) {
  double m = -kInf;
  for (double x : xs) m = std::max(m, x);
  if (m == -kInf) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double lchoose(int n, int r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

void require_same_kernel_space(const MixingMeasure& g, const MixingMeasure& g2,
                               const Kernel& kernel) {
  require_atoms_valid(g, kernel);
  require_atoms_valid(g2, kernel);
}

// min over permutations of F(max pairwise atom term, sum of weight gaps)
template <class Combine>
double permutation_bound(const MixingMeasure& g, const MixingMeasure& g2,
                         const Eigen::MatrixXd& atom_term, Combine&& combine) {
  if (g.size() != g2.size()) throw MismatchedSupportSize("support sizes differ");
  const std::size_t k = g.size();
  if (k > kBruteForceLimit)
    throw BudgetExceeded("upper-bound permutation search is exact only for k <= 7");
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInf;
  do {
    double worst = 0.0, dp = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = static_cast<std::size_t>(perm[i]);
      worst = std::max(worst, atom_term(static_cast<Eigen::Index>(i), perm[i]));
      dp += std::abs(g.weight(i) - g2.weight(j));
    }
    best = std::min(best, combine(worst, dp));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Eigen::MatrixXd pairwise(const MixingMeasure& g, const MixingMeasure& g2, const Kernel& kernel,
                         bool tv) {
  const auto k = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd m(k, static_cast<Eigen::Index>(g2.size()));
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto& a = g.atom(static_cast<std::size_t>(i));
      const auto& b = g2.atom(static_cast<std::size_t>(j));
      m(i, j) = tv ? divergence_numeric(kernel, a, b, Divergence::TV).value
                   : kernel_hellinger(kernel, a, b);
    }
  return m;
}

// log p_{G,N}(x) for a product mixture given per-atom log densities
double mixture_log_density(const MixingMeasure& g, const Kernel& kernel, const double* xs, int n) {
  std::vector<double> terms(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = std::log(g.weight(i));
    for (int j = 0; j < n && s > -kInf; ++j) s += kernel.log_density(xs[j], g.atom(i));
    terms[i] = s;
  }
  return log_sum_exp(terms);
}

DivergenceEstimate exact_bernoulli(const MixingMeasure& g, const MixingMeasure& g2, int n,
                                   Divergence which) {
  const auto lp = bernoulli_count_log_pmf(g, n), lq = bernoulli_count_log_pmf(g2, n);
  double total = 0.0;
  for (int s = 0; s <= n; ++s) {
    const double a = std::exp(lp[s]), b = std::exp(lq[s]);
    if (which == Divergence::TV) {
      total += 0.5 * std::abs(a - b);
    } else {
      const double d = std::exp(0.5 * lp[s]) - std::exp(0.5 * lq[s]);
      total += 0.5 * d * d;
    }
  }
  DivergenceEstimate out;
  out.method = DivergenceMethod::ExactEnumeration;
  out.value = which == Divergence::TV ? std::clamp(total, 0.0, 1.0)
                                      : std::sqrt(std::clamp(total, 0.0, 1.0));
  out.samples = static_cast<std::size_t>(n) + 1;
  return out;
}

struct Domain {
  double lo = kInf, hi = -kInf;
  std::vector<double> breaks;
};

Domain joint_domain(const MixingMeasure& g, const MixingMeasure& g2, const Kernel& kernel) {
  Domain d;
  for (const auto* m : {&g, &g2})
    for (const auto& a : m->atoms()) {
      const auto s = kernel.effective_support(a, kTail / static_cast<double>(g.size() + g2.size()));
      d.lo = std::min(d.lo, s.first);
      d.hi = std::max(d.hi, s.second);
      d.breaks.push_back(s.first);
      d.breaks.push_back(s.second);
      for (double b : kernel.breakpoints(a)) d.breaks.push_back(b);
    }
  return d;
}

double integrand_value(double lp, double lq, Divergence which) {
  if (which == Divergence::TV) return 0.5 * std::abs(std::exp(lp) - std::exp(lq));
  const double d = std::exp(0.5 * lp) - std::exp(0.5 * lq);
  return 0.5 * d * d;
}

DivergenceEstimate quadrature_product(const MixingMeasure& g, const MixingMeasure& g2,
                                      const Kernel& kernel, int n, Divergence which) {
  const Domain dom = joint_domain(g, g2, kernel);
  QuadratureResult q;
  if (n == 1) {
    q = integrate_1d(
        [&](double x) {
          return integrand_value(mixture_log_density(g, kernel, &x, 1),
                                 mixture_log_density(g2, kernel, &x, 1), which);
        },
        dom.lo, dom.hi, dom.breaks, 1e-12, 20000);
  } else {
    q = integrate_2d(
        [&](double x, double y) {
          const double xs[2] = {x, y};
          return integrand_value(mixture_log_density(g, kernel, xs, 2),
                                 mixture_log_density(g2, kernel, xs, 2), which);
        },
        dom.lo, dom.hi, dom.breaks, 1e-10);
  }
  if (!(q.error <= 1e-8)) {
    std::ostringstream msg;
    msg << "product quadrature error estimate " << q.error << " exceeds 1e-8";
    throw QuadratureNonConvergence(msg.str());
  }
  DivergenceEstimate out;
  out.method = DivergenceMethod::Quadrature;
  const double v = std::clamp(q.value, 0.0, 1.0);
  if (which == Divergence::TV) {
    out.value = v;
    out.std_error = q.error;
  } else {
    out.value = std::sqrt(v);
    out.std_error = out.value > 0.0 ? q.error / (2.0 * out.value) : std::sqrt(q.error);
  }
  return out;
}

struct Moments {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
};

DivergenceEstimate monte_carlo(const MixingMeasure& g, const MixingMeasure& g2,
                               const Kernel& kernel, int n, Divergence which, const Budget& b) {
  if (b.mc_draws == 0) throw BudgetExceeded("Monte Carlo needed but the draw budget is zero");
  if (b.mc_draws > b.max_draws) throw BudgetExceeded("requested draws exceed the hard cap");
  const std::size_t chunk = std::max<std::size_t>(1, b.chunk);
  const std::size_t chunks = (b.mc_draws + chunk - 1) / chunk;
  std::vector<Moments> parts(chunks);
  auto cumulative = [](const MixingMeasure& m) {
    std::vector<double> c(m.size());
    std::partial_sum(m.weights().begin(), m.weights().end(), c.begin());
    return c;
  };
  const auto cg = cumulative(g), cg2 = cumulative(g2);
  parallel_for(chunks, b.workers, [&](std::size_t c) {
    Rng rng = make_rng(b.seed, "mc-chunk-" + std::to_string(c));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t count = std::min(chunk, b.mc_draws - c * chunk);
    std::vector<double> xs(static_cast<std::size_t>(n));
    Moments m;
    for (std::size_t t = 0; t < count; ++t) {
      const bool from_first = unif(rng) < 0.5;
      const auto& src = from_first ? g : g2;
      const auto& cum = from_first ? cg : cg2;
      const double u = unif(rng) * cum.back();
      const auto i = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(),
                                   static_cast<std::ptrdiff_t>(src.size()) - 1));
      for (auto& x : xs) x = kernel.draw(src.atom(i), rng);
      const double d = mixture_log_density(g, kernel, xs.data(), n) -
                       mixture_log_density(g2, kernel, xs.data(), n);
      double v;
      if (std::isinf(d))
        v = 1.0;
      else
        v = which == Divergence::TV ? std::abs(std::tanh(0.5 * d)) : 1.0 - 1.0 / std::cosh(0.5 * d);
      m.sum += v;
      m.sum_sq += v * v;
      ++m.count;
    }
    parts[c] = m;
  });
  Moments all;
  for (const auto& p : parts) {
    all.sum += p.sum;
    all.sum_sq += p.sum_sq;
    all.count += p.count;
  }
  const double cnt = static_cast<double>(all.count);
  const double mean = all.sum / cnt;
  const double var = std::max(0.0, (all.sum_sq - cnt * mean * mean) / std::max(1.0, cnt - 1.0));
  const double se = std::sqrt(var / cnt);
  DivergenceEstimate out;
  out.method = DivergenceMethod::MonteCarlo;
  out.samples = all.count;
  if (which == Divergence::TV) {
    out.value = mean;
    out.std_error = se;
  } else {
    out.value = std::sqrt(std::max(0.0, mean));
    out.std_error = out.value > 0.0 ? se / (2.0 * out.value) : std::sqrt(se);
  }
  return out;
}

}  // namespace

// -------------------------------------------------------------------------

ProductMixtureModel::ProductMixtureModel(MixingMeasure m, KernelPtr k, int n_)
    : measure(std::move(m)), kernel(std::move(k)), n(n_) {
  if (!kernel) throw InvalidParameter("product mixture needs a kernel");
  if (n < 1) throw InvalidParameter("product length N must be >= 1");
  require_atoms_valid(measure, *kernel);
}

std::vector<int> ExchangeableDataset::lengths() const {
  std::vector<int> out;
  for (const auto& s : sequences) out.push_back(static_cast<int>(s.size()));
  return out;
}

std::size_t ExchangeableDataset::total_length() const {
  std::size_t t = 0;
  for (const auto& s : sequences) t += s.size();
  return t;
}

double ExchangeableDataset::mean_length() const {
  return m() == 0 ? 0.0 : static_cast<double>(total_length()) / static_cast<double>(m());
}

void require_atoms_valid(const MixingMeasure& g, const Kernel& kernel) {
  for (const auto& a : g.atoms()) kernel.require_valid(a);
}

double log_density_product(const ProductMixtureModel& model, const std::vector<double>& xs) {
  if (static_cast<int>(xs.size()) != model.n) {
    std::ostringstream msg;
    msg << "sequence has length " << xs.size() << " but the model has N = " << model.n;
    throw LengthMismatch(msg.str());
  }
  return mixture_log_density(model.measure, *model.kernel, xs.data(), model.n);
}

ExchangeableDataset sample_dataset(const std::vector<Param>& atoms,
                                   const std::vector<double>& weights, const Kernel& kernel,
                                   const std::vector<int>& lengths, std::uint64_t seed) {
  if (atoms.empty() || atoms.size() != weights.size())
    throw InvalidParameter("atoms and weights must be nonempty and of equal length");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    kernel.require_valid(atoms[i]);
    if (!(weights[i] >= 0.0)) throw InvalidParameter("weights must be nonnegative");
    total += weights[i];
  }
  if (!(total > 0.0)) throw InvalidParameter("weights must not all be zero");
  for (int len : lengths)
    if (len < 1) throw InvalidParameter("every sequence length must be >= 1");
  std::vector<double> cum(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cum.begin());
  ExchangeableDataset out;
  out.seed = seed;
  Rng rng = make_rng(seed, "dataset");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int len : lengths) {
    const double u = unif(rng) * total;
    std::size_t i = 0;
    // first index whose cumulative weight exceeds u, which skips zero weights
    while (i + 1 < cum.size() && !(u < cum[i])) ++i;
    std::vector<double> seq(static_cast<std::size_t>(len));
    for (auto& x : seq) x = kernel.draw(atoms[i], rng);
    out.sequences.push_back(std::move(seq));
  }
  return out;
}

ExchangeableDataset sample_dataset(const MixingMeasure& g, const Kernel& kernel,
                                   const std::vector<int>& lengths, std::uint64_t seed) {
  return sample_dataset(g.atoms(), g.weights(), kernel, lengths, seed);
}

double kernel_hellinger(const Kernel& kernel, const Param& a, const Param& b) {
  if (const auto* spec = kernel.exp_family()) return hellinger_expfam(*spec, a, b);
  return divergence_numeric(kernel, a, b, Divergence::Hellinger).value;
}

double hellinger_upper_bound(const MixingMeasure& g, const MixingMeasure& g2, const Kernel& kernel,
                             int n) {
  if (g.size() != g2.size()) throw MismatchedSupportSize("support sizes differ");
  if (n < 1) throw InvalidParameter("N must be >= 1");
  require_same_kernel_space(g, g2, kernel);
  const double root_n = std::sqrt(static_cast<double>(n));
  return permutation_bound(g, g2, pairwise(g, g2, kernel, false),
                           [&](double h, double dp) { return root_n * h + std::sqrt(0.5 * dp); });
}

double tv_upper_bound(const MixingMeasure& g, const MixingMeasure& g2, const Kernel& kernel, int n) {
  if (g.size() != g2.size()) throw MismatchedSupportSize("support sizes differ");
  if (n < 1) throw InvalidParameter("N must be >= 1");
  require_same_kernel_space(g, g2, kernel);
  const double root_n = std::sqrt(static_cast<double>(n));
  if (n == 1)
    return permutation_bound(g, g2, pairwise(g, g2, kernel, true),
                             [](double v, double dp) { return v + 0.5 * dp; });
  // sqrt(N) times the unnormalized Hellinger distance sqrt(2) h; with the
  // normalized h alone the bound fails (single Bernoulli atom 0.5 vs 0.55, N = 4).
  return permutation_bound(g, g2, pairwise(g, g2, kernel, false), [&](double h, double dp) {
    return std::sqrt(2.0) * root_n * h + 0.5 * dp;
  });
}

std::string to_string(DivergenceMethod m) {
  switch (m) {
    case DivergenceMethod::ExactEnumeration:
      return "exact-enumeration";
    case DivergenceMethod::Quadrature:
      return "quadrature";
    case DivergenceMethod::MonteCarlo:
      return "monte-carlo";
  }
  return "unknown";
}

std::vector<double> bernoulli_count_log_pmf(const MixingMeasure& g, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  std::vector<double> terms(g.size());
  for (int s = 0; s <= n; ++s) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = g.atom(i)[0];
      terms[i] = std::log(g.weight(i)) + s * std::log(t) + (n - s) * std::log1p(-t);
    }
    out[static_cast<std::size_t>(s)] = lchoose(n, s) + log_sum_exp(terms);
  }
  return out;
}

DivergenceEstimate estimate_divergence(const MixingMeasure& g, const MixingMeasure& g2,
                                       const Kernel& kernel, int n, Divergence which,
                                       const Budget& budget) {
  if (which == Divergence::KL) throw InvalidParameter("product divergences support TV and Hellinger");
  if (n < 1) throw InvalidParameter("N must be >= 1");
  require_same_kernel_space(g, g2, kernel);
  if (kernel.family() == "bernoulli") return exact_bernoulli(g, g2, n, which);
  if (!kernel.is_discrete() && n <= 2) return quadrature_product(g, g2, kernel, n, which);
  return monte_carlo(g, g2, kernel, n, which, budget);
}

DivergenceEstimate d_mh(const MixingMeasure& g, const MixingMeasure& g0, const Kernel& kernel,
                        const std::vector<int>& lengths, const Budget& budget) {
  if (lengths.empty()) throw InvalidParameter("d_mh needs at least one sequence length");
  std::vector<int> distinct = lengths;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<DivergenceEstimate> per(distinct.size());
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    Budget b = budget;
    b.seed = derive_seed(budget.seed, "d_mh-N-" + std::to_string(distinct[i]));
    per[i] = estimate_divergence(g, g0, kernel, distinct[i], Divergence::Hellinger, b);
  }
  double sum_sq = 0.0, var = 0.0;
  DivergenceEstimate out;
  out.method = DivergenceMethod::ExactEnumeration;
  for (int len : lengths) {
    const auto idx = static_cast<std::size_t>(
        std::lower_bound(distinct.begin(), distinct.end(), len) - distinct.begin());
    const auto& e = per[idx];
    sum_sq += e.value * e.value;
    // delta method on h^2 = value^2
    var += std::pow(2.0 * e.value * e.std_error, 2);
    out.samples += e.samples;
    if (e.method != DivergenceMethod::ExactEnumeration) out.method = e.method;
  }
  const double m = static_cast<double>(lengths.size());
  out.value = std::sqrt(sum_sq / m);
  const double se_sq = std::sqrt(var) / m;
  out.std_error = out.value > 0.0 ? se_sq / (2.0 * out.value) : std::sqrt(se_sq);
  return out;
}

}  // namespace mixlab
