#include "mixlab/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "mixlab/errors.hpp"
#include "mixlab/parallel.hpp"

namespace mixlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

double log_prior(const MixingMeasure& g, const PriorSpec& prior) {
  for (const auto& a : g.atoms())
    if (!prior.contains(a)) return kNegInf;
  const double k = static_cast<double>(g.size());
  return std::lgamma(k) - k * prior.log_volume();
}

// Per-sequence log likelihood under G. Bernoulli data collapse to
// (N_i, S_i) counts so repeated patterns are evaluated once.
class Likelihood {
 public:
  Likelihood(const ExchangeableDataset& data, const Kernel& kernel) : data_(data), kernel_(kernel) {
    bernoulli_ = kernel.family() == "bernoulli";
    if (bernoulli_) {
      std::map<std::pair<int, int>, double> groups;
      for (const auto& seq : data.sequences) {
        int s = 0;
        for (double x : seq) {
          if (x != 0.0 && x != 1.0) throw InvalidParameter("Bernoulli data must be 0 or 1");
          s += x == 1.0;
        }
        groups[{static_cast<int>(seq.size()), s}] += 1.0;
      }
      for (const auto& [key, count] : groups) groups_.push_back({key.first, key.second, count});
    }
  }

  double operator()(const MixingMeasure& g) const {
    for (const auto& a : g.atoms())
      if (!kernel_.valid(a)) return kNegInf;
    std::vector<double> terms(g.size());
    double total = 0.0;
    if (bernoulli_) {
      for (const auto& grp : groups_) {
        for (std::size_t j = 0; j < g.size(); ++j) {
          const double t = g.atom(j)[0];
          terms[j] = std::log(g.weight(j)) + grp.s * std::log(t) + (grp.n - grp.s) * std::log1p(-t);
        }
        total += grp.count * log_sum_exp(terms);
      }
      return total;
    }
    for (const auto& seq : data_.sequences) {
      for (std::size_t j = 0; j < g.size(); ++j) {
        double l = std::log(g.weight(j));
        for (double x : seq) l += kernel_.log_density(x, g.atom(j));
        terms[j] = l;
      }
      total += log_sum_exp(terms);
    }
    return total;
  }

 private:
  struct Group {
    int n, s;
    double count;
  };
  const ExchangeableDataset& data_;
  const Kernel& kernel_;
  bool bernoulli_ = false;
  std::vector<Group> groups_;
};

double reflect(double x, double lo, double hi) {
  const double w = hi - lo;
  double y = std::fmod(x - lo, 2.0 * w);
  if (y < 0.0) y += 2.0 * w;
  if (y > w) y = 2.0 * w - y;
  return lo + y;
}

double quantile(std::vector<double> v, double level) {
  std::sort(v.begin(), v.end());
  const double pos = level * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(i);
  return v[i] + frac * (v[i + 1] - v[i]);
}

double median(const std::vector<double>& v) { return quantile(v, 0.5); }

}  // namespace

void PriorSpec::validate(const Kernel& kernel) const {
  const auto d = static_cast<Eigen::Index>(kernel.dim());
  if (lower.size() != d || upper.size() != d)
    throw InvalidParameter("prior box dimension does not match the kernel");
  const Eigen::VectorXd klo = kernel.box_lower(), khi = kernel.box_upper();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))
      throw InvalidParameter("prior box bounds must be finite");
    if (!(lower[j] < upper[j])) throw InvalidParameter("prior box needs lower < upper");
    if (lower[j] < klo[j] || upper[j] > khi[j])
      throw InvalidParameter("prior box must lie inside the kernel box " + kernel.box_description());
  }
}

bool PriorSpec::contains(const Point& theta) const {
  if (theta.size() != lower.size()) return false;
  for (Eigen::Index j = 0; j < theta.size(); ++j)
    if (!(theta[j] >= lower[j] && theta[j] <= upper[j])) return false;
  return true;
}

double PriorSpec::log_volume() const { return (upper - lower).array().log().sum(); }

double log_posterior_unnorm(const MixingMeasure& g, const ExchangeableDataset& data,
                            const Kernel& kernel, const PriorSpec& prior) {
  const double lp = log_prior(g, prior);
  if (!std::isfinite(lp)) return kNegInf;
  return lp + Likelihood(data, kernel)(g);
}

MixingMeasure prior_sample(const PriorSpec& prior, std::size_t k0, Rng& rng) {
  if (k0 == 0) throw InvalidParameter("k0 must be >= 1");
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<Point> atoms;
    std::vector<double> weights;
    for (std::size_t i = 0; i < k0; ++i) {
      Point t(prior.lower.size());
      for (Eigen::Index j = 0; j < t.size(); ++j)
        t[j] = prior.lower[j] + unif(rng) * (prior.upper[j] - prior.lower[j]);
      atoms.push_back(std::move(t));
      weights.push_back(k0 == 1 ? 1.0 : expo(rng));
    }
    try {
      return MixingMeasure::normalized(std::move(atoms), std::move(weights));
    } catch (const InvalidMeasure&) {
      // coinciding atoms; draw again
    }
  }
  throw InvalidParameter("prior sampling keeps producing coinciding atoms");
}

Chain mcmc_run(const ExchangeableDataset& data, const Kernel& kernel, const PriorSpec& prior,
               std::size_t k0, const McmcConfig& config, std::uint64_t seed) {
  if (data.m() == 0) throw InvalidParameter("mcmc_run needs a nonempty dataset");
  if (config.iterations == 0) throw InvalidParameter("chain length must be > 0");
  if (!(config.burn_in_fraction >= 0.0 && config.burn_in_fraction < 1.0))
    throw InvalidParameter("burn-in fraction must lie in [0, 1)");
  if (!(config.initial_scale > 0.0)) throw InvalidParameter("initial proposal scale must be > 0");
  prior.validate(kernel);

  Rng rng = make_rng(seed, "mcmc");
  const Likelihood loglik(data, kernel);
  const auto q = prior.lower.size();
  const Eigen::VectorXd width = prior.upper - prior.lower;

  MixingMeasure current = prior_sample(prior, k0, rng);
  auto target = [&](const MixingMeasure& g) {
    const double lp = log_prior(g, prior);
    if (!std::isfinite(lp)) return kNegInf;
    double jac = 0.0;
    for (double p : g.weights()) jac += std::log(p);
    return lp + loglik(g) + jac;
  };
  double current_lp = target(current);

  Chain chain;
  chain.seed = seed;
  chain.burn_in = static_cast<std::size_t>(config.burn_in_fraction *
                                           static_cast<double>(config.iterations));
  double log_scale = std::log(config.initial_scale);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t accepted_after = 0, rejected_run = 0;

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const double scale = std::exp(log_scale);
    std::vector<Point> atoms = current.atoms();
    for (auto& a : atoms)
      for (Eigen::Index j = 0; j < q; ++j)
        a[j] = reflect(a[j] + scale * width[j] * normal(rng), prior.lower[j], prior.upper[j]);
    std::vector<double> weights(k0, 1.0);
    if (k0 > 1) {
      const double ref = std::log(current.weight(k0 - 1));
      std::vector<double> z(k0, 0.0);
      for (std::size_t i = 0; i + 1 < k0; ++i)
        z[i] = std::log(current.weight(i)) - ref + scale * normal(rng);
      const double mx = std::max(0.0, *std::max_element(z.begin(), z.end()));
      for (std::size_t i = 0; i < k0; ++i) weights[i] = std::exp(z[i] - mx);
    }

    double proposal_lp = kNegInf;
    std::optional<MixingMeasure> proposal;
    try {
      proposal.emplace(MixingMeasure::normalized(std::move(atoms), std::move(weights)));
      proposal_lp = target(*proposal);
    } catch (const InvalidMeasure&) {
      // coinciding atoms or a weight underflow: reject
    }
    const bool accept = std::isfinite(proposal_lp) &&
                        std::log(unif(rng)) < proposal_lp - current_lp;
    if (accept) {
      current = *proposal;
      current_lp = proposal_lp;
      rejected_run = 0;
    } else if (++rejected_run >= config.reject_window) {
      std::ostringstream msg;
      msg << rejected_run << " consecutive proposals rejected at iteration " << it;
      throw AllProposalsRejected(msg.str());
    }

    if (it < chain.burn_in) {
      const double rate = 1.0 / std::sqrt(static_cast<double>(it) + 1.0);
      log_scale += rate * ((accept ? 1.0 : 0.0) - config.target_acceptance);
      log_scale = std::clamp(log_scale, std::log(1e-6), std::log(10.0));
      chain.scale_trace.push_back(std::exp(log_scale));
    } else {
      accepted_after += accept;
      chain.draws.push_back(canonicalize(current));
    }
  }
  chain.acceptance_rate = chain.draws.empty()
                              ? 0.0
                              : static_cast<double>(accepted_after) /
                                    static_cast<double>(chain.draws.size());
  return chain;
}

double batch_means_stderr(const std::vector<double>& series, std::size_t batches) {
  if (series.size() < 2 * batches || batches < 2)
    throw InvalidParameter("series too short for batch means");
  const std::size_t len = series.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b)
    means[b] = std::accumulate(series.begin() + static_cast<std::ptrdiff_t>(b * len),
                               series.begin() + static_cast<std::ptrdiff_t>((b + 1) * len), 0.0) /
               static_cast<double>(len);
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(batches - 1);
  return std::sqrt(var / static_cast<double>(batches));
}

std::vector<ErrorQuantiles> posterior_error_summary(const Chain& chain, const MixingMeasure& g0,
                                                    double n_bar) {
  if (chain.draws.empty()) throw InvalidParameter("chain has no draws");
  std::vector<double> dn, dt, dp;
  for (const auto& g : chain.draws) {
    dn.push_back(distance_DN(g, g0, n_bar));
    const auto aw = atom_and_weight_distances(g, g0);
    dt.push_back(aw.atoms);
    dp.push_back(aw.weights);
  }
  std::vector<ErrorQuantiles> out;
  for (double level : {0.5, 0.9, 0.95})
    out.push_back({level, quantile(dn, level), quantile(dt, level), quantile(dp, level)});
  return out;
}

std::vector<int> LengthLaw::draw(std::size_t m, Rng& rng) const {
  if (lo < 1 || hi < lo) throw InvalidParameter("length law needs 1 <= lo <= hi");
  std::vector<int> out(m, lo);
  if (hi > lo) {
    std::uniform_int_distribution<int> u(lo, hi);
    for (auto& n : out) n = u(rng);
  }
  return out;
}

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw LengthMismatch("slope fit needs equal-length x and y");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (x.size() < 3 || !(sxx > 1e-14 * std::max(1.0, mx * mx)))
    throw InvalidParameter("slope undefined: need at least two distinct x values and three points");
  SlopeFit f;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(0.0, syy - f.slope * sxy);
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  const double se = std::sqrt(sse / (n - 2.0) / sxx);
  const double t = boost::math::quantile(boost::math::students_t(n - 2.0), 0.975);
  f.ci_low = f.slope - t * se;
  f.ci_high = f.slope + t * se;
  return f;
}

ContractionReport contraction_experiment(const Kernel& kernel, const MixingMeasure& g0,
                                         const std::vector<std::size_t>& m_grid,
                                         const LengthLaw& lengths, std::size_t replicates,
                                         const ContractionConfig& config, std::uint64_t seed) {
  std::vector<std::size_t> distinct = m_grid;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw InvalidParameter("slope undefined: m grid needs two distinct values");
  if (replicates == 0) throw InvalidParameter("replicates must be >= 1");
  for (auto m : m_grid)
    if (m == 0) throw InvalidParameter("m must be >= 1");
  require_atoms_valid(g0, kernel);
  config.prior.validate(kernel);
  int min_len = config.identifiable_length;
  if (min_len == 0) {
    if (kernel.family() == "bernoulli")
      min_len = 2 * static_cast<int>(g0.size()) - 1;
    else if (kernel.family() == "gamma")
      min_len = 2;
    else
      min_len = 1;
  }
  if (lengths.lo < min_len) {
    std::ostringstream msg;
    msg << "minimum sequence length " << lengths.lo << " is below the identifiable length "
        << min_len;
    throw InvalidParameter(msg.str());
  }

  const std::size_t cells = m_grid.size() * replicates;
  ContractionReport rep;
  rep.rows.resize(cells);
  parallel_for(cells, config.workers, [&](std::size_t c) {
    const std::size_t m = m_grid[c / replicates], r = c % replicates;
    const auto cell_seed =
        derive_seed(seed, "m-" + std::to_string(m) + "-rep-" + std::to_string(r));
    Rng len_rng = make_rng(cell_seed, "lengths");
    const auto ns = lengths.draw(m, len_rng);
    const auto data = sample_dataset(g0, kernel, ns, derive_seed(cell_seed, "data"));
    const auto chain = mcmc_run(data, kernel, config.prior, g0.size(), config.mcmc,
                                derive_seed(cell_seed, "chain"));
    std::vector<double> dn, dt, dp;
    for (const auto& g : chain.draws) {
      dn.push_back(distance_DN(g, g0, data.mean_length()));
      const auto aw = atom_and_weight_distances(g, g0);
      dt.push_back(aw.atoms);
      dp.push_back(aw.weights);
    }
    ContractionRow row;
    row.m = m;
    row.replicate = r;
    row.mean_length = data.mean_length();
    row.total_length = static_cast<double>(data.total_length());
    row.median_d_n = median(dn);
    row.median_d_theta = median(dt);
    row.median_d_p = median(dp);
    row.acceptance = chain.acceptance_rate;
    rep.rows[c] = row;
  });

  std::vector<double> lm, lt, ldp, ldt;
  for (const auto& row : rep.rows) {
    if (!(row.median_d_p > 0.0) || !(row.median_d_theta > 0.0))
      throw InvalidParameter("zero median error; log-slope undefined");
    lm.push_back(std::log(static_cast<double>(row.m)));
    lt.push_back(std::log(row.total_length));
    ldp.push_back(std::log(row.median_d_p));
    ldt.push_back(std::log(row.median_d_theta));
  }
  rep.d_p_vs_m = fit_slope(lm, ldp);
  rep.d_theta_vs_total = fit_slope(lt, ldt);
  return rep;
}

}  // namespace mixlab
