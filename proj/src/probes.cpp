#include "mixlab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixlab/errors.hpp"
#include "mixlab/parallel.hpp"

namespace mixlab {

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

std::string describe(const MixingMeasure& g) {
  std::ostringstream s;
  s.precision(17);
  s << "[";
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) s << ", ";
    s << "{theta: (";
    for (Eigen::Index j = 0; j < g.atom(i).size(); ++j) s << (j ? ", " : "") << g.atom(i)[j];
    s << "), p: " << g.weight(i) << "}";
  }
  s << "]";
  return s.str();
}

std::string describe(const Direction& d) {
  std::ostringstream s;
  s.precision(17);
  s << "[";
  for (std::size_t i = 0; i < d.a.size(); ++i) {
    if (i) s << ", ";
    s << "{a: (";
    for (Eigen::Index j = 0; j < d.a[i].size(); ++j) s << (j ? ", " : "") << d.a[i][j];
    s << "), b: " << d.b[i] << "}";
  }
  s << "]";
  return s.str();
}

std::string divergence_name(Divergence d) {
  switch (d) {
    case Divergence::TV: return "tv";
    case Divergence::Hellinger: return "hellinger";
    case Divergence::KL: return "kl";
  }
  return "?";
}

void require_grid(const std::vector<double>& l_grid) {
  if (l_grid.empty()) throw InvalidParameter("l grid must be nonempty");
  for (double l : l_grid)
    if (!(l > 0.0) || !std::isfinite(l)) throw InvalidParameter("l grid values must be > 0");
  if (!std::is_sorted(l_grid.begin(), l_grid.end()))
    throw InvalidParameter("l grid must be increasing");
}

// Numerator of one cell with the Monte Carlo variance guard.
DivergenceEstimate cell_numerator(const MixingMeasure& g, const MixingMeasure& g0,
                                  const Kernel& kernel, int n, Divergence which,
                                  double denominator, const ProbeOptions& opt,
                                  std::uint64_t seed) {
  Budget b = opt.budget;
  b.seed = seed;
  b.workers = 1;
  const bool mc = kernel.family() != "bernoulli" && (kernel.is_discrete() || n > 2);
  if (mc && b.mc_draws > b.chunk) {
    Budget pilot = b;
    pilot.mc_draws = b.chunk;
    pilot.seed = derive_seed(seed, "pilot");
    const auto p = estimate_divergence(g, g0, kernel, n, which, pilot);
    const double predicted_se =
        p.std_error * std::sqrt(static_cast<double>(pilot.mc_draws) / static_cast<double>(b.mc_draws));
    if (!(predicted_se < opt.variance_guard * p.value)) {
      std::ostringstream msg;
      msg << "variance guard: predicted stderr " << predicted_se / denominator
          << " exceeds " << opt.variance_guard << " of the predicted ratio "
          << p.value / denominator;
      throw BudgetExceeded(msg.str());
    }
  }
  return estimate_divergence(g, g0, kernel, n, which, b);
}

ProbeRow make_row(std::string series, double index, const DivergenceEstimate& e, double den) {
  if (!(den > 0.0)) throw InvalidParameter("probe denominator must be strictly positive");
  ProbeRow r;
  r.series = std::move(series);
  r.index = index;
  r.numerator = e.value;
  r.std_error = e.method == DivergenceMethod::ExactEnumeration ? 0.0 : e.std_error;
  r.denominator = den;
  r.ratio = e.value / den;
  r.method = to_string(e.method);
  return r;
}

void add_verdict(ProbeReport& rep, const std::string& series, const VerdictThresholds& t) {
  rep.verdicts.push_back(classify_series(series, rep.series(series), t));
}

// Largest suffix of the grid on which the denominator equals 1/l.
void record_l0(ProbeReport& rep, const std::vector<ProbeRow>& rows) {
  std::size_t first = rows.size();
  for (std::size_t i = rows.size(); i-- > 0;) {
    if (std::abs(rows[i].denominator - 1.0 / rows[i].index) > 1e-12) break;
    first = i;
  }
  if (first == rows.size()) {
    rep.parameters.emplace_back("l0", "none");
    rep.flags.push_back("D_1(G_l, G0) = 1/l does not hold on the grid");
  } else {
    rep.parameters.emplace_back("l0", fmt(rows[first].index));
  }
}

}  // namespace

std::vector<ProbeRow> ProbeReport::series(const std::string& name) const {
  std::vector<ProbeRow> out;
  for (const auto& r : rows)
    if (r.series == name) out.push_back(r);
  return out;
}

const SeriesVerdict& ProbeReport::verdict(const std::string& name) const {
  for (const auto& v : verdicts)
    if (v.series == name) return v;
  throw InvalidParameter("no verdict for series '" + name + "'");
}

SeriesVerdict classify_series(const std::string& name, const std::vector<ProbeRow>& rows,
                              const VerdictThresholds& t) {
  SeriesVerdict v;
  v.series = name;
  v.label = "inconclusive";
  if (rows.size() < 2) return v;
  auto se = [](const ProbeRow& r) { return r.std_error / r.denominator; };
  const auto& first = rows.front();
  const auto& last = rows.back();
  const double combined = std::hypot(se(first), se(last));
  v.vanishing = first.ratio > 0.0 && last.ratio < t.decay * first.ratio &&
                first.ratio - last.ratio > t.sigmas * combined;

  std::vector<double> ratios;
  double worst_se = 0.0;
  for (const auto& r : rows) {
    ratios.push_back(r.ratio);
    worst_se = std::max(worst_se, se(r));
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  const double median =
      sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  bool in_band = median > t.sigmas * worst_se && median > 0.0;
  for (double r : ratios) in_band = in_band && r >= t.band_low * median && r <= t.band_high * median;
  v.bounded_away = in_band;
  if (v.vanishing && !v.bounded_away)
    v.label = "vanishing";
  else if (v.bounded_away && !v.vanishing)
    v.label = "bounded-away";
  return v;
}

Direction normalize_direction(const MixingMeasure& g0, const Direction& dir) {
  require_admissible_direction(g0, dir);
  double s = 0.0;
  for (std::size_t i = 0; i < g0.size(); ++i)
    s += (dir.a[i] / g0.weight(i)).norm() + std::abs(dir.b[i]);
  Direction out;
  for (std::size_t i = 0; i < g0.size(); ++i) {
    out.a.push_back(dir.a[i] / g0.weight(i) / s);
    out.b.push_back(dir.b[i] / s);
  }
  return out;
}

MixingMeasure perturbation_path(const Kernel& kernel, const MixingMeasure& g0,
                                const Direction& d, double l) {
  std::vector<Point> atoms;
  std::vector<double> weights;
  for (std::size_t i = 0; i < g0.size(); ++i) {
    Point t = g0.atom(i) + d.a[i] / l;
    const double p = g0.size() == 1 ? 1.0 : g0.weight(i) + d.b[i] / l;
    if (!kernel.valid(t) || !(p > 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "G_l leaves the parameter space at l = " << l << " (atom " << i << "; "
          << kernel.box_description() << ")";
      throw InvalidPath(msg.str());
    }
    atoms.push_back(std::move(t));
    weights.push_back(p);
  }
  try {
    return MixingMeasure(std::move(atoms), std::move(weights));
  } catch (const Error& e) {
    throw InvalidPath(std::string("G_l is not a valid mixing measure: ") + e.what());
  }
}

ProbeReport inverse_ratio_probe(const Kernel& kernel, const MixingMeasure& g0,
                                const Direction& direction, int n,
                                const std::vector<double>& l_grid, Divergence which,
                                const ProbeOptions& opt) {
  if (n < 1) throw InvalidParameter("N must be >= 1");
  if (which == Divergence::KL) throw InvalidParameter("inverse ratio probe uses TV or Hellinger");
  require_grid(l_grid);
  require_atoms_valid(g0, kernel);
  const Direction d = normalize_direction(g0, direction);
  std::vector<MixingMeasure> path;
  for (double l : l_grid) path.push_back(perturbation_path(kernel, g0, d, l));

  ProbeReport rep;
  rep.probe = "inverse_ratio";
  rep.parameters = {{"kernel", kernel.family()},      {"G0", describe(g0)},
                    {"direction", describe(direction)}, {"N", std::to_string(n)},
                    {"divergence", divergence_name(which)}};
  std::vector<ProbeRow> rows(l_grid.size());
  parallel_for(l_grid.size(), opt.budget.workers, [&](std::size_t i) {
    const double den = distance_DN(path[i], g0, 1.0);
    const auto e = cell_numerator(path[i], g0, kernel, n, which, den, opt,
                                  derive_seed(opt.budget.seed, "cell-" + std::to_string(i)));
    rows[i] = make_row("ratio", l_grid[i], e, den);
  });
  rep.rows = rows;
  record_l0(rep, rows);
  add_verdict(rep, "ratio", opt.thresholds);
  return rep;
}

ProbeReport curvature_probe_locscale(const MixingMeasure& g0, const std::vector<double>& l_grid,
                                     const ProbeOptions& opt) {
  require_grid(l_grid);
  const auto kernel = make_locscale_exponential();
  require_atoms_valid(g0, *kernel);
  if (g0.size() != 2 || g0.dim() != 2)
    throw InvalidParameter("curvature probe needs two (xi, sigma) atoms");
  const double xi = g0.atom(0)[0], s1 = g0.atom(0)[1], s2 = g0.atom(1)[1];
  const double p1 = g0.weight(0), p2 = g0.weight(1);
  if (std::abs(g0.atom(1)[0] - xi) > 1e-12)
    throw InvalidParameter("curvature probe needs xi_1 = xi_2");
  if (std::abs(s1 - s2) <= 1e-12) throw InvalidParameter("curvature probe needs sigma_1 != sigma_2");
  if (std::abs(p1 / s1 - p2 / s2) > 1e-12)
    throw InvalidParameter("curvature probe needs p_1/sigma_1 = p_2/sigma_2");
  const double psi = p1 / s1;

  auto atom = [](double x, double s) {
    Point t(2);
    t << x, s;
    return t;
  };
  std::vector<MixingMeasure> gs, hs;
  for (double l : l_grid) {
    const double c = (2.0 + 2.0 * psi) * l;
    const double xi_l = xi - 1.0 / c;
    const double dp = psi / c;
    if (!(p2 - dp > 0.0)) throw InvalidPath("G_l leaves the simplex at l = " + fmt(l));
    gs.emplace_back(std::vector<Point>{atom(xi_l, s1), atom(xi, s2)},
                    std::vector<double>{p1 + dp, p2 - dp});
    hs.emplace_back(std::vector<Point>{atom(xi, s1), atom(xi_l, s2)}, std::vector<double>{p1, p2});
  }

  ProbeReport rep;
  rep.probe = "curvature_locscale";
  rep.parameters = {{"kernel", kernel->family()}, {"G0", describe(g0)}, {"psi", fmt(psi)},
                    {"N", "1"}, {"divergence", "tv"}};
  const std::size_t cells = l_grid.size();
  std::vector<ProbeRow> pair(cells), one(cells);
  parallel_for(2 * cells, opt.budget.workers, [&](std::size_t c) {
    const std::size_t i = c % cells;
    const auto seed = derive_seed(opt.budget.seed, "cell-" + std::to_string(c));
    if (c < cells) {
      const double den = distance_DN(gs[i], hs[i], 1.0);
      pair[i] = make_row("pair", l_grid[i],
                         cell_numerator(gs[i], hs[i], *kernel, 1, Divergence::TV, den, opt, seed),
                         den);
    } else {
      const double den = distance_DN(gs[i], g0, 1.0);
      one[i] = make_row("one-sided", l_grid[i],
                        cell_numerator(gs[i], g0, *kernel, 1, Divergence::TV, den, opt, seed), den);
    }
  });
  rep.rows = pair;
  rep.rows.insert(rep.rows.end(), one.begin(), one.end());
  for (const auto& r : pair)
    if (std::abs(r.denominator - 1.0 / r.index) > 1e-12)
      rep.flags.push_back("D_1(G_l, H_l) != 1/l at l = " + fmt(r.index));
  add_verdict(rep, "pair", opt.thresholds);
  add_verdict(rep, "one-sided", opt.thresholds);
  return rep;
}

ProbeReport sqrtN_sharpness_probe(const Kernel& kernel, const MixingMeasure& g0,
                                  double psi_exponent, const std::vector<int>& n_grid,
                                  const std::vector<double>& eps_grid, const ProbeOptions& opt) {
  if (!(psi_exponent >= 1.0)) throw InvalidParameter("psi exponent must be >= 1");
  if (n_grid.empty() || eps_grid.empty()) throw InvalidParameter("N and epsilon grids must be nonempty");
  for (int n : n_grid)
    if (n < 1) throw InvalidParameter("N must be >= 1");
  require_atoms_valid(g0, kernel);

  ProbeReport rep;
  rep.probe = "sqrtN_sharpness";
  rep.parameters = {{"kernel", kernel.family()}, {"G0", describe(g0)},
                    {"psi_exponent", fmt(psi_exponent)}, {"numerator", "hellinger_upper_bound"}};
  if (psi_exponent == 1.0) rep.flags.push_back("control run: psi(N) = N");

  std::vector<MixingMeasure> path;
  std::vector<double> eps_used;
  for (double e : eps_grid) {
    if (e == 0.0) {
      rep.flags.push_back("epsilon = 0 excluded (0/0)");
      continue;
    }
    std::vector<Point> atoms = g0.atoms();
    atoms[0][0] += e;
    if (!kernel.valid(atoms[0])) throw InvalidPath("G_eps leaves the parameter box at eps = " + fmt(e));
    path.emplace_back(std::move(atoms), g0.weights());
    eps_used.push_back(e);
  }
  if (path.empty()) throw InvalidParameter("epsilon grid has no nonzero value");

  for (int n : n_grid) {
    const double psi = std::pow(static_cast<double>(n), psi_exponent);
    const std::string series = "N=" + std::to_string(n);
    ProbeRow best;
    for (std::size_t j = 0; j < path.size(); ++j) {
      DivergenceEstimate e;
      e.value = hellinger_upper_bound(path[j], g0, kernel, n);
      const auto row = make_row(series, eps_used[j], e, distance_DN(path[j], g0, psi));
      rep.rows.push_back(row);
      if (j == 0 || row.ratio < best.ratio) best = row;
    }
    best.series = "minimum";
    best.index = n;
    rep.rows.push_back(best);
  }
  // minima decreasing toward 0 across N: every consecutive drop is real
  const auto minima = rep.series("minimum");
  SeriesVerdict v = classify_series("minimum", minima, opt.thresholds);
  bool decreasing = minima.size() >= 2;
  for (std::size_t i = 1; i < minima.size(); ++i) decreasing = decreasing && minima[i].ratio < minima[i - 1].ratio;
  v.vanishing = decreasing && minima.back().ratio < opt.thresholds.band_low * minima.front().ratio;
  v.label = v.vanishing ? "vanishing" : (v.bounded_away ? "bounded-away" : "inconclusive");
  rep.verdicts.push_back(v);
  return rep;
}

ProbeReport impact_probe_Dr(const Kernel& kernel, const MixingMeasure& g0,
                            const Direction& direction, double r, const std::vector<double>& l_grid,
                            const ProbeOptions& opt) {
  if (!(r >= 1.0)) throw InvalidParameter("r must be >= 1");
  require_admissible_direction(g0, direction);
  bool any_b = false;
  for (double b : direction.b) any_b = any_b || b != 0.0;
  if (!any_b) throw InvalidParameter("impact probe needs some b_i != 0");
  require_grid(l_grid);
  require_atoms_valid(g0, kernel);
  const Direction d = normalize_direction(g0, direction);
  std::vector<MixingMeasure> path;
  for (double l : l_grid) path.push_back(perturbation_path(kernel, g0, d, l));

  ProbeReport rep;
  rep.probe = "impact_Dr";
  rep.parameters = {{"kernel", kernel.family()}, {"G0", describe(g0)},
                    {"direction", describe(direction)}, {"r", fmt(r)}, {"N", "1"},
                    {"divergence", "tv"}};
  std::vector<ProbeRow> dr(l_grid.size()), wr(l_grid.size());
  parallel_for(l_grid.size(), opt.budget.workers, [&](std::size_t i) {
    const double den = distance_Dr1r2(path[i], g0, r, 1.0);
    const auto e = cell_numerator(path[i], g0, kernel, 1, Divergence::TV, den, opt,
                                  derive_seed(opt.budget.seed, "cell-" + std::to_string(i)));
    dr[i] = make_row("D_r1", l_grid[i], e, den);
    wr[i] = make_row("W_r^r", l_grid[i], e, std::pow(wasserstein(path[i], g0, r), r));
  });
  rep.rows = dr;
  rep.rows.insert(rep.rows.end(), wr.begin(), wr.end());
  add_verdict(rep, "D_r1", opt.thresholds);
  add_verdict(rep, "W_r^r", opt.thresholds);
  return rep;
}

ProbeReport weight_path_probe(const Kernel& kernel, const MixingMeasure& g0, int n,
                              const std::vector<double>& l_grid, const ProbeOptions& opt) {
  if (g0.size() < 2) throw InvalidParameter("weight path needs at least two atoms");
  if (n < 1) throw InvalidParameter("N must be >= 1");
  Direction dir;
  for (std::size_t i = 0; i < g0.size(); ++i) {
    dir.a.push_back(Eigen::VectorXd::Zero(g0.dim()));
    dir.b.push_back(i == 0 ? 1.0 : (i == 1 ? -1.0 : 0.0));
  }
  require_grid(l_grid);
  require_atoms_valid(g0, kernel);
  std::vector<MixingMeasure> path;
  for (double l : l_grid) path.push_back(perturbation_path(kernel, g0, dir, l));

  ProbeReport rep;
  rep.probe = "weight_path";
  rep.parameters = {{"kernel", kernel.family()}, {"G0", describe(g0)},
                    {"N", std::to_string(n)}, {"divergence", "tv"}, {"bound", "0.5"}};
  rep.rows.resize(l_grid.size());
  parallel_for(l_grid.size(), opt.budget.workers, [&](std::size_t i) {
    const double den = distance_DN(path[i], g0, n);
    const auto e = cell_numerator(path[i], g0, kernel, n, Divergence::TV, den, opt,
                                  derive_seed(opt.budget.seed, "cell-" + std::to_string(i)));
    rep.rows[i] = make_row("ratio", l_grid[i], e, den);
  });
  for (const auto& r : rep.rows)
    if (r.ratio > 0.5 + opt.thresholds.sigmas * r.std_error / r.denominator)
      rep.flags.push_back("ratio above 1/2 at l = " + fmt(r.index));
  add_verdict(rep, "ratio", opt.thresholds);
  return rep;
}

double lecam_two_point_bound(double m, double n, double gamma, double beta0, double a) {
  if (!(a > 0.0 && a < 1.0)) throw InvalidParameter("a must lie in (0, 1)");
  if (!(gamma > 0.0)) throw InvalidParameter("gamma must be > 0");
  if (!(beta0 > 0.0)) throw InvalidParameter("beta0 must be > 0");
  if (!(m > 0.0) || !(n > 0.0)) throw InvalidParameter("m and N must be > 0");
  return 0.25 * a * std::pow((1.0 - a) / (gamma * std::sqrt(m * n)), 1.0 / beta0);
}

}  // namespace mixlab
