#include "mixlab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixlab/errors.hpp"
#include "mixlab/identifiability.hpp"
#include "mixlab/posterior.hpp"
#include "mixlab/probes.hpp"
#include "mixlab/products.hpp"
#include "mixlab/rng.hpp"

namespace mixlab::lab {

namespace fs = std::filesystem;

namespace {

// ----------------------------------------------------------- param access

class Params {
 public:
  explicit Params(const Json& j) : j_(j) {}

  bool has(const std::string& key) const { return j_.contains(key); }
  const Json& raw(const std::string& key) const { return j_.at(key); }

  double number(const std::string& key, std::optional<double> fallback = {}) const {
    if (!j_.contains(key)) {
      if (fallback) return *fallback;
      throw SchemaError(path(key), "missing");
    }
    if (!j_.at(key).is_number()) throw SchemaError(path(key), "expected a number");
    return j_.at(key).get<double>();
  }

  long long integer(const std::string& key, std::optional<long long> fallback = {}) const {
    if (!j_.contains(key)) {
      if (fallback) return *fallback;
      throw SchemaError(path(key), "missing");
    }
    if (!j_.at(key).is_number_integer()) throw SchemaError(path(key), "expected an integer");
    return j_.at(key).get<long long>();
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!j_.contains(key)) return fallback;
    if (!j_.at(key).is_string()) throw SchemaError(path(key), "expected a string");
    return j_.at(key).get<std::string>();
  }

  /// A number or an array of numbers.
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    if (!j_.contains(key)) return fallback;
    const Json& v = j_.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty()) throw SchemaError(path(key), "expected a number or a nonempty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number())
        throw SchemaError(path(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> fallback) const {
    std::vector<double> f(fallback.begin(), fallback.end());
    std::vector<int> out;
    const auto v = numbers(key, f);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] != std::floor(v[i]) || std::abs(v[i]) > 1e9)
        throw SchemaError(path(key) + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back(static_cast<int>(v[i]));
    }
    return out;
  }

  std::string path(const std::string& key) const { return "params." + key; }

 private:
  const Json& j_;
};

Divergence divergence_from(const std::string& name, const std::string& path) {
  if (name == "tv") return Divergence::TV;
  if (name == "hellinger") return Divergence::Hellinger;
  throw SchemaError(path, "expected \"tv\" or \"hellinger\"");
}

Budget budget_from(const Params& p, std::uint64_t seed, unsigned workers) {
  Budget b;
  b.mc_draws = static_cast<std::size_t>(p.integer("mc_draws", static_cast<long long>(b.mc_draws)));
  b.max_draws = static_cast<std::size_t>(p.integer("max_draws", static_cast<long long>(b.max_draws)));
  b.chunk = static_cast<std::size_t>(p.integer("chunk", static_cast<long long>(b.chunk)));
  if (b.chunk == 0) throw SchemaError(p.path("chunk"), "must be > 0");
  b.seed = seed;
  b.workers = workers;
  return b;
}

Direction direction_from(const Json& j, const MixingMeasure& g0, const std::string& path) {
  if (!j.is_object() || !j.contains("a") || !j.contains("b"))
    throw SchemaError(path, "expected an object with arrays a and b");
  const Json &ja = j.at("a"), &jb = j.at("b");
  if (!ja.is_array() || !jb.is_array() || ja.size() != g0.size() || jb.size() != g0.size())
    throw SchemaError(path, "a and b need one entry per atom");
  Direction d;
  for (std::size_t i = 0; i < g0.size(); ++i) {
    const std::string ap = path + ".a[" + std::to_string(i) + "]";
    Eigen::VectorXd a(g0.dim());
    if (ja[i].is_number() && g0.dim() == 1) {
      a[0] = ja[i].get<double>();
    } else if (ja[i].is_array() && ja[i].size() == static_cast<std::size_t>(g0.dim())) {
      for (int c = 0; c < g0.dim(); ++c) {
        if (!ja[i][static_cast<std::size_t>(c)].is_number()) throw SchemaError(ap, "expected numbers");
        a[c] = ja[i][static_cast<std::size_t>(c)].get<double>();
      }
    } else {
      throw SchemaError(ap, "expected " + std::to_string(g0.dim()) + " numbers");
    }
    if (!jb[i].is_number()) throw SchemaError(path + ".b[" + std::to_string(i) + "]", "expected a number");
    d.a.push_back(a);
    d.b.push_back(jb[i].get<double>());
  }
  return d;
}

const Kernel& need_kernel(const ExperimentConfig& c) {
  if (!c.kernel) throw SchemaError("kernel", c.subcommand + " needs a kernel section");
  return *c.kernel;
}

void need_measures(const ExperimentConfig& c, std::size_t count) {
  if (c.measures.size() < count) {
    std::ostringstream msg;
    msg << c.subcommand << " needs " << count << " measure(s), got " << c.measures.size();
    throw SchemaError("measures", msg.str());
  }
}

class Csv {
 public:
  explicit Csv(const std::string& header) { s_ << header << '\n'; }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((s_ << (first ? "" : ",") << cell(cells), first = false), ...);
    s_ << '\n';
  }
  std::string str() const { return s_.str(); }

 private:
  static std::string cell(double x) { return format_number(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long x) { return std::to_string(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(const std::string& x) { return x; }
  static std::string cell(const char* x) { return x; }
  std::ostringstream s_;
};

// ------------------------------------------------------------ subcommands

Report run_distance(const ExperimentConfig& c) {
  need_measures(c, 2);
  const Params p(c.params);
  const auto& g = c.measures[0];
  const auto& g2 = c.measures[1];
  Csv csv("metric,parameter,value");
  for (double n : p.numbers("N", {1.0})) {
    if (!(n >= 1.0)) throw SchemaError(p.path("N"), "N must be >= 1");
    csv.row("D_N", format_number(n), distance_DN(g, g2, n));
  }
  const double r1 = p.number("r1", 1.0), r2 = p.number("r2", 1.0);
  csv.row("D_r1r2", "r1=" + format_number(r1) + ";r2=" + format_number(r2),
          distance_Dr1r2(g, g2, r1, r2));
  if (g.size() == g2.size()) {
    const auto aw = atom_and_weight_distances(g, g2);
    csv.row("d_theta", "", aw.atoms);
    csv.row("d_p", "", aw.weights);
  }
  for (double order : p.numbers("wasserstein_p", {1.0}))
    csv.row("W_p", format_number(order), wasserstein(g, g2, order));
  return {csv.str(), Json{{"measures", {to_json(g), to_json(g2)}}}};
}

Report run_divergence(const ExperimentConfig& c, unsigned workers) {
  need_measures(c, 2);
  const Kernel& k = need_kernel(c);
  const Params p(c.params);
  std::vector<std::string> names{"tv", "hellinger"};
  if (p.has("divergences")) {
    names.clear();
    const Json& d = p.raw("divergences");
    if (!d.is_array()) throw SchemaError(p.path("divergences"), "expected an array");
    for (const auto& x : d) {
      if (!x.is_string()) throw SchemaError(p.path("divergences"), "expected strings");
      names.push_back(x.get<std::string>());
    }
  }
  Csv csv("N,divergence,value,std_error,method,samples,upper_bound");
  for (int n : p.integers("N", {1})) {
    if (n < 1) throw SchemaError(p.path("N"), "N must be >= 1");
    for (const auto& name : names) {
      const Divergence which = divergence_from(name, p.path("divergences"));
      Budget b = budget_from(p, derive_seed(c.seed, "divergence-" + name + "-N-" + std::to_string(n)),
                             workers);
      const auto e = estimate_divergence(c.measures[0], c.measures[1], k, n, which, b);
      const double bound = which == Divergence::TV
                               ? tv_upper_bound(c.measures[0], c.measures[1], k, n)
                               : hellinger_upper_bound(c.measures[0], c.measures[1], k, n);
      csv.row(n, name, e.value, e.std_error, to_string(e.method), e.samples, bound);
    }
  }
  return {csv.str(), Json::object()};
}

Report run_identify(const ExperimentConfig& c) {
  need_measures(c, 1);
  const Kernel& k = need_kernel(c);
  const Params p(c.params);
  const auto& g = c.measures[0];
  Csv csv("quantity,index,value");
  Json env = Json::object();
  if (k.family() == "bernoulli") {
    const int kk = static_cast<int>(g.size());
    const int n_max = static_cast<int>(p.integer("n_max", 2 * kk + 1));
    if (n_max < 0) throw SchemaError(p.path("n_max"), "must be >= 0");
    int first_full = -1;
    for (int n = 0; n <= n_max; ++n) {
      const auto sys = bernoulli_first_order_system(g, n);
      csv.row("rank", n, sys.rank);
      csv.row("smallest_singular_value", n, sys.smallest_singular_value);
      if (n >= 1) {
        const auto gram = bernoulli_product_gram(g.atoms(), n);
        csv.row("gram_min_eigenvalue", n, gram.min_eigenvalue);
        csv.row("near_singular", n, gram.near_singular ? 1 : 0);
      }
      if (first_full < 0 && sys.rank == 2 * kk) first_full = n;
    }
    env["first_full_rank_length"] = first_full;
    env["expected"] = 2 * kk - 1;
  } else {
    GridSpec grid;
    grid.tail = p.number("tail", grid.tail);
    const auto gram = first_order_gram(k, g.atoms(), grid);
    csv.row("gram_min_eigenvalue", 1, gram.min_eigenvalue);
    csv.row("gram_max_eigenvalue", 1, gram.max_eigenvalue);
    csv.row("near_singular", 1, gram.near_singular ? 1 : 0);
    env["gram"] = to_json(gram);
  }
  if (p.has("direction")) {
    const auto d = direction_from(p.raw("direction"), g, p.path("direction"));
    csv.row("direction_residual", 1, degenerate_direction_check(k, g, d));
  }
  if (p.has("moment_map_theta")) {
    const auto theta = p.numbers("moment_map_theta", {});
    const auto rep = moment_map(k, Eigen::Map<const Eigen::VectorXd>(theta.data(),
                                                                     static_cast<Eigen::Index>(theta.size())));
    for (Eigen::Index j = 0; j < rep.lambda.size(); ++j)
      csv.row("lambda", static_cast<int>(j + 1), rep.lambda[j]);
    csv.row("det_closed", 1, rep.det_closed);
    csv.row("det_fd", 1, rep.det_fd);
  }
  return {csv.str(), env};
}

Report run_witness(const ExperimentConfig& c) {
  need_measures(c, 1);
  if (c.kernel && c.kernel->family() != "bernoulli")
    throw SchemaError("kernel.family", "witness is defined for the Bernoulli kernel");
  const Params p(c.params);
  const auto bern = make_bernoulli();
  Csv csv("a,component,theta,weight,max_moment_mismatch,tv_at_n,tv_at_n_plus_1");
  Json list = Json::array();
  for (double a : p.numbers("a", {1.0})) {
    const auto w = bernoulli_nonidentifiable_witness(c.measures[0], a);
    const double tv_next =
        estimate_divergence(w.original, w.witness, *bern, w.n + 1, Divergence::TV).value;
    for (std::size_t i = 0; i < w.witness.size(); ++i)
      csv.row(a, i, w.witness.atom(i)[0], w.witness.weight(i), w.max_moment_mismatch, w.tv_at_n,
              tv_next);
    Json j = to_json(w);
    j["tv_at_n_plus_1"] = tv_next;
    list.push_back(j);
  }
  return {csv.str(), Json{{"witnesses", list}}};
}

Report run_probe(const ExperimentConfig& c, unsigned workers) {
  const Params p(c.params);
  const std::string kind = p.text("probe", "inverse_ratio");
  ProbeOptions opt;
  opt.budget = budget_from(p, derive_seed(c.seed, "probe-" + kind), workers);
  opt.variance_guard = p.number("variance_guard", opt.variance_guard);
  opt.thresholds.decay = p.number("decay", opt.thresholds.decay);
  opt.thresholds.band_low = p.number("band_low", opt.thresholds.band_low);
  opt.thresholds.band_high = p.number("band_high", opt.thresholds.band_high);
  opt.thresholds.sigmas = p.number("sigmas", opt.thresholds.sigmas);
  const auto l_grid = p.numbers("l_grid", {10.0, 100.0, 1000.0});
  need_measures(c, 1);
  const auto& g0 = c.measures[0];

  ProbeReport rep;
  if (kind == "inverse_ratio") {
    rep = inverse_ratio_probe(need_kernel(c), g0,
                              direction_from(p.has("direction") ? p.raw("direction") : Json(), g0,
                                             p.path("direction")),
                              static_cast<int>(p.integer("N", 1)), l_grid,
                              divergence_from(p.text("divergence", "tv"), p.path("divergence")), opt);
  } else if (kind == "impact") {
    rep = impact_probe_Dr(need_kernel(c), g0,
                          direction_from(p.has("direction") ? p.raw("direction") : Json(), g0,
                                         p.path("direction")),
                          p.number("r", 2.0), l_grid, opt);
  } else if (kind == "curvature") {
    rep = curvature_probe_locscale(g0, l_grid, opt);
  } else if (kind == "sqrtN") {
    rep = sqrtN_sharpness_probe(need_kernel(c), g0, p.number("psi_exponent", 2.0),
                                p.integers("N_grid", {4, 16, 64}),
                                p.numbers("eps_grid", {0.01, 0.05, 0.1}), opt);
  } else if (kind == "weight_path") {
    rep = weight_path_probe(need_kernel(c), g0, static_cast<int>(p.integer("N", 1)), l_grid, opt);
  } else {
    throw SchemaError(p.path("probe"),
                      "expected inverse_ratio, impact, curvature, sqrtN or weight_path");
  }
  return {to_csv(rep), envelope(rep)};
}

Report run_minimax(const ExperimentConfig& c) {
  const Params p(c.params);
  Csv csv("m,N,gamma,beta0,a,bound");
  for (double m : p.numbers("m", {100.0}))
    for (double n : p.numbers("N", {4.0}))
      for (double gamma : p.numbers("gamma", {1.0}))
        for (double beta0 : p.numbers("beta0", {1.0}))
          for (double a : p.numbers("a", {0.5}))
            csv.row(m, n, gamma, beta0, a, lecam_two_point_bound(m, n, gamma, beta0, a));
  Json env = Json::object();
  if (c.measures.size() >= 2 && c.measures[0].size() == c.measures[1].size()) {
    const auto aw = atom_and_weight_distances(c.measures[0], c.measures[1]);
    env["d_theta"] = aw.atoms;
    env["d_p"] = aw.weights;
  }
  return {csv.str(), env};
}

Report run_posterior_sim(const ExperimentConfig& c, unsigned workers) {
  need_measures(c, 1);
  const Kernel& k = need_kernel(c);
  const Params p(c.params);
  ContractionConfig cfg;
  cfg.workers = workers;
  cfg.mcmc.iterations = static_cast<std::size_t>(p.integer("iterations", 20000));
  cfg.mcmc.burn_in_fraction = p.number("burn_in_fraction", cfg.mcmc.burn_in_fraction);
  cfg.mcmc.initial_scale = p.number("initial_scale", cfg.mcmc.initial_scale);
  cfg.identifiable_length = static_cast<int>(p.integer("identifiable_length", 0));
  if (!p.has("prior")) throw SchemaError(p.path("prior"), "missing (needs lower and upper)");
  const Json& pr = p.raw("prior");
  const Params pp(pr);
  auto box = [&](const std::string& key) {
    if (!pr.is_object()) throw SchemaError(p.path("prior"), "expected an object");
    const auto v = pp.numbers(key, {});
    if (v.empty()) throw SchemaError(p.path("prior." + key), "missing");
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  cfg.prior.lower = box("lower");
  cfg.prior.upper = box("upper");
  try {
    cfg.prior.validate(k);
  } catch (const InvalidParameter& e) {
    throw SchemaError(p.path("prior"), e.what());
  }
  LengthLaw law;
  if (p.has("N")) {
    law.lo = law.hi = static_cast<int>(p.integer("N"));
  } else {
    law.lo = static_cast<int>(p.integer("N_lo"));
    law.hi = static_cast<int>(p.integer("N_hi"));
  }
  std::vector<std::size_t> m_grid;
  for (int m : p.integers("m_grid", {100, 400, 1600})) {
    if (m < 1) throw SchemaError(p.path("m_grid"), "m must be >= 1");
    m_grid.push_back(static_cast<std::size_t>(m));
  }
  const auto reps = static_cast<std::size_t>(p.integer("replicates", 20));
  const auto rep = contraction_experiment(k, c.measures[0], m_grid, law, reps, cfg,
                                          derive_seed(c.seed, "posterior-sim"));
  return {to_csv(rep), Json{{"d_p_vs_m", to_json(rep.d_p_vs_m)},
                            {"d_theta_vs_total_length", to_json(rep.d_theta_vs_total)}}};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidParameter("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw InvalidParameter("failed writing " + path.string());
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> list{"distance", "divergence", "identify", "witness",
                                             "probe",    "minimax",    "posterior-sim"};
  return list;
}

Json ExperimentConfig::to_json() const {
  Json j = Json::object();
  if (!subcommand.empty()) j["subcommand"] = subcommand;
  j["seed"] = seed;
  if (workers) j["workers"] = *workers;
  if (!kernel_family.empty()) {
    Json fixed = Json::object();
    for (const auto& [key, v] : kernel_fixed) fixed[key] = v;
    j["kernel"] = Json{{"family", kernel_family}, {"params_fixed", fixed}};
  }
  Json ms = Json::array();
  for (const auto& m : measures) ms.push_back(mixlab::to_json(m));
  j["measures"] = ms;
  j["params"] = params;
  j["output"] = Json{{"dir", out_dir}, {"stem", stem}};
  return j;
}

ExperimentConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("$", "expected a JSON object");
  static const std::vector<std::string> known{"subcommand", "seed",   "workers", "kernel",
                                              "measures",   "params", "output"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw SchemaError(key, "unknown field");

  ExperimentConfig c;
  if (j.contains("subcommand")) {
    if (!j["subcommand"].is_string()) throw SchemaError("subcommand", "expected a string");
    c.subcommand = j["subcommand"].get<std::string>();
    const auto& subs = subcommands();
    if (std::find(subs.begin(), subs.end(), c.subcommand) == subs.end())
      throw SchemaError("subcommand", "unknown subcommand '" + c.subcommand + "'");
  }
  if (!j.contains("seed")) throw SchemaError("seed", "missing (a 64-bit master seed is mandatory)");
  if (!j["seed"].is_number_unsigned()) throw SchemaError("seed", "expected a nonnegative integer");
  c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("workers")) {
    if (!j["workers"].is_number_unsigned() || j["workers"].get<unsigned>() == 0)
      throw SchemaError("workers", "expected a positive integer");
    c.workers = j["workers"].get<unsigned>();
  }
  if (j.contains("kernel")) {
    const Json& k = j["kernel"];
    if (!k.is_object() || !k.contains("family") || !k["family"].is_string())
      throw SchemaError("kernel.family", "missing or not a string");
    c.kernel_family = k["family"].get<std::string>();
    for (const auto& [key, _] : k.items())
      if (key != "family" && key != "params_fixed") throw SchemaError("kernel." + key, "unknown field");
    if (k.contains("params_fixed")) {
      if (!k["params_fixed"].is_object()) throw SchemaError("kernel.params_fixed", "expected an object");
      for (const auto& [key, v] : k["params_fixed"].items()) {
        if (!v.is_number()) throw SchemaError("kernel.params_fixed." + key, "expected a number");
        c.kernel_fixed[key] = v.get<double>();
      }
    }
    try {
      c.kernel = make_kernel(c.kernel_family, c.kernel_fixed);
    } catch (const Error& e) {
      throw SchemaError("kernel", e.what());
    }
  }
  if (j.contains("measures")) {
    if (!j["measures"].is_array()) throw SchemaError("measures", "expected an array");
    for (std::size_t i = 0; i < j["measures"].size(); ++i)
      c.measures.push_back(measure_from_json(j["measures"][i], "measures[" + std::to_string(i) + "]",
                                             c.kernel.get()));
  }
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw SchemaError("params", "expected an object");
    c.params = j["params"];
  }
  if (j.contains("output")) {
    const Json& o = j["output"];
    if (!o.is_object()) throw SchemaError("output", "expected an object");
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) throw SchemaError("output.dir", "expected a string");
      c.out_dir = o["dir"].get<std::string>();
    }
    if (o.contains("stem")) {
      if (!o["stem"].is_string()) throw SchemaError("output.stem", "expected a string");
      c.stem = o["stem"].get<std::string>();
    }
  }
  return c;
}

unsigned resolve_workers(std::optional<unsigned> cli, const char* env,
                         std::optional<unsigned> config) {
  if (cli) {
    if (*cli == 0) throw InvalidParameter("--workers must be >= 1");
    return *cli;
  }
  if (env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0 || v > 4096)
      throw InvalidParameter(std::string("LAB_WORKERS must be a positive integer, got '") + env + "'");
    return static_cast<unsigned>(v);
  }
  return config.value_or(1u);
}

Report execute(const ExperimentConfig& c, unsigned workers) {
  if (c.subcommand.empty()) throw SchemaError("subcommand", "missing");
  Report r;
  if (c.subcommand == "distance")
    r = run_distance(c);
  else if (c.subcommand == "divergence")
    r = run_divergence(c, workers);
  else if (c.subcommand == "identify")
    r = run_identify(c);
  else if (c.subcommand == "witness")
    r = run_witness(c);
  else if (c.subcommand == "probe")
    r = run_probe(c, workers);
  else if (c.subcommand == "minimax")
    r = run_minimax(c);
  else if (c.subcommand == "posterior-sim")
    r = run_posterior_sim(c, workers);
  else
    throw SchemaError("subcommand", "unknown subcommand '" + c.subcommand + "'");

  Json env = Json::object();
  env["subcommand"] = c.subcommand;
  env["seed"] = c.seed;
  if (!c.kernel_family.empty()) {
    Json fixed = Json::object();
    for (const auto& [key, v] : c.kernel_fixed) fixed[key] = v;
    env["kernel"] = Json{{"family", c.kernel_family}, {"params_fixed", fixed}};
  }
  env["params"] = c.params;
  env["status"] = "ok";
  env["result"] = r.envelope;
  r.envelope = env;
  return r;
}

RunResult run(const ExperimentConfig& c, unsigned workers) {
  RunResult res;
  const std::string stem = c.stem.empty() ? c.subcommand : c.stem;
  const fs::path dir(c.out_dir);
  const fs::path csv = dir / (stem + ".csv"), json = dir / (stem + ".json");
  const fs::path csv_tmp = dir / (stem + ".csv.tmp"), json_tmp = dir / (stem + ".json.tmp");
  res.csv_path = csv.string();
  res.json_path = json.string();
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& f : {csv, json, csv_tmp, json_tmp}) fs::remove(f, ec);
  };
  try {
    const Report r = execute(c, workers);
    fs::create_directories(dir);
    write_file(csv_tmp, r.csv);
    write_file(json_tmp, r.envelope.dump(2) + "\n");
    fs::rename(csv_tmp, csv);
    fs::rename(json_tmp, json);
  } catch (const Error& e) {
    cleanup();
    res.exit_status = 2;
    res.error_kind = e.kind();
    res.message = e.what();
  } catch (const std::exception& e) {
    cleanup();
    res.exit_status = 2;
    res.error_kind = "InternalError";
    res.message = e.what();
  }
  return res;
}

}  // namespace mixlab::lab
