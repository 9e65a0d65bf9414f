#include "mixlab/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mixlab/errors.hpp"

namespace mixlab {

namespace {

Json point_json(const Point& p) {
  Json a = Json::array();
  for (Eigen::Index j = 0; j < p.size(); ++j) a.push_back(p[j]);
  return a;
}

double number_at(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json to_json(const MixingMeasure& g) {
  Json atoms = Json::array();
  for (const auto& a : g.atoms()) atoms.push_back(point_json(a));
  return Json{{"atoms", atoms}, {"weights", g.weights()}};
}

Json to_json(const NonIdentWitness& w) {
  return Json{{"original", to_json(w.original)},
              {"witness", to_json(w.witness)},
              {"n", w.n},
              {"a", w.a},
              {"max_moment_mismatch", w.max_moment_mismatch},
              {"tv_at_n", w.tv_at_n}};
}

Json to_json(const GramReport& r) {
  return Json{{"min_eigenvalue", r.min_eigenvalue}, {"max_eigenvalue", r.max_eigenvalue},
              {"functions", r.functions},           {"grid_points", r.grid_points},
              {"panels", r.panels},                 {"near_singular", r.near_singular}};
}

Json to_json(const LinearSystemReport& r) {
  return Json{{"rows", r.matrix.rows()},
              {"cols", r.matrix.cols()},
              {"rank", r.rank},
              {"smallest_singular_value", r.smallest_singular_value},
              {"largest_singular_value", r.largest_singular_value},
              {"nullity", r.nullspace.cols()}};
}

Json to_json(const SlopeFit& f) {
  return Json{{"slope", f.slope},   {"intercept", f.intercept}, {"ci_low", f.ci_low},
              {"ci_high", f.ci_high}, {"r_squared", f.r_squared}, {"points", f.points}};
}

Json envelope(const ProbeReport& r) {
  Json params = Json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  Json verdicts = Json::array();
  for (const auto& v : r.verdicts)
    verdicts.push_back(Json{{"series", v.series},
                            {"verdict", v.label},
                            {"vanishing", v.vanishing},
                            {"bounded_away", v.bounded_away}});
  return Json{{"probe", r.probe}, {"parameters", params}, {"verdicts", verdicts}, {"flags", r.flags}};
}

MixingMeasure measure_from_json(const Json& j, const std::string& path, const Kernel* kernel) {
  if (!j.is_object()) throw SchemaError(path, "expected an object with atoms and weights");
  if (!j.contains("atoms")) throw SchemaError(path + ".atoms", "missing");
  if (!j.contains("weights")) throw SchemaError(path + ".weights", "missing");
  const Json& ja = j.at("atoms");
  const Json& jw = j.at("weights");
  if (!ja.is_array() || ja.empty()) throw SchemaError(path + ".atoms", "expected a nonempty array");
  if (!jw.is_array()) throw SchemaError(path + ".weights", "expected an array");
  if (jw.size() != ja.size())
    throw SchemaError(path + ".weights", "length differs from the number of atoms");
  std::vector<Point> atoms;
  std::vector<double> weights;
  for (std::size_t i = 0; i < ja.size(); ++i) {
    const std::string ap = path + ".atoms[" + std::to_string(i) + "]";
    Point p;
    if (ja[i].is_number()) {
      p = Point::Constant(1, ja[i].get<double>());
    } else if (ja[i].is_array() && !ja[i].empty()) {
      p.resize(static_cast<Eigen::Index>(ja[i].size()));
      for (std::size_t c = 0; c < ja[i].size(); ++c)
        p[static_cast<Eigen::Index>(c)] = number_at(ja[i][c], ap + "[" + std::to_string(c) + "]");
    } else {
      throw SchemaError(ap, "expected a number or a nonempty array of numbers");
    }
    if (kernel) {
      if (p.size() != kernel->dim()) {
        std::ostringstream msg;
        msg << "atom has dimension " << p.size() << " but " << kernel->family() << " needs "
            << kernel->dim();
        throw SchemaError(ap, msg.str());
      }
      if (!kernel->valid(p))
        throw SchemaError(ap, "outside the parameter box " + kernel->box_description());
    }
    atoms.push_back(std::move(p));
    weights.push_back(number_at(jw[i], path + ".weights[" + std::to_string(i) + "]"));
  }
  try {
    return MixingMeasure(std::move(atoms), std::move(weights));
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
}

std::string to_csv(const ProbeReport& r) {
  std::ostringstream s;
  s << "series,index,numerator,std_error,denominator,ratio,method\n";
  for (const auto& row : r.rows)
    s << row.series << ',' << format_number(row.index) << ',' << format_number(row.numerator)
      << ',' << format_number(row.std_error) << ',' << format_number(row.denominator) << ','
      << format_number(row.ratio) << ',' << row.method << '\n';
  return s.str();
}

std::string to_csv(const ContractionReport& r) {
  std::ostringstream s;
  s << "m,replicate,mean_length,total_length,median_d_n,median_d_theta,median_d_p,acceptance\n";
  for (const auto& row : r.rows)
    s << row.m << ',' << row.replicate << ',' << format_number(row.mean_length) << ','
      << format_number(row.total_length) << ',' << format_number(row.median_d_n) << ','
      << format_number(row.median_d_theta) << ',' << format_number(row.median_d_p) << ','
      << format_number(row.acceptance) << '\n';
  return s.str();
}

}  // namespace mixlab
