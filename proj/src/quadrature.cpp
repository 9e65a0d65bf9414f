#include "mixlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mixlab {

namespace {

std::vector<double> pieces(double a, double b, const std::vector<double>& breaks) {
  std::vector<double> cuts{a};
  for (double x : breaks)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

struct Panel {
  double lo, hi, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod_panel(const std::function<double(double)>& f, double lo, double hi) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double err = 0.0;
  // max_depth 0: a single K31 evaluation with the embedded G15 difference
  const double r = GK::integrate([&](double t) { return f(mid + half * t); }, -1.0, 1.0, 0, 0.0,
                                 &err);
  return {lo, hi, half * r, half * err};
}

}  // namespace

QuadratureResult integrate_1d(const std::function<double(double)>& f, double a, double b,
                              const std::vector<double>& breaks, double abs_tol, int max_panels) {
  QuadratureResult out;
  if (!(b > a)) return out;
  std::priority_queue<Panel> heap;
  const auto cuts = pieces(a, b, breaks);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) heap.push(kronrod_panel(f, cuts[i], cuts[i + 1]));
  auto total_error = [&] {
    double e = 0.0;
    auto copy = heap;
    for (; !copy.empty(); copy.pop()) e += copy.top().error;
    return e;
  };
  double err = total_error();
  while (err > abs_tol && static_cast<int>(heap.size()) < max_panels) {
    const Panel worst = heap.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;
    heap.pop();
    const Panel left = kronrod_panel(f, worst.lo, mid);
    const Panel right = kronrod_panel(f, mid, worst.hi);
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    // resum now and then to keep the running total honest
    if (heap.size() % 64 == 0) err = total_error();
  }
  // sum smallest first for a reproducible, well-conditioned total
  std::vector<Panel> all;
  for (; !heap.empty(); heap.pop()) all.push_back(heap.top());
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.lo < y.lo; });
  for (const auto& p : all) {
    out.value += p.value;
    out.error += p.error;
  }
  return out;
}

QuadratureResult integrate_2d(const std::function<double(double, double)>& f, double a, double b,
                              const std::vector<double>& breaks, double abs_tol) {
  double worst_inner = 0.0;
  const double inner_tol = abs_tol / std::max(1.0, b - a);
  auto outer = [&](double x) {
    const auto inner =
        integrate_1d([&](double y) { return f(x, y); }, a, b, breaks, inner_tol, 1000);
    worst_inner = std::max(worst_inner, inner.error);
    return inner.value;
  };
  QuadratureResult out = integrate_1d(outer, a, b, breaks, abs_tol, 1000);
  out.error += worst_inner * (b - a);
  return out;
}

Grid gauss_legendre_grid(double a, double b, const std::vector<double>& breaks, int panels) {
  using GL = boost::math::quadrature::gauss<double, 20>;
  const auto& abscissa = GL::abscissa();
  const auto& weight = GL::weights();
  Grid grid;
  const auto cuts = pieces(a, b, breaks);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double h = (cuts[i + 1] - cuts[i]) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = cuts[i] + (p + 0.5) * h, half = 0.5 * h;
      // boost stores the nonnegative half of the symmetric rule
      for (std::size_t j = 0; j < abscissa.size(); ++j) {
        const double x = abscissa[j];
        grid.nodes.push_back(mid + half * x);
        grid.weights.push_back(weight[j] * half);
        if (x != 0.0) {
          grid.nodes.push_back(mid - half * x);
          grid.weights.push_back(weight[j] * half);
        }
      }
    }
  }
  return grid;
}

}  // namespace mixlab
