#include "mdpci/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "mdpci/core.hpp"

namespace mdpci::numerics {

BisectionResult bisect_boundary(const std::function<double(double)>& g, double inside,
                                double outside, BisectionOptions options) {
  if (!(g(inside) <= 0.0) || !(g(outside) > 0.0)) {
    throw ConvergenceError("bisection bracket does not straddle the boundary");
  }
  int iterations = 0;
  while (iterations < options.max_iterations) {
    if (std::abs(outside - inside) <= options.tolerance) break;
    const double mid = inside + 0.5 * (outside - inside);
    if (mid == inside || mid == outside) break;
    ++iterations;
    if (g(mid) <= 0.0) {
      inside = mid;
    } else {
      outside = mid;
    }
  }
  return {inside, outside, iterations};
}

GoldenResult golden_section_minimize(const std::function<double(double)>& f, double lo,
                                     double hi, GoldenOptions options) {
  if (lo > hi) std::swap(lo, hi);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int iterations = 0;
  while (iterations < options.max_iterations &&
         (b - a) > options.tolerance * std::max(1.0, std::abs(0.5 * (a + b)))) {
    ++iterations;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  GoldenResult best{c, fc, iterations};
  if (fd < best.value) best = {d, fd, iterations};
  const double mid = 0.5 * (a + b);
  const double fmid = f(mid);
  if (fmid < best.value) best = {mid, fmid, iterations};
  const double flo = f(lo);
  if (flo < best.value) best = {lo, flo, iterations};
  const double fhi = f(hi);
  if (fhi < best.value) best = {hi, fhi, iterations};
  return best;
}

}  // namespace mdpci::numerics
