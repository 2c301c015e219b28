#pragma once

#include <functional>

namespace mdpci::numerics {

/// Result of bisecting g on a bracket with g(inside) <= 0 < g(outside).
struct BisectionResult {
  double inside;
  double outside;
  int iterations;
};

struct BisectionOptions {
  /// Stop once |outside - inside| <= tolerance. Zero means bisect to adjacent doubles.
  double tolerance = 0.0;
  int max_iterations = 200;
};

/// Bisects the sign change of g between `inside` (g <= 0) and `outside` (g > 0).
/// Throws ConvergenceError if the bracket is not valid.
BisectionResult bisect_boundary(const std::function<double(double)>& g, double inside,
                                double outside, BisectionOptions options = {});

struct GoldenResult {
  double argmin;
  double value;
  int iterations;
};

struct GoldenOptions {
  /// Stop once the bracket is narrower than tolerance * max(1, |x|).
  double tolerance = 1e-10;
  int max_iterations = 200;
};

/// Golden-section minimization of a unimodal f on [lo, hi]; the endpoints are
/// compared against the interior optimum.
GoldenResult golden_section_minimize(const std::function<double(double)>& f, double lo,
                                     double hi, GoldenOptions options = {});

}  // namespace mdpci::numerics
