#pragma once

// Brute-force verifiers for the interval solvers. These scan or enumerate the
// defining optimization problems directly and share no code path with solve.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mdpci/core.hpp"
#include "mdpci/rates.hpp"

namespace mdpci::oracle {

struct ThetaGrid {
  double lo;
  double hi;
  std::size_t points;
  /// Rescans around the extreme-cost grid points, each time with `refine_points`
  /// points spanning one cell on either side.
  int refinements = 0;
  std::size_t refine_points = 10000;
};

struct GridOracleResult {
  ConfidenceInterval interval;
  std::size_t feasible_points;  // on the base grid
  /// Fewer than 10 feasible base-grid points.
  bool grid_too_coarse;
};

/// Keeps grid points theta with I_theta(a_T (theta_hat - theta)) <= r and
/// returns the cost extremes over them. Requires at least 1000 points.
GridOracleResult grid_interval_oracle(const RateFamily& family,
                                      const std::function<double(double)>& cost,
                                      double theta_hat, const ScalingSchedule& schedule,
                                      const ThetaGrid& grid);

struct DroBounds {
  double lower;
  double upper;
};

/// Enumerates all weight vectors on the grid {0, 1/k, ..., 1} (T <= 4, k >= 200)
/// inside the chi-square ball of radius 2 r_T and returns the extreme expected losses.
DroBounds simplex_dro_oracle(std::span<const double> losses, const ScalingSchedule& schedule,
                             std::size_t resolution);

/// Solves the primal first-order conditions w_t ~ sqrt(lambda / (lambda + eta - l_t))
/// by nested bisection on the two multipliers. Requires r_T > 0.
DroBounds multiplier_dro_oracle(std::span<const double> losses, const ScalingSchedule& schedule);

// ---------------------------------------------------------------------------
// Seeded cross-validation corpus
// ---------------------------------------------------------------------------

struct ScalarInstance {
  double theta_hat;
  double scaled_radius;
};

struct CirInstance {
  double theta_hat;
  double delta;
  double sigma;
  double scaled_radius;
};

struct DroInstance {
  std::vector<double> losses;
  double scaled_radius;
};

/// theta_hat in [0.05, 2], r_T log-uniform in [1e-6, 1e-2].
std::vector<ScalarInstance> ou_corpus(std::uint64_t seed, std::size_t count);
/// theta_hat in [0.2, 3] (or in [-2, 0] when `nonpositive`), delta in [1, 10],
/// sigma in [0.5, 3], r_T log-uniform in [1e-6, 1e-2].
std::vector<CirInstance> cir_corpus(std::uint64_t seed, std::size_t count, bool nonpositive);
/// Losses of length `length` uniform in [-1, 2], r_T in [0.01, 0.5].
std::vector<DroInstance> dro_corpus(std::uint64_t seed, std::size_t count, std::size_t length);

/// Fixed small-T instances: every T in {1, 2, 3, 4} plus the documented (0, 1) case.
std::vector<DroInstance> small_dro_corpus();

struct CheckResult {
  std::string name;
  std::size_t instances = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  double seconds = 0.0;
};

struct CorpusOptions {
  std::uint64_t seed = 20240601;
  std::size_t instances = 200;
  std::size_t grid_points = 1000000;
  std::size_t simplex_resolution = 2000;
  std::size_t dro_instances = 100;
  std::size_t dro_length = 50;
};

/// Runs every solver-versus-oracle comparison on the seeded corpus.
std::vector<CheckResult> run_cross_validation(const CorpusOptions& options);

}  // namespace mdpci::oracle
