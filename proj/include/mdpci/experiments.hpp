#pragma once

// Monte Carlo harness: coverage and interval-length studies, disappointment
// probabilities and their decay rates.

#include <cstdint>
#include <string>
#include <vector>

#include "mdpci/core.hpp"
#include "mdpci/model.hpp"
#include "mdpci/simulate.hpp"

namespace mdpci {

struct BoundVariant {
  enum class Kind { Optimal, Clt, FixedOffset };

  Kind kind = Kind::Optimal;
  double kappa = 0.0;  // FixedOffset only

  static BoundVariant optimal() { return {Kind::Optimal, 0.0}; }
  static BoundVariant clt() { return {Kind::Clt, 0.0}; }
  static BoundVariant fixed_offset(double kappa) { return {Kind::FixedOffset, kappa}; }

  /// "optimal", "clt" or "kappa=<value>".
  std::string name() const;

  friend bool operator==(const BoundVariant&, const BoundVariant&) = default;
};

struct ExperimentConfig {
  ModelSpec model = OuModel{0.2};
  std::vector<double> horizons;
  double beta = kDefaultBeta;
  double rate = 1e-2;
  std::size_t replications = 2000;
  std::vector<BoundVariant> variants = {BoundVariant::optimal(), BoundVariant::clt()};
  std::uint64_t seed = 1;
  double step = kDefaultStep;
  /// Worker threads; 0 uses the hardware concurrency. Output does not depend on it.
  unsigned threads = 0;
};

/// Throws DomainError unless replications >= 1, the horizon grid is nonempty and
/// strictly increasing, and the model is supported by the harness.
void validate(const ExperimentConfig& config);

/// True cost J(theta) of the configured model: the stationary variance for the
/// diffusions and the mean for scalar i.i.d. models.
double true_cost(const ModelSpec& model);

/// Interval of one bound variant given an estimate at horizon T.
ConfidenceInterval variant_interval(const ModelSpec& model, const BoundVariant& variant,
                                    double theta_hat, const ScalingSchedule& schedule);

/// Estimates theta_hat at every horizon from one simulated path (or sample)
/// per replication. Entry [rep][k] is NaN when replication rep failed.
std::vector<std::vector<double>> simulate_estimates(const ExperimentConfig& config);

/// Per T and variant: mean/q10/q90 of lower, upper and width over feasible
/// replications, miscoverage frequency (Wilson 80% band in q10/q90), and
/// infeasible / failed replication counts.
ExperimentResult run_coverage(const ExperimentConfig& config);

/// Per T and variant: P(J(theta) > upper) with Wilson 80% band, and the decay
/// statistics -(1/T) log P and -(1/b_T) log P (missing when P = 0).
ExperimentResult run_disappointment(const ExperimentConfig& config);

/// Type-7 sample quantile (linear interpolation); `values` need not be sorted.
double sample_quantile(std::vector<double> values, double level);

struct WilsonBand {
  double lower;
  double upper;
};

/// Wilson score interval for `successes` out of `trials` at normal quantile z.
WilsonBand wilson_band(std::size_t successes, std::size_t trials, double z);

}  // namespace mdpci
