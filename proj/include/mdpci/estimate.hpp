#pragma once

#include <vector>

#include "mdpci/core.hpp"
#include "mdpci/rates.hpp"

namespace mdpci {

/// Trapezoid-rule path functionals feeding the diffusion MLEs.
struct PathIntegrals {
  double int_x = 0.0;   // integral of X_t dt over [0, T]
  double int_x2 = 0.0;  // integral of X_t^2 dt over [0, T]
  double x_terminal = 0.0;
  double horizon = 0.0;
};

PathIntegrals path_integrals(const Path& path);

/// Streaming version of path_integrals for paths that are never materialized.
class PathIntegralAccumulator {
 public:
  PathIntegralAccumulator(double step, double x0);

  void push(double x_next);
  PathIntegrals snapshot() const;
  std::size_t steps() const { return steps_; }

 private:
  double step_;
  double last_;
  double sum_x_ = 0.0;
  double sum_x2_ = 0.0;
  std::size_t steps_ = 0;
};

/// OU drift MLE  -(X_T^2 - T) / (2 int X^2). May be negative.
/// Throws DegenerateDataError when int X^2 = 0.
double mle_ou(const PathIntegrals& integrals);

/// CIR drift MLE  (delta T - X_T) / int X. Throws DegenerateDataError when int X = 0.
double mle_cir(const PathIntegrals& integrals, double delta);

std::vector<double> empirical_mean(const IidBatch& batch);
double empirical_mean_scalar(const IidBatch& batch);

/// Atoms of the batch with weight 1/T each. Scalar batches keep their values as
/// atoms; vector batches use the row index as the atom id.
DiscreteMeasurePair empirical_measure(const IidBatch& batch);

}  // namespace mdpci
