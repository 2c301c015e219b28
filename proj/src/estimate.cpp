#include "mdpci/estimate.hpp"

#include <cmath>

namespace mdpci {

PathIntegrals path_integrals(const Path& path) {
  validate(path);
  PathIntegralAccumulator acc(path.step, path.values.front());
  for (std::size_t i = 1; i < path.values.size(); ++i) acc.push(path.values[i]);
  return acc.snapshot();
}

PathIntegralAccumulator::PathIntegralAccumulator(double step, double x0)
    : step_(step), last_(x0) {
  if (!(step > 0.0)) throw DomainError("path step must be positive");
}

void PathIntegralAccumulator::push(double x_next) {
  sum_x_ += 0.5 * (last_ + x_next);
  sum_x2_ += 0.5 * (last_ * last_ + x_next * x_next);
  last_ = x_next;
  ++steps_;
}

PathIntegrals PathIntegralAccumulator::snapshot() const {
  if (steps_ == 0) throw DomainError("path needs at least two points");
  return PathIntegrals{step_ * sum_x_, step_ * sum_x2_, last_,
                       step_ * static_cast<double>(steps_)};
}

double mle_ou(const PathIntegrals& integrals) {
  if (!(integrals.int_x2 > 0.0)) {
    throw DegenerateDataError("OU MLE undefined: integral of X^2 vanishes");
  }
  const double xt = integrals.x_terminal;
  return -(xt * xt - integrals.horizon) / (2.0 * integrals.int_x2);
}

double mle_cir(const PathIntegrals& integrals, double delta) {
  if (integrals.int_x == 0.0) {
    throw DegenerateDataError("CIR MLE undefined: integral of X vanishes");
  }
  return (delta * integrals.horizon - integrals.x_terminal) / integrals.int_x;
}

std::vector<double> empirical_mean(const IidBatch& batch) {
  validate(batch);
  const std::size_t n = batch.count();
  std::vector<double> mean(batch.dimension, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = batch.row(i);
    for (std::size_t k = 0; k < batch.dimension; ++k) mean[k] += row[k];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  return mean;
}

double empirical_mean_scalar(const IidBatch& batch) {
  if (batch.dimension != 1) throw DomainError("scalar mean requested for a vector batch");
  return empirical_mean(batch)[0];
}

DiscreteMeasurePair empirical_measure(const IidBatch& batch) {
  validate(batch);
  const std::size_t n = batch.count();
  DiscreteMeasurePair pair;
  pair.weights.assign(n, 1.0 / static_cast<double>(n));
  if (batch.dimension == 1) {
    pair.atoms = batch.values;
  } else {
    pair.atoms.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pair.atoms.push_back(static_cast<double>(i));
  }
  return pair;
}

}  // namespace mdpci
