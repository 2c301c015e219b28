#include "mdpci/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

namespace mdpci {

namespace {

void check_horizon_and_beta(double horizon, double beta) {
  if (!(horizon > 1.0) || !std::isfinite(horizon)) {
    std::ostringstream msg;
    msg << "schedule horizon must satisfy T > 1, got " << horizon;
    throw DomainError(msg.str());
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    std::ostringstream msg;
    msg << "speed exponent must lie in (0, 1), got " << beta;
    throw DomainError(msg.str());
  }
}

}  // namespace

ScalingSchedule::ScalingSchedule(double horizon, double beta, double rate)
    : horizon_(horizon),
      beta_(beta),
      rate_(rate),
      speed_(std::pow(horizon, beta)),
      scale_(std::pow(horizon, 0.5 * (1.0 - beta))),
      scaled_radius_(rate * std::pow(horizon, beta - 1.0)) {}

ScalingSchedule ScalingSchedule::make(double horizon, double beta, double rate) {
  check_horizon_and_beta(horizon, beta);
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    std::ostringstream msg;
    msg << "error rate must satisfy r > 0, got " << rate;
    throw DomainError(msg.str());
  }
  return ScalingSchedule(horizon, beta, rate);
}

ScalingSchedule ScalingSchedule::zero_radius(double horizon, double beta) {
  check_horizon_and_beta(horizon, beta);
  return ScalingSchedule(horizon, beta, 0.0);
}

ScalingSchedule ScalingSchedule::for_scaled_radius(double horizon, double beta,
                                                   double scaled_radius) {
  check_horizon_and_beta(horizon, beta);
  if (!(scaled_radius >= 0.0) || !std::isfinite(scaled_radius)) {
    throw DomainError("scaled radius must be finite and nonnegative");
  }
  if (scaled_radius == 0.0) return ScalingSchedule(horizon, beta, 0.0);
  ScalingSchedule s(horizon, beta, scaled_radius * std::pow(horizon, 1.0 - beta));
  // Pin r_T exactly to the requested value so callers can reason about it.
  s.scaled_radius_ = scaled_radius;
  return s;
}

ScalingSchedule make_schedule(double horizon, double beta, double rate) {
  return ScalingSchedule::make(horizon, beta, rate);
}

IidBatch make_batch(std::vector<double> values, std::size_t dimension) {
  IidBatch batch{dimension, std::move(values)};
  validate(batch);
  return batch;
}

Path make_path(std::vector<double> values, double step) {
  Path path{step, std::move(values)};
  validate(path);
  return path;
}

void validate(const IidBatch& batch) {
  if (batch.dimension == 0) throw DomainError("batch dimension must be positive");
  if (batch.values.empty()) throw DomainError("batch must be nonempty");
  if (batch.values.size() % batch.dimension != 0) {
    throw DomainError("batch size is not a multiple of its dimension");
  }
  for (double v : batch.values) {
    if (!std::isfinite(v)) throw DomainError("batch values must be finite");
  }
}

void validate(const Path& path) {
  if (!(path.step > 0.0) || !std::isfinite(path.step)) {
    throw DomainError("path step must be positive");
  }
  if (path.values.size() < 2) throw DomainError("path needs at least two points");
  for (double v : path.values) {
    if (!std::isfinite(v)) throw DomainError("path values must be finite");
  }
}

std::string_view to_string(IntervalStatus status) {
  switch (status) {
    case IntervalStatus::Feasible: return "Feasible";
    case IntervalStatus::Infeasible: return "Infeasible";
    case IntervalStatus::Degenerate: return "Degenerate";
  }
  return "Unknown";
}

std::string_view to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::OuClosedForm: return "ou-closed-form";
    case SolverMethod::CirClosedForm: return "cir-closed-form";
    case SolverMethod::CirSdpDual: return "cir-sdp-dual";
    case SolverMethod::ScalarBisection: return "scalar-bisection";
    case SolverMethod::GaussianAffine: return "gaussian-affine";
    case SolverMethod::DroDual: return "dro-dual";
    case SolverMethod::StochasticProgramDual: return "stochastic-program-dual";
    case SolverMethod::CltOu: return "clt-ou";
    case SolverMethod::CltCir: return "clt-cir";
    case SolverMethod::CltGeneric: return "clt-generic";
    case SolverMethod::FixedOffset: return "fixed-offset";
    case SolverMethod::GridOracle: return "grid-oracle";
  }
  return "unknown";
}

ConfidenceInterval ConfidenceInterval::make(double lower, double upper, SolverMethod method,
                                            std::optional<ScalingSchedule> schedule) {
  if (!(lower <= upper)) {
    throw InternalError("interval endpoints out of order");
  }
  return ConfidenceInterval{lower, upper, IntervalStatus::Feasible, method, schedule};
}

ConfidenceInterval ConfidenceInterval::degenerate(double value, SolverMethod method,
                                                  std::optional<ScalingSchedule> schedule) {
  return ConfidenceInterval{value, value, IntervalStatus::Degenerate, method, schedule};
}

ConfidenceInterval ConfidenceInterval::infeasible(SolverMethod method,
                                                  std::optional<ScalingSchedule> schedule) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return ConfidenceInterval{nan, nan, IntervalStatus::Infeasible, method, schedule};
}

void ExperimentResult::sort_rows() {
  std::stable_sort(rows.begin(), rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
    return std::tie(a.horizon, a.variant, a.stat) < std::tie(b.horizon, b.variant, b.stat);
  });
}

const ExperimentRow* ExperimentResult::find(double horizon, std::string_view variant,
                                            std::string_view stat) const {
  for (const auto& row : rows) {
    if (row.horizon == horizon && row.variant == variant && row.stat == stat) return &row;
  }
  return nullptr;
}

}  // namespace mdpci
