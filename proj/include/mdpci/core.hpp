#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mdpci {

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Data that makes an estimator undefined (e.g. a path that is identically zero).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A numerical self-check failed; indicates a bug rather than bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Scaling schedule
// ---------------------------------------------------------------------------

/// Speed/scale bookkeeping for a horizon T with power speed b_T = T^beta.
///
/// Holds the error rate r and the derived quantities
///   a_T = sqrt(T / b_T),   r_T = r * b_T / T = r / a_T^2.
/// Immutable once built.
class ScalingSchedule {
 public:
  /// Requires T > 1, 0 < beta < 1, r > 0.
  static ScalingSchedule make(double horizon, double beta, double rate);

  /// Same horizon/speed with r = 0; every solver returns a degenerate interval for it.
  static ScalingSchedule zero_radius(double horizon, double beta);

  /// Picks r so that the scaled radius equals `scaled_radius` (>= 0).
  static ScalingSchedule for_scaled_radius(double horizon, double beta, double scaled_radius);

  double horizon() const { return horizon_; }
  double beta() const { return beta_; }
  double rate() const { return rate_; }
  /// b_T
  double speed() const { return speed_; }
  /// a_T
  double scale() const { return scale_; }
  /// r_T
  double scaled_radius() const { return scaled_radius_; }

  bool is_zero_radius() const { return rate_ == 0.0; }

  friend bool operator==(const ScalingSchedule&, const ScalingSchedule&) = default;

 private:
  ScalingSchedule(double horizon, double beta, double rate);

  double horizon_;
  double beta_;
  double rate_;
  double speed_;
  double scale_;
  double scaled_radius_;
};

ScalingSchedule make_schedule(double horizon, double beta, double rate);

/// Speed exponent used throughout the reference experiments.
inline constexpr double kDefaultBeta = 5.0 / 11.0;

// ---------------------------------------------------------------------------
// Sample data
// ---------------------------------------------------------------------------

/// I.i.d. observations, stored row-major (count x dimension).
struct IidBatch {
  std::size_t dimension = 1;
  std::vector<double> values;

  std::size_t count() const { return dimension == 0 ? 0 : values.size() / dimension; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * dimension, dimension);
  }
};

/// A diffusion path sampled on the uniform grid t_i = i * step, t_0 = 0.
struct Path {
  double step = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double time(std::size_t i) const { return static_cast<double>(i) * step; }
  double horizon() const { return values.empty() ? 0.0 : time(values.size() - 1); }
};

using SampleData = std::variant<IidBatch, Path>;

IidBatch make_batch(std::vector<double> values, std::size_t dimension = 1);
Path make_path(std::vector<double> values, double step);

/// Throws DomainError unless the batch is nonempty and well shaped.
void validate(const IidBatch& batch);
/// Throws DomainError unless step > 0 and the path has at least two points.
void validate(const Path& path);

// ---------------------------------------------------------------------------
// Confidence intervals
// ---------------------------------------------------------------------------

enum class IntervalStatus { Feasible, Infeasible, Degenerate };

enum class SolverMethod {
  OuClosedForm,
  CirClosedForm,
  CirSdpDual,
  ScalarBisection,
  GaussianAffine,
  DroDual,
  StochasticProgramDual,
  CltOu,
  CltCir,
  CltGeneric,
  FixedOffset,
  GridOracle,
};

std::string_view to_string(IntervalStatus status);
std::string_view to_string(SolverMethod method);

struct ConfidenceInterval {
  double lower;
  double upper;
  IntervalStatus status;
  SolverMethod method;
  std::optional<ScalingSchedule> schedule;

  bool feasible() const { return status != IntervalStatus::Infeasible; }
  bool contains(double value) const { return feasible() && lower <= value && value <= upper; }
  double width() const { return upper - lower; }

  static ConfidenceInterval make(double lower, double upper, SolverMethod method,
                                 std::optional<ScalingSchedule> schedule = std::nullopt);
  static ConfidenceInterval degenerate(double value, SolverMethod method,
                                       std::optional<ScalingSchedule> schedule = std::nullopt);
  static ConfidenceInterval infeasible(SolverMethod method,
                                       std::optional<ScalingSchedule> schedule = std::nullopt);
};

// ---------------------------------------------------------------------------
// Experiment results
// ---------------------------------------------------------------------------

/// One summary line: statistic `stat` of bound variant `variant` at horizon T.
/// Missing values (e.g. a decay rate when no failure was observed) are nullopt.
struct ExperimentRow {
  double horizon = 0.0;
  std::string variant;
  std::string stat;
  std::optional<double> mean;
  std::optional<double> q10;
  std::optional<double> q90;
  std::size_t count = 0;

  friend bool operator==(const ExperimentRow&, const ExperimentRow&) = default;
};

struct ExperimentMetadata {
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  std::string model;
  double beta = kDefaultBeta;
  double rate = 0.0;

  friend bool operator==(const ExperimentMetadata&, const ExperimentMetadata&) = default;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  ExperimentMetadata metadata;

  /// Sorts rows by (T, variant, stat).
  void sort_rows();
  const ExperimentRow* find(double horizon, std::string_view variant, std::string_view stat) const;
};

}  // namespace mdpci
