#include "mdpci/solve.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "mdpci/numerics.hpp"

namespace mdpci {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBracketDoublings = 60;
constexpr int kMaxExpansions = 200;

// Endpoints computed from the feasible set can round a hair past J(theta_hat);
// the exact interval always contains it.
ConfidenceInterval finish(double lower, double upper, double j_hat, SolverMethod method,
                          const ScalingSchedule& schedule) {
  lower = std::min(lower, j_hat);
  upper = std::max(upper, j_hat);
  return ConfidenceInterval::make(lower, upper, method, schedule);
}

}  // namespace

// ---------------------------------------------------------------------------
// Costs
// ---------------------------------------------------------------------------

ScalarCost ScalarCost::identity() {
  return ScalarCost([](double theta) { return theta; }, Monotonicity::Increasing);
}

ScalarCost ScalarCost::ou_variance() {
  return ScalarCost([](double theta) { return 0.5 / theta; }, Monotonicity::Decreasing);
}

ScalarCost ScalarCost::cir_variance(double delta, double sigma) {
  if (!(delta > 0.0) || !(sigma > 0.0)) throw DomainError("CIR delta and sigma must be positive");
  const double scale = 0.5 * delta * sigma * sigma;
  return ScalarCost([scale](double theta) { return scale / (theta * theta); },
                    Monotonicity::Decreasing);
}

ScalarCost ScalarCost::custom(std::function<double(double)> cost, Monotonicity direction) {
  if (!cost) throw DomainError("custom cost needs an evaluator");
  return ScalarCost(std::move(cost), direction);
}

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck
// ---------------------------------------------------------------------------

ConfidenceInterval ou_interval(double theta_hat, const ScalingSchedule& schedule) {
  const auto method = SolverMethod::OuClosedForm;
  if (!(theta_hat > 0.0)) return ConfidenceInterval::infeasible(method, schedule);
  const double j_hat = 0.5 / theta_hat;
  if (schedule.is_zero_radius()) return ConfidenceInterval::degenerate(j_hat, method, schedule);

  // Feasible drifts are the roots of (theta_hat - theta)^2 = 2 r_T theta. Their
  // product is theta_hat^2, so theta_min = theta_hat^2 / theta_max avoids
  // cancellation; this is the same as J(theta_hat) + kappa^{+-}.
  const double r = schedule.scaled_radius();
  const double root = std::sqrt(r * r + 2.0 * theta_hat * r);
  const double theta_max = theta_hat + r + root;
  const double lower = 0.5 / theta_max;
  const double upper = theta_max / (2.0 * theta_hat * theta_hat);
  return finish(lower, upper, j_hat, method, schedule);
}

// ---------------------------------------------------------------------------
// Cox-Ingersoll-Ross
// ---------------------------------------------------------------------------

ConfidenceInterval cir_interval(double theta_hat, CirParameters params,
                                const ScalingSchedule& schedule) {
  const auto method = SolverMethod::CirClosedForm;
  if (!(params.delta > 0.0) || !(params.sigma > 0.0)) {
    throw DomainError("CIR delta and sigma must be positive");
  }
  if (!(theta_hat > 0.0)) return ConfidenceInterval::infeasible(method, schedule);
  const double scale = 0.5 * params.delta * params.sigma * params.sigma;
  const double j_hat = scale / (theta_hat * theta_hat);
  if (schedule.is_zero_radius()) return ConfidenceInterval::degenerate(j_hat, method, schedule);

  const double c = params.sigma * params.sigma * schedule.scaled_radius() / params.delta;
  const double theta_max = theta_hat + c + std::sqrt(c * c + 2.0 * theta_hat * c);
  const double ratio = theta_max / (theta_hat * theta_hat);  // = 1 / theta_min
  const double lower = scale / (theta_max * theta_max);
  const double upper = scale * ratio * ratio;
  return finish(lower, upper, j_hat, method, schedule);
}

namespace {

// Maximizes a concave dual function on (lo, inf) by doubling out from lo + unit
// until it decreases, then golden section on the resulting bracket.
double maximize_concave_dual(const std::function<double(double)>& gamma, double lo, double unit) {
  double prev = lo;
  double current = lo + unit;
  double g_current = gamma(current);
  double bracket_lo = lo;
  bool bracketed = false;
  for (int k = 0; k < kMaxBracketDoublings; ++k) {
    const double next = lo + unit * std::ldexp(1.0, k + 1);
    const double g_next = gamma(next);
    if (g_next < g_current) {
      bracket_lo = (k == 0) ? lo : prev;
      current = next;
      bracketed = true;
      break;
    }
    prev = current;
    current = next;
    g_current = g_next;
  }
  if (!bracketed) throw ConvergenceError("SDP dual multiplier bracket exceeded 60 doublings");
  const auto best = numerics::golden_section_minimize([&](double l) { return -gamma(l); },
                                                      bracket_lo, current);
  return -best.value;
}

}  // namespace

ConfidenceInterval cir_interval_sdp_dual(double theta_hat, CirParameters params,
                                         const ScalingSchedule& schedule) {
  const auto method = SolverMethod::CirSdpDual;
  if (!(params.delta > 0.0) || !(params.sigma > 0.0)) {
    throw DomainError("CIR delta and sigma must be positive");
  }
  // Strict feasibility of 1/theta_hat (Slater) needs theta_hat > 0.
  if (!(theta_hat > 0.0)) return ConfidenceInterval::infeasible(method, schedule);
  const double half_d = 0.5 * params.delta * params.sigma * params.sigma;
  const double j_hat = half_d / (theta_hat * theta_hat);
  if (schedule.is_zero_radius()) return ConfidenceInterval::degenerate(j_hat, method, schedule);

  const double c = params.sigma * params.sigma * schedule.scaled_radius() / params.delta;
  const double off = theta_hat + c;  // magnitude of the off-diagonal entry per unit lambda
  const double t2 = theta_hat * theta_hat;
  const double unit = half_d / t2;

  // [[ D/2 + l t^2, -l (t + c)], [-l (t + c), l - gamma]] >= 0 ; best gamma for fixed l.
  auto gamma_lower = [&](double l) {
    if (l <= 0.0) return 0.0;
    return l - l * l * off * off / (half_d + l * t2);
  };
  // [[-D/2 + l t^2, -l (t + c)], [-l (t + c), l - gamma]] >= 0 needs l t^2 > D/2.
  auto gamma_upper = [&](double l) {
    const double diag = l * t2 - half_d;
    if (!(diag > 0.0)) return -kInf;
    return l - l * l * off * off / diag;
  };

  const double lower = maximize_concave_dual(gamma_lower, 0.0, unit);
  const double upper = -maximize_concave_dual(gamma_upper, unit, unit);
  return finish(lower, upper, j_hat, method, schedule);
}

// ---------------------------------------------------------------------------
// Scalar families (generic bisection)
// ---------------------------------------------------------------------------

namespace {

void check_declared_monotonicity(const ScalarCost& cost, double lo, double hi) {
  if (cost.monotonicity() == Monotonicity::None || lo == hi) return;
  constexpr int kSamples = 100;
  const double sign = cost.monotonicity() == Monotonicity::Increasing ? 1.0 : -1.0;
  double prev = cost(lo);
  for (int i = 1; i < kSamples; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (kSamples - 1);
    const double value = cost(x);
    const double slack = 1e-12 * std::max({1.0, std::abs(value), std::abs(prev)});
    if (sign * (value - prev) < -slack) {
      throw DomainError("custom cost violates its declared monotonicity on the feasible set");
    }
    prev = value;
  }
}

}  // namespace

ConfidenceInterval scalar_mean_interval(const RateFamily& family, double theta_hat,
                                        const ScalingSchedule& schedule, const ScalarCost& cost) {
  const auto method = SolverMethod::ScalarBisection;
  if (!family.is_scalar()) {
    throw DomainError("scalar_mean_interval needs a scalar family, got '" + family.name() + "'");
  }
  const ParameterDomain dom = family.domain();
  const bool anchored = dom.contains(theta_hat);
  if (schedule.is_zero_radius()) {
    if (!anchored) return ConfidenceInterval::infeasible(method, schedule);
    return ConfidenceInterval::degenerate(cost(theta_hat), method, schedule);
  }

  const double r = schedule.scaled_radius();
  // Feasible iff g <= 0; the variance is extended continuously to finite boundary points.
  auto g = [&](double theta) {
    if (theta < dom.lower || theta > dom.upper) return kInf;
    const double d = theta_hat - theta;
    return d * d - 2.0 * r * family.variance(theta);
  };

  double anchor = theta_hat;
  if (!anchored) {
    // Look for any feasible point inside the domain.
    constexpr int kScan = 1000;
    double best = kInf;
    for (int i = 1; i < kScan; ++i) {
      const double u = static_cast<double>(i) / kScan;
      double x;
      if (std::isfinite(dom.lower) && std::isfinite(dom.upper)) {
        x = dom.lower + u * (dom.upper - dom.lower);
      } else if (std::isfinite(dom.lower)) {
        x = dom.lower + std::max(1.0, std::abs(dom.lower)) * std::pow(10.0, -8.0 + 16.0 * u);
      } else if (std::isfinite(dom.upper)) {
        x = dom.upper - std::max(1.0, std::abs(dom.upper)) * std::pow(10.0, -8.0 + 16.0 * u);
      } else {
        x = theta_hat;
      }
      const double value = g(x);
      if (value < best) {
        best = value;
        anchor = x;
      }
    }
    if (!(best <= 0.0)) return ConfidenceInterval::infeasible(method, schedule);
  }

  auto boundary = [&](double direction) {
    const double limit = direction > 0 ? dom.upper : dom.lower;
    double step = 1e-3 * std::max(1.0, std::abs(anchor));
    for (int k = 0; k < kMaxExpansions; ++k) {
      double probe = anchor + direction * step;
      if (direction * (probe - limit) >= 0.0) probe = limit;
      if (g(probe) > 0.0) {
        return numerics::bisect_boundary(g, anchor, probe).inside;
      }
      if (probe == limit) return limit;
      step *= 2.0;
    }
    std::ostringstream msg;
    msg << "could not bracket the feasible set of family '" << family.name()
        << "' (scaled radius " << r << ")";
    throw ConvergenceError(msg.str());
  };

  const double theta_lo = boundary(-1.0);
  const double theta_hi = boundary(+1.0);

  double lower;
  double upper;
  switch (cost.monotonicity()) {
    case Monotonicity::Increasing:
      check_declared_monotonicity(cost, theta_lo, theta_hi);
      lower = cost(theta_lo);
      upper = cost(theta_hi);
      break;
    case Monotonicity::Decreasing:
      check_declared_monotonicity(cost, theta_lo, theta_hi);
      lower = cost(theta_hi);
      upper = cost(theta_lo);
      break;
    case Monotonicity::None:
    default: {
      const auto min = numerics::golden_section_minimize([&](double t) { return cost(t); },
                                                         theta_lo, theta_hi);
      const auto max = numerics::golden_section_minimize([&](double t) { return -cost(t); },
                                                         theta_lo, theta_hi);
      lower = std::min(min.value, cost(anchor));
      upper = std::max(-max.value, cost(anchor));
      break;
    }
  }
  if (anchored) return finish(lower, upper, cost(theta_hat), method, schedule);
  return ConfidenceInterval::make(lower, upper, method, schedule);
}

// ---------------------------------------------------------------------------
// Gaussian mean with affine cost
// ---------------------------------------------------------------------------

ConfidenceInterval gaussian_affine_interval(const Eigen::VectorXd& theta_hat,
                                            const Eigen::MatrixXd& covariance,
                                            const AffineCost& cost,
                                            const ScalingSchedule& schedule) {
  const auto method = SolverMethod::GaussianAffine;
  const auto n = theta_hat.size();
  if (n == 0 || covariance.rows() != n || covariance.cols() != n || cost.c.size() != n) {
    throw DomainError("dimension mismatch between estimate, covariance and cost");
  }
  if (!covariance.isApprox(covariance.transpose(), 1e-12)) {
    throw DomainError("covariance must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw DomainError("covariance must be positive definite");
  if (cost.c.isZero(0.0)) throw DomainError("affine cost needs a nonzero gradient c");

  const double j_hat = cost.c.dot(theta_hat) + cost.d;
  if (schedule.is_zero_radius()) return ConfidenceInterval::degenerate(j_hat, method, schedule);
  const double spread = cost.c.dot(covariance * cost.c);
  const double half_width = std::sqrt(2.0 * schedule.scaled_radius() * spread);
  return ConfidenceInterval::make(j_hat - half_width, j_hat + half_width, method, schedule);
}

// ---------------------------------------------------------------------------
// Non-parametric chi-square DRO
// ---------------------------------------------------------------------------

namespace {

double dual_objective(double alpha, std::span<const double> losses, double r) {
  double sum = 0.0;
  for (double l : losses) {
    double arg = alpha - l;
    if (arg < 0.0) {
      if (arg < -1e-12 * std::max(1.0, std::abs(l))) {
        throw InternalError("dual objective evaluated below the worst-case loss");
      }
      arg = 0.0;
    }
    sum += std::sqrt(arg);
  }
  const double m = sum / static_cast<double>(losses.size());
  return alpha - m * m / (2.0 * r + 1.0);
}

}  // namespace

double dro_dual_upper(std::span<const double> losses, const ScalingSchedule& schedule) {
  if (losses.empty()) throw DomainError("dro_dual_upper needs at least one loss");
  const double n = static_cast<double>(losses.size());
  const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / n;
  if (schedule.is_zero_radius()) return mean;
  const auto [min_it, max_it] = std::minmax_element(losses.begin(), losses.end());
  const double worst = *max_it;
  if (*min_it == worst) return worst;

  const double r = schedule.scaled_radius();
  const double alpha_hi = worst + (worst - mean) / (2.0 * r);
  auto f = [&](double alpha) { return dual_objective(alpha, losses, r); };
  const auto best = numerics::golden_section_minimize(f, worst, alpha_hi);

#ifndef NDEBUG
  constexpr int kGuardPoints = 10000;
  for (int i = 0; i <= kGuardPoints; ++i) {
    const double alpha = worst + (alpha_hi - worst) * static_cast<double>(i) / kGuardPoints;
    if (f(alpha) < best.value - 1e-9 * std::max(1.0, std::abs(best.value))) {
      throw InternalError("golden-section result beaten by dense grid; dual not unimodal?");
    }
  }
#endif
  return best.value;
}

double dro_dual_lower(std::span<const double> losses, const ScalingSchedule& schedule) {
  std::vector<double> negated(losses.size());
  std::transform(losses.begin(), losses.end(), negated.begin(), [](double l) { return -l; });
  return -dro_dual_upper(negated, schedule);
}

ConfidenceInterval dro_interval(std::span<const double> losses, const ScalingSchedule& schedule) {
  if (losses.empty()) throw DomainError("dro_interval needs at least one loss");
  const double mean =
      std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
  if (schedule.is_zero_radius()) {
    return ConfidenceInterval::degenerate(mean, SolverMethod::DroDual, schedule);
  }
  return finish(dro_dual_lower(losses, schedule), dro_dual_upper(losses, schedule), mean,
                SolverMethod::DroDual, schedule);
}

ConfidenceInterval stochastic_program_interval(const Eigen::MatrixXd& losses,
                                               const ScalingSchedule& schedule) {
  const auto method = SolverMethod::StochasticProgramDual;
  if (losses.rows() < 1 || losses.cols() < 1) {
    throw DomainError("loss matrix needs at least one sample and one decision");
  }
  double j_hat = kInf;
  double lower = kInf;
  double upper = kInf;
  std::vector<double> column(static_cast<std::size_t>(losses.rows()));
  for (Eigen::Index z = 0; z < losses.cols(); ++z) {
    for (Eigen::Index t = 0; t < losses.rows(); ++t) column[static_cast<std::size_t>(t)] = losses(t, z);
    j_hat = std::min(j_hat, losses.col(z).mean());
    if (schedule.is_zero_radius()) continue;
    upper = std::min(upper, dro_dual_upper(column, schedule));
    lower = std::min(lower, dro_dual_lower(column, schedule));
  }
  if (schedule.is_zero_radius()) return ConfidenceInterval::degenerate(j_hat, method, schedule);
  return finish(lower, upper, j_hat, method, schedule);
}

}  // namespace mdpci
