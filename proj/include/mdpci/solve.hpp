#pragma once

// Optimal interval endpoints
//
//   lower = inf { J(theta) : I_theta(a_T (theta_hat - theta)) <= r }
//   upper = sup { J(theta) : I_theta(a_T (theta_hat - theta)) <= r }
//
// for each supported model, with closed forms where available and 1-D
// bracketing / golden-section numerics otherwise.

#include <Eigen/Core>
#include <functional>
#include <span>

#include "mdpci/core.hpp"
#include "mdpci/rates.hpp"

namespace mdpci {

enum class Monotonicity { Increasing, Decreasing, None };

/// Scalar cost functional J(theta).
class ScalarCost {
 public:
  static ScalarCost identity();
  /// 1 / (2 theta), decreasing on theta > 0.
  static ScalarCost ou_variance();
  /// delta sigma^2 / (2 theta^2), decreasing on theta > 0.
  static ScalarCost cir_variance(double delta, double sigma);
  /// User cost with a declared monotonicity; None selects golden-section extremum search.
  static ScalarCost custom(std::function<double(double)> cost, Monotonicity direction);

  double operator()(double theta) const { return cost_(theta); }
  Monotonicity monotonicity() const { return direction_; }

 private:
  ScalarCost(std::function<double(double)> cost, Monotonicity direction)
      : cost_(std::move(cost)), direction_(direction) {}

  std::function<double(double)> cost_;
  Monotonicity direction_;
};

/// J(theta) = c . theta + d.
struct AffineCost {
  Eigen::VectorXd c;
  double d = 0.0;
};

struct CirParameters {
  double delta;
  double sigma;
};

ConfidenceInterval ou_interval(double theta_hat, const ScalingSchedule& schedule);

ConfidenceInterval cir_interval(double theta_hat, CirParameters params,
                                const ScalingSchedule& schedule);

/// Same interval via the Lagrangian dual of the two 2x2 semidefinite programs.
ConfidenceInterval cir_interval_sdp_dual(double theta_hat, CirParameters params,
                                         const ScalingSchedule& schedule);

/// Generic solver for scalar families: bisection on
/// g(theta) = (theta_hat - theta)^2 - 2 r_T C(theta).
ConfidenceInterval scalar_mean_interval(const RateFamily& family, double theta_hat,
                                        const ScalingSchedule& schedule, const ScalarCost& cost);

ConfidenceInterval gaussian_affine_interval(const Eigen::VectorXd& theta_hat,
                                            const Eigen::MatrixXd& covariance,
                                            const AffineCost& cost,
                                            const ScalingSchedule& schedule);

/// Worst-case expected loss over the chi-square ball of radius 2 r_T around the
/// empirical measure. Returns the sample mean when r_T = 0.
double dro_dual_upper(std::span<const double> losses, const ScalingSchedule& schedule);
/// Best-case counterpart, computed as -dro_dual_upper(-losses).
double dro_dual_lower(std::span<const double> losses, const ScalingSchedule& schedule);

ConfidenceInterval dro_interval(std::span<const double> losses, const ScalingSchedule& schedule);

/// Rows are samples, columns are decisions z. Both endpoints take the minimum
/// over z of the per-decision dual bound.
ConfidenceInterval stochastic_program_interval(const Eigen::MatrixXd& losses,
                                               const ScalingSchedule& schedule);

}  // namespace mdpci
