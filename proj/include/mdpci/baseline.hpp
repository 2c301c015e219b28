#pragma once

// Central-limit confidence intervals with the heuristic level alpha = exp(-r b_T).

#include <Eigen/Core>
#include <optional>

#include "mdpci/core.hpp"

namespace mdpci {

/// Standard normal quantile (Wichura's AS 241 rational approximations).
/// Throws DomainError unless 0 < p < 1.
double inv_norm_cdf(double p);

/// z with 1 - Phi(z) = exp(log_tail); log_tail must be negative.
/// Works directly from the logarithm so tiny tails never form 1 - tail.
double upper_quantile_from_log_tail(double log_tail);

/// Level specification. Without an explicit alpha the level is exp(-r b_T).
struct CltSpec {
  std::optional<double> alpha;
};

/// Phi^{-1}(1 - alpha / 2) for the given spec and schedule.
double clt_quantile(const CltSpec& spec, const ScalingSchedule& schedule);

ConfidenceInterval clt_interval_ou(double theta_hat, const ScalingSchedule& schedule,
                                   const CltSpec& spec = {});

ConfidenceInterval clt_interval_cir(double theta_hat, double delta, double sigma,
                                    const ScalingSchedule& schedule, const CltSpec& spec = {});

/// [J - k, J + k] with k = Phi^{-1}(1 - alpha/2) sqrt(g' S g) / sqrt(T).
ConfidenceInterval clt_interval_generic(double j_hat, const Eigen::VectorXd& grad_j,
                                        const Eigen::MatrixXd& s_hat,
                                        const ScalingSchedule& schedule,
                                        const CltSpec& spec = {});

}  // namespace mdpci
