#include "mdpci/baseline.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mdpci {

namespace {

// Wichura (1988), algorithm AS 241, PPND16.
double central_branch(double q) {
  const double r = 0.180625 - q * q;
  return q *
         (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
               6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
             1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
           1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
         (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
               3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
             5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
           4.2313330701600911252e+1) * r + 1.0);
}

// r = sqrt(-log(tail)), tail = min(p, 1 - p) < 0.075. Returns a positive quantile magnitude.
double tail_branch(double r) {
  if (r <= 5.0) {
    r -= 1.6;
    return (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
               3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
             4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
           (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
               6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
             2.05319162663775882187e0) * r + 1.0);
  }
  r -= 5.0;
  return (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
               1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
             2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
           5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
         (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
               1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
             1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
           5.99832206555887937690e-1) * r + 1.0);
}

constexpr double kSplit = 0.425;

}  // namespace

double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "inv_norm_cdf needs 0 < p < 1, got " << p;
    throw DomainError(msg.str());
  }
  const double q = p - 0.5;
  if (std::abs(q) <= kSplit) return central_branch(q);
  const double tail = q < 0.0 ? p : 1.0 - p;
  const double z = tail_branch(std::sqrt(-std::log(tail)));
  return q < 0.0 ? -z : z;
}

double upper_quantile_from_log_tail(double log_tail) {
  if (!(log_tail < 0.0)) throw DomainError("log tail probability must be negative");
  if (log_tail < std::log(0.5 - kSplit)) return tail_branch(std::sqrt(-log_tail));
  // Moderate tails: q = (1 - tail) - 1/2 is formed without loss here.
  return central_branch(-(0.5 + std::expm1(log_tail)));
}

double clt_quantile(const CltSpec& spec, const ScalingSchedule& schedule) {
  if (spec.alpha) {
    const double alpha = *spec.alpha;
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("CLT level alpha must lie in (0, 1)");
    return upper_quantile_from_log_tail(std::log(alpha) - std::numbers::ln2);
  }
  if (schedule.is_zero_radius()) {
    throw DomainError("CLT level exp(-r b_T) needs r > 0 (alpha = 1 is not a level)");
  }
  // log(alpha / 2) with alpha = exp(-r b_T)
  return upper_quantile_from_log_tail(-schedule.rate() * schedule.speed() - std::numbers::ln2);
}

ConfidenceInterval clt_interval_ou(double theta_hat, const ScalingSchedule& schedule,
                                   const CltSpec& spec) {
  const auto method = SolverMethod::CltOu;
  const double z = clt_quantile(spec, schedule);
  if (!(theta_hat > 0.0)) return ConfidenceInterval::infeasible(method, schedule);
  const double j_hat = 0.5 / theta_hat;
  const double kappa =
      z / (2.0 * std::numbers::sqrt2 * std::pow(theta_hat, 2.5) * std::sqrt(schedule.horizon()));
  return ConfidenceInterval::make(j_hat - kappa, j_hat + kappa, method, schedule);
}

ConfidenceInterval clt_interval_cir(double theta_hat, double delta, double sigma,
                                    const ScalingSchedule& schedule, const CltSpec& spec) {
  const auto method = SolverMethod::CltCir;
  if (!(delta > 0.0) || !(sigma > 0.0)) throw DomainError("CIR delta and sigma must be positive");
  const double z = clt_quantile(spec, schedule);
  if (!(theta_hat > 0.0)) return ConfidenceInterval::infeasible(method, schedule);
  const double j_hat = 0.5 * delta * sigma * sigma / (theta_hat * theta_hat);
  const double kappa = sigma * sigma * sigma * std::sqrt(delta) * z /
                       (std::pow(theta_hat, 2.5) * std::sqrt(schedule.horizon()));
  return ConfidenceInterval::make(j_hat - kappa, j_hat + kappa, method, schedule);
}

ConfidenceInterval clt_interval_generic(double j_hat, const Eigen::VectorXd& grad_j,
                                        const Eigen::MatrixXd& s_hat,
                                        const ScalingSchedule& schedule, const CltSpec& spec) {
  const auto method = SolverMethod::CltGeneric;
  const auto n = grad_j.size();
  if (n == 0 || s_hat.rows() != n || s_hat.cols() != n) {
    throw DomainError("gradient and covariance dimensions differ");
  }
  if (!s_hat.isApprox(s_hat.transpose(), 1e-12) && !s_hat.isZero(0.0)) {
    throw DomainError("CLT covariance must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s_hat, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, s_hat.cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw DomainError("CLT covariance must be positive semidefinite");
  }
  const double z = clt_quantile(spec, schedule);
  const double spread = std::max(0.0, grad_j.dot(s_hat * grad_j));
  const double kappa = z * std::sqrt(spread) / std::sqrt(schedule.horizon());
  if (kappa == 0.0) return ConfidenceInterval::degenerate(j_hat, method, schedule);
  return ConfidenceInterval::make(j_hat - kappa, j_hat + kappa, method, schedule);
}

}  // namespace mdpci
