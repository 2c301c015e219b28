#pragma once

// Moderate-deviation rate functions I_theta(vartheta).
//
// Convention: every i.i.d. mean family uses I(v) = 1/2 v' C(theta)^{-1} v with
// C(theta) the variance of one observation. This carries the factor 1/2 of the
// Cramer-type moderate deviation theorem for empirical means; the OU and CIR
// rates already have that form with effective variances theta and
// sigma^2 theta / delta respectively.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "mdpci/core.hpp"

namespace mdpci {

enum class FamilyKind {
  NormalMultivariate,
  Exponential,
  Gamma,
  Poisson,
  Bernoulli,
  Binomial,
  Geometric,
  OrnsteinUhlenbeck,
  CoxIngersollRoss,
  NonParamChi2,
};

/// Open parameter interval (lower, upper) of a scalar family.
struct ParameterDomain {
  double lower;
  double upper;

  bool contains(double theta) const { return theta > lower && theta < upper; }
};

class RateFamily {
 public:
  /// Multivariate normal with known covariance; the Cholesky factor is computed here once.
  static RateFamily normal(Eigen::MatrixXd covariance);
  static RateFamily normal_scalar(double variance);
  static RateFamily exponential();
  static RateFamily gamma(double scale_nu);
  static RateFamily poisson();
  static RateFamily bernoulli();
  static RateFamily binomial(int trials);
  static RateFamily geometric();
  static RateFamily ornstein_uhlenbeck();
  static RateFamily cox_ingersoll_ross(double delta, double sigma);
  static RateFamily nonparametric_chi2();

  FamilyKind kind() const { return kind_; }
  std::string name() const;

  /// True for families whose parameter is a single real.
  bool is_scalar() const;
  std::size_t dimension() const;

  ParameterDomain domain() const;
  bool in_domain(double theta) const { return domain().contains(theta); }

  /// C(theta): variance of the MDP limit for scalar families. Defined on the
  /// closure of the domain (vanishes on finite boundary points).
  double variance(double theta) const;

  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::LLT<Eigen::MatrixXd>& covariance_factor() const { return factor_; }

  double nu() const { return nu_; }
  int trials() const { return trials_; }
  double delta() const { return delta_; }
  double sigma() const { return sigma_; }

 private:
  explicit RateFamily(FamilyKind kind) : kind_(kind) {}

  FamilyKind kind_;
  Eigen::MatrixXd covariance_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  double nu_ = 0.0;
  int trials_ = 0;
  double delta_ = 0.0;
  double sigma_ = 0.0;
};

/// Candidate reweighting of T sample atoms against the empirical measure (weights 1/T).
struct DiscreteMeasurePair {
  std::vector<double> atoms;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Rate of a scalar family at model point theta and deviation vartheta.
/// Returns +inf where the rate is infinite. Throws DomainError when theta is
/// outside the family's parameter domain.
double eval_rate(const RateFamily& family, double theta, double vartheta);

/// Vector form. NormalMultivariate ignores theta; NonParamChi2 reads theta as the
/// candidate weights and vartheta as a signed measure on the same atoms;
/// scalar families accept length-1 vectors.
double eval_rate(const RateFamily& family, const Eigen::VectorXd& theta,
                 const Eigen::VectorXd& vartheta);

/// sum_t (w_t - 1/T)^2 / w_t, or +inf if some w_t = 0.
double chi2_divergence(std::span<const double> weights);
double chi2_divergence(const DiscreteMeasurePair& pair);

bool sublevel_contains(const RateFamily& family, double theta, double vartheta, double level);
bool sublevel_contains(const RateFamily& family, const Eigen::VectorXd& theta,
                       const Eigen::VectorXd& vartheta, double level);

}  // namespace mdpci
