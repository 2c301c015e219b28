#include "mdpci/rates.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mdpci {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSimplexTolerance = 1e-10;

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " must be positive and finite, got " << value;
    throw DomainError(msg.str());
  }
}

}  // namespace

RateFamily RateFamily::normal(Eigen::MatrixXd covariance) {
  if (covariance.rows() == 0 || covariance.rows() != covariance.cols()) {
    throw DomainError("normal covariance must be a nonempty square matrix");
  }
  if (!covariance.isApprox(covariance.transpose(), 1e-12)) {
    throw DomainError("normal covariance must be symmetric");
  }
  RateFamily family(FamilyKind::NormalMultivariate);
  family.factor_.compute(covariance);
  if (family.factor_.info() != Eigen::Success) {
    throw DomainError("normal covariance must be positive definite");
  }
  family.covariance_ = std::move(covariance);
  return family;
}

RateFamily RateFamily::normal_scalar(double variance) {
  require_positive(variance, "normal variance");
  Eigen::MatrixXd sigma(1, 1);
  sigma(0, 0) = variance;
  return normal(std::move(sigma));
}

RateFamily RateFamily::exponential() { return RateFamily(FamilyKind::Exponential); }

RateFamily RateFamily::gamma(double scale_nu) {
  require_positive(scale_nu, "gamma scale nu");
  RateFamily family(FamilyKind::Gamma);
  family.nu_ = scale_nu;
  return family;
}

RateFamily RateFamily::poisson() { return RateFamily(FamilyKind::Poisson); }

RateFamily RateFamily::bernoulli() { return RateFamily(FamilyKind::Bernoulli); }

RateFamily RateFamily::binomial(int trials) {
  if (trials < 1) throw DomainError("binomial trial count m must be a positive integer");
  RateFamily family(FamilyKind::Binomial);
  family.trials_ = trials;
  return family;
}

RateFamily RateFamily::geometric() { return RateFamily(FamilyKind::Geometric); }

RateFamily RateFamily::ornstein_uhlenbeck() { return RateFamily(FamilyKind::OrnsteinUhlenbeck); }

RateFamily RateFamily::cox_ingersoll_ross(double delta, double sigma) {
  require_positive(delta, "CIR delta");
  require_positive(sigma, "CIR sigma");
  RateFamily family(FamilyKind::CoxIngersollRoss);
  family.delta_ = delta;
  family.sigma_ = sigma;
  return family;
}

RateFamily RateFamily::nonparametric_chi2() { return RateFamily(FamilyKind::NonParamChi2); }

std::string RateFamily::name() const {
  switch (kind_) {
    case FamilyKind::NormalMultivariate: return "normal";
    case FamilyKind::Exponential: return "exponential";
    case FamilyKind::Gamma: return "gamma";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::Bernoulli: return "bernoulli";
    case FamilyKind::Binomial: return "binomial";
    case FamilyKind::Geometric: return "geometric";
    case FamilyKind::OrnsteinUhlenbeck: return "ou";
    case FamilyKind::CoxIngersollRoss: return "cir";
    case FamilyKind::NonParamChi2: return "nonparam";
  }
  return "unknown";
}

bool RateFamily::is_scalar() const {
  switch (kind_) {
    case FamilyKind::NormalMultivariate: return covariance_.rows() == 1;
    case FamilyKind::NonParamChi2: return false;
    default: return true;
  }
}

std::size_t RateFamily::dimension() const {
  if (kind_ == FamilyKind::NormalMultivariate) return static_cast<std::size_t>(covariance_.rows());
  if (kind_ == FamilyKind::NonParamChi2) return 0;
  return 1;
}

ParameterDomain RateFamily::domain() const {
  switch (kind_) {
    case FamilyKind::NormalMultivariate: return {-kInf, kInf};
    case FamilyKind::Bernoulli: return {0.0, 1.0};
    case FamilyKind::Binomial: return {0.0, static_cast<double>(trials_)};
    case FamilyKind::Geometric: return {1.0, kInf};
    case FamilyKind::NonParamChi2: return {0.0, 1.0};
    default: return {0.0, kInf};
  }
}

double RateFamily::variance(double theta) const {
  switch (kind_) {
    case FamilyKind::NormalMultivariate:
      if (covariance_.rows() != 1) throw DomainError("variance(theta) needs a scalar family");
      return covariance_(0, 0);
    case FamilyKind::Exponential: return theta * theta;
    case FamilyKind::Gamma: return theta * nu_;
    case FamilyKind::Poisson: return theta;
    case FamilyKind::Bernoulli: return theta * (1.0 - theta);
    case FamilyKind::Binomial: return theta * (1.0 - theta / static_cast<double>(trials_));
    case FamilyKind::Geometric: return theta * (theta - 1.0);
    case FamilyKind::OrnsteinUhlenbeck: return theta;
    case FamilyKind::CoxIngersollRoss: return sigma_ * sigma_ * theta / delta_;
    case FamilyKind::NonParamChi2: break;
  }
  throw DomainError("variance(theta) is undefined for the non-parametric family");
}

double eval_rate(const RateFamily& family, double theta, double vartheta) {
  if (!family.is_scalar()) {
    throw DomainError("scalar eval_rate called on family '" + family.name() + "'");
  }
  if (!family.in_domain(theta)) {
    std::ostringstream msg;
    msg << "theta = " << theta << " outside the parameter domain of family '" << family.name()
        << "'";
    throw DomainError(msg.str());
  }
  if (vartheta == 0.0) return 0.0;
  return 0.5 * vartheta * vartheta / family.variance(theta);
}

double eval_rate(const RateFamily& family, const Eigen::VectorXd& theta,
                 const Eigen::VectorXd& vartheta) {
  switch (family.kind()) {
    case FamilyKind::NormalMultivariate: {
      if (vartheta.size() != family.covariance().rows()) {
        throw DomainError("deviation dimension does not match the covariance");
      }
      const Eigen::VectorXd solved = family.covariance_factor().solve(vartheta);
      return 0.5 * vartheta.dot(solved);
    }
    case FamilyKind::NonParamChi2: {
      if (theta.size() != vartheta.size() || theta.size() == 0) {
        throw DomainError("measure and deviation must be nonempty and of equal length");
      }
      double mass = 0.0;
      double deviation_mass = 0.0;
      for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (theta[i] < 0.0) throw DomainError("reference measure has a negative weight");
        mass += theta[i];
        deviation_mass += vartheta[i];
      }
      if (std::abs(mass - 1.0) > kSimplexTolerance) {
        throw DomainError("reference measure does not sum to one");
      }
      if (std::abs(deviation_mass) > kSimplexTolerance) return kInf;
      double total = 0.0;
      for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (vartheta[i] == 0.0) continue;
        if (theta[i] == 0.0) return kInf;  // not absolutely continuous
        total += vartheta[i] * vartheta[i] / theta[i];
      }
      return 0.5 * total;
    }
    default:
      if (theta.size() != 1 || vartheta.size() != 1) {
        throw DomainError("scalar family expects length-1 vectors");
      }
      return eval_rate(family, theta[0], vartheta[0]);
  }
}

double chi2_divergence(std::span<const double> weights) {
  if (weights.empty()) throw DomainError("chi2 divergence of an empty measure");
  double mass = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw DomainError("weights must be finite and nonnegative");
    mass += w;
  }
  if (std::abs(mass - 1.0) > kSimplexTolerance) {
    std::ostringstream msg;
    msg << "weights must sum to one (got " << mass << ")";
    throw DomainError(msg.str());
  }
  const double reference = 1.0 / static_cast<double>(weights.size());
  double total = 0.0;
  for (double w : weights) {
    if (w == 0.0) return kInf;
    const double d = w - reference;
    total += d * d / w;
  }
  return total;
}

double chi2_divergence(const DiscreteMeasurePair& pair) { return chi2_divergence(pair.weights); }

bool sublevel_contains(const RateFamily& family, double theta, double vartheta, double level) {
  return eval_rate(family, theta, vartheta) <= level;
}

bool sublevel_contains(const RateFamily& family, const Eigen::VectorXd& theta,
                       const Eigen::VectorXd& vartheta, double level) {
  return eval_rate(family, theta, vartheta) <= level;
}

}  // namespace mdpci
