#include "mdpci/simulate.hpp"

#include <cmath>
#include <sstream>

namespace mdpci {

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " must be positive, got " << value;
    throw DomainError(msg.str());
  }
}

void check_iid_parameters(const IidMeanModel& model) {
  const auto& family = model.family;
  if (model.theta.size() != family.dimension() || model.theta.empty()) {
    throw DomainError("mean vector does not match the family dimension");
  }
  const double theta = model.theta[0];
  auto fail = [&](const char* what) {
    std::ostringstream msg;
    msg << family.name() << " sampling: " << what << " (theta = " << theta << ")";
    throw DomainError(msg.str());
  };
  switch (family.kind()) {
    case FamilyKind::NormalMultivariate: break;
    case FamilyKind::Exponential:
    case FamilyKind::Gamma:
      if (!(theta > 0.0)) fail("mean must be positive");
      break;
    case FamilyKind::Poisson:
      if (!(theta > 0.0)) fail("lambda > 0 required");
      break;
    case FamilyKind::Bernoulli:
      if (!(theta >= 0.0 && theta <= 1.0)) fail("success probability must lie in [0, 1]");
      break;
    case FamilyKind::Binomial:
      if (!(theta >= 0.0 && theta <= family.trials())) fail("mean must lie in [0, m]");
      break;
    case FamilyKind::Geometric:
      if (!(theta >= 1.0)) fail("mean 1/p must be at least 1");
      break;
    default:
      throw DomainError("sample_iid does not support family '" + family.name() + "'");
  }
}

}  // namespace

Engine make_engine(RngSpec spec) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(spec.stream),
                    static_cast<std::uint32_t>(spec.stream >> 32)};
  return Engine(seq);
}

std::size_t step_count(double horizon, double step) {
  require_positive(step, "path step h");
  require_positive(horizon, "path horizon T");
  const double ratio = horizon / step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "horizon " << horizon << " is not an integer multiple of step " << step;
    throw DomainError(msg.str());
  }
  return static_cast<std::size_t>(rounded);
}

IidBatch sample_iid(const IidMeanModel& model, std::size_t count, RngSpec rng) {
  if (count < 1) throw DomainError("sample count must be at least 1");
  check_iid_parameters(model);
  const auto& family = model.family;
  Engine engine = make_engine(rng);
  IidBatch batch;
  batch.dimension = family.dimension();
  batch.values.reserve(count * batch.dimension);
  const double theta = model.theta[0];

  switch (family.kind()) {
    case FamilyKind::NormalMultivariate: {
      const Eigen::MatrixXd lower = family.covariance_factor().matrixL();
      const auto dim = static_cast<Eigen::Index>(batch.dimension);
      std::normal_distribution<double> normal;
      Eigen::VectorXd z(dim);
      for (std::size_t i = 0; i < count; ++i) {
        for (Eigen::Index k = 0; k < dim; ++k) z[k] = normal(engine);
        const Eigen::VectorXd x = lower * z;
        for (Eigen::Index k = 0; k < dim; ++k) {
          batch.values.push_back(model.theta[static_cast<std::size_t>(k)] + x[k]);
        }
      }
      break;
    }
    case FamilyKind::Exponential: {
      std::exponential_distribution<double> dist(1.0 / theta);
      for (std::size_t i = 0; i < count; ++i) batch.values.push_back(dist(engine));
      break;
    }
    case FamilyKind::Gamma: {
      std::gamma_distribution<double> dist(theta / family.nu(), family.nu());
      for (std::size_t i = 0; i < count; ++i) batch.values.push_back(dist(engine));
      break;
    }
    case FamilyKind::Poisson: {
      std::poisson_distribution<long long> dist(theta);
      for (std::size_t i = 0; i < count; ++i) {
        batch.values.push_back(static_cast<double>(dist(engine)));
      }
      break;
    }
    case FamilyKind::Bernoulli: {
      std::bernoulli_distribution dist(theta);
      for (std::size_t i = 0; i < count; ++i) batch.values.push_back(dist(engine) ? 1.0 : 0.0);
      break;
    }
    case FamilyKind::Binomial: {
      std::binomial_distribution<int> dist(family.trials(), theta / family.trials());
      for (std::size_t i = 0; i < count; ++i) {
        batch.values.push_back(static_cast<double>(dist(engine)));
      }
      break;
    }
    case FamilyKind::Geometric: {
      if (theta == 1.0) {
        batch.values.assign(count, 1.0);
        break;
      }
      // Support {1, 2, ...}; std::geometric_distribution counts failures.
      std::geometric_distribution<long long> dist(1.0 / theta);
      for (std::size_t i = 0; i < count; ++i) {
        batch.values.push_back(1.0 + static_cast<double>(dist(engine)));
      }
      break;
    }
    default:
      throw DomainError("unsupported family");
  }
  return batch;
}

OuTransition::OuTransition(double theta, double step)
    : decay_(0.0), noise_sd_(0.0) {
  require_positive(theta, "OU theta");
  require_positive(step, "path step h");
  decay_ = std::exp(-theta * step);
  noise_sd_ = std::sqrt(-std::expm1(-2.0 * theta * step) / (2.0 * theta));
}

double OuTransition::advance(double x, Engine& engine) {
  return decay_ * x + noise_sd_ * normal_(engine);
}

double sample_noncentral_chi2(double degrees_of_freedom, double noncentrality, Engine& engine) {
  long long mixing = 0;
  if (noncentrality > 0.0) {
    std::poisson_distribution<long long> poisson(0.5 * noncentrality);
    mixing = poisson(engine);
  }
  const double shape = 0.5 * degrees_of_freedom + static_cast<double>(mixing);
  std::gamma_distribution<double> gamma(shape, 2.0);
  return gamma(engine);
}

CirTransition::CirTransition(double delta, double sigma, double theta, double step,
                             CirScheme scheme)
    : delta_(delta), sigma_(sigma), theta_(theta), step_(step), scheme_(scheme) {
  require_positive(delta, "CIR delta");
  require_positive(sigma, "CIR sigma");
  require_positive(theta, "CIR theta");
  require_positive(step, "path step h");
  const double one_minus_decay = -std::expm1(-theta * step);
  degrees_of_freedom_ = 4.0 * delta / (sigma * sigma);
  scale_ = sigma * sigma * one_minus_decay / (4.0 * theta);
  noncentrality_factor_ = std::exp(-theta * step) / scale_;
}

double CirTransition::advance(double x, Engine& engine) {
  if (scheme_ == CirScheme::Exact) {
    return scale_ * sample_noncentral_chi2(degrees_of_freedom_, noncentrality_factor_ * x, engine);
  }
  const double root = std::sqrt(std::max(x, 0.0));
  const double next = x + (delta_ - theta_ * x) * step_ +
                      sigma_ * root * std::sqrt(step_) * normal_(engine);
  return std::max(next, 0.0);
}

Path simulate_ou(double theta, double horizon, double step, RngSpec rng) {
  OuTransition transition(theta, step);
  const std::size_t n = step_count(horizon, step);
  Engine engine = make_engine(rng);
  Path path{step, {}};
  path.values.reserve(n + 1);
  double x = 0.0;
  path.values.push_back(x);
  for (std::size_t i = 0; i < n; ++i) {
    x = transition.advance(x, engine);
    path.values.push_back(x);
  }
  return path;
}

Path simulate_cir(double delta, double sigma, double theta, double horizon, double step,
                  RngSpec rng, CirScheme scheme) {
  CirTransition transition(delta, sigma, theta, step, scheme);
  const std::size_t n = step_count(horizon, step);
  Engine engine = make_engine(rng);
  Path path{step, {}};
  path.values.reserve(n + 1);
  double x = 0.0;
  path.values.push_back(x);
  for (std::size_t i = 0; i < n; ++i) {
    x = transition.advance(x, engine);
    if (x < 0.0) throw InternalError("CIR transition produced a negative value");
    path.values.push_back(x);
  }
  return path;
}

}  // namespace mdpci
