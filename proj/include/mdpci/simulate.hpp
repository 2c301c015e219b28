#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "mdpci/core.hpp"
#include "mdpci/model.hpp"

namespace mdpci {

/// One reproducible random stream: (master seed, stream id). Monte Carlo
/// replication k uses stream id k.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

using Engine = std::mt19937_64;

/// Engine seeded from both halves of seed and stream through std::seed_seq.
Engine make_engine(RngSpec spec);

/// Default grid step for diffusion paths.
inline constexpr double kDefaultStep = 0.05;

/// Number of grid steps covering [0, horizon]; throws DomainError unless
/// horizon / step is an integer up to rounding.
std::size_t step_count(double horizon, double step);

/// T draws from the family with mean model.theta.
IidBatch sample_iid(const IidMeanModel& model, std::size_t count, RngSpec rng);

/// Exact Gaussian transition of the OU process over one step h.
class OuTransition {
 public:
  OuTransition(double theta, double step);

  double advance(double x, Engine& engine);

  double decay() const { return decay_; }
  double noise_sd() const { return noise_sd_; }

 private:
  double decay_;
  double noise_sd_;
  std::normal_distribution<double> normal_;
};

enum class CirScheme {
  Exact,           // noncentral chi-square transition
  TruncatedEuler,  // Euler-Maruyama with max(X, 0) under the root; cross-check only
};

/// One-step transition of the CIR process.
class CirTransition {
 public:
  CirTransition(double delta, double sigma, double theta, double step,
                CirScheme scheme = CirScheme::Exact);

  double advance(double x, Engine& engine);

 private:
  double delta_;
  double sigma_;
  double theta_;
  double step_;
  CirScheme scheme_;
  double degrees_of_freedom_;
  double scale_;
  double noncentrality_factor_;
  std::normal_distribution<double> normal_;
};

/// Noncentral chi-square draw as a Poisson mixture of central chi-squares.
double sample_noncentral_chi2(double degrees_of_freedom, double noncentrality, Engine& engine);

Path simulate_ou(double theta, double horizon, double step, RngSpec rng);

Path simulate_cir(double delta, double sigma, double theta, double horizon, double step,
                  RngSpec rng, CirScheme scheme = CirScheme::Exact);

}  // namespace mdpci
