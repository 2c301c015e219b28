#include "mdpci/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "mdpci/solve.hpp"

namespace mdpci::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ScanState {
  double min_cost = kInf;
  double max_cost = -kInf;
  double argmin = 0.0;
  double argmax = 0.0;
  std::size_t feasible = 0;
};

void scan(const RateFamily& family, const std::function<double(double)>& cost, double theta_hat,
          double scale, double rate, double lo, double hi, std::size_t points, ScanState& state) {
  const double span = hi - lo;
  const double denom = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double theta = lo + span * (static_cast<double>(i) / denom);
    if (!family.in_domain(theta)) continue;
    if (eval_rate(family, theta, scale * (theta_hat - theta)) > rate) continue;
    ++state.feasible;
    const double value = cost(theta);
    if (value < state.min_cost) {
      state.min_cost = value;
      state.argmin = theta;
    }
    if (value > state.max_cost) {
      state.max_cost = value;
      state.argmax = theta;
    }
  }
}

double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

GridOracleResult grid_interval_oracle(const RateFamily& family,
                                      const std::function<double(double)>& cost,
                                      double theta_hat, const ScalingSchedule& schedule,
                                      const ThetaGrid& grid) {
  if (!family.is_scalar()) throw DomainError("grid oracle needs a scalar family");
  if (grid.points < 1000) throw DomainError("grid oracle needs at least 1000 points");
  if (!(grid.lo < grid.hi)) throw DomainError("grid oracle needs lo < hi");

  const double scale = schedule.scale();
  const double rate = schedule.rate();
  ScanState state;
  scan(family, cost, theta_hat, scale, rate, grid.lo, grid.hi, grid.points, state);
  const std::size_t base_feasible = state.feasible;
  const auto method = SolverMethod::GridOracle;
  if (base_feasible == 0) {
    return {ConfidenceInterval::infeasible(method, schedule), 0, true};
  }

  double cell = (grid.hi - grid.lo) / static_cast<double>(grid.points - 1);
  for (int level = 0; level < grid.refinements; ++level) {
    const double centers[2] = {state.argmin, state.argmax};
    for (double center : centers) {
      const double lo = std::max(grid.lo, center - cell);
      const double hi = std::min(grid.hi, center + cell);
      if (lo < hi) {
        scan(family, cost, theta_hat, scale, rate, lo, hi, std::max<std::size_t>(grid.refine_points, 3),
             state);
      }
    }
    cell = 2.0 * cell / static_cast<double>(std::max<std::size_t>(grid.refine_points, 3) - 1);
  }

  ConfidenceInterval interval =
      schedule.is_zero_radius()
          ? ConfidenceInterval::degenerate(state.min_cost, method, schedule)
          : ConfidenceInterval::make(state.min_cost, state.max_cost, method, schedule);
  return {interval, base_feasible, base_feasible < 10};
}

DroBounds simplex_dro_oracle(std::span<const double> losses, const ScalingSchedule& schedule,
                             std::size_t resolution) {
  const std::size_t n = losses.size();
  if (n < 1 || n > 4) throw DomainError("simplex oracle supports 1 <= T <= 4");
  if (resolution < 200) throw DomainError("simplex oracle needs resolution k >= 200");
  const double radius = 2.0 * schedule.scaled_radius();
  const double k = static_cast<double>(resolution);
  const double reference = 1.0 / static_cast<double>(n);

  // term[m] = (m/k - 1/T)^2 / (m/k); m = 0 is never feasible.
  std::vector<double> term(resolution + 1);
  term[0] = kInf;
  for (std::size_t m = 1; m <= resolution; ++m) {
    const double w = static_cast<double>(m) / k;
    term[m] = (w - reference) * (w - reference) / w;
  }

  // Expected losses are accumulated in integer units of 1/k to keep ties exact.
  double lo = kInf;
  double hi = -kInf;
  std::size_t counts[4] = {0, 0, 0, 0};
  // Tolerance absorbs rounding for points that sit exactly on the sphere (e.g. uniform weights).
  const double limit = radius + 1e-14;

  auto visit = [&](auto&& self, std::size_t index, std::size_t remaining, double divergence) -> void {
    if (index + 1 == n) {
      const double d = divergence + term[remaining];
      if (d > limit) return;
      counts[index] = remaining;
      double value = 0.0;
      for (std::size_t t = 0; t < n; ++t) value += static_cast<double>(counts[t]) * losses[t];
      value /= k;
      lo = std::min(lo, value);
      hi = std::max(hi, value);
      return;
    }
    for (std::size_t m = 1; m + (n - index - 1) <= remaining; ++m) {
      const double d = divergence + term[m];
      if (d > limit) continue;
      counts[index] = m;
      self(self, index + 1, remaining - m, d);
    }
  };
  visit(visit, 0, resolution, 0.0);

  if (!(lo <= hi)) throw DomainError("no simplex grid point inside the chi-square ball");
  return {lo, hi};
}

namespace {

// Worst-case expected loss by nested bisection on the multipliers of the
// chi-square constrained primal. u = lambda + eta - max(l) > 0.
double multiplier_upper(std::span<const double> losses, double radius) {
  const std::size_t n = losses.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto [min_it, max_it] = std::minmax_element(losses.begin(), losses.end());
  const double worst = *max_it;
  const double spread = worst - *min_it;
  if (spread == 0.0) return worst;

  std::vector<double> gap(n);
  for (std::size_t t = 0; t < n; ++t) gap[t] = worst - losses[t];
  std::vector<double> weights(n);

  auto fill_weights = [&](double lambda, double u) {
    double total = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      weights[t] = inv_n * std::sqrt(lambda / (u + gap[t]));
      total += weights[t];
    }
    return total;
  };

  // Normalized weights for a given lambda (inner bisection on u so that the weights sum to one).
  auto solve_weights = [&](double lambda) {
    double u_hi = lambda;  // total <= 1 here
    double u_lo = lambda;
    int guard = 0;
    while (fill_weights(lambda, u_lo) < 1.0) {
      u_lo *= 0.25;
      if (++guard > 2000) throw ConvergenceError("multiplier oracle: inner bracket failed");
    }
    for (int it = 0; it < 300; ++it) {
      const double mid = std::sqrt(u_lo * u_hi);
      if (!(mid > u_lo && mid < u_hi)) break;
      if (fill_weights(lambda, mid) >= 1.0) {
        u_lo = mid;
      } else {
        u_hi = mid;
      }
      if (u_hi - u_lo <= 1e-16 * u_hi) break;
    }
    const double total = fill_weights(lambda, std::sqrt(u_lo * u_hi));
    for (double& w : weights) w /= total;
  };

  auto divergence = [&](double lambda) {
    solve_weights(lambda);
    double d = 0.0;
    for (double w : weights) d += (w - inv_n) * (w - inv_n) / w;
    return d;
  };

  double lambda_lo = spread;
  double lambda_hi = spread;
  int guard = 0;
  while (divergence(lambda_hi) > radius) {
    lambda_hi *= 2.0;
    if (++guard > 2000) throw ConvergenceError("multiplier oracle: lambda bracket failed");
  }
  while (divergence(lambda_lo) < radius) {
    lambda_lo *= 0.5;
    if (++guard > 4000) throw ConvergenceError("multiplier oracle: lambda bracket failed");
  }
  bool converged = false;
  for (int it = 0; it < 300; ++it) {
    const double mid = std::sqrt(lambda_lo * lambda_hi);
    if (!(mid > lambda_lo && mid < lambda_hi) || lambda_hi - lambda_lo <= 1e-15 * lambda_hi) {
      converged = true;
      break;
    }
    if (divergence(mid) > radius) {
      lambda_lo = mid;
    } else {
      lambda_hi = mid;
    }
  }
  if (!converged) throw ConvergenceError("multiplier oracle: 300 outer iterations exceeded");
  solve_weights(std::sqrt(lambda_lo * lambda_hi));
  double value = 0.0;
  for (std::size_t t = 0; t < n; ++t) value += weights[t] * losses[t];
  return value;
}

}  // namespace

DroBounds multiplier_dro_oracle(std::span<const double> losses, const ScalingSchedule& schedule) {
  if (losses.empty()) throw DomainError("multiplier oracle needs at least one loss");
  if (!(schedule.scaled_radius() > 0.0)) throw DomainError("multiplier oracle needs r_T > 0");
  const double radius = 2.0 * schedule.scaled_radius();
  std::vector<double> negated(losses.size());
  std::transform(losses.begin(), losses.end(), negated.begin(), [](double l) { return -l; });
  return {-multiplier_upper(negated, radius), multiplier_upper(losses, radius)};
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

namespace {

double log_uniform(std::mt19937_64& engine, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(engine));
}

}  // namespace

std::vector<ScalarInstance> ou_corpus(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> theta(0.05, 2.0);
  std::vector<ScalarInstance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = theta(engine);
    out.push_back({t, log_uniform(engine, 1e-6, 1e-2)});
  }
  return out;
}

std::vector<CirInstance> cir_corpus(std::uint64_t seed, std::size_t count, bool nonpositive) {
  std::mt19937_64 engine(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> theta_pos(0.2, 3.0);
  std::uniform_real_distribution<double> theta_neg(-2.0, 0.0);
  std::uniform_real_distribution<double> delta(1.0, 10.0);
  std::uniform_real_distribution<double> sigma(0.5, 3.0);
  std::vector<CirInstance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    CirInstance inst{};
    inst.theta_hat = nonpositive ? theta_neg(engine) : theta_pos(engine);
    inst.delta = delta(engine);
    inst.sigma = sigma(engine);
    inst.scaled_radius = log_uniform(engine, 1e-6, 1e-2);
    out.push_back(inst);
  }
  if (nonpositive && !out.empty()) out.front().theta_hat = 0.0;
  return out;
}

std::vector<DroInstance> dro_corpus(std::uint64_t seed, std::size_t count, std::size_t length) {
  std::mt19937_64 engine(seed ^ 0xd1b54a32d192ed03ULL);
  std::uniform_real_distribution<double> loss(-1.0, 2.0);
  std::uniform_real_distribution<double> radius(0.01, 0.5);
  std::vector<DroInstance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    DroInstance inst;
    inst.losses.resize(length);
    for (double& l : inst.losses) l = loss(engine);
    inst.scaled_radius = radius(engine);
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<DroInstance> small_dro_corpus() {
  return {
      {{0.0, 1.0}, 0.25},
      {{3.0}, 0.1},
      {{0.4, 0.6}, 0.25},
      {{-1.0, 2.0}, 0.05},
      {{0.0, 1.0, 0.5}, 0.2},
      {{2.0, -0.5, 1.0}, 0.02},
      {{5.0, 5.0, 5.0}, 0.3},
      {{0.0, 1.0, 2.0, 3.0}, 0.1},
      {{1.5, -0.2, 0.7, 0.7}, 0.04},
  };
}

// ---------------------------------------------------------------------------
// Cross-validation driver
// ---------------------------------------------------------------------------

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

constexpr double kHorizon = 1.0e4;

ScalingSchedule schedule_for(double scaled_radius) {
  return ScalingSchedule::for_scaled_radius(kHorizon, kDefaultBeta, scaled_radius);
}

void track(CheckResult& check, double error) {
  ++check.instances;
  if (!(error <= check.max_error)) check.max_error = std::isnan(error) ? kInf : std::max(check.max_error, error);
}

}  // namespace

std::vector<CheckResult> run_cross_validation(const CorpusOptions& options) {
  std::vector<CheckResult> results;
  const auto ou = ou_corpus(options.seed, options.instances);
  const auto cir = cir_corpus(options.seed, options.instances, false);
  const auto cir_bad = cir_corpus(options.seed + 1, std::max<std::size_t>(options.instances / 4, 1), true);
  const auto ou_family = RateFamily::ornstein_uhlenbeck();

  {
    Stopwatch clock;
    CheckResult vs_grid{"ou closed form vs grid oracle", 0, 0.0, 1e-6};
    CheckResult vs_generic{"ou closed form vs scalar bisection", 0, 0.0, 1e-10};
    for (const auto& inst : ou) {
      const auto schedule = schedule_for(inst.scaled_radius);
      const auto closed = ou_interval(inst.theta_hat, schedule);
      const auto grid = grid_interval_oracle(
          ou_family, [](double t) { return 0.5 / t; }, inst.theta_hat, schedule,
          ThetaGrid{inst.theta_hat / 10.0, inst.theta_hat * 4.0, options.grid_points, 2});
      track(vs_grid, std::max(relative_gap(closed.lower, grid.interval.lower),
                              relative_gap(closed.upper, grid.interval.upper)));
      const auto generic =
          scalar_mean_interval(ou_family, inst.theta_hat, schedule, ScalarCost::ou_variance());
      track(vs_generic, std::max(relative_gap(closed.lower, generic.lower),
                                 relative_gap(closed.upper, generic.upper)));
    }
    vs_grid.seconds = vs_generic.seconds = clock.seconds();
    results.push_back(vs_grid);
    results.push_back(vs_generic);
  }

  {
    Stopwatch clock;
    CheckResult vs_dual{"cir closed form vs SDP dual", 0, 0.0, 1e-6};
    CheckResult vs_grid{"cir closed form vs grid oracle", 0, 0.0, 1e-6};
    CheckResult infeasible{"cir infeasible for theta_hat <= 0 (both routes)", 0, 0.0, 0.0};
    for (const auto& inst : cir) {
      const auto schedule = schedule_for(inst.scaled_radius);
      const CirParameters params{inst.delta, inst.sigma};
      const auto closed = cir_interval(inst.theta_hat, params, schedule);
      const auto dual = cir_interval_sdp_dual(inst.theta_hat, params, schedule);
      track(vs_dual, std::max(relative_gap(closed.lower, dual.lower),
                              relative_gap(closed.upper, dual.upper)));
      const auto family = RateFamily::cox_ingersoll_ross(inst.delta, inst.sigma);
      const double scale = 0.5 * inst.delta * inst.sigma * inst.sigma;
      const auto grid = grid_interval_oracle(
          family, [scale](double t) { return scale / (t * t); }, inst.theta_hat, schedule,
          ThetaGrid{inst.theta_hat / 10.0, inst.theta_hat * 4.0, options.grid_points, 2});
      track(vs_grid, std::max(relative_gap(closed.lower, grid.interval.lower),
                              relative_gap(closed.upper, grid.interval.upper)));
    }
    for (const auto& inst : cir_bad) {
      const auto schedule = schedule_for(inst.scaled_radius);
      const CirParameters params{inst.delta, inst.sigma};
      const bool ok =
          cir_interval(inst.theta_hat, params, schedule).status == IntervalStatus::Infeasible &&
          cir_interval_sdp_dual(inst.theta_hat, params, schedule).status ==
              IntervalStatus::Infeasible;
      track(infeasible, ok ? 0.0 : 1.0);
    }
    vs_dual.seconds = vs_grid.seconds = infeasible.seconds = clock.seconds();
    results.push_back(vs_dual);
    results.push_back(vs_grid);
    results.push_back(infeasible);
  }

  {
    Stopwatch clock;
    CheckResult vs_simplex{"dro dual vs simplex oracle (T <= 4)", 0, 0.0, 2e-3};
    for (const auto& inst : small_dro_corpus()) {
      const auto schedule = schedule_for(inst.scaled_radius);
      const auto bounds = simplex_dro_oracle(inst.losses, schedule, options.simplex_resolution);
      track(vs_simplex, std::max(std::abs(dro_dual_upper(inst.losses, schedule) - bounds.upper),
                                 std::abs(dro_dual_lower(inst.losses, schedule) - bounds.lower)));
    }
    vs_simplex.seconds = clock.seconds();
    results.push_back(vs_simplex);
  }

  {
    Stopwatch clock;
    CheckResult vs_multiplier{"dro dual vs multiplier oracle", 0, 0.0, 1e-8};
    for (const auto& inst : dro_corpus(options.seed, options.dro_instances, options.dro_length)) {
      const auto schedule = schedule_for(inst.scaled_radius);
      const auto bounds = multiplier_dro_oracle(inst.losses, schedule);
      track(vs_multiplier,
            std::max(relative_gap(dro_dual_upper(inst.losses, schedule), bounds.upper),
                     relative_gap(dro_dual_lower(inst.losses, schedule), bounds.lower)));
    }
    vs_multiplier.seconds = clock.seconds();
    results.push_back(vs_multiplier);
  }

  {
    Stopwatch clock;
    CheckResult families{"scalar families bisection vs grid oracle", 0, 0.0, 1e-6};
    std::mt19937_64 engine(options.seed + 7);
    std::uniform_real_distribution<double> unit(0.2, 0.8);
    const std::vector<RateFamily> list = {
        RateFamily::normal_scalar(2.0), RateFamily::exponential(), RateFamily::gamma(1.5),
        RateFamily::poisson(),          RateFamily::bernoulli(),   RateFamily::binomial(10),
        RateFamily::geometric()};
    for (const auto& family : list) {
      for (int rep = 0; rep < 5; ++rep) {
        const auto dom = family.domain();
        const double u = unit(engine);
        double theta_hat = u * 4.0;
        if (family.kind() == FamilyKind::Bernoulli) theta_hat = u;
        if (family.kind() == FamilyKind::Binomial) theta_hat = u * family.trials();
        if (family.kind() == FamilyKind::Geometric) theta_hat = 1.0 + u * 4.0;
        const auto schedule = schedule_for(log_uniform(engine, 1e-5, 1e-3));
        const auto generic =
            scalar_mean_interval(family, theta_hat, schedule, ScalarCost::identity());
        const double width = generic.upper - generic.lower;
        double lo = theta_hat - 2.0 * width;
        double hi = theta_hat + 2.0 * width;
        if (std::isfinite(dom.lower)) lo = std::max(lo, dom.lower);
        if (std::isfinite(dom.upper)) hi = std::min(hi, dom.upper);
        const auto grid = grid_interval_oracle(family, [](double t) { return t; }, theta_hat,
                                               schedule, ThetaGrid{lo, hi, options.grid_points, 2});
        track(families, std::max(relative_gap(generic.lower, grid.interval.lower),
                                 relative_gap(generic.upper, grid.interval.upper)));
      }
    }
    families.seconds = clock.seconds();
    results.push_back(families);
  }

  for (auto& r : results) r.passed = r.instances > 0 && r.max_error <= r.tolerance;
  return results;
}

}  // namespace mdpci::oracle
