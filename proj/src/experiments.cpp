#include "mdpci/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <variant>

#include "mdpci/baseline.hpp"
#include "mdpci/estimate.hpp"
#include "mdpci/solve.hpp"

namespace mdpci {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Normal quantile for a central 80% band.
constexpr double kZ80 = 1.2815515655446004;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ScalingSchedule schedule_at(const ExperimentConfig& config, double horizon) {
  return config.rate > 0.0 ? ScalingSchedule::make(horizon, config.beta, config.rate)
                           : ScalingSchedule::zero_radius(horizon, config.beta);
}

// J at an estimate, or nullopt where the estimate is outside the model's parameter space.
std::optional<double> estimated_cost(const ModelSpec& model, double theta_hat) {
  return std::visit(
      Overloaded{
          [&](const OuModel&) -> std::optional<double> {
            if (!(theta_hat > 0.0)) return std::nullopt;
            return ou_variance(theta_hat);
          },
          [&](const CirModel& m) -> std::optional<double> {
            if (!(theta_hat > 0.0)) return std::nullopt;
            return cir_variance(theta_hat, m.delta, m.sigma);
          },
          [&](const IidMeanModel&) -> std::optional<double> { return theta_hat; },
          [&](const NonParamIidModel&) -> std::optional<double> {
            throw DomainError("the harness does not simulate non-parametric models");
          },
      },
      model);
}

std::vector<std::size_t> checkpoints(const ExperimentConfig& config) {
  std::vector<std::size_t> out;
  out.reserve(config.horizons.size());
  const bool diffusion =
      std::holds_alternative<OuModel>(config.model) || std::holds_alternative<CirModel>(config.model);
  for (double horizon : config.horizons) {
    if (diffusion) {
      out.push_back(step_count(horizon, config.step));
    } else {
      const double rounded = std::round(horizon);
      if (std::abs(horizon - rounded) > 1e-9 * horizon) {
        throw DomainError("i.i.d. experiments need integer sample sizes in the horizon grid");
      }
      out.push_back(static_cast<std::size_t>(rounded));
    }
  }
  return out;
}

template <class Transition>
void diffusion_estimates(Transition transition, const std::vector<std::size_t>& marks, double step,
                         Engine& engine, const std::function<double(const PathIntegrals&)>& mle,
                         std::vector<double>& out) {
  PathIntegralAccumulator acc(step, 0.0);
  double x = 0.0;
  for (std::size_t k = 0; k < marks.size(); ++k) {
    while (acc.steps() < marks[k]) {
      x = transition.advance(x, engine);
      acc.push(x);
    }
    out[k] = mle(acc.snapshot());
  }
}

std::vector<double> replicate(const ExperimentConfig& config, const std::vector<std::size_t>& marks,
                              std::uint64_t stream) {
  std::vector<double> out(marks.size(), kNaN);
  const RngSpec rng{config.seed, stream};
  std::visit(
      Overloaded{
          [&](const OuModel& m) {
            Engine engine = make_engine(rng);
            diffusion_estimates(OuTransition(m.theta, config.step), marks, config.step, engine,
                                [](const PathIntegrals& p) { return mle_ou(p); }, out);
          },
          [&](const CirModel& m) {
            Engine engine = make_engine(rng);
            diffusion_estimates(CirTransition(m.delta, m.sigma, m.theta, config.step), marks,
                                config.step, engine,
                                [&](const PathIntegrals& p) { return mle_cir(p, m.delta); }, out);
          },
          [&](const IidMeanModel& m) {
            const IidBatch batch = sample_iid(m, marks.back(), rng);
            double sum = 0.0;
            std::size_t taken = 0;
            for (std::size_t k = 0; k < marks.size(); ++k) {
              for (; taken < marks[k]; ++taken) sum += batch.values[taken];
              out[k] = sum / static_cast<double>(marks[k]);
            }
          },
          [&](const NonParamIidModel&) {
            throw DomainError("the harness does not simulate non-parametric models");
          },
      },
      config.model);
  return out;
}

std::string format_kappa(double kappa) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "kappa=%g", kappa);
  return buffer;
}

struct Summary {
  std::optional<double> mean;
  std::optional<double> q10;
  std::optional<double> q90;
};

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  return {sum / static_cast<double>(values.size()), sample_quantile(values, 0.1),
          sample_quantile(values, 0.9)};
}

void add_row(ExperimentResult& result, double horizon, const std::string& variant,
             const std::string& stat, Summary summary, std::size_t count) {
  result.rows.push_back({horizon, variant, stat, summary.mean, summary.q10, summary.q90, count});
}

Summary frequency(std::size_t hits, std::size_t trials) {
  if (trials == 0) return {};
  const auto band = wilson_band(hits, trials, kZ80);
  return {static_cast<double>(hits) / static_cast<double>(trials), band.lower, band.upper};
}

// -log(p) / normalizer, with a lower probability giving a larger rate.
Summary decay(const Summary& probability, double normalizer) {
  auto rate = [normalizer](std::optional<double> p) -> std::optional<double> {
    if (!p || !(*p > 0.0)) return std::nullopt;
    return -std::log(*p) / normalizer;
  };
  return {rate(probability.mean), rate(probability.q90), rate(probability.q10)};
}

ExperimentMetadata metadata_of(const ExperimentConfig& config) {
  return {config.seed, config.replications, model_name(config.model), config.beta, config.rate};
}

}  // namespace

std::string BoundVariant::name() const {
  switch (kind) {
    case Kind::Optimal: return "optimal";
    case Kind::Clt: return "clt";
    case Kind::FixedOffset: return format_kappa(kappa);
  }
  return "unknown";
}

void validate(const ExperimentConfig& config) {
  validate(config.model);
  if (std::holds_alternative<NonParamIidModel>(config.model)) {
    throw DomainError("the harness does not simulate non-parametric models");
  }
  if (const auto* iid = std::get_if<IidMeanModel>(&config.model); iid && !iid->family.is_scalar()) {
    throw DomainError("the harness supports scalar i.i.d. families only");
  }
  if (config.replications < 1) throw DomainError("replications must be at least 1");
  if (config.horizons.empty()) throw DomainError("horizon grid must not be empty");
  for (std::size_t i = 1; i < config.horizons.size(); ++i) {
    if (!(config.horizons[i] > config.horizons[i - 1])) {
      throw DomainError("horizon grid must be strictly increasing");
    }
  }
  if (!(config.rate >= 0.0) || !std::isfinite(config.rate)) {
    throw DomainError("error rate must be finite and nonnegative");
  }
  if (!(config.step > 0.0)) throw DomainError("path step must be positive");
  if (config.variants.empty()) throw DomainError("at least one bound variant is required");
  for (double horizon : config.horizons) (void)schedule_at(config, horizon);
  (void)checkpoints(config);
  for (const auto& v : config.variants) {
    if (v.kind == BoundVariant::Kind::Clt && config.rate == 0.0) {
      throw DomainError("the CLT variant needs r > 0");
    }
    if (v.kind == BoundVariant::Kind::FixedOffset && !std::isfinite(v.kappa)) {
      throw DomainError("offset kappa must be finite");
    }
  }
}

double true_cost(const ModelSpec& model) {
  return std::visit(
      Overloaded{
          [](const OuModel& m) { return ou_variance(m.theta); },
          [](const CirModel& m) { return cir_variance(m.theta, m.delta, m.sigma); },
          [](const IidMeanModel& m) {
            if (m.theta.size() != 1) throw DomainError("true cost needs a scalar mean");
            return m.theta.front();
          },
          [](const NonParamIidModel& m) {
            if (m.losses.empty()) throw DomainError("no losses");
            double sum = 0.0;
            for (double l : m.losses) sum += l;
            return sum / static_cast<double>(m.losses.size());
          },
      },
      model);
}

ConfidenceInterval variant_interval(const ModelSpec& model, const BoundVariant& variant,
                                    double theta_hat, const ScalingSchedule& schedule) {
  using Kind = BoundVariant::Kind;
  if (variant.kind == Kind::FixedOffset) {
    const auto j_hat = estimated_cost(model, theta_hat);
    if (!j_hat || variant.kappa < 0.0) {
      return ConfidenceInterval::infeasible(SolverMethod::FixedOffset, schedule);
    }
    if (variant.kappa == 0.0) {
      return ConfidenceInterval::degenerate(*j_hat, SolverMethod::FixedOffset, schedule);
    }
    return ConfidenceInterval::make(*j_hat - variant.kappa, *j_hat + variant.kappa,
                                    SolverMethod::FixedOffset, schedule);
  }
  return std::visit(
      Overloaded{
          [&](const OuModel&) {
            return variant.kind == Kind::Optimal ? ou_interval(theta_hat, schedule)
                                                 : clt_interval_ou(theta_hat, schedule);
          },
          [&](const CirModel& m) {
            return variant.kind == Kind::Optimal
                       ? cir_interval(theta_hat, {m.delta, m.sigma}, schedule)
                       : clt_interval_cir(theta_hat, m.delta, m.sigma, schedule);
          },
          [&](const IidMeanModel& m) {
            if (variant.kind == Kind::Optimal) {
              return scalar_mean_interval(m.family, theta_hat, schedule, ScalarCost::identity());
            }
            if (!m.family.in_domain(theta_hat)) {
              return ConfidenceInterval::infeasible(SolverMethod::CltGeneric, schedule);
            }
            Eigen::VectorXd grad(1);
            grad << 1.0;
            Eigen::MatrixXd cov(1, 1);
            cov << m.family.variance(theta_hat);
            return clt_interval_generic(theta_hat, grad, cov, schedule);
          },
          [&](const NonParamIidModel&) -> ConfidenceInterval {
            throw DomainError("bound variants need a parametric model");
          },
      },
      model);
}

std::vector<std::vector<double>> simulate_estimates(const ExperimentConfig& config) {
  validate(config);
  const auto marks = checkpoints(config);
  const std::size_t reps = config.replications;
  std::vector<std::vector<double>> estimates(reps);

  unsigned workers = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(reps)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto work = [&] {
    for (std::size_t rep = next++; rep < reps; rep = next++) {
      try {
        estimates[rep] = replicate(config, marks, rep);
      } catch (const Error&) {
        // A failed replication is reported, not fatal.
        estimates[rep].assign(marks.size(), kNaN);
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        estimates[rep].assign(marks.size(), kNaN);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  if (fatal) std::rethrow_exception(fatal);
  return estimates;
}

ExperimentResult run_coverage(const ExperimentConfig& config) {
  const auto estimates = simulate_estimates(config);
  const double truth = true_cost(config.model);
  ExperimentResult result;
  result.metadata = metadata_of(config);

  for (std::size_t k = 0; k < config.horizons.size(); ++k) {
    const double horizon = config.horizons[k];
    const auto schedule = schedule_at(config, horizon);
    for (const auto& variant : config.variants) {
      std::vector<double> lowers, uppers, widths;
      std::size_t ok = 0, failed = 0, infeasible = 0, misses = 0;
      for (const auto& row : estimates) {
        const double theta_hat = row[k];
        if (std::isnan(theta_hat)) {
          ++failed;
          continue;
        }
        ConfidenceInterval interval;
        try {
          interval = variant_interval(config.model, variant, theta_hat, schedule);
        } catch (const Error&) {
          ++failed;
          continue;
        }
        ++ok;
        if (!interval.feasible()) {
          ++infeasible;
          ++misses;
          continue;
        }
        lowers.push_back(interval.lower);
        uppers.push_back(interval.upper);
        widths.push_back(interval.width());
        if (!interval.contains(truth)) ++misses;
      }
      const std::string name = variant.name();
      add_row(result, horizon, name, "lower", summarize(lowers), lowers.size());
      add_row(result, horizon, name, "upper", summarize(uppers), uppers.size());
      add_row(result, horizon, name, "width", summarize(widths), widths.size());
      add_row(result, horizon, name, "miscoverage", frequency(misses, ok), ok);
      add_row(result, horizon, name, "infeasible", {static_cast<double>(infeasible), {}, {}}, ok);
      add_row(result, horizon, name, "failed", {static_cast<double>(failed), {}, {}},
              estimates.size());
    }
  }
  result.sort_rows();
  return result;
}

ExperimentResult run_disappointment(const ExperimentConfig& config) {
  const auto estimates = simulate_estimates(config);
  const double truth = true_cost(config.model);
  ExperimentResult result;
  result.metadata = metadata_of(config);

  for (std::size_t k = 0; k < config.horizons.size(); ++k) {
    const double horizon = config.horizons[k];
    const auto schedule = schedule_at(config, horizon);
    for (const auto& variant : config.variants) {
      std::size_t trials = 0, hits = 0, failed = 0, infeasible = 0;
      for (const auto& row : estimates) {
        const double theta_hat = row[k];
        if (std::isnan(theta_hat)) {
          ++failed;
          continue;
        }
        std::optional<double> upper;
        try {
          if (variant.kind == BoundVariant::Kind::FixedOffset) {
            // Any sign of kappa is meaningful for a one-sided bound.
            if (const auto j_hat = estimated_cost(config.model, theta_hat)) {
              upper = *j_hat + variant.kappa;
            }
          } else {
            const auto interval = variant_interval(config.model, variant, theta_hat, schedule);
            if (interval.feasible()) upper = interval.upper;
          }
        } catch (const Error&) {
          ++failed;
          continue;
        }
        if (!upper) {
          ++infeasible;
          continue;
        }
        ++trials;
        if (truth > *upper) ++hits;
      }
      const std::string name = variant.name();
      const Summary p = frequency(hits, trials);
      add_row(result, horizon, name, "disappointment", p, trials);
      add_row(result, horizon, name, "decay_T", decay(p, horizon), trials);
      add_row(result, horizon, name, "decay_bT", decay(p, schedule.speed()), trials);
      add_row(result, horizon, name, "infeasible", {static_cast<double>(infeasible), {}, {}},
              trials + infeasible);
      add_row(result, horizon, name, "failed", {static_cast<double>(failed), {}, {}},
              estimates.size());
    }
  }
  result.sort_rows();
  return result;
}

double sample_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double position = level * static_cast<double>(values.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(position));
  const std::size_t above = std::min(below + 1, values.size() - 1);
  const double frac = position - static_cast<double>(below);
  if (frac == 0.0) return values[below];
  return values[below] + frac * (values[above] - values[below]);
}

WilsonBand wilson_band(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw DomainError("Wilson band needs at least one trial");
  if (successes > trials) throw DomainError("more successes than trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  const double lower = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double upper = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lower, upper};
}

}  // namespace mdpci
