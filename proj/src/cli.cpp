#include "mdpci/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "mdpci/baseline.hpp"
#include "mdpci/config.hpp"
#include "mdpci/estimate.hpp"
#include "mdpci/experiments.hpp"
#include "mdpci/oracle.hpp"
#include "mdpci/report.hpp"
#include "mdpci/simulate.hpp"
#include "mdpci/solve.hpp"

namespace mdpci::cli {

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "simulate", "estimate", "interval", "experiment coverage", "experiment disappointment",
      "oracle-check", "plot"};
  return names;
}

const std::vector<FlagDoc>& documented_flags() {
  static const std::vector<FlagDoc> flags = [] {
    std::vector<FlagDoc> f = {
        {"simulate", "model", "ou, cir, or an i.i.d. family"},
        {"simulate", "theta", "true parameter (drift or mean)"},
        {"simulate", "delta", "CIR drift level"},
        {"simulate", "sigma", "CIR volatility"},
        {"simulate", "nu", "gamma scale"},
        {"simulate", "m", "binomial trials"},
        {"simulate", "variance", "normal variance (default 1)"},
        {"simulate", "T", "horizon, or sample size for i.i.d. families"},
        {"simulate", "step", "path grid step (default 0.05)"},
        {"simulate", "scheme", "CIR scheme: exact or euler"},
        {"simulate", "seed", "master seed (default MDPCI_SEED or 1)"},
        {"simulate", "out", "output CSV (default standard output)"},

        {"estimate", "model", "ou, cir, or an i.i.d. family"},
        {"estimate", "data", "CSV with header t,x (paths) or i,x (samples)"},
        {"estimate", "delta", "CIR drift level"},

        {"interval", "model", "ou, cir, dro, or an i.i.d. family"},
        {"interval", "theta-hat", "point estimate"},
        {"interval", "data", "CSV to estimate from (excludes --theta-hat)"},
        {"interval", "T", "horizon (defaults to the data length)"},
        {"interval", "beta", "speed exponent, b_T = T^beta (default 5/11)"},
        {"interval", "r", "error rate r >= 0"},
        {"interval", "method", "closed-form, dual, generic or clt"},
        {"interval", "delta", "CIR drift level"},
        {"interval", "sigma", "CIR volatility"},
        {"interval", "nu", "gamma scale"},
        {"interval", "m", "binomial trials"},
        {"interval", "variance", "normal variance (default 1)"},
        {"interval", "alpha", "explicit CLT level (default exp(-r b_T))"},

        {"oracle-check", "seed", "corpus seed"},
        {"oracle-check", "instances", "OU and CIR corpus size (default 200)"},
        {"oracle-check", "grid-points", "grid oracle resolution (default 1000000)"},
        {"oracle-check", "simplex-resolution", "simplex oracle k (default 2000)"},
        {"oracle-check", "dro-instances", "DRO multiplier corpus size (default 100)"},

        {"plot", "in", "experiment CSV"},
        {"plot", "out", "SVG path"},
        {"plot", "spec", "width, endpoints, miscoverage, disappointment, decay or decay-bT"},
    };
    for (const char* sub : {"experiment coverage", "experiment disappointment"}) {
      const std::vector<std::pair<std::string, std::string>> exp = {
          {"config", "key = value file"},
          {"out", "output CSV (default standard output)"},
          {"model", "ou, cir, normal, exponential, poisson, bernoulli or geometric"},
          {"theta", "true parameter"},
          {"delta", "CIR drift level"},
          {"sigma", "CIR volatility"},
          {"beta", "speed exponent"},
          {"r", "error rate"},
          {"t-grid", "comma-separated horizons"},
          {"reps", "replications"},
          {"seed", "master seed"},
          {"step", "path grid step"},
          {"variants", "comma list of optimal, clt"},
          {"kappa-list", "comma list of fixed offsets"},
          {"threads", "worker threads (0 = all cores)"},
      };
      for (const auto& [flag, text] : exp) f.push_back({sub, flag, text});
    }
    return f;
  }();
  return flags;
}

std::string usage(const std::string& subcommand) {
  std::ostringstream out;
  if (subcommand.empty()) {
    out << "usage: mdpci <subcommand> [flags]\n\nsubcommands:\n";
    for (const auto& sub : subcommands()) out << "  " << sub << '\n';
    out << "\nexit codes: 0 success, 1 invalid input, 2 IO error\n";
    out << "environment: MDPCI_SEED sets the default master seed\n";
  }
  for (const auto& sub : subcommands()) {
    if (!subcommand.empty() && sub.rfind(subcommand, 0) != 0 && sub != subcommand) continue;
    out << "\nmdpci " << sub << '\n';
    for (const auto& doc : documented_flags()) {
      if (doc.subcommand != sub) continue;
      std::string name = "--" + doc.flag;
      name.resize(std::max<std::size_t>(name.size(), 22), ' ');
      out << "  " << name << ' ' << doc.description << '\n';
    }
  }
  return out.str();
}

std::optional<CliInvocation> parse_invocation(const std::vector<std::string>& args,
                                              std::ostream& out) {
  CLI::App app{"Moderate-deviation confidence intervals"};
  app.require_subcommand(1);
  app.set_help_flag("-h,--help");

  // storage[subcommand][flag]; map nodes keep addresses stable for CLI11.
  std::map<std::string, std::map<std::string, std::string>> storage;
  std::map<std::string, CLI::App*> apps;
  CLI::App* experiment = app.add_subcommand("experiment", "Monte Carlo studies");
  experiment->require_subcommand(1);
  for (const auto& sub : subcommands()) {
    CLI::App* target = nullptr;
    if (sub.rfind("experiment ", 0) == 0) {
      target = experiment->add_subcommand(sub.substr(11));
    } else {
      target = app.add_subcommand(sub);
    }
    apps[sub] = target;
    for (const auto& doc : documented_flags()) {
      if (doc.subcommand != sub) continue;
      target->add_option("--" + doc.flag, storage[sub][doc.flag], doc.description);
    }
  }
  apps["interval"]->get_option("--theta-hat")->excludes(apps["interval"]->get_option("--data"));

  std::string active;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "experiment") {
      active = "experiment";
      if (i + 1 < args.size() && (args[i + 1] == "coverage" || args[i + 1] == "disappointment")) {
        active += " " + args[i + 1];
      }
      break;
    }
    if (std::find(subcommands().begin(), subcommands().end(), args[i]) != subcommands().end()) {
      active = args[i];
      break;
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << usage(active);
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << usage();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what(), active);
  }

  CliInvocation inv;
  for (const auto& [sub, target] : apps) {
    if (target->parsed()) inv.subcommand = sub;
  }
  if (inv.subcommand.empty()) throw UsageError("a subcommand is required", "");
  const CLI::App* target = apps[inv.subcommand];
  for (const auto& [flag, value] : storage[inv.subcommand]) {
    if (target->get_option("--" + flag)->count() > 0) inv.flags[flag] = value;
  }
  if (auto it = inv.flags.find("config"); it != inv.flags.end()) inv.config_path = it->second;
  if (auto it = inv.flags.find("out"); it != inv.flags.end()) inv.output_path = it->second;
  return inv;
}

namespace {

class Flags {
 public:
  explicit Flags(const CliInvocation& inv) : inv_(inv) {}

  bool has(const std::string& flag) const { return inv_.flags.count(flag) > 0; }

  std::string text(const std::string& flag) const {
    const auto it = inv_.flags.find(flag);
    if (it == inv_.flags.end()) {
      throw UsageError("missing required flag --" + flag, inv_.subcommand);
    }
    return it->second;
  }

  double real(const std::string& flag) const { return parse_real(text(flag), "--" + flag); }
  double real_or(const std::string& flag, double fallback) const {
    return has(flag) ? real(flag) : fallback;
  }
  std::uint64_t count_or(const std::string& flag, std::uint64_t fallback) const {
    return has(flag) ? parse_count(text(flag), "--" + flag) : fallback;
  }

 private:
  const CliInvocation& inv_;
};

std::optional<std::uint64_t> env_seed() {
  const char* value = std::getenv("MDPCI_SEED");
  if (value == nullptr || *value == '\0') return std::nullopt;
  return parse_count(value, "MDPCI_SEED");
}

std::uint64_t resolve_seed(const Flags& flags, std::uint64_t fallback) {
  if (flags.has("seed")) return flags.count_or("seed", fallback);
  if (auto seed = env_seed()) return *seed;
  return fallback;
}

std::optional<RateFamily> iid_family(const std::string& model, const Flags& flags) {
  if (model == "normal") return RateFamily::normal_scalar(flags.real_or("variance", 1.0));
  if (model == "exponential") return RateFamily::exponential();
  if (model == "gamma") return RateFamily::gamma(flags.real("nu"));
  if (model == "poisson") return RateFamily::poisson();
  if (model == "bernoulli") return RateFamily::bernoulli();
  if (model == "binomial") {
    const auto m = parse_count(flags.text("m"), "--m");
    if (m == 0 || m > 1000000000) throw DomainError("--m must be a positive trial count");
    return RateFamily::binomial(static_cast<int>(m));
  }
  if (model == "geometric") return RateFamily::geometric();
  return std::nullopt;
}

// Output sink: a file when --out is given, otherwise standard output.
class Sink {
 public:
  Sink(const std::optional<std::string>& path, std::ostream& fallback) : path_(path) {
    if (path_) {
      file_ = std::make_unique<std::ofstream>(*path_, std::ios::binary | std::ios::trunc);
      if (!*file_) throw IoError("cannot open for writing: " + *path_);
      stream_ = file_.get();
    } else {
      stream_ = &fallback;
    }
  }
  std::ostream& stream() { return *stream_; }
  void close() {
    stream_->flush();
    if (!*stream_) throw IoError("write failed: " + (path_ ? *path_ : std::string("stdout")));
  }

 private:
  std::optional<std::string> path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

struct DataColumns {
  bool is_path = false;
  std::vector<double> index;
  std::vector<double> values;
};

DataColumns read_data(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open data file: " + path);
  std::string line;
  if (!std::getline(file, line)) throw DomainError("data file is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  DataColumns data;
  if (line == "t,x") {
    data.is_path = true;
  } else if (line != "i,x") {
    throw DomainError("data header must be t,x or i,x in " + path);
  }
  std::size_t number = 1;
  while (std::getline(file, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw DomainError(path + " line " + std::to_string(number) + ": expected two fields");
    }
    data.index.push_back(parse_real(line.substr(0, comma), "data index"));
    data.values.push_back(parse_real(line.substr(comma + 1), "data value"));
  }
  if (data.values.empty()) throw DomainError("data file has no rows: " + path);
  return data;
}

Path as_path(const DataColumns& data) {
  if (!data.is_path) throw DomainError("diffusion models need path data with header t,x");
  if (data.values.size() < 2) throw DomainError("a path needs at least two points");
  const double step = data.index[1] - data.index[0];
  if (data.index[0] != 0.0 || !(step > 0.0)) throw DomainError("path times must start at 0 and increase");
  for (std::size_t i = 1; i < data.index.size(); ++i) {
    const double expected = static_cast<double>(i) * step;
    if (std::abs(data.index[i] - expected) > 1e-9 * std::max(1.0, expected)) {
      throw DomainError("path times must be equally spaced");
    }
  }
  return make_path(data.values, step);
}

double estimate_from(const std::string& model, const DataColumns& data, const Flags& flags) {
  if (model == "ou") return mle_ou(path_integrals(as_path(data)));
  if (model == "cir") return mle_cir(path_integrals(as_path(data)), flags.real("delta"));
  if (iid_family(model, flags)) return empirical_mean_scalar(make_batch(data.values));
  throw DomainError("unknown model '" + model + "'");
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
  out << '\n';
}

int cmd_simulate(const CliInvocation& inv, std::ostream& out) {
  const Flags flags(inv);
  const std::string model = flags.text("model");
  const double theta = flags.real("theta");
  const double horizon = flags.real("T");
  const RngSpec rng{resolve_seed(flags, 1), 0};
  Sink sink(inv.output_path, out);
  if (model == "ou" || model == "cir") {
    const double step = flags.real_or("step", kDefaultStep);
    Path path;
    if (model == "ou") {
      path = simulate_ou(theta, horizon, step, rng);
    } else {
      const std::string scheme = flags.has("scheme") ? flags.text("scheme") : "exact";
      if (scheme != "exact" && scheme != "euler") throw DomainError("--scheme must be exact or euler");
      path = simulate_cir(flags.real("delta"), flags.real("sigma"), theta, horizon, step, rng,
                          scheme == "exact" ? CirScheme::Exact : CirScheme::TruncatedEuler);
    }
    sink.stream() << "t,x\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
      write_row(sink.stream(), {format_double(path.time(i)), format_double(path.values[i])});
    }
  } else if (auto family = iid_family(model, flags)) {
    if (!(horizon >= 1.0) || horizon != std::floor(horizon)) {
      throw DomainError("--T must be a positive integer sample size for i.i.d. families");
    }
    const auto batch = sample_iid(IidMeanModel{*family, {theta}}, static_cast<std::size_t>(horizon), rng);
    sink.stream() << "i,x\n";
    for (std::size_t i = 0; i < batch.values.size(); ++i) {
      write_row(sink.stream(), {std::to_string(i), format_double(batch.values[i])});
    }
  } else {
    throw DomainError("unknown model '" + model + "'");
  }
  sink.close();
  return 0;
}

int cmd_estimate(const CliInvocation& inv, std::ostream& out) {
  const Flags flags(inv);
  const std::string model = flags.text("model");
  const auto data = read_data(flags.text("data"));
  out << "theta_hat\n" << format_double(estimate_from(model, data, flags)) << '\n';
  return 0;
}

int cmd_interval(const CliInvocation& inv, std::ostream& out) {
  const Flags flags(inv);
  const std::string model = flags.text("model");
  if (!flags.has("theta-hat") && !flags.has("data")) {
    throw UsageError("one of --theta-hat or --data is required", inv.subcommand);
  }
  std::optional<DataColumns> data;
  if (flags.has("data")) data = read_data(flags.text("data"));

  double horizon = 0.0;
  if (flags.has("T")) {
    horizon = flags.real("T");
  } else if (data) {
    horizon = data->is_path ? data->index.back() : static_cast<double>(data->values.size());
  } else {
    throw UsageError("missing required flag --T", inv.subcommand);
  }
  const double beta = flags.real_or("beta", kDefaultBeta);
  const double rate = flags.real("r");
  const auto schedule = rate == 0.0 ? ScalingSchedule::zero_radius(horizon, beta)
                                    : ScalingSchedule::make(horizon, beta, rate);
  CltSpec clt;
  if (flags.has("alpha")) clt.alpha = flags.real("alpha");

  const std::string default_method =
      model == "ou" || model == "cir" ? "closed-form" : (model == "dro" ? "dual" : "generic");
  const std::string method = flags.has("method") ? flags.text("method") : default_method;
  if (method != "closed-form" && method != "dual" && method != "generic" && method != "clt") {
    throw UsageError("--method must be closed-form, dual, generic or clt", inv.subcommand);
  }
  auto unsupported = [&] {
    return DomainError("method '" + method + "' is not available for model '" + model + "'");
  };

  ConfidenceInterval interval;
  if (model == "dro") {
    if (!data) throw UsageError("model dro needs --data with the observed losses", inv.subcommand);
    if (method != "dual") throw unsupported();
    interval = dro_interval(data->values, schedule);
  } else {
    const double theta_hat =
        data ? estimate_from(model, *data, flags) : flags.real("theta-hat");
    if (model == "ou") {
      if (method == "closed-form") {
        interval = ou_interval(theta_hat, schedule);
      } else if (method == "generic") {
        interval = scalar_mean_interval(RateFamily::ornstein_uhlenbeck(), theta_hat, schedule,
                                        ScalarCost::ou_variance());
      } else if (method == "clt") {
        interval = clt_interval_ou(theta_hat, schedule, clt);
      } else {
        throw unsupported();
      }
    } else if (model == "cir") {
      const CirParameters params{flags.real("delta"), flags.real("sigma")};
      if (method == "closed-form") {
        interval = cir_interval(theta_hat, params, schedule);
      } else if (method == "dual") {
        interval = cir_interval_sdp_dual(theta_hat, params, schedule);
      } else if (method == "generic") {
        interval = scalar_mean_interval(RateFamily::cox_ingersoll_ross(params.delta, params.sigma),
                                        theta_hat, schedule,
                                        ScalarCost::cir_variance(params.delta, params.sigma));
      } else {
        interval = clt_interval_cir(theta_hat, params.delta, params.sigma, schedule, clt);
      }
    } else if (auto family = iid_family(model, flags)) {
      if (method == "generic") {
        interval = scalar_mean_interval(*family, theta_hat, schedule, ScalarCost::identity());
      } else if (method == "closed-form" && family->kind() == FamilyKind::NormalMultivariate) {
        Eigen::VectorXd center(1);
        center << theta_hat;
        Eigen::VectorXd c(1);
        c << 1.0;
        interval = gaussian_affine_interval(center, family->covariance(), AffineCost{c, 0.0}, schedule);
      } else if (method == "clt") {
        if (!family->in_domain(theta_hat)) {
          interval = ConfidenceInterval::infeasible(SolverMethod::CltGeneric, schedule);
        } else {
          Eigen::VectorXd grad(1);
          grad << 1.0;
          Eigen::MatrixXd cov(1, 1);
          cov << family->variance(theta_hat);
          interval = clt_interval_generic(theta_hat, grad, cov, schedule, clt);
        }
      } else {
        throw unsupported();
      }
    } else {
      throw DomainError("unknown model '" + model + "'");
    }
  }

  const bool empty = interval.status == IntervalStatus::Infeasible;
  out << "lower,upper,status,method\n";
  write_row(out, {empty ? "" : format_double(interval.lower),
                  empty ? "" : format_double(interval.upper), std::string(to_string(interval.status)),
                  std::string(to_string(interval.method))});
  return 0;
}

int cmd_experiment(const CliInvocation& inv, std::ostream& out) {
  const Flags flags(inv);
  KeyValues values;
  if (inv.config_path) values = read_key_values(*inv.config_path);
  for (const auto& key : config_keys()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (flags.has(flag)) values[key] = flags.text(flag);
  }
  // Precedence for the seed: --seed, then MDPCI_SEED, then the config file.
  if (!flags.has("seed")) {
    if (auto seed = env_seed()) values["seed"] = std::to_string(*seed);
  }
  ExperimentConfig config = experiment_config_from(values);
  config.threads = static_cast<unsigned>(flags.count_or("threads", 0));
  const ExperimentResult result = inv.subcommand == "experiment coverage"
                                      ? run_coverage(config)
                                      : run_disappointment(config);
  if (inv.output_path) {
    emit_csv(result, *inv.output_path);
  } else {
    write_csv(result, out);
  }
  return 0;
}

int cmd_oracle_check(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  const Flags flags(inv);
  oracle::CorpusOptions options;
  options.seed = resolve_seed(flags, options.seed);
  options.instances = flags.count_or("instances", options.instances);
  options.grid_points = flags.count_or("grid-points", options.grid_points);
  options.simplex_resolution = flags.count_or("simplex-resolution", options.simplex_resolution);
  options.dro_instances = flags.count_or("dro-instances", options.dro_instances);
  const auto results = oracle::run_cross_validation(options);
  out << "check,instances,max_error,tolerance,result,seconds\n";
  std::size_t failures = 0;
  for (const auto& r : results) {
    if (!r.passed) ++failures;
    write_row(out, {r.name, std::to_string(r.instances), format_double(r.max_error),
                    format_double(r.tolerance), r.passed ? "pass" : "FAIL",
                    format_double(std::round(r.seconds * 1000.0) / 1000.0)});
  }
  if (failures > 0) {
    err << failures << " oracle check(s) failed\n";
    return 1;
  }
  return 0;
}

int cmd_plot(const CliInvocation& inv) {
  const Flags flags(inv);
  const auto result = read_csv(flags.text("in"));
  emit_svg(result, plot_spec(flags.text("spec")), flags.text("out"));
  return 0;
}

}  // namespace

int dispatch(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  try {
    if (inv.subcommand == "simulate") return cmd_simulate(inv, out);
    if (inv.subcommand == "estimate") return cmd_estimate(inv, out);
    if (inv.subcommand == "interval") return cmd_interval(inv, out);
    if (inv.subcommand.rfind("experiment ", 0) == 0) return cmd_experiment(inv, out);
    if (inv.subcommand == "oracle-check") return cmd_oracle_check(inv, out, err);
    if (inv.subcommand == "plot") return cmd_plot(inv);
    throw UsageError("unknown subcommand '" + inv.subcommand + "'", "");
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << usage(e.subcommand());
    return 1;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::optional<CliInvocation> inv;
  try {
    inv = parse_invocation(args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << usage(e.subcommand());
    return 1;
  }
  if (!inv) return 0;
  return dispatch(*inv, out, err);
}

}  // namespace mdpci::cli
