#include "mdpci/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mdpci {

namespace {

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

const std::string& require(const KeyValues& values, const std::string& key) {
  const auto it = values.find(key);
  if (it == values.end()) throw DomainError("config is missing required key '" + key + "'");
  return it->second;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (item.empty()) throw DomainError("empty entry in list '" + text + "'");
    out.push_back(item);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"model", "theta", "delta",  "sigma",
                                                "beta",  "r",     "t_grid", "reps",
                                                "seed",  "step",  "variants", "kappa_list"};
  return keys;
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues values;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError("config line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw DomainError("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
    if (!values.emplace(key, value).second) {
      throw DomainError("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
    }
  }
  return values;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open config: " + path.string());
  return parse_key_values(file);
}

double parse_real(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw DomainError(what + ": not a finite number: '" + text + "'");
  }
  return value;
}

std::uint64_t parse_count(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw DomainError(what + ": not a nonnegative integer: '" + text + "'");
  }
  return value;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_real(item, "list entry"));
  return out;
}

ExperimentConfig experiment_config_from(const KeyValues& values) {
  ExperimentConfig config;
  const std::string model = require(values, "model");
  const double theta = parse_real(require(values, "theta"), "theta");
  if (model == "ou") {
    config.model = OuModel{theta};
  } else if (model == "cir") {
    config.model = CirModel{parse_real(require(values, "delta"), "delta"),
                            parse_real(require(values, "sigma"), "sigma"), theta};
  } else if (model == "normal") {
    config.model = IidMeanModel{RateFamily::normal_scalar(1.0), {theta}};
  } else if (model == "exponential") {
    config.model = IidMeanModel{RateFamily::exponential(), {theta}};
  } else if (model == "poisson") {
    config.model = IidMeanModel{RateFamily::poisson(), {theta}};
  } else if (model == "bernoulli") {
    config.model = IidMeanModel{RateFamily::bernoulli(), {theta}};
  } else if (model == "geometric") {
    config.model = IidMeanModel{RateFamily::geometric(), {theta}};
  } else {
    throw DomainError("unknown model '" + model + "'");
  }

  config.horizons = parse_real_list(require(values, "t_grid"));
  if (auto it = values.find("beta"); it != values.end()) config.beta = parse_real(it->second, "beta");
  if (auto it = values.find("r"); it != values.end()) config.rate = parse_real(it->second, "r");
  if (auto it = values.find("reps"); it != values.end()) {
    config.replications = parse_count(it->second, "reps");
  }
  if (auto it = values.find("seed"); it != values.end()) config.seed = parse_count(it->second, "seed");
  if (auto it = values.find("step"); it != values.end()) config.step = parse_real(it->second, "step");

  if (auto it = values.find("variants"); it != values.end()) {
    config.variants.clear();
    for (const auto& name : split_list(it->second)) {
      if (name == "optimal") {
        config.variants.push_back(BoundVariant::optimal());
      } else if (name == "clt") {
        config.variants.push_back(BoundVariant::clt());
      } else {
        throw DomainError("unknown bound variant '" + name + "'");
      }
    }
  }
  if (auto it = values.find("kappa_list"); it != values.end()) {
    for (double kappa : parse_real_list(it->second)) {
      config.variants.push_back(BoundVariant::fixed_offset(kappa));
    }
  }
  validate(config);
  return config;
}

}  // namespace mdpci
