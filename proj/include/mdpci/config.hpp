#pragma once

// Flat `key = value` experiment configuration files.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mdpci/experiments.hpp"

namespace mdpci {

using KeyValues = std::map<std::string, std::string>;

/// Recognized keys: model, theta, delta, sigma, beta, r, t_grid, reps, seed,
/// step, variants, kappa_list.
const std::vector<std::string>& config_keys();

/// One `key = value` per line; `#` starts a comment. Throws DomainError on
/// malformed lines, duplicate keys and unknown keys.
KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::filesystem::path& path);

/// Builds a validated configuration. `variants` is a comma list of optimal and
/// clt; every entry of `kappa_list` adds a fixed-offset variant.
/// Models: ou, cir, normal, exponential, poisson, bernoulli, geometric.
ExperimentConfig experiment_config_from(const KeyValues& values);

/// Comma-separated reals.
std::vector<double> parse_real_list(const std::string& text);
double parse_real(const std::string& text, const std::string& what);
std::uint64_t parse_count(const std::string& text, const std::string& what);

}  // namespace mdpci
