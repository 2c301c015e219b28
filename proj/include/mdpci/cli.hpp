#pragma once

// Command-line front end: argument parsing and subcommand dispatch.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdpci/core.hpp"

namespace mdpci::cli {

/// Bad or missing command-line arguments. Reported with usage text, exit code 1.
class UsageError : public DomainError {
 public:
  UsageError(const std::string& message, std::string subcommand)
      : DomainError(message), subcommand_(std::move(subcommand)) {}
  const std::string& subcommand() const { return subcommand_; }

 private:
  std::string subcommand_;
};

struct CliInvocation {
  /// "simulate", "estimate", "interval", "experiment coverage",
  /// "experiment disappointment", "oracle-check" or "plot".
  std::string subcommand;
  /// Long flag name without dashes -> raw value, for flags given on the command line.
  std::map<std::string, std::string> flags;
  std::optional<std::string> config_path;
  std::optional<std::string> output_path;
};

struct FlagDoc {
  std::string subcommand;
  std::string flag;  // without dashes
  std::string description;
};

const std::vector<std::string>& subcommands();
const std::vector<FlagDoc>& documented_flags();

/// Usage for one subcommand, or for everything when `subcommand` is empty.
std::string usage(const std::string& subcommand = {});

/// Parses argv (without the program name). Returns nullopt after printing help
/// to `out`. Throws UsageError on unknown, malformed or conflicting flags.
std::optional<CliInvocation> parse_invocation(const std::vector<std::string>& args,
                                              std::ostream& out);

/// Runs a parsed invocation. Exit codes: 0 success, 1 domain or validation
/// error, 2 IO error. Messages go to `err`.
int dispatch(const CliInvocation& invocation, std::ostream& out, std::ostream& err);

/// parse_invocation followed by dispatch, with the same exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mdpci::cli
