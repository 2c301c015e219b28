#pragma once

// CSV and SVG output for experiment results.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mdpci/core.hpp"

namespace mdpci {

inline constexpr const char* kCsvHeader = "T,variant,stat,mean,q10,q90,count";

/// Shortest text that parses back to exactly `value` (at most 17 significant digits).
std::string format_double(double value);

/// Rows sorted by (T, variant, stat); missing values become empty fields.
void write_csv(const ExperimentResult& result, std::ostream& out);
/// Throws IoError naming the path when the file cannot be written.
void emit_csv(const ExperimentResult& result, const std::filesystem::path& path);

/// Parses the format written by write_csv. Metadata is not part of the file.
/// Throws DomainError on malformed input.
ExperimentResult parse_csv(std::istream& in);
ExperimentResult read_csv(const std::filesystem::path& path);

struct PlotSpec {
  std::string name;
  std::string title;
  /// Statistics drawn, one series per (variant, stat).
  std::vector<std::string> stats;
  std::string y_label;
  bool log_x = true;
};

/// Named layouts: width, endpoints, miscoverage, disappointment, decay, decay-bT.
PlotSpec plot_spec(const std::string& name);
std::vector<std::string> plot_spec_names();

/// Band polygon of one series: (T, q10) in increasing T, then (T, q90) in decreasing T.
std::vector<std::pair<double, double>> band_vertices(const std::vector<ExperimentRow>& series);

/// Static SVG: axes, legend, a mean polyline per series and a shaded q10/q90 band.
/// Throws DomainError when no row matches the spec.
std::string render_svg(const ExperimentResult& result, const PlotSpec& spec);
void emit_svg(const ExperimentResult& result, const PlotSpec& spec,
              const std::filesystem::path& path);

}  // namespace mdpci
