#include "mdpci/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace mdpci {

namespace {

std::string optional_field(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

void check_field(const std::string& field) {
  if (field.find_first_of(",\"\n\r") != std::string::npos) {
    throw DomainError("CSV field contains a separator: " + field);
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(const std::string& text, std::size_t line_number) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    std::ostringstream msg;
    msg << "line " << line_number << ": not a number: '" << text << "'";
    throw DomainError(msg.str());
  }
  return value;
}

std::optional<double> parse_optional(const std::string& text, std::size_t line_number) {
  if (text.empty()) return std::nullopt;
  return parse_number(text, line_number);
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string coord(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

std::string tick_label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3g", v);
  return buffer;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc()) throw InternalError("number formatting failed");
  return std::string(buffer, ptr);
}

void write_csv(const ExperimentResult& result, std::ostream& out) {
  ExperimentResult sorted = result;
  sorted.sort_rows();
  out << kCsvHeader << '\n';
  for (const auto& row : sorted.rows) {
    check_field(row.variant);
    check_field(row.stat);
    out << format_double(row.horizon) << ',' << row.variant << ',' << row.stat << ','
        << optional_field(row.mean) << ',' << optional_field(row.q10) << ','
        << optional_field(row.q90) << ',' << row.count << '\n';
  }
}

void emit_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open for writing: " + path.string());
  write_csv(result, file);
  file.flush();
  if (!file) throw IoError("write failed: " + path.string());
}

ExperimentResult parse_csv(std::istream& in) {
  ExperimentResult result;
  std::string line;
  std::size_t line_number = 0;
  if (!std::getline(in, line)) throw DomainError("empty CSV input");
  ++line_number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw DomainError("unexpected CSV header: " + line);
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != 7) {
      std::ostringstream msg;
      msg << "line " << line_number << ": expected 7 fields, got " << fields.size();
      throw DomainError(msg.str());
    }
    ExperimentRow row;
    row.horizon = parse_number(fields[0], line_number);
    row.variant = fields[1];
    row.stat = fields[2];
    row.mean = parse_optional(fields[3], line_number);
    row.q10 = parse_optional(fields[4], line_number);
    row.q90 = parse_optional(fields[5], line_number);
    const double count = parse_number(fields[6], line_number);
    if (!(count >= 0.0) || count != std::floor(count)) {
      throw DomainError("line " + std::to_string(line_number) + ": count must be a whole number");
    }
    row.count = static_cast<std::size_t>(count);
    result.rows.push_back(std::move(row));
  }
  return result;
}

ExperimentResult read_csv(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open for reading: " + path.string());
  return parse_csv(file);
}

PlotSpec plot_spec(const std::string& name) {
  if (name == "width") return {name, "Interval width", {"width"}, "width", true};
  if (name == "endpoints") {
    return {name, "Interval endpoints", {"lower", "upper"}, "bound on J", true};
  }
  if (name == "miscoverage") return {name, "Miscoverage", {"miscoverage"}, "probability", true};
  if (name == "disappointment") {
    return {name, "Disappointment probability", {"disappointment"}, "P(J > upper)", true};
  }
  if (name == "decay") return {name, "Decay rate", {"decay_T"}, "-(1/T) log P", true};
  if (name == "decay-bT") return {name, "Decay rate", {"decay_bT"}, "-(1/b_T) log P", true};
  throw DomainError("unknown plot spec '" + name + "'");
}

std::vector<std::string> plot_spec_names() {
  return {"width", "endpoints", "miscoverage", "disappointment", "decay", "decay-bT"};
}

std::vector<std::pair<double, double>> band_vertices(const std::vector<ExperimentRow>& series) {
  std::vector<const ExperimentRow*> rows;
  for (const auto& row : series) {
    if (row.q10 && row.q90) rows.push_back(&row);
  }
  std::sort(rows.begin(), rows.end(),
            [](const ExperimentRow* a, const ExperimentRow* b) { return a->horizon < b->horizon; });
  std::vector<std::pair<double, double>> out;
  out.reserve(2 * rows.size());
  for (const auto* row : rows) out.emplace_back(row->horizon, *row->q10);
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) out.emplace_back((*it)->horizon, *(*it)->q90);
  return out;
}

std::string render_svg(const ExperimentResult& result, const PlotSpec& spec) {
  // (variant, stat) -> rows in increasing T
  std::map<std::pair<std::string, std::string>, std::vector<ExperimentRow>> series;
  for (const auto& row : result.rows) {
    if (std::find(spec.stats.begin(), spec.stats.end(), row.stat) == spec.stats.end()) continue;
    if (!row.mean) continue;
    series[{row.variant, row.stat}].push_back(row);
  }
  if (series.empty()) throw DomainError("no rows to plot for spec '" + spec.name + "'");

  const bool log_x = spec.log_x && std::all_of(result.rows.begin(), result.rows.end(),
                                                [](const ExperimentRow& r) { return r.horizon > 0.0; });
  auto tx = [log_x](double t) { return log_x ? std::log10(t) : t; };

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (auto& [key, rows] : series) {
    std::sort(rows.begin(), rows.end(),
              [](const ExperimentRow& a, const ExperimentRow& b) { return a.horizon < b.horizon; });
    for (const auto& row : rows) {
      x_min = std::min(x_min, tx(row.horizon));
      x_max = std::max(x_max, tx(row.horizon));
      for (const auto& v : {row.mean, row.q10, row.q90}) {
        if (v) {
          y_min = std::min(y_min, *v);
          y_max = std::max(y_max, *v);
        }
      }
    }
  }
  if (x_max == x_min) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max == y_min) {
    const double pad = std::max(1e-12, std::abs(y_min) * 0.1);
    y_min -= pad;
    y_max += pad;
  }
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  constexpr double width = 720.0, height = 480.0;
  constexpr double left = 80.0, right = 180.0, top = 40.0, bottom = 60.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](double t) { return left + (tx(t) - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double v) { return top + (y_max - v) / (y_max - y_min) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << coord(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape_xml(spec.title) << "</text>\n";

  // Axes and ticks.
  svg << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\"/>\n"
      << "</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  constexpr int kTicks = 5;
  for (int i = 0; i < kTicks; ++i) {
    const double f = static_cast<double>(i) / (kTicks - 1);
    const double xv = x_min + f * (x_max - x_min);
    const double xpix = left + f * plot_w;
    svg << "<line x1=\"" << coord(xpix) << "\" y1=\"" << top + plot_h << "\" x2=\"" << coord(xpix)
        << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << coord(xpix) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\">" << tick_label(log_x ? std::pow(10.0, xv) : xv)
        << "</text>\n";
    const double yv = y_min + f * (y_max - y_min);
    const double ypix = py(yv);
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << coord(ypix) << "\" x2=\"" << left
        << "\" y2=\"" << coord(ypix) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << coord(ypix + 4) << "\" text-anchor=\"end\">"
        << tick_label(yv) << "</text>\n";
  }
  svg << "<text x=\"" << coord(left + plot_w / 2) << "\" y=\"" << height - 16
      << "\" text-anchor=\"middle\" font-size=\"13\">" << (log_x ? "T (log scale)" : "T")
      << "</text>\n"
      << "<text x=\"18\" y=\"" << coord(top + plot_h / 2) << "\" text-anchor=\"middle\" "
      << "font-size=\"13\" transform=\"rotate(-90 18 " << coord(top + plot_h / 2) << ")\">"
      << escape_xml(spec.y_label) << "</text>\n"
      << "</g>\n";

  std::size_t index = 0;
  for (const auto& [key, rows] : series) {
    const char* color = kPalette[index % std::size(kPalette)];
    const std::string label = key.first + (spec.stats.size() > 1 ? " " + key.second : "");
    const auto band = band_vertices(rows);
    if (!band.empty()) {
      svg << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" "
          << "points=\"";
      for (std::size_t i = 0; i < band.size(); ++i) {
        svg << (i ? " " : "") << coord(px(band[i].first)) << ',' << coord(py(band[i].second));
      }
      svg << "\"/>\n";
    }
    svg << "<polyline class=\"mean\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" "
        << "points=\"";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      svg << (i ? " " : "") << coord(px(rows[i].horizon)) << ',' << coord(py(*rows[i].mean));
    }
    svg << "\"/>\n";
    const double ly = top + 10.0 + 20.0 * static_cast<double>(index);
    const double lx = left + plot_w + 16.0;
    svg << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(label) << "</text>\n";
    ++index;
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_svg(const ExperimentResult& result, const PlotSpec& spec,
              const std::filesystem::path& path) {
  const std::string text = render_svg(result, spec);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open for writing: " + path.string());
  file << text;
  file.flush();
  if (!file) throw IoError("write failed: " + path.string());
}

}  // namespace mdpci
