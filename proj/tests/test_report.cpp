#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mdpci/report.hpp"
#include "support.hpp"

using namespace mdpci;

namespace {

ExperimentResult sample_result() {
  ExperimentResult r;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double t : {100.0, 1000.0, 10000.0}) {
    for (const char* variant : {"optimal", "clt"}) {
      const double m = std::abs(u(rng)) + 0.1;
      r.rows.push_back({t, variant, "width", m, m * 0.8, m * 1.2, 2000});
      r.rows.push_back({t, variant, "decay_T", std::nullopt, std::nullopt, std::nullopt, 2000});
      r.rows.push_back({t, variant, "miscoverage", std::abs(u(rng)) / 10.0, 1.0 / 3.0, 0.2, 1999});
    }
  }
  return r;
}

}  // namespace

TEST_CASE("format_double is shortest and exact") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(1e-300) == "1e-300");
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::pow(10.0, u(rng)) * (i % 2 ? -1.0 : 1.0);
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("empty result writes only the header") {
  std::ostringstream out;
  write_csv(ExperimentResult{}, out);
  CHECK(out.str() == std::string(kCsvHeader) + "\n");
  std::istringstream in(out.str());
  CHECK(parse_csv(in).rows.empty());
}

TEST_CASE("CSV round trip preserves rows exactly") {
  auto r = sample_result();
  const auto path = test_support::temp_path("roundtrip.csv");
  emit_csv(r, path);
  const auto back = read_csv(path);
  r.sort_rows();
  CHECK(back.rows == r.rows);
}

TEST_CASE("missing values are empty fields") {
  ExperimentResult r;
  r.rows.push_back({10.0, "clt", "decay_T", std::nullopt, std::nullopt, std::nullopt, 5});
  std::ostringstream out;
  write_csv(r, out);
  CHECK(out.str() == std::string(kCsvHeader) + "\n10,clt,decay_T,,,,5\n");
}

TEST_CASE("malformed CSV and bad paths") {
  std::istringstream bad_header("a,b\n");
  CHECK_THROWS_AS(parse_csv(bad_header), DomainError);
  std::istringstream short_row(std::string(kCsvHeader) + "\n1,clt\n");
  CHECK_THROWS_AS(parse_csv(short_row), DomainError);
  CHECK_THROWS_AS(emit_csv(sample_result(), "/nonexistent-dir/x.csv"), IoError);
  CHECK_THROWS_AS(read_csv("/nonexistent-dir/x.csv"), IoError);
}

TEST_CASE("band vertices") {
  std::vector<ExperimentRow> series = {{1.0, "v", "width", 2.0, 1.0, 3.0, 1},
                                       {2.0, "v", "width", 2.0, 1.5, 2.5, 1}};
  const auto v = band_vertices(series);
  REQUIRE(v.size() == 4);
  CHECK(v[0] == std::pair{1.0, 1.0});
  CHECK(v[1] == std::pair{2.0, 1.5});
  CHECK(v[2] == std::pair{2.0, 2.5});
  CHECK(v[3] == std::pair{1.0, 3.0});
}

TEST_CASE("SVG output") {
  const auto r = sample_result();
  for (const auto& name : plot_spec_names()) {
    const auto spec = plot_spec(name);
    bool any = false;
    for (const auto& row : r.rows) {
      for (const auto& s : spec.stats) any = any || (row.stat == s && row.mean);
    }
    if (!any) {
      CHECK_THROWS_AS(render_svg(r, spec), DomainError);
      continue;
    }
    const auto svg = render_svg(r, spec);
    CHECK(test_support::well_formed_xml(svg));
  }
  CHECK_THROWS_AS(plot_spec("nope"), DomainError);

  ExperimentResult one;
  one.rows.push_back({10.0, "optimal", "width", 1.0, 0.5, 1.5, 3});
  one.rows.push_back({100.0, "optimal", "width", 0.7, 0.4, 1.0, 3});
  const auto svg = render_svg(one, plot_spec("width"));
  CHECK(test_support::well_formed_xml(svg));
  auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto p = svg.find(needle); p != std::string::npos; p = svg.find(needle, p + 1)) ++n;
    return n;
  };
  CHECK(count("<polyline class=\"mean\"") == 1);
  CHECK(count("<polygon class=\"band\"") == 1);

  const auto path = test_support::temp_path("plot.svg");
  emit_svg(one, plot_spec("width"), path);
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == svg);
}
