#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mdpci/experiments.hpp"
#include "mdpci/report.hpp"
#include "mdpci/solve.hpp"

using namespace mdpci;

namespace {

ExperimentConfig small_ou(std::size_t reps) {
  ExperimentConfig c;
  c.model = OuModel{0.2};
  c.horizons = {100.0, 400.0};
  c.replications = reps;
  c.seed = 5;
  c.threads = 1;
  return c;
}

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream out;
  write_csv(r, out);
  return out.str();
}

}  // namespace

TEST_CASE("sample quantile") {
  CHECK(sample_quantile({3.0}, 0.1) == 3.0);
  CHECK(sample_quantile({3.0}, 0.9) == 3.0);
  CHECK(sample_quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.5);
  CHECK(sample_quantile({0.0, 10.0}, 0.1) == doctest::Approx(1.0));
  CHECK(sample_quantile({1.0, 2.0, 3.0}, 0.0) == 1.0);
  CHECK(sample_quantile({1.0, 2.0, 3.0}, 1.0) == 3.0);
  CHECK_THROWS_AS(sample_quantile({}, 0.5), DomainError);
}

TEST_CASE("Wilson band") {
  const auto none = wilson_band(0, 100, 1.2815515655446004);
  CHECK(none.lower == 0.0);
  CHECK(none.upper > 0.0);
  const auto all = wilson_band(100, 100, 1.2815515655446004);
  CHECK(all.upper == 1.0);
  const auto half = wilson_band(50, 100, 1.2815515655446004);
  CHECK(half.lower + half.upper == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(half.lower < 0.5);
}

TEST_CASE("configuration validation") {
  auto c = small_ou(10);
  c.replications = 0;
  CHECK_THROWS_AS(validate(c), DomainError);
  c = small_ou(10);
  c.horizons = {};
  CHECK_THROWS_AS(validate(c), DomainError);
  c.horizons = {400.0, 100.0};
  CHECK_THROWS_AS(validate(c), DomainError);
  c = small_ou(10);
  c.model = OuModel{-1.0};
  CHECK_THROWS_AS(validate(c), DomainError);
  CHECK_NOTHROW(validate(small_ou(10)));
}

TEST_CASE("variant intervals") {
  const auto s = make_schedule(1e4, kDefaultBeta, 1e-2);
  const ModelSpec ou = OuModel{0.2};
  const auto k = variant_interval(ou, BoundVariant::fixed_offset(0.5), 0.2, s);
  CHECK(k.lower == 2.0);
  CHECK(k.upper == 3.0);
  CHECK(variant_interval(ou, BoundVariant::fixed_offset(0.0), 0.2, s).status == IntervalStatus::Degenerate);
  CHECK(variant_interval(ou, BoundVariant::fixed_offset(-0.1), 0.2, s).status == IntervalStatus::Infeasible);
  CHECK(variant_interval(ou, BoundVariant::optimal(), 0.2, s).upper == ou_interval(0.2, s).upper);
  CHECK(BoundVariant::fixed_offset(0.3).name() == "kappa=0.3");
  CHECK(true_cost(ou) == 2.5);
  CHECK(true_cost(CirModel{5.0, 2.0, 1.0}) == 10.0);
}

TEST_CASE("a single replication reports its own interval") {
  auto c = small_ou(1);
  const auto estimates = simulate_estimates(c);
  REQUIRE(estimates.size() == 1);
  const auto r = run_coverage(c);
  for (std::size_t k = 0; k < c.horizons.size(); ++k) {
    const auto s = make_schedule(c.horizons[k], c.beta, c.rate);
    const auto expected = ou_interval(estimates[0][k], s);
    const auto* w = r.find(c.horizons[k], "optimal", "width");
    REQUIRE(w != nullptr);
    if (expected.feasible()) {
      CHECK(*w->mean == expected.width());
      CHECK(*w->q10 == expected.width());
      CHECK(*w->q90 == expected.width());
    }
  }
}

TEST_CASE("widths match the closed form per replication") {
  auto c = small_ou(30);
  c.variants = {BoundVariant::optimal()};
  const auto estimates = simulate_estimates(c);
  const auto r = run_coverage(c);
  const auto s = make_schedule(400.0, c.beta, c.rate);
  std::vector<double> widths;
  for (const auto& row : estimates) {
    const auto i = ou_interval(row[1], s);
    if (i.feasible()) widths.push_back(i.width());
  }
  double sum = 0.0;
  for (double w : widths) sum += w;
  const auto* w = r.find(400.0, "optimal", "width");
  REQUIRE(w != nullptr);
  CHECK(*w->mean == doctest::Approx(sum / widths.size()).epsilon(1e-14));
  CHECK(*w->q10 == sample_quantile(widths, 0.1));
  CHECK(w->count == widths.size());
}

TEST_CASE("results do not depend on the thread count") {
  auto one = small_ou(40);
  auto three = small_ou(40);
  three.threads = 3;
  CHECK(csv_of(run_coverage(one)) == csv_of(run_coverage(three)));
  CHECK(csv_of(run_disappointment(one)) == csv_of(run_disappointment(three)));
  auto other = small_ou(40);
  other.seed = 6;
  CHECK(csv_of(run_coverage(one)) != csv_of(run_coverage(other)));
}

TEST_CASE("disappointment ordering at small scale") {
  auto c = small_ou(400);
  c.horizons = {400.0};
  c.variants = {BoundVariant::optimal(), BoundVariant::fixed_offset(0.0), BoundVariant::fixed_offset(1.5)};
  const auto r = run_disappointment(c);
  const double optimal = *r.find(400.0, "optimal", "disappointment")->mean;
  const double naive = *r.find(400.0, "kappa=0", "disappointment")->mean;
  const double wide = *r.find(400.0, "kappa=1.5", "disappointment")->mean;
  CHECK(naive > 0.3);
  CHECK(optimal < naive);
  CHECK(wide < naive);
  CHECK(r.find(400.0, "optimal", "decay_T") != nullptr);
}

TEST_CASE("i.i.d. models") {
  ExperimentConfig c;
  c.model = IidMeanModel{RateFamily::exponential(), {2.0}};
  c.horizons = {50.0, 200.0};
  c.replications = 100;
  c.threads = 1;
  const auto r = run_coverage(c);
  const auto* m = r.find(200.0, "optimal", "miscoverage");
  REQUIRE(m != nullptr);
  CHECK(*m->mean >= 0.0);
  CHECK(*m->mean <= 1.0);
  CHECK(*r.find(200.0, "optimal", "failed")->mean == 0.0);
  CHECK(true_cost(c.model) == 2.0);
  const auto w50 = *r.find(50.0, "clt", "width")->mean;
  const auto w200 = *r.find(200.0, "clt", "width")->mean;
  CHECK(w200 < w50);
}

TEST_CASE("CIR coverage runs end to end") {
  ExperimentConfig c;
  c.model = CirModel{5.0, 2.0, 1.0};
  c.horizons = {100.0};
  c.replications = 20;
  c.threads = 1;
  const auto r = run_coverage(c);
  CHECK(*r.find(100.0, "optimal", "failed")->mean == 0.0);
  CHECK(r.find(100.0, "clt", "width")->count > 0);
}
