#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mdpci/cli.hpp"
#include "mdpci/report.hpp"
#include "mdpci/solve.hpp"
#include "support.hpp"

using namespace mdpci;
using mdpci::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("help lists every subcommand and flag") {
  const auto help = invoke({"--help"});
  CHECK(help.code == 0);
  for (const auto& sub : cli::subcommands()) CHECK(help.out.find(sub) != std::string::npos);
  for (const auto& doc : cli::documented_flags()) {
    INFO(doc.subcommand << " --" << doc.flag);
    CHECK(help.out.find("--" + doc.flag) != std::string::npos);
  }
  const auto sub_help = invoke({"interval", "--help"});
  CHECK(sub_help.code == 0);
  CHECK(sub_help.out.find("--theta-hat") != std::string::npos);
  CHECK(sub_help.out.find("--grid-points") == std::string::npos);
}

TEST_CASE("every documented flag parses") {
  std::ostringstream sink;
  for (const auto& doc : cli::documented_flags()) {
    auto args = split_words(doc.subcommand);
    args.push_back("--" + doc.flag);
    args.push_back("7");
    INFO(doc.subcommand << " --" << doc.flag);
    const auto inv = cli::parse_invocation(args, sink);
    REQUIRE(inv.has_value());
    CHECK(inv->subcommand == doc.subcommand);
    CHECK(inv->flags.at(doc.flag) == "7");
  }
  CHECK_THROWS_AS(cli::parse_invocation({"interval", "--bogus", "1"}, sink), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_invocation({}, sink), cli::UsageError);
}

TEST_CASE("interval subcommand") {
  const auto r = invoke({"interval", "--model", "ou", "--theta-hat", "0.2", "--T", "10000", "--r", "0.001"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("lower,upper,status,method\n", 0) == 0);
  CHECK(r.out.find(",Feasible,ou-closed-form") != std::string::npos);

  const auto generic = invoke({"interval", "--model", "ou", "--theta-hat", "0.2", "--T", "10000",
                               "--r", "0.001", "--method", "generic"});
  CHECK(generic.code == 0);

  const auto clt = invoke({"interval", "--model", "ou", "--theta-hat", "0.2", "--T", "10000",
                           "--r", "0.001", "--method", "clt"});
  CHECK(clt.code == 0);
  CHECK(clt.out.find("clt") != std::string::npos);

  const auto infeasible = invoke({"interval", "--model", "cir", "--theta-hat", "-1", "--T", "100",
                                  "--r", "0.01", "--delta", "5", "--sigma", "2"});
  CHECK(infeasible.code == 0);
  CHECK(infeasible.out.find("\n,,Infeasible,") != std::string::npos);
}

TEST_CASE("usage and IO errors") {
  const auto missing = invoke({"interval", "--model", "ou", "--theta-hat", "0.2", "--T", "100"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("--r") != std::string::npos);
  CHECK(missing.err.find("mdpci interval") != std::string::npos);

  const auto both = invoke({"interval", "--model", "ou", "--theta-hat", "0.2", "--data", "x.csv",
                            "--T", "100", "--r", "0.1"});
  CHECK(both.code == 1);

  const auto domain = invoke({"interval", "--model", "ou", "--theta-hat", "0.2", "--T", "100", "--r", "-1"});
  CHECK(domain.code == 1);

  const auto io = invoke({"estimate", "--model", "ou", "--data", "/nonexistent-dir/p.csv"});
  CHECK(io.code == 2);
  CHECK(io.err.find("/nonexistent-dir/p.csv") != std::string::npos);

  const auto plot = invoke({"plot", "--in", "/nonexistent-dir/r.csv", "--out", "x.svg", "--spec", "width"});
  CHECK(plot.code == 2);
}

TEST_CASE("simulate, estimate and interval from data") {
  const auto path = test_support::temp_path("ou_path.csv");
  CHECK(invoke({"simulate", "--model", "ou", "--theta", "0.2", "--T", "2000", "--seed", "3",
                "--out", path.string()})
            .code == 0);
  const auto est = invoke({"estimate", "--model", "ou", "--data", path.string()});
  CHECK(est.code == 0);
  const double theta_hat = std::stod(est.out.substr(est.out.find('\n') + 1));
  CHECK(theta_hat > 0.1);
  CHECK(theta_hat < 0.35);
  const auto from_data = invoke({"interval", "--model", "ou", "--data", path.string(), "--r", "0.01"});
  CHECK(from_data.code == 0);
  CHECK(from_data.out.find("Feasible") != std::string::npos);

  const auto samples = test_support::temp_path("exp.csv");
  CHECK(invoke({"simulate", "--model", "exponential", "--theta", "2", "--T", "500", "--out",
                samples.string()})
            .code == 0);
  const auto mean = invoke({"estimate", "--model", "exponential", "--data", samples.string()});
  CHECK(mean.code == 0);

  const auto losses = test_support::temp_path("losses.csv");
  std::ofstream(losses) << "i,x\n0,0\n1,1\n";
  const auto dro = invoke({"interval", "--model", "dro", "--data", losses.string(), "--T", "2",
                           "--beta", "0.5", "--r", "0.25"});
  CHECK(dro.code == 0);
  const std::vector<double> pair = {0.0, 1.0};
  const double upper = dro_dual_upper(pair, make_schedule(2.0, 0.5, 0.25));
  CHECK(dro.out.find("," + format_double(upper) + ",Feasible,dro-dual") != std::string::npos);
}

TEST_CASE("experiment and plot round trip") {
  const auto config = test_support::temp_path("exp.conf");
  std::ofstream(config) << "model = ou\ntheta = 0.2\nr = 0.01\nt_grid = 100, 200\nreps = 20\nseed = 4\n";
  const auto csv = test_support::temp_path("coverage.csv");
  CHECK(invoke({"experiment", "coverage", "--config", config.string(), "--out", csv.string(),
                "--threads", "1"})
            .code == 0);
  const auto result = read_csv(csv);
  CHECK(result.find(200.0, "optimal", "width") != nullptr);

  const auto svg = test_support::temp_path("coverage.svg");
  CHECK(invoke({"plot", "--in", csv.string(), "--out", svg.string(), "--spec", "width"}).code == 0);
  CHECK(test_support::well_formed_xml(slurp(svg)));
  CHECK(invoke({"plot", "--in", csv.string(), "--out", svg.string(), "--spec", "nope"}).code == 1);

  const auto stdout_run = invoke({"experiment", "disappointment", "--config", config.string(),
                                  "--threads", "1"});
  CHECK(stdout_run.code == 0);
  CHECK(stdout_run.out.rfind(kCsvHeader, 0) == 0);
}

TEST_CASE("seed precedence") {
  const auto config = test_support::temp_path("seed.conf");
  std::ofstream(config) << "model = ou\ntheta = 0.2\nt_grid = 100\nreps = 5\nseed = 4\n";
  auto go = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = {"experiment", "coverage", "--config", config.string(), "--threads", "1"};
    args.insert(args.end(), extra.begin(), extra.end());
    return invoke(args).out;
  };
  const auto from_config = go({});
  ::setenv("MDPCI_SEED", "11", 1);
  const auto from_env = go({});
  const auto from_flag = go({"--seed", "4"});
  ::unsetenv("MDPCI_SEED");
  CHECK(from_env != from_config);
  CHECK(from_flag == from_config);
  CHECK(go({"--seed", "11"}) == from_env);

  ::setenv("MDPCI_SEED", "x", 1);
  CHECK(invoke({"simulate", "--model", "ou", "--theta", "0.2", "--T", "1"}).code == 1);
  ::unsetenv("MDPCI_SEED");
}

TEST_CASE("oracle-check on a small corpus") {
  const auto r = invoke({"oracle-check", "--instances", "5", "--grid-points", "5000",
                         "--simplex-resolution", "2000", "--dro-instances", "3"});
  CHECK(r.out.rfind("check,instances,max_error,tolerance,result,seconds\n", 0) == 0);
  CHECK(r.code == 0);
}
