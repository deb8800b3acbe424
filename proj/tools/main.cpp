#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bahadur_lab/bahadur.hpp"
#include "bahadur_lab/config.hpp"
#include "bahadur_lab/errors.hpp"
#include "bahadur_lab/montecarlo.hpp"
#include "bahadur_lab/sample.hpp"
#include "bahadur_lab/statistics.hpp"

namespace bl = bahadur_lab;

namespace {

enum Exit : int { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

bl::WeightFunction weight_from_flag(const std::string& name) {
  if (name == "unit") return bl::WeightFunction::unit();
  if (name == "ad") return bl::WeightFunction::anderson_darling();
  throw bl::BadValue("--psi must be 'unit' or 'ad'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* env = std::getenv("BAHADUR_LAB_SEED");
  if (!env || !*env) return std::nullopt;
  try {
    std::size_t used = 0;
    const std::string text(env);
    if (text.front() == '-') throw std::invalid_argument("negative");
    const auto v = std::stoull(text, &used, 10);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw bl::BadValue("BAHADUR_LAB_SEED is not a nonnegative integer: '" + std::string(env) + "'");
  }
}

struct SimulateArgs {
  std::string config;
  std::string out;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& args) {
  auto config = bl::parse_config(args.config);
  if (args.seed) {
    config.seed = *args.seed;
  } else if (auto env = seed_from_env()) {
    config.seed = *env;
  }
  const std::string out = args.out.empty() ? config.output_path : args.out;
  if (out.empty()) throw bl::MissingKey("no output path: pass --out or set experiment.output");

  const auto result = bl::run_experiment(config, args.threads);
  bl::emit_table(result.cells, config.seed, config.replications, out);
  for (const auto& d : result.diagnostics) std::cerr << "note: " << d << '\n';
  int code = kOk;
  for (const auto& cell : result.cells) {
    if (cell.failure) {
      std::cerr << "error: " << cell.alternative.label() << " n=" << cell.n << ' '
                << cell.test.label() << ": " << *cell.failure << '\n';
      code = kNumeric;
    }
  }
  return code;
}

struct SlopeArgs {
  std::string alt;
  std::vector<double> params;
  std::string test;
  std::string psi = "unit";
  std::string grid = "default";
  unsigned threads = 1;
};

int run_slope(const SlopeArgs& args) {
  const auto spec = bl::AlternativeSpec::from_name(args.alt, args.params);
  const auto test = bl::TestKind::parse(args.test, weight_from_flag(args.psi));
  bl::GridParams grid;
  if (args.grid == "coarse") {
    grid.reference.atoms = 401;
    grid.t_points = 121;
    grid.a_divisions = 5;
    grid.b_divisions = 4;
  } else if (args.grid == "fine") {
    grid = grid.refined();
  } else if (args.grid != "default") {
    throw bl::BadValue("--grid must be coarse, default or fine");
  }
  grid.threads = args.threads;
  const auto est = bl::test_slope(spec, test, grid);
  std::cout << "alternative,test,discrepancy,exponent,slope,kind\n"
            << spec.label() << ',' << test.label() << ',' << fmt(est.discrepancy) << ','
            << fmt(est.exponent) << ',' << fmt(est.slope) << ','
            << (est.kind == bl::SlopeEstimate::Kind::Exact ? "exact" : "upper_bound") << '\n';
  return kOk;
}

struct StatArgs {
  std::string test;
  std::string data;
  std::string psi = "unit";
  double beta = 1.0;
};

int run_stat(const StatArgs& args) {
  const auto test = bl::TestKind::parse(args.test, weight_from_flag(args.psi), args.beta);
  const auto values = bl::read_data_file(args.data);
  if (values.size() < 3) throw bl::BadValue("data file needs at least 3 values");
  const bl::Sample sample(values);
  const double value = bl::evaluate_statistic(test, sample);
  std::cout << test.label() << " = " << fmt(value) << '\n';
  if (test.id() == bl::TestKind::Id::ShapiroWilk) {
    std::cout << "reported as 1 - W; large values reject normality\n";
  } else {
    std::cout << "large values reject normality\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bahadur slopes and Monte Carlo p-values for normality tests", "bahadur-lab"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Estimate mean p-values over an experiment grid");
  simulate->add_option("--config", sim.config, "Experiment file")->required();
  simulate->add_option("--out", sim.out, "CSV output (default: experiment.output)");
  simulate->add_option("--threads", sim.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  simulate->add_option("--seed", sim.seed, "Seed (overrides BAHADUR_LAB_SEED and the file)");

  SlopeArgs slope;
  auto* slope_cmd = app.add_subcommand("slope", "Bahadur slope of a test against an alternative");
  slope_cmd->add_option("--alt", slope.alt, "Alternative family, e.g. exponential")->required();
  slope_cmd->add_option("--params", slope.params, "Family parameters")->delimiter(',');
  slope_cmd->add_option("--test", slope.test, "ks, lilliefors, cvm, ad or weighted_cvm")->required();
  slope_cmd->add_option("--psi", slope.psi, "Weight: unit or ad");
  slope_cmd->add_option("--grid", slope.grid, "Grid preset: coarse, default or fine");
  slope_cmd->add_option("--threads", slope.threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  StatArgs stat;
  auto* stat_cmd = app.add_subcommand("stat", "Score a data file with one statistic");
  stat_cmd->add_option("--test", stat.test, "Test name")->required();
  stat_cmd->add_option("--data", stat.data, "One value per line")->required();
  stat_cmd->add_option("--psi", stat.psi, "Weight: unit or ad");
  stat_cmd->add_option("--beta", stat.beta, "BHEP smoothing parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (slope_cmd->parsed()) return run_slope(slope);
    if (stat_cmd->parsed()) return run_stat(stat);
  } catch (const bl::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const bl::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const bl::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const bl::Unsupported& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const bl::UndefinedMoments& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const bl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kOk;
}
