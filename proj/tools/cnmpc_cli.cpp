// Command-line front end: closed-loop runs and the scaling benchmark.

#include "cnmpc/benchmark.hpp"
#include "cnmpc/io.hpp"
#include "cnmpc/simulation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitStrict = 3;

// Violations above this fail a --strict run.
constexpr double kStrictViolation = 0.1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

cnmpc::Scenario resolve_scenario(const std::string& source) {
  if (auto sc = cnmpc::find_builtin_scenario(source)) {
    return *sc;
  }
  if (std::filesystem::is_regular_file(source)) {
    return cnmpc::load_scenario(source);
  }
  throw UsageError("unknown scenario '" + source + "' (not a built-in name or a readable file)");
}

bool parse_range(const std::string& text, std::size_t& lo, std::size_t& hi) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      lo = hi = std::stoul(text);
    } else {
      lo = std::stoul(text.substr(0, dots));
      hi = std::stoul(text.substr(dots + 2));
    }
  } catch (const std::exception&) {
    return false;
  }
  return lo >= 2 && lo <= hi;
}

int cmd_run(const std::string& source, std::uint64_t seed, const std::string& out, bool no_noise,
            std::optional<std::size_t> penalty_iters, bool strict) {
  cnmpc::Scenario sc = resolve_scenario(source);
  if (no_noise) {
    sc.noise.enabled = false;
  }
  if (penalty_iters) {
    sc.controller_overrides.penalty_iterations = *penalty_iters;
  }
  const cnmpc::ControllerConfig base;
  const auto log = cnmpc::run_scenario(sc, base, seed);
  const auto metrics = cnmpc::compute_metrics(log, sc, sc.configure(base),
                                              cnmpc::kTimingWarmupSteps);
  const auto files = cnmpc::write_run_outputs(out, log, metrics);

  std::printf("scenario %s, seed %llu, %zu steps\n", sc.name.c_str(),
              static_cast<unsigned long long>(seed), log.solver.size());
  std::printf("  min pairwise distance   %.4f m\n", metrics.min_pairwise_distance);
  std::printf("  max safety violation    %.4f m\n", metrics.max_safety_violation);
  std::printf("  max obstacle violation  %.4f m\n", metrics.max_obstacle_penetration);
  std::printf("  solve time mean/max/min %.3f / %.3f / %.3f ms\n", metrics.solve_ms_mean,
              metrics.solve_ms_max, metrics.solve_ms_min);
  std::printf("  wrote %s, %s, %s\n", files.trajectory.c_str(), files.solver.c_str(),
              files.metrics.c_str());

  if (log.aborted_steps > 0) {
    std::fprintf(stderr, "solver aborted on %zu steps\n", log.aborted_steps);
    return kExitRuntime;
  }
  if (strict && (metrics.max_safety_violation > kStrictViolation ||
                 metrics.max_obstacle_penetration > kStrictViolation)) {
    std::fprintf(stderr, "strict mode: constraint violation above %.2f m\n", kStrictViolation);
    return kExitStrict;
  }
  return kExitOk;
}

int cmd_bench(std::size_t lo, std::size_t hi, std::size_t trials, std::uint64_t seed,
              const std::string& out) {
  const auto rows = cnmpc::run_benchmark(lo, hi, trials, seed, cnmpc::ControllerConfig{});
  std::ostringstream table;
  cnmpc::write_bench_csv(table, rows);
  std::cout << table.str();

  std::filesystem::create_directories(out);
  const auto path = std::filesystem::path(out) / "bench.csv";
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  os << table.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Centralized NMPC for multiple MAVs"};
  app.require_subcommand(1);

  std::string scenario;
  std::uint64_t seed = 0;
  std::string out = "results";
  bool no_noise = false;
  bool strict = false;
  std::optional<std::size_t> penalty_iters;
  auto* run = app.add_subcommand("run", "Run one closed-loop scenario");
  run->add_option("--scenario", scenario, "Built-in scenario name or path to a scenario file")
      ->required();
  run->add_option("--seed", seed, "Noise seed");
  run->add_option("--out", out, "Output directory");
  run->add_flag("--no-noise", no_noise, "Disable state noise");
  run->add_option("--penalty-iters", penalty_iters, "Outer penalty iterations")
      ->check(CLI::PositiveNumber);
  run->add_flag("--strict", strict, "Exit 3 when a violation exceeds 0.1 m");

  std::string agents = "2..9";
  std::size_t trials = 1;
  std::uint64_t bench_seed = 0;
  std::string bench_out = "results";
  auto* bench = app.add_subcommand("bench", "Solver-time scaling sweep over the fleet size");
  bench->add_option("--agents", agents, "Agent range A..B")->required();
  bench->add_option("--trials", trials, "Runs per fleet size")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_seed, "Seed of the first trial");
  bench->add_option("--out", bench_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) {
      return cmd_run(scenario, seed, out, no_noise, penalty_iters, strict);
    }
    std::size_t lo = 0;
    std::size_t hi = 0;
    if (!parse_range(agents, lo, hi)) {
      std::fprintf(stderr, "invalid --agents range '%s', expected A..B with 2 <= A <= B\n",
                   agents.c_str());
      return kExitUsage;
    }
    return cmd_bench(lo, hi, trials, bench_seed, bench_out);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
