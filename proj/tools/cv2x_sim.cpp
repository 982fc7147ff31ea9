// cv2x-sim: single runs and flow x batchsize sweeps.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "cv2x/config.hpp"
#include "cv2x/engine.hpp"
#include "cv2x/output.hpp"
#include "cv2x/sweep.hpp"

namespace {

cv2x::ScenarioConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  cv2x::ScenarioConfig config = path.empty() ? cv2x::default_scenario() : cv2x::load_scenario(path);
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw cv2x::ConfigError("--set expects key=value, got '" + item + "'");
    cv2x::apply_setting(config, item.substr(0, eq), item.substr(eq + 1));
  }
  cv2x::require_valid(config);
  for (const auto& w : cv2x::config_warnings(config)) fmt::print(stderr, "warning: {}\n", w);
  return config;
}

std::vector<std::uint64_t> to_seeds(const std::vector<double>& values) {
  std::vector<std::uint64_t> out;
  for (const double v : values) {
    if (v < 0 || v != std::floor(v)) throw std::invalid_argument(fmt::format("bad seed {}", v));
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<int> to_batchsizes(const std::vector<double>& values) {
  std::vector<int> out;
  for (const double v : values) {
    if (v < 1 || v != std::floor(v)) throw std::invalid_argument(fmt::format("bad batchsize {}", v));
    out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"C-V2X mode-4 V2I transaction simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Single run");
  std::uint64_t seed = 1;
  bool trace = false;
  run->add_option("--config", config_path, "Scenario file (key = value)")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--trace", trace, "Also write reception_trace.csv and cbr_nodes.csv");
  run->add_option("--set", overrides, "Override a config key (key=value), repeatable");

  auto* sw = app.add_subcommand("sweep", "Flow x batchsize x seed sweep");
  std::string flows = "1,5,10,15,20,30";
  std::string batchsizes = "1,2,4,8,16";
  std::string seeds = "1..5";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool sweep_trace = false;
  sw->add_option("--config", config_path, "Scenario file (key = value)")->check(CLI::ExistingFile);
  sw->add_option("--flows", flows, "Flow rates, veh/s")->capture_default_str();
  sw->add_option("--batchsizes", batchsizes, "Batch sizes")->capture_default_str();
  sw->add_option("--seeds", seeds, "Seeds, list or a..b range")->capture_default_str();
  sw->add_option("--jobs", jobs, "Concurrent runs")->capture_default_str();
  sw->add_option("--out", out_dir, "Output directory")->required();
  sw->add_flag("--trace", sweep_trace, "Write traces for every run");
  sw->add_option("--set", overrides, "Override a config key (key=value), repeatable");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cv2x::ScenarioConfig config = load(config_path, overrides);
      config.rng_seed = seed;
      std::filesystem::create_directories(out_dir);
      cv2x::RunOptions options;
      std::ofstream trace_file;
      std::ofstream cbr_file;
      if (trace) {
        trace_file.open(std::filesystem::path(out_dir) / "reception_trace.csv", std::ios::binary);
        cbr_file.open(std::filesystem::path(out_dir) / "cbr_nodes.csv", std::ios::binary);
        options.reception_trace = &trace_file;
        options.cbr_trace = &cbr_file;
      }
      cv2x::Engine engine(config, options);
      const auto result = engine.run();
      cv2x::write_run_outputs(out_dir, result);
      const auto& m = result.metrics;
      fmt::print("vehicles {}  completed {}  censored {}  ineligible {}  -> {}\n", m.vehicles, m.sct.records.size(),
                 m.sct.censored, m.sct.ineligible, out_dir);
      return 0;
    }

    cv2x::SweepSpec spec;
    spec.base = load(config_path, overrides);
    spec.flows = cv2x::parse_number_list(flows);
    spec.batchsizes = to_batchsizes(cv2x::parse_number_list(batchsizes));
    spec.seeds = to_seeds(cv2x::parse_number_list(seeds));
    spec.jobs = jobs;
    spec.trace = sweep_trace;
    const auto runs = cv2x::sweep(spec, out_dir);
    cv2x::emit_plot_data(runs, std::filesystem::path(out_dir) / "plots");
    int failed = 0;
    for (const auto& r : runs) {
      if (r.ok) continue;
      ++failed;
      fmt::print(stderr, "run {} failed: {}\n", r.dir.filename().string(), r.error);
    }
    fmt::print("{} runs, {} failed -> {}\n", runs.size(), failed, out_dir);
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}
