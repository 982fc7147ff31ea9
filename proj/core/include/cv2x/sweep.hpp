#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cv2x/config.hpp"
#include "cv2x/metrics.hpp"

namespace cv2x {

struct SweepSpec {
  ScenarioConfig base;
  std::vector<double> flows;
  std::vector<int> batchsizes;
  std::vector<std::uint64_t> seeds;
  unsigned jobs = 1;
  bool trace = false;
};

/// What a sweep keeps from each run for the plot files.
struct SweepRun {
  double flow = 0.0;
  int batchsize = 1;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  bool ok = false;
  std::string error;
  std::vector<double> sct_ms;
  RunningStats cbr;
  RunningStats itt;
  std::map<int, double> attempts;
  PerCounter per;
};

/// `f<flow>_b<b>_s<seed>`.
std::string run_dir_name(double flow, int batchsize, std::uint64_t seed);

/// Every (flow, b, seed) combination in that nesting order. Runs execute on up
/// to `jobs` threads; a failing run is recorded and the others continue.
std::vector<SweepRun> sweep(const SweepSpec& spec, const std::filesystem::path& out);

/// sct_cdf.csv, cbr_by_flow.csv, itt_by_flow.csv, attempts_by_flow.csv and
/// per_by_flow.csv, pooled over seeds per (flow, b).
void emit_plot_data(const std::vector<SweepRun>& runs, const std::filesystem::path& dir);

/// Parses "1,5,10" or "1..5" (inclusive range) into numbers.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace cv2x
