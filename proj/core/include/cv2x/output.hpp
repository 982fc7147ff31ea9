#pragma once

#include <filesystem>
#include <string>

#include "cv2x/engine.hpp"

namespace cv2x {

/// summary.json contents: counts, percentile tables and the config hash.
std::string summary_json(const RunResult& result);

/// Writes the per-run file set into `dir` (created if missing):
/// effective_config.txt, summary.json, service_log.csv, sct.csv,
/// attempts.csv, per.csv, cbr.csv, itt.csv, crossings.csv.
void write_run_outputs(const std::filesystem::path& dir, const RunResult& result);

}  // namespace cv2x
