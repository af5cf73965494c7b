#pragma once

#include "lidx/config.hpp"

#include <map>
#include <string>

#include "json.hpp"

namespace lidx {

struct ExperimentResult {
  nlohmann::json report;                      // without generated_at
  std::map<std::string, std::string> csv;     // file name -> contents
  bool pass = false;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1);

/// Structured error payload for a failed run.
nlohmann::json error_report(const std::exception& e, const ExperimentConfig* cfg = nullptr);

/// Serialized report: sorted keys, 2-space indent, trailing newline.
std::string dump_report(const nlohmann::json& report);

/// Runs the experiment and writes report.json plus CSV files into out_dir.
/// Returns 0 on pass, 1 on a failed check, 2 on an error (error JSON is written).
int run_and_write(const ExperimentConfig& cfg, const std::string& out_dir, int jobs,
                  bool with_timestamp = true);

}  // namespace lidx
