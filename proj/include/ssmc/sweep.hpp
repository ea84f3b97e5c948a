#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ssmc/analysis.hpp"
#include "ssmc/engine.hpp"

namespace ssmc {

/// Process exit codes shared by run and sweep.
enum ExitStatus : int { kExitOk = 0, kExitConfig = 1, kExitAborted = 2 };

struct RunOutcome {
  int status = kExitOk;
  std::string message;
  Trace trace;  // partial when the run aborted
  std::vector<Metric> metrics;
};

/// Runs a scenario and computes its metrics. Never throws for run-time
/// failures; they are reported through `status`.
RunOutcome execute(const Scenario& scenario);

/// trace.csv, metrics.csv and effective_config.cfg in `dir` (created if
/// needed). Metrics are skipped for aborted runs.
void write_run_outputs(const std::filesystem::path& dir, const Scenario& scenario, const RunOutcome& outcome);

struct SweepCell {
  std::string label;  // value text as given on the command line
  std::optional<Scenario> scenario;  // empty when the override was rejected
  std::string error;
};

/// One cell per value with `dotted_key` overridden on a copy of `base`.
std::vector<SweepCell> make_sweep_cells(const Scenario& base, const std::string& dotted_key,
                                        const std::vector<std::string>& values);

struct SweepOptions {
  std::optional<std::filesystem::path> out_dir;  // one sub-directory per cell when set
  std::string key;                               // names the sub-directories
  bool keep_traces = false;
};

struct CellResult {
  std::string label;
  int status = kExitOk;
  std::string message;
  std::vector<Metric> metrics;
  std::optional<Trace> trace;
};

/// Reference implementation: cells one after another.
std::vector<CellResult> sweep_serial(const std::vector<SweepCell>& cells, const SweepOptions& options);

/// Cells distributed over OpenMP threads. Each cell owns its scenario,
/// result slot and output directory, so results equal sweep_serial.
std::vector<CellResult> sweep_parallel(const std::vector<SweepCell>& cells, const SweepOptions& options);

std::string cell_directory_name(const std::string& key, const std::string& label);

/// axis_value,status,metric,window_start,window_end,value,unit,message
void write_summary_csv(std::ostream& out, const std::vector<CellResult>& results);

/// Worst status over the cells.
int sweep_status(const std::vector<CellResult>& results);

}  // namespace ssmc
