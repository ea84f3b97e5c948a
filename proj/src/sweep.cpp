#include "ssmc/sweep.hpp"

#include <algorithm>
#include <sstream>

#include "ssmc/config.hpp"
#include "ssmc/error.hpp"
#include "ssmc/io.hpp"

namespace ssmc {
namespace {

std::string csv_safe(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return s;
}

CellResult run_cell(const SweepCell& cell, const SweepOptions& options) {
  CellResult res;
  res.label = cell.label;
  if (!cell.scenario) {
    res.status = kExitConfig;
    res.message = cell.error;
    return res;
  }
  RunOutcome outcome = execute(*cell.scenario);
  res.status = outcome.status;
  res.message = outcome.message;
  if (options.out_dir) {
    try {
      write_run_outputs(*options.out_dir / cell_directory_name(options.key, cell.label), *cell.scenario, outcome);
    } catch (const std::exception& e) {
      res.status = kExitConfig;
      res.message = e.what();
    }
  }
  res.metrics = std::move(outcome.metrics);
  if (options.keep_traces) res.trace = std::move(outcome.trace);
  return res;
}

}  // namespace

RunOutcome execute(const Scenario& scenario) {
  RunOutcome out;
  try {
    out.trace = run(scenario);
    out.metrics = standard_metrics(out.trace, scenario.engine.metric_settle);
  } catch (const AbortedRun& e) {
    out.status = kExitAborted;
    out.message = e.what();
    out.trace = e.partial();
  } catch (const ConfigError& e) {
    out.status = kExitConfig;
    out.message = e.what();
  }
  return out;
}

void write_run_outputs(const std::filesystem::path& dir, const Scenario& scenario, const RunOutcome& outcome) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "effective_config.cfg", effective_config(scenario));
  std::ostringstream trace;
  write_trace_csv(trace, outcome.trace);
  write_text_file(dir / "trace.csv", trace.str());
  if (outcome.status == kExitOk) {
    std::ostringstream metrics;
    write_metrics_csv(metrics, outcome.metrics);
    write_text_file(dir / "metrics.csv", metrics.str());
  }
}

std::vector<SweepCell> make_sweep_cells(const Scenario& base, const std::string& dotted_key,
                                        const std::vector<std::string>& values) {
  std::vector<SweepCell> cells;
  for (const auto& v : values) {
    SweepCell cell;
    cell.label = v;
    try {
      Scenario sc = base;
      set_config_value(sc, dotted_key, v);
      cell.scenario = std::move(sc);
    } catch (const ConfigError& e) {
      cell.error = e.what();
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::vector<CellResult> sweep_serial(const std::vector<SweepCell>& cells, const SweepOptions& options) {
  std::vector<CellResult> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(run_cell(c, options));
  return out;
}

std::vector<CellResult> sweep_parallel(const std::vector<SweepCell>& cells, const SweepOptions& options) {
  std::vector<CellResult> out(cells.size());
  const auto n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = run_cell(cells[static_cast<std::size_t>(i)], options);
  return out;
}

std::string cell_directory_name(const std::string& key, const std::string& label) {
  std::string name = key.empty() ? label : key + "=" + label;
  std::replace_if(name.begin(), name.end(), [](char c) { return c == '/' || c == '\\' || c == ' '; }, '_');
  return name;
}

void write_summary_csv(std::ostream& out, const std::vector<CellResult>& results) {
  out << "axis_value,status,metric,window_start,window_end,value,unit,message\n";
  for (const auto& r : results) {
    const std::string label = csv_safe(r.label);
    if (r.status != kExitOk) {
      out << label << ',' << r.status << ",,,,,," << csv_safe(r.message) << '\n';
      continue;
    }
    for (const auto& m : r.metrics)
      out << label << ",0," << m.name << ',' << format_decimal(m.window_start) << ',' << format_decimal(m.window_end)
          << ',' << format_decimal(m.value) << ',' << m.unit << ",\n";
  }
}

int sweep_status(const std::vector<CellResult>& results) {
  int s = kExitOk;
  for (const auto& r : results) s = std::max(s, r.status);
  return s;
}

}  // namespace ssmc
