// Command-line front end: run, sweep, min-vdc, version.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ssmc/config.hpp"
#include "ssmc/error.hpp"
#include "ssmc/io.hpp"
#include "ssmc/region.hpp"
#include "ssmc/sweep.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

int cmd_run(const std::string& config, const std::string& out_dir, bool quiet) {
  ssmc::Scenario sc;
  try {
    sc = ssmc::parse_config_file(config);
  } catch (const ssmc::ConfigError& e) {
    std::cerr << config << ": " << e.what() << '\n';
    return ssmc::kExitConfig;
  }
  const ssmc::RunOutcome outcome = ssmc::execute(sc);
  try {
    ssmc::write_run_outputs(out_dir, sc, outcome);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return ssmc::kExitConfig;
  }
  if (outcome.status != ssmc::kExitOk) {
    std::cerr << "run failed: " << outcome.message << '\n';
    return outcome.status;
  }
  if (!quiet) {
    std::cout << "wrote " << outcome.trace.records.size() << " rows to " << out_dir << '\n';
    for (const auto& m : outcome.metrics)
      std::cout << m.name << " [" << m.window_start << ", " << m.window_end << ") = " << m.value << ' ' << m.unit
                << '\n';
  }
  return ssmc::kExitOk;
}

int cmd_sweep(const std::string& config, const std::string& out_dir, const std::string& axis,
              const std::string& values, bool quiet) {
  ssmc::Scenario base;
  try {
    base = ssmc::parse_config_file(config);
    const auto keys = ssmc::sweepable_keys();
    if (std::find(keys.begin(), keys.end(), axis) == keys.end())
      throw ssmc::ConfigError("axis '" + axis + "' is not a numeric key (use section.key)");
  } catch (const ssmc::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return ssmc::kExitConfig;
  }
  const auto list = split_values(values);
  if (list.empty()) {
    std::cerr << "--values is empty\n";
    return ssmc::kExitConfig;
  }
  const auto cells = ssmc::make_sweep_cells(base, axis, list);
  ssmc::SweepOptions opt;
  opt.out_dir = out_dir;
  opt.key = axis;
  const auto results = ssmc::sweep_parallel(cells, opt);
  std::ostringstream summary;
  ssmc::write_summary_csv(summary, results);
  try {
    ssmc::write_text_file(std::filesystem::path(out_dir) / "summary.csv", summary.str());
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return ssmc::kExitConfig;
  }
  for (const auto& r : results) {
    if (r.status != ssmc::kExitOk)
      std::cerr << axis << "=" << r.label << " failed: " << r.message << '\n';
    else if (!quiet)
      std::cout << axis << "=" << r.label << " ok\n";
  }
  return ssmc::sweep_status(results);
}

int cmd_min_vdc(const std::string& config) {
  ssmc::Scenario sc;
  if (!config.empty()) {
    try {
      sc = ssmc::parse_config_file(config);
    } catch (const ssmc::ConfigError& e) {
      std::cerr << config << ": " << e.what() << '\n';
      return ssmc::kExitConfig;
    }
  }
  ssmc::ReferenceProgram ref = sc.reference;
  ssmc::LoadProgram load = sc.load;
  const auto rep = ssmc::min_vdc(sc.params, ref, load, sc.controller.f_bound, sc.controller.eta);
  const auto bare = ssmc::min_vdc(sc.params, ref, ssmc::LoadProgram{}, 0.0, 0.0);
  const auto margin = ssmc::min_vdc_margin_preset(sc.params);
  std::printf("scenario      v_min = %.4f V  (lhs_max %.6g V/s^2 at t = %.6f s)\n", rep.v_min, rep.lhs_max,
              rep.t_at_max);
  std::printf("no load, F=eta=0     v_min = %.4f V\n", bare.v_min);
  std::printf("20 V rms margin      v_min = %.4f V\n", margin.v_min);
  return ssmc::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sliding-mode inverter simulation lab"};
  app.require_subcommand(1);
  bool quiet = false;
  std::string config;
  std::string out_dir;
  std::string axis;
  std::string values;

  auto* run = app.add_subcommand("run", "simulate one scenario");
  run->add_option("--config", config, "scenario file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_flag("--quiet", quiet);

  auto* sweep = app.add_subcommand("sweep", "simulate one scenario per value of a key");
  sweep->add_option("--config", config, "base scenario file")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--axis", axis, "swept key, e.g. vdc.initial")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_flag("--quiet", quiet);

  auto* minv = app.add_subcommand("min-vdc", "print the dc-link boundary report");
  minv->add_option("--config", config, "scenario file (defaults when omitted)");

  auto* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ssmc::kExitConfig;
  }

  if (*run) return cmd_run(config, out_dir, quiet);
  if (*sweep) return cmd_sweep(config, out_dir, axis, values, quiet);
  if (*minv) return cmd_min_vdc(config);
  if (*version) {
    std::cout << "ssmc " << kVersion << '\n';
    return 0;
  }
  return ssmc::kExitConfig;
}
