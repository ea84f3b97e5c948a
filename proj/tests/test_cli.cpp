#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ssmc/config.hpp"
#include "ssmc/sweep.hpp"

namespace fs = std::filesystem;
using namespace ssmc;

namespace {

const fs::path kFigures = SSMC_FIGURES_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ssmc_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SSMC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

// First steady-window value of a metric for each swept value.
std::map<std::string, double> first_metric(const fs::path& summary, const std::string& name) {
  std::map<std::string, double> out;
  for (const auto& r : read_csv(summary))
    if (r.size() >= 6 && r[2] == name && !out.contains(r[0])) out[r[0]] = std::stod(r[5]);
  return out;
}

}  // namespace

TEST_CASE("run writes the trace, metrics and effective config") {
  const fs::path out = scratch("fig4");
  REQUIRE(cli("run --quiet --config " + (kFigures / "fig4.cfg").string() + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "trace.csv"));
  CHECK(fs::exists(out / "metrics.csv"));
  CHECK(fs::exists(out / "effective_config.cfg"));
  const Scenario sc = parse_config_file(kFigures / "fig4.cfg");
  CHECK(count_lines(out / "trace.csv") == static_cast<std::size_t>(sc.tick_count()) + 1);
  const auto rows = read_csv(out / "trace.csv");
  CHECK(rows[0].size() == 13);
  CHECK(parse_config_file(out / "effective_config.cfg") == sc);
}

TEST_CASE("staircase run reports region satisfaction per dc level") {
  const fs::path out = scratch("fig3");
  REQUIRE(cli("run --quiet --config " + (kFigures / "fig3.cfg").string() + " --out " + out.string()) == 0);
  std::vector<double> levels;
  for (const auto& r : read_csv(out / "metrics.csv"))
    if (r[0] == "vdc_level") levels.push_back(std::stod(r[3]));
  CHECK(levels == std::vector<double>{150, 180, 200, 250, 300, 400});
  std::size_t fractions = 0;
  for (const auto& r : read_csv(out / "metrics.csv")) fractions += r[0] == "region_ok_fraction";
  CHECK(fractions == 6);
}

TEST_CASE("aborted run exits 2 and leaves the partial trace") {
  const fs::path dir = scratch("abort");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.cfg") << "[controller]\nlambda = 1e308\n[engine]\nduration = 0.01\n";
  CHECK(cli("run --config " + (dir / "bad.cfg").string() + " --out " + (dir / "out").string()) == 2);
  CHECK(fs::exists(dir / "out" / "trace.csv"));
  CHECK(count_lines(dir / "out" / "trace.csv") >= 2);
}

TEST_CASE("config and usage errors exit 1") {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.cfg") << "[controller]\nlambda = -1\n";
  CHECK(cli("run --config " + (dir / "bad.cfg").string() + " --out " + (dir / "o").string()) == 1);
  CHECK(cli("run --config " + (kFigures / "fig4.cfg").string() + " --out /proc/ssmc/out") == 1);
  CHECK(cli("frobnicate") == 1);
  CHECK(cli("sweep --config " + (kFigures / "fig4.cfg").string() + " --out " + (dir / "s").string() +
            " --axis controller.mode --values smc") == 1);
  CHECK(cli("version") == 0);
  CHECK(cli("min-vdc") == 0);
}

TEST_CASE("dc sweep separates infeasible from feasible levels") {
  const fs::path out = scratch("sweep_vdc");
  REQUIRE(cli("sweep --quiet --config " + (kFigures / "fig3_level.cfg").string() + " --out " + out.string() +
              " --axis vdc.initial --values 150,180,200,250,300,400") == 0);
  const auto env = first_metric(out / "summary.csv", "error_envelope");
  REQUIRE(env.size() == 6);
  const double two_h_over_lambda = 2.0 * 20000.0 / 4480.0;
  CHECK(env.at("150") > two_h_over_lambda);
  CHECK(env.at("180") > two_h_over_lambda);
  for (const char* v : {"200", "250", "300", "400"}) {
    CAPTURE(v);
    CHECK(env.at(v) <= 8.0);
  }
  CHECK(fs::exists(out / "vdc.initial=150" / "trace.csv"));
}

TEST_CASE("finer decision interval lowers the asymmetry") {
  const fs::path out = scratch("sweep_tdi");
  REQUIRE(cli("sweep --quiet --config " + (kFigures / "fig4.cfg").string() + " --out " + out.string() +
              " --axis controller.t_di --values 10e-6,2e-6") == 0);
  const auto idx = first_metric(out / "summary.csv", "asymmetry_index");
  CHECK(idx.at("2e-6") < idx.at("10e-6"));
}

TEST_CASE("single-value sweep reproduces run output") {
  const fs::path run_out = scratch("single_run");
  const fs::path sweep_out = scratch("single_sweep");
  const std::string cfg = (kFigures / "fig6.cfg").string();
  REQUIRE(cli("run --quiet --config " + cfg + " --out " + run_out.string()) == 0);
  REQUIRE(cli("sweep --quiet --config " + cfg + " --out " + sweep_out.string() +
              " --axis vdc.initial --values 400") == 0);
  const fs::path cell = sweep_out / "vdc.initial=400";
  for (const char* f : {"trace.csv", "metrics.csv", "effective_config.cfg"}) {
    CAPTURE(f);
    CHECK(slurp(run_out / f) == slurp(cell / f));
  }
}

TEST_CASE("failed sweep cells are noted in the summary") {
  const fs::path out = scratch("sweep_fail");
  CHECK(cli("sweep --quiet --config " + (kFigures / "fig3_level.cfg").string() + " --out " + out.string() +
            " --axis vdc.initial --values 300,-5") == 1);
  bool noted = false;
  for (const auto& r : read_csv(out / "summary.csv"))
    if (r[0] == "-5") noted = r[1] == "1" && r[7].find("vdc initial") != std::string::npos;
  CHECK(noted);
}

TEST_CASE("parallel sweep equals the serial reference") {
  Scenario base = parse_config_file(kFigures / "fig3_level.cfg");
  base.engine.duration = 0.06;
  const auto cells = make_sweep_cells(base, "vdc.initial", {"150", "200", "300", "x", "400"});
  SweepOptions opt;
  opt.keep_traces = true;
  const auto a = sweep_serial(cells, opt);
  const auto b = sweep_parallel(cells, opt);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].status == b[i].status);
    CHECK(a[i].label == b[i].label);
    std::ostringstream sa, sb;
    write_summary_csv(sa, {a[i]});
    write_summary_csv(sb, {b[i]});
    CHECK(sa.str() == sb.str());
    if (a[i].trace) {
      REQUIRE(b[i].trace);
      CHECK(a[i].trace->records.back().u_o == b[i].trace->records.back().u_o);
    }
  }
  CHECK(a[3].status == kExitConfig);
}
