#include "ssmc/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ssmc {

std::string format_decimal(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(v))));
  // Digits after the point so that exponent + 1 + precision >= 10.
  const int precision = std::clamp(9 - exponent, 0, 340);
  std::array<char, 512> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, precision);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  std::string row;
  for (const auto& r : trace.records) {
    row.clear();
    for (double v : {r.time, r.u_o, r.i_f, r.i_o, r.x_d, r.s_raw, r.s_used, r.s_error, r.x_comp}) {
      row += format_decimal(v);
      row += ',';
    }
    row += r.t_level == SwitchLevel::kHigh ? "1," : "-1,";
    row += format_decimal(r.v_dc);
    row += ',';
    row += format_decimal(r.region_margin);
    row += r.region_satisfied ? ",1\n" : ",0\n";
    out << row;
  }
}

void write_metrics_csv(std::ostream& out, const std::vector<Metric>& metrics) {
  out << kMetricsHeader << '\n';
  for (const auto& m : metrics)
    out << m.name << ',' << format_decimal(m.window_start) << ',' << format_decimal(m.window_end) << ','
        << format_decimal(m.value) << ',' << m.unit << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace ssmc
