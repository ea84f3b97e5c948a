#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "ssmc/analysis.hpp"
#include "ssmc/engine.hpp"

namespace ssmc {

inline constexpr const char* kTraceHeader =
    "time,u_o,i_f,i_o,x_d,s_raw,s_used,s_error,x_comp,t_level,v_dc,region_margin,region_ok";
inline constexpr const char* kMetricsHeader = "name,window_start,window_end,value,unit";

/// Plain decimal (never exponent) with at least 10 significant digits.
/// Non-finite values print as nan, inf or -inf.
std::string format_decimal(double v);

void write_trace_csv(std::ostream& out, const Trace& trace);
void write_metrics_csv(std::ostream& out, const std::vector<Metric>& metrics);

/// Writes `contents` to `path`, throwing std::runtime_error on failure.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace ssmc
