#include "ssmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ssmc {
namespace {

double trace_end(const Trace& trace) {
  if (trace.records.empty()) return 0.0;
  return trace.records.back().time + trace.sample_interval();
}

void require_integer_periods(const MetricWindow& w, double f) {
  if (!(w.t_end > w.t_start)) throw InvalidWindow("window end must be after its start");
  const double periods = (w.t_end - w.t_start) * f;
  if (std::abs(periods - std::round(periods)) > 1e-6 || std::round(periods) < 1.0)
    throw InvalidWindow("window must span an integer number of periods of " + std::to_string(f) + " Hz");
}

}  // namespace

std::vector<double> column(const Trace& trace, double TraceRecord::*field) {
  std::vector<double> out;
  out.reserve(trace.records.size());
  for (const auto& r : trace.records) out.push_back(r.*field);
  return out;
}

std::pair<std::size_t, std::size_t> window_range(const Trace& trace, const MetricWindow& window) {
  // Records sit on a regular grid; compare in sample units to avoid drift.
  const double dt = trace.sample_interval();
  const double t0 = trace.records.empty() ? 0.0 : trace.records.front().time;
  const auto to_index = [&](double t) {
    const double x = std::ceil((t - t0) / dt - 1e-6);
    return static_cast<std::size_t>(std::clamp(x, 0.0, static_cast<double>(trace.records.size())));
  };
  return {to_index(window.t_start), to_index(window.t_end)};
}

double fundamental_component(std::span<const double> series, double f, double sample_rate,
                             const MetricWindow& window, double t0) {
  if (!(sample_rate > 2.0 * f)) throw InvalidWindow("sample rate must exceed twice the analysis frequency");
  require_integer_periods(window, f);
  const double dt = 1.0 / sample_rate;
  const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil((window.t_start - t0) / dt - 1e-6)));
  const auto last = static_cast<std::size_t>(
      std::clamp(std::ceil((window.t_end - t0) / dt - 1e-6), 0.0, static_cast<double>(series.size())));
  if (last <= first) throw InvalidWindow("window holds no samples");
  const std::size_t n = last - first;
  if (std::abs(static_cast<double>(n) * dt - (window.t_end - window.t_start)) > 0.5 * dt)
    throw InvalidWindow("window extends beyond the series");
  const double w = 2.0 * std::numbers::pi * f;
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    re += series[i] * std::cos(w * t);
    im += series[i] * std::sin(w * t);
  }
  return 2.0 / static_cast<double>(n) * std::hypot(re, im);
}

double reaching_time(const Trace& trace, double t_event, double band, int dwell) {
  const auto [first, end] = window_range(trace, {t_event, trace_end(trace)});
  const auto& rs = trace.records;
  std::size_t run = 0;
  for (std::size_t i = first; i < end; ++i) {
    if (std::abs(rs[i].s_used) <= band) {
      if (++run == static_cast<std::size_t>(dwell) + 1) return std::max(0.0, rs[i - dwell].time - t_event);
    } else {
      run = 0;
    }
  }
  double max_remaining = 0.0;
  const std::size_t tail = end >= static_cast<std::size_t>(dwell) + 1 ? end - dwell - 1 : first;
  for (std::size_t i = std::max(first, tail); i < end; ++i) max_remaining = std::max(max_remaining, std::abs(rs[i].s_used));
  throw NotReached("sliding variable did not settle into the band after t=" + std::to_string(t_event),
                   max_remaining);
}

double max_s_dot(const Trace& trace) {
  const auto& rs = trace.records;
  const double dt = trace.sample_interval();
  double m = 0.0;
  for (std::size_t n = 1; n < rs.size(); ++n) {
    if (rs[n].event_tick) continue;
    m = std::max(m, std::abs(rs[n].s_used - rs[n - 1].s_used) / dt);
  }
  return m;
}

double reaching_band(const Trace& trace) { return trace.controller.h + max_s_dot(trace) * trace.sample_interval(); }

double error_envelope(const Trace& trace, const MetricWindow& window) {
  const auto [first, last] = window_range(trace, window);
  double m = 0.0;
  for (std::size_t i = first; i < last; ++i)
    m = std::max(m, std::abs(trace.records[i].u_o - trace.records[i].x_d));
  return m;
}

namespace {
double fundamental_of(const Trace& trace, const MetricWindow& window, auto&& value) {
  std::vector<double> series;
  series.reserve(trace.records.size());
  for (const auto& r : trace.records) series.push_back(value(r));
  const double t0 = trace.records.empty() ? 0.0 : trace.records.front().time;
  return fundamental_component(series, trace.f_n, 1.0 / trace.sample_interval(), window, t0);
}
}  // namespace

double asymmetry_index(const Trace& trace, const MetricWindow& window) {
  return fundamental_of(trace, window, [](const TraceRecord& r) { return r.s_raw; }) / trace.controller.h;
}

double fundamental_error(const Trace& trace, const MetricWindow& window) {
  return fundamental_of(trace, window, [](const TraceRecord& r) { return r.u_o - r.x_d; });
}

std::vector<MetricWindow> segments(const Trace& trace) {
  std::vector<MetricWindow> out;
  const double end = trace_end(trace);
  double start = 0.0;
  for (double e : trace.event_times) {
    if (e <= start) continue;
    if (e >= end) break;
    out.push_back({start, e});
    start = e;
  }
  if (end > start) out.push_back({start, end});
  return out;
}

std::vector<MetricWindow> steady_windows(const Trace& trace, double settle) {
  std::vector<MetricWindow> out;
  const double period = 1.0 / trace.f_n;
  for (const auto& seg : segments(trace)) {
    const double avail = seg.t_end - (seg.t_start + settle);
    const double periods = std::floor(avail / period + 1e-9);
    if (periods < 1.0) continue;
    out.push_back({seg.t_end - periods * period, seg.t_end});
  }
  return out;
}

ReachingLawReport check_reaching_law(const Trace& trace) {
  ReachingLawReport rep;
  const auto& rs = trace.records;
  const double dt = trace.sample_interval();
  const double h = trace.controller.h;
  const double eta = trace.controller.eta;
  rep.max_s_dot = max_s_dot(trace);
  const double crossing_slack = rep.max_s_dot * rep.max_s_dot * dt / 2.0;
  for (std::size_t n = 1; n < rs.size(); ++n) {
    const TraceRecord& a = rs[n - 1];
    const TraceRecord& b = rs[n];
    if (b.event_tick) continue;
    if (!(std::abs(a.s_used) > h)) continue;
    if (a.contraction_margin < 0.0 || b.contraction_margin < 0.0) continue;
    ++rep.pairs_checked;
    const double lhs = (b.s_used * b.s_used - a.s_used * a.s_used) / 2.0 / dt;
    double slack = std::abs(b.s_error - a.s_error) * (std::max(std::abs(a.s_used), std::abs(b.s_used)) +
                                                      std::abs(b.s_error - a.s_error)) / dt;
    if (a.s_used * b.s_used < 0.0) slack += crossing_slack;
    const double bound = -eta * std::min(std::abs(a.s_used), std::abs(b.s_used)) + slack;
    rep.worst_excess = std::max(rep.worst_excess, lhs - bound);
    if (lhs > bound) ++rep.violations;
  }
  return rep;
}

BoundReport check_bound_translation(const Trace& trace, const MetricWindow& window, double allowance) {
  const auto [first, last] = window_range(trace, window);
  const double lambda = trace.controller.lambda;
  if (allowance < 0.0) allowance = trace.controller.eta * trace.t_di / lambda;
  BoundReport rep;
  for (std::size_t i = first; i < last; ++i) {
    const auto& r = trace.records[i];
    rep.max_error = std::max(rep.max_error, std::abs(r.u_o - r.x_d + r.x_comp));
    rep.max_s = std::max(rep.max_s, std::abs(r.s_used));
  }
  rep.bound = rep.max_s / lambda + allowance;
  rep.holds = rep.max_error <= rep.bound;
  return rep;
}

std::vector<Metric> standard_metrics(const Trace& trace, double settle) {
  std::vector<Metric> out;
  if (trace.records.empty()) return out;
  const double band = reaching_band(trace);
  for (const auto& seg : segments(trace)) {
    const auto [first, last] = window_range(trace, seg);
    if (last <= first) continue;
    std::size_t ok = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = first; i < last; ++i) {
      ok += trace.records[i].region_satisfied ? 1 : 0;
      min_margin = std::min(min_margin, trace.records[i].region_margin);
    }
    out.push_back({"vdc_level", seg.t_start, seg.t_end, trace.records[first].v_dc, "V"});
    out.push_back({"region_ok_fraction", seg.t_start, seg.t_end,
                   static_cast<double>(ok) / static_cast<double>(last - first), "1"});
    out.push_back({"region_margin_min", seg.t_start, seg.t_end, min_margin, "V/s^2"});
    double rt = std::numeric_limits<double>::quiet_NaN();
    try {
      rt = reaching_time(trace, seg.t_start, band);
      if (seg.t_start + rt >= seg.t_end) rt = std::numeric_limits<double>::quiet_NaN();
    } catch (const NotReached&) {
    }
    out.push_back({"reaching_time", seg.t_start, seg.t_end, rt, "s"});
  }
  for (const auto& w : steady_windows(trace, settle)) {
    double s_max = 0.0;
    const auto [first, last] = window_range(trace, w);
    for (std::size_t i = first; i < last; ++i) s_max = std::max(s_max, std::abs(trace.records[i].s_used));
    out.push_back({"error_envelope", w.t_start, w.t_end, error_envelope(trace, w), "V"});
    out.push_back({"fundamental_error", w.t_start, w.t_end, fundamental_error(trace, w), "V"});
    out.push_back({"asymmetry_index", w.t_start, w.t_end, asymmetry_index(trace, w), "1"});
    out.push_back({"s_used_max", w.t_start, w.t_end, s_max, "V/s"});
  }
  return out;
}

}  // namespace ssmc
