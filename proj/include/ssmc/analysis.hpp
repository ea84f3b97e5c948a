#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssmc/engine.hpp"

namespace ssmc {

/// Half-open analysis window [t_start, t_end).
struct MetricWindow {
  double t_start;
  double t_end;
};

class InvalidWindow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The sliding variable never settles back into the band.
class NotReached : public std::runtime_error {
 public:
  NotReached(const std::string& what, double max_remaining)
      : std::runtime_error(what), max_remaining_(max_remaining) {}
  double max_remaining() const { return max_remaining_; }

 private:
  double max_remaining_;
};

/// Single-bin DFT amplitude (2/N scaling) at f over the samples of `series`
/// whose time t0 + n / sample_rate falls in the window. The window must span
/// an integer number of periods of f.
double fundamental_component(std::span<const double> series, double f, double sample_rate,
                             const MetricWindow& window, double t0 = 0.0);

/// Smallest delay after t_event from which |s_used| <= band holds for the
/// following `dwell` ticks as well.
double reaching_time(const Trace& trace, double t_event, double band, int dwell = 5);

/// Largest per-tick |s_n - s_{n-1}| / t_di over non-event tick pairs.
double max_s_dot(const Trace& trace);

/// Band a sampled relay can actually hold: h plus one tick of travel,
/// h + max|s_dot| t_di. At coarse decision intervals the sampled s
/// overshoots h on nearly every switching.
double reaching_band(const Trace& trace);

/// max |u_o - x_d| over the window.
double error_envelope(const Trace& trace, const MetricWindow& window);

/// 50 Hz (f_n) amplitude of s_raw divided by h.
double asymmetry_index(const Trace& trace, const MetricWindow& window);

/// 50 Hz amplitude of u_o - x_d.
double fundamental_error(const Trace& trace, const MetricWindow& window);

/// Index range [first, last) of records inside the window.
std::pair<std::size_t, std::size_t> window_range(const Trace& trace, const MetricWindow& window);

std::vector<double> column(const Trace& trace, double TraceRecord::*field);

/// Event-free segments [0, e1), [e1, e2), ..., [e_n, duration).
std::vector<MetricWindow> segments(const Trace& trace);

/// Steady window of a segment: skip `settle`, then keep the largest whole
/// number of fundamental periods that ends at the segment end. Empty when
/// less than one period remains.
std::vector<MetricWindow> steady_windows(const Trace& trace, double settle);

// Invariant checks ---------------------------------------------------------

struct ReachingLawReport {
  std::size_t pairs_checked = 0;
  std::size_t violations = 0;
  double max_s_dot = 0.0;      // V/s^2, over the trace
  double worst_excess = 0.0;   // largest lhs - bound seen among checked pairs
};

/// For tick pairs decided outside the band (|s_{n-1}| > h) with the
/// contraction condition holding at both ticks, checks
///   ((s_n^2 - s_{n-1}^2) / 2) / t_di <= -eta min(|s_n|, |s_{n-1}|) + slack.
/// The slack is zero for same-sign pairs and (max|s_dot| t_di)^2 / (2 t_di)
/// for pairs that cross zero inside the interval, plus the compensator's
/// per-tick jump |s_error_n - s_error_{n-1}| max(|s|) / t_di. Pairs whose
/// second tick carries an event are skipped.
ReachingLawReport check_reaching_law(const Trace& trace);

struct BoundReport {
  double max_error = 0.0;  // max |u_o - x_d + x_comp|
  double max_s = 0.0;      // max |s_used|
  double bound = 0.0;      // max_s / lambda + allowance
  bool holds = true;
};

/// Sliding-to-tracking bound on a window: max|x~| <= max|s|/lambda + allowance,
/// with allowance = eta t_di / lambda unless given.
BoundReport check_bound_translation(const Trace& trace, const MetricWindow& window, double allowance = -1.0);

// Metric report ------------------------------------------------------------

struct Metric {
  std::string name;
  double window_start;
  double window_end;
  double value;
  std::string unit;
};

/// Registered metrics for one run: per segment the dc level, region
/// satisfaction, margin and reaching time; per steady window the error
/// envelope, 50 Hz residual, asymmetry index and peak |s_used|.
std::vector<Metric> standard_metrics(const Trace& trace, double settle);

}  // namespace ssmc
