#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ssmc/compensator.hpp"
#include "ssmc/controller.hpp"
#include "ssmc/model.hpp"
#include "ssmc/region.hpp"

namespace ssmc {

struct EngineSettings {
  double duration = 0.4;                      // s
  int substeps_per_tick = 10;                 // exact plant steps between decisions
  int decimation = 1;                         // keep every n-th record; 1 in acceptance runs
  std::int64_t max_samples = 50'000'000;      // cap on substeps_per_tick * ticks
  double metric_settle = 0.04;                // s skipped after each event before steady metrics
  int reaching_dwell = 5;                     // ticks out of band that re-open a reaching window

  bool operator==(const EngineSettings&) const = default;
};

// Event actions. Times snap to the nearest decision tick, halves rounding up.
struct VdcSet { double volts; bool operator==(const VdcSet&) const = default; };
struct RefScale { double factor; bool operator==(const RefScale&) const = default; };
struct RefPhase { double radians; bool operator==(const RefPhase&) const = default; };
struct LoadSet { Load load; bool operator==(const LoadSet&) const = default; };
struct ModeSet { ControlMode mode; bool operator==(const ModeSet&) const = default; };

using EventAction = std::variant<VdcSet, RefScale, RefPhase, LoadSet, ModeSet>;

struct Event {
  double time;
  EventAction action;

  bool operator==(const Event&) const = default;
};

struct Scenario {
  InverterParams params;
  ControllerConfig controller;
  CompensatorConfig compensator;
  ReferenceProgram reference;
  LoadProgram load;
  double vdc_initial = 290.0;
  std::vector<Event> events;  // applied in order; ties keep file order
  EngineSettings engine;

  void validate() const;
  std::int64_t tick_count() const;

  bool operator==(const Scenario&) const = default;
};

struct TraceRecord {
  double time = 0.0;
  double u_o = 0.0;
  double i_f = 0.0;
  double i_o = 0.0;
  double x_d = 0.0;
  double s_raw = 0.0;
  double s_used = 0.0;
  double s_error = 0.0;
  double x_comp = 0.0;
  SwitchLevel t_level = SwitchLevel::kHigh;
  double v_dc = 0.0;
  double region_margin = 0.0;
  bool region_satisfied = true;
  // Not exported to CSV; used by the analysis checks.
  double contraction_margin = 0.0;
  double transient_deduction = 0.0;
  bool event_tick = false;
};

struct Trace {
  std::vector<TraceRecord> records;
  double t_di = 10e-6;
  int decimation = 1;
  double f_n = 50.0;
  ControllerConfig controller;
  std::vector<double> event_times;  // snapped
  std::int64_t ideal_saturated_ticks = 0;

  double sample_interval() const { return t_di * decimation; }
};

/// Numerical blow-up. Carries the trace up to and including the first
/// non-finite record.
class AbortedRun : public std::runtime_error {
 public:
  AbortedRun(const std::string& what, Trace partial) : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trace& partial() const { return partial_; }

 private:
  Trace partial_;
};

/// Index of the decision tick an event time snaps to.
std::int64_t snap_to_tick(double time, double t_di);

/// Mutable state of one closed-loop run.
class RunState {
 public:
  explicit RunState(const Scenario& scenario);

  /// Applies an event at the current tick and re-opens the reaching window
  /// at the next decision.
  void apply_event(const Event& event);

  /// Runs one decision tick and advances the plant to the next one. The
  /// returned record describes the tick instant.
  TraceRecord step();

  std::int64_t tick_index() const { return tick_; }
  double now() const;
  double v_dc() const { return v_dc_; }
  ControlMode mode() const { return controller_.config().mode; }
  const ReferenceProgram& reference() const { return reference_; }
  const LoadProgram& load() const { return load_; }
  const PlantState& plant() const { return plant_; }
  const ReachingContext& reaching_context() const { return reaching_; }
  const CompensatorState& compensator() const { return comp_; }
  std::int64_t ideal_saturated_ticks() const { return ideal_saturated_; }

 private:
  void rebuild_propagator();
  double external_current(double t) const;

  InverterParams params_;
  EngineSettings settings_;
  CompensatorConfig comp_cfg_;
  ReferenceProgram reference_;
  LoadProgram load_;
  double v_dc_;
  SlidingModeController controller_;
  CompensatorState comp_;
  PlantState plant_;
  std::optional<ExactPropagator> prop_;
  double sub_dt_;
  std::int64_t tick_ = 0;
  ReachingContext reaching_;
  bool pending_event_ = true;  // start-up anchors the first reaching window
  int out_of_band_ = 0;
  double exit_time_ = 0.0;
  double exit_s_ = 0.0;
  double prev_filter_input_ = 0.0;
  std::int64_t ideal_saturated_ = 0;
  bool last_was_event_ = false;
};

/// Executes the closed loop. Deterministic: identical scenarios give
/// bit-identical traces. Throws AbortedRun on non-finite states.
Trace run(const Scenario& scenario);

/// Inputs for the fine-step oracle: i_o(tau) = i_o + di_o_dt tau + g u_o.
struct OracleInputs {
  double v_dc = 0.0;
  double i_o = 0.0;
  double di_o_dt = 0.0;
  double conductance = 0.0;
};

/// Classical RK4 over dt with n_substeps equal sub-steps. Test oracle for the
/// exact propagator; uses only plant_derivs.
PlantState oracle_step_rk4(const PlantState& state, const OracleInputs& in, double dt, int n_substeps,
                           const InverterParams& params);

}  // namespace ssmc
