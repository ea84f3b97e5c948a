#pragma once

#include <array>
#include <limits>
#include <vector>

namespace ssmc {

/// Hardware constants of the single-phase LC-filtered bridge. Defaults are
/// the simulation setup (2 kVA, 110 V / 50 Hz, 0.3 mH / 330 uF, 290 V link).
struct InverterParams {
  double l_f = 0.3e-3;          // H
  double c_f = 330e-6;          // F
  double v_dc_nominal = 290.0;  // V
  double f_n = 50.0;            // Hz
  double v_n_rms = 110.0;       // V

  /// 1 / (l_f c_f), the natural-frequency-squared of the filter.
  double inv_lc() const { return 1.0 / (l_f * c_f); }
  double omega_n() const;
  void validate() const;

  bool operator==(const InverterParams&) const = default;
};

/// Bridge output level: +1 connects +v_dc, -1 connects -v_dc.
enum class SwitchLevel : int { kLow = -1, kHigh = 1 };

constexpr double as_double(SwitchLevel level) { return static_cast<double>(static_cast<int>(level)); }
constexpr SwitchLevel opposite(SwitchLevel level) {
  return level == SwitchLevel::kHigh ? SwitchLevel::kLow : SwitchLevel::kHigh;
}

struct PlantState {
  double i_f = 0.0;   // inductor current, A
  double u_o = 0.0;   // capacitor voltage, V
  SwitchLevel t_level = SwitchLevel::kHigh;
  double time = 0.0;  // s
};

struct PlantDerivs {
  double di_f_dt;  // A/s
  double du_o_dt;  // V/s
};

/// Filter dynamics: L di_f/dt = T v_dc - u_o, C du_o/dt = i_f - i_o.
PlantDerivs plant_derivs(const PlantState& state, double v_dc, double i_o, const InverterParams& params);

/// Same dynamics with an arbitrary bridge voltage (average-model input).
PlantDerivs plant_derivs_bridge(const PlantState& state, double bridge_voltage, double i_o,
                                const InverterParams& params);

/// Exact propagator for the LC filter over a fixed step. The plant is affine
/// in (i_f, u_o) for a held bridge voltage and held external current, so one
/// step is e^{A dt} applied around the equilibrium. A resistive load with
/// conductance g is folded into A instead of being sampled.
class ExactPropagator {
 public:
  ExactPropagator(const InverterParams& params, double dt, double conductance = 0.0);

  /// Advance by dt with bridge voltage w and external current i_ext held.
  PlantState step(const PlantState& state, double bridge_voltage, double i_ext) const;

  double dt() const { return dt_; }
  double conductance() const { return conductance_; }

 private:
  double dt_;
  double conductance_;
  std::array<double, 4> phi_;  // row-major e^{A dt}
};

/// One exact step with T v_dc held and i_o held (zero-order hold). A nonzero
/// conductance adds a resistive load on top of i_o.
PlantState plant_step_exact(const PlantState& state, double v_dc, double i_o, double dt,
                            const InverterParams& params, double conductance = 0.0);

/// f(u_o, i_o) = -u_o/(L C) - (di_o/dt)/C, so that d2u_o/dt2 = f + T v_dc/(L C).
double f_model(double u_o, double di_o_dt, const InverterParams& params);

// Reference ---------------------------------------------------------------

struct ReferenceStep {
  double time;
  double scale;         // multiplier on the base amplitude
  double phase_offset;  // rad, added to the base phase

  bool operator==(const ReferenceStep&) const = default;
};

struct ReferenceProgram {
  double amplitude = 155.563491861;  // V peak, 110 V rms
  double frequency = 50.0;           // Hz
  double phase = 0.0;                // rad
  std::vector<ReferenceStep> steps;  // strictly increasing times

  void validate() const;
  /// Scale and phase offset active at t (a step at exactly t is active).
  ReferenceStep active(double t) const;

  bool operator==(const ReferenceProgram&) const = default;
};

struct ReferenceSample {
  double x_d;      // V
  double xd_dot;   // V/s
  double xd_ddot;  // V/s^2
};

ReferenceSample reference_eval(const ReferenceProgram& ref, double t);

// Load --------------------------------------------------------------------

enum class LoadKind { kNone, kResistive, kPhasorSink };

struct Load {
  LoadKind kind = LoadKind::kNone;
  double resistance = std::numeric_limits<double>::infinity();  // ohm
  double p = 0.0;  // W
  double q = 0.0;  // var

  static Load none() { return {}; }
  static Load resistive(double r) { return {LoadKind::kResistive, r, 0.0, 0.0}; }
  static Load phasor_sink(double p, double q) {
    return {LoadKind::kPhasorSink, std::numeric_limits<double>::infinity(), p, q};
  }

  /// Conductance folded into the plant (0 unless resistive).
  double conductance() const { return kind == LoadKind::kResistive ? 1.0 / resistance : 0.0; }
  void validate() const;
  bool operator==(const Load&) const = default;
};

struct LoadStep {
  double time;
  Load load;

  bool operator==(const LoadStep&) const = default;
};

struct LoadProgram {
  Load initial;
  std::vector<LoadStep> steps;  // strictly increasing times
  // Phasor sinks are specified at the nominal voltage and draw a current
  // referenced to the nominal voltage phase.
  double v_n_rms = 110.0;
  double f_n = 50.0;
  double nominal_phase = 0.0;

  void validate() const;
  const Load& active(double t) const;

  bool operator==(const LoadProgram&) const = default;
};

struct LoadSample {
  double i_o;      // A
  double di_o_dt;  // A/s
};

/// Output current and its slope. For a resistive load both follow from the
/// capacitor voltage and its derivative.
LoadSample load_eval(const LoadProgram& load, double t, double u_o, double du_o_dt);

/// Peak current and phase (rad, lagging negative) of a phasor sink.
struct PhasorCurrent {
  double peak;
  double phase;
};
PhasorCurrent phasor_sink_current(const Load& load, double v_n_rms);

}  // namespace ssmc
