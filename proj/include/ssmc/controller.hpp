#pragma once

#include <cstdint>
#include <string_view>

#include "ssmc/model.hpp"

namespace ssmc {

enum class ControlMode { kSmc, kSsmc, kIdeal };

std::string_view to_string(ControlMode mode);
ControlMode control_mode_from_string(std::string_view text);

struct ControllerConfig {
  double lambda = 4480.0;    // 1/s, surface slope (about switching frequency / 5)
  double eta = 1e7;          // V/s^2, minimum reaching speed
  double f_bound = 0.0;      // V/s^2, model uncertainty bound F
  double h = 20000.0;        // V/s, hysteresis half-band on s
  double t_di = 10e-6;       // s, decision interval
  ControlMode mode = ControlMode::kSmc;

  void validate() const;

  bool operator==(const ControllerConfig&) const = default;
};

/// One decision-tick view of the sliding variable.
struct SlidingSample {
  double s_raw = 0.0;    // on x - x_d
  double s_used = 0.0;   // on x - x_d + x_comp; drives the relay
  double s_error = 0.0;  // bias removed by the compensator
  double x_tilde = 0.0;  // x - x_d
  double x_tilde_dot = 0.0;
};

/// s = (x_dot - xd_dot + x_comp_dot) + lambda (x - x_d + x_comp).
double sliding_value(double x, double x_dot, double x_d, double xd_dot, double lambda,
                     double x_comp = 0.0, double x_comp_dot = 0.0);

/// s_dot = f - xd_ddot + lambda x_tilde_dot + u.
double s_dot_diag(double f, double xd_ddot, double lambda, double x_tilde_dot, double u);

/// Relay with memory: above +h drive down, below -h drive up, hold inside.
SwitchLevel hysteresis_decide(double s_used, double h, SwitchLevel prev);

/// Average-model control law. sgn(0) is taken as 0.
double ideal_control(double f_hat, double xd_ddot, double lambda, double x_tilde_dot, double f_bound,
                     double eta, double s);

struct BridgeCommand {
  double voltage;  // V, clamped to [-v_dc, v_dc]
  bool saturated;  // |u| L C exceeded v_dc
};

/// Converts an acceleration command u to the bridge voltage u L C.
BridgeCommand ideal_bridge_voltage(double u, double v_dc, const InverterParams& params);

struct PlantObservation {
  double u_o;      // V
  double du_o_dt;  // V/s, from the capacitor current
};

struct CompensatorOutput {
  double x_comp = 0.0;
  double x_comp_dot = 0.0;
  double s_error = 0.0;
};

struct TickResult {
  SwitchLevel level;
  SlidingSample sample;
};

/// Digital hysteresis sliding-mode controller. Decisions are taken only on
/// the grid k * t_di and the returned level is held until the next tick.
class SlidingModeController {
 public:
  explicit SlidingModeController(const ControllerConfig& config, SwitchLevel initial = SwitchLevel::kHigh);

  /// Runs the decision at `now`, which must lie on the decision grid and
  /// after the previous tick. Throws SchedulingError otherwise.
  TickResult tick(double now, const PlantObservation& obs, const ReferenceSample& ref,
                  const CompensatorOutput& comp);

  const ControllerConfig& config() const { return config_; }
  ControllerConfig& mutable_config() { return config_; }
  SwitchLevel level() const { return level_; }
  std::int64_t ticks() const { return ticks_; }

 private:
  ControllerConfig config_;
  SwitchLevel level_;
  std::int64_t ticks_ = 0;
  std::int64_t last_index_ = -1;
};

}  // namespace ssmc
