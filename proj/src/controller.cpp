#include "ssmc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssmc/error.hpp"

namespace ssmc {

std::string_view to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::kSmc:
      return "smc";
    case ControlMode::kSsmc:
      return "ssmc";
    case ControlMode::kIdeal:
      return "ideal";
  }
  return "smc";
}

ControlMode control_mode_from_string(std::string_view text) {
  if (text == "smc") return ControlMode::kSmc;
  if (text == "ssmc") return ControlMode::kSsmc;
  if (text == "ideal") return ControlMode::kIdeal;
  throw ConfigError("unknown controller mode '" + std::string(text) + "' (expected smc, ssmc or ideal)");
}

void ControllerConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be > 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be > 0");
  if (!(f_bound >= 0.0) || !std::isfinite(f_bound)) throw ConfigError("f_bound must be >= 0");
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("h must be > 0");
  if (!(t_di > 0.0) || !std::isfinite(t_di)) throw ConfigError("t_di must be > 0");
}

double sliding_value(double x, double x_dot, double x_d, double xd_dot, double lambda, double x_comp,
                     double x_comp_dot) {
  return (x_dot - xd_dot + x_comp_dot) + lambda * (x - x_d + x_comp);
}

double s_dot_diag(double f, double xd_ddot, double lambda, double x_tilde_dot, double u) {
  return f - xd_ddot + lambda * x_tilde_dot + u;
}

SwitchLevel hysteresis_decide(double s_used, double h, SwitchLevel prev) {
  if (s_used > h) return SwitchLevel::kLow;
  if (s_used < -h) return SwitchLevel::kHigh;
  return prev;
}

double ideal_control(double f_hat, double xd_ddot, double lambda, double x_tilde_dot, double f_bound,
                     double eta, double s) {
  const double sgn = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
  return -f_hat + xd_ddot - lambda * x_tilde_dot - (f_bound + eta) * sgn;
}

BridgeCommand ideal_bridge_voltage(double u, double v_dc, const InverterParams& params) {
  const double v = u * params.l_f * params.c_f;
  if (std::abs(v) > v_dc) return {std::clamp(v, -v_dc, v_dc), true};
  return {v, false};
}

SlidingModeController::SlidingModeController(const ControllerConfig& config, SwitchLevel initial)
    : config_(config), level_(initial) {
  config_.validate();
}

TickResult SlidingModeController::tick(double now, const PlantObservation& obs, const ReferenceSample& ref,
                                       const CompensatorOutput& comp) {
  const double k = std::round(now / config_.t_di);
  if (!std::isfinite(now) || std::abs(now - k * config_.t_di) > 1e-6 * config_.t_di)
    throw SchedulingError("controller tick at t=" + std::to_string(now) + " is off the decision grid");
  const auto index = static_cast<std::int64_t>(k);
  if (index <= last_index_) throw SchedulingError("controller tick does not advance the decision grid");
  last_index_ = index;
  ++ticks_;

  SlidingSample out;
  out.x_tilde = obs.u_o - ref.x_d;
  out.x_tilde_dot = obs.du_o_dt - ref.xd_dot;
  out.s_raw = sliding_value(obs.u_o, obs.du_o_dt, ref.x_d, ref.xd_dot, config_.lambda);
  if (config_.mode == ControlMode::kSsmc) {
    out.s_used = sliding_value(obs.u_o, obs.du_o_dt, ref.x_d, ref.xd_dot, config_.lambda, comp.x_comp,
                               comp.x_comp_dot);
    out.s_error = comp.s_error;
  } else {
    out.s_used = out.s_raw;
  }
  level_ = hysteresis_decide(out.s_used, config_.h, level_);
  return {level_, out};
}

}  // namespace ssmc
