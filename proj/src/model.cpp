#include "ssmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ssmc/error.hpp"

namespace ssmc {
namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidInput(std::string(what) + " must be finite");
}

template <typename Step>
void require_increasing(const std::vector<Step>& steps, const char* what) {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!std::isfinite(steps[i].time) || steps[i].time < 0.0)
      throw ConfigError(std::string(what) + " step time must be finite and non-negative");
    if (i > 0 && !(steps[i].time > steps[i - 1].time))
      throw ConfigError(std::string(what) + " step times must be strictly increasing");
  }
}

// Index of the last step with time <= t, or -1.
template <typename Step>
std::ptrdiff_t last_at_or_before(const std::vector<Step>& steps, double t) {
  auto it = std::upper_bound(steps.begin(), steps.end(), t,
                             [](double value, const Step& s) { return value < s.time; });
  return std::distance(steps.begin(), it) - 1;
}

}  // namespace

double InverterParams::omega_n() const { return 2.0 * std::numbers::pi * f_n; }

void InverterParams::validate() const {
  if (!(l_f > 0.0) || !std::isfinite(l_f)) throw ConfigError("l_f must be > 0");
  if (!(c_f > 0.0) || !std::isfinite(c_f)) throw ConfigError("c_f must be > 0");
  if (!(v_dc_nominal > 0.0) || !std::isfinite(v_dc_nominal)) throw ConfigError("v_dc_nominal must be > 0");
  if (!(f_n > 0.0) || !std::isfinite(f_n)) throw ConfigError("f_n must be > 0");
  if (!(v_n_rms > 0.0) || !std::isfinite(v_n_rms)) throw ConfigError("v_n_rms must be > 0");
  const double k = inv_lc();
  if (!std::isfinite(k) || !(k > 0.0)) throw ConfigError("1/(l_f c_f) must be finite and positive");
}

PlantDerivs plant_derivs_bridge(const PlantState& state, double bridge_voltage, double i_o,
                                const InverterParams& params) {
  require_finite(state.i_f, "i_f");
  require_finite(state.u_o, "u_o");
  require_finite(bridge_voltage, "bridge voltage");
  require_finite(i_o, "i_o");
  return {(bridge_voltage - state.u_o) / params.l_f, (state.i_f - i_o) / params.c_f};
}

PlantDerivs plant_derivs(const PlantState& state, double v_dc, double i_o, const InverterParams& params) {
  require_finite(v_dc, "v_dc");
  return plant_derivs_bridge(state, as_double(state.t_level) * v_dc, i_o, params);
}

ExactPropagator::ExactPropagator(const InverterParams& params, double dt, double conductance)
    : dt_(dt), conductance_(conductance) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("dt must be > 0");
  if (!(conductance >= 0.0) || !std::isfinite(conductance)) throw InvalidInput("conductance must be >= 0");
  // A = [0, -1/L; 1/C, -g/C] = m I + N with m = tr(A)/2 and N^2 = q I.
  const double m = -conductance / (2.0 * params.c_f);
  const double q = m * m - params.inv_lc();
  const std::array<double, 4> n = {-m, -1.0 / params.l_f, 1.0 / params.c_f, -conductance / params.c_f - m};
  double c = 1.0;
  double s = dt;
  if (q < 0.0) {
    const double w = std::sqrt(-q);
    c = std::cos(w * dt);
    s = std::sin(w * dt) / w;
  } else if (q > 0.0) {
    const double w = std::sqrt(q);
    c = std::cosh(w * dt);
    s = std::sinh(w * dt) / w;
  }
  const double e = std::exp(m * dt);
  phi_ = {e * (c + s * n[0]), e * s * n[1], e * s * n[2], e * (c + s * n[3])};
}

PlantState ExactPropagator::step(const PlantState& state, double bridge_voltage, double i_ext) const {
  // Equilibrium of the held input: u* = w, i* = i_ext + g w.
  const double u_eq = bridge_voltage;
  const double i_eq = i_ext + conductance_ * bridge_voltage;
  const double di = state.i_f - i_eq;
  const double du = state.u_o - u_eq;
  PlantState next = state;
  next.i_f = i_eq + phi_[0] * di + phi_[1] * du;
  next.u_o = u_eq + phi_[2] * di + phi_[3] * du;
  next.time = state.time + dt_;
  return next;
}

PlantState plant_step_exact(const PlantState& state, double v_dc, double i_o, double dt,
                            const InverterParams& params, double conductance) {
  require_finite(state.i_f, "i_f");
  require_finite(state.u_o, "u_o");
  require_finite(v_dc, "v_dc");
  require_finite(i_o, "i_o");
  const ExactPropagator prop(params, dt, conductance);
  return prop.step(state, as_double(state.t_level) * v_dc, i_o);
}

double f_model(double u_o, double di_o_dt, const InverterParams& params) {
  return -u_o * params.inv_lc() - di_o_dt / params.c_f;
}

// Reference ---------------------------------------------------------------

void ReferenceProgram::validate() const {
  if (!(frequency > 0.0) || !std::isfinite(frequency)) throw ConfigError("reference frequency must be > 0");
  if (!std::isfinite(amplitude) || amplitude < 0.0) throw ConfigError("reference amplitude must be >= 0");
  if (!std::isfinite(phase)) throw ConfigError("reference phase must be finite");
  require_increasing(steps, "reference");
  for (const auto& s : steps) {
    if (!std::isfinite(s.scale) || !std::isfinite(s.phase_offset))
      throw ConfigError("reference step values must be finite");
  }
}

ReferenceStep ReferenceProgram::active(double t) const {
  const auto idx = last_at_or_before(steps, t);
  if (idx < 0) return {0.0, 1.0, 0.0};
  return steps[static_cast<std::size_t>(idx)];
}

ReferenceSample reference_eval(const ReferenceProgram& ref, double t) {
  const ReferenceStep st = ref.active(t);
  const double w = 2.0 * std::numbers::pi * ref.frequency;
  const double a = ref.amplitude * st.scale;
  const double theta = w * t + ref.phase + st.phase_offset;
  const double sn = std::sin(theta);
  const double cs = std::cos(theta);
  return {a * sn, a * w * cs, -a * w * w * sn};
}

// Load --------------------------------------------------------------------

void Load::validate() const {
  switch (kind) {
    case LoadKind::kNone:
      break;
    case LoadKind::kResistive:
      if (!(resistance > 0.0) || !std::isfinite(resistance)) throw ConfigError("load resistance must be > 0");
      break;
    case LoadKind::kPhasorSink:
      if (!std::isfinite(p) || !std::isfinite(q)) throw ConfigError("phasor sink powers must be finite");
      break;
  }
}

void LoadProgram::validate() const {
  initial.validate();
  require_increasing(steps, "load");
  for (const auto& s : steps) s.load.validate();
  if (!(v_n_rms > 0.0) || !(f_n > 0.0)) throw ConfigError("load nominal voltage and frequency must be > 0");
}

const Load& LoadProgram::active(double t) const {
  const auto idx = last_at_or_before(steps, t);
  return idx < 0 ? initial : steps[static_cast<std::size_t>(idx)].load;
}

PhasorCurrent phasor_sink_current(const Load& load, double v_n_rms) {
  const double s = std::hypot(load.p, load.q);
  return {s / v_n_rms * std::numbers::sqrt2, -std::atan2(load.q, load.p)};
}

LoadSample load_eval(const LoadProgram& program, double t, double u_o, double du_o_dt) {
  const Load& load = program.active(t);
  switch (load.kind) {
    case LoadKind::kNone:
      return {0.0, 0.0};
    case LoadKind::kResistive:
      return {u_o / load.resistance, du_o_dt / load.resistance};
    case LoadKind::kPhasorSink: {
      const PhasorCurrent pc = phasor_sink_current(load, program.v_n_rms);
      const double w = 2.0 * std::numbers::pi * program.f_n;
      const double theta = w * t + program.nominal_phase + pc.phase;
      return {pc.peak * std::sin(theta), pc.peak * w * std::cos(theta)};
    }
  }
  return {0.0, 0.0};
}

}  // namespace ssmc
