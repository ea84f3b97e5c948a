#include "ssmc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssmc/error.hpp"

namespace ssmc {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Observation {
  double i_o;
  double du_o_dt;
  double di_o_dt;
};

// du_o/dt always comes from the capacitor current, never from differencing u_o.
Observation observe(const LoadProgram& load, const InverterParams& params, double t, const PlantState& p) {
  const Load& ld = load.active(t);
  if (ld.kind == LoadKind::kResistive) {
    const double i_o = p.u_o / ld.resistance;
    const double du = (p.i_f - i_o) / params.c_f;
    return {i_o, du, du / ld.resistance};
  }
  const LoadSample ls = load_eval(load, t, p.u_o, 0.0);
  return {ls.i_o, (p.i_f - ls.i_o) / params.c_f, ls.di_o_dt};
}

bool finite_record(const TraceRecord& r) {
  return std::isfinite(r.u_o) && std::isfinite(r.i_f) && std::isfinite(r.i_o) && std::isfinite(r.s_raw) &&
         std::isfinite(r.s_used) && std::isfinite(r.s_error) && std::isfinite(r.x_comp);
}

}  // namespace

std::int64_t snap_to_tick(double time, double t_di) {
  return static_cast<std::int64_t>(std::floor(time / t_di + 0.5));
}

void Scenario::validate() const {
  params.validate();
  controller.validate();
  CompensatorConfig comp = compensator;
  comp.band_pass.sample_time = controller.t_di;
  comp.validate();
  reference.validate();
  load.validate();
  if (!(vdc_initial > 0.0) || !std::isfinite(vdc_initial)) throw ConfigError("vdc initial must be > 0");
  if (!(engine.duration > 0.0) || !std::isfinite(engine.duration)) throw ConfigError("duration must be > 0");
  if (engine.substeps_per_tick < 1) throw ConfigError("substeps_per_tick must be >= 1");
  if (engine.decimation < 1) throw ConfigError("decimation must be >= 1");
  if (engine.reaching_dwell < 1) throw ConfigError("reaching_dwell must be >= 1");
  if (!(engine.metric_settle >= 0.0)) throw ConfigError("metric_settle must be >= 0");
  const double ratio = engine.duration / controller.t_di;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio))
    throw ConfigError("duration must be an integer multiple of t_di");
  if (static_cast<double>(engine.substeps_per_tick) * std::round(ratio) > static_cast<double>(engine.max_samples))
    throw ConfigError("substeps_per_tick * ticks exceeds the memory cap max_samples");
  for (const auto& e : events) {
    if (!std::isfinite(e.time) || e.time < 0.0 || e.time > engine.duration)
      throw ConfigError("event time outside [0, duration]");
    std::visit(Overloaded{
                   [](const VdcSet& a) {
                     if (!(a.volts > 0.0) || !std::isfinite(a.volts)) throw ConfigError("vdc_set must be > 0");
                   },
                   [](const RefScale& a) {
                     if (!std::isfinite(a.factor)) throw ConfigError("ref_scale must be finite");
                   },
                   [](const RefPhase& a) {
                     if (!std::isfinite(a.radians)) throw ConfigError("ref_phase must be finite");
                   },
                   [](const LoadSet& a) { a.load.validate(); },
                   [](const ModeSet&) {},
               },
               e.action);
  }
}

std::int64_t Scenario::tick_count() const { return std::llround(engine.duration / controller.t_di); }

RunState::RunState(const Scenario& scenario)
    : params_(scenario.params),
      settings_(scenario.engine),
      comp_cfg_(scenario.compensator),
      reference_(scenario.reference),
      load_(scenario.load),
      v_dc_(scenario.vdc_initial),
      controller_(scenario.controller),
      sub_dt_(scenario.controller.t_di / scenario.engine.substeps_per_tick) {
  comp_cfg_.band_pass.sample_time = scenario.controller.t_di;
  comp_ = make_compensator(comp_cfg_);
  rebuild_propagator();
}

double RunState::now() const { return static_cast<double>(tick_) * controller_.config().t_di; }

void RunState::rebuild_propagator() {
  prop_.emplace(params_, sub_dt_, load_.active(now()).conductance());
}

void RunState::apply_event(const Event& event) {
  const double t = now();
  const auto upsert_reference = [&](double scale, double offset) {
    if (!reference_.steps.empty() && reference_.steps.back().time == t) {
      reference_.steps.back().scale = scale;
      reference_.steps.back().phase_offset = offset;
    } else {
      reference_.steps.push_back({t, scale, offset});
    }
  };
  std::visit(Overloaded{
                 [&](const VdcSet& a) { v_dc_ = a.volts; },
                 [&](const RefScale& a) { upsert_reference(a.factor, reference_.active(t).phase_offset); },
                 [&](const RefPhase& a) { upsert_reference(reference_.active(t).scale, a.radians); },
                 [&](const LoadSet& a) {
                   if (!load_.steps.empty() && load_.steps.back().time == t)
                     load_.steps.back().load = a.load;
                   else
                     load_.steps.push_back({t, a.load});
                   rebuild_propagator();
                 },
                 [&](const ModeSet& a) {
                   if (a.mode == ControlMode::kSsmc && controller_.config().mode != ControlMode::kSsmc)
                     comp_ = make_compensator(comp_cfg_);
                   controller_.mutable_config().mode = a.mode;
                 },
             },
             event.action);
  pending_event_ = true;
  last_was_event_ = true;
}

double RunState::external_current(double t) const {
  const Load& ld = load_.active(t);
  if (ld.kind != LoadKind::kPhasorSink) return 0.0;
  return load_eval(load_, t, 0.0, 0.0).i_o;
}

TraceRecord RunState::step() {
  const ControllerConfig& cfg = controller_.config();
  const double t = now();
  const Observation obs = observe(load_, params_, t, plant_);
  const ReferenceSample ref = reference_eval(reference_, t);

  CompensatorOutput co;
  if (cfg.mode == ControlMode::kSsmc) {
    if (tick_ > 0) comp_ = comp_update(comp_, prev_filter_input_, cfg.lambda, cfg.t_di);
    co = {comp_.x_comp, comp_.x_comp_dot, comp_.s_error};
  }
  const TickResult tr = controller_.tick(t, {plant_.u_o, obs.du_o_dt}, ref, co);
  const double abs_s = std::abs(tr.sample.s_used);

  if (pending_event_) {
    reaching_ = {true, t, abs_s};
    pending_event_ = false;
    out_of_band_ = 0;
  } else if (abs_s > cfg.h + cfg.t_di * (std::abs(f_model(plant_.u_o, obs.di_o_dt, params_) - ref.xd_ddot +
                                                   cfg.lambda * tr.sample.x_tilde_dot) +
                                          v_dc_ * params_.inv_lc())) {
    // Outside what a sampled relay can hold (h plus one tick of travel).
    if (out_of_band_ == 0) {
      exit_time_ = t;
      exit_s_ = abs_s;
    }
    if (++out_of_band_ == settings_.reaching_dwell) reaching_ = {true, exit_time_, exit_s_};
  } else {
    out_of_band_ = 0;
  }

  const PrecisionReport region =
      region_check({t, plant_.u_o, ref.xd_ddot, obs.di_o_dt, v_dc_, tr.sample.x_tilde_dot}, reaching_,
                   {cfg.f_bound, cfg.eta, cfg.lambda}, params_);

  TraceRecord rec;
  rec.time = t;
  rec.u_o = plant_.u_o;
  rec.i_f = plant_.i_f;
  rec.i_o = obs.i_o;
  rec.x_d = ref.x_d;
  rec.s_raw = tr.sample.s_raw;
  rec.s_used = tr.sample.s_used;
  rec.s_error = tr.sample.s_error;
  rec.x_comp = cfg.mode == ControlMode::kSsmc ? comp_.x_comp : 0.0;
  rec.t_level = tr.level;
  rec.v_dc = v_dc_;
  rec.region_margin = region.margin;
  rec.region_satisfied = region.satisfied;
  rec.contraction_margin = region.contraction_margin;
  rec.transient_deduction = region.rhs_transient_deduction;
  rec.event_tick = last_was_event_;
  last_was_event_ = false;

  prev_filter_input_ = comp_cfg_.input == FilterInput::kRaw ? tr.sample.s_raw : tr.sample.s_used;

  if (!finite_record(rec)) return rec;

  // Hold the decision for one interval.
  plant_.t_level = tr.level;
  if (cfg.mode == ControlMode::kIdeal) {
    bool saturated = false;
    for (int j = 0; j < settings_.substeps_per_tick; ++j) {
      const double ts = t + j * sub_dt_;
      const Observation o = observe(load_, params_, ts, plant_);
      const ReferenceSample r = reference_eval(reference_, ts);
      const double xt_dot = o.du_o_dt - r.xd_dot;
      const double s = sliding_value(plant_.u_o, o.du_o_dt, r.x_d, r.xd_dot, cfg.lambda);
      const double u = ideal_control(f_model(plant_.u_o, o.di_o_dt, params_), r.xd_ddot, cfg.lambda, xt_dot,
                                     cfg.f_bound, cfg.eta, s);
      const BridgeCommand cmd = ideal_bridge_voltage(u, v_dc_, params_);
      saturated = saturated || cmd.saturated;
      plant_ = prop_->step(plant_, cmd.voltage, external_current(ts));
    }
    if (saturated) ++ideal_saturated_;
  } else {
    const double w = as_double(tr.level) * v_dc_;
    for (int j = 0; j < settings_.substeps_per_tick; ++j) {
      plant_ = prop_->step(plant_, w, external_current(t + j * sub_dt_));
    }
  }
  ++tick_;
  plant_.time = now();
  return rec;
}

Trace run(const Scenario& scenario) {
  scenario.validate();
  Trace trace;
  trace.t_di = scenario.controller.t_di;
  trace.decimation = scenario.engine.decimation;
  trace.f_n = scenario.params.f_n;
  trace.controller = scenario.controller;

  std::vector<std::pair<std::int64_t, const Event*>> queue;
  queue.reserve(scenario.events.size());
  for (const auto& e : scenario.events) queue.emplace_back(snap_to_tick(e.time, trace.t_di), &e);
  std::stable_sort(queue.begin(), queue.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [tick, e] : queue) {
    const double t = static_cast<double>(tick) * trace.t_di;
    if (trace.event_times.empty() || trace.event_times.back() != t) trace.event_times.push_back(t);
  }

  const std::int64_t n = scenario.tick_count();
  trace.records.reserve(static_cast<std::size_t>(n / trace.decimation + 1));
  RunState state(scenario);
  std::size_t next = 0;
  for (std::int64_t k = 0; k < n; ++k) {
    while (next < queue.size() && queue[next].first == k) state.apply_event(*queue[next++].second);
    TraceRecord rec = state.step();
    const bool finite = std::isfinite(rec.u_o) && std::isfinite(rec.s_used) && std::isfinite(rec.i_f) &&
                        std::isfinite(rec.s_raw) && std::isfinite(rec.s_error) && std::isfinite(rec.x_comp);
    if (!finite) {
      trace.records.push_back(rec);
      trace.ideal_saturated_ticks = state.ideal_saturated_ticks();
      throw AbortedRun("non-finite state at t=" + std::to_string(rec.time), std::move(trace));
    }
    if (k % trace.decimation == 0) trace.records.push_back(rec);
  }
  trace.ideal_saturated_ticks = state.ideal_saturated_ticks();
  return trace;
}

PlantState oracle_step_rk4(const PlantState& state, const OracleInputs& in, double dt, int n_substeps,
                           const InverterParams& params) {
  if (n_substeps < 1) throw InvalidInput("n_substeps must be >= 1");
  const double h = dt / n_substeps;
  const auto deriv = [&](double tau, double i_f, double u_o) {
    PlantState p = state;
    p.i_f = i_f;
    p.u_o = u_o;
    const double i_o = in.i_o + in.di_o_dt * tau + in.conductance * u_o;
    return plant_derivs(p, in.v_dc, i_o, params);
  };
  double i = state.i_f;
  double u = state.u_o;
  for (int k = 0; k < n_substeps; ++k) {
    const double tau = k * h;
    const PlantDerivs k1 = deriv(tau, i, u);
    const PlantDerivs k2 = deriv(tau + h / 2, i + h / 2 * k1.di_f_dt, u + h / 2 * k1.du_o_dt);
    const PlantDerivs k3 = deriv(tau + h / 2, i + h / 2 * k2.di_f_dt, u + h / 2 * k2.du_o_dt);
    const PlantDerivs k4 = deriv(tau + h, i + h * k3.di_f_dt, u + h * k3.du_o_dt);
    i += h / 6 * (k1.di_f_dt + 2 * k2.di_f_dt + 2 * k3.di_f_dt + k4.di_f_dt);
    u += h / 6 * (k1.du_o_dt + 2 * k2.du_o_dt + 2 * k3.du_o_dt + k4.du_o_dt);
  }
  PlantState out = state;
  out.i_f = i;
  out.u_o = u;
  out.time = state.time + dt;
  return out;
}

}  // namespace ssmc
