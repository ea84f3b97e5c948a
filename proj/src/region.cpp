#include "ssmc/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "ssmc/error.hpp"

namespace ssmc {

double region_lhs(double xd_ddot, double u_o, double di_o_dt, const InverterParams& params) {
  return std::abs(xd_ddot + u_o * params.inv_lc() + di_o_dt / params.c_f);
}

double transient_deduction(double lambda, double eta, double s_t0, double t, double t0) {
  if (t < t0) return 0.0;
  return 2.0 * lambda * std::max(0.0, std::abs(s_t0) - eta * (t - t0));
}

double region_rhs(double v_dc, double f_bound, double eta, double lambda, double s_t0, double t, double t0,
                  const InverterParams& params) {
  return v_dc * params.inv_lc() - (f_bound + 2.0 * eta) - transient_deduction(lambda, eta, s_t0, t, t0);
}

PrecisionReport region_check(const RegionInputs& in, const ReachingContext& ctx, const RegionConfig& cfg,
                             const InverterParams& params) {
  PrecisionReport r;
  r.time = in.time;
  r.lhs = region_lhs(in.xd_ddot, in.u_o, in.di_o_dt, params);
  r.rhs_static = in.v_dc * params.inv_lc() - (cfg.f_bound + 2.0 * cfg.eta);
  r.rhs_transient_deduction = ctx.active ? transient_deduction(cfg.lambda, cfg.eta, ctx.s_t0, in.time, ctx.t0) : 0.0;
  r.margin = r.rhs_static - r.rhs_transient_deduction - r.lhs;
  r.satisfied = r.margin >= 0.0;

  // Both relay branches contract s when |E - lambda x_tilde_dot| <= v_dc/(LC) - (F + eta).
  const double e = in.xd_ddot + in.u_o * params.inv_lc() + in.di_o_dt / params.c_f;
  r.contraction_lhs = std::abs(e - cfg.lambda * in.x_tilde_dot);
  r.contraction_rhs = in.v_dc * params.inv_lc() - (cfg.f_bound + cfg.eta);
  r.contraction_margin = r.contraction_rhs - r.contraction_lhs;
  return r;
}

MinVdcReport min_vdc(const InverterParams& params, const ReferenceProgram& ref, const LoadProgram& load,
                     double f_bound, double eta, double scan_step) {
  params.validate();
  if (!(scan_step > 0.0)) throw InvalidInput("scan_step must be > 0");
  ReferenceProgram steady = ref;
  steady.steps.clear();
  LoadProgram steady_load = load;
  steady_load.steps.clear();

  const auto lhs_at = [&](double t) {
    const ReferenceSample r = reference_eval(steady, t);
    const LoadSample l = load_eval(steady_load, t, r.x_d, r.xd_dot);
    return region_lhs(r.xd_ddot, r.x_d, l.di_o_dt, params);
  };

  const double period = 1.0 / steady.frequency;
  const auto n = static_cast<long>(std::ceil(period / scan_step));
  double best_t = 0.0;
  double best = -1.0;
  for (long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * scan_step;
    const double v = lhs_at(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  // Refine around the best sample.
  const auto [t_ref, neg] = boost::math::tools::brent_find_minima(
      [&](double t) { return -lhs_at(t); }, best_t - scan_step, best_t + scan_step,
      std::numeric_limits<double>::digits / 2);
  if (-neg > best) {
    best = -neg;
    best_t = t_ref;
  }
  return {params.l_f * params.c_f * (best + f_bound + 2.0 * eta), best, best_t};
}

MinVdcReport min_vdc_margin_preset(const InverterParams& params, double rms_margin) {
  ReferenceProgram ref;
  ref.amplitude = (params.v_n_rms + rms_margin) * std::numbers::sqrt2;
  ref.frequency = params.f_n;
  LoadProgram load;
  load.v_n_rms = params.v_n_rms;
  load.f_n = params.f_n;
  return min_vdc(params, ref, load, 0.0, 0.0);
}

}  // namespace ssmc
