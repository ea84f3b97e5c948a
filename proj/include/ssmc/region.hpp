#pragma once

#include "ssmc/model.hpp"

namespace ssmc {

/// Voltage precision region. The static form is
///   |xd_ddot + u_o/(L C) + (di_o/dt)/C| <= v_dc/(L C) - (F + 2 eta),
/// reduced during a reaching window [t0, t0 + |s(t0)|/eta] by
///   2 lambda (|s(t0)| - eta (t - t0)).
struct PrecisionReport {
  double time = 0.0;
  double lhs = 0.0;                      // V/s^2
  double rhs_static = 0.0;               // V/s^2
  double rhs_transient_deduction = 0.0;  // V/s^2, >= 0
  double margin = 0.0;                   // rhs_static - deduction - lhs
  bool satisfied = true;                 // margin >= 0
  // State-dependent contraction form, with lambda * x_tilde_dot explicit.
  double contraction_lhs = 0.0;
  double contraction_rhs = 0.0;
  double contraction_margin = 0.0;
};

struct RegionConfig {
  double f_bound = 0.0;
  double eta = 1e7;
  double lambda = 4480.0;
};

/// Reaching window anchor (t0, |s(t0)|). Inactive means no deduction.
struct ReachingContext {
  bool active = false;
  double t0 = 0.0;
  double s_t0 = 0.0;
};

struct RegionInputs {
  double time;
  double u_o;
  double xd_ddot;
  double di_o_dt;
  double v_dc;
  double x_tilde_dot;
};

double region_lhs(double xd_ddot, double u_o, double di_o_dt, const InverterParams& params);

/// 2 lambda max(0, |s_t0| - eta (t - t0)) for t >= t0, else 0.
double transient_deduction(double lambda, double eta, double s_t0, double t, double t0);

double region_rhs(double v_dc, double f_bound, double eta, double lambda, double s_t0, double t, double t0,
                  const InverterParams& params);

PrecisionReport region_check(const RegionInputs& in, const ReachingContext& ctx, const RegionConfig& cfg,
                             const InverterParams& params);

struct MinVdcReport {
  double v_min;    // V
  double lhs_max;  // V/s^2
  double t_at_max; // s, within one period
};

/// Smallest dc-link voltage for which the steady-state region holds over one
/// fundamental period, evaluated with u_o replaced by x_d.
MinVdcReport min_vdc(const InverterParams& params, const ReferenceProgram& ref, const LoadProgram& load,
                     double f_bound, double eta, double scan_step = 10e-6);

/// Design threshold with an rms voltage margin on top of nominal: the
/// reference is raised to (v_n + margin) sqrt(2), unloaded, F = eta = 0.
MinVdcReport min_vdc_margin_preset(const InverterParams& params, double rms_margin = 20.0);

}  // namespace ssmc
