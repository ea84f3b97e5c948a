#include "ssmc/compensator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ssmc/error.hpp"

namespace ssmc {

void BandPassConfig::validate() const {
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw ConfigError("omega0 must be > 0");
  if (!(zeta > 0.0) || !std::isfinite(zeta)) throw ConfigError("zeta must be > 0");
  if (!(sample_time > 0.0) || !std::isfinite(sample_time)) throw ConfigError("sample_time must be > 0");
  if (!(omega0 * sample_time < std::numbers::pi)) throw ConfigError("omega0 * sample_time must be below pi");
}

std::complex<double> BiquadState::response(double omega, double sample_time) const {
  const std::complex<double> zi = std::polar(1.0, -omega * sample_time);  // z^-1
  const std::complex<double> zi2 = zi * zi;
  return (b0 + b2 * zi2) / (1.0 + a1 * zi + a2 * zi2);
}

std::pair<std::complex<double>, std::complex<double>> BiquadState::poles() const {
  const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 - 4.0 * a2, 0.0));
  return {(-a1 + disc) / 2.0, (-a1 - disc) / 2.0};
}

bool BiquadState::stable() const {
  const auto [p1, p2] = poles();
  return std::abs(p1) < 1.0 && std::abs(p2) < 1.0;
}

BiquadState bpf_coeffs(const BandPassConfig& cfg) {
  cfg.validate();
  const double w0 = cfg.omega0;
  const double k = w0 / std::tan(w0 * cfg.sample_time / 2.0);
  const double bw = 2.0 * cfg.zeta * w0;
  const double a0 = k * k + bw * k + w0 * w0;
  BiquadState bq;
  bq.b0 = bw * k / a0;
  bq.b2 = -bq.b0;
  bq.a1 = 2.0 * (w0 * w0 - k * k) / a0;
  bq.a2 = (k * k - bw * k + w0 * w0) / a0;
  if (!bq.stable()) throw ConfigError("band-pass realization has a pole on or outside the unit circle");
  return bq;
}

double bpf_step_inplace(BiquadState& s, double input) {
  const double y = s.b0 * input + s.z1;
  s.z1 = -s.a1 * y + s.z2;
  s.z2 = s.b2 * input - s.a2 * y;
  return y;
}

std::pair<double, BiquadState> bpf_step(const BiquadState& state, double input) {
  BiquadState next = state;
  const double y = bpf_step_inplace(next, input);
  return {y, next};
}

double saturate(double v, double limit) { return std::clamp(v, -limit, limit); }

std::string_view to_string(FilterInput input) { return input == FilterInput::kRaw ? "s_raw" : "s_used"; }

FilterInput filter_input_from_string(std::string_view text) {
  if (text == "s_raw") return FilterInput::kRaw;
  if (text == "s_used") return FilterInput::kUsed;
  throw ConfigError("unknown compensator input '" + std::string(text) + "' (expected s_raw or s_used)");
}

void CompensatorConfig::validate() const {
  band_pass.validate();
  if (!(sat_limit > 0.0) || !std::isfinite(sat_limit)) throw ConfigError("sat_limit must be > 0");
}

CompensatorState make_compensator(const CompensatorConfig& cfg) {
  cfg.validate();
  CompensatorState st;
  st.biquad = bpf_coeffs(cfg.band_pass);
  st.sat_limit = cfg.sat_limit;
  return st;
}

CompensatorState comp_update(const CompensatorState& state, double s_prev, double lambda, double dt) {
  CompensatorState next = state;
  const double decay = std::exp(-lambda * dt);
  next.x_comp = state.x_comp * decay + state.s_error / lambda * (1.0 - decay);
  next.s_error = bpf_step_inplace(next.biquad, saturate(s_prev, state.sat_limit));
  next.x_comp_dot = next.s_error - lambda * next.x_comp;
  return next;
}

}  // namespace ssmc
