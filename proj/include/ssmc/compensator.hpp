#pragma once

#include <complex>
#include <string_view>
#include <utility>

namespace ssmc {

struct BandPassConfig {
  double omega0 = 314.16;  // rad/s, center frequency
  double zeta = 2.0;       // damping; larger is better unless the bias cannot be extracted
  double sample_time = 10e-6;

  void validate() const;

  bool operator==(const BandPassConfig&) const = default;
};

/// Second-order section in transposed direct form II. The band-pass
/// numerator is b0 (1 - z^-2), so only b0 and b2 = -b0 are stored.
struct BiquadState {
  double b0 = 0.0;
  double b2 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;

  /// Frequency response at omega (rad/s) for the given sample time.
  std::complex<double> response(double omega, double sample_time) const;
  /// Roots of z^2 + a1 z + a2.
  std::pair<std::complex<double>, std::complex<double>> poles() const;
  bool stable() const;
};

/// Bilinear transform of 2 zeta w0 s / (s^2 + 2 zeta w0 s + w0^2), prewarped
/// at w0 so the discrete gain there is exactly one.
BiquadState bpf_coeffs(const BandPassConfig& cfg);

/// One sample of the difference equation.
std::pair<double, BiquadState> bpf_step(const BiquadState& state, double input);

/// In-place variant used on the hot path.
double bpf_step_inplace(BiquadState& state, double input);

double saturate(double v, double limit);

/// Which sliding value feeds the bias extractor.
enum class FilterInput { kRaw, kUsed };
std::string_view to_string(FilterInput input);
FilterInput filter_input_from_string(std::string_view text);

struct CompensatorConfig {
  BandPassConfig band_pass;
  // Covers the sampled chatter around the band (h plus up to a tick of
  // travel) while still clipping reaching excursions.
  double sat_limit = 80000.0;  // V/s
  FilterInput input = FilterInput::kUsed;

  void validate() const;

  bool operator==(const CompensatorConfig&) const = default;
};

struct CompensatorState {
  double x_comp = 0.0;      // V
  double x_comp_dot = 0.0;  // V/s
  double s_error = 0.0;     // V/s
  BiquadState biquad;
  double sat_limit = 80000.0;
};

CompensatorState make_compensator(const CompensatorConfig& cfg);

/// Advances x_comp over dt under dx/dt + lambda x = s_error (exact, with the
/// previous s_error held), then extracts the new bias from the saturated
/// sliding value of the previous tick. Afterwards
/// x_comp_dot + lambda x_comp == s_error.
CompensatorState comp_update(const CompensatorState& state, double s_prev, double lambda, double dt);

}  // namespace ssmc
