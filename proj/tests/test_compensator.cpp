#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ssmc/compensator.hpp"
#include "ssmc/error.hpp"

using namespace ssmc;
using doctest::Approx;

namespace {

double sine_amplitude_after(BiquadState st, double amp, double w, double ts, int settle_periods, int measure_periods) {
  const int per_period = static_cast<int>(std::lround(2.0 * std::numbers::pi / w / ts));
  double peak = 0.0;
  for (int k = 0; k < (settle_periods + measure_periods) * per_period; ++k) {
    const double y = bpf_step_inplace(st, amp * std::sin(w * k * ts));
    if (k >= settle_periods * per_period) peak = std::max(peak, std::abs(y));
  }
  return peak;
}

}  // namespace

TEST_CASE("band-pass coefficients at default settings") {
  BandPassConfig cfg;
  const BiquadState b = bpf_coeffs(cfg);
  CHECK(b.b0 == Approx(6.243e-3).epsilon(2e-4));
  CHECK(b.b2 == -b.b0);
  CHECK(b.stable());
}

TEST_CASE("band-pass gain is zero at dc and one at the center") {
  for (double ts : {2e-6, 10e-6, 100e-6}) {
    for (double zeta : {0.3, 2.0, 5.0}) {
      BandPassConfig cfg{314.16, zeta, ts};
      const BiquadState b = bpf_coeffs(cfg);
      CHECK(std::abs(b.response(0.0, ts)) < 1e-9);
      CHECK(std::abs(std::abs(b.response(cfg.omega0, ts)) - 1.0) < 1e-9);
      const auto [p1, p2] = b.poles();
      CHECK(std::abs(p1) < 1.0);
      CHECK(std::abs(p2) < 1.0);
    }
  }
}

TEST_CASE("band-pass rejects constant input") {
  BiquadState b = bpf_coeffs({});
  double y = 0.0;
  for (int k = 0; k < 1'000'000; ++k) y = bpf_step_inplace(b, 1.0);
  CHECK(std::abs(y) < 1e-6);
}

TEST_CASE("band-pass passes the center frequency") {
  const BandPassConfig cfg;
  const double amp = sine_amplitude_after(bpf_coeffs(cfg), 3.0, cfg.omega0, cfg.sample_time, 20, 2);
  CHECK(amp == Approx(3.0).epsilon(1e-3));
}

TEST_CASE("band-pass separates 50 Hz from 2 kHz") {
  const BandPassConfig cfg;
  const double ts = cfg.sample_time;
  const double w50 = 2.0 * std::numbers::pi * 50.0;
  const double w2k = 2.0 * std::numbers::pi * 2000.0;
  BiquadState b = bpf_coeffs(cfg);
  // Single-bin amplitudes of the output over whole 50 Hz periods after settling.
  const int n_settle = static_cast<int>(0.4 / ts);
  const int n_meas = static_cast<int>(0.2 / ts);
  double re50 = 0, im50 = 0, re2k = 0, im2k = 0;
  for (int k = 0; k < n_settle + n_meas; ++k) {
    const double t = k * ts;
    const double y = bpf_step_inplace(b, 2.0 * std::sin(w50 * t) + 10.0 * std::sin(w2k * t));
    if (k < n_settle) continue;
    re50 += y * std::cos(w50 * t);
    im50 += y * std::sin(w50 * t);
    re2k += y * std::cos(w2k * t);
    im2k += y * std::sin(w2k * t);
  }
  const double a50 = 2.0 / n_meas * std::hypot(re50, im50);
  const double a2k = 2.0 / n_meas * std::hypot(re2k, im2k);
  const BiquadState ref = bpf_coeffs(cfg);
  CHECK(a50 == Approx(2.0 * std::abs(ref.response(w50, ts))).epsilon(1e-3));
  CHECK(a50 == Approx(2.0).epsilon(0.02));
  CHECK(a2k == Approx(10.0 * std::abs(ref.response(w2k, ts))).epsilon(1e-3));
  CHECK(a2k < 10.0 * 0.35);
}

TEST_CASE("pair and in-place steps agree") {
  BiquadState a = bpf_coeffs({});
  BiquadState b = a;
  for (int k = 0; k < 1000; ++k) {
    const double x = std::sin(0.01 * k) + 0.3 * std::cos(0.5 * k);
    const auto [y, next] = bpf_step(a, x);
    a = next;
    CHECK(y == bpf_step_inplace(b, x));
  }
}

TEST_CASE("unstable or aliased filters are rejected") {
  CHECK_THROWS_AS(bpf_coeffs({314.16, -1.0, 10e-6}), ConfigError);
  CHECK_THROWS_AS(bpf_coeffs({4e5, 2.0, 10e-6}), ConfigError);
}

TEST_CASE("saturation") {
  CHECK(saturate(25000, 20000) == 20000);
  CHECK(saturate(-5000, 20000) == -5000);
  CHECK(saturate(-30000, 20000) == -20000);
}

TEST_CASE("compensator state decays without bias") {
  CompensatorState s = make_compensator({});
  s.x_comp = 0.7;
  const double lambda = 4480.0;
  const double dt = 10e-6;
  for (int k = 0; k < 50; ++k) s = comp_update(s, 0.0, lambda, dt);
  CHECK(s.x_comp == Approx(0.7 * std::exp(-lambda * 50 * dt)).epsilon(1e-12));
}

TEST_CASE("compensator single exact step") {
  CompensatorState s = make_compensator({});
  s.s_error = 1000.0;
  const CompensatorState n = comp_update(s, 0.0, 4480.0, 10e-6);
  CHECK(n.x_comp == Approx(1000.0 / 4480.0 * (1.0 - std::exp(-0.0448))).epsilon(1e-12));
  CHECK(n.x_comp == Approx(9.781e-3).epsilon(5e-4));
}

TEST_CASE("compensator reaches the equilibrium of a held bias") {
  // Hold s_error by bypassing the filter: E/lambda fixed point.
  CompensatorState s = make_compensator({});
  const double lambda = 4480.0;
  for (int k = 0; k < 5000; ++k) {
    s.s_error = 4480.0;
    s = comp_update(s, 0.0, lambda, 10e-6);
  }
  s.s_error = 4480.0;
  s = comp_update(s, 0.0, lambda, 10e-6);
  CHECK(s.x_comp == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("compensator output satisfies the decomposition identity") {
  CompensatorState s = make_compensator({});
  const double lambda = 4480.0;
  for (int k = 0; k < 20000; ++k) {
    const double s_prev = 30000.0 * std::sin(2 * std::numbers::pi * 50 * k * 10e-6) + 90000.0 * std::sin(0.9 * k);
    s = comp_update(s, s_prev, lambda, 10e-6);
    CHECK(s.x_comp_dot + lambda * s.x_comp == Approx(s.s_error).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("saturation bounds the extracted bias") {
  // A large persistent excursion cannot push s_error past the l1 gain of
  // the filter times the limit.
  CompensatorConfig cfg;
  CompensatorState s = make_compensator(cfg);
  double worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    s = comp_update(s, (k / 3000) % 2 ? 7e5 : -7e5, 4480.0, 10e-6);
    worst = std::max(worst, std::abs(s.s_error));
  }
  CHECK(worst <= 1.75 * cfg.sat_limit);
  CHECK(worst > 0.5 * cfg.sat_limit);
}

TEST_CASE("filter input names") {
  CHECK(filter_input_from_string("s_raw") == FilterInput::kRaw);
  CHECK(to_string(FilterInput::kUsed) == "s_used");
  CHECK_THROWS_AS(filter_input_from_string("s"), ConfigError);
}
