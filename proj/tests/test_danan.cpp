#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nmzi/danan.hpp"

using namespace nmzi;

namespace {

VibrationConfig noiseless() {
    VibrationConfig vib;
    vib.noise_amplitude = 0.0;
    return vib;
}

}  // namespace

TEST_CASE("vibration config validation") {
    VibrationConfig vib;
    vib.frequencies[Mode::A] = vib.frequencies[Mode::B];
    CHECK_THROWS_AS(simulate_quadcell_signal(vib), std::invalid_argument);
    VibrationConfig nyq;
    nyq.frequencies[Mode::A] = nyq.sample_rate;
    CHECK_THROWS_AS(simulate_quadcell_signal(nyq), std::invalid_argument);
    VibrationConfig big;
    big.tilt_amplitudes[Mode::A] = 0.2;
    CHECK_THROWS_AS(simulate_quadcell_signal(big), std::invalid_argument);
    VibrationConfig odd;
    odd.n_frames = 1000;
    CHECK_THROWS_AS(simulate_quadcell_signal(odd), std::invalid_argument);
}

TEST_CASE("zero tilt gives a zero signal") {
    auto vib = noiseless();
    for (auto& [mirror, d] : vib.tilt_amplitudes) d = 0.0;
    const auto sig = simulate_quadcell_signal(vib);
    for (double s : sig) CHECK(s == 0.0);
}

TEST_CASE("only mirror A vibrating: pure sinusoid of amplitude delta_A") {
    auto vib = noiseless();
    for (auto& [mirror, d] : vib.tilt_amplitudes)
        if (mirror != Mode::A) d = 0.0;
    const auto sig = simulate_quadcell_signal(vib);
    // w_A = -1, so the signal is -delta sin(2 pi f t)
    for (int k = 0; k < 16; ++k) {
        const double t = k / vib.sample_rate;
        const double expect = -0.01 * std::sin(2 * M_PI * vib.frequencies[Mode::A] * t);
        CHECK(sig[k] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("only mirror E vibrating: no signal") {
    auto vib = noiseless();
    for (auto& [mirror, d] : vib.tilt_amplitudes)
        if (mirror != Mode::E) d = 0.0;
    for (double s : simulate_quadcell_signal(vib)) CHECK(std::abs(s) < 1e-12);
}

TEST_CASE("power spectrum of a bin-centered sinusoid") {
    VibrationConfig vib;
    vib.n_frames = 1024;
    vib.sample_rate = 1024.0;
    const double a = 0.3, f = 40.0;
    std::vector<double> sig(vib.n_frames);
    for (int k = 0; k < vib.n_frames; ++k)
        sig[k] = a * std::sin(2 * M_PI * f * k / vib.sample_rate);
    const auto spec = power_spectrum(sig, vib);
    // one-sided peak a^2/4 at the tone bin under the Parseval normalization
    CHECK(spec.power[40] == doctest::Approx(a * a / 4.0).epsilon(1e-9));
    CHECK_THROWS_AS(power_spectrum(std::vector<double>(1000, 0.0), vib),
                    std::invalid_argument);
}

TEST_CASE("Parseval identity") {
    VibrationConfig vib;
    const auto sig = simulate_quadcell_signal(vib);
    const auto spec = power_spectrum(sig, vib);
    const double time_side =
        std::inner_product(sig.begin(), sig.end(), sig.begin(), 0.0) / sig.size();
    const double freq_side = std::accumulate(spec.power.begin(), spec.power.end(), 0.0);
    CHECK(freq_side == doctest::Approx(time_side).epsilon(1e-9));
}

TEST_CASE("equal peaks at A, B, C; nothing at E, F") {
    const auto vib = noiseless();
    const auto spec = power_spectrum(simulate_quadcell_signal(vib), vib);
    const double pa = spec.peaks.at(Mode::A);
    const double pb = spec.peaks.at(Mode::B);
    const double pc = spec.peaks.at(Mode::C);
    CHECK(pb == doctest::Approx(pa).epsilon(0.01));
    CHECK(pc == doctest::Approx(pa).epsilon(0.01));
    CHECK(spec.peaks.at(Mode::E) < 1e-6 * pa);
    CHECK(spec.peaks.at(Mode::F) < 1e-6 * pa);
}

TEST_CASE("linearity: halving the tilts quarters the peak powers") {
    const auto vib = noiseless();
    auto half = vib;
    for (auto& [mirror, d] : half.tilt_amplitudes) d /= 2.0;
    const auto spec = power_spectrum(simulate_quadcell_signal(vib), vib);
    const auto spec_half = power_spectrum(simulate_quadcell_signal(half), half);
    for (Mode m : {Mode::A, Mode::B, Mode::C})
        CHECK(spec_half.peaks.at(m) ==
              doctest::Approx(spec.peaks.at(m) / 4.0).epsilon(0.01));
}

TEST_CASE("detuned BS3 raises the E and F peaks above the noise floor") {
    VibrationConfig vib;  // default noise 1e-6
    NestedMziConfig tuned;
    const auto spec_tuned = power_spectrum(simulate_quadcell_signal(vib, tuned), vib);
    const double floor_tuned = noise_floor(spec_tuned, vib);
    CHECK(spec_tuned.peaks.at(Mode::E) < 10.0 * floor_tuned);
    CHECK(spec_tuned.peaks.at(Mode::F) < 10.0 * floor_tuned);

    NestedMziConfig detuned;
    detuned.t3 = 0.45;
    const auto spec_det = power_spectrum(simulate_quadcell_signal(vib, detuned), vib);
    const double floor_det = noise_floor(spec_det, vib);
    CHECK(spec_det.peaks.at(Mode::E) > 10.0 * floor_det);
    CHECK(spec_det.peaks.at(Mode::F) > 10.0 * floor_det);
}
