// Frequency-tagged mirror simulation: each mirror vibrates at its own
// frequency with a small tilt, the quad-cell difference signal at D picks up
// each tilt weighted by Re(w_X), and the power spectrum shows which segments
// imprint on the postselected beam.
#pragma once

#include <complex>
#include <map>
#include <vector>

#include "analysis.hpp"
#include "rng.hpp"

namespace nmzi {

struct VibrationConfig {
    // mirror -> (frequency, tilt amplitude); first-order pointer regime
    std::map<Mode, double> frequencies = {{Mode::A, 30.0},
                                          {Mode::B, 32.0},
                                          {Mode::C, 34.0},
                                          {Mode::E, 36.0},
                                          {Mode::F, 38.0}};
    std::map<Mode, double> tilt_amplitudes = {{Mode::A, 0.01},
                                              {Mode::B, 0.01},
                                              {Mode::C, 0.01},
                                              {Mode::E, 0.01},
                                              {Mode::F, 0.01}};
    double sample_rate = 1024.0;
    int n_frames = 4096;
    double noise_amplitude = 1e-6;
    std::uint64_t seed = 0;
};

inline constexpr double kMaxTilt = 0.05;

struct SpectrumResult {
    std::vector<double> frequencies;
    std::vector<double> power;
    std::map<Mode, double> peaks;  // power at each mirror's nearest bin
};

namespace detail {

inline void validate(const VibrationConfig& vib) {
    std::map<double, Mode> seen;
    for (const auto& [mirror, f] : vib.frequencies) {
        if (f <= 0.0 || f >= vib.sample_rate / 2.0)
            throw std::invalid_argument("mirror frequency outside (0, Nyquist)");
        if (!seen.emplace(f, mirror).second)
            throw std::invalid_argument("mirror frequencies collide");
    }
    for (const auto& [mirror, d] : vib.tilt_amplitudes) {
        (void)mirror;
        if (d < 0.0 || d > kMaxTilt)
            throw std::invalid_argument("tilt amplitude outside first-order regime");
    }
    if (vib.n_frames < 2 || (vib.n_frames & (vib.n_frames - 1)) != 0)
        throw std::invalid_argument("n_frames must be a power of two");
}

/// In-place iterative radix-2 FFT.
inline void fft(std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen = std::polar(1.0, ang);
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w = 1.0;
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = x[i + k];
                const auto v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

}  // namespace detail

/// Quad-cell difference signal at D. The per-mirror weights Re(w_X) come from
/// the weak values of the (marker-free) interferometer, not from constants.
inline std::vector<double> simulate_quadcell_signal(
    const VibrationConfig& vib, const NestedMziConfig& cfg = NestedMziConfig{}) {
    detail::validate(vib);
    std::map<Mode, double> weight;
    for (const auto& [mirror, f] : vib.frequencies) {
        (void)f;
        weight[mirror] = weak_value(cfg, mirror, Mode::D).real();
    }
    std::vector<double> signal(vib.n_frames, 0.0);
    CounterRng rng(vib.seed, 0x5bd1e995);
    for (int k = 0; k < vib.n_frames; ++k) {
        const double t = k / vib.sample_rate;
        double s = 0.0;
        for (const auto& [mirror, f] : vib.frequencies) {
            const auto it = vib.tilt_amplitudes.find(mirror);
            const double delta = it == vib.tilt_amplitudes.end() ? 0.0 : it->second;
            s += delta * std::sin(2.0 * M_PI * f * t) * weight[mirror];
        }
        if (vib.noise_amplitude > 0.0) s += vib.noise_amplitude * rng.gaussian();
        signal[k] = s;
    }
    return signal;
}

/// One-sided power spectrum, normalized so that the total power equals
/// sum(signal^2) / nFrames (Parseval).
inline SpectrumResult power_spectrum(const std::vector<double>& series,
                                     const VibrationConfig& vib) {
    const std::size_t n = series.size();
    if (n < 2 || (n & (n - 1)) != 0)
        throw std::invalid_argument("series length must be a power of two");
    std::vector<std::complex<double>> x(series.begin(), series.end());
    detail::fft(x);
    SpectrumResult res;
    res.frequencies.resize(n);
    res.power.resize(n);
    const double norm = static_cast<double>(n) * static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        res.frequencies[k] = static_cast<double>(k) * vib.sample_rate / n;
        res.power[k] = std::norm(x[k]) / norm;
    }
    const double bin_width = vib.sample_rate / static_cast<double>(n);
    for (const auto& [mirror, f] : vib.frequencies) {
        const std::size_t k = static_cast<std::size_t>(std::lround(f / bin_width)) % n;
        res.peaks[mirror] = res.power[k];
    }
    return res;
}

/// Median power over bins away from the configured tones and DC.
inline double noise_floor(const SpectrumResult& spec, const VibrationConfig& vib) {
    std::vector<double> bg;
    const double bin_width = vib.sample_rate / spec.power.size();
    for (std::size_t k = 1; k < spec.power.size() / 2; ++k) {
        bool near_tone = false;
        for (const auto& [mirror, f] : vib.frequencies) {
            (void)mirror;
            if (std::abs(spec.frequencies[k] - f) < 2.0 * bin_width) near_tone = true;
        }
        if (!near_tone) bg.push_back(spec.power[k]);
    }
    if (bg.empty()) return 0.0;
    std::nth_element(bg.begin(), bg.begin() + bg.size() / 2, bg.end());
    return bg[bg.size() / 2];
}

}  // namespace nmzi
