// Unambiguous path discrimination on marker qubits: POVM construction,
// single-shot sampling with collapse, and seeded Monte Carlo accounting of
// per-photon verdict combinations among D detections.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "interferometer.hpp"
#include "rng.hpp"

namespace nmzi {

enum class Verdict { ConclusivePresent, ConclusiveAbsent, Inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::ConclusivePresent: return "present";
        case Verdict::ConclusiveAbsent: return "absent";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

/// 2x2 Hermitian operator, row-major.
using Mat2 = std::array<Amplitude, 4>;

struct PovmElement {
    Verdict verdict;
    Mat2 op;
};

struct Povm {
    std::vector<PovmElement> elements;
};

enum class PovmMode { BasisCheck, OptimalIdp };

namespace detail {

inline Mat2 outer(Amplitude v0, Amplitude v1, double scale = 1.0) {
    return {scale * v0 * std::conj(v0), scale * v0 * std::conj(v1),
            scale * v1 * std::conj(v0), scale * v1 * std::conj(v1)};
}

inline Mat2 mat_sub(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r[i] = a[i] - b[i];
    return r;
}

/// Square root of a 2x2 Hermitian PSD matrix (closed form via trace/det).
inline Mat2 mat_sqrt(const Mat2& m) {
    const double tr = (m[0] + m[3]).real();
    const double det = (m[0] * m[3] - m[1] * m[2]).real();
    const double s = std::sqrt(std::max(0.0, det));
    const double t = std::sqrt(std::max(0.0, tr + 2.0 * s));
    if (t < 1e-300) return {Amplitude{0}, Amplitude{0}, Amplitude{0}, Amplitude{0}};
    return {(m[0] + s) / t, m[1] / t, m[2] / t, (m[3] + s) / t};
}

}  // namespace detail

/// Discriminates an untouched marker |0> from a visited one
/// cos(theta)|0> + sin(theta)|1>, with zero cross-error.
///   BasisCheck: {present: |1><1|, inconclusive: |0><0|}; an inconclusive
///     outcome projects the marker back to ground (trace erasure).
///   OptimalIdp: three-outcome unambiguous discrimination with the minimal
///     equal-prior inconclusive probability cos(theta).
inline Povm build_discrimination_povm(double theta, PovmMode mode) {
    if (!(theta > 0.0 && theta <= M_PI / 2 + kTol))
        throw std::invalid_argument("discrimination requires theta in (0, pi/2]");
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Povm povm;
    if (mode == PovmMode::BasisCheck) {
        povm.elements.push_back({Verdict::ConclusivePresent, detail::outer(0.0, 1.0)});
        povm.elements.push_back({Verdict::Inconclusive, detail::outer(1.0, 0.0)});
        return povm;
    }
    // E_present = a |1><1|, E_absent = a |chi_perp><chi_perp| with
    // chi_perp = sin|0> - cos|1> and a = 1/(1 + cos theta); the remainder is
    // the rank-deficient inconclusive element with <E_inc> = cos theta on
    // both hypotheses.
    const double a = 1.0 / (1.0 + c);
    const Mat2 present = detail::outer(0.0, 1.0, a);
    const Mat2 absent = detail::outer(s, -c, a);
    const Mat2 identity = {Amplitude{1.0}, Amplitude{0.0}, Amplitude{0.0}, Amplitude{1.0}};
    const Mat2 inconclusive = detail::mat_sub(detail::mat_sub(identity, present), absent);
    povm.elements.push_back({Verdict::ConclusivePresent, present});
    povm.elements.push_back({Verdict::ConclusiveAbsent, absent});
    povm.elements.push_back({Verdict::Inconclusive, inconclusive});
    return povm;
}

/// Probability of each POVM outcome on the given marker of a joint state.
inline std::vector<double> outcome_probabilities(const JointState& state,
                                                 const MarkerId& marker,
                                                 const Povm& povm) {
    const ReducedMarkerState rho = reduced_marker_state(state, marker);
    std::vector<double> probs;
    probs.reserve(povm.elements.size());
    for (const auto& el : povm.elements) {
        // tr(E rho)
        const Amplitude p = el.op[0] * rho.rho[0] + el.op[1] * rho.rho[2] +
                            el.op[2] * rho.rho[1] + el.op[3] * rho.rho[3];
        probs.push_back(std::max(0.0, p.real()));
    }
    return probs;
}

/// Apply the measurement operator sqrt(E) of one POVM element to the marker
/// qubit and renormalize.
inline JointState collapse_marker(const JointState& state, const MarkerId& marker,
                                  const Mat2& element) {
    const Mat2 k = detail::mat_sqrt(element);
    const std::size_t bit = std::size_t{1} << marker.index;
    JointState next = state;
    for (int slot = 0; slot < state.slot_count(); ++slot) {
        for (std::size_t bits = 0; bits < state.bit_dim(); ++bits) {
            if (bits & bit) continue;
            const Amplitude g = state.at(slot, bits);
            const Amplitude x = state.at(slot, bits | bit);
            next.at(slot, bits) = k[0] * g + k[1] * x;
            next.at(slot, bits | bit) = k[2] * g + k[3] * x;
        }
    }
    next.renormalize();
    return next;
}

struct SampledMeasurement {
    Verdict verdict;
    JointState collapsed;
};

inline SampledMeasurement sample_measurement(const JointState& state,
                                             const MarkerId& marker, const Povm& povm,
                                             CounterRng& rng) {
    const auto probs = outcome_probabilities(state, marker, povm);
    double total = 0.0;
    for (double p : probs) total += p;
    if (total < kZeroProb) throw std::runtime_error("zero total outcome probability");
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = probs.size() - 1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) {
            pick = i;
            break;
        }
    }
    return {povm.elements[pick].verdict,
            collapse_marker(state, marker, povm.elements[pick].op)};
}

struct AccountingTally {
    std::uint64_t total_trials = 0;
    std::uint64_t detections_at_d = 0;
    // verdict combination over the A, B, C markers -> count among D detections
    std::map<std::array<Verdict, 3>, std::uint64_t> counts;
    std::uint64_t seed = 0;

    std::uint64_t double_conclusive_count() const {
        std::uint64_t n = 0;
        for (const auto& [combo, cnt] : counts) {
            int present = 0;
            for (Verdict v : combo)
                if (v == Verdict::ConclusivePresent) ++present;
            if (present >= 2) n += cnt;
        }
        return n;
    }
};

/// Closed-form verdict fractions among D detections for the BasisCheck
/// scheme with markers on A, B, C at equal theta. Keys: "A", "B", "C"
/// (single conclusive-present) and "none" (inconclusive everywhere).
inline std::map<std::string, double> expected_fractions(double theta) {
    const double s2 = std::sin(theta) * std::sin(theta);
    const double denom = 1.0 + 2.0 * s2;
    return {{"A", s2 / denom},
            {"B", s2 / denom},
            {"C", s2 / denom},
            {"none", (1.0 - s2) / denom}};
}

/// Per trial: sample the photon's exit port per the Born rule, then measure
/// the A, B, C markers in order with state collapse. Deterministic in
/// (seed, nTrials, config) regardless of worker count.
inline AccountingTally monte_carlo_accounting(const NestedMziConfig& config,
                                              PovmMode povm_mode, std::uint64_t n_trials,
                                              std::uint64_t seed, int workers = 0) {
    const int ia = config.marker_index_of(Mode::A);
    const int ib = config.marker_index_of(Mode::B);
    const int ic = config.marker_index_of(Mode::C);
    if (ia < 0 || ib < 0 || ic < 0)
        throw std::invalid_argument("accounting needs markers on A, B and C");
    const std::array<MarkerId, 3> marker_ids = {
        MarkerId{ia, Mode::A}, MarkerId{ib, Mode::B}, MarkerId{ic, Mode::C}};
    const std::array<double, 3> thetas = {config.markers[ia].theta,
                                          config.markers[ib].theta,
                                          config.markers[ic].theta};

    const EvolutionResult ev = evolve(config);
    std::array<Mode, 4> ports = {Mode::D, Mode::O2, Mode::O3, Mode::Sink};
    std::array<double, 4> port_probs{};
    for (int i = 0; i < 4; ++i)
        port_probs[i] = condition_on_mode(ev.final, ports[i]).probability;
    const Conditioned at_d = condition_on_mode(ev.final, Mode::D);

    std::array<Povm, 3> povms;
    for (int i = 0; i < 3; ++i) povms[i] = build_discrimination_povm(thetas[i], povm_mode);

    auto run_range = [&](std::uint64_t begin, std::uint64_t end, AccountingTally& tally) {
        for (std::uint64_t trial = begin; trial < end; ++trial) {
            CounterRng rng(seed, trial);
            ++tally.total_trials;
            // port draw
            double u = rng.uniform();
            int port = 3;
            double acc = 0.0;
            for (int i = 0; i < 4; ++i) {
                acc += port_probs[i];
                if (u < acc) {
                    port = i;
                    break;
                }
            }
            if (ports[port] != Mode::D) continue;
            ++tally.detections_at_d;
            JointState st = *at_d.conditional;
            std::array<Verdict, 3> combo{};
            for (int m = 0; m < 3; ++m) {
                auto res = sample_measurement(st, marker_ids[m], povms[m], rng);
                combo[m] = res.verdict;
                st = std::move(res.collapsed);
            }
            ++tally.counts[combo];
        }
    };

    if (workers <= 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    AccountingTally total;
    total.seed = seed;
    if (workers == 1 || n_trials < 1024) {
        run_range(0, n_trials, total);
        return total;
    }
    std::vector<AccountingTally> parts(workers);
    std::vector<std::thread> threads;
    const std::uint64_t chunk = (n_trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::uint64_t begin = std::min<std::uint64_t>(w * chunk, n_trials);
        const std::uint64_t end = std::min<std::uint64_t>(begin + chunk, n_trials);
        threads.emplace_back(
            [&, begin, end, w]() { run_range(begin, end, parts[w]); });
    }
    for (auto& t : threads) t.join();
    // merge by worker index; counts are a commutative monoid
    for (const auto& part : parts) {
        total.total_trials += part.total_trials;
        total.detections_at_d += part.detections_at_d;
        for (const auto& [combo, cnt] : part.counts) total.counts[combo] += cnt;
    }
    return total;
}

}  // namespace nmzi
