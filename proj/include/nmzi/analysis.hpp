// Weak traces, weak values, phase scans, the exclusive-path criterion and the
// B/C contradiction it produces, F-passage statistics, and the conditional
// traces behind a fully efficient marker on C.
#pragma once

#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "interferometer.hpp"

namespace nmzi {

struct MarkerTrace {
    Mode location;
    double excitation_probability;  // p_X = <1|rho|1>
    double fidelity_to_ground;      // sqrt(<0|rho|0>)
};

struct TraceReport {
    Mode condition_port;
    double port_probability;
    std::vector<MarkerTrace> markers;
};

struct ExclusivityVerdict {
    Mode path;
    bool phase_invariant;
    bool solo_prob_matches;
    bool concludes_exclusive;  // conjunction of the two criteria
    double full_probability;
    double solo_probability;
    double phase_spread;
};

struct ContradictionReport {
    ExclusivityVerdict b;
    ExclusivityVerdict c;
    bool contradiction;  // both "exclusive" verdicts hold at once
};

struct FPassageReport {
    double theta;
    double probability_f;
    bool conditional_defined;
    double p_both_ground;
    double p_exactly_one_excited;
};

struct ConclusiveBranchReport {
    double theta_weak;
    double p_conclusive_given_d;  // C marker found excited, given detection at D
    bool conclusive_defined;
    double p_a_given_conclusive;
    double p_b_given_conclusive;
    bool ground_defined;
    double p_a_given_ground;
    double p_b_given_ground;
};

namespace detail {

inline Stage slice_for_segment(Mode segment) {
    switch (segment) {
        case Mode::C:
        case Mode::A:
        case Mode::B: return Stage::PostMarkers;
        case Mode::E: return Stage::PostBs1;
        case Mode::F:
        case Mode::G: return Stage::PostBs3;
        default:
            throw std::invalid_argument(std::string("no weak-value slice for mode ") +
                                        mode_name(segment));
    }
}

/// Backward-evolved (retrodicted) state at the given slice: the postselection
/// projector state pulled back through the adjoints of all later elements.
inline JointState backward_state(const EvolutionResult& ev, Mode condition_port,
                                 Stage slice) {
    const JointState& ref = ev.final;
    JointState phi(ref.marker_count(), ref.sink_channel_count());
    phi.at(condition_port, 0) = 1.0;
    const std::size_t cut = ev.elements_after(slice);
    for (std::size_t i = ev.elements.size(); i-- > cut;)
        phi = apply_element_adjoint(phi, ev.elements[i]);
    return phi;
}

inline Amplitude overlap(const JointState& phi, const JointState& psi) {
    Amplitude s = 0.0;
    for (int slot = 0; slot < psi.slot_count(); ++slot)
        for (std::size_t bits = 0; bits < psi.bit_dim(); ++bits)
            s += std::conj(phi.at(slot, bits)) * psi.at(slot, bits);
    return s;
}

inline Amplitude overlap_on_mode(const JointState& phi, const JointState& psi,
                                 Mode segment) {
    Amplitude s = 0.0;
    for (int slot : psi.slots_for(segment))
        for (std::size_t bits = 0; bits < psi.bit_dim(); ++bits)
            s += std::conj(phi.at(slot, bits)) * psi.at(slot, bits);
    return s;
}

}  // namespace detail

/// <Phi|P_segment|Psi> / <Phi|Psi> with |Psi> the forward snapshot at the
/// segment's slice and <Phi| the backward state from the postselection port.
inline std::complex<double> weak_value(const NestedMziConfig& config, Mode segment,
                                       Mode condition_port) {
    if (!config.markers.empty())
        throw std::invalid_argument("weak_value expects a marker-free config");
    const EvolutionResult ev = evolve(config);
    const Stage slice = detail::slice_for_segment(segment);
    const JointState& psi = ev.snapshot(slice);
    const JointState phi = detail::backward_state(ev, condition_port, slice);
    const Amplitude denom = detail::overlap(phi, psi);
    if (std::abs(denom) < kZeroProb)
        throw std::runtime_error("zero postselection probability");
    return detail::overlap_on_mode(phi, psi, segment) / denom;
}

/// Condition the final state on a port and report each marker's reduced state.
inline TraceReport weak_trace_report(const NestedMziConfig& config, Mode condition_port) {
    if (config.markers.empty())
        throw std::invalid_argument("weak_trace_report requires at least one marker");
    const EvolutionResult ev = evolve(config);
    const Conditioned cond = condition_on_mode(ev.final, condition_port);
    if (!cond.conditional)
        throw std::runtime_error("conditioning port has (numerically) zero probability");
    TraceReport rep{condition_port, cond.probability, {}};
    for (std::size_t i = 0; i < config.markers.size(); ++i) {
        const MarkerId id{static_cast<int>(i), config.markers[i].location};
        const ReducedMarkerState rho = reduced_marker_state(*cond.conditional, id);
        rep.markers.push_back({config.markers[i].location, rho.excitation_probability(),
                               rho.fidelity_to_ground()});
    }
    return rep;
}

/// P(D) as a function of a phase on one segment, n points over [0, 2pi).
inline std::vector<std::pair<double, double>> phase_scan(const NestedMziConfig& config,
                                                         Mode segment, int n_points) {
    if (n_points < 2) throw std::invalid_argument("phase scan needs >= 2 points");
    if (!detail::kPhaseSegments.count(segment))
        throw std::invalid_argument("phase scan segment must be A, B or C");
    std::vector<std::pair<double, double>> out;
    out.reserve(n_points);
    for (int k = 0; k < n_points; ++k) {
        const double phi = 2.0 * M_PI * k / n_points;
        NestedMziConfig cfg = config;
        cfg.phases[segment] = phi;
        out.emplace_back(phi, port_probabilities(cfg).at(Mode::D));
    }
    return out;
}

/// P(D) with the other two inner/outer paths blocked.
inline double solo_path_probability(Mode path,
                                    const NestedMziConfig& base = NestedMziConfig{}) {
    if (path != Mode::A && path != Mode::B && path != Mode::C)
        throw std::invalid_argument("solo path must be A, B or C");
    NestedMziConfig cfg = base;
    for (Mode p : {Mode::A, Mode::B, Mode::C})
        if (p != path) cfg.blocked.insert(p);
    return port_probabilities(cfg).at(Mode::D);
}

inline constexpr double kVerdictTol = 1e-10;

/// The exclusive-path criterion: P(D) insensitive to a phase on the path, and
/// equal to P(D) when all other paths are blocked.
inline ExclusivityVerdict exclusive_path_argument(
    Mode path, const NestedMziConfig& base = NestedMziConfig{}, int n_points = 100) {
    const auto scan = phase_scan(base, path, n_points);
    double lo = scan.front().second, hi = scan.front().second;
    for (const auto& [phi, p] : scan) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    const double spread = hi - lo;
    const double full = port_probabilities(base).at(Mode::D);
    const double solo = solo_path_probability(path, base);
    ExclusivityVerdict v;
    v.path = path;
    v.phase_invariant = spread < kVerdictTol;
    v.solo_prob_matches = std::abs(solo - full) < kVerdictTol;
    v.concludes_exclusive = v.phase_invariant && v.solo_prob_matches;
    v.full_probability = full;
    v.solo_probability = solo;
    v.phase_spread = spread;
    return v;
}

/// Runs the exclusivity criterion for B and for C. On the tuned network both
/// verdicts hold, i.e. the criterion "proves" two different sole paths.
inline ContradictionReport contradiction_demo(
    const NestedMziConfig& base = NestedMziConfig{}) {
    ContradictionReport rep{exclusive_path_argument(Mode::B, base),
                            exclusive_path_argument(Mode::C, base), false};
    rep.contradiction = rep.b.concludes_exclusive && rep.c.concludes_exclusive;
    return rep;
}

/// Markers on A and B at equal theta; condition the post-BS3 snapshot on F.
/// Any photon at F carries exactly one excited marker.
inline FPassageReport f_passage_check(double theta) {
    NestedMziConfig cfg;
    cfg.markers = {{Mode::A, theta}, {Mode::B, theta}};
    const EvolutionResult ev = evolve(cfg);
    const Conditioned cond = condition_on_mode(ev.snapshot(Stage::PostBs3), Mode::F);
    FPassageReport rep{theta, cond.probability, false, 0.0, 0.0};
    if (!cond.conditional) return rep;
    rep.conditional_defined = true;
    const JointState& st = *cond.conditional;
    double p_ground = 0.0, p_one = 0.0;
    for (int slot = 0; slot < st.slot_count(); ++slot) {
        for (std::size_t bits = 0; bits < st.bit_dim(); ++bits) {
            const double p = std::norm(st.at(slot, bits));
            if (bits == 0)
                p_ground += p;
            else if (bits == 1 || bits == 2)
                p_one += p;
        }
    }
    rep.p_both_ground = p_ground;
    rep.p_exactly_one_excited = p_one;
    return rep;
}

/// Fully efficient marker on C plus weak markers on A and B; condition on D,
/// then split on the C marker being excited (conclusive) or ground.
inline ConclusiveBranchReport conclusive_branch_traces(double theta_weak) {
    NestedMziConfig cfg;
    cfg.markers = {{Mode::C, M_PI / 2}, {Mode::A, theta_weak}, {Mode::B, theta_weak}};
    const int c_idx = 0, a_idx = 1, b_idx = 2;
    const EvolutionResult ev = evolve(cfg);
    const Conditioned at_d = condition_on_mode(ev.final, Mode::D);
    if (!at_d.conditional) throw std::runtime_error("no amplitude at D");
    const JointState& st = *at_d.conditional;

    auto branch = [&](bool c_excited) {
        JointState b(st.marker_count(), st.sink_channel_count());
        double p = 0.0;
        for (int slot = 0; slot < st.slot_count(); ++slot) {
            for (std::size_t bits = 0; bits < st.bit_dim(); ++bits) {
                const bool exc = (bits >> c_idx) & 1;
                if (exc != c_excited) continue;
                b.at(slot, bits) = st.at(slot, bits);
                p += std::norm(st.at(slot, bits));
            }
        }
        return std::pair<double, JointState>(p, b);
    };

    auto [p_exc, branch_exc] = branch(true);
    auto [p_gnd, branch_gnd] = branch(false);

    ConclusiveBranchReport rep{};
    rep.theta_weak = theta_weak;
    rep.p_conclusive_given_d = p_exc;
    rep.conclusive_defined = p_exc > kZeroProb;
    rep.ground_defined = p_gnd > kZeroProb;
    if (rep.conclusive_defined) {
        branch_exc.renormalize();
        rep.p_a_given_conclusive =
            reduced_marker_state(branch_exc, {a_idx, Mode::A}).excitation_probability();
        rep.p_b_given_conclusive =
            reduced_marker_state(branch_exc, {b_idx, Mode::B}).excitation_probability();
    }
    if (rep.ground_defined) {
        branch_gnd.renormalize();
        rep.p_a_given_ground =
            reduced_marker_state(branch_gnd, {a_idx, Mode::A}).excitation_probability();
        rep.p_b_given_ground =
            reduced_marker_state(branch_gnd, {b_idx, Mode::B}).excitation_probability();
    }
    return rep;
}

}  // namespace nmzi
