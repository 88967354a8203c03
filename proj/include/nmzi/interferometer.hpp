// Builds the nested Mach-Zehnder network as an ordered element list and
// evolves the source state through it, recording per-stage snapshots.
//
// Layout (all splitters use the real convention from qcore.hpp):
//   BS1: S -> C, E          transmission t1 (toward C)
//   BS2: E -> A, B          transmission t2
//   BS3: A, B -> G, F       transmission t3; tuned (t3 = 1/2) means F is dark
//   BS4: C, F -> D, O2      transmission t4 (C toward D)
//   G feeds O3 directly.
// With this port ordering the A-path amplitude at D is -1/3 and the B- and
// C-path amplitudes are +1/3 on the default configuration.
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <variant>
#include <vector>

#include "qcore.hpp"

namespace nmzi {

struct MarkerSpec {
    Mode location;  // one of A, B, C, E, F
    double theta;   // coupling angle in [0, pi/2]; epsilon = sin(theta)
};

struct NestedMziConfig {
    double t1 = 1.0 / 3.0;  // BS1 transmission toward C
    double t2 = 0.5;        // BS2 (inner entry)
    double t3 = 0.5;        // BS3 (inner exit); 0.5 = tuned dark port at F
    double t4 = 1.0 / 3.0;  // BS4 transmission C -> D
    std::map<Mode, double> phases;  // on A, B, C
    std::set<Mode> blocked;
    std::vector<MarkerSpec> markers;

    int marker_index_of(Mode location) const {
        for (std::size_t i = 0; i < markers.size(); ++i)
            if (markers[i].location == location) return static_cast<int>(i);
        return -1;
    }
};

struct SplitterElement {
    Mode in1, in2, out1, out2;
    double t;
};
struct PhaseElement {
    Mode segment;
    double phi;
};
struct CouplingElement {
    Mode segment;
    int marker_index;
    double theta;
};
struct BlockElement {
    Mode segment;
    int sink_channel;
};
struct RouteElement {  // lossless transfer segment -> terminal port
    Mode from, to;
};

using Element =
    std::variant<SplitterElement, PhaseElement, CouplingElement, BlockElement, RouteElement>;

namespace detail {

inline const std::set<Mode> kMarkableSegments = {Mode::A, Mode::B, Mode::C, Mode::E,
                                                 Mode::F};
inline const std::set<Mode> kPhaseSegments = {Mode::A, Mode::B, Mode::C};

inline void validate(const NestedMziConfig& cfg) {
    check_transmission(cfg.t1);
    check_transmission(cfg.t2);
    check_transmission(cfg.t3);
    check_transmission(cfg.t4);
    std::set<Mode> seen;
    for (const auto& m : cfg.markers) {
        if (!kMarkableSegments.count(m.location))
            throw std::invalid_argument(std::string("marker on unsupported segment ") +
                                        mode_name(m.location));
        if (!seen.insert(m.location).second)
            throw std::invalid_argument(std::string("duplicate marker on segment ") +
                                        mode_name(m.location));
        if (!(m.theta >= 0.0 && m.theta <= M_PI / 2 + kTol))
            throw std::invalid_argument("marker theta outside [0, pi/2]");
    }
    for (Mode b : cfg.blocked)
        if (is_terminal(b) || b == Mode::S || b == Mode::G)
            throw std::invalid_argument(std::string("cannot block segment ") +
                                        mode_name(b));
    for (const auto& [seg, phi] : cfg.phases) {
        (void)phi;
        if (!kPhaseSegments.count(seg))
            throw std::invalid_argument(std::string("phase plate only supported on "
                                                    "A, B, C; got ") +
                                        mode_name(seg));
    }
}

}  // namespace detail

/// Ordered element list realizing the network; deterministic ordering.
inline std::vector<Element> build_nested_mzi(const NestedMziConfig& cfg) {
    detail::validate(cfg);
    std::vector<Element> elems;
    int sink_channel = 0;
    auto add_marker = [&](Mode seg) {
        int idx = cfg.marker_index_of(seg);
        if (idx >= 0) elems.push_back(CouplingElement{seg, idx, cfg.markers[idx].theta});
    };
    auto add_phase = [&](Mode seg) {
        auto it = cfg.phases.find(seg);
        if (it != cfg.phases.end() && it->second != 0.0)
            elems.push_back(PhaseElement{seg, it->second});
    };
    auto add_block = [&](Mode seg) {
        if (cfg.blocked.count(seg)) elems.push_back(BlockElement{seg, sink_channel++});
    };

    elems.push_back(SplitterElement{Mode::S, Mode::C, Mode::C, Mode::E, cfg.t1});
    add_marker(Mode::E);
    add_block(Mode::E);
    elems.push_back(SplitterElement{Mode::E, Mode::A, Mode::A, Mode::B, cfg.t2});
    for (Mode seg : {Mode::A, Mode::B, Mode::C}) add_phase(seg);
    for (Mode seg : {Mode::A, Mode::B, Mode::C}) add_marker(seg);
    for (Mode seg : {Mode::A, Mode::B, Mode::C}) add_block(seg);
    elems.push_back(SplitterElement{Mode::B, Mode::A, Mode::G, Mode::F, cfg.t3});
    add_marker(Mode::F);
    add_block(Mode::F);
    elems.push_back(SplitterElement{Mode::C, Mode::F, Mode::D, Mode::O2, cfg.t4});
    elems.push_back(RouteElement{Mode::G, Mode::O3});
    return elems;
}

inline JointState apply_element(const JointState& st, const Element& e) {
    return std::visit(
        [&](const auto& el) -> JointState {
            using T = std::decay_t<decltype(el)>;
            if constexpr (std::is_same_v<T, SplitterElement>) {
                return apply_beam_splitter(st, el.in1, el.in2, el.out1, el.out2, el.t);
            } else if constexpr (std::is_same_v<T, PhaseElement>) {
                return apply_phase_shift(st, el.segment, el.phi);
            } else if constexpr (std::is_same_v<T, CouplingElement>) {
                return apply_marker_coupling(
                    st, el.segment, MarkerId{el.marker_index, el.segment}, el.theta);
            } else if constexpr (std::is_same_v<T, BlockElement>) {
                // Lossless absorber: the segment's flux transmits into its own
                // sink channel so global evolution stays unitary.
                return apply_beam_splitter_slots(st, JointState::slot_of(el.segment),
                                                 st.sink_slot(el.sink_channel),
                                                 st.sink_slot(el.sink_channel),
                                                 JointState::slot_of(el.segment), 1.0);
            } else {
                return apply_beam_splitter(st, el.from, el.to, el.to, el.from, 1.0);
            }
        },
        e);
}

/// Inverse of apply_element (all elements are unitary).
inline JointState apply_element_adjoint(const JointState& st, const Element& e) {
    return std::visit(
        [&](const auto& el) -> JointState {
            using T = std::decay_t<decltype(el)>;
            if constexpr (std::is_same_v<T, SplitterElement>) {
                // The splitter matrix is real symmetric, so the adjoint is the
                // same matrix applied from the output ports back to the inputs.
                return apply_beam_splitter(st, el.out1, el.out2, el.in1, el.in2, el.t);
            } else if constexpr (std::is_same_v<T, PhaseElement>) {
                return apply_phase_shift(st, el.segment, -el.phi);
            } else if constexpr (std::is_same_v<T, CouplingElement>) {
                return apply_marker_coupling(
                    st, el.segment, MarkerId{el.marker_index, el.segment}, -el.theta);
            } else if constexpr (std::is_same_v<T, BlockElement>) {
                return apply_beam_splitter_slots(st, st.sink_slot(el.sink_channel),
                                                 JointState::slot_of(el.segment),
                                                 JointState::slot_of(el.segment),
                                                 st.sink_slot(el.sink_channel), 1.0);
            } else {
                return apply_beam_splitter(st, el.to, el.from, el.from, el.to, 1.0);
            }
        },
        e);
}

enum class Stage { PostBs1, PostBs2, PostMarkers, PostBs3, PostBs4 };

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::PostBs1: return "post-BS1";
        case Stage::PostBs2: return "post-BS2";
        case Stage::PostMarkers: return "post-markers";
        case Stage::PostBs3: return "post-BS3";
        case Stage::PostBs4: return "post-BS4";
    }
    return "?";
}

struct EvolutionResult {
    std::vector<Element> elements;
    std::vector<std::pair<Stage, JointState>> snapshots;
    JointState final;

    const JointState& snapshot(Stage s) const {
        for (const auto& [st, state] : snapshots)
            if (st == s) return state;
        throw std::logic_error("missing snapshot");
    }

    /// Index into `elements` of the first element after the given stage.
    std::size_t elements_after(Stage s) const {
        std::size_t cut = 0;
        int splitters_seen = 0;
        int want = 0;
        switch (s) {
            case Stage::PostBs1: want = 1; break;
            case Stage::PostBs2: want = 2;  break;
            case Stage::PostMarkers: want = 2; break;
            case Stage::PostBs3: want = 3; break;
            case Stage::PostBs4: want = 4; break;
        }
        for (std::size_t i = 0; i < elements.size(); ++i) {
            if (std::holds_alternative<SplitterElement>(elements[i])) ++splitters_seen;
            if (splitters_seen >= want) {
                cut = i + 1;
                if (s == Stage::PostMarkers) {
                    // advance past phases, markers and blocks on A, B, C
                    while (cut < elements.size() &&
                           !std::holds_alternative<SplitterElement>(elements[cut]))
                        ++cut;
                }
                break;
            }
        }
        return cut;
    }
};

inline EvolutionResult evolve(const NestedMziConfig& cfg) {
    auto elems = build_nested_mzi(cfg);
    JointState st = JointState::source(static_cast<int>(cfg.markers.size()),
                                       static_cast<int>(cfg.blocked.size()));
    EvolutionResult res{elems, {}, st};
    int splitters_seen = 0;
    for (std::size_t i = 0; i < elems.size(); ++i) {
        st = apply_element(st, elems[i]);
        if (std::holds_alternative<SplitterElement>(elems[i])) {
            ++splitters_seen;
            if (splitters_seen == 1) res.snapshots.emplace_back(Stage::PostBs1, st);
            if (splitters_seen == 2) res.snapshots.emplace_back(Stage::PostBs2, st);
            if (splitters_seen == 3) res.snapshots.emplace_back(Stage::PostBs3, st);
            if (splitters_seen == 4) res.snapshots.emplace_back(Stage::PostBs4, st);
        }
        bool next_is_bs3 =
            i + 1 < elems.size() &&
            std::holds_alternative<SplitterElement>(elems[i + 1]) && splitters_seen == 2;
        if (next_is_bs3 && res.snapshots.size() == 2)
            res.snapshots.emplace_back(Stage::PostMarkers, st);
    }
    // Degenerate case: no phase/marker/block elements between BS2 and BS3.
    bool have_pm = false;
    for (auto& [stage, state] : res.snapshots)
        if (stage == Stage::PostMarkers) have_pm = true;
    if (!have_pm)
        res.snapshots.emplace_back(Stage::PostMarkers, res.snapshot(Stage::PostBs2));
    std::sort(res.snapshots.begin(), res.snapshots.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    res.final = st;
    return res;
}

/// Probabilities at the terminal partition {D, O2, O3, SINK}; sums to 1.
inline std::map<Mode, double> port_probabilities(const NestedMziConfig& cfg) {
    const JointState fin = evolve(cfg).final;
    std::map<Mode, double> out;
    for (Mode port : {Mode::D, Mode::O2, Mode::O3, Mode::Sink})
        out[port] = condition_on_mode(fin, port).probability;
    return out;
}

}  // namespace nmzi
