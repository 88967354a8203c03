// Minimal pure-state engine for a single photon over labeled path modes,
// tensored with marker qubits. Dimensions are tiny, so everything is a dense
// vector indexed by (mode slot) * 2^markers + marker bits.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nmzi {

using Amplitude = std::complex<double>;

inline constexpr double kTol = 1e-12;
inline constexpr double kZeroProb = 1e-14;

// Segment / port labels of the nested interferometer.
//   S    source
//   C    outer arm (BS1 -> BS4)
//   E    segment BS1 -> BS2
//   A, B inner arms (BS2 -> BS3)
//   F    segment BS3 -> BS4
//   G    segment BS3 -> O3
//   D, O2, O3  detectors; Sink absorbs blocked flux
enum class Mode : int { S = 0, C, E, A, B, F, G, D, O2, O3, Sink };

inline constexpr int kBaseModes = 11;

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::S: return "S";
        case Mode::C: return "C";
        case Mode::E: return "E";
        case Mode::A: return "A";
        case Mode::B: return "B";
        case Mode::F: return "F";
        case Mode::G: return "G";
        case Mode::D: return "D";
        case Mode::O2: return "O2";
        case Mode::O3: return "O3";
        case Mode::Sink: return "SINK";
    }
    return "?";
}

inline std::optional<Mode> mode_from_name(const std::string& s) {
    static const std::array<Mode, kBaseModes> all = {
        Mode::S, Mode::C, Mode::E, Mode::A, Mode::B, Mode::F,
        Mode::G, Mode::D, Mode::O2, Mode::O3, Mode::Sink};
    for (Mode m : all)
        if (s == mode_name(m)) return m;
    return std::nullopt;
}

inline bool is_terminal(Mode m) {
    return m == Mode::D || m == Mode::O2 || m == Mode::O3 || m == Mode::Sink;
}

struct MarkerId {
    int index;      // position in the marker bitstring
    Mode location;  // segment the marker watches
};

/// 2x2 marker density matrix (row-major).
struct ReducedMarkerState {
    std::array<Amplitude, 4> rho;

    double excitation_probability() const { return rho[3].real(); }
    double fidelity_to_ground() const {
        return std::sqrt(std::max(0.0, rho[0].real()));
    }
    double trace() const { return (rho[0] + rho[3]).real(); }
};

// Single photon over modes, tensored with marker qubits. Blocked-segment
// flux is absorbed into extra sink slots (all labeled Sink) so that
// evolution stays unitary even when several segments are blocked.
class JointState {
public:
    JointState(int marker_count, int sink_channels)
        : marker_count_(marker_count),
          dim_bits_(std::size_t{1} << marker_count),
          slots_(kBaseModes + sink_channels),
          amp_(slots_ * dim_bits_, Amplitude{0.0, 0.0}) {}

    /// Photon at the source, all markers in the ground state.
    static JointState source(int marker_count, int sink_channels = 0) {
        JointState st(marker_count, sink_channels);
        st.at(static_cast<int>(Mode::S), 0) = 1.0;
        return st;
    }

    int marker_count() const { return marker_count_; }
    std::size_t bit_dim() const { return dim_bits_; }
    int slot_count() const { return static_cast<int>(slots_); }
    int sink_channel_count() const { return static_cast<int>(slots_) - kBaseModes; }

    // Slot 0..10 are the base modes; slot 11+ are extra sink channels.
    static int slot_of(Mode m) { return static_cast<int>(m); }
    int sink_slot(int channel) const { return kBaseModes + channel; }

    Amplitude& at(int slot, std::size_t bits) { return amp_[slot * dim_bits_ + bits]; }
    const Amplitude& at(int slot, std::size_t bits) const {
        return amp_[slot * dim_bits_ + bits];
    }
    Amplitude& at(Mode m, std::size_t bits) { return at(slot_of(m), bits); }
    const Amplitude& at(Mode m, std::size_t bits) const { return at(slot_of(m), bits); }

    double norm_sq() const {
        double n = 0.0;
        for (const auto& a : amp_) n += std::norm(a);
        return n;
    }

    bool slot_is_sink(int slot) const { return slot >= kBaseModes; }

    /// All slots carrying the given label (Sink aggregates its channels).
    std::vector<int> slots_for(Mode m) const {
        if (m != Mode::Sink) return {slot_of(m)};
        std::vector<int> out = {slot_of(Mode::Sink)};
        for (int c = 0; c < sink_channel_count(); ++c) out.push_back(sink_slot(c));
        return out;
    }

    void renormalize() {
        double n = std::sqrt(norm_sq());
        if (n < kZeroProb) throw std::runtime_error("cannot renormalize zero state");
        for (auto& a : amp_) a /= n;
    }

private:
    int marker_count_;
    std::size_t dim_bits_;
    std::size_t slots_;
    std::vector<Amplitude> amp_;
};

namespace detail {
inline void check_transmission(double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("beam splitter transmission outside [0,1]");
}
}  // namespace detail

/// Two-mode splitter [[sqrt(T), sqrt(1-T)], [sqrt(1-T), -sqrt(T)]] acting on
/// amplitudes at (in1, in2), written to (out1, out2). Identity on markers.
/// Output slots must coincide with the inputs or carry no amplitude.
inline JointState apply_beam_splitter_slots(const JointState& state, int in1, int in2,
                                            int out1, int out2, double t) {
    detail::check_transmission(t);
    if (in1 == in2 || out1 == out2)
        throw std::invalid_argument("beam splitter ports must be distinct");
    const double ct = std::sqrt(t);
    const double st = std::sqrt(1.0 - t);
    JointState next = state;
    for (std::size_t bits = 0; bits < state.bit_dim(); ++bits) {
        const Amplitude a1 = state.at(in1, bits);
        const Amplitude a2 = state.at(in2, bits);
        next.at(in1, bits) = 0.0;
        next.at(in2, bits) = 0.0;
        next.at(out1, bits) += ct * a1 + st * a2;
        next.at(out2, bits) += st * a1 - ct * a2;
    }
    return next;
}

inline JointState apply_beam_splitter(const JointState& state, Mode in1, Mode in2,
                                      Mode out1, Mode out2, double t) {
    return apply_beam_splitter_slots(state, JointState::slot_of(in1),
                                     JointState::slot_of(in2), JointState::slot_of(out1),
                                     JointState::slot_of(out2), t);
}

/// Multiply every coefficient with the photon on `segment` by e^{i phi}.
inline JointState apply_phase_shift(const JointState& state, Mode segment, double phi) {
    if (is_terminal(segment))
        throw std::invalid_argument(std::string("cannot phase-shift terminal mode ") +
                                    mode_name(segment));
    const Amplitude phase = std::polar(1.0, phi);
    JointState next = state;
    for (std::size_t bits = 0; bits < state.bit_dim(); ++bits)
        next.at(segment, bits) *= phase;
    return next;
}

/// On the photon-at-segment subspace, rotate the marker qubit by theta:
/// |0> -> cos|0> + sin|1>,  |1> -> -sin|0> + cos|1>.  Identity elsewhere.
inline JointState apply_marker_coupling(const JointState& state, Mode segment,
                                        const MarkerId& marker, double theta) {
    if (marker.location != segment)
        throw std::invalid_argument("marker is not located on this segment");
    if (marker.index < 0 || marker.index >= state.marker_count())
        throw std::invalid_argument("marker index out of range");
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const std::size_t bit = std::size_t{1} << marker.index;
    const int slot = JointState::slot_of(segment);
    JointState next = state;
    for (std::size_t bits = 0; bits < state.bit_dim(); ++bits) {
        if (bits & bit) continue;
        const Amplitude g = state.at(slot, bits);
        const Amplitude x = state.at(slot, bits | bit);
        next.at(slot, bits) = c * g - s * x;
        next.at(slot, bits | bit) = s * g + c * x;
    }
    return next;
}

struct Conditioned {
    double probability;
    std::optional<JointState> conditional;  // empty when probability ~ 0
};

/// Project onto the photon being at `mode` and renormalize.
inline Conditioned condition_on_mode(const JointState& state, Mode mode) {
    JointState restricted(state.marker_count(), state.sink_channel_count());
    double prob = 0.0;
    for (int slot : state.slots_for(mode)) {
        for (std::size_t bits = 0; bits < state.bit_dim(); ++bits) {
            const Amplitude a = state.at(slot, bits);
            prob += std::norm(a);
            restricted.at(slot, bits) = a;
        }
    }
    if (prob < kZeroProb) return {prob, std::nullopt};
    restricted.renormalize();
    return {prob, std::move(restricted)};
}

/// Partial trace over the photon position and all other markers.
inline ReducedMarkerState reduced_marker_state(const JointState& state,
                                               const MarkerId& marker) {
    if (marker.index < 0 || marker.index >= state.marker_count())
        throw std::invalid_argument("unknown marker");
    const std::size_t bit = std::size_t{1} << marker.index;
    ReducedMarkerState red{{Amplitude{0.0}, Amplitude{0.0}, Amplitude{0.0}, Amplitude{0.0}}};
    for (int slot = 0; slot < state.slot_count(); ++slot) {
        for (std::size_t bits = 0; bits < state.bit_dim(); ++bits) {
            if (bits & bit) continue;
            const Amplitude g = state.at(slot, bits);
            const Amplitude x = state.at(slot, bits | bit);
            red.rho[0] += g * std::conj(g);
            red.rho[1] += g * std::conj(x);
            red.rho[2] += x * std::conj(g);
            red.rho[3] += x * std::conj(x);
        }
    }
    return red;
}

}  // namespace nmzi
