// JSON config parsing (strict: unknown keys are rejected) and report
// serialization for the CLI.
#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "analysis.hpp"
#include "danan.hpp"
#include "discrimination.hpp"

namespace nmzi {

using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& context) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ConfigError("unknown key \"" + key + "\" in " + context);
    }
}

inline Mode parse_mode(const json& j, const std::string& context) {
    if (!j.is_string()) throw ConfigError("expected a segment name string in " + context);
    const auto m = mode_from_name(j.get<std::string>());
    if (!m) throw ConfigError("unknown segment \"" + j.get<std::string>() + "\" in " + context);
    return *m;
}

inline double parse_transmission(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError("key \"" + key + "\" must be a number");
    const double t = j.get<double>();
    if (t < 0.0 || t > 1.0)
        throw ConfigError("key \"" + key + "\" must lie in [0, 1]");
    return t;
}

}  // namespace detail

struct ExperimentConfig {
    NestedMziConfig mzi;
    VibrationConfig vibration;
    PovmMode povm_mode = PovmMode::BasisCheck;
};

/// Parse the documented JSON schema; `{}` yields the tuned default network.
inline ExperimentConfig parse_config(const json& root) {
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    detail::reject_unknown_keys(
        root, {"t1", "t2", "t3", "t4", "phases", "blocked", "markers", "povm",
               "vibration"},
        "config");
    ExperimentConfig cfg;
    auto& mzi = cfg.mzi;
    if (root.contains("t1")) mzi.t1 = detail::parse_transmission(root["t1"], "t1");
    if (root.contains("t2")) mzi.t2 = detail::parse_transmission(root["t2"], "t2");
    if (root.contains("t3")) mzi.t3 = detail::parse_transmission(root["t3"], "t3");
    if (root.contains("t4")) mzi.t4 = detail::parse_transmission(root["t4"], "t4");
    if (root.contains("phases")) {
        const auto& ph = root["phases"];
        if (!ph.is_object()) throw ConfigError("key \"phases\" must be an object");
        for (const auto& [seg, val] : ph.items()) {
            const auto m = mode_from_name(seg);
            if (!m || (*m != Mode::A && *m != Mode::B && *m != Mode::C))
                throw ConfigError("phase on unknown segment \"" + seg + "\"");
            if (!val.is_number()) throw ConfigError("phase on \"" + seg + "\" must be a number");
            mzi.phases[*m] = val.get<double>();
        }
    }
    if (root.contains("blocked")) {
        const auto& bl = root["blocked"];
        if (!bl.is_array()) throw ConfigError("key \"blocked\" must be an array");
        for (const auto& item : bl) mzi.blocked.insert(detail::parse_mode(item, "blocked"));
    }
    if (root.contains("markers")) {
        const auto& mk = root["markers"];
        if (!mk.is_array()) throw ConfigError("key \"markers\" must be an array");
        for (const auto& item : mk) {
            if (!item.is_object()) throw ConfigError("marker entries must be objects");
            detail::reject_unknown_keys(item, {"location", "theta"}, "marker");
            if (!item.contains("location") || !item.contains("theta"))
                throw ConfigError("marker entries need \"location\" and \"theta\"");
            const Mode loc = detail::parse_mode(item["location"], "marker location");
            if (!item["theta"].is_number())
                throw ConfigError("marker \"theta\" must be a number");
            const double theta = item["theta"].get<double>();
            if (theta < 0.0 || theta > M_PI / 2 + kTol)
                throw ConfigError("marker \"theta\" must lie in [0, pi/2]");
            for (const auto& existing : mzi.markers)
                if (existing.location == loc)
                    throw ConfigError(std::string("duplicate marker location \"") +
                                      mode_name(loc) + "\"");
            mzi.markers.push_back({loc, theta});
        }
    }
    if (root.contains("povm")) {
        const std::string mode = root["povm"].get<std::string>();
        if (mode == "basis-check")
            cfg.povm_mode = PovmMode::BasisCheck;
        else if (mode == "optimal-idp")
            cfg.povm_mode = PovmMode::OptimalIdp;
        else
            throw ConfigError("unknown povm mode \"" + mode + "\"");
    }
    if (root.contains("vibration")) {
        const auto& vb = root["vibration"];
        if (!vb.is_object()) throw ConfigError("key \"vibration\" must be an object");
        detail::reject_unknown_keys(
            vb, {"frequencies", "tilts", "sample_rate", "n_frames", "noise", "seed"},
            "vibration");
        auto& vib = cfg.vibration;
        if (vb.contains("frequencies")) {
            vib.frequencies.clear();
            for (const auto& [seg, f] : vb["frequencies"].items())
                vib.frequencies[detail::parse_mode(json(seg), "vibration frequencies")] =
                    f.get<double>();
        }
        if (vb.contains("tilts")) {
            vib.tilt_amplitudes.clear();
            for (const auto& [seg, d] : vb["tilts"].items())
                vib.tilt_amplitudes[detail::parse_mode(json(seg), "vibration tilts")] =
                    d.get<double>();
        }
        if (vb.contains("sample_rate")) vib.sample_rate = vb["sample_rate"].get<double>();
        if (vb.contains("n_frames")) vib.n_frames = vb["n_frames"].get<int>();
        if (vb.contains("noise")) vib.noise_amplitude = vb["noise"].get<double>();
        if (vb.contains("seed")) vib.seed = vb["seed"].get<std::uint64_t>();
    }
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(root);
}

// ---- report serialization ----

inline json to_json(const TraceReport& r) {
    json markers = json::array();
    for (const auto& m : r.markers)
        markers.push_back({{"location", mode_name(m.location)},
                           {"excitation_probability", m.excitation_probability},
                           {"fidelity_to_ground", m.fidelity_to_ground}});
    return {{"condition_port", mode_name(r.condition_port)},
            {"port_probability", r.port_probability},
            {"markers", markers}};
}

inline json to_json(const ExclusivityVerdict& v) {
    return {{"path", mode_name(v.path)},
            {"phase_invariant", v.phase_invariant},
            {"solo_prob_matches", v.solo_prob_matches},
            {"concludes_exclusive", v.concludes_exclusive},
            {"full_probability", v.full_probability},
            {"solo_probability", v.solo_probability},
            {"phase_spread", v.phase_spread}};
}

inline json to_json(const ContradictionReport& r) {
    return {{"B", to_json(r.b)},
            {"C", to_json(r.c)},
            {"contradiction", r.contradiction}};
}

inline json to_json(const FPassageReport& r) {
    return {{"theta", r.theta},
            {"probability_f", r.probability_f},
            {"conditional_defined", r.conditional_defined},
            {"p_both_ground", r.p_both_ground},
            {"p_exactly_one_excited", r.p_exactly_one_excited}};
}

inline json to_json(const ConclusiveBranchReport& r) {
    return {{"theta_weak", r.theta_weak},
            {"p_conclusive_given_d", r.p_conclusive_given_d},
            {"conclusive_defined", r.conclusive_defined},
            {"p_a_given_conclusive", r.p_a_given_conclusive},
            {"p_b_given_conclusive", r.p_b_given_conclusive},
            {"ground_defined", r.ground_defined},
            {"p_a_given_ground", r.p_a_given_ground},
            {"p_b_given_ground", r.p_b_given_ground}};
}

inline std::string combo_key(const std::array<Verdict, 3>& combo) {
    std::string s;
    const char* segs[3] = {"A", "B", "C"};
    for (int i = 0; i < 3; ++i) {
        if (!s.empty()) s += ",";
        s += segs[i];
        s += "=";
        s += verdict_name(combo[i]);
    }
    return s;
}

inline json to_json(const AccountingTally& t) {
    json counts = json::object();
    for (const auto& [combo, cnt] : t.counts) counts[combo_key(combo)] = cnt;
    return {{"total_trials", t.total_trials},
            {"detections_at_d", t.detections_at_d},
            {"seed", t.seed},
            {"counts", counts}};
}

}  // namespace nmzi
