#include <doctest.h>

#include <cmath>

#include "nmzi/discrimination.hpp"

using namespace nmzi;

namespace {

// eigenvalues of a 2x2 Hermitian matrix
std::pair<double, double> eigs(const Mat2& m) {
    const double tr = (m[0] + m[3]).real();
    const double det = (m[0] * m[3] - m[1] * m[2]).real();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return {tr / 2.0 - disc, tr / 2.0 + disc};
}

double expect(const Mat2& e, double c, double s) {
    // <chi|E|chi> for chi = c|0> + s|1> (real)
    return (e[0].real() * c * c + (e[1] + e[2]).real() * c * s + e[3].real() * s * s);
}

void check_povm_valid(const Povm& povm, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Mat2 sum = {Amplitude{0}, Amplitude{0}, Amplitude{0}, Amplitude{0}};
    for (const auto& el : povm.elements) {
        auto [lo, hi] = eigs(el.op);
        CHECK(lo >= -1e-12);
        for (int i = 0; i < 4; ++i) sum[i] += el.op[i];
        if (el.verdict == Verdict::ConclusivePresent)
            CHECK(std::abs(expect(el.op, 1.0, 0.0)) < 1e-12);  // never fires on |0>
        if (el.verdict == Verdict::ConclusiveAbsent)
            CHECK(std::abs(expect(el.op, c, s)) < 1e-12);  // never fires on |chi>
    }
    CHECK(std::abs(sum[0] - Amplitude{1.0}) < 1e-12);
    CHECK(std::abs(sum[3] - Amplitude{1.0}) < 1e-12);
    CHECK(std::abs(sum[1]) < 1e-12);
    CHECK(std::abs(sum[2]) < 1e-12);
}

JointState marker_state(double c, double s) {
    JointState st(1, 0);
    st.at(Mode::C, 0) = c;
    st.at(Mode::C, 1) = s;
    return st;
}

}  // namespace

TEST_CASE("POVM validity across theta and both modes") {
    for (double theta : {0.01, 0.1, 0.5, M_PI / 2}) {
        check_povm_valid(build_discrimination_povm(theta, PovmMode::BasisCheck), theta);
        check_povm_valid(build_discrimination_povm(theta, PovmMode::OptimalIdp), theta);
    }
    CHECK_THROWS_AS(build_discrimination_povm(0.0, PovmMode::BasisCheck),
                    std::invalid_argument);
}

TEST_CASE("optimal IDP: inconclusive probability equals the overlap") {
    for (double theta : {0.2, 0.7, 1.2}) {
        const double c = std::cos(theta), s = std::sin(theta);
        const auto povm = build_discrimination_povm(theta, PovmMode::OptimalIdp);
        double p_inc_ground = 0.0, p_inc_visited = 0.0;
        for (const auto& el : povm.elements) {
            if (el.verdict != Verdict::Inconclusive) continue;
            p_inc_ground = expect(el.op, 1.0, 0.0);
            p_inc_visited = expect(el.op, c, s);
        }
        CHECK((p_inc_ground + p_inc_visited) / 2.0 == doctest::Approx(c).epsilon(1e-12));
    }
    // brute force over the one-parameter zero-cross-error family: the average
    // inconclusive probability is minimized at the constructed POVM
    const double theta = 0.6;
    const double c = std::cos(theta), s = std::sin(theta);
    const auto best = build_discrimination_povm(theta, PovmMode::OptimalIdp);
    double built = 0.0;
    for (const auto& el : best.elements)
        if (el.verdict == Verdict::Inconclusive)
            built = (expect(el.op, 1.0, 0.0) + expect(el.op, c, s)) / 2.0;
    double brute_min = 1.0;
    for (double a = 0.0; a <= 1.0 / (s * s) + 1e-9; a += 1e-4) {
        for (double b = 0.0; b <= 1.0 / (s * s) + 1e-9; b += 1e-2) {
            // E_p = a|1><1|, E_a = b|chi_perp><chi_perp|; require E_inc PSD
            const double e00 = 1.0 - b * s * s;
            const double e11 = 1.0 - a - b * c * c;
            const double e01 = b * s * c;
            if (e00 < 0 || e11 < 0 || e00 * e11 - e01 * e01 < 0) continue;
            const double p_inc = (e00 + (c * c * e00 + 2 * c * s * e01 + s * s * e11)) / 2.0;
            brute_min = std::min(brute_min, p_inc);
        }
    }
    CHECK(built == doctest::Approx(brute_min).epsilon(1e-3));
    // theta = pi/2: inconclusive element vanishes
    const auto orth = build_discrimination_povm(M_PI / 2, PovmMode::OptimalIdp);
    for (const auto& el : orth.elements)
        if (el.verdict == Verdict::Inconclusive)
            CHECK(eigs(el.op).second < 1e-12);
}

TEST_CASE("basis check on definite marker states") {
    const auto povm = build_discrimination_povm(0.3, PovmMode::BasisCheck);
    CounterRng rng(1, 0);
    auto excited = marker_state(0.0, 1.0);
    auto res = sample_measurement(excited, {0, Mode::C}, povm, rng);
    CHECK(res.verdict == Verdict::ConclusivePresent);

    auto ground = marker_state(1.0, 0.0);
    auto res2 = sample_measurement(ground, {0, Mode::C}, povm, rng);
    CHECK(res2.verdict == Verdict::Inconclusive);
    CHECK(std::abs(res2.collapsed.at(Mode::C, 0) - Amplitude{1.0}) < 1e-12);
    CHECK(std::abs(res2.collapsed.at(Mode::C, 1)) < 1e-12);
}

TEST_CASE("basis check sampling follows the Born rule") {
    const double theta = 0.4;
    const double s2 = std::sin(theta) * std::sin(theta);
    const auto povm = build_discrimination_povm(theta, PovmMode::BasisCheck);
    const auto st = marker_state(std::cos(theta), std::sin(theta));
    const int n = 1000000;
    int hits = 0;
    for (int trial = 0; trial < n; ++trial) {
        CounterRng rng(99, trial);
        if (sample_measurement(st, {0, Mode::C}, povm, rng).verdict ==
            Verdict::ConclusivePresent)
            ++hits;
    }
    const double sigma = std::sqrt(n * s2 * (1 - s2));
    CHECK(std::abs(hits - n * s2) < 5 * sigma);
}

TEST_CASE("erasure: all-inconclusive basis checks restore the unmarked state") {
    const double theta = 0.35;
    NestedMziConfig cfg;
    cfg.markers = {{Mode::A, theta}, {Mode::B, theta}, {Mode::C, theta}};
    JointState st = evolve(cfg).final;
    const auto povm = build_discrimination_povm(theta, PovmMode::BasisCheck);
    for (int m = 0; m < 3; ++m) {
        // force the inconclusive (ground-projecting) outcome
        st = collapse_marker(st, {m, cfg.markers[m].location}, povm.elements[1].op);
    }
    const JointState bare = evolve(NestedMziConfig{}).final;
    Amplitude fid = 0.0;
    for (int slot = 0; slot < JointState(0, 0).slot_count(); ++slot)
        fid += std::conj(bare.at(slot, 0)) * st.at(slot, 0);
    CHECK(std::abs(fid) > 1.0 - 1e-12);
}

TEST_CASE("expected fractions closed form") {
    const auto f = expected_fractions(std::asin(0.1));
    CHECK(f.at("A") == doctest::Approx(0.01 / 1.02).epsilon(1e-12));
    CHECK(f.at("none") == doctest::Approx(0.99 / 1.02).epsilon(1e-12));
    const auto zero = expected_fractions(0.0);
    CHECK(zero.at("A") == 0.0);
    CHECK(zero.at("none") == 1.0);
    const auto full = expected_fractions(M_PI / 2);
    CHECK(full.at("A") == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(full.at("none") == doctest::Approx(0.0));
}

TEST_CASE("monte carlo accounting matches the closed form within 5 sigma") {
    const double theta = std::asin(0.1);
    NestedMziConfig cfg;
    cfg.markers = {{Mode::A, theta}, {Mode::B, theta}, {Mode::C, theta}};
    const std::uint64_t n = 200000;
    const auto tally = monte_carlo_accounting(cfg, PovmMode::BasisCheck, n, 7);
    CHECK(tally.total_trials == n);
    CHECK(tally.double_conclusive_count() == 0);

    const double p_d = (1.0 + 2 * 0.01) / 9.0;
    const double sigma_d = std::sqrt(n * p_d * (1 - p_d));
    CHECK(std::abs(static_cast<double>(tally.detections_at_d) - n * p_d) < 5 * sigma_d);

    const auto expected = expected_fractions(theta);
    const double nd = static_cast<double>(tally.detections_at_d);
    auto count_of = [&](Verdict a, Verdict b, Verdict c) -> double {
        auto it = tally.counts.find({a, b, c});
        return it == tally.counts.end() ? 0.0 : static_cast<double>(it->second);
    };
    const Verdict P = Verdict::ConclusivePresent, I = Verdict::Inconclusive;
    struct Row {
        double count, frac;
    };
    const Row rows[] = {{count_of(P, I, I), expected.at("A")},
                        {count_of(I, P, I), expected.at("B")},
                        {count_of(I, I, P), expected.at("C")},
                        {count_of(I, I, I), expected.at("none")}};
    for (const auto& r : rows) {
        const double sigma = std::sqrt(nd * r.frac * (1 - r.frac));
        CHECK(std::abs(r.count - nd * r.frac) < 5 * std::max(sigma, 1.0));
    }
}

TEST_CASE("accounting is deterministic and worker-count invariant") {
    const double theta = std::asin(0.1);
    NestedMziConfig cfg;
    cfg.markers = {{Mode::A, theta}, {Mode::B, theta}, {Mode::C, theta}};
    const auto t1 = monte_carlo_accounting(cfg, PovmMode::BasisCheck, 50000, 42, 1);
    const auto t2 = monte_carlo_accounting(cfg, PovmMode::BasisCheck, 50000, 42, 4);
    const auto t3 = monte_carlo_accounting(cfg, PovmMode::BasisCheck, 50000, 42, 7);
    CHECK(t1.detections_at_d == t2.detections_at_d);
    CHECK(t1.counts == t2.counts);
    CHECK(t1.counts == t3.counts);
    const auto other_seed = monte_carlo_accounting(cfg, PovmMode::BasisCheck, 50000, 43, 4);
    CHECK(other_seed.detections_at_d != t1.detections_at_d);
}

TEST_CASE("conclusive fractions vanish as theta -> 0") {
    NestedMziConfig cfg;
    double prev = 1.0;
    for (double s : {0.1, 0.05, 0.01}) {
        const double theta = std::asin(s);
        cfg.markers = {{Mode::A, theta}, {Mode::B, theta}, {Mode::C, theta}};
        const auto tally = monte_carlo_accounting(cfg, PovmMode::BasisCheck, 100000, 5);
        double conclusive = 0.0;
        for (const auto& [combo, cnt] : tally.counts)
            for (Verdict v : combo)
                if (v == Verdict::ConclusivePresent) conclusive += cnt;
        const double frac = conclusive / static_cast<double>(tally.detections_at_d);
        CHECK(frac < prev);
        prev = frac;
    }
    CHECK(prev < 0.002);
}
