#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "nsnet/errors.hpp"
#include "nsnet/fitness.hpp"
#include "nsnet/netsim.hpp"

using namespace nsnet;

namespace {

// Small but non-degenerate pipeline environment for objective tests.
SimEnv small_env(int n_neurons = 4) {
    SimEnv env;
    env.network.n_neurons = n_neurons;
    env.network.dt = 1e-6;
    env.network.fire_pulse_steps = 10;
    env.input_template.kind = InputKind::sine;
    env.input_template.dc_offset = 0.0024;
    env.n_steps = 1 << 15;
    env.fft_size = 1 << 14;
    env.n_segments = 3;
    env.exclusion_bins = 3;
    return env;
}

Genome random_genome(int n_neurons, std::uint64_t seed) {
    return Genome{init_random_weights(n_neurons, -0.2, 0.0, seed)};
}

}  // namespace

TEST_CASE("k_sigma activates only above the threshold") {
    CHECK(k_sigma(1000.0, 100.0, 0.2) == 0.0);  // ratio 0.1
    CHECK(k_sigma(1000.0, 200.0, 0.2) == 0.0);  // boundary
    CHECK(k_sigma(1000.0, 500.0, 0.2) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(k_sigma(2000.0, 1200.0, 0.2) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK_THROWS_AS(k_sigma(0.0, 1.0, 0.2), ConfigError);
}

TEST_CASE("separation measure: single matched neuron and bin") {
    const double rates[] = {440.0};
    const double bins[] = {440.0};
    CHECK(separation_measure(rates, bins, 200.0, 0.1) == doctest::Approx(1.1).epsilon(1e-12));
}

TEST_CASE("separation measure: distant bells vanish into the offset") {
    const std::vector<double> rates = {10000.0, 11000.0, 12000.0};
    const std::vector<double> bins = {100.0, 200.0, 300.0, 400.0, 500.0};
    const double expected = 5.0 * 0.1 * 0.1 * 0.1;  // M * C_off^N
    CHECK(separation_measure(rates, bins, 50.0, 0.1) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("separation measure: two-by-two hand computation") {
    const std::vector<double> rates = {100.0, 300.0};
    const std::vector<double> bins = {150.0, 250.0};
    const double off = 0.1;
    // bin 150: (e^-(50/100)^2 + .1)(e^-(150/100)^2 + .1); bin 250 mirrors it.
    const double b150 = (std::exp(-0.25) + off) * (std::exp(-2.25) + off);
    const double b250 = (std::exp(-2.25) + off) * (std::exp(-0.25) + off);
    CHECK(separation_measure(rates, bins, 100.0, off) ==
          doctest::Approx(b150 + b250).epsilon(1e-12));
}

TEST_CASE("separation measure is symmetric in neurons and bins") {
    const std::vector<double> rates = {120.0, 700.0, 380.0};
    const std::vector<double> perm_rates = {700.0, 380.0, 120.0};
    const std::vector<double> bins = {100.0, 400.0, 800.0};
    const std::vector<double> perm_bins = {800.0, 100.0, 400.0};
    const double a = separation_measure(rates, bins, 150.0, 0.1);
    CHECK(a == doctest::Approx(separation_measure(perm_rates, bins, 150.0, 0.1)).epsilon(1e-12));
    CHECK(a == doctest::Approx(separation_measure(rates, perm_bins, 150.0, 0.1)).epsilon(1e-12));
}

TEST_CASE("separating a clustered rate lowers the measure") {
    const auto bins = baseband_bin_centers(10.0, 1000.0, 32);
    const std::vector<double> clustered = {400.0, 410.0, 420.0};
    const std::vector<double> spread = {400.0, 410.0, 5000.0};  // moved >> 3*f_norm away
    CHECK(separation_measure(spread, bins, 200.0, 0.1) <
          separation_measure(clustered, bins, 200.0, 0.1));
}

TEST_CASE("baseband bin centers") {
    const auto c = baseband_bin_centers(10.0, 1000.0, 32);
    REQUIRE(c.size() == 32);
    const double w = 990.0 / 32.0;
    CHECK(c.front() == doctest::Approx(10.0 + w / 2.0));
    CHECK(c.back() == doctest::Approx(1000.0 - w / 2.0));
}

TEST_CASE("objective arithmetic: the hand-computable points") {
    ObjectiveParams p;
    // SNR 20 dB, on-target rate, tight spread -> 40/40 + 0 + 0.
    CHECK(objective_terms_v1(20.0, 2000.0, 100.0, p) == doctest::Approx(1.0).epsilon(1e-12));
    // SNR 60 dB, rate 4 kHz -> 0.5 + 1.0 + 0.
    CHECK(objective_terms_v1(60.0, 4000.0, 0.0, p) == doctest::Approx(1.5).epsilon(1e-12));
    // Spread ratio 0.5 adds K_sigma = 0.6.
    CHECK(objective_terms_v1(20.0, 2000.0, 1000.0, p) == doctest::Approx(1.6).epsilon(1e-12));
    // The absolute-value rate addend penalizes slow networks too.
    CHECK(objective_terms_v1(20.0, 1000.0, 100.0, p) == doctest::Approx(1.5).epsilon(1e-12));
    p.signed_rate_term = true;
    CHECK(objective_terms_v1(20.0, 1000.0, 100.0, p) == doctest::Approx(0.5).epsilon(1e-12));
    p.signed_rate_term = false;
    // Very low SNR hits the clamped denominator instead of flipping sign.
    CHECK(objective_terms_v1(-30.0, 2000.0, 0.0, p) == doctest::Approx(400.0).epsilon(1e-12));
}

TEST_CASE("objective decreases in SNR with the other addends fixed") {
    ObjectiveParams p;
    double prev = 1e9;
    for (double snr : {-10.0, 0.0, 10.0, 20.0, 40.0, 80.0}) {
        const double f = objective_terms_v1(snr, 2000.0, 0.0, p);
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("rate addend is zero on target and grows linearly") {
    ObjectiveParams p;
    const double base = objective_terms_v1(20.0, 2000.0, 0.0, p);
    CHECK(objective_terms_v1(20.0, 2500.0, 0.0, p) - base == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(objective_terms_v1(20.0, 3000.0, 0.0, p) - base == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(objective_terms_v1(20.0, 1500.0, 0.0, p) - base == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("objective_v2 with zero weight equals v1 minus the spread penalty") {
    const auto env = small_env();
    ObjectiveParams p;
    p.n_repeats = 2;
    const Genome g = random_genome(4, 12);
    const auto v1 = evaluate_objective(ObjectiveVersion::v1, g, p, env, 99);
    const auto v2 = evaluate_objective(ObjectiveVersion::v2, g, p, env, 99);
    CHECK(v2.spread_term == 0.0);
    CHECK(v2.snr_term == doctest::Approx(v1.snr_term).epsilon(1e-12));
    CHECK(v2.rate_term == doctest::Approx(v1.rate_term).epsilon(1e-12));
    CHECK(v2.fitness == doctest::Approx(v1.fitness - v1.spread_term).epsilon(1e-12));
}

TEST_CASE("v2 spread addend equals C times the separation measure") {
    auto env = small_env(1);
    ObjectiveParams p;
    p.separation_weight = 2.5;
    const Genome g{{-0.05}};
    const auto d = evaluate_objective(ObjectiveVersion::v2, g, p, env, 7);
    REQUIRE_FALSE(d.silent);
    // One neuron: its rate vector is just the mean rate.
    const std::vector<double> rates = {d.mean_rate_hz};
    const auto bins = baseband_bin_centers(p.baseband_low_hz, p.baseband_high_hz, p.n_freq_bins);
    const double expected =
        2.5 * separation_measure(rates, bins, p.f_norm_hz, p.separation_offset);
    CHECK(d.spread_term == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("silent networks score the configured worst case") {
    auto env = small_env();
    env.input_template.dc_offset = 0.0;  // nothing can fire
    ObjectiveParams p;
    p.worst_case_fitness = 1000.0;
    const auto d = evaluate_objective(ObjectiveVersion::v2, random_genome(4, 5), p, env, 1);
    CHECK(d.silent);
    CHECK(d.fitness == 1000.0);
}

TEST_CASE("objective evaluation is deterministic in the seed") {
    const auto env = small_env();
    ObjectiveParams p;
    const Genome g = random_genome(4, 77);
    CHECK(objective_v2(g, p, env, 42) == objective_v2(g, p, env, 42));
    CHECK(objective_v1(g, p, env, 42) == objective_v1(g, p, env, 42));
    CHECK(objective_v2(g, p, env, 42) != objective_v2(g, p, env, 43));
}

TEST_CASE("genome length must match the network") {
    const auto env = small_env(4);
    ObjectiveParams p;
    CHECK_THROWS_AS(objective_v1(Genome{{1.0, 2.0}}, p, env, 1), ConfigError);
}

TEST_CASE("repeat averaging reduces fitness variance") {
    // Pinning the frequency draw to a point leaves the integrator
    // initialization as the only noise source, which is exactly what the
    // repeats average over.
    auto env = small_env();
    env.n_steps = 1 << 14;
    ObjectiveParams p;
    p.baseband_low_hz = 500.0;
    p.baseband_high_hz = 500.0001;
    auto variance = [&](int repeats) {
        std::vector<double> f;
        for (std::uint64_t s = 1; s <= 8; ++s)
            f.push_back(objective_v1(random_genome(4, 500), p, env, s, repeats));
        const double mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
        double var = 0.0;
        for (double v : f) var += (v - mean) * (v - mean);
        return var / static_cast<double>(f.size());
    };
    CHECK(variance(8) < variance(1));
}

TEST_CASE("separation weight calibration brings the addend near 1") {
    const auto env = small_env(6);
    ObjectiveParams p;
    const double c = calibrate_separation_weight(p, env, -0.2, 0.0, 8, 11);
    REQUIRE(c > 0.0);
    p.separation_weight = c;
    double mean_spread = 0.0;
    for (std::uint64_t s = 1; s <= 6; ++s)
        mean_spread +=
            evaluate_objective(ObjectiveVersion::v2, random_genome(6, 200 + s), p, env, s)
                .spread_term;
    mean_spread /= 6.0;
    CHECK(mean_spread > 0.3);
    CHECK(mean_spread < 3.0);
}

TEST_CASE("full-pipeline regression values") {
    // Frozen from the first verified run; guards the whole simulate ->
    // rates -> spectrum -> SNR -> objective chain against drift.
    const auto env = small_env();
    ObjectiveParams p;
    p.separation_weight = 1.25;
    const Genome g = random_genome(4, 2024);
    CHECK(objective_v2(g, p, env, 31415) ==
          doctest::Approx(1.1517770092319357).epsilon(1e-12));
    CHECK(objective_v1(g, p, env, 31415) ==
          doctest::Approx(1.1477770092319357).epsilon(1e-12));
}
