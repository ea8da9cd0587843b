#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nsnet/evolve.hpp"
#include "nsnet/netsim.hpp"
#include "nsnet/spectral.hpp"

namespace nsnet {

enum class ObjectiveVersion { v1, v2 };

struct ObjectiveParams {
    double snr_scale_db = 40.0;   // numerator of the SNR addend
    double snr_offset_db = 20.0;  // added to the measured SNR in the denominator
    double target_rate_hz = 2000.0;
    double sigma_threshold = 0.2;  // relative rate spread where the penalty kicks in
    // Weight C on the frequency-separation addend; <= 0 requests
    // auto-calibration so a random population scores about 1.
    double separation_weight = 0.0;
    double separation_offset = 0.1;  // C_off
    double f_norm_hz = 200.0;        // bell width of the separation measure
    int n_freq_bins = 32;            // baseband bins the separation measure sums over
    double baseband_low_hz = 10.0;
    double baseband_high_hz = 1000.0;
    // Probe sine amplitude; <= 0 means 25% of the input DC offset.
    double signal_amplitude = 0.0;
    int n_repeats = 1;  // integrator-initialization averaging
    double worst_case_fitness = 1000.0;  // assigned to silent networks
    // Keep the printed, signed form of the rate addend instead of |f - target|.
    // The signed form rewards arbitrarily slow networks; off by default.
    bool signed_rate_term = false;

    void validate() const;
};

// Everything the objective needs to run one network evaluation.
struct SimEnv {
    NetworkConfig network;       // feedback_weights replaced by the genome
    InputSignal input_template;  // frequency and amplitude replaced per draw
    std::size_t n_steps = std::size_t{1} << 17;
    std::size_t fft_size = std::size_t{1} << 16;
    Window window = Window::hann;
    int n_segments = 8;
    int exclusion_bins = 3;
};

// Per-evaluation terms, averaged over repeats. Useful for tests and reports.
struct ObjectiveBreakdown {
    double fitness = 0.0;
    double snr_term = 0.0;
    double rate_term = 0.0;
    double spread_term = 0.0;  // K_sigma (v1) or C * separation measure (v2)
    double snr_db = 0.0;
    double mean_rate_hz = 0.0;
    double std_rate_hz = 0.0;
    double signal_frequency_hz = 0.0;
    bool silent = false;
};

// Rate-spread penalty: 2 * (std/mean - threshold) above the threshold, else 0.
double k_sigma(double mean_rate_hz, double std_rate_hz, double sigma_threshold);

// Sum over bins of the product over neurons of a bell around each neuron's
// rate: sum_i prod_j (exp(-(f_i - r_j)^2 / f_norm^2) + c_off).
double separation_measure(std::span<const double> per_neuron_rates_hz,
                          std::span<const double> bin_frequencies_hz, double f_norm_hz,
                          double c_off);

// Centers of n uniform divisions of [low, high].
std::vector<double> baseband_bin_centers(double low_hz, double high_hz, int n);

// Pure arithmetic of the objective, separated from the simulation pipeline so
// the formulas are directly testable.
double objective_terms_v1(double snr_db, double mean_rate_hz, double std_rate_hz,
                          const ObjectiveParams& params);

// Full pipeline: simulate the genome's network at a signal frequency drawn
// uniformly from the baseband, measure rates and SNR, combine the addends,
// and average over n_repeats independent integrator initializations (the
// frequency draw is part of the evaluation, the repeats are not).
// n_repeats_override > 0 replaces params.n_repeats.
ObjectiveBreakdown evaluate_objective(ObjectiveVersion version, const Genome& genome,
                                      const ObjectiveParams& params, const SimEnv& env,
                                      std::uint64_t seed, int n_repeats_override = 0);

double objective_v1(const Genome& genome, const ObjectiveParams& params, const SimEnv& env,
                    std::uint64_t seed, int n_repeats_override = 0);
double objective_v2(const Genome& genome, const ObjectiveParams& params, const SimEnv& env,
                    std::uint64_t seed, int n_repeats_override = 0);

// Mean separation addend of random-weight genomes drawn from [init_low,
// init_high], inverted so that the addend averages about 1. Silent draws are
// skipped; falls back to 1.0 if every draw was silent.
double calibrate_separation_weight(const ObjectiveParams& params, const SimEnv& env,
                                   double init_low, double init_high, int n_samples,
                                   std::uint64_t seed);

}  // namespace nsnet
