#include "nsnet/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsnet/errors.hpp"
#include "nsnet/rng.hpp"

namespace nsnet {
namespace {

enum SeedTag : std::uint64_t {
    kTagFrequency = 101,
    kTagRepeat = 102,
    kTagCalibration = 103,
};

// Keeps the SNR addend finite for networks measuring below -snr_offset_db.
constexpr double kMinSnrDenominatorDb = 0.1;

}  // namespace

void ObjectiveParams::validate() const {
    if (!(f_norm_hz > 0.0)) throw ConfigError("objective.f_norm_hz must be > 0");
    if (separation_offset < 0.0) throw ConfigError("objective.separation_offset must be >= 0");
    if (n_freq_bins < 1) throw ConfigError("objective.n_freq_bins must be >= 1");
    if (n_repeats < 1) throw ConfigError("objective.n_repeats must be >= 1");
    if (!(target_rate_hz > 0.0)) throw ConfigError("objective.target_rate_hz must be > 0");
    if (baseband_low_hz <= 0.0 || baseband_low_hz >= baseband_high_hz)
        throw ConfigError("objective.baseband must satisfy 0 < low < high");
    if (sigma_threshold < 0.0) throw ConfigError("objective.sigma_threshold must be >= 0");
}

double k_sigma(double mean_rate_hz, double std_rate_hz, double sigma_threshold) {
    if (!(mean_rate_hz > 0.0))
        throw ConfigError("k_sigma: mean rate must be > 0 (degenerate network)");
    const double ratio = std_rate_hz / mean_rate_hz;
    return ratio >= sigma_threshold ? 2.0 * (ratio - sigma_threshold) : 0.0;
}

double separation_measure(std::span<const double> per_neuron_rates_hz,
                          std::span<const double> bin_frequencies_hz, double f_norm_hz,
                          double c_off) {
    if (per_neuron_rates_hz.empty() || bin_frequencies_hz.empty())
        throw ConfigError("separation_measure: empty input");
    const double inv_fn2 = 1.0 / (f_norm_hz * f_norm_hz);
    double sum = 0.0;
    for (double f : bin_frequencies_hz) {
        double prod = 1.0;
        for (double r : per_neuron_rates_hz) {
            const double d = f - r;
            prod *= std::exp(-d * d * inv_fn2) + c_off;
        }
        sum += prod;
    }
    return sum;
}

std::vector<double> baseband_bin_centers(double low_hz, double high_hz, int n) {
    std::vector<double> centers(static_cast<std::size_t>(n));
    const double width = (high_hz - low_hz) / static_cast<double>(n);
    for (int i = 0; i < n; ++i)
        centers[static_cast<std::size_t>(i)] = low_hz + (static_cast<double>(i) + 0.5) * width;
    return centers;
}

double objective_terms_v1(double snr_db, double mean_rate_hz, double std_rate_hz,
                          const ObjectiveParams& params) {
    const double denom = std::max(snr_db + params.snr_offset_db, kMinSnrDenominatorDb);
    const double snr_term = params.snr_scale_db / denom;
    const double diff = (mean_rate_hz - params.target_rate_hz) / params.target_rate_hz;
    const double rate_term = params.signed_rate_term ? diff : std::abs(diff);
    return snr_term + rate_term + k_sigma(mean_rate_hz, std_rate_hz, params.sigma_threshold);
}

ObjectiveBreakdown evaluate_objective(ObjectiveVersion version, const Genome& genome,
                                      const ObjectiveParams& params, const SimEnv& env,
                                      std::uint64_t seed, int n_repeats_override) {
    params.validate();
    const std::size_t n = static_cast<std::size_t>(env.network.n_neurons);
    if (genome.genes.size() != n * n)
        throw ConfigError("genome length " + std::to_string(genome.genes.size()) +
                          " does not match n_neurons^2 = " + std::to_string(n * n));
    const int repeats = n_repeats_override > 0 ? n_repeats_override : params.n_repeats;

    NetworkConfig net = env.network;
    net.feedback_weights = genome.genes;

    InputSignal input = env.input_template;
    input.kind = InputKind::sine;
    Rng freq_rng(mix_seed(seed, kTagFrequency));
    input.frequency_hz = freq_rng.uniform(params.baseband_low_hz, params.baseband_high_hz);
    input.amplitude = params.signal_amplitude > 0.0 ? params.signal_amplitude
                                                    : 0.25 * input.dc_offset;

    const std::vector<double> sep_bins =
        baseband_bin_centers(params.baseband_low_hz, params.baseband_high_hz, params.n_freq_bins);

    ObjectiveBreakdown acc;
    acc.signal_frequency_hz = input.frequency_hz;
    for (int r = 0; r < repeats; ++r) {
        const std::uint64_t sim_seed = derive_seed({seed, kTagRepeat, static_cast<std::uint64_t>(r)});
        const SpikeRaster raster = simulate(net, input, env.n_steps, sim_seed);
        const RateStats rates = rate_stats(raster);
        if (!(rates.mean_hz > 0.0)) {
            // Silent network: no pulses means nothing to measure.
            acc = ObjectiveBreakdown{};
            acc.fitness = params.worst_case_fitness;
            acc.signal_frequency_hz = input.frequency_hz;
            acc.silent = true;
            return acc;
        }
        const std::vector<double> summed = to_double(raster.summed);
        const Spectrum spec = power_spectrum(summed, 1.0 / net.dt, env.fft_size, env.window,
                                             env.n_segments);
        const SnrReport snr = snr_db(spec, input.frequency_hz, params.baseband_low_hz,
                                     params.baseband_high_hz, env.exclusion_bins);

        const double denom = std::max(snr.snr_db + params.snr_offset_db, kMinSnrDenominatorDb);
        const double snr_term = params.snr_scale_db / denom;
        const double diff = (rates.mean_hz - params.target_rate_hz) / params.target_rate_hz;
        const double rate_term = params.signed_rate_term ? diff : std::abs(diff);
        const double spread_term =
            version == ObjectiveVersion::v1
                ? k_sigma(rates.mean_hz, rates.std_hz, params.sigma_threshold)
                : params.separation_weight *
                      separation_measure(rates.per_neuron_hz, sep_bins, params.f_norm_hz,
                                         params.separation_offset);

        acc.snr_term += snr_term;
        acc.rate_term += rate_term;
        acc.spread_term += spread_term;
        acc.fitness += snr_term + rate_term + spread_term;
        acc.snr_db += snr.snr_db;
        acc.mean_rate_hz += rates.mean_hz;
        acc.std_rate_hz += rates.std_hz;
    }
    const double inv = 1.0 / static_cast<double>(repeats);
    acc.snr_term *= inv;
    acc.rate_term *= inv;
    acc.spread_term *= inv;
    acc.fitness *= inv;
    acc.snr_db *= inv;
    acc.mean_rate_hz *= inv;
    acc.std_rate_hz *= inv;
    return acc;
}

double objective_v1(const Genome& genome, const ObjectiveParams& params, const SimEnv& env,
                    std::uint64_t seed, int n_repeats_override) {
    return evaluate_objective(ObjectiveVersion::v1, genome, params, env, seed, n_repeats_override)
        .fitness;
}

double objective_v2(const Genome& genome, const ObjectiveParams& params, const SimEnv& env,
                    std::uint64_t seed, int n_repeats_override) {
    return evaluate_objective(ObjectiveVersion::v2, genome, params, env, seed, n_repeats_override)
        .fitness;
}

double calibrate_separation_weight(const ObjectiveParams& params, const SimEnv& env,
                                   double init_low, double init_high, int n_samples,
                                   std::uint64_t seed) {
    params.validate();
    if (n_samples < 1) throw ConfigError("calibration needs n_samples >= 1");
    const std::size_t n = static_cast<std::size_t>(env.network.n_neurons);
    const std::vector<double> sep_bins =
        baseband_bin_centers(params.baseband_low_hz, params.baseband_high_hz, params.n_freq_bins);

    NetworkConfig net = env.network;
    InputSignal input = env.input_template;
    input.kind = InputKind::sine;
    input.amplitude = params.signal_amplitude > 0.0 ? params.signal_amplitude
                                                    : 0.25 * input.dc_offset;

    double acc = 0.0;
    int used = 0;
    for (int k = 0; k < n_samples; ++k) {
        const std::uint64_t draw_seed =
            derive_seed({seed, kTagCalibration, static_cast<std::uint64_t>(k)});
        net.feedback_weights =
            init_random_weights(static_cast<int>(n), init_low, init_high, draw_seed);
        Rng freq_rng(mix_seed(draw_seed, kTagFrequency));
        input.frequency_hz = freq_rng.uniform(params.baseband_low_hz, params.baseband_high_hz);
        const SpikeRaster raster =
            simulate(net, input, env.n_steps, mix_seed(draw_seed, kTagRepeat));
        const RateStats rates = rate_stats(raster);
        if (!(rates.mean_hz > 0.0)) continue;
        acc += separation_measure(rates.per_neuron_hz, sep_bins, params.f_norm_hz,
                                  params.separation_offset);
        ++used;
    }
    if (used == 0 || acc <= 0.0) return 1.0;
    return static_cast<double>(used) / acc;
}

}  // namespace nsnet
