#include "nsnet/netsim.hpp"

#include <cmath>
#include <string>

#include "nsnet/errors.hpp"
#include "nsnet/rng.hpp"

namespace nsnet {

void NetworkConfig::validate() const {
    if (n_neurons < 1) throw ConfigError("network.n_neurons must be >= 1");
    if (!(threshold > 0.0)) throw ConfigError("network.threshold must be > 0");
    if (!(dt > 0.0)) throw ConfigError("network.dt must be > 0");
    if (fire_pulse_steps < 1) throw ConfigError("network.fire_pulse_steps must be >= 1");
    const auto n = static_cast<std::size_t>(n_neurons);
    if (!input_weights.empty() && input_weights.size() != n)
        throw ConfigError("network.input_weights must have n_neurons entries");
    if (!feedback_weights.empty() && feedback_weights.size() != n * n)
        throw ConfigError("network.feedback_weights must have n_neurons^2 entries");
    for (double w : feedback_weights)
        if (!std::isfinite(w)) throw ConfigError("network.feedback_weights entries must be finite");
    for (double w : input_weights)
        if (!std::isfinite(w)) throw ConfigError("network.input_weights entries must be finite");
}

double InputSignal::sample(std::size_t step, double dt) const {
    switch (kind) {
        case InputKind::zero:
            return 0.0;
        case InputKind::samples:
            return samples[step];
        case InputKind::sine:
        default:
            return dc_offset +
                   amplitude * std::sin(2.0 * 3.14159265358979323846 * frequency_hz *
                                            (static_cast<double>(step) * dt) +
                                        phase);
    }
}

SpikeRaster simulate(const NetworkConfig& config, const InputSignal& input,
                     std::size_t n_steps, std::uint64_t seed) {
    config.validate();
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (input.kind == InputKind::samples && input.samples.size() < n_steps)
        throw ConfigError("input sample sequence shorter than n_steps");

    const int n = config.n_neurons;
    const bool to_zero = config.reset_mode == ResetMode::to_zero;
    const bool clamp = config.clamp_negative && to_zero;
    const double* w = config.feedback_weights.empty() ? nullptr : config.feedback_weights.data();

    Rng rng(seed);
    std::vector<NeuronState> st(static_cast<std::size_t>(n));
    for (auto& s : st) s.integrator = rng.uniform01() * config.threshold;

    SpikeRaster raster;
    raster.n_neurons = n;
    raster.n_steps = n_steps;
    raster.dt = config.dt;
    raster.pulses.assign(static_cast<std::size_t>(n) * n_steps, 0);
    raster.summed.assign(n_steps, 0);

    // Pulse outputs of the previous step; index list keeps the feedback sum
    // proportional to the number of active neurons.
    std::vector<int> active_prev;
    std::vector<int> active_now;
    active_prev.reserve(static_cast<std::size_t>(n));
    active_now.reserve(static_cast<std::size_t>(n));

    for (std::size_t t = 0; t < n_steps; ++t) {
        const double x = input.sample(t, config.dt);
        active_now.clear();
        std::int32_t sum = 0;
        for (int i = 0; i < n; ++i) {
            double drive = config.input_weight(i) * x;
            if (w != nullptr) {
                const double* row = w + static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
                for (int j : active_prev) drive += row[j];
            }
            NeuronState& s = st[static_cast<std::size_t>(i)];
            s.integrator += drive;
            if (!std::isfinite(s.integrator))
                throw SimulationDiverged(t, "simulation diverged: non-finite integrator for neuron " +
                                                std::to_string(i) + " at step " + std::to_string(t));
            if (clamp && s.integrator < 0.0) s.integrator = 0.0;
            if (s.integrator >= config.threshold) {
                s.pulse_remaining = config.fire_pulse_steps;
                s.integrator = to_zero ? 0.0 : s.integrator - config.threshold;
            }
            if (s.pulse_remaining > 0) {
                --s.pulse_remaining;
                raster.pulses[static_cast<std::size_t>(i) * n_steps + t] = 1;
                active_now.push_back(i);
                ++sum;
            }
        }
        raster.summed[t] = sum;
        std::swap(active_prev, active_now);
    }
    return raster;
}

RateStats rate_stats(const SpikeRaster& raster) {
    RateStats stats;
    const double total_time = static_cast<double>(raster.n_steps) * raster.dt;
    stats.per_neuron_hz.resize(static_cast<std::size_t>(raster.n_neurons));
    for (int i = 0; i < raster.n_neurons; ++i) {
        const std::uint8_t* p = raster.pulses.data() + static_cast<std::size_t>(i) * raster.n_steps;
        std::size_t edges = 0;
        std::uint8_t prev = 0;
        for (std::size_t t = 0; t < raster.n_steps; ++t) {
            if (p[t] && !prev) ++edges;
            prev = p[t];
        }
        stats.per_neuron_hz[static_cast<std::size_t>(i)] = static_cast<double>(edges) / total_time;
    }
    double mean = 0.0;
    for (double r : stats.per_neuron_hz) mean += r;
    mean /= static_cast<double>(raster.n_neurons);
    double var = 0.0;
    for (double r : stats.per_neuron_hz) var += (r - mean) * (r - mean);
    var /= static_cast<double>(raster.n_neurons);
    stats.mean_hz = mean;
    stats.std_hz = std::sqrt(var);
    return stats;
}

std::vector<double> init_random_weights(int n_neurons, double low, double high,
                                        std::uint64_t seed) {
    if (low > high) throw ConfigError("init_random_weights: low > high");
    Rng rng(seed);
    std::vector<double> w(static_cast<std::size_t>(n_neurons) * static_cast<std::size_t>(n_neurons));
    for (auto& e : w) e = rng.uniform(low, high);
    return w;
}

SpikeRaster leading_edge_raster(const SpikeRaster& raster) {
    SpikeRaster out;
    out.n_neurons = raster.n_neurons;
    out.n_steps = raster.n_steps;
    out.dt = raster.dt;
    out.pulses.assign(raster.pulses.size(), 0);
    out.summed.assign(raster.n_steps, 0);
    for (int i = 0; i < raster.n_neurons; ++i) {
        const std::uint8_t* src = raster.pulses.data() + static_cast<std::size_t>(i) * raster.n_steps;
        std::uint8_t* dst = out.pulses.data() + static_cast<std::size_t>(i) * raster.n_steps;
        std::uint8_t prev = 0;
        for (std::size_t t = 0; t < raster.n_steps; ++t) {
            if (src[t] && !prev) {
                dst[t] = 1;
                ++out.summed[t];
            }
            prev = src[t];
        }
    }
    return out;
}

}  // namespace nsnet
