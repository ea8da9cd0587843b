#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace nsnet {

enum class ResetMode { to_zero, subtract_threshold };

// Coupled non-leaky integrate-and-fire population. Row i of feedback_weights
// holds the weights on the pulse outputs feeding neuron i's integrator.
struct NetworkConfig {
    int n_neurons = 10;
    double threshold = 1.0;
    double dt = 1e-6;          // seconds per simulation step
    int fire_pulse_steps = 10; // output pulse duration T = fire_pulse_steps * dt
    std::vector<double> input_weights;    // length n_neurons; empty means all 1.0
    std::vector<double> feedback_weights; // row-major n_neurons^2; empty means all 0.0
    ResetMode reset_mode = ResetMode::to_zero;
    // In to_zero mode, inhibition may not drive the integrator below zero;
    // without the clamp a strongly inhibited neuron builds unbounded debt.
    bool clamp_negative = true;

    void validate() const;  // throws ConfigError
    double input_weight(int i) const { return input_weights.empty() ? 1.0 : input_weights[static_cast<std::size_t>(i)]; }
};

enum class InputKind { sine, zero, samples };

struct InputSignal {
    InputKind kind = InputKind::sine;
    double amplitude = 0.0;
    double frequency_hz = 0.0;
    double dc_offset = 0.0;
    double phase = 0.0;
    std::vector<double> samples;  // used when kind == samples

    double sample(std::size_t step, double dt) const;
};

struct NeuronState {
    double integrator = 0.0;
    int pulse_remaining = 0;
};

// Per-neuron binary pulse trains plus their amplitude sum. Pulses are stored
// neuron-major: pulse(i, t) = pulses[i * n_steps + t].
struct SpikeRaster {
    int n_neurons = 0;
    std::size_t n_steps = 0;
    double dt = 0.0;
    std::vector<std::uint8_t> pulses;
    std::vector<std::int32_t> summed;

    std::uint8_t pulse(int i, std::size_t t) const {
        return pulses[static_cast<std::size_t>(i) * n_steps + t];
    }
};

struct RateStats {
    std::vector<double> per_neuron_hz;  // pulse leading edges / total time
    double mean_hz = 0.0;
    double std_hz = 0.0;  // population standard deviation (divisor N)
};

// Runs the discrete-time network. Integrators initialize uniformly in
// [0, threshold) from `seed`; feedback acts with a one-step delay, so step t
// sees the pulse outputs of step t-1. A neuron crossing threshold emits a
// pulse of fire_pulse_steps steps; crossing again mid-pulse restarts the
// pulse (extension). Deterministic given (config, input, seed).
// Throws SimulationDiverged if an integrator stops being finite.
SpikeRaster simulate(const NetworkConfig& config, const InputSignal& input,
                     std::size_t n_steps, std::uint64_t seed);

// Firing rates from pulse leading edges (0->1 transitions).
RateStats rate_stats(const SpikeRaster& raster);

// i.i.d. uniform weight matrix in [low, high], row-major, deterministic in seed.
std::vector<double> init_random_weights(int n_neurons, double low, double high,
                                        std::uint64_t seed);

// Collapses each pulse to a single-sample impulse at its leading edge.
SpikeRaster leading_edge_raster(const SpikeRaster& raster);

}  // namespace nsnet
