#pragma once

#include <cstdint>
#include <vector>

#include "nsnet/netsim.hpp"

namespace nsnet {

struct AccumulatorConfig {
    double decrement = 1.0;
    double output_threshold = 1.0;
    // Variable algorithm only: increment duration = round(epsilon_norm * N_fp)
    // steps, at least 1.
    double epsilon_norm = 7.0;
    double overflow_limit = 1e4;  // diagnostic only, the run continues
    // Count all pulses active at the triggering step as N_fp. When false only
    // coincident leading edges count.
    bool nfp_counts_active = true;

    void validate() const;
};

// Two-level pulse-duration signal with the internal accumulator state.
// a(t) is the end-of-step state (after the decrement); a_out(t) thresholds
// the post-add state, so an isolated input pulse reproduces its own width.
struct AccumulatorTrace {
    std::vector<double> a;
    std::vector<std::uint8_t> a_out;
    double dt = 0.0;
    long overflow_count = 0;
    long long first_overflow_step = -1;
    // Variable algorithm: total scheduled increment steps that landed inside
    // the trace. Equals sum(a_out) once the accumulator drains.
    long long scheduled_steps = 0;
};

// Fixed algorithm: per step add the summed pulse amplitude, emit 1 while the
// post-add accumulator is at or above the threshold, then drain by the
// constant decrement (never below zero). Converts overlapping pulses into
// longer output pulses while conserving total pulse mass.
AccumulatorTrace accumulate_fixed(const SpikeRaster& raster, const AccumulatorConfig& cfg);

// Variable algorithm: each step with at least one pulse leading edge
// schedules a unit-per-step increment lasting round(epsilon_norm * N_fp)
// steps (minimum 1), where N_fp is the pulse count at that step. Schedules
// superpose. Drain and output as in the fixed algorithm. Varies output pulse
// durations with instantaneous activity, suppressing the fixed-pulse-width
// artifacts at the 1/T pseudofrequency.
AccumulatorTrace accumulate_variable(const SpikeRaster& raster, const AccumulatorConfig& cfg);

// 1 -> +1, 0 -> -1: the DSM-comparable two-level waveform.
std::vector<double> to_bipolar(const AccumulatorTrace& trace);

}  // namespace nsnet
