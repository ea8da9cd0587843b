#pragma once

#include <cstddef>
#include <vector>

#include "nsnet/netsim.hpp"

namespace nsnet {

// First-order reference modulator used for structural and output comparison
// against the network: one integrator, a two-level quantizer, unit feedback.
struct DsmConfig {
    double sample_rate = 1e6;
    double integrator_initial = 0.0;
    double feedback_gain = 1.0;

    void validate() const;
};

struct DsmOutput {
    std::vector<double> y;  // alphabet exactly {-1.0, +1.0}
    long overload_count = 0;  // input samples outside [-1, 1]
};

// Per step: v += x(t) - feedback_gain * y(t-1); y(t) = +1 if v >= 0 else -1.
// The quantizer tie resolves to +1 and the initial feedback sample is +1.
DsmOutput dsm_simulate(const DsmConfig& cfg, const InputSignal& input, std::size_t n_steps);

}  // namespace nsnet
