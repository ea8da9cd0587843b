#include "nsnet/dsmref.hpp"

#include <cmath>

#include "nsnet/errors.hpp"

namespace nsnet {

void DsmConfig::validate() const {
    if (!(sample_rate > 0.0)) throw ConfigError("dsm.sample_rate must be > 0");
}

DsmOutput dsm_simulate(const DsmConfig& cfg, const InputSignal& input, std::size_t n_steps) {
    cfg.validate();
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (input.kind == InputKind::samples && input.samples.size() < n_steps)
        throw ConfigError("input sample sequence shorter than n_steps");

    const double dt = 1.0 / cfg.sample_rate;
    DsmOutput out;
    out.y.resize(n_steps);
    double v = cfg.integrator_initial;
    double prev = 1.0;
    for (std::size_t t = 0; t < n_steps; ++t) {
        const double x = input.sample(t, dt);
        if (std::abs(x) > 1.0) ++out.overload_count;
        v += x - cfg.feedback_gain * prev;
        prev = v >= 0.0 ? 1.0 : -1.0;
        out.y[t] = prev;
    }
    return out;
}

}  // namespace nsnet
