#include "nsnet/postproc.hpp"

#include <algorithm>
#include <cmath>

#include "nsnet/errors.hpp"

namespace nsnet {
namespace {

void drain_step(double& acc, const AccumulatorConfig& cfg, AccumulatorTrace& trace,
                std::size_t t) {
    trace.a_out[t] = acc >= cfg.output_threshold ? 1 : 0;
    if (acc > cfg.overflow_limit) {
        ++trace.overflow_count;
        if (trace.first_overflow_step < 0) trace.first_overflow_step = static_cast<long long>(t);
    }
    acc = std::max(acc - cfg.decrement, 0.0);
    trace.a[t] = acc;
}

}  // namespace

void AccumulatorConfig::validate() const {
    if (!(decrement > 0.0)) throw ConfigError("postproc.decrement must be > 0");
    if (!(output_threshold > 0.0)) throw ConfigError("postproc.output_threshold must be > 0");
    if (!(epsilon_norm > 0.0)) throw ConfigError("postproc.epsilon_norm must be > 0");
}

AccumulatorTrace accumulate_fixed(const SpikeRaster& raster, const AccumulatorConfig& cfg) {
    cfg.validate();
    AccumulatorTrace trace;
    trace.dt = raster.dt;
    trace.a.resize(raster.n_steps);
    trace.a_out.resize(raster.n_steps);
    double acc = 0.0;
    for (std::size_t t = 0; t < raster.n_steps; ++t) {
        acc += static_cast<double>(raster.summed[t]);
        drain_step(acc, cfg, trace, t);
    }
    return trace;
}

AccumulatorTrace accumulate_variable(const SpikeRaster& raster, const AccumulatorConfig& cfg) {
    cfg.validate();
    const std::size_t n_steps = raster.n_steps;

    // Leading-edge steps and the pulse count seen there.
    const SpikeRaster edges = leading_edge_raster(raster);

    // Scheduled unit increments, kept as an injection-rate delta array.
    std::vector<double> delta(n_steps + 1, 0.0);
    AccumulatorTrace trace;
    trace.dt = raster.dt;
    trace.a.resize(n_steps);
    trace.a_out.resize(n_steps);
    for (std::size_t t = 0; t < n_steps; ++t) {
        if (edges.summed[t] == 0) continue;
        const std::int32_t nfp =
            cfg.nfp_counts_active ? raster.summed[t] : edges.summed[t];
        long len = std::lround(cfg.epsilon_norm * static_cast<double>(nfp));
        if (len < 1) len = 1;
        const std::size_t end = std::min(n_steps, t + static_cast<std::size_t>(len));
        delta[t] += 1.0;
        delta[end] -= 1.0;
        trace.scheduled_steps += static_cast<long long>(end - t);
    }

    double inject = 0.0;
    double acc = 0.0;
    for (std::size_t t = 0; t < n_steps; ++t) {
        inject += delta[t];
        acc += inject;
        drain_step(acc, cfg, trace, t);
    }
    return trace;
}

std::vector<double> to_bipolar(const AccumulatorTrace& trace) {
    std::vector<double> out(trace.a_out.size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = trace.a_out[t] ? 1.0 : -1.0;
    return out;
}

}  // namespace nsnet
