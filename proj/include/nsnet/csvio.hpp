#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nsnet/evolve.hpp"
#include "nsnet/netsim.hpp"
#include "nsnet/postproc.hpp"
#include "nsnet/spectral.hpp"

namespace nsnet {

// Raster files carry a `# key=value ...` metadata line followed by a
// `t,neuron_0,...,neuron_{N-1},sum` header. The reader validates the sum
// column and reports the offending line on mismatch.
void write_raster_csv(const std::filesystem::path& path, const SpikeRaster& raster);
SpikeRaster read_raster_csv(const std::filesystem::path& path);

// `t,a,a_out`
void write_trace_csv(const std::filesystem::path& path, const AccumulatorTrace& trace);

// `freq_hz,power_db`, power floored at -200 dB.
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spectrum);

// `generation,subpop,best,median`
void write_fitness_trace_csv(const std::filesystem::path& path,
                             std::span<const GenStat> trace);

// `t,y`
void write_signal_csv(const std::filesystem::path& path, std::span<const double> y);

}  // namespace nsnet
