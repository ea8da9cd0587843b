#include "nsnet/csvio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nsnet/errors.hpp"

namespace nsnet {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    return f;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

[[noreturn]] void bad_line(const std::filesystem::path& path, std::size_t line,
                           const std::string& why) {
    throw ConfigError(path.string() + " line " + std::to_string(line) + ": " + why);
}

}  // namespace

void write_raster_csv(const std::filesystem::path& path, const SpikeRaster& raster) {
    std::ofstream f = open_out(path);
    f << "# dt=" << fmt("%.17g", raster.dt) << " n_neurons=" << raster.n_neurons
      << " n_steps=" << raster.n_steps << "\n";
    f << "t";
    for (int i = 0; i < raster.n_neurons; ++i) f << ",neuron_" << i;
    f << ",sum\n";
    for (std::size_t t = 0; t < raster.n_steps; ++t) {
        f << t;
        for (int i = 0; i < raster.n_neurons; ++i) f << ',' << static_cast<int>(raster.pulse(i, t));
        f << ',' << raster.summed[t] << '\n';
    }
    if (!f) throw IoError("write failed: " + path.string());
}

SpikeRaster read_raster_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(f, line)) bad_line(path, 1, "empty file");
    ++lineno;
    if (line.rfind("#", 0) != 0) bad_line(path, lineno, "expected '# dt=... n_neurons=... n_steps=...'");
    SpikeRaster raster;
    {
        std::istringstream meta(line.substr(1));
        std::string kv;
        bool have_dt = false, have_n = false, have_steps = false;
        while (meta >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) bad_line(path, lineno, "malformed metadata token '" + kv + "'");
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            try {
                if (key == "dt") {
                    raster.dt = std::stod(val);
                    have_dt = true;
                } else if (key == "n_neurons") {
                    raster.n_neurons = std::stoi(val);
                    have_n = true;
                } else if (key == "n_steps") {
                    raster.n_steps = static_cast<std::size_t>(std::stoull(val));
                    have_steps = true;
                }
            } catch (const std::exception&) {
                bad_line(path, lineno, "bad value for '" + key + "'");
            }
        }
        if (!have_dt || !have_n || !have_steps)
            bad_line(path, lineno, "metadata must include dt, n_neurons, n_steps");
        if (raster.n_neurons < 1 || raster.n_steps < 1 || !(raster.dt > 0.0))
            bad_line(path, lineno, "metadata values out of range");
    }

    if (!std::getline(f, line)) bad_line(path, 2, "missing header row");
    ++lineno;

    raster.pulses.assign(static_cast<std::size_t>(raster.n_neurons) * raster.n_steps, 0);
    raster.summed.assign(raster.n_steps, 0);
    std::size_t t = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (t >= raster.n_steps) bad_line(path, lineno, "more rows than n_steps");
        std::istringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',')) bad_line(path, lineno, "missing t column");
        std::int32_t sum = 0;
        for (int i = 0; i < raster.n_neurons; ++i) {
            if (!std::getline(row, cell, ',')) bad_line(path, lineno, "missing neuron column");
            if (cell == "1") {
                raster.pulses[static_cast<std::size_t>(i) * raster.n_steps + t] = 1;
                ++sum;
            } else if (cell != "0") {
                bad_line(path, lineno, "pulse cells must be 0 or 1, got '" + cell + "'");
            }
        }
        if (!std::getline(row, cell, ',')) bad_line(path, lineno, "missing sum column");
        long declared = 0;
        try {
            declared = std::stol(cell);
        } catch (const std::exception&) {
            bad_line(path, lineno, "bad sum value '" + cell + "'");
        }
        if (declared != sum)
            bad_line(path, lineno, "sum column " + std::to_string(declared) +
                                       " does not match pulse columns (" + std::to_string(sum) + ")");
        raster.summed[t] = sum;
        ++t;
    }
    if (t != raster.n_steps)
        throw ConfigError(path.string() + ": expected " + std::to_string(raster.n_steps) +
                          " rows, found " + std::to_string(t));
    return raster;
}

void write_trace_csv(const std::filesystem::path& path, const AccumulatorTrace& trace) {
    std::ofstream f = open_out(path);
    f << "t,a,a_out\n";
    for (std::size_t t = 0; t < trace.a.size(); ++t)
        f << t << ',' << fmt("%.17g", trace.a[t]) << ',' << static_cast<int>(trace.a_out[t]) << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spectrum) {
    std::ofstream f = open_out(path);
    f << "freq_hz,power_db\n";
    for (std::size_t b = 0; b < spectrum.freq_hz.size(); ++b) {
        const double p = spectrum.power[b];
        const double db = p > 0.0 ? std::max(10.0 * std::log10(p), -200.0) : -200.0;
        f << fmt("%.10g", spectrum.freq_hz[b]) << ',' << fmt("%.10g", db) << '\n';
    }
    if (!f) throw IoError("write failed: " + path.string());
}

void write_fitness_trace_csv(const std::filesystem::path& path,
                             std::span<const GenStat> trace) {
    std::ofstream f = open_out(path);
    f << "generation,subpop,best,median\n";
    for (const auto& row : trace)
        f << row.generation << ',' << row.subpop << ',' << fmt("%.17g", row.best) << ','
          << fmt("%.17g", row.median) << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

void write_signal_csv(const std::filesystem::path& path, std::span<const double> y) {
    std::ofstream f = open_out(path);
    f << "t,y\n";
    for (std::size_t t = 0; t < y.size(); ++t) f << t << ',' << fmt("%.17g", y[t]) << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace nsnet
