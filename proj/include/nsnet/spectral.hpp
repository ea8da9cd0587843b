#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nsnet/netsim.hpp"

namespace nsnet {

enum class Window { rectangular, hann };

// One-sided averaged periodogram. power is linear power per bin, normalized
// so that the sum over bins equals the mean-removed signal variance
// (Parseval-consistent for the rectangular window, single segment).
struct Spectrum {
    std::vector<double> freq_hz;  // fft_size/2 + 1 bins, 0 .. sample_rate/2
    std::vector<double> power;
    double sample_rate = 0.0;
    Window window = Window::hann;
    int n_segments = 1;  // segments actually averaged
};

struct SnrReport {
    double signal_frequency_hz = 0.0;
    double signal_power = 0.0;
    double noise_power_baseband = 0.0;
    double snr_db = 0.0;
    double baseband_low_hz = 0.0;
    double baseband_high_hz = 0.0;
    // Signal exclusion window was truncated at a baseband edge.
    bool edge_truncated = false;
    // Filled by the harness, not by snr_db itself.
    double osr = 0.0;
    RateStats rate_stats;
};

// Mean-removed, windowed, segment-averaged spectrum. Segments overlap 50%;
// n_segments is an upper bound, the signal length decides how many fit
// (at least one). fft_size must be a power of two and <= signal length.
Spectrum power_spectrum(std::span<const double> signal, double sample_rate,
                        std::size_t fft_size, Window window, int n_segments);

// Signal power = sum over the bin nearest signal_frequency_hz +/- exclusion_bins;
// noise power = remaining baseband bins. osr and rate_stats are left empty.
SnrReport snr_db(const Spectrum& spectrum, double signal_frequency_hz,
                 double baseband_low_hz, double baseband_high_hz, int exclusion_bins);

// Oversampling ratio n_neurons * mean_rate / (2 * f_baseband).
double osr(double mean_rate_hz, int n_neurons, double f_baseband_hz);

// Least-squares slope of 10*log10(power) against log10(frequency) over
// [fit_low_hz, fit_high_hz]. Bins within exclusion_bins of exclude_frequency_hz
// (if >= 0) and zero-power bins are skipped; needs >= 10 usable bins.
double noise_slope_db_per_decade(const Spectrum& spectrum, double fit_low_hz,
                                 double fit_high_hz, double exclude_frequency_hz = -1.0,
                                 int exclusion_bins = 3);

// Ratio of mean bin power in the skirts around the signal (within
// near_band_hz, excluding the signal bin group) to mean bin power in the far
// reference band. Values well above 1 indicate the oscillating lock-on mode,
// which shows as sloping borders around the signal peak instead of a clean
// noise floor.
double pll_skirt_metric(const Spectrum& spectrum, double signal_frequency_hz,
                        double near_band_hz, double far_low_hz, double far_high_hz,
                        int exclusion_bins = 3);

inline std::vector<double> to_double(std::span<const std::int32_t> v) {
    return std::vector<double>(v.begin(), v.end());
}
inline std::vector<double> to_double(std::span<const std::uint8_t> v) {
    return std::vector<double>(v.begin(), v.end());
}

}  // namespace nsnet
