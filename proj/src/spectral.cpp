#include "nsnet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "nsnet/errors.hpp"

namespace nsnet {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Iterative radix-2 FFT over separate re/im arrays. Twiddles are tabulated
// per stage up front, so repeated transforms of the same size (Welch
// segments) share the trig work.
class Fft {
  public:
    explicit Fft(std::size_t n) : n_(n) {
        rev_.resize(n);
        int lg = 0;
        while ((std::size_t{1} << lg) < n) ++lg;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (int b = 0; b < lg; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (lg - 1 - b);
            rev_[i] = r;
        }
        tw_re_.reserve(n);
        tw_im_.reserve(n);
        for (std::size_t len = 2; len <= n; len <<= 1) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const double ang = -2.0 * kPi * static_cast<double>(j) / static_cast<double>(len);
                tw_re_.push_back(std::cos(ang));
                tw_im_.push_back(std::sin(ang));
            }
        }
    }

    void forward(std::vector<double>& re, std::vector<double>& im) const {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t r = rev_[i];
            if (i < r) {
                std::swap(re[i], re[r]);
                std::swap(im[i], im[r]);
            }
        }
        std::size_t base = 0;
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len / 2;
            for (std::size_t i = 0; i < n_; i += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    const double wr = tw_re_[base + j];
                    const double wi = tw_im_[base + j];
                    const std::size_t a = i + j;
                    const std::size_t b = a + half;
                    const double xr = re[b] * wr - im[b] * wi;
                    const double xi = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - xr;
                    im[b] = im[a] - xi;
                    re[a] += xr;
                    im[a] += xi;
                }
            }
            base += half;
        }
    }

  private:
    std::size_t n_;
    std::vector<std::size_t> rev_;
    std::vector<double> tw_re_, tw_im_;
};

std::vector<double> make_window(Window window, std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (window == Window::hann) {
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n)));
    }
    return w;
}

struct BinRange {
    std::size_t lo, hi;  // inclusive
    bool empty() const { return lo > hi; }
};

// Bins whose center frequency lies inside [f_lo, f_hi].
BinRange bins_in(const Spectrum& s, double f_lo, double f_hi) {
    const double bw = s.sample_rate / (2.0 * static_cast<double>(s.freq_hz.size() - 1));
    const double eps = bw * 1e-9;
    std::size_t lo = static_cast<std::size_t>(std::max(0.0, std::ceil((f_lo - eps) / bw)));
    double hi_d = std::floor((f_hi + eps) / bw);
    std::size_t hi = hi_d < 0 ? 0 : static_cast<std::size_t>(hi_d);
    hi = std::min(hi, s.freq_hz.size() - 1);
    if (lo > hi) return {1, 0};
    return {lo, hi};
}

std::size_t nearest_bin(const Spectrum& s, double f) {
    const double bw = s.sample_rate / (2.0 * static_cast<double>(s.freq_hz.size() - 1));
    const auto b = static_cast<long>(std::lround(f / bw));
    return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(s.freq_hz.size()) - 1));
}

}  // namespace

Spectrum power_spectrum(std::span<const double> signal, double sample_rate,
                        std::size_t fft_size, Window window, int n_segments) {
    if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0)
        throw ConfigError("fft_size must be a power of two >= 2");
    if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be > 0");
    if (signal.size() < fft_size)
        throw InsufficientData("signal length " + std::to_string(signal.size()) +
                               " shorter than fft_size " + std::to_string(fft_size));
    if (n_segments < 1) n_segments = 1;

    const std::size_t hop = fft_size / 2;
    const std::size_t avail = 1 + (signal.size() - fft_size) / hop;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(n_segments), avail);

    const std::vector<double> w = make_window(window, fft_size);
    double wss = 0.0;
    for (double v : w) wss += v * v;

    const Fft plan(fft_size);
    const std::size_t nbins = fft_size / 2 + 1;
    std::vector<double> acc(nbins, 0.0);
    std::vector<double> re(fft_size), im(fft_size);

    for (std::size_t s = 0; s < k; ++s) {
        const double* seg = signal.data() + s * hop;
        double mean = 0.0;
        for (std::size_t i = 0; i < fft_size; ++i) mean += seg[i];
        mean /= static_cast<double>(fft_size);
        for (std::size_t i = 0; i < fft_size; ++i) {
            re[i] = (seg[i] - mean) * w[i];
            im[i] = 0.0;
        }
        plan.forward(re, im);
        for (std::size_t b = 0; b < nbins; ++b) {
            const double p = re[b] * re[b] + im[b] * im[b];
            acc[b] += (b == 0 || b == fft_size / 2) ? p : 2.0 * p;
        }
    }

    Spectrum out;
    out.sample_rate = sample_rate;
    out.window = window;
    out.n_segments = static_cast<int>(k);
    out.freq_hz.resize(nbins);
    out.power.resize(nbins);
    const double scale = 1.0 / (static_cast<double>(k) * static_cast<double>(fft_size) * wss);
    for (std::size_t b = 0; b < nbins; ++b) {
        out.freq_hz[b] = static_cast<double>(b) * sample_rate / static_cast<double>(fft_size);
        out.power[b] = acc[b] * scale;
    }
    return out;
}

SnrReport snr_db(const Spectrum& spectrum, double signal_frequency_hz,
                 double baseband_low_hz, double baseband_high_hz, int exclusion_bins) {
    if (baseband_low_hz < 0.0 || baseband_high_hz > spectrum.sample_rate / 2.0 ||
        baseband_low_hz >= baseband_high_hz)
        throw ConfigError("baseband must lie inside [0, sample_rate/2]");
    if (signal_frequency_hz < baseband_low_hz || signal_frequency_hz > baseband_high_hz)
        throw ConfigError("signal frequency must lie inside the baseband");
    if (exclusion_bins < 0) throw ConfigError("exclusion_bins must be >= 0");

    const BinRange bb = bins_in(spectrum, baseband_low_hz, baseband_high_hz);
    const std::size_t sb = nearest_bin(spectrum, signal_frequency_hz);
    const std::size_t ex = static_cast<std::size_t>(exclusion_bins);
    const std::size_t sig_lo = sb >= ex ? sb - ex : 0;
    const std::size_t sig_hi = std::min(sb + ex, spectrum.freq_hz.size() - 1);

    SnrReport rep;
    rep.signal_frequency_hz = signal_frequency_hz;
    rep.baseband_low_hz = baseband_low_hz;
    rep.baseband_high_hz = baseband_high_hz;
    rep.edge_truncated = !bb.empty() && (sig_lo < bb.lo || sig_hi > bb.hi);

    for (std::size_t b = sig_lo; b <= sig_hi; ++b) rep.signal_power += spectrum.power[b];
    if (!bb.empty()) {
        for (std::size_t b = bb.lo; b <= bb.hi; ++b) {
            if (b >= sig_lo && b <= sig_hi) continue;
            rep.noise_power_baseband += spectrum.power[b];
        }
    }

    if (rep.signal_power <= 0.0)
        rep.snr_db = -std::numeric_limits<double>::infinity();
    else if (rep.noise_power_baseband <= 0.0)
        rep.snr_db = std::numeric_limits<double>::infinity();
    else
        rep.snr_db = 10.0 * std::log10(rep.signal_power / rep.noise_power_baseband);
    return rep;
}

double osr(double mean_rate_hz, int n_neurons, double f_baseband_hz) {
    if (!(mean_rate_hz > 0.0) || n_neurons < 1 || !(f_baseband_hz > 0.0))
        throw ConfigError("osr inputs must be > 0");
    return static_cast<double>(n_neurons) * mean_rate_hz / (2.0 * f_baseband_hz);
}

double noise_slope_db_per_decade(const Spectrum& spectrum, double fit_low_hz,
                                 double fit_high_hz, double exclude_frequency_hz,
                                 int exclusion_bins) {
    const BinRange r = bins_in(spectrum, fit_low_hz, fit_high_hz);
    std::size_t ex_lo = 1, ex_hi = 0;
    if (exclude_frequency_hz >= 0.0) {
        const std::size_t sb = nearest_bin(spectrum, exclude_frequency_hz);
        const std::size_t ex = static_cast<std::size_t>(exclusion_bins);
        ex_lo = sb >= ex ? sb - ex : 0;
        ex_hi = sb + ex;
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    if (!r.empty()) {
        for (std::size_t b = std::max<std::size_t>(r.lo, 1); b <= r.hi; ++b) {
            if (b >= ex_lo && b <= ex_hi) continue;
            if (spectrum.power[b] <= 0.0) continue;
            const double x = std::log10(spectrum.freq_hz[b]);
            const double y = 10.0 * std::log10(spectrum.power[b]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
    }
    if (n < 10)
        throw InsufficientData("noise slope fit needs >= 10 usable bins, got " + std::to_string(n));
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

double pll_skirt_metric(const Spectrum& spectrum, double signal_frequency_hz,
                        double near_band_hz, double far_low_hz, double far_high_hz,
                        int exclusion_bins) {
    if (signal_frequency_hz - near_band_hz < 0.0 ||
        signal_frequency_hz + near_band_hz > spectrum.sample_rate / 2.0)
        throw ConfigError("near band around the signal must lie inside the spectrum");

    const std::size_t sb = nearest_bin(spectrum, signal_frequency_hz);
    const std::size_t ex = static_cast<std::size_t>(std::max(exclusion_bins, 0));
    const BinRange near = bins_in(spectrum, signal_frequency_hz - near_band_hz,
                                  signal_frequency_hz + near_band_hz);
    const BinRange far = bins_in(spectrum, far_low_hz, far_high_hz);

    double near_sum = 0.0, far_sum = 0.0;
    std::size_t near_n = 0, far_n = 0;
    if (!near.empty()) {
        for (std::size_t b = near.lo; b <= near.hi; ++b) {
            if (b + ex >= sb && b <= sb + ex) continue;  // signal bin group
            near_sum += spectrum.power[b];
            ++near_n;
        }
    }
    if (!far.empty()) {
        for (std::size_t b = far.lo; b <= far.hi; ++b) {
            far_sum += spectrum.power[b];
            ++far_n;
        }
    }
    if (near_n == 0 || far_n == 0)
        throw InsufficientData("pll_skirt_metric: empty near or far band");
    const double near_mean = near_sum / static_cast<double>(near_n);
    const double far_mean = far_sum / static_cast<double>(far_n);
    if (far_mean <= 0.0) return std::numeric_limits<double>::infinity();
    return near_mean / far_mean;
}

}  // namespace nsnet
