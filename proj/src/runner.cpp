#include "nsnet/runner.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "nsnet/csvio.hpp"
#include "nsnet/dsmref.hpp"
#include "nsnet/errors.hpp"
#include "nsnet/postproc.hpp"
#include "nsnet/rng.hpp"

namespace nsnet {
namespace {

using nlohmann::json;

enum SeedTag : std::uint64_t {
    kTagSimulate = 301,
    kTagCalibrate = 302,
};

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json provenance(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = 1;
    j["config_hash"] = config_hash_hex(cfg);
    j["master_seed"] = cfg.master_seed;
    return j;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << j.dump(2) << "\n";
    if (!f) throw IoError("write failed: " + path.string());
}

std::filesystem::path ensure_out_dir(const ExperimentConfig& cfg) {
    std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());
    return dir;
}

// Mean bin power in [lo, hi]; zero if no bin falls inside.
double mean_band_power(const Spectrum& spec, double lo, double hi) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t b = 0; b < spec.freq_hz.size(); ++b) {
        if (spec.freq_hz[b] < lo || spec.freq_hz[b] > hi) continue;
        sum += spec.power[b];
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

SimEnv env_from_config(const ExperimentConfig& cfg) {
    SimEnv env;
    env.network = cfg.network;
    env.input_template = cfg.input;
    env.n_steps = cfg.analysis.n_steps;
    env.fft_size = cfg.analysis.fft_size;
    env.window = cfg.analysis.window;
    env.n_segments = cfg.analysis.n_segments;
    env.exclusion_bins = cfg.analysis.exclusion_bins;
    return env;
}

struct SignalAnalysis {
    Spectrum spectrum;
    SnrReport snr;
    bool has_signal = false;
};

SignalAnalysis analyze_signal(const ExperimentConfig& cfg, const std::vector<double>& signal,
                              double sample_rate) {
    SignalAnalysis out;
    out.spectrum = power_spectrum(signal, sample_rate, cfg.analysis.fft_size,
                                  cfg.analysis.window, cfg.analysis.n_segments);
    out.snr = snr_db(out.spectrum, cfg.input.frequency_hz, cfg.analysis.baseband_low_hz,
                     cfg.analysis.baseband_high_hz, cfg.analysis.exclusion_bins);
    out.has_signal = out.snr.signal_power > 0.0;
    return out;
}

}  // namespace

SimulateResult run_simulate(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto dir = ensure_out_dir(cfg);

    const SpikeRaster raster = simulate(cfg.network, cfg.input, cfg.analysis.n_steps,
                                        derive_seed({cfg.master_seed, kTagSimulate}));
    const RateStats rates = rate_stats(raster);

    SimulateResult res;
    res.raster_csv = dir / "raster.csv";
    write_raster_csv(res.raster_csv, raster);

    json report;
    report["provenance"] = provenance(cfg);
    if (!(rates.mean_hz > 0.0)) {
        res.silent = true;
        report["silent"] = true;
        res.report_json = dir / "snr_report.json";
        write_json_file(res.report_json, report);
        return res;
    }

    const std::vector<double> summed = to_double(raster.summed);
    const auto analysis = analyze_signal(cfg, summed, 1.0 / cfg.network.dt);
    res.snr = analysis.snr;
    res.snr.rate_stats = rates;
    res.snr.osr = osr(rates.mean_hz, cfg.network.n_neurons, cfg.analysis.baseband_high_hz);

    res.spectrum_csv = dir / "spectrum.csv";
    write_spectrum_csv(res.spectrum_csv, analysis.spectrum);

    try {
        res.pll_metric =
            pll_skirt_metric(analysis.spectrum, cfg.input.frequency_hz,
                             cfg.analysis.pll_near_band_hz, cfg.analysis.pll_far_low_hz,
                             cfg.analysis.pll_far_high_hz, cfg.analysis.exclusion_bins);
        res.pll_flagged = res.pll_metric > cfg.analysis.pll_threshold;
    } catch (const InsufficientData&) {
        // Analysis resolution too coarse to separate skirts from the carrier.
        res.pll_metric = kNan;
        res.pll_flagged = false;
    }
    try {
        res.noise_slope_db_per_decade = noise_slope_db_per_decade(
            analysis.spectrum, cfg.analysis.slope_fit_low_hz, cfg.analysis.slope_fit_high_hz,
            cfg.input.frequency_hz, cfg.analysis.exclusion_bins);
        res.slope_available = true;
    } catch (const InsufficientData&) {
        res.noise_slope_db_per_decade = kNan;
    }

    report["silent"] = false;
    report["snr_db"] = finite_or_null(res.snr.snr_db);
    report["signal_power"] = res.snr.signal_power;
    report["noise_power_baseband"] = res.snr.noise_power_baseband;
    report["signal_frequency_hz"] = res.snr.signal_frequency_hz;
    report["baseband"] = {res.snr.baseband_low_hz, res.snr.baseband_high_hz};
    report["edge_truncated"] = res.snr.edge_truncated;
    report["osr"] = res.snr.osr;
    report["rate_stats"] = {{"mean_hz", rates.mean_hz},
                            {"std_hz", rates.std_hz},
                            {"per_neuron_hz", rates.per_neuron_hz}};
    report["pll"] = {{"metric", finite_or_null(res.pll_metric)},
                     {"flagged", res.pll_flagged},
                     {"threshold", cfg.analysis.pll_threshold}};
    report["noise_slope_db_per_decade"] = finite_or_null(res.noise_slope_db_per_decade);
    res.report_json = dir / "snr_report.json";
    write_json_file(res.report_json, report);
    return res;
}

OptimizeResult run_optimize(const ExperimentConfig& cfg,
                            const std::filesystem::path& resume_checkpoint) {
    cfg.validate();
    const auto dir = ensure_out_dir(cfg);

    SimEnv env = env_from_config(cfg);
    ObjectiveParams params = cfg.objective;
    if (cfg.objective_version == ObjectiveVersion::v2 && params.separation_weight <= 0.0) {
        params.separation_weight = calibrate_separation_weight(
            params, env, cfg.ga.init_low, cfg.ga.init_high, 12,
            derive_seed({cfg.master_seed, kTagCalibrate}));
    }

    const ObjectiveVersion version = cfg.objective_version;
    ObjectiveFn objective = [env, params, version](const Genome& genome, std::uint64_t seed,
                                                   int n_repeats) {
        return evaluate_objective(version, genome, params, env, seed, n_repeats).fitness;
    };

    OptimizeResult res;
    res.separation_weight_used = params.separation_weight;
    res.checkpoint_json = dir / "checkpoint.json";
    CheckpointSink sink = [&res](const GaState& state) {
        write_checkpoint(res.checkpoint_json, state);
    };

    GaState resume_state;
    const GaState* resume = nullptr;
    if (!resume_checkpoint.empty()) {
        resume_state = load_checkpoint(resume_checkpoint);
        resume = &resume_state;
    }
    res.report = run_ga(cfg.ga, objective, resume, sink);

    res.trace_csv = dir / "fitness_trace.csv";
    write_fitness_trace_csv(res.trace_csv, res.report.trace);

    res.genome_json = dir / "best_genome.json";
    write_genome_file(res.genome_json, cfg, res.report.best_genome, res.report.best_fitness);

    json report;
    report["provenance"] = provenance(cfg);
    report["best_fitness"] = finite_or_null(res.report.best_fitness);
    report["eval_count"] = res.report.eval_count;
    report["generations_run"] = res.report.generations_run;
    report["separation_weight"] = params.separation_weight;
    json trace = json::array();
    for (const auto& row : res.report.trace)
        trace.push_back({{"generation", row.generation},
                         {"subpop", row.subpop},
                         {"best", finite_or_null(row.best)},
                         {"median", finite_or_null(row.median)}});
    report["trace"] = std::move(trace);
    report["best_genome"] = res.report.best_genome.genes;
    res.report_json = dir / "ga_report.json";
    write_json_file(res.report_json, report);
    return res;
}

PostprocAlgorithm parse_postproc_algorithm(const std::string& name) {
    if (name == "fixed") return PostprocAlgorithm::fixed;
    if (name == "variable") return PostprocAlgorithm::variable;
    if (name == "leading-edge") return PostprocAlgorithm::leading_edge;
    throw ConfigError("unknown post-processing algorithm '" + name +
                      "' (expected fixed, variable or leading-edge)");
}

PostprocessResult run_postprocess(const ExperimentConfig& cfg,
                                  const std::filesystem::path& raster_csv,
                                  PostprocAlgorithm algorithm) {
    cfg.validate();
    const auto dir = ensure_out_dir(cfg);
    const SpikeRaster raster = read_raster_csv(raster_csv);
    const double sample_rate = 1.0 / raster.dt;

    PostprocessResult res;
    res.pseudofreq_hz = 1.0 / (cfg.network.fire_pulse_steps * raster.dt);

    const auto before = analyze_signal(cfg, to_double(raster.summed), sample_rate);
    res.snr_before_db = before.snr.snr_db;
    res.band_power_before =
        mean_band_power(before.spectrum, 0.9 * res.pseudofreq_hz, 1.1 * res.pseudofreq_hz);

    std::vector<double> processed;
    std::string suffix;
    switch (algorithm) {
        case PostprocAlgorithm::fixed:
        case PostprocAlgorithm::variable: {
            const bool fixed = algorithm == PostprocAlgorithm::fixed;
            suffix = fixed ? "fixed" : "variable";
            const AccumulatorTrace trace = fixed ? accumulate_fixed(raster, cfg.postproc)
                                                 : accumulate_variable(raster, cfg.postproc);
            res.overflow_count = trace.overflow_count;
            processed = to_double(trace.a_out);
            res.processed_csv = dir / ("trace_" + suffix + ".csv");
            write_trace_csv(res.processed_csv, trace);
            break;
        }
        case PostprocAlgorithm::leading_edge: {
            suffix = "leading_edge";
            const SpikeRaster edges = leading_edge_raster(raster);
            processed = to_double(edges.summed);
            res.processed_csv = dir / "raster_leading_edge.csv";
            write_raster_csv(res.processed_csv, edges);
            break;
        }
    }
    res.algorithm = suffix;

    const auto after = analyze_signal(cfg, processed, sample_rate);
    res.snr_after_db = after.snr.snr_db;
    res.snr_delta_db = res.snr_after_db - res.snr_before_db;
    res.band_power_after =
        mean_band_power(after.spectrum, 0.9 * res.pseudofreq_hz, 1.1 * res.pseudofreq_hz);

    res.spectrum_csv = dir / ("spectrum_" + suffix + ".csv");
    write_spectrum_csv(res.spectrum_csv, after.spectrum);

    json report;
    report["provenance"] = provenance(cfg);
    report["algorithm"] = suffix;
    report["snr_before_db"] = finite_or_null(res.snr_before_db);
    report["snr_after_db"] = finite_or_null(res.snr_after_db);
    report["snr_delta_db"] = finite_or_null(res.snr_delta_db);
    report["pseudofreq_hz"] = res.pseudofreq_hz;
    report["band_power_before"] = res.band_power_before;
    report["band_power_after"] = res.band_power_after;
    report["overflow_count"] = res.overflow_count;
    res.report_json = dir / ("postprocess_" + suffix + ".json");
    write_json_file(res.report_json, report);
    return res;
}

DsmResult run_dsm(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto dir = ensure_out_dir(cfg);

    DsmConfig dsm;
    dsm.sample_rate = 1.0 / cfg.network.dt;
    const DsmOutput out = dsm_simulate(dsm, cfg.input, cfg.analysis.n_steps);

    DsmResult res;
    res.overload_count = out.overload_count;
    double mean = 0.0;
    for (double y : out.y) mean += y;
    res.output_mean = mean / static_cast<double>(out.y.size());

    res.bitstream_csv = dir / "dsm_bitstream.csv";
    write_signal_csv(res.bitstream_csv, out.y);

    const Spectrum spec = power_spectrum(out.y, dsm.sample_rate, cfg.analysis.fft_size,
                                         cfg.analysis.window, cfg.analysis.n_segments);
    res.spectrum_csv = dir / "dsm_spectrum.csv";
    write_spectrum_csv(res.spectrum_csv, spec);

    if (cfg.input.kind == InputKind::sine && cfg.input.amplitude > 0.0) {
        const SnrReport snr = snr_db(spec, cfg.input.frequency_hz, cfg.analysis.baseband_low_hz,
                                     cfg.analysis.baseband_high_hz, cfg.analysis.exclusion_bins);
        res.snr_db = snr.snr_db;
        res.snr_available = true;
    }
    try {
        res.noise_slope_db_per_decade = noise_slope_db_per_decade(
            spec, cfg.analysis.slope_fit_low_hz, cfg.analysis.slope_fit_high_hz,
            res.snr_available ? cfg.input.frequency_hz : -1.0, cfg.analysis.exclusion_bins);
        res.slope_available = true;
    } catch (const InsufficientData&) {
        res.noise_slope_db_per_decade = kNan;
    }

    json report;
    report["provenance"] = provenance(cfg);
    report["output_mean"] = res.output_mean;
    report["overload_count"] = res.overload_count;
    report["snr_db"] = res.snr_available ? finite_or_null(res.snr_db) : json(nullptr);
    report["noise_slope_db_per_decade"] = finite_or_null(res.noise_slope_db_per_decade);
    res.report_json = dir / "dsm_report.json";
    write_json_file(res.report_json, report);
    return res;
}

SweepResult run_sweep_epsilon(const ExperimentConfig& cfg,
                              const std::filesystem::path& raster_csv, double eps_low,
                              double eps_high, int n_points) {
    cfg.validate();
    if (!(eps_low > 0.0) || eps_high < eps_low)
        throw ConfigError("epsilon sweep range must satisfy 0 < low <= high");
    if (n_points < 1) throw ConfigError("epsilon sweep needs >= 1 points");
    const auto dir = ensure_out_dir(cfg);
    const SpikeRaster raster = read_raster_csv(raster_csv);
    const double sample_rate = 1.0 / raster.dt;

    SweepResult res;
    double best_snr = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_points; ++k) {
        SweepRow row;
        row.epsilon_norm =
            n_points == 1 ? eps_low
                          : eps_low + (eps_high - eps_low) * static_cast<double>(k) /
                                          static_cast<double>(n_points - 1);
        AccumulatorConfig pp = cfg.postproc;
        pp.epsilon_norm = row.epsilon_norm;
        const AccumulatorTrace trace = accumulate_variable(raster, pp);
        row.overflow_count = trace.overflow_count;
        const auto analysis = analyze_signal(cfg, to_double(trace.a_out), sample_rate);
        row.snr_db = analysis.has_signal ? analysis.snr.snr_db : kNan;
        if (row.overflow_count == 0 && std::isfinite(row.snr_db) && row.snr_db > best_snr) {
            best_snr = row.snr_db;
            res.recommended_index = static_cast<int>(res.rows.size());
        }
        res.rows.push_back(row);
    }

    res.sweep_csv = dir / "epsilon_sweep.csv";
    std::ofstream f(res.sweep_csv);
    if (!f) throw IoError("cannot open " + res.sweep_csv.string() + " for writing");
    f << "epsilon_norm,snr_db,overflow_count\n";
    char buf[96];
    for (const auto& row : res.rows) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%ld\n", row.epsilon_norm, row.snr_db,
                      row.overflow_count);
        f << buf;
    }
    if (!f) throw IoError("write failed: " + res.sweep_csv.string());
    return res;
}

}  // namespace nsnet
