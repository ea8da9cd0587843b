#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsnet/config.hpp"

namespace nsnet {

// One full simulate-and-analyze pass over a config. Silent networks are
// reported, not failed.
struct SimulateResult {
    bool silent = false;
    SnrReport snr;  // osr and rate_stats filled
    double pll_metric = 0.0;
    bool pll_flagged = false;
    double noise_slope_db_per_decade = 0.0;
    bool slope_available = false;
    std::filesystem::path raster_csv, spectrum_csv, report_json;
};
SimulateResult run_simulate(const ExperimentConfig& cfg);

struct OptimizeResult {
    GaRunReport report;
    double separation_weight_used = 0.0;  // calibrated C when auto
    std::filesystem::path report_json, genome_json, trace_csv, checkpoint_json;
};
OptimizeResult run_optimize(const ExperimentConfig& cfg,
                            const std::filesystem::path& resume_checkpoint = {});

enum class PostprocAlgorithm { fixed, variable, leading_edge };
PostprocAlgorithm parse_postproc_algorithm(const std::string& name);

struct PostprocessResult {
    std::string algorithm;
    double snr_before_db = 0.0;
    double snr_after_db = 0.0;
    double snr_delta_db = 0.0;
    // Mean bin power in the +/-10% band around the 1/T pseudofrequency,
    // before and after processing.
    double pseudofreq_hz = 0.0;
    double band_power_before = 0.0;
    double band_power_after = 0.0;
    long overflow_count = 0;
    std::filesystem::path processed_csv, spectrum_csv, report_json;
};
PostprocessResult run_postprocess(const ExperimentConfig& cfg,
                                  const std::filesystem::path& raster_csv,
                                  PostprocAlgorithm algorithm);

struct DsmResult {
    double output_mean = 0.0;
    long overload_count = 0;
    double snr_db = 0.0;
    bool snr_available = false;
    double noise_slope_db_per_decade = 0.0;
    bool slope_available = false;
    std::filesystem::path bitstream_csv, spectrum_csv, report_json;
};
DsmResult run_dsm(const ExperimentConfig& cfg);

struct SweepRow {
    double epsilon_norm = 0.0;
    double snr_db = 0.0;  // NaN when the raster carries no signal
    long overflow_count = 0;
};
struct SweepResult {
    std::vector<SweepRow> rows;
    int recommended_index = -1;  // argmax SNR among overflow-free rows
    std::filesystem::path sweep_csv;
};
SweepResult run_sweep_epsilon(const ExperimentConfig& cfg,
                              const std::filesystem::path& raster_csv, double eps_low,
                              double eps_high, int n_points);

}  // namespace nsnet
