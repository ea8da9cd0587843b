#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nsnet/config.hpp"
#include "nsnet/errors.hpp"
#include "nsnet/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

struct CommonOpts {
    std::string config_path;
    std::string preset = "desk";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "experiment config file (JSON)");
    cmd->add_option("--preset", opts.preset, "built-in preset the config overlays")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--seed", opts.seed, "override master_seed");
    cmd->add_option("--out", opts.out_dir, "override output directory");
    cmd->add_option("--threads", opts.threads, "fitness evaluation threads");
}

nsnet::ExperimentConfig build_config(const CommonOpts& opts) {
    nsnet::ExperimentConfig cfg = nsnet::make_preset(opts.preset);
    if (!opts.config_path.empty()) cfg = nsnet::load_config_file(opts.config_path, cfg);
    if (opts.seed) {
        cfg.master_seed = *opts.seed;
        cfg.ga.master_seed = *opts.seed;
    }
    if (opts.out_dir) cfg.out_dir = *opts.out_dir;
    cfg.ga.n_threads = opts.threads;
    nsnet::resolve_feedback_weights(cfg);
    return cfg;
}

std::string db_str(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spiking-network noise-shaping simulator and weight optimizer"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* sim = app.add_subcommand("simulate", "run one network simulation and analyze it");
    add_common(sim, opts);

    auto* opt = app.add_subcommand("optimize", "evolve the feedback weight matrix");
    add_common(opt, opts);
    std::string resume_path;
    opt->add_option("--resume", resume_path, "continue from a checkpoint file");

    auto* post = app.add_subcommand("postprocess", "convert a raster to a two-level signal");
    add_common(post, opts);
    std::string raster_path;
    std::string algorithm = "fixed";
    post->add_option("--raster", raster_path, "raster CSV to process")->required();
    post->add_option("--algorithm", algorithm, "fixed, variable or leading-edge")
        ->check(CLI::IsMember({"fixed", "variable", "leading-edge"}));

    auto* dsm = app.add_subcommand("dsm", "run the reference first-order modulator");
    add_common(dsm, opts);

    auto* sweep = app.add_subcommand("sweep-epsilon",
                                     "grid-search epsilon_norm for the variable accumulator");
    add_common(sweep, opts);
    std::string sweep_raster;
    double eps_low = 1.0, eps_high = 20.0;
    int sweep_points = 20;
    sweep->add_option("--raster", sweep_raster, "raster CSV to process")->required();
    sweep->add_option("--eps-low", eps_low, "lower bound of the sweep");
    sweep->add_option("--eps-high", eps_high, "upper bound of the sweep");
    sweep->add_option("--points", sweep_points, "grid points");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const auto cfg = build_config(opts);
            const auto res = nsnet::run_simulate(cfg);
            if (res.silent) {
                std::printf("silent network: no pulses emitted\n");
            } else {
                std::printf("snr_db=%s osr=%.3f mean_rate_hz=%.1f pll_metric=%.3f pll_flagged=%d\n",
                            db_str(res.snr.snr_db).c_str(), res.snr.osr, res.snr.rate_stats.mean_hz,
                            res.pll_metric, res.pll_flagged ? 1 : 0);
            }
            std::printf("report: %s\n", res.report_json.string().c_str());
        } else if (opt->parsed()) {
            const auto cfg = build_config(opts);
            const auto res = nsnet::run_optimize(cfg, resume_path);
            std::printf("best_fitness=%.6f evaluations=%lld generations=%d wall_s=%.1f\n",
                        res.report.best_fitness, res.report.eval_count,
                        res.report.generations_run, res.report.wall_seconds);
            std::printf("best genome: %s\n", res.genome_json.string().c_str());
        } else if (post->parsed()) {
            const auto cfg = build_config(opts);
            const auto res = nsnet::run_postprocess(cfg, raster_path,
                                                    nsnet::parse_postproc_algorithm(algorithm));
            std::printf("algorithm=%s snr_before_db=%s snr_after_db=%s delta_db=%s overflows=%ld\n",
                        res.algorithm.c_str(), db_str(res.snr_before_db).c_str(),
                        db_str(res.snr_after_db).c_str(), db_str(res.snr_delta_db).c_str(),
                        res.overflow_count);
            std::printf("report: %s\n", res.report_json.string().c_str());
        } else if (dsm->parsed()) {
            const auto cfg = build_config(opts);
            const auto res = nsnet::run_dsm(cfg);
            std::printf("output_mean=%.6f overloads=%ld", res.output_mean, res.overload_count);
            if (res.snr_available) std::printf(" snr_db=%s", db_str(res.snr_db).c_str());
            std::printf("\nreport: %s\n", res.report_json.string().c_str());
        } else if (sweep->parsed()) {
            const auto cfg = build_config(opts);
            const auto res =
                nsnet::run_sweep_epsilon(cfg, sweep_raster, eps_low, eps_high, sweep_points);
            if (res.recommended_index >= 0) {
                const auto& row = res.rows[static_cast<std::size_t>(res.recommended_index)];
                std::printf("recommended epsilon_norm=%.6g (snr_db=%s, no overflows)\n",
                            row.epsilon_norm, db_str(row.snr_db).c_str());
            } else {
                std::printf("no overflow-free grid point carried a signal\n");
            }
            std::printf("sweep: %s\n", res.sweep_csv.string().c_str());
        }
    } catch (const nsnet::SimulationDiverged& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDiverged;
    } catch (const nsnet::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const nsnet::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const nsnet::InsufficientData& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
