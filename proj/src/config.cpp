#include "nsnet/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "nsnet/errors.hpp"
#include "nsnet/rng.hpp"

namespace nsnet {
namespace {

using nlohmann::json;

constexpr std::uint64_t kTagFeedbackInit = 201;

[[noreturn]] void field_error(const std::string& where, const std::string& why) {
    throw ConfigError("config error at " + where + ": " + why);
}

template <typename T>
void read_field(const json& j, const std::string& section, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        field_error(section + "." + key, e.what());
    }
}

void read_band(const json& j, const std::string& section, const char* key, double& lo,
               double& hi) {
    if (!j.contains(key)) return;
    const json& b = j.at(key);
    if (!b.is_array() || b.size() != 2) field_error(section + "." + key, "expected [low, high]");
    try {
        lo = b.at(0).get<double>();
        hi = b.at(1).get<double>();
    } catch (const json::exception& e) {
        field_error(section + "." + key, e.what());
    }
}

std::string window_name(Window w) { return w == Window::hann ? "hann" : "rectangular"; }
Window parse_window(const std::string& s, const std::string& where) {
    if (s == "hann") return Window::hann;
    if (s == "rectangular") return Window::rectangular;
    field_error(where, "unknown window '" + s + "'");
}

std::string reset_name(ResetMode m) {
    return m == ResetMode::to_zero ? "to-zero" : "subtract-threshold";
}
ResetMode parse_reset(const std::string& s, const std::string& where) {
    if (s == "to-zero") return ResetMode::to_zero;
    if (s == "subtract-threshold") return ResetMode::subtract_threshold;
    field_error(where, "unknown reset_mode '" + s + "'");
}

std::string kind_name(InputKind k) {
    switch (k) {
        case InputKind::zero: return "zero";
        case InputKind::samples: return "samples";
        default: return "sine";
    }
}
InputKind parse_kind(const std::string& s, const std::string& where) {
    if (s == "sine") return InputKind::sine;
    if (s == "zero") return InputKind::zero;
    if (s == "samples") return InputKind::samples;
    field_error(where, "unknown input kind '" + s + "'");
}

json matrix_to_json(const std::vector<double>& w, int n) {
    json rows = json::array();
    for (int i = 0; i < n; ++i) {
        json row = json::array();
        for (int j = 0; j < n; ++j)
            row.push_back(w[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                            static_cast<std::size_t>(j)]);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> matrix_from_json(const json& rows, const std::string& where) {
    if (!rows.is_array() || rows.empty()) field_error(where, "expected a matrix (array of rows)");
    const std::size_t n = rows.size();
    std::vector<double> w;
    w.reserve(n * n);
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != n)
            field_error(where, "matrix must be square");
        for (const auto& v : row) {
            if (!v.is_number()) field_error(where, "matrix entries must be numbers");
            w.push_back(v.get<double>());
        }
    }
    return w;
}

json network_to_json(const NetworkConfig& net, const WeightSpec& spec) {
    json j;
    j["n_neurons"] = net.n_neurons;
    j["threshold"] = net.threshold;
    j["dt"] = net.dt;
    j["fire_pulse_steps"] = net.fire_pulse_steps;
    if (!net.input_weights.empty()) j["input_weights"] = net.input_weights;
    j["reset_mode"] = reset_name(net.reset_mode);
    j["clamp_negative"] = net.clamp_negative;
    json w;
    switch (spec.kind) {
        case WeightSpec::Kind::zero:
            w["zero"] = true;
            break;
        case WeightSpec::Kind::random:
            w["random"] = {{"low", spec.low}, {"high", spec.high}};
            break;
        case WeightSpec::Kind::matrix:
            w["matrix"] = matrix_to_json(spec.matrix, net.n_neurons);
            break;
        case WeightSpec::Kind::file:
            w["file"] = spec.file.string();
            break;
    }
    j["feedback_weights"] = std::move(w);
    return j;
}

json input_to_json(const InputSignal& in) {
    json j;
    j["kind"] = kind_name(in.kind);
    j["amplitude"] = in.amplitude;
    j["frequency_hz"] = in.frequency_hz;
    j["dc_offset"] = in.dc_offset;
    j["phase"] = in.phase;
    if (in.kind == InputKind::samples) j["samples"] = in.samples;
    return j;
}

json analysis_to_json(const AnalysisConfig& a) {
    json j;
    j["n_steps"] = a.n_steps;
    j["fft_size"] = a.fft_size;
    j["window"] = window_name(a.window);
    j["n_segments"] = a.n_segments;
    j["baseband"] = {a.baseband_low_hz, a.baseband_high_hz};
    j["exclusion_bins"] = a.exclusion_bins;
    j["pll_near_band_hz"] = a.pll_near_band_hz;
    j["pll_far_band"] = {a.pll_far_low_hz, a.pll_far_high_hz};
    j["pll_threshold"] = a.pll_threshold;
    j["slope_fit_band"] = {a.slope_fit_low_hz, a.slope_fit_high_hz};
    return j;
}

json objective_to_json(const ObjectiveParams& p, ObjectiveVersion version) {
    json j;
    j["version"] = version == ObjectiveVersion::v1 ? "v1" : "v2";
    j["snr_scale_db"] = p.snr_scale_db;
    j["snr_offset_db"] = p.snr_offset_db;
    j["target_rate_hz"] = p.target_rate_hz;
    j["sigma_threshold"] = p.sigma_threshold;
    j["separation_weight"] = p.separation_weight;
    j["separation_offset"] = p.separation_offset;
    j["f_norm_hz"] = p.f_norm_hz;
    j["n_freq_bins"] = p.n_freq_bins;
    j["baseband"] = {p.baseband_low_hz, p.baseband_high_hz};
    j["signal_amplitude"] = p.signal_amplitude;
    j["n_repeats"] = p.n_repeats;
    j["worst_case_fitness"] = p.worst_case_fitness;
    j["signed_rate_term"] = p.signed_rate_term;
    return j;
}

json ga_to_json(const GaConfig& g) {
    json j;
    j["n_subpopulations"] = g.n_subpopulations;
    j["subpop_size"] = g.subpop_size;
    j["mutation_rate"] = g.mutation_rate;
    j["elitism_fraction"] = g.elitism_fraction;
    j["crossover_rate"] = g.crossover_rate;
    j["migration_interval"] = g.migration_interval;
    j["migration_fraction"] = g.migration_fraction;
    j["max_generations"] = g.max_generations;
    j["gene_min"] = g.gene_min;
    j["gene_max"] = g.gene_max;
    j["init_range"] = {g.init_low, g.init_high};
    json sched = json::array();
    for (const auto& s : g.reevaluation_schedule)
        sched.push_back({{"from_generation", s.from_generation}, {"n_repeats", s.n_repeats}});
    j["reevaluation_schedule"] = std::move(sched);
    j["mutation_mode"] = g.mutation_mode == MutationMode::uniform_redraw ? "uniform" : "gaussian";
    j["gaussian_sigma"] = g.gaussian_sigma;
    j["selection_pressure"] = g.selection_pressure;
    return j;
}

json postproc_to_json(const AccumulatorConfig& p) {
    json j;
    j["decrement"] = p.decrement;
    j["output_threshold"] = p.output_threshold;
    j["epsilon_norm"] = p.epsilon_norm;
    j["overflow_limit"] = p.overflow_limit;
    j["nfp_counts_active"] = p.nfp_counts_active;
    return j;
}

void network_from_json(const json& j, NetworkConfig& net, WeightSpec& spec) {
    const std::string s = "network";
    read_field(j, s, "n_neurons", net.n_neurons);
    read_field(j, s, "threshold", net.threshold);
    read_field(j, s, "dt", net.dt);
    read_field(j, s, "fire_pulse_steps", net.fire_pulse_steps);
    read_field(j, s, "input_weights", net.input_weights);
    read_field(j, s, "clamp_negative", net.clamp_negative);
    if (j.contains("reset_mode")) {
        std::string m;
        read_field(j, s, "reset_mode", m);
        net.reset_mode = parse_reset(m, s + ".reset_mode");
    }
    if (j.contains("feedback_weights")) {
        const json& w = j.at("feedback_weights");
        if (!w.is_object()) field_error(s + ".feedback_weights", "expected an object");
        if (w.contains("zero")) {
            spec = {};
            spec.kind = WeightSpec::Kind::zero;
        } else if (w.contains("random")) {
            spec = {};
            spec.kind = WeightSpec::Kind::random;
            read_field(w.at("random"), s + ".feedback_weights.random", "low", spec.low);
            read_field(w.at("random"), s + ".feedback_weights.random", "high", spec.high);
        } else if (w.contains("matrix")) {
            spec = {};
            spec.kind = WeightSpec::Kind::matrix;
            spec.matrix = matrix_from_json(w.at("matrix"), s + ".feedback_weights.matrix");
        } else if (w.contains("file")) {
            spec = {};
            spec.kind = WeightSpec::Kind::file;
            std::string p;
            read_field(w, s + ".feedback_weights", "file", p);
            spec.file = p;
        } else {
            field_error(s + ".feedback_weights", "expected one of zero/random/matrix/file");
        }
    }
}

void input_from_json(const json& j, InputSignal& in) {
    const std::string s = "input";
    if (j.contains("kind")) {
        std::string k;
        read_field(j, s, "kind", k);
        in.kind = parse_kind(k, s + ".kind");
    }
    read_field(j, s, "amplitude", in.amplitude);
    read_field(j, s, "frequency_hz", in.frequency_hz);
    read_field(j, s, "dc_offset", in.dc_offset);
    read_field(j, s, "phase", in.phase);
    read_field(j, s, "samples", in.samples);
}

void analysis_from_json(const json& j, AnalysisConfig& a) {
    const std::string s = "analysis";
    read_field(j, s, "n_steps", a.n_steps);
    read_field(j, s, "fft_size", a.fft_size);
    if (j.contains("window")) {
        std::string w;
        read_field(j, s, "window", w);
        a.window = parse_window(w, s + ".window");
    }
    read_field(j, s, "n_segments", a.n_segments);
    read_band(j, s, "baseband", a.baseband_low_hz, a.baseband_high_hz);
    read_field(j, s, "exclusion_bins", a.exclusion_bins);
    read_field(j, s, "pll_near_band_hz", a.pll_near_band_hz);
    read_band(j, s, "pll_far_band", a.pll_far_low_hz, a.pll_far_high_hz);
    read_field(j, s, "pll_threshold", a.pll_threshold);
    read_band(j, s, "slope_fit_band", a.slope_fit_low_hz, a.slope_fit_high_hz);
}

void objective_from_json(const json& j, ObjectiveParams& p, ObjectiveVersion& version) {
    const std::string s = "objective";
    if (j.contains("version")) {
        std::string v;
        read_field(j, s, "version", v);
        if (v == "v1")
            version = ObjectiveVersion::v1;
        else if (v == "v2")
            version = ObjectiveVersion::v2;
        else
            field_error(s + ".version", "expected 'v1' or 'v2'");
    }
    read_field(j, s, "snr_scale_db", p.snr_scale_db);
    read_field(j, s, "snr_offset_db", p.snr_offset_db);
    read_field(j, s, "target_rate_hz", p.target_rate_hz);
    read_field(j, s, "sigma_threshold", p.sigma_threshold);
    read_field(j, s, "separation_weight", p.separation_weight);
    read_field(j, s, "separation_offset", p.separation_offset);
    read_field(j, s, "f_norm_hz", p.f_norm_hz);
    read_field(j, s, "n_freq_bins", p.n_freq_bins);
    read_band(j, s, "baseband", p.baseband_low_hz, p.baseband_high_hz);
    read_field(j, s, "signal_amplitude", p.signal_amplitude);
    read_field(j, s, "n_repeats", p.n_repeats);
    read_field(j, s, "worst_case_fitness", p.worst_case_fitness);
    read_field(j, s, "signed_rate_term", p.signed_rate_term);
}

void ga_from_json(const json& j, GaConfig& g) {
    const std::string s = "ga";
    read_field(j, s, "n_subpopulations", g.n_subpopulations);
    read_field(j, s, "subpop_size", g.subpop_size);
    read_field(j, s, "mutation_rate", g.mutation_rate);
    read_field(j, s, "elitism_fraction", g.elitism_fraction);
    read_field(j, s, "crossover_rate", g.crossover_rate);
    read_field(j, s, "migration_interval", g.migration_interval);
    read_field(j, s, "migration_fraction", g.migration_fraction);
    read_field(j, s, "max_generations", g.max_generations);
    read_field(j, s, "gene_min", g.gene_min);
    read_field(j, s, "gene_max", g.gene_max);
    read_band(j, s, "init_range", g.init_low, g.init_high);
    if (j.contains("reevaluation_schedule")) {
        const json& sched = j.at("reevaluation_schedule");
        if (!sched.is_array()) field_error(s + ".reevaluation_schedule", "expected an array");
        g.reevaluation_schedule.clear();
        for (const auto& e : sched) {
            ReevalStep step;
            read_field(e, s + ".reevaluation_schedule", "from_generation", step.from_generation);
            read_field(e, s + ".reevaluation_schedule", "n_repeats", step.n_repeats);
            g.reevaluation_schedule.push_back(step);
        }
    }
    if (j.contains("mutation_mode")) {
        std::string m;
        read_field(j, s, "mutation_mode", m);
        if (m == "uniform")
            g.mutation_mode = MutationMode::uniform_redraw;
        else if (m == "gaussian")
            g.mutation_mode = MutationMode::gaussian;
        else
            field_error(s + ".mutation_mode", "expected 'uniform' or 'gaussian'");
    }
    read_field(j, s, "gaussian_sigma", g.gaussian_sigma);
    read_field(j, s, "selection_pressure", g.selection_pressure);
}

void postproc_from_json(const json& j, AccumulatorConfig& p) {
    const std::string s = "postproc";
    read_field(j, s, "decrement", p.decrement);
    read_field(j, s, "output_threshold", p.output_threshold);
    read_field(j, s, "epsilon_norm", p.epsilon_norm);
    read_field(j, s, "overflow_limit", p.overflow_limit);
    read_field(j, s, "nfp_counts_active", p.nfp_counts_active);
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["master_seed"] = cfg.master_seed;
    j["out_dir"] = cfg.out_dir;
    j["network"] = network_to_json(cfg.network, cfg.weights);
    j["input"] = input_to_json(cfg.input);
    j["analysis"] = analysis_to_json(cfg.analysis);
    j["objective"] = objective_to_json(cfg.objective, cfg.objective_version);
    j["ga"] = ga_to_json(cfg.ga);
    j["postproc"] = postproc_to_json(cfg.postproc);
    return j;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

json parse_json_text(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("invalid JSON in " + what);
    return j;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

void AnalysisConfig::validate() const {
    if (n_steps < 1) throw ConfigError("analysis.n_steps must be >= 1");
    if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0)
        throw ConfigError("analysis.fft_size must be a power of two");
    if (fft_size > n_steps)
        throw ConfigError("analysis.fft_size must not exceed analysis.n_steps");
    if (n_segments < 1) throw ConfigError("analysis.n_segments must be >= 1");
    if (baseband_low_hz <= 0.0 || baseband_low_hz >= baseband_high_hz)
        throw ConfigError("analysis.baseband must satisfy 0 < low < high");
    if (exclusion_bins < 0) throw ConfigError("analysis.exclusion_bins must be >= 0");
}

void ExperimentConfig::validate() const {
    network.validate();
    analysis.validate();
    objective.validate();
    ga.validate();
    postproc.validate();
    if (input.kind == InputKind::sine && input.frequency_hz < 0.0)
        throw ConfigError("input.frequency_hz must be >= 0");
    if (input.amplitude < 0.0) throw ConfigError("input.amplitude must be >= 0");
}

ExperimentConfig desk_preset() {
    ExperimentConfig cfg;
    cfg.out_dir = "out";
    cfg.network.n_neurons = 10;
    cfg.network.dt = 1e-6;
    cfg.network.fire_pulse_steps = 10;
    // Uncoupled rate dc/(threshold*dt) = 2.4 kHz leaves the inhibitory
    // feedback headroom to pull the population onto the 2 kHz target.
    // 640 Hz keeps the probe's low harmonics out of the 10 Hz - 1 kHz
    // measurement band.
    cfg.input.kind = InputKind::sine;
    cfg.input.dc_offset = 0.0024;
    cfg.input.amplitude = 0.0006;
    cfg.input.frequency_hz = 640.0;
    cfg.analysis.n_steps = std::size_t{1} << 17;
    cfg.analysis.fft_size = std::size_t{1} << 16;
    cfg.ga.n_subpopulations = 4;
    cfg.ga.subpop_size = 12;
    cfg.ga.max_generations = 60;
    cfg.ga.reevaluation_schedule = {{0, 1}};
    cfg.ga.genome_length = cfg.network.n_neurons * cfg.network.n_neurons;
    cfg.postproc.epsilon_norm = 0.7 * cfg.network.fire_pulse_steps;
    return cfg;
}

ExperimentConfig paper_preset() {
    ExperimentConfig cfg = desk_preset();
    cfg.analysis.n_steps = std::size_t{1} << 18;
    cfg.ga.n_subpopulations = 10;
    cfg.ga.subpop_size = 30;
    cfg.ga.max_generations = 500;
    cfg.ga.reevaluation_schedule = {{0, 1}, {100, 4}, {300, 8}};
    return cfg;
}

ExperimentConfig make_preset(const std::string& name) {
    if (name == "desk") return desk_preset();
    if (name == "paper") return paper_preset();
    throw ConfigError("unknown preset '" + name + "' (expected 'desk' or 'paper')");
}

ExperimentConfig parse_config_json(const std::string& text, ExperimentConfig base,
                                   const std::filesystem::path& base_dir) {
    const json j = parse_json_text(text, "config");
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    read_field(j, "", "schema_version", base.schema_version);
    if (base.schema_version != 1)
        throw ConfigError("unsupported config schema_version " +
                          std::to_string(base.schema_version));
    read_field(j, "", "master_seed", base.master_seed);
    read_field(j, "", "out_dir", base.out_dir);
    if (j.contains("network")) network_from_json(j.at("network"), base.network, base.weights);
    if (j.contains("input")) input_from_json(j.at("input"), base.input);
    if (j.contains("analysis")) analysis_from_json(j.at("analysis"), base.analysis);
    if (j.contains("objective"))
        objective_from_json(j.at("objective"), base.objective, base.objective_version);
    if (j.contains("ga")) ga_from_json(j.at("ga"), base.ga);
    if (j.contains("postproc")) postproc_from_json(j.at("postproc"), base.postproc);

    if (base.weights.kind == WeightSpec::Kind::file && base.weights.file.is_relative() &&
        !base_dir.empty())
        base.weights.file = base_dir / base.weights.file;

    base.ga.master_seed = base.master_seed;
    base.ga.genome_length = base.network.n_neurons * base.network.n_neurons;
    base.validate();
    return base;
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
    return parse_config_json(read_text_file(path), std::move(base), path.parent_path());
}

void resolve_feedback_weights(ExperimentConfig& cfg) {
    const int n = cfg.network.n_neurons;
    switch (cfg.weights.kind) {
        case WeightSpec::Kind::zero:
            cfg.network.feedback_weights.assign(
                static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
            break;
        case WeightSpec::Kind::random:
            cfg.network.feedback_weights = init_random_weights(
                n, cfg.weights.low, cfg.weights.high,
                derive_seed({cfg.master_seed, kTagFeedbackInit}));
            break;
        case WeightSpec::Kind::matrix:
            if (cfg.weights.matrix.size() !=
                static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
                throw ConfigError("feedback weight matrix does not match n_neurons");
            cfg.network.feedback_weights = cfg.weights.matrix;
            break;
        case WeightSpec::Kind::file:
            cfg.network.feedback_weights = load_genome_file(cfg.weights.file, cfg);
            break;
    }
    cfg.network.validate();
}

std::string dump_config(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

std::string config_hash_hex(const ExperimentConfig& cfg) {
    // out_dir is where results land, not part of the experiment identity.
    json j = config_to_json(cfg);
    j.erase("out_dir");
    return to_hex(fnv1a64(j.dump()));
}

std::string network_hash_hex(const ExperimentConfig& cfg) {
    // Weight source and the probe input are free to vary; the structure the
    // genome was evolved for is not.
    json j = network_to_json(cfg.network, cfg.weights);
    j.erase("feedback_weights");
    return to_hex(fnv1a64(j.dump()));
}

void write_genome_file(const std::filesystem::path& path, const ExperimentConfig& cfg,
                       const Genome& genome, double fitness) {
    const int n = cfg.network.n_neurons;
    if (genome.genes.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw ConfigError("genome length does not match n_neurons^2");
    json j;
    j["schema_version"] = 1;
    j["n_neurons"] = n;
    j["network_hash"] = network_hash_hex(cfg);
    j["fitness"] = std::isfinite(fitness) ? json(fitness) : json(nullptr);
    j["weights"] = matrix_to_json(genome.genes, n);
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << j.dump(2) << "\n";
    if (!f) throw IoError("write failed: " + path.string());
}

std::vector<double> load_genome_file(const std::filesystem::path& path,
                                     const ExperimentConfig& cfg) {
    const json j = parse_json_text(read_text_file(path), path.string());
    int n = 0;
    std::string hash;
    read_field(j, path.string(), "n_neurons", n);
    read_field(j, path.string(), "network_hash", hash);
    if (n != cfg.network.n_neurons)
        throw ConfigError("genome file " + path.string() + " was evolved for n_neurons=" +
                          std::to_string(n) + ", config has n_neurons=" +
                          std::to_string(cfg.network.n_neurons));
    if (!hash.empty() && hash != network_hash_hex(cfg))
        throw ConfigError("genome file " + path.string() +
                          " does not match this network/input configuration");
    if (!j.contains("weights")) throw ConfigError(path.string() + ": missing 'weights'");
    return matrix_from_json(j.at("weights"), path.string() + ".weights");
}

void write_checkpoint(const std::filesystem::path& path, const GaState& state) {
    // Fitness may legitimately be +inf (failed evaluations); JSON has no inf,
    // so those serialize as null and read back as inf.
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["schema_version"] = 1;
    j["generation"] = state.generation;
    j["eval_count"] = state.eval_count;
    json trace = json::array();
    for (const auto& row : state.trace)
        trace.push_back({row.generation, row.subpop, finite_or_null(row.best),
                         finite_or_null(row.median)});
    j["trace"] = std::move(trace);
    json pops = json::array();
    for (const auto& pop : state.subpops) {
        json jp = json::array();
        for (const auto& ind : pop) {
            json ji;
            ji["fitness"] = finite_or_null(ind.fitness);
            ji["genes"] = ind.genome.genes;
            jp.push_back(std::move(ji));
        }
        pops.push_back(std::move(jp));
    }
    j["subpops"] = std::move(pops);
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << j.dump() << "\n";
    if (!f) throw IoError("write failed: " + path.string());
}

GaState load_checkpoint(const std::filesystem::path& path) {
    const json j = parse_json_text(read_text_file(path), path.string());
    GaState state;
    auto as_double = [](const json& v) {
        return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
    };
    try {
        state.generation = j.at("generation").get<int>();
        state.eval_count = j.at("eval_count").get<long long>();
        for (const auto& row : j.at("trace")) {
            state.trace.push_back({row.at(0).get<int>(), row.at(1).get<int>(),
                                   as_double(row.at(2)), as_double(row.at(3))});
        }
        for (const auto& jp : j.at("subpops")) {
            Subpop pop;
            for (const auto& ji : jp) {
                Individual ind;
                ind.fitness = ji.at("fitness").is_null()
                                  ? std::numeric_limits<double>::infinity()
                                  : ji.at("fitness").get<double>();
                ind.genome.genes = ji.at("genes").get<std::vector<double>>();
                pop.push_back(std::move(ind));
            }
            state.subpops.push_back(std::move(pop));
        }
    } catch (const json::exception& e) {
        throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
    }
    return state;
}

}  // namespace nsnet
