#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "nsnet/rng.hpp"

namespace nsnet {

// Row-major flattening of the feedback weight matrix.
struct Genome {
    std::vector<double> genes;
};

enum class MutationMode { uniform_redraw, gaussian };

struct ReevalStep {
    int from_generation = 0;
    int n_repeats = 1;
};

struct GaConfig {
    int n_subpopulations = 10;
    int subpop_size = 30;
    int genome_length = 100;
    double mutation_rate = 0.004;    // per gene
    double elitism_fraction = 0.15;  // parents copied unchanged
    double crossover_rate = 0.3;     // per gene, split equally between swap and average
    int migration_interval = 20;     // generations between ring exchanges
    double migration_fraction = 0.15;  // per neighbor
    int max_generations = 500;
    double gene_min = -1.0;
    double gene_max = 0.0;
    double init_low = -0.2;
    double init_high = 0.0;
    // Fitness averaging depth by generation; entries sorted by from_generation.
    // A single entry is a fixed evaluation policy (elite fitness then never
    // re-measured, so the best recorded value cannot worsen).
    std::vector<ReevalStep> reevaluation_schedule{{0, 1}, {100, 4}, {300, 8}};
    std::uint64_t master_seed = 1;
    MutationMode mutation_mode = MutationMode::uniform_redraw;
    double gaussian_sigma = 0.02;
    double selection_pressure = 2.0;  // linear ranking, 1.0 .. 2.0
    int n_threads = 1;

    void validate() const;
    int n_repeats_at(int generation) const;
    int n_elites() const;
};

struct Individual {
    Genome genome;
    double fitness = 0.0;
};

using Subpop = std::vector<Individual>;

struct GenStat {
    int generation = 0;
    int subpop = 0;
    double best = 0.0;
    double median = 0.0;
};

// Complete optimizer state between generations; what a checkpoint stores.
// Resuming from a GaState continues the run bit-exactly, including the
// accumulated fitness trace.
struct GaState {
    int generation = 0;
    std::vector<Subpop> subpops;
    std::vector<GenStat> trace;
    long long eval_count = 0;
};

struct GaRunReport {
    std::vector<GenStat> trace;  // one row per (generation, subpop)
    Genome best_genome;
    double best_fitness = 0.0;
    long long eval_count = 0;
    int generations_run = 0;
    double wall_seconds = 0.0;  // console diagnostics only, never serialized
};

// Lower fitness is better. Must be deterministic given (genome, seed, n_repeats).
using ObjectiveFn = std::function<double(const Genome&, std::uint64_t seed, int n_repeats)>;

// Invoked after every migration boundary; used by the harness to persist
// checkpoints.
using CheckpointSink = std::function<void(const GaState&)>;

std::vector<Subpop> init_population(const GaConfig& cfg);

// Stochastic universal sampling over linear-ranking probabilities (lower
// fitness = better; ties share their mean rank, so equal fitnesses select
// uniformly). Returned indices are in wheel order.
std::vector<int> sus_select(std::span<const double> fitnesses, int n_offspring,
                            double selection_pressure, Rng& rng);

// Per gene: swap with probability crossover_rate/2, replace both with the
// parents' mean with probability crossover_rate/2, else copy unchanged.
std::pair<Genome, Genome> crossover(const Genome& parent_a, const Genome& parent_b,
                                    const GaConfig& cfg, Rng& rng);

// Each gene independently redrawn (or Gaussian-perturbed) with probability
// mutation_rate; result clamped to [gene_min, gene_max].
Genome mutate(const Genome& genome, const GaConfig& cfg, Rng& rng);

// Ring migration: every subpopulation sends copies of ceil(migration_fraction
// * subpop_size) randomly selected individuals to each of its two neighbors;
// incoming migrants replace the worst residents. Sizes are preserved.
void migrate(std::vector<Subpop>& populations, const GaConfig& cfg, Rng& rng);

// Generational loop: evaluate, SUS-select, crossover, mutate, evaluate
// offspring, reassemble from elites + offspring, migrate on schedule. All
// randomness is derived from (master_seed, generation, subpopulation, slot),
// so runs are reproducible for any thread count and can resume from a
// checkpoint bit-exactly. Objective failures score +inf and the run continues.
GaRunReport run_ga(const GaConfig& cfg, const ObjectiveFn& objective,
                   const GaState* resume = nullptr, const CheckpointSink& on_checkpoint = {});

}  // namespace nsnet
