#include "nsnet/evolve.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "nsnet/errors.hpp"

namespace nsnet {
namespace {

// Salt values separating the derived random streams.
enum SeedTag : std::uint64_t {
    kTagInit = 1,
    kTagEval = 2,
    kTagSelect = 3,
    kTagCross = 4,
    kTagMutate = 5,
    kTagMigrate = 6,
};

constexpr double kInf = std::numeric_limits<double>::infinity();

struct EvalJob {
    const Genome* genome = nullptr;
    std::uint64_t seed = 0;
    double* out = nullptr;
};

void evaluate_jobs(std::vector<EvalJob>& jobs, const ObjectiveFn& objective,
                   int n_repeats, int n_threads) {
    auto work = [&](std::size_t i) {
        try {
            *jobs[i].out = objective(*jobs[i].genome, jobs[i].seed, n_repeats);
        } catch (...) {
            *jobs[i].out = kInf;
        }
    };
    const int threads = std::min<int>(n_threads, static_cast<int>(jobs.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                work(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void record_stats(GaState& state, int generation) {
    for (std::size_t s = 0; s < state.subpops.size(); ++s) {
        std::vector<double> fits;
        fits.reserve(state.subpops[s].size());
        double best = kInf;
        for (const auto& ind : state.subpops[s]) {
            fits.push_back(ind.fitness);
            best = std::min(best, ind.fitness);
        }
        state.trace.push_back({generation, static_cast<int>(s), best, median_of(std::move(fits))});
    }
}

// Indices of the n_elites best individuals, ties broken by index.
std::vector<std::size_t> elite_indices(const Subpop& pop, int n_elites) {
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return pop[a].fitness < pop[b].fitness;
    });
    idx.resize(static_cast<std::size_t>(std::min<int>(n_elites, static_cast<int>(pop.size()))));
    return idx;
}

void fisher_yates_shuffle(std::vector<int>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.below(static_cast<std::uint32_t>(i))]);
}

}  // namespace

void GaConfig::validate() const {
    if (n_subpopulations < 1) throw ConfigError("ga.n_subpopulations must be >= 1");
    if (subpop_size < 2) throw ConfigError("ga.subpop_size must be >= 2");
    if (genome_length < 1) throw ConfigError("ga.genome_length must be >= 1");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
        throw ConfigError("ga.mutation_rate must be in [0, 1]");
    if (elitism_fraction < 0.0 || elitism_fraction > 1.0)
        throw ConfigError("ga.elitism_fraction must be in [0, 1]");
    if (crossover_rate < 0.0 || crossover_rate > 1.0)
        throw ConfigError("ga.crossover_rate must be in [0, 1]");
    if (migration_fraction < 0.0 || migration_fraction > 1.0)
        throw ConfigError("ga.migration_fraction must be in [0, 1]");
    if (migration_interval < 1) throw ConfigError("ga.migration_interval must be >= 1");
    if (max_generations < 0) throw ConfigError("ga.max_generations must be >= 0");
    if (gene_min > gene_max) throw ConfigError("ga.gene_min must be <= ga.gene_max");
    if (init_low > init_high) throw ConfigError("ga.init_low must be <= ga.init_high");
    if (init_low < gene_min || init_high > gene_max)
        throw ConfigError("ga.init range must lie inside [gene_min, gene_max]");
    if (selection_pressure < 1.0 || selection_pressure > 2.0)
        throw ConfigError("ga.selection_pressure must be in [1, 2]");
    if (reevaluation_schedule.empty())
        throw ConfigError("ga.reevaluation_schedule must not be empty");
    int prev = -1;
    for (const auto& step : reevaluation_schedule) {
        if (step.from_generation <= prev)
            throw ConfigError("ga.reevaluation_schedule must be strictly increasing in from_generation");
        if (step.n_repeats < 1) throw ConfigError("ga.reevaluation_schedule n_repeats must be >= 1");
        prev = step.from_generation;
    }
    if (reevaluation_schedule.front().from_generation != 0)
        throw ConfigError("ga.reevaluation_schedule must start at generation 0");
    if (n_threads < 0) throw ConfigError("ga.n_threads must be >= 0");
}

int GaConfig::n_repeats_at(int generation) const {
    int r = reevaluation_schedule.front().n_repeats;
    for (const auto& step : reevaluation_schedule) {
        if (generation >= step.from_generation) r = step.n_repeats;
    }
    return r;
}

int GaConfig::n_elites() const {
    const long n = std::lround(elitism_fraction * subpop_size);
    return static_cast<int>(std::clamp<long>(n, 0, subpop_size));
}

std::vector<Subpop> init_population(const GaConfig& cfg) {
    cfg.validate();
    Rng rng(derive_seed({cfg.master_seed, kTagInit}));
    std::vector<Subpop> pops(static_cast<std::size_t>(cfg.n_subpopulations));
    for (auto& pop : pops) {
        pop.resize(static_cast<std::size_t>(cfg.subpop_size));
        for (auto& ind : pop) {
            ind.genome.genes.resize(static_cast<std::size_t>(cfg.genome_length));
            for (auto& g : ind.genome.genes) g = rng.uniform(cfg.init_low, cfg.init_high);
            ind.fitness = kInf;
        }
    }
    return pops;
}

std::vector<int> sus_select(std::span<const double> fitnesses, int n_offspring,
                            double selection_pressure, Rng& rng) {
    const std::size_t n = fitnesses.size();
    if (n == 0 || n_offspring <= 0) return {};

    // Fractional ranks, worst = 0. Ties share their mean rank so equal
    // fitnesses get equal selection probability.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return fitnesses[a] > fitnesses[b];
    });
    std::vector<double> rank(n, 0.0);
    std::size_t pos = 0;
    while (pos < n) {
        std::size_t end = pos + 1;
        while (end < n && fitnesses[order[end]] == fitnesses[order[pos]]) ++end;
        const double mean_rank = 0.5 * static_cast<double>(pos + end - 1);
        for (std::size_t k = pos; k < end; ++k) rank[order[k]] = mean_rank;
        pos = end;
    }

    std::vector<double> prob(n);
    if (n == 1) {
        prob[0] = 1.0;
    } else {
        const double sp = selection_pressure;
        for (std::size_t i = 0; i < n; ++i)
            prob[i] = ((2.0 - sp) + 2.0 * (sp - 1.0) * rank[i] / static_cast<double>(n - 1)) /
                      static_cast<double>(n);
    }

    // One spin, n_offspring equally spaced pointers.
    const double step = 1.0 / static_cast<double>(n_offspring);
    double pointer = rng.uniform01() * step;
    std::vector<int> selected;
    selected.reserve(static_cast<std::size_t>(n_offspring));
    std::size_t i = 0;
    double cum = prob[0];
    for (int k = 0; k < n_offspring; ++k) {
        while (pointer >= cum && i + 1 < n) cum += prob[++i];
        selected.push_back(static_cast<int>(i));
        pointer += step;
    }
    return selected;
}

std::pair<Genome, Genome> crossover(const Genome& parent_a, const Genome& parent_b,
                                    const GaConfig& cfg, Rng& rng) {
    if (parent_a.genes.size() != parent_b.genes.size())
        throw ConfigError("crossover: genome lengths differ");
    Genome a = parent_a;
    Genome b = parent_b;
    const double half = cfg.crossover_rate * 0.5;
    for (std::size_t k = 0; k < a.genes.size(); ++k) {
        const double r = rng.uniform01();
        if (r < half) {
            std::swap(a.genes[k], b.genes[k]);
        } else if (r < cfg.crossover_rate) {
            const double mean = 0.5 * (a.genes[k] + b.genes[k]);
            a.genes[k] = mean;
            b.genes[k] = mean;
        }
    }
    return {std::move(a), std::move(b)};
}

Genome mutate(const Genome& genome, const GaConfig& cfg, Rng& rng) {
    Genome out = genome;
    for (auto& g : out.genes) {
        if (rng.uniform01() >= cfg.mutation_rate) continue;
        if (cfg.mutation_mode == MutationMode::uniform_redraw)
            g = rng.uniform(cfg.gene_min, cfg.gene_max);
        else
            g = std::clamp(g + rng.gaussian(0.0, cfg.gaussian_sigma), cfg.gene_min, cfg.gene_max);
    }
    return out;
}

void migrate(std::vector<Subpop>& populations, const GaConfig& cfg, Rng& rng) {
    const std::size_t n_pops = populations.size();
    if (n_pops < 2 || cfg.migration_fraction <= 0.0) return;
    const int m = std::min<int>(
        static_cast<int>(std::ceil(cfg.migration_fraction * cfg.subpop_size)), cfg.subpop_size);
    if (m == 0) return;

    // Select all outgoing migrants from the pre-migration populations first,
    // then apply replacements, so the exchange is synchronous.
    std::vector<std::vector<Individual>> incoming(n_pops);
    for (std::size_t s = 0; s < n_pops; ++s) {
        const std::size_t neighbors[2] = {(s + n_pops - 1) % n_pops, (s + 1) % n_pops};
        for (std::size_t d : neighbors) {
            std::vector<int> idx(populations[s].size());
            std::iota(idx.begin(), idx.end(), 0);
            for (int k = 0; k < m; ++k) {
                const std::size_t remaining = idx.size() - static_cast<std::size_t>(k);
                const std::size_t pick =
                    static_cast<std::size_t>(k) + rng.below(static_cast<std::uint32_t>(remaining));
                std::swap(idx[static_cast<std::size_t>(k)], idx[pick]);
                incoming[d].push_back(populations[s][static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])]);
            }
        }
    }
    for (std::size_t s = 0; s < n_pops; ++s) {
        Subpop& pop = populations[s];
        std::vector<std::size_t> order(pop.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pop[a].fitness > pop[b].fitness;  // worst first
        });
        const std::size_t n_replace = std::min(incoming[s].size(), pop.size());
        for (std::size_t k = 0; k < n_replace; ++k) pop[order[k]] = std::move(incoming[s][k]);
    }
}

GaRunReport run_ga(const GaConfig& cfg, const ObjectiveFn& objective, const GaState* resume,
                   const CheckpointSink& on_checkpoint) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();

    GaState state;
    if (resume != nullptr) {
        state = *resume;
    } else {
        state.subpops = init_population(cfg);
    }
    const std::size_t n_pops = state.subpops.size();
    const int n_el = cfg.n_elites();
    const int n_off = cfg.subpop_size - n_el;

    auto eval_seed = [&](int generation, std::size_t subpop, int slot) {
        return derive_seed({cfg.master_seed, kTagEval, static_cast<std::uint64_t>(generation),
                            static_cast<std::uint64_t>(subpop), static_cast<std::uint64_t>(slot)});
    };

    auto evaluate_population = [&](int generation) {
        std::vector<EvalJob> jobs;
        for (std::size_t s = 0; s < n_pops; ++s)
            for (std::size_t i = 0; i < state.subpops[s].size(); ++i)
                jobs.push_back({&state.subpops[s][i].genome, eval_seed(generation, s, static_cast<int>(i)),
                                &state.subpops[s][i].fitness});
        evaluate_jobs(jobs, objective, cfg.n_repeats_at(generation), cfg.n_threads);
        state.eval_count += static_cast<long long>(jobs.size());
    };

    if (resume == nullptr) {
        evaluate_population(0);
        record_stats(state, 0);
    }

    for (int g = state.generation; g < cfg.max_generations; ++g) {
        // Fitness values carry over between generations; the whole population
        // is re-measured only when the schedule deepens the averaging.
        if (g > 0 && cfg.n_repeats_at(g) != cfg.n_repeats_at(g - 1)) evaluate_population(g);

        std::vector<Subpop> next(n_pops);
        std::vector<std::vector<Genome>> offspring(n_pops);
        std::vector<std::vector<double>> offspring_fitness(n_pops);
        std::vector<EvalJob> jobs;

        for (std::size_t s = 0; s < n_pops; ++s) {
            const Subpop& pop = state.subpops[s];
            std::vector<double> fits;
            fits.reserve(pop.size());
            for (const auto& ind : pop) fits.push_back(ind.fitness);

            Rng sel_rng(derive_seed({cfg.master_seed, kTagSelect, static_cast<std::uint64_t>(g),
                                     static_cast<std::uint64_t>(s)}));
            const int n_parents = n_off % 2 == 0 ? n_off : n_off + 1;
            std::vector<int> parents = sus_select(fits, n_parents, cfg.selection_pressure, sel_rng);
            fisher_yates_shuffle(parents, sel_rng);

            Rng cross_rng(derive_seed({cfg.master_seed, kTagCross, static_cast<std::uint64_t>(g),
                                       static_cast<std::uint64_t>(s)}));
            Rng mut_rng(derive_seed({cfg.master_seed, kTagMutate, static_cast<std::uint64_t>(g),
                                     static_cast<std::uint64_t>(s)}));
            auto& kids = offspring[s];
            kids.reserve(static_cast<std::size_t>(n_parents));
            for (int k = 0; k + 1 < n_parents; k += 2) {
                auto [a, b] = crossover(pop[static_cast<std::size_t>(parents[static_cast<std::size_t>(k)])].genome,
                                        pop[static_cast<std::size_t>(parents[static_cast<std::size_t>(k + 1)])].genome,
                                        cfg, cross_rng);
                kids.push_back(mutate(a, cfg, mut_rng));
                kids.push_back(mutate(b, cfg, mut_rng));
            }
            kids.resize(static_cast<std::size_t>(n_off));
            offspring_fitness[s].assign(static_cast<std::size_t>(n_off), kInf);
            for (int k = 0; k < n_off; ++k)
                jobs.push_back({&kids[static_cast<std::size_t>(k)],
                                eval_seed(g, s, cfg.subpop_size + k),
                                &offspring_fitness[s][static_cast<std::size_t>(k)]});
        }

        evaluate_jobs(jobs, objective, cfg.n_repeats_at(g), cfg.n_threads);
        state.eval_count += static_cast<long long>(jobs.size());

        for (std::size_t s = 0; s < n_pops; ++s) {
            Subpop& dst = next[s];
            dst.reserve(static_cast<std::size_t>(cfg.subpop_size));
            for (std::size_t e : elite_indices(state.subpops[s], n_el))
                dst.push_back(std::move(state.subpops[s][e]));
            for (int k = 0; k < n_off; ++k)
                dst.push_back({std::move(offspring[s][static_cast<std::size_t>(k)]),
                               offspring_fitness[s][static_cast<std::size_t>(k)]});
        }
        state.subpops = std::move(next);
        state.generation = g + 1;

        if (state.generation % cfg.migration_interval == 0) {
            Rng mig_rng(derive_seed({cfg.master_seed, kTagMigrate,
                                     static_cast<std::uint64_t>(state.generation)}));
            migrate(state.subpops, cfg, mig_rng);
        }
        record_stats(state, state.generation);
        if (on_checkpoint && state.generation % cfg.migration_interval == 0) on_checkpoint(state);
    }

    GaRunReport report;
    report.trace = std::move(state.trace);
    report.eval_count = state.eval_count;
    report.generations_run = state.generation;
    report.best_fitness = kInf;
    for (const auto& pop : state.subpops) {
        for (const auto& ind : pop) {
            if (ind.fitness < report.best_fitness) {
                report.best_fitness = ind.fitness;
                report.best_genome = ind.genome;
            }
        }
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

}  // namespace nsnet
