#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "nsnet/errors.hpp"
#include "nsnet/evolve.hpp"
#include "nsnet/rng.hpp"

using namespace nsnet;

namespace {

GaConfig small_cfg() {
    GaConfig cfg;
    cfg.n_subpopulations = 4;
    cfg.subpop_size = 12;
    cfg.genome_length = 9;
    cfg.max_generations = 50;
    cfg.migration_interval = 10;
    cfg.reevaluation_schedule = {{0, 1}};
    cfg.master_seed = 7;
    return cfg;
}

// Deterministic toy objective: distance of the genes from the top of the
// gene range, ignoring the seed.
double sphere(const Genome& g, std::uint64_t, int) {
    double s = 0.0;
    for (double v : g.genes) s += v * v;
    return s;
}

double overall_best_at(const GaRunReport& report, int generation) {
    double best = 1e300;
    for (const auto& row : report.trace)
        if (row.generation == generation) best = std::min(best, row.best);
    return best;
}

double median_of_medians_at(const GaRunReport& report, int generation) {
    std::vector<double> meds;
    for (const auto& row : report.trace)
        if (row.generation == generation) meds.push_back(row.median);
    std::sort(meds.begin(), meds.end());
    return meds[meds.size() / 2];
}

}  // namespace

TEST_CASE("init_population respects range, size and seed") {
    auto cfg = small_cfg();
    const auto pops = init_population(cfg);
    REQUIRE(pops.size() == 4);
    for (const auto& pop : pops) {
        REQUIRE(pop.size() == 12);
        for (const auto& ind : pop) {
            REQUIRE(ind.genome.genes.size() == 9);
            for (double g : ind.genome.genes) {
                CHECK(g >= -0.2);
                CHECK(g <= 0.0);
            }
        }
    }
    const auto again = init_population(cfg);
    CHECK(pops[0][0].genome.genes == again[0][0].genome.genes);
    CHECK(pops[3][11].genome.genes == again[3][11].genome.genes);

    cfg.init_low = cfg.init_high = 0.0;
    const auto zeros = init_population(cfg);
    for (double g : zeros[0][0].genome.genes) CHECK(g == 0.0);
}

TEST_CASE("SUS with equal fitnesses spreads selections evenly") {
    const std::vector<double> fits(7, 3.5);
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng(seed);
        const auto sel = sus_select(fits, 10, 2.0, rng);
        REQUIRE(sel.size() == 10);
        std::map<int, int> counts;
        for (int i : sel) ++counts[i];
        for (const auto& [idx, c] : counts) {
            CHECK(c >= 1);  // floor(10/7)
            CHECK(c <= 2);  // ceil(10/7)
        }
    }
}

TEST_CASE("SUS splits fifty-fifty probabilities exactly") {
    const std::vector<double> fits = {1.0, 1.0};
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        Rng rng(seed);
        const auto sel = sus_select(fits, 4, 2.0, rng);
        CHECK(std::count(sel.begin(), sel.end(), 0) == 2);
        CHECK(std::count(sel.begin(), sel.end(), 1) == 2);
    }
}

TEST_CASE("SUS copy counts stay within the floor/ceil of expectations") {
    // Linear ranking at pressure 2 over 5 distinct fitnesses gives selection
    // probabilities {0.4, 0.3, 0.2, 0.1, 0} best-to-worst, so 10 offspring
    // must split exactly 4/3/2/1/0.
    const std::vector<double> fits = {5.0, 1.0, 3.0, 2.0, 4.0};  // best is index 1
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        Rng rng(seed);
        const auto sel = sus_select(fits, 10, 2.0, rng);
        CHECK(std::count(sel.begin(), sel.end(), 1) == 4);
        CHECK(std::count(sel.begin(), sel.end(), 3) == 3);
        CHECK(std::count(sel.begin(), sel.end(), 2) == 2);
        CHECK(std::count(sel.begin(), sel.end(), 4) == 1);
        CHECK(std::count(sel.begin(), sel.end(), 0) == 0);
    }
}

TEST_CASE("crossover: zero rate copies parents unchanged") {
    auto cfg = small_cfg();
    cfg.crossover_rate = 0.0;
    Rng rng(5);
    const Genome a{{-0.1, -0.2, -0.05}};
    const Genome b{{0.0, -0.15, -0.12}};
    const auto [ca, cb] = crossover(a, b, cfg, rng);
    CHECK(ca.genes == a.genes);
    CHECK(cb.genes == b.genes);
}

TEST_CASE("crossover: identical parents are fixed points") {
    auto cfg = small_cfg();
    cfg.crossover_rate = 1.0;
    Rng rng(9);
    const Genome a{std::vector<double>(50, -0.07)};
    const auto [ca, cb] = crossover(a, a, cfg, rng);
    CHECK(ca.genes == a.genes);
    CHECK(cb.genes == a.genes);
}

TEST_CASE("crossover: genes swap or average, never anything else") {
    auto cfg = small_cfg();
    cfg.crossover_rate = 0.3;
    const Genome a{std::vector<double>(400, -0.2)};
    const Genome b{std::vector<double>(400, 0.0)};
    Rng rng(13);
    const auto [ca, cb] = crossover(a, b, cfg, rng);
    int averaged = 0, swapped_or_copied = 0;
    for (std::size_t k = 0; k < 400; ++k) {
        const double x = ca.genes[k], y = cb.genes[k];
        if (x == -0.1 && y == -0.1) {
            ++averaged;  // forced average mode hit: both midpoints
        } else {
            // swap and plain copy are indistinguishable for constant parents
            CHECK(((x == -0.2 && y == 0.0) || (x == 0.0 && y == -0.2)));
            ++swapped_or_copied;
        }
    }
    CHECK(averaged > 20);  // ~15% of 400
    CHECK(averaged < 100);
    CHECK(averaged + swapped_or_copied == 400);
}

TEST_CASE("crossover swap mode exchanges gene values") {
    auto cfg = small_cfg();
    cfg.crossover_rate = 1.0;  // every gene swaps or averages
    const std::size_t n = 200;
    std::vector<double> av(n), bv(n);
    for (std::size_t k = 0; k < n; ++k) {
        av[k] = -0.001 * static_cast<double>(k);
        bv[k] = -0.9 + 0.001 * static_cast<double>(k);
    }
    Rng rng(21);
    const auto [ca, cb] = crossover(Genome{av}, Genome{bv}, cfg, rng);
    int swaps = 0, averages = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double mean = 0.5 * (av[k] + bv[k]);
        if (ca.genes[k] == bv[k] && cb.genes[k] == av[k]) {
            ++swaps;
        } else {
            REQUIRE(ca.genes[k] == mean);
            REQUIRE(cb.genes[k] == mean);
            ++averages;
        }
    }
    CHECK(swaps + averages == static_cast<int>(n));
    CHECK(swaps > 60);
    CHECK(averages > 60);
}

TEST_CASE("mutation: zero rate is the identity") {
    auto cfg = small_cfg();
    cfg.mutation_rate = 0.0;
    Rng rng(3);
    const Genome g{{-0.1, -0.05, 0.0}};
    CHECK(mutate(g, cfg, rng).genes == g.genes);
}

TEST_CASE("mutation: rate one redraws within bounds") {
    auto cfg = small_cfg();
    cfg.mutation_rate = 1.0;
    Rng rng(4);
    const Genome g{std::vector<double>(100, -0.5)};
    const auto m = mutate(g, cfg, rng);
    int changed = 0;
    for (std::size_t k = 0; k < 100; ++k) {
        CHECK(m.genes[k] >= cfg.gene_min);
        CHECK(m.genes[k] <= cfg.gene_max);
        if (m.genes[k] != g.genes[k]) ++changed;
    }
    CHECK(changed > 95);
}

TEST_CASE("mutation count follows the per-gene rate") {
    auto cfg = small_cfg();
    cfg.mutation_rate = 0.004;
    const Genome g{std::vector<double>(10000, -0.5)};
    Rng rng(77);
    const auto m = mutate(g, cfg, rng);
    int changed = 0;
    for (std::size_t k = 0; k < g.genes.size(); ++k)
        if (m.genes[k] != g.genes[k]) ++changed;
    CHECK(changed >= 20);  // 40 +/- 20 expected at rate 0.004
    CHECK(changed <= 60);
}

TEST_CASE("gaussian mutation perturbs locally and clamps") {
    auto cfg = small_cfg();
    cfg.mutation_mode = MutationMode::gaussian;
    cfg.mutation_rate = 1.0;
    cfg.gaussian_sigma = 0.02;
    Rng rng(5);
    const Genome g{std::vector<double>(200, -0.01)};
    const auto m = mutate(g, cfg, rng);
    for (double v : m.genes) {
        CHECK(v >= cfg.gene_min);
        CHECK(v <= cfg.gene_max);
        CHECK(std::abs(v - (-0.01)) < 0.15);  // a few sigma, after clamping
    }
}

TEST_CASE("migration swaps copies along the ring and preserves sizes") {
    auto cfg = small_cfg();
    cfg.n_subpopulations = 10;
    cfg.subpop_size = 30;
    cfg.migration_fraction = 0.15;  // ceil(4.5) = 5 per neighbor

    // Mark individuals so sources can be identified; give subpop s fitness
    // band s so "worst" is unambiguous.
    std::vector<Subpop> pops(10);
    for (int s = 0; s < 10; ++s) {
        pops[static_cast<std::size_t>(s)].resize(30);
        for (int i = 0; i < 30; ++i) {
            auto& ind = pops[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)];
            ind.genome.genes = {static_cast<double>(s), static_cast<double>(i)};
            ind.fitness = static_cast<double>(i);  // index 29 is the worst
        }
    }
    const auto before = pops;
    Rng rng(31);
    migrate(pops, cfg, rng);

    for (int s = 0; s < 10; ++s) {
        const auto& pop = pops[static_cast<std::size_t>(s)];
        REQUIRE(pop.size() == 30);
        int incoming = 0;
        std::set<int> sources;
        for (const auto& ind : pop) {
            const int src = static_cast<int>(ind.genome.genes[0]);
            if (src != s) {
                ++incoming;
                sources.insert(src);
            }
        }
        CHECK(incoming == 10);  // 5 from each neighbor
        for (int src : sources)
            CHECK(((src == (s + 1) % 10) || (src == (s + 9) % 10)));
        // The best twenty residents survive untouched.
        for (int i = 0; i < 20; ++i)
            CHECK(pop[static_cast<std::size_t>(i)].genome.genes ==
                  before[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)].genome.genes);
    }
}

TEST_CASE("migration with two subpopulations keeps sizes") {
    auto cfg = small_cfg();
    cfg.n_subpopulations = 2;
    cfg.subpop_size = 6;
    cfg.migration_fraction = 0.15;  // 1 per neighbor, both neighbors are the other pop
    std::vector<Subpop> pops(2);
    for (int s = 0; s < 2; ++s) {
        pops[static_cast<std::size_t>(s)].resize(6);
        for (int i = 0; i < 6; ++i) {
            pops[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)].genome.genes = {
                static_cast<double>(s)};
            pops[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)].fitness = i;
        }
    }
    Rng rng(3);
    migrate(pops, cfg, rng);
    for (const auto& pop : pops) REQUIRE(pop.size() == 6);
    int crossed = 0;
    for (int s = 0; s < 2; ++s)
        for (const auto& ind : pops[static_cast<std::size_t>(s)])
            if (static_cast<int>(ind.genome.genes[0]) != s) ++crossed;
    CHECK(crossed == 4);  // 2 into each side
}

TEST_CASE("zero migration fraction changes nothing") {
    auto cfg = small_cfg();
    cfg.migration_fraction = 0.0;
    auto pops = init_population(cfg);
    for (auto& pop : pops)
        for (auto& ind : pop) ind.fitness = sphere(ind.genome, 0, 1);
    const auto before = pops;
    Rng rng(8);
    migrate(pops, cfg, rng);
    for (std::size_t s = 0; s < pops.size(); ++s)
        for (std::size_t i = 0; i < pops[s].size(); ++i)
            CHECK(pops[s][i].genome.genes == before[s][i].genome.genes);
}

TEST_CASE("run_ga converges on the sphere objective") {
    const auto cfg = small_cfg();
    bool in_bounds = true;
    ObjectiveFn objective = [&](const Genome& g, std::uint64_t seed, int n) {
        for (double v : g.genes)
            if (v < cfg.gene_min || v > cfg.gene_max) in_bounds = false;
        return sphere(g, seed, n);
    };
    const auto report = run_ga(cfg, objective);
    CHECK(in_bounds);
    CHECK(report.generations_run == 50);
    const double gen0_median = median_of_medians_at(report, 0);
    CHECK(report.best_fitness <= 0.1 * gen0_median);

    // Elite fitness never worsens under the fixed evaluation policy.
    double prev = 1e300;
    for (int g = 0; g <= 50; ++g) {
        const double b = overall_best_at(report, g);
        CHECK(b <= prev + 1e-15);
        prev = b;
    }
    CHECK(report.best_genome.genes.size() == 9);
    CHECK(report.eval_count == 4 * 12 + 50 * 4 * 10);  // init + offspring per generation
}

TEST_CASE("full elitism freezes the population") {
    auto cfg = small_cfg();
    cfg.elitism_fraction = 1.0;
    cfg.max_generations = 8;
    const auto report = run_ga(cfg, sphere);
    const double b0 = overall_best_at(report, 0);
    const double m0 = median_of_medians_at(report, 0);
    for (int g = 1; g <= 8; ++g) {
        CHECK(overall_best_at(report, g) == b0);
        CHECK(median_of_medians_at(report, g) == m0);
    }
}

TEST_CASE("serial and threaded runs produce identical reports") {
    auto cfg = small_cfg();
    cfg.max_generations = 12;
    const auto serial = run_ga(cfg, sphere);
    cfg.n_threads = 4;
    const auto threaded = run_ga(cfg, sphere);
    REQUIRE(serial.trace.size() == threaded.trace.size());
    for (std::size_t i = 0; i < serial.trace.size(); ++i) {
        CHECK(serial.trace[i].best == threaded.trace[i].best);
        CHECK(serial.trace[i].median == threaded.trace[i].median);
    }
    CHECK(serial.best_fitness == threaded.best_fitness);
    CHECK(serial.best_genome.genes == threaded.best_genome.genes);
    CHECK(serial.eval_count == threaded.eval_count);
}

TEST_CASE("a checkpointed run continues exactly like an uninterrupted one") {
    auto cfg = small_cfg();
    cfg.max_generations = 30;
    GaState snapshot;
    bool have_snapshot = false;
    CheckpointSink sink = [&](const GaState& state) {
        if (state.generation == 20) {
            snapshot = state;
            have_snapshot = true;
        }
    };
    const auto full = run_ga(cfg, sphere, nullptr, sink);
    REQUIRE(have_snapshot);

    const auto resumed = run_ga(cfg, sphere, &snapshot);
    REQUIRE(resumed.trace.size() == full.trace.size());
    for (std::size_t i = 0; i < full.trace.size(); ++i) {
        CHECK(resumed.trace[i].generation == full.trace[i].generation);
        CHECK(resumed.trace[i].best == full.trace[i].best);
        CHECK(resumed.trace[i].median == full.trace[i].median);
    }
    CHECK(resumed.best_fitness == full.best_fitness);
    CHECK(resumed.best_genome.genes == full.best_genome.genes);
}

TEST_CASE("the reevaluation schedule deepens averaging and re-measures parents") {
    auto cfg = small_cfg();
    cfg.n_subpopulations = 2;
    cfg.subpop_size = 6;
    cfg.max_generations = 5;
    cfg.reevaluation_schedule = {{0, 1}, {3, 4}};
    std::set<int> repeats_seen;
    ObjectiveFn objective = [&](const Genome& g, std::uint64_t seed, int n) {
        repeats_seen.insert(n);
        return sphere(g, seed, n);
    };
    const auto report = run_ga(cfg, objective);
    CHECK(repeats_seen == std::set<int>{1, 4});
    // init 12 + 3 generations x 10 offspring + full re-eval of 12 at g=3
    // + 2 more generations x 10 offspring.
    CHECK(report.eval_count == 12 + 3 * 10 + 12 + 2 * 10);
}

TEST_CASE("objective failures score worst case and the run continues") {
    auto cfg = small_cfg();
    cfg.max_generations = 6;
    ObjectiveFn objective = [](const Genome& g, std::uint64_t, int) {
        if (g.genes[0] < -0.1) throw std::runtime_error("boom");
        return -g.genes[0];
    };
    const auto report = run_ga(cfg, objective);
    CHECK(report.generations_run == 6);
    CHECK(std::isfinite(report.best_fitness));
}

TEST_CASE("max_generations zero reports the initial population only") {
    auto cfg = small_cfg();
    cfg.max_generations = 0;
    const auto report = run_ga(cfg, sphere);
    CHECK(report.generations_run == 0);
    CHECK(report.eval_count == 4 * 12);
    CHECK(report.trace.size() == 4);  // one row per subpop, generation 0
    CHECK(std::isfinite(report.best_fitness));
}

TEST_CASE("config validation rejects bad settings") {
    auto cfg = small_cfg();
    cfg.subpop_size = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.mutation_rate = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.init_low = -2.0;  // outside gene bounds
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.reevaluation_schedule = {{5, 1}};  // must start at 0
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.reevaluation_schedule = {{0, 1}, {0, 2}};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("n_repeats_at follows the schedule") {
    auto cfg = small_cfg();
    cfg.reevaluation_schedule = {{0, 1}, {100, 4}, {300, 8}};
    CHECK(cfg.n_repeats_at(0) == 1);
    CHECK(cfg.n_repeats_at(99) == 1);
    CHECK(cfg.n_repeats_at(100) == 4);
    CHECK(cfg.n_repeats_at(299) == 4);
    CHECK(cfg.n_repeats_at(300) == 8);
    CHECK(cfg.n_repeats_at(1000) == 8);
}

TEST_CASE("elite count rounds half away from zero") {
    auto cfg = small_cfg();
    cfg.subpop_size = 30;
    cfg.elitism_fraction = 0.15;
    CHECK(cfg.n_elites() == 5);  // lround(4.5)
    cfg.subpop_size = 12;
    CHECK(cfg.n_elites() == 2);
}
