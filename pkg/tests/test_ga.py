import collections
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mutagen_ga import (
    ConfigError,
    Evaluator,
    GaConfig,
    Individual,
    InputDomain,
    TestCase,
    crossover,
    evaluate_fitness,
    mutate_genes,
    next_generation,
    random_test,
    select,
)

SQUARE8 = InputDomain.uniform(2, 1, 8)


class ScriptedRng:
    """Stands in for a Generator whose next integer draws are fixed."""

    def __init__(self, draws):
        self.draws = list(draws)

    def integers(self, low, high=None, size=None, endpoint=False):
        out = self.draws[:size]
        del self.draws[:size]
        return np.array(out)


def ind(genes, kill_set=()):
    return Individual(TestCase(genes), frozenset(kill_set))


# -- random_test --------------------------------------------------------------

def test_random_test_degenerate():
    rng = np.random.default_rng(0)
    d = InputDomain(((1, 1), (1, 1)))
    assert all(random_test(d, rng) == TestCase((1, 1)) for _ in range(20))


def test_random_test_seeded():
    a = random_test(SQUARE8, np.random.default_rng(123))
    b = random_test(SQUARE8, np.random.default_rng(123))
    assert a == b and SQUARE8.contains(a)


def test_random_test_uniform():
    rng = np.random.default_rng(2024)
    counts = collections.Counter(
        g for _ in range(10_000) for g in random_test(InputDomain(((1, 8),)), rng).genes
    )
    assert set(counts) == set(range(1, 9))
    for v in range(1, 9):
        assert abs(counts[v] / 10_000 - 0.125) <= 0.05


# -- fitness ------------------------------------------------------------------

def test_fitness_early_return(power, power_mutants):
    loop_site = [m for m in power_mutants if m.site.line >= 10]
    assert evaluate_fitness(TestCase((1, 5)), power, loop_site).fitness == 0


def test_fitness_paper_mutants(power, paper_mutants):
    i = evaluate_fitness(TestCase((2, 3)), power, paper_mutants)
    assert i.fitness == 2 and i.kill_set == {m.id for m in paper_mutants}


def test_fitness_no_mutants(power):
    assert evaluate_fitness(TestCase((2, 3)), power, []).fitness == 0


def test_evaluator_matches_direct(power, power_mutants):
    ev = Evaluator(power, power_mutants)
    tests = [TestCase(t) for t in itertools.product(range(1, 9), repeat=2)]
    batch = ev.evaluate(tests + tests[:5])
    assert ev.distinct_tests_evaluated == 64
    for individual in batch:
        direct = evaluate_fitness(individual.test, power, power_mutants)
        assert individual.kill_set == direct.kill_set
        assert individual.fitness == len(individual.kill_set) <= len(power_mutants)


# -- selection ----------------------------------------------------------------

def test_select_single():
    only = ind((3, 3), {1})
    assert select([only], 3, np.random.default_rng(0)) is only


def test_select_two_of_two_enumerated():
    pop = [ind((1, 1)), ind((2, 2), range(10))]
    draws = list(itertools.product(range(2), repeat=2))
    wins = sum(select(pop, 2, ScriptedRng(d)) is pop[1] for d in draws)
    assert wins / len(draws) == 0.75


def test_select_two_of_two_empirical():
    pop = [ind((1, 1)), ind((2, 2), range(10))]
    rng = np.random.default_rng(5)
    n = 20_000
    wins = sum(select(pop, 2, rng) is pop[1] for _ in range(n))
    assert abs(wins / n - 0.75) < 0.02


def test_select_tie_breaks():
    pop = [ind((5, 1), {0}), ind((2, 9), {1}), ind((2, 9), {2})]
    # equal fitness: lower genes first, then earlier index
    assert select(pop, 3, ScriptedRng([0, 2, 1])) is pop[1]
    assert select(pop, 2, ScriptedRng([0, 0])) is pop[0]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=8), st.integers(1, 8),
       st.integers(0, 2**32))
def test_select_dominance(fitnesses, k, seed):
    pop = [ind((i, 0), range(f)) for i, f in enumerate(fitnesses)]
    draws = np.random.default_rng(seed).integers(0, len(pop), size=k).tolist()
    winner = select(pop, k, ScriptedRng(draws))
    assert all(winner.fitness >= pop[i].fitness for i in draws)
    assert winner in [pop[i] for i in draws]


# -- crossover / gene mutation ---------------------------------------------

def test_crossover_single_point():
    rng = np.random.default_rng(1)
    assert crossover(TestCase((2, 3)), TestCase((5, 7)), rng) == (TestCase((2, 7)), TestCase((5, 3)))


def test_crossover_arity_one_and_rate_zero():
    rng = np.random.default_rng(1)
    a, b = TestCase((4,)), TestCase((9,))
    assert crossover(a, b, rng) == (a, b)
    c, d = TestCase((1, 2)), TestCase((3, 4))
    assert crossover(c, d, rng, rate=0.0) == (c, d)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.lists(st.integers(-50, 50), min_size=n, max_size=n),
    st.lists(st.integers(-50, 50), min_size=n, max_size=n))), st.integers(0, 2**32))
def test_crossover_preserves_positions(parents, seed):
    a, b = TestCase(parents[0]), TestCase(parents[1])
    c1, c2 = crossover(a, b, np.random.default_rng(seed))
    for i in range(len(a)):
        assert sorted((c1.genes[i], c2.genes[i])) == sorted((a.genes[i], b.genes[i]))


def test_mutate_genes_degenerate():
    rng = np.random.default_rng(0)
    t = TestCase((3, 4))
    assert mutate_genes(t, SQUARE8, 0.0, rng) == t
    five = TestCase((5, 5))
    assert mutate_genes(five, InputDomain(((5, 5), (5, 5))), 1.0, rng) == five


@settings(max_examples=200, deadline=None)
@given(st.tuples(st.integers(1, 8), st.integers(1, 8)), st.integers(0, 2**32))
def test_mutate_genes_bounds(genes, seed):
    out = mutate_genes(TestCase(genes), SQUARE8, 1.0, np.random.default_rng(seed))
    assert SQUARE8.contains(out)


# -- config -----------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    {"population_size": 5, "elitism_count": 5},
    {"population_size": 2, "tournament_size": 3},
    {"crossover_rate": 1.5},
    {"gene_mutation_rate": -0.1},
    {"target_score": 0.0},
    {"tournament_size": 0},
    {"fuel": 0},
    {"seed": -1},
])
def test_config_invariants(kwargs):
    with pytest.raises(ConfigError):
        GaConfig(**kwargs)


def test_config_defaults():
    c = GaConfig()
    assert (c.population_size, c.max_generations, c.crossover_rate, c.gene_mutation_rate,
            c.tournament_size, c.elitism_count) == (20, 100, 0.9, 0.1, 3, 1)
    assert (c.drop_threshold, c.target_score, c.best_fit_display_threshold) == (0.2, 1.0, 0.5)


def test_config_from_mapping():
    c = GaConfig.from_mapping({"population-size": "30", "seed": 7, "scan_equivalents": "auto",
                               "crossover_rate": "0.5"})
    assert (c.population_size, c.seed, c.scan_equivalents, c.crossover_rate) == (30, 7, None, 0.5)
    with pytest.raises(ConfigError):
        GaConfig.from_mapping({"bogus": 1})
    with pytest.raises(ConfigError):
        GaConfig.from_mapping({"population_size": 2.5})


# -- next_generation ----------------------------------------------------------

def _population(power, power_mutants, seed, size=20):
    rng = np.random.default_rng(seed)
    ev = Evaluator(power, power_mutants)
    return ev, rng, ev.evaluate([random_test(SQUARE8, rng) for _ in range(size)])


def test_next_generation_size_and_elite(power, power_mutants):
    ev, rng, pop = _population(power, power_mutants, 3)
    cfg = GaConfig(elitism_count=2, seed=3)
    nxt = next_generation(pop, cfg, SQUARE8, ev, rng)
    assert len(nxt) == cfg.population_size
    ranked = sorted(pop, key=lambda i: (-i.fitness, i.genes))
    assert nxt[:2] == ranked[:2]
    assert all(SQUARE8.contains(i.test) for i in nxt)


def test_next_generation_selection_only(power, power_mutants):
    ev, rng, pop = _population(power, power_mutants, 4)
    cfg = GaConfig(crossover_rate=0.0, gene_mutation_rate=0.0, elitism_count=0)
    parents = {i.test for i in pop}
    assert all(i.test in parents for i in next_generation(pop, cfg, SQUARE8, ev, rng))


def test_next_generation_deterministic(power, power_mutants):
    runs = []
    for _ in range(2):
        ev, rng, pop = _population(power, power_mutants, 11)
        for _ in range(5):
            pop = next_generation(pop, GaConfig(), SQUARE8, ev, rng)
        runs.append([i.test for i in pop])
    assert runs[0] == runs[1]


@pytest.mark.parametrize("seed", range(5))
def test_elitist_best_never_drops(power, power_mutants, seed):
    ev, rng, pop = _population(power, power_mutants, seed, size=6)
    cfg = GaConfig(population_size=6, elitism_count=1, gene_mutation_rate=0.5)
    best = max(i.fitness for i in pop)
    for _ in range(15):
        pop = next_generation(pop, cfg, SQUARE8, ev, rng)
        new_best = max(i.fitness for i in pop)
        assert new_best >= best
        best = new_best
