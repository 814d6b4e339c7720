"""Genetic algorithm over test cases.

A chromosome is one :class:`TestCase`; its genes are the program inputs.
An individual's fitness is the number of mutants its test kills.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .domain import InputDomain, TestCase
from .interp import DEFAULT_FUEL, ExecBudget
from .lang import Program
from .mutation import Mutant, build_kill_matrix, kills


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 20
    max_generations: int = 100
    crossover_rate: float = 0.9
    gene_mutation_rate: float = 0.1
    tournament_size: int = 3
    elitism_count: int = 1
    drop_threshold: float = 0.20
    target_score: float = 1.0
    best_fit_display_threshold: float = 0.50
    seed: int | None = None
    fuel: int = DEFAULT_FUEL
    # None: scan when the domain fits the execution cap
    scan_equivalents: bool | None = None

    def __post_init__(self):
        def need(ok, msg):
            if not ok:
                raise ConfigError(msg)

        need(self.population_size >= 1, "population_size must be positive")
        need(self.max_generations >= 0, "max_generations must be >= 0")
        for name in ("crossover_rate", "gene_mutation_rate", "drop_threshold"):
            need(0.0 <= getattr(self, name) <= 1.0, f"{name} must be in [0, 1]")
        need(0.0 <= self.best_fit_display_threshold <= 1.0,
             "best_fit_display_threshold must be in [0, 1]")
        need(0.0 < self.target_score <= 1.0, "target_score must be in (0, 1]")
        need(1 <= self.tournament_size <= self.population_size,
             "tournament_size must be in [1, population_size]")
        need(0 <= self.elitism_count < self.population_size,
             "elitism_count must be in [0, population_size)")
        need(self.fuel >= 1, "fuel must be positive")
        if self.seed is not None:
            need(0 <= self.seed < 2**64, "seed must be a 64-bit unsigned integer")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> GaConfig:
        """Build a config from loosely typed key/value pairs (config files, flags)."""
        known = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            name = key.replace("-", "_")
            if name not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[name] = _coerce(name, raw)
        try:
            return cls(**kwargs)
        except TypeError as exc:  # pragma: no cover
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_INT_FIELDS = {"population_size", "max_generations", "tournament_size",
               "elitism_count", "seed", "fuel"}


def _coerce(name: str, raw):
    try:
        if name == "scan_equivalents":
            if raw is None or isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ("auto", "none", "null"):
                return None
            if text in ("true", "1", "yes", "on"):
                return True
            if text in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if name == "seed" and raw is None:
            return None
        if name in _INT_FIELDS:
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError(raw)
            return int(raw)
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


@dataclass(frozen=True)
class Individual:
    test: TestCase
    kill_set: frozenset[int] = field(default_factory=frozenset)

    @property
    def fitness(self) -> int:
        return len(self.kill_set)

    @property
    def genes(self) -> tuple[int, ...]:
        return self.test.genes


def random_test(domain: InputDomain, rng: np.random.Generator) -> TestCase:
    """Draw each gene uniformly from its interval."""
    return TestCase(int(rng.integers(lo, hi, endpoint=True)) for lo, hi in domain.bounds)


def evaluate_fitness(
    test: TestCase,
    original: Program,
    mutants: Sequence[Mutant],
    budget: ExecBudget | None = None,
) -> Individual:
    kill_set = frozenset(m.id for m in mutants if kills(original, m, test, budget))
    return Individual(test, kill_set)


class Evaluator:
    """Batched, memoised fitness evaluation against a fixed mutant set.

    Executions are pure, so a test's kill set is computed at most once. New
    tests of a batch go through :func:`build_kill_matrix`, which may use a
    process pool.
    """

    def __init__(self, original: Program, mutants: Sequence[Mutant],
                 budget: ExecBudget | None = None, workers: int = 1):
        self.original = original
        self.mutants = list(mutants)
        self.budget = budget or ExecBudget()
        self.workers = workers
        self._cache: dict[tuple[int, ...], frozenset[int]] = {}

    def evaluate(self, tests: Sequence[TestCase]) -> list[Individual]:
        fresh = list(dict.fromkeys(t for t in tests if t.genes not in self._cache))
        if fresh:
            matrix = build_kill_matrix(
                self.original, self.mutants, fresh, self.budget, self.workers
            )
            for row, test in enumerate(fresh):
                self._cache[test.genes] = matrix.kill_set(row)
        return [Individual(t, self._cache[t.genes]) for t in tests]

    @property
    def distinct_tests_evaluated(self) -> int:
        return len(self._cache)


def _rank_key(ind: Individual, index: int):
    # higher fitness first, then lexicographically smaller genes, then position
    return (-ind.fitness, ind.genes, index)


def select(population: Sequence[Individual], k: int,
           rng: np.random.Generator) -> Individual:
    """Tournament selection: best of ``k`` uniform draws with replacement."""
    if not population:
        raise ValueError("cannot select from an empty population")
    picks = rng.integers(0, len(population), size=k)
    best = min(picks.tolist(), key=lambda i: _rank_key(population[i], i))
    return population[best]


def crossover(parent_a: TestCase, parent_b: TestCase, rng: np.random.Generator,
              rate: float = 1.0) -> tuple[TestCase, TestCase]:
    """Single-point crossover, applied with probability ``rate``.

    The cut is uniform over 1..arity-1; arity-1 parents come back unchanged.
    """
    if len(parent_a) != len(parent_b):
        raise ValueError("parents differ in arity")
    if rng.random() >= rate or len(parent_a) < 2:
        return parent_a, parent_b
    cut = int(rng.integers(1, len(parent_a)))
    a, b = parent_a.genes, parent_b.genes
    return TestCase(a[:cut] + b[cut:]), TestCase(b[:cut] + a[cut:])


def mutate_genes(test: TestCase, domain: InputDomain, rate: float,
                 rng: np.random.Generator) -> TestCase:
    """Redraw each gene from its interval with probability ``rate``."""
    genes = []
    for g, (lo, hi) in zip(test.genes, domain.bounds):
        if rng.random() < rate:
            g = int(rng.integers(lo, hi, endpoint=True))
        genes.append(g)
    return TestCase(genes)


def elites(population: Sequence[Individual], count: int) -> list[Individual]:
    order = sorted(range(len(population)), key=lambda i: _rank_key(population[i], i))
    return [population[i] for i in order[:count]]


def next_generation(
    population: Sequence[Individual],
    config: GaConfig,
    domain: InputDomain,
    evaluator: Evaluator,
    rng: np.random.Generator,
) -> list[Individual]:
    """Elites carried over unchanged, the rest bred by select/crossover/mutate."""
    if not population:
        raise ValueError("cannot breed an empty population")
    survivors = elites(population, config.elitism_count)
    children: list[TestCase] = []
    needed = config.population_size - len(survivors)
    while len(children) < needed:
        a = select(population, config.tournament_size, rng)
        b = select(population, config.tournament_size, rng)
        c1, c2 = crossover(a.test, b.test, rng, config.crossover_rate)
        for child in (c1, c2):
            children.append(mutate_genes(child, domain, config.gene_mutation_rate, rng))
    return survivors + evaluator.evaluate(children[:needed])
