"""Suite scoring, the drop-threshold refinement and the outer optimisation loop."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .domain import InputDomain, TestCase
from .ga import Evaluator, GaConfig, Individual, next_generation, random_test
from .interp import ExecBudget
from .lang import Program
from .mutation import (
    ALL_OPERATORS,
    DEFAULT_SCAN_CAP,
    MutationOperator,
    equivalent_mutant_scan,
    generate_mutants,
)


class NoMutants(ValueError):
    """The mutation score is undefined without mutants."""


def as_fraction(x) -> Fraction:
    # via str so that 0.2 means exactly 1/5
    return x if isinstance(x, Fraction) else Fraction(str(x))


@dataclass(frozen=True)
class Suite:
    individuals: tuple[Individual, ...]
    total_mutants: int

    def __post_init__(self):
        object.__setattr__(self, "individuals", tuple(self.individuals))

    @property
    def tests(self) -> list[TestCase]:
        """Distinct tests, in order of first appearance."""
        return list(dict.fromkeys(ind.test for ind in self.individuals))

    def ratios(self) -> list[Fraction]:
        if self.total_mutants < 1:
            raise NoMutants("suite has no mutants to score against")
        return [Fraction(ind.fitness, self.total_mutants) for ind in self.individuals]

    def killed(self) -> frozenset[int]:
        return frozenset().union(*(ind.kill_set for ind in self.individuals))

    def score(self) -> Fraction:
        return mutation_score(self, self.total_mutants)


def mutation_score(suite: Suite | Iterable[Iterable[int]], total_mutants: int) -> Fraction:
    """Killed mutants over total mutants.

    ``suite`` is a :class:`Suite` or any iterable of per-test kill sets;
    duplicates count once.
    """
    if total_mutants < 1:
        raise NoMutants("mutation score is undefined for zero mutants")
    if isinstance(suite, Suite):
        killed = suite.killed()
    else:
        killed = frozenset().union(*map(frozenset, suite))
    return Fraction(len(killed), total_mutants)


def refine_suite(suite: Suite, drop_threshold: float = 0.20) -> Suite:
    """Drop every test whose own kill ratio is at or below ``drop_threshold``.

    Never returns an empty suite: if everything would go, the best test
    (lowest genes on ties) is kept.
    """
    threshold = as_fraction(drop_threshold)
    if not 0 <= threshold <= 1:
        raise ValueError("drop_threshold must be in [0, 1]")
    if not suite.individuals:
        return suite
    kept = [ind for ind, r in zip(suite.individuals, suite.ratios()) if r > threshold]
    if not kept:
        kept = [min(suite.individuals, key=lambda ind: (-ind.fitness, ind.genes))]
    return Suite(tuple(kept), suite.total_mutants)


HISTORY_FIELDS = ("generation", "best_fitness", "suite_score", "mean_fitness")


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: int
    suite_score: float
    mean_fitness: float


@dataclass(frozen=True)
class RunReport:
    program: str
    total_mutants: int
    generations_run: int
    final_score: Fraction
    best_fit_flag: bool
    killed_mutant_ids: frozenset[int]
    surviving_mutant_ids: frozenset[int]
    equivalent_mutant_ids: frozenset[int] | None
    final_suite: tuple[TestCase, ...]
    per_generation_history: tuple[GenerationStats, ...]
    config_echo: GaConfig
    seed: int
    operators: tuple[str, ...]
    domain: str
    target_score: Fraction = field(default=Fraction(1))

    @property
    def achievable_score(self) -> Fraction | None:
        if self.equivalent_mutant_ids is None:
            return None
        return Fraction(self.total_mutants - len(self.equivalent_mutant_ids),
                        self.total_mutants)

    @property
    def reached_target(self) -> bool:
        """Score at the target, or at the kill-able maximum when that is known."""
        achievable = self.achievable_score
        return self.final_score >= self.target_score or (
            achievable is not None and self.final_score >= achievable
        )

    def to_dict(self) -> dict:
        achievable = self.achievable_score
        return {
            "program": self.program,
            "total_mutants": self.total_mutants,
            "generations_run": self.generations_run,
            "final_score": float(self.final_score),
            "final_score_exact": str(self.final_score),
            "achievable_score": None if achievable is None else float(achievable),
            "reached_target": self.reached_target,
            "best_fit_flag": self.best_fit_flag,
            "killed_mutant_ids": sorted(self.killed_mutant_ids),
            "surviving_mutant_ids": sorted(self.surviving_mutant_ids),
            "equivalent_mutant_ids": (
                None if self.equivalent_mutant_ids is None
                else sorted(self.equivalent_mutant_ids)
            ),
            "final_suite": [list(t.genes) for t in self.final_suite],
            "per_generation_history": [
                {k: getattr(h, k) for k in HISTORY_FIELDS}
                for h in self.per_generation_history
            ],
            "config_echo": self.config_echo.to_dict(),
            "seed": self.seed,
            "operators": list(self.operators),
            "domain": self.domain,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def history_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HISTORY_FIELDS)
        for h in self.per_generation_history:
            writer.writerow([h.generation, h.best_fitness, repr(h.suite_score),
                             repr(h.mean_fitness)])
        return buf.getvalue()

    def to_text(self) -> str:
        killed = len(self.killed_mutant_ids)
        lines = [
            f"program:      {self.program}",
            f"operators:    {','.join(self.operators)}   domain: {self.domain}",
            f"seed:         {self.seed}",
            f"generations:  {self.generations_run}",
            f"mutants:      {self.total_mutants} total, {killed} killed, "
            f"{len(self.surviving_mutant_ids)} surviving"
            + ("" if self.equivalent_mutant_ids is None
               else f", {len(self.equivalent_mutant_ids)} equivalent"),
            f"score:        {float(self.final_score):.4f} ({self.final_score})",
        ]
        if self.achievable_score is not None:
            lines.append(f"achievable:   {float(self.achievable_score):.4f} "
                         f"({self.achievable_score})")
        # above the display threshold the run is labelled best fit,
        # otherwise only the kill count is shown
        if self.best_fit_flag:
            lines.append("result:       BEST FIT")
        else:
            lines.append(f"result:       {killed} mutants found")
        lines.append("status:       " + ("target reached" if self.reached_target
                                         else "suite did not reach target"))
        lines.append("final suite:  " + " ".join(str(t) for t in self.final_suite))
        if self.surviving_mutant_ids:
            lines.append("surviving:    " + ", ".join(map(str, sorted(self.surviving_mutant_ids))))
        return "\n".join(lines) + "\n"


def _stats(generation: int, suite: Suite) -> GenerationStats:
    fitness = [ind.fitness for ind in suite.individuals]
    return GenerationStats(
        generation=generation,
        best_fitness=max(fitness),
        suite_score=float(suite.score()),
        mean_fitness=float(np.mean(fitness)),
    )


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    return int(np.random.SeedSequence().entropy) % 2**64


def optimize(
    program: Program,
    operators: Iterable[MutationOperator] = ALL_OPERATORS,
    domain: InputDomain | None = None,
    config: GaConfig | None = None,
    scan_cap: int = DEFAULT_SCAN_CAP,
    workers: int = 1,
) -> RunReport:
    """Evolve a test suite that kills as many mutants of ``program`` as it can.

    Generation 0 is random. Each generation is scored; the loop stops at the
    target score, at the kill-able maximum (when the equivalence scan ran) or
    after ``max_generations``. Otherwise weak tests are dropped, the gaps are
    refilled with random tests and the GA breeds the next population.
    """
    config = config or GaConfig()
    domain = domain or InputDomain.uniform(program.arity)
    if domain.arity != program.arity:
        raise ValueError(f"domain has {domain.arity} intervals, "
                         f"{program.name} takes {program.arity}")
    operators = tuple(sorted({MutationOperator(o) for o in operators},
                             key=list(MutationOperator).index))
    budget = ExecBudget(config.fuel)
    seed = resolve_seed(config.seed)
    rng = np.random.default_rng(seed)

    mutants = generate_mutants(program, operators)
    total = len(mutants)
    if total == 0:
        raise NoMutants(f"no {'/'.join(o.value for o in operators)} mutants in {program.name}")

    equivalent = None
    scan = config.scan_equivalents
    if scan is None:
        scan = domain.size * (total + 1) <= scan_cap
    if scan:
        equivalent = equivalent_mutant_scan(program, mutants, domain, budget, scan_cap)
    achievable = None if equivalent is None else Fraction(total - len(equivalent), total)
    target = as_fraction(config.target_score)

    evaluator = Evaluator(program, mutants, budget, workers)
    population = evaluator.evaluate(
        [random_test(domain, rng) for _ in range(config.population_size)]
    )
    history = []
    generation = 0
    while True:
        suite = Suite(tuple(population), total)
        score = suite.score()
        history.append(_stats(generation, suite))
        if (score >= target or (achievable is not None and score >= achievable)
                or generation >= config.max_generations):
            break
        refined = refine_suite(suite, config.drop_threshold).individuals
        refill = evaluator.evaluate(
            [random_test(domain, rng)
             for _ in range(config.population_size - len(refined))]
        )
        population = next_generation(list(refined) + refill, config, domain,
                                     evaluator, rng)
        generation += 1

    killed = suite.killed()
    surviving = frozenset(range(total)) - killed - (equivalent or frozenset())
    return RunReport(
        program=program.name,
        total_mutants=total,
        generations_run=generation,
        final_score=score,
        best_fit_flag=score > as_fraction(config.best_fit_display_threshold),
        killed_mutant_ids=killed,
        surviving_mutant_ids=surviving,
        equivalent_mutant_ids=equivalent,
        final_suite=tuple(suite.tests),
        per_generation_history=tuple(history),
        config_echo=dataclasses.replace(config, seed=seed),
        seed=seed,
        operators=tuple(o.value for o in operators),
        domain=str(domain),
        target_score=target,
    )
