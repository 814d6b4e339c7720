"""Evolve test suites for toy-language programs, scored by mutation testing."""

from importlib import resources

from .domain import InputDomain, TestCase
from .ga import (
    ConfigError,
    Evaluator,
    GaConfig,
    Individual,
    crossover,
    evaluate_fitness,
    mutate_genes,
    next_generation,
    random_test,
    select,
)
from .interp import (
    ArityMismatch,
    ExecBudget,
    Fault,
    FaultKind,
    FuelExhausted,
    Value,
    classify,
    execute,
)
from .lang import ParseError, Program, parse, pretty_print
from .mutation import (
    ALL_OPERATORS,
    DomainTooLarge,
    KillMatrix,
    Mutant,
    MutationOperator,
    build_kill_matrix,
    equivalent_mutant_scan,
    generate_mutants,
    kills,
)
from .suite import NoMutants, RunReport, Suite, mutation_score, optimize, refine_suite

__version__ = "0.1.0"


def bundled_source(name: str = "power") -> str:
    """Source text of a program shipped with the package."""
    return resources.files(__package__).joinpath("programs", f"{name}.tl").read_text("utf-8")


def load_bundled(name: str = "power") -> Program:
    return parse(bundled_source(name))
