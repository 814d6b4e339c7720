"""Test cases and the integer input domains they are drawn from."""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Iterator, Sequence


@dataclass(frozen=True, order=True)
class TestCase:
    """One input vector; a GA chromosome whose genes are the inputs.

    Ordering is lexicographic on the genes, which is the tie-break used
    throughout selection and refinement.
    """

    __test__ = False  # not a pytest class

    genes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "genes", tuple(int(g) for g in self.genes))

    def __len__(self) -> int:
        return len(self.genes)

    def __iter__(self):
        return iter(self.genes)

    def __str__(self) -> str:
        return "(" + ", ".join(map(str, self.genes)) + ")"


@dataclass(frozen=True)
class InputDomain:
    """Inclusive integer interval ``[lo, hi]`` per program parameter."""

    bounds: tuple[tuple[int, int], ...]

    def __post_init__(self):
        bounds = tuple((int(lo), int(hi)) for lo, hi in self.bounds)
        for lo, hi in bounds:
            if lo > hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def uniform(cls, arity: int, lo: int = 1, hi: int = 8) -> InputDomain:
        return cls(((lo, hi),) * arity)

    @classmethod
    def parse(cls, text: str, arity: int) -> InputDomain:
        """Parse ``lo..hi[,lo..hi...]``; a single interval applies to every parameter."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        bounds = []
        for part in parts:
            m = re.fullmatch(r"(-?\d+)\s*\.\.\s*(-?\d+)", part)
            if m is None:
                raise ValueError(f"bad interval {part!r}, expected lo..hi")
            bounds.append((int(m.group(1)), int(m.group(2))))
        if len(bounds) == 1:
            bounds = bounds * arity
        if len(bounds) != arity:
            raise ValueError(f"domain has {len(bounds)} intervals, program takes {arity}")
        return cls(tuple(bounds))

    @property
    def arity(self) -> int:
        return len(self.bounds)

    @property
    def size(self) -> int:
        return math.prod(hi - lo + 1 for lo, hi in self.bounds)

    def contains(self, test: TestCase | Sequence[int]) -> bool:
        genes = test.genes if isinstance(test, TestCase) else tuple(test)
        return len(genes) == self.arity and all(
            lo <= g <= hi for g, (lo, hi) in zip(genes, self.bounds)
        )

    def enumerate(self) -> Iterator[TestCase]:
        """Every test in the domain, in lexicographic order."""
        ranges = [range(lo, hi + 1) for lo, hi in self.bounds]
        for genes in itertools.product(*ranges):
            yield TestCase(genes)

    def __str__(self) -> str:
        return ",".join(f"{lo}..{hi}" for lo, hi in self.bounds)
