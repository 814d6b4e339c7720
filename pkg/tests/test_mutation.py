import itertools
import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mutagen_ga import (
    ArityMismatch,
    DomainTooLarge,
    ExecBudget,
    InputDomain,
    KillMatrix,
    MutationOperator,
    TestCase,
    build_kill_matrix,
    equivalent_mutant_scan,
    execute,
    generate_mutants,
    kills,
    parse,
    pretty_print,
)
from mutagen_ga.lang import BinaryOp, IntLiteral, iter_nodes
from mutagen_ga.mutation import Mutant, mutants_to_json

from .conftest import find_mutant

AOR, ROR, CRP = MutationOperator.AOR, MutationOperator.ROR, MutationOperator.CRP
SQUARE = list(itertools.product(range(1, 9), repeat=2))


def brute_kill(original, mutant_program, genes, fuel=100_000):
    """Per-cell oracle: compare raw outcomes, no shared code with kill_row."""
    budget = ExecBudget(fuel)
    return execute(original, genes, budget) != execute(mutant_program, genes, budget)


def shallow(node):
    if isinstance(node, BinaryOp):
        return ("bin", node.op)
    if isinstance(node, IntLiteral):
        return ("int", node.value)
    return (type(node).__name__, getattr(node, "name", None), getattr(node, "target", None))


def test_paper_mutants_present(power):
    mutants = generate_mutants(power, {AOR, ROR})
    fragments = {m.mutated for m in mutants}
    assert {"i < b", "P + a"} <= fragments
    loop = find_mutant(mutants, "i <= b", "i < b")
    assert (loop.site.line, loop.operator) == (10, ROR)
    mul = find_mutant(mutants, "P * a", "P + a")
    assert (mul.site.line, mul.operator) == (11, AOR)


def test_no_sites():
    assert generate_mutants(parse("fn f(x) { return x }")) == []


def test_ror_on_loop_condition(power):
    at_loop = [m for m in generate_mutants(power, {ROR}) if m.original == "i <= b"]
    assert [m.mutated for m in at_loop] == ["i < b", "i > b", "i >= b", "i == b", "i != b"]


def test_operator_sets_and_crp(power):
    for m in generate_mutants(power):
        assert m.original != m.mutated
        if m.operator is CRP:
            assert int(m.mutated) in {int(m.original) + 1, int(m.original) - 1, 0, 1}
    lits = generate_mutants(parse("fn f() { return 5 }"), {CRP})
    assert [m.mutated for m in lits] == ["6", "4", "0", "1"]
    zero = generate_mutants(parse("fn f() { return 0 }"), {CRP})
    assert [m.mutated for m in zero] == ["1", "-1"]


def test_ids_dense_and_order_stable(power):
    a = generate_mutants(power)
    b = generate_mutants(power)
    assert [m.id for m in a] == list(range(len(a)))
    assert [m.to_dict() for m in a] == [m.to_dict() for m in b]
    positions = [(m.site.line, m.site.column) for m in a]
    assert positions == sorted(positions)


def test_first_order(power, power_mutants):
    original_nodes = list(iter_nodes(power))
    original_text = pretty_print(power)
    for m in power_mutants:
        mutant_nodes = list(iter_nodes(m.program))
        assert len(mutant_nodes) == len(original_nodes)
        diffs = [i for i, (x, y) in enumerate(zip(original_nodes, mutant_nodes))
                 if shallow(x) != shallow(y)]
        assert len(diffs) == 1
        # exactly one rendered line changes, by swapping the site's fragment
        old_lines = original_text.splitlines()
        new_lines = pretty_print(m.program).splitlines()
        changed = [i for i, (x, y) in enumerate(zip(old_lines, new_lines)) if x != y]
        assert len(changed) == 1 and len(old_lines) == len(new_lines)
        i = changed[0]
        assert old_lines[i].replace(m.original, m.mutated, 1) == new_lines[i]


def test_kills_examples(power, paper_mutants, power_mutants):
    loop, mul = paper_mutants
    assert kills(power, loop, (2, 3))
    assert execute(loop.program, (2, 3)).value == 4
    assert kills(power, mul, TestCase((2, 3)))
    loop_site = [m for m in power_mutants if m.site.line >= 10]
    assert loop_site and not any(kills(power, m, (1, 7)) for m in loop_site)
    clone = Mutant(0, AOR, power.span, "", "", power)
    assert not any(kills(power, clone, t) for t in SQUARE)
    with pytest.raises(ArityMismatch):
        kills(power, loop, (2,))


def test_matrix_empty_suite(power, power_mutants):
    m = build_kill_matrix(power, power_mutants, [])
    assert m.killed.shape == (0, len(power_mutants))
    assert m.to_csv() == ",".join(map(str, range(len(power_mutants)))) + "\n"


def test_matrix_paper_mutants_row(power, paper_mutants):
    m = build_kill_matrix(power, paper_mutants, [(2, 3)])
    assert m.killed.tolist() == [[True, True]]


def test_matrix_matches_per_cell_oracle(power, power_mutants):
    m = build_kill_matrix(power, power_mutants, SQUARE)
    expected = np.array([[brute_kill(power, mu.program, t) for mu in power_mutants]
                         for t in SQUARE])
    assert np.array_equal(m.killed, expected)
    assert m.tests == tuple(TestCase(t) for t in SQUARE)


def test_matrix_parallel_and_permutation(power, power_mutants):
    seq = build_kill_matrix(power, power_mutants, SQUARE)
    par = build_kill_matrix(power, power_mutants, SQUARE, workers=2)
    assert par == seq
    perm = list(power_mutants)
    random.Random(7).shuffle(perm)
    shuffled = build_kill_matrix(power, perm, SQUARE)
    for j, mu in enumerate(perm):
        assert np.array_equal(shuffled.killed[:, j], seq.killed[:, mu.id])


def test_matrix_arity(power, power_mutants):
    with pytest.raises(ArityMismatch):
        build_kill_matrix(power, power_mutants, [(1, 2, 3)])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(SQUARE), max_size=6), st.lists(st.sampled_from(SQUARE), max_size=6))
def test_monotone_union(power, power_mutants, a, b):
    ka = build_kill_matrix(power, power_mutants, a).killed_ids()
    kb = build_kill_matrix(power, power_mutants, b).killed_ids()
    assert build_kill_matrix(power, power_mutants, a + b).killed_ids() == ka | kb


def test_csv_round_trip(power, power_mutants):
    text = build_kill_matrix(power, power_mutants, SQUARE[:10]).to_csv()
    again = KillMatrix.from_csv(text)
    assert again.to_csv() == text
    with pytest.raises(ValueError):
        KillMatrix.from_csv("0,1\n1,2\n")


def test_json_export(power_mutants):
    data = json.loads(mutants_to_json(power_mutants))
    assert len(data) == len(power_mutants)
    assert set(data[0]) == {"id", "operator", "line", "column", "original", "mutated"}
    assert data[0]["id"] == 0


def test_equivalence_scan(power, power_mutants, paper_mutants):
    domain = InputDomain.uniform(2, 1, 8)
    eq = equivalent_mutant_scan(power, power_mutants, domain)
    # oracle: columns of the exhaustive per-cell matrix that are never killed
    never = {mu.id for mu in power_mutants
             if not any(brute_kill(power, mu.program, t) for t in SQUARE)}
    assert eq == never
    b_le = find_mutant(power_mutants, "b == 1", "b <= 1")
    assert b_le.id in eq
    loop, _ = paper_mutants
    assert equivalent_mutant_scan(power, [loop], domain) == frozenset()
    assert equivalent_mutant_scan(power, [], domain) == frozenset()


def test_equivalence_scan_cap(power, power_mutants):
    with pytest.raises(DomainTooLarge):
        equivalent_mutant_scan(power, power_mutants, InputDomain.uniform(2, 1, 1000))
    with pytest.raises(DomainTooLarge):
        equivalent_mutant_scan(power, power_mutants, InputDomain.uniform(2), cap=100)
