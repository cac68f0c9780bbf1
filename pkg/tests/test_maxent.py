"""Maximum-entropy concentration: constraints, solver, queries."""

import math
from fractions import Fraction

import pytest

from randworlds.lang import Atomic, Var
from randworlds.maxent import (
    InfeasibleConstraints, MaxentUnsupported, atoms, constraints_from_kb,
    gmp_translate, maxent_degree, maxent_point,
)
from randworlds.parser import parse_formula, parse_kb


def kb(text):
    return parse_kb(text)


def test_atom_ordering():
    vocab, _ = kb("predicate P/1; predicate Q/1; const c;")
    a = atoms(vocab)
    assert [x.describe() for x in a] == [
        "P and Q", "P and not Q", "not P and Q", "not P and not Q"]


def test_unconstrained_is_uniform():
    vocab, f = kb("predicate P/1; predicate Q/1; const c;")
    cs, _ = constraints_from_kb(vocab, f)
    d = maxent_point(cs)
    assert all(abs(p - 0.25) < 1e-9 for p in d.p)
    assert abs(d.entropy - math.log(4)) < 1e-9
    assert d.kkt_residual < 1e-8


def test_worked_example_bounded_overlap():
    # everything is P1, at most 0.3 is P1-and-P2
    vocab, f = kb(
        "predicate P1/1; predicate P2/1; const c;\n"
        "forall x P1(x).\n"
        "prop{P1(x) and P2(x)}[x] <~[1] 3/10.\n")
    cs, _ = constraints_from_kb(vocab, f)
    d = maxent_point(cs)
    want = (0.3, 0.7, 0.0, 0.0)
    assert all(abs(p - w) < 1e-6 for p, w in zip(d.p, want))
    assert abs(maxent_degree(vocab, f, parse_formula("P2(c)", vocab)) - 0.3) \
        < 1e-6


def test_forall_forces_zero_atoms():
    vocab, f = kb("predicate P/1; predicate Q/1; const c;\n"
                  "forall x (P(x) => Q(x)).\n")
    cs, _ = constraints_from_kb(vocab, f)
    d = maxent_point(cs)
    # atom "P and not Q" is impossible; the rest stay uniform
    assert d.p[1] < 1e-12
    assert all(abs(p - 1 / 3) < 1e-8 for i, p in enumerate(d.p) if i != 1)


def test_conditional_constraint():
    vocab, f = kb("predicate P/1; predicate Q/1; const c;\n"
                  "prop{P(x) | Q(x)}[x] ~=[1] 4/5.\n")
    cs, _ = constraints_from_kb(vocab, f)
    d = maxent_point(cs)
    pq = d.p[0]          # P and Q
    q = d.p[0] + d.p[2]  # Q
    assert abs(pq - 0.8 * q) < 1e-8


def test_membership_chance_mixes_in():
    vocab, f = kb("predicate Black/1; predicate Bird/1; const Clyde;\n"
                  "prop{Black(x) | Bird(x)}[x] ~=[1] 1/5.\n"
                  "prop{Bird(x)}[x] ~=[2] 1/10.\n")
    val = maxent_degree(vocab, f, parse_formula("Black(Clyde)", vocab))
    assert abs(val - 0.47) < 1e-3


def test_constant_context_conditions_the_query():
    vocab, f = kb("predicate Hep/1; predicate Jaun/1; const Eric;\n"
                  "prop{Hep(x) | Jaun(x)}[x] ~=[1] 4/5.\n"
                  "Jaun(Eric).\n")
    val = maxent_degree(vocab, f, parse_formula("Hep(Eric)", vocab))
    assert abs(val - 0.8) < 1e-8


def test_infeasible():
    vocab, f = kb("predicate P/1; const c;\n"
                  "prop{P(x)}[x] ~=[1] 1/5.\n"
                  "prop{P(x)}[x] ~=[2] 4/5.\n")
    cs, _ = constraints_from_kb(vocab, f)
    with pytest.raises(InfeasibleConstraints):
        maxent_point(cs)


def test_non_unary_rejected():
    vocab, f = kb("predicate R/2; const c;\nR(c, c).\n")
    with pytest.raises(MaxentUnsupported):
        constraints_from_kb(vocab, f)


def test_gmp_translation_roundtrip():
    from randworlds.defaults import DefaultRule
    bird = Atomic("Bird", (Var("x"),))
    fly = Atomic("Fly", (Var("x"),))
    rules = [DefaultRule(bird, fly, 1)]
    vocab, built, ctx = gmp_translate(rules, bird, constant="t")
    val = maxent_degree(vocab, built, parse_formula("Fly(t)", vocab))
    assert abs(val - 1.0) < 1e-8


def test_kkt_residual_small_everywhere():
    cases = [
        "predicate P/1; const c;\nprop{P(x)}[x] ~=[1] 1/3.\n",
        "predicate P/1; predicate Q/1; const c;\n"
        "prop{P(x) | Q(x)}[x] ~=[1] 9/10.\nprop{Q(x)}[x] <~[2] 1/2.\n",
    ]
    for text in cases:
        vocab, f = kb(text)
        cs, _ = constraints_from_kb(vocab, f)
        assert maxent_point(cs).kkt_residual < 1e-8
