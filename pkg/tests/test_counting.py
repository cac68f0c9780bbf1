"""Exact counting: naive enumeration, the unary fast path, budgets."""

import warnings
from fractions import Fraction

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from randworlds.counting import (
    BudgetExceededError, cond_prob, count_many, count_worlds,
    naive_count_many, unary_count_many,
)
from randworlds.parser import parse_formula, parse_kb
from randworlds.translate import ground_kb

UNARY, _ = parse_kb("predicate P/1; predicate Q/1; const a; const b;")


def pf(text, vocab=UNARY):
    return parse_formula(text, vocab)


def test_count_tautology():
    from randworlds.worlds import total_worlds
    wc = count_worlds(UNARY, 3, pf("true"))
    assert wc.count == wc.total == total_worlds(UNARY, 3)


def test_count_contradiction():
    wc = count_worlds(UNARY, 3, pf("P(a) and not P(a)"))
    assert wc.count == 0


def test_cond_prob_simple():
    c = cond_prob(UNARY, 4, pf("P(a)"), pf("true"))
    assert c.defined and c.value == Fraction(1, 2)


def test_cond_prob_undefined():
    c = cond_prob(UNARY, 3, pf("P(a)"), pf("false"))
    assert not c.defined


def test_cond_prob_conditioning():
    c = cond_prob(UNARY, 3, pf("P(a)"), pf("P(a) or Q(a)"))
    assert c.value == Fraction(2, 3)


def test_budget_enforced():
    with pytest.raises(BudgetExceededError):
        count_worlds(UNARY, 5, pf("true"), budget=100, method="naive")


def test_methods_agree_on_statistical_kb():
    vocab, kb = parse_kb(
        "predicate P/1; predicate Q/1; const c;\n"
        "prop{P(x) | Q(x)}[x] ~=[1] 1/2.\nQ(c).\n")
    g = ground_kb(kb, Fraction(1, 4))
    for n in range(2, 6):
        a = count_many(vocab, n, [g], method="naive")
        b = count_many(vocab, n, [g], method="unary")
        assert a == b


def test_counting_quantifier_fast_path():
    vocab, kb = parse_kb(
        "predicate W/1; const c;\nexists_exactly[2] x W(x).\nW(c).\n")
    for n in (2, 3, 4):
        a = count_many(vocab, n, [kb], method="naive")
        b = count_many(vocab, n, [kb], method="unary")
        assert a == b


def test_equality_falls_back_to_naive():
    vocab, kb = parse_kb("const c1; const c2;\nc1 = c2.\n")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        wc = count_many(vocab, 3, [kb], method="auto")
    assert wc[0] == 3  # diagonal of the 3x3 constant grid
    assert any("falling back" in str(w.message) for w in caught)


def test_binary_predicate_uses_naive():
    from randworlds.worlds import total_worlds
    vocab, kb = parse_kb("predicate R/2; const c;\nR(c, c).\n")
    wc = count_many(vocab, 2, [kb], method="auto")
    assert wc[0] == total_worlds(vocab, 2) // 2


def test_parallel_matches_sequential():
    vocab, kb = parse_kb(
        "predicate P/1; predicate Q/1; predicate S/1; const c;\n"
        "prop{P(x)}[x] <~[1] 1/2.\nS(c).\n")
    g = ground_kb(kb, Fraction(1, 8))
    seq = naive_count_many(vocab, 5, [g], jobs=1)
    par = naive_count_many(vocab, 5, [g], jobs=4)
    assert seq == par


# random unary formulas: the two counters must agree exactly ----------------


@st.composite
def unary_formulas(draw):
    atoms = ["P(a)", "Q(a)", "P(b)", "Q(b)",
             "forall x (P(x) => Q(x))", "exists x (P(x) and not Q(x))",
             "exists! x P(x)"]
    left = draw(st.sampled_from(atoms))
    right = draw(st.sampled_from(atoms))
    op = draw(st.sampled_from(["and", "or", "=>"]))
    neg = draw(st.booleans())
    text = f"({left}) {op} ({right})"
    return f"not ({text})" if neg else text


@settings(max_examples=40, deadline=None)
@given(unary_formulas(), st.integers(min_value=2, max_value=4))
def test_unary_equals_naive_on_random_formulas(text, n):
    f = pf(text)
    assert (unary_count_many(UNARY, n, [f]) ==
            naive_count_many(UNARY, n, [f]))
