"""World enumeration and formula evaluation."""

from fractions import Fraction

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from randworlds.lang import (
    And, Atomic, Const, ExistsExactly, ExistsUnique, Not, Or, Prop, Var,
    desugar,
)
from randworlds.parser import parse_formula, parse_kb
from randworlds.worlds import (
    UnsupportedFeatureError, eval_proportion, evaluate, total_worlds,
    world_from_index,
)

VOCAB, _ = parse_kb("predicate P/1; predicate R/2; const a; const b;")
UNARY, _ = parse_kb("predicate P/1; predicate Q/1; const a;")

Px = Atomic("P", (Var("x"),))


def test_total_worlds():
    # 2^N for P, 2^(N^2) for R, N^2 for the two constants
    assert total_worlds(VOCAB, 2) == 2 ** 2 * 2 ** 4 * 4
    assert total_worlds(UNARY, 3) == 2 ** 3 * 2 ** 3 * 3


def test_index_bijection():
    N = 2
    seen = set()
    for i in range(total_worlds(VOCAB, N)):
        w = world_from_index(VOCAB, N, i)
        key = (w.table("P"), w.table("R"), w.constant("a"), w.constant("b"))
        seen.add(key)
    assert len(seen) == total_worlds(VOCAB, N)


def test_index_out_of_range():
    with pytest.raises(ValueError):
        world_from_index(VOCAB, 2, total_worlds(VOCAB, 2))


def test_evaluate_connectives():
    N = 3
    f = parse_formula("P(a) or not P(a)", VOCAB)
    g = parse_formula("P(a) and not P(a)", VOCAB)
    for i in range(0, total_worlds(VOCAB, N), 997):
        w = world_from_index(VOCAB, N, i)
        assert evaluate(VOCAB, f, w)
        assert not evaluate(VOCAB, g, w)


def test_equality_of_constants():
    f = parse_formula("a = b", VOCAB)
    hits = 0
    for i in range(total_worlds(VOCAB, 2)):
        w = world_from_index(VOCAB, 2, i)
        if evaluate(VOCAB, f, w):
            hits += 1
            assert w.constant("a") == w.constant("b")
    assert hits == total_worlds(VOCAB, 2) // 2


def test_binary_relation():
    f = parse_formula("forall x exists y R(x, y)", VOCAB)
    w = world_from_index(VOCAB, 2, 0)
    # world 0 has every table empty
    assert not evaluate(VOCAB, f, w)


def test_proportion_values():
    p = Prop(Px, ("x",))
    for i in range(total_worlds(UNARY, 3)):
        w = world_from_index(UNARY, 3, i)
        v = eval_proportion(UNARY, p, w)
        assert 0 <= v <= 1 and v.denominator <= 3


def test_pair_proportion():
    Rxy = Atomic("R", (Var("x"), Var("y")))
    p = Prop(Rxy, ("x", "y"))
    for i in (0, 7, 123, 255):
        w = world_from_index(VOCAB, 2, i)
        v = eval_proportion(VOCAB, p, w)
        assert v == Fraction(len(w.table("R")), 4)


def test_functions_rejected():
    vocab, kb = parse_kb("predicate P/1; function f/1; const c;\nP(f(c)).\n")
    with pytest.raises(UnsupportedFeatureError):
        evaluate(vocab, kb, world_from_index(
            type(vocab)(vocab.predicates, (), vocab.constants), 2, 0))


def test_untranslated_comparison_rejected():
    f = parse_formula("prop{P(x)}[x] ~=[1] 1/2", UNARY)
    with pytest.raises(UnsupportedFeatureError):
        evaluate(UNARY, f, world_from_index(UNARY, 2, 0))


# counting quantifiers vs their equality desugaring -------------------------


def quantified(draw_body, n):
    return st.one_of(
        st.builds(ExistsUnique, st.just("x"), draw_body),
        st.builds(lambda k, b: ExistsExactly(k, "x", b),
                  st.integers(min_value=0, max_value=n), draw_body),
    )


bodies = st.one_of(
    st.just(Px),
    st.just(Not(Px)),
    st.just(And(Px, Atomic("Q", (Var("x"),)))),
    st.just(Or(Px, Atomic("=", (Var("x"), Const("a"))))),
)


@settings(max_examples=60, deadline=None)
@given(quantified(bodies, 3), st.integers(min_value=0))
def test_desugar_agrees_with_direct_counting(f, seed):
    N = 3
    i = seed % total_worlds(UNARY, N)
    w = world_from_index(UNARY, N, i)
    assert evaluate(UNARY, f, w) == evaluate(UNARY, desugar(f), w)
