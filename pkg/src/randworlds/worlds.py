"""Finite worlds over domain {1..N} and an exact evaluator.

A world fixes, for each declared predicate, the set of tuples where it
holds, and maps each constant to a domain element.  Worlds are indexable:
every integer in ``[0, total_worlds(vocab, N))`` decodes to exactly one
world, which is what makes parallel counting over contiguous index ranges
bit-identical to a sequential pass.

Evaluation is Tarskian over {1..N} with exact rational arithmetic for
proportion expressions.  Formulas are compiled to closures once and then
run per world; closed proportion terms are cached per world under their
printed form, so several stage formulas sharing subterms pay for each
proportion once per world.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

from .lang import (
    And, App, Atomic, Compare, CondProp, Const, Eps, ExactCompare, Exists,
    ExistsExactly, ExistsUnique, Falsity, Forall, Formula, Iff, Implies,
    LangError, Not, Or, PAdd, PExpr, PMul, Prop, PSub, Rat, Truth, Var,
    Vocabulary, free_vars, pexpr_free_vars,
)
from .parser import format_pexpr


class UnsupportedFeatureError(LangError):
    """Raised when evaluation reaches a construct outside the world model."""


@dataclass(frozen=True)
class World:
    vocab: Vocabulary
    N: int
    tables: tuple[tuple[str, frozenset[tuple[int, ...]]], ...]
    constants: tuple[tuple[str, int], ...]

    def table(self, pred: str) -> frozenset[tuple[int, ...]]:
        return dict(self.tables)[pred]

    def constant(self, name: str) -> int:
        return dict(self.constants)[name]

    def to_json(self) -> str:
        obj = {
            "N": self.N,
            "predicates": {p: sorted(list(t) for t in tbl)
                           for p, tbl in self.tables},
            "constants": dict(self.constants),
        }
        return json.dumps(obj, sort_keys=True)


def total_worlds(vocab: Vocabulary, N: int) -> int:
    if vocab.functions:
        raise UnsupportedFeatureError(
            "worlds with function symbols are not enumerable here")
    total = 1
    for _, r in vocab.predicates:
        total *= 1 << (N ** r)
    total *= N ** len(vocab.constants)
    return total


def _tuple_order(N: int, r: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(1, N + 1), repeat=r))


def world_from_index(vocab: Vocabulary, N: int, index: int) -> World:
    """Decode a world from its index (mixed radix, first predicate most
    significant, then constants in declaration order)."""
    if not 0 <= index < total_worlds(vocab, N):
        raise ValueError("world index out of range")
    digits: list[int] = []
    radices = [1 << (N ** r) for _, r in vocab.predicates]
    radices += [N] * len(vocab.constants)
    for radix in reversed(radices):
        digits.append(index % radix)
        index //= radix
    digits.reverse()
    tables = []
    for (p, r), bits in zip(vocab.predicates, digits):
        order = _tuple_order(N, r)
        tables.append((p, frozenset(
            t for j, t in enumerate(order) if (bits >> j) & 1)))
    consts = tuple((c, d + 1)
                   for c, d in zip(vocab.constants, digits[len(vocab.predicates):]))
    return World(vocab, N, tuple(tables), consts)


class WorldView:
    """Mutable per-world scratch used by compiled evaluators.

    ``unary`` holds bitmasks (bit e-1 set iff the predicate holds at e) for
    unary predicates; higher arities live in ``tables`` as sets of tuples.
    """

    __slots__ = ("N", "unary", "tables", "consts", "cache")

    def __init__(self, N: int):
        self.N = N
        self.unary: dict[str, int] = {}
        self.tables: dict[str, frozenset] = {}
        self.consts: dict[str, int] = {}
        self.cache: dict[str, Fraction] = {}

    @classmethod
    def from_world(cls, w: World) -> "WorldView":
        v = cls(w.N)
        arity = w.vocab.predicate_arity
        for p, tbl in w.tables:
            if arity[p] == 1:
                mask = 0
                for (e,) in tbl:
                    mask |= 1 << (e - 1)
                v.unary[p] = mask
            else:
                v.tables[p] = tbl
        v.consts = dict(w.constants)
        return v


# ---------------------------------------------------------------------------
# compilation


def _compile_term(t, unary_preds):
    if isinstance(t, Var):
        name = t.name
        return lambda w, env: env[name]
    if isinstance(t, Const):
        name = t.name
        return lambda w, env: w.consts[name]
    if isinstance(t, App):
        fname = t.func
        def bad(w, env):
            raise UnsupportedFeatureError(
                f"function symbol {fname} cannot be evaluated: worlds carry "
                "predicate tables and constants only")
        return bad
    raise TypeError(f"not a term: {t!r}")


def compile_formula(vocab: Vocabulary, f: Formula):
    """Compile a formula to fn(view, env) -> bool.

    env maps variable names to domain elements; the formula's free variables
    must all be assigned before calling.
    """
    unary = {p for p, r in vocab.predicates if r == 1}

    def comp(g: Formula):
        if isinstance(g, Truth):
            return lambda w, env: True
        if isinstance(g, Falsity):
            return lambda w, env: False
        if isinstance(g, Atomic):
            if g.pred == "=":
                t1 = _compile_term(g.args[0], unary)
                t2 = _compile_term(g.args[1], unary)
                return lambda w, env: t1(w, env) == t2(w, env)
            terms = [_compile_term(t, unary) for t in g.args]
            p = g.pred
            if p in unary:
                t0 = terms[0]
                return lambda w, env: (w.unary[p] >> (t0(w, env) - 1)) & 1 == 1
            return lambda w, env: tuple(t(w, env) for t in terms) in w.tables[p]
        if isinstance(g, Not):
            b = comp(g.body)
            return lambda w, env: not b(w, env)
        if isinstance(g, And):
            l, r = comp(g.left), comp(g.right)
            return lambda w, env: l(w, env) and r(w, env)
        if isinstance(g, Or):
            l, r = comp(g.left), comp(g.right)
            return lambda w, env: l(w, env) or r(w, env)
        if isinstance(g, Implies):
            l, r = comp(g.left), comp(g.right)
            return lambda w, env: (not l(w, env)) or r(w, env)
        if isinstance(g, Iff):
            l, r = comp(g.left), comp(g.right)
            return lambda w, env: l(w, env) == r(w, env)
        if isinstance(g, (Forall, Exists)):
            b = comp(g.body)
            var = g.var
            want_all = isinstance(g, Forall)

            def quant(w, env):
                old = env.get(var)
                try:
                    if want_all:
                        for d in range(1, w.N + 1):
                            env[var] = d
                            if not b(w, env):
                                return False
                        return True
                    for d in range(1, w.N + 1):
                        env[var] = d
                        if b(w, env):
                            return True
                    return False
                finally:
                    if old is None:
                        env.pop(var, None)
                    else:
                        env[var] = old
            return quant
        if isinstance(g, (ExistsUnique, ExistsExactly)):
            # Counting quantifiers are evaluated by counting witnesses
            # directly; this agrees with the equality desugaring and is
            # property-tested against it.
            b = comp(g.body)
            var = g.var
            target = 1 if isinstance(g, ExistsUnique) else g.count

            def count_q(w, env):
                old = env.get(var)
                try:
                    n = 0
                    for d in range(1, w.N + 1):
                        env[var] = d
                        if b(w, env):
                            n += 1
                            if n > target:
                                return False
                    return n == target
                finally:
                    if old is None:
                        env.pop(var, None)
                    else:
                        env[var] = old
            return count_q
        if isinstance(g, ExactCompare):
            le = compile_pexpr(vocab, g.lhs)
            re_ = compile_pexpr(vocab, g.rhs)
            if g.op == "=":
                return lambda w, env: le(w, env) == re_(w, env)
            return lambda w, env: le(w, env) <= re_(w, env)
        if isinstance(g, Compare):
            raise UnsupportedFeatureError(
                "approximate comparisons must be translated to exact form "
                "before evaluation")
        raise TypeError(f"not a formula: {g!r}")

    return comp(f)


def compile_pexpr(vocab: Vocabulary, e: PExpr):
    """Compile a proportion expression to fn(view, env) -> Fraction."""
    if isinstance(e, Rat):
        v = e.value
        return lambda w, env: v
    if isinstance(e, Eps):
        raise UnsupportedFeatureError(
            "tolerance variables must be instantiated before evaluation")
    if isinstance(e, CondProp):
        raise UnsupportedFeatureError(
            "conditional proportions must be translated before evaluation")
    if isinstance(e, Prop):
        body = compile_formula(vocab, e.body)
        vs = e.vars
        k = len(vs)
        closed = not pexpr_free_vars(e)
        key = format_pexpr(e) if closed else None

        def prop_val(w, env):
            if key is not None:
                hit = w.cache.get(key)
                if hit is not None:
                    return hit
            olds = [env.get(v) for v in vs]
            try:
                n = 0
                for tup in itertools.product(range(1, w.N + 1), repeat=k):
                    for v, d in zip(vs, tup):
                        env[v] = d
                    if body(w, env):
                        n += 1
                val = Fraction(n, w.N ** k)
            finally:
                for v, old in zip(vs, olds):
                    if old is None:
                        env.pop(v, None)
                    else:
                        env[v] = old
            if key is not None:
                w.cache[key] = val
            return val
        return prop_val
    if isinstance(e, (PAdd, PSub, PMul)):
        l = compile_pexpr(vocab, e.left)
        r = compile_pexpr(vocab, e.right)
        if isinstance(e, PAdd):
            return lambda w, env: l(w, env) + r(w, env)
        if isinstance(e, PSub):
            return lambda w, env: l(w, env) - r(w, env)
        return lambda w, env: l(w, env) * r(w, env)
    raise TypeError(f"not a proportion expression: {e!r}")


def evaluate(vocab: Vocabulary, f: Formula, world: World,
             env: dict[str, int] | None = None) -> bool:
    """Evaluate a (translated, tolerance-free) formula in one world."""
    if free_vars(f) - set(env or {}):
        raise LangError("formula has unassigned free variables")
    view = WorldView.from_world(world)
    return compile_formula(vocab, f)(view, dict(env or {}))


def eval_proportion(vocab: Vocabulary, e: PExpr, world: World,
                    env: dict[str, int] | None = None) -> Fraction:
    """Evaluate a conditional-free proportion expression in one world."""
    view = WorldView.from_world(world)
    return compile_pexpr(vocab, e)(view, dict(env or {}))
