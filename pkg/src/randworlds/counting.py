"""Exact model counting over worlds of a fixed domain size.

Two routes compute the same numbers:

* ``naive_count_many`` enumerates every world index in order (optionally
  split into contiguous ranges across processes; the split cannot change
  the result, only the wall time);
* ``unary_count_many`` exploits that for a purely unary vocabulary without
  equality, truth depends only on how many elements realize each atom
  (conjunction of +/- literals over all predicates) and which atom each
  constant falls in.  It sums multinomial weights over atom-count vectors.

The fast path raises ClassUnsupported on anything outside its fragment;
``count_worlds`` then falls back to enumeration and says so in a warning.
"""

from __future__ import annotations

import itertools
import math
import multiprocessing
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .lang import (
    And, App, Atomic, Compare, CondProp, Eps, ExactCompare, Exists,
    ExistsExactly, ExistsUnique, Falsity, Forall, Formula, Iff, Implies,
    LangError, Not, Or, PAdd, PExpr, PMul, Prop, PSub, Rat, Truth, Var,
    Const, Vocabulary, pexpr_free_vars, subformulas,
)
from .parser import format_pexpr
from .worlds import (
    UnsupportedFeatureError, WorldView, compile_formula, total_worlds,
)

DEFAULT_BUDGET = 2 ** 34


class BudgetExceededError(LangError):
    def __init__(self, needed: int, budget: int):
        super().__init__(
            f"counting needs {needed} worlds, budget allows {budget}")
        self.needed = needed
        self.budget = budget


class ClassUnsupported(LangError):
    """The atom-class fast path cannot handle this vocabulary or formula."""


@dataclass(frozen=True)
class WorldCount:
    count: int
    total: int


@dataclass(frozen=True)
class CondProb:
    value: Fraction
    defined: bool

    @classmethod
    def undefined(cls) -> "CondProb":
        return cls(Fraction(0), False)


def _check_exact(f: Formula):
    for g in subformulas(f):
        if isinstance(g, Compare):
            raise LangError(
                "approximate comparisons must be translated before counting")
        if isinstance(g, (ExactCompare,)):
            for e in (g.lhs, g.rhs):
                for node in _walk_pexpr(e):
                    if isinstance(node, Eps):
                        raise LangError(
                            "tolerance variables must be instantiated "
                            "before counting")
                    if isinstance(node, CondProp):
                        raise LangError(
                            "conditional proportions must be translated "
                            "before counting")


def _walk_pexpr(e: PExpr):
    yield e
    if isinstance(e, (PAdd, PSub, PMul)):
        yield from _walk_pexpr(e.left)
        yield from _walk_pexpr(e.right)


# ---------------------------------------------------------------------------
# naive enumeration


def _decode_digits(radices: list[int], index: int) -> list[int]:
    digits = []
    for radix in reversed(radices):
        digits.append(index % radix)
        index //= radix
    digits.reverse()
    return digits


def _count_range(vocab: Vocabulary, N: int, formulas: list[Formula],
                 start: int, stop: int) -> list[int]:
    compiled = [compile_formula(vocab, f) for f in formulas]
    preds = list(vocab.predicates)
    radices = [1 << (N ** r) for _, r in preds] + [N] * len(vocab.constants)
    digits = _decode_digits(radices, start) if start else [0] * len(radices)

    tuple_orders = {p: list(itertools.product(range(1, N + 1), repeat=r))
                    for p, r in preds if r != 1}
    counts = [0] * len(formulas)
    view = WorldView(N)
    npreds = len(preds)
    const_names = list(vocab.constants)

    for _ in range(stop - start):
        for j, (p, r) in enumerate(preds):
            bits = digits[j]
            if r == 1:
                view.unary[p] = bits
            else:
                order = tuple_orders[p]
                view.tables[p] = frozenset(
                    t for idx, t in enumerate(order) if (bits >> idx) & 1)
        for j, c in enumerate(const_names):
            view.consts[c] = digits[npreds + j] + 1
        view.cache.clear()
        env: dict[str, int] = {}
        for t, fn in enumerate(compiled):
            if fn(view, env):
                counts[t] += 1
        # odometer increment, last digit fastest
        for pos in range(len(digits) - 1, -1, -1):
            digits[pos] += 1
            if digits[pos] < radices[pos]:
                break
            digits[pos] = 0
    return counts


def _range_worker(args):
    return _count_range(*args)


def naive_count_many(vocab: Vocabulary, N: int, formulas: list[Formula],
                     budget: int = DEFAULT_BUDGET, jobs: int = 1) -> list[int]:
    """Count satisfying worlds for several formulas in one enumeration pass."""
    for f in formulas:
        _check_exact(f)
    total = total_worlds(vocab, N)
    if total > budget:
        raise BudgetExceededError(total, budget)
    if jobs <= 1 or total < 1 << 16:
        return _count_range(vocab, N, formulas, 0, total)
    bounds = [total * i // jobs for i in range(jobs + 1)]
    tasks = [(vocab, N, formulas, bounds[i], bounds[i + 1])
             for i in range(jobs) if bounds[i] < bounds[i + 1]]
    with multiprocessing.Pool(jobs) as pool:
        parts = pool.map(_range_worker, tasks)
    return [sum(col) for col in zip(*parts)]


# ---------------------------------------------------------------------------
# unary fast path


class _Struct:
    """Abstract unary structure: counts per atom plus constant atoms."""

    __slots__ = ("N", "k", "A", "n", "consts", "cache")

    def __init__(self, N: int, k: int):
        self.N = N
        self.k = k
        self.A = 1 << k
        self.n: tuple[int, ...] = ()
        self.consts: dict[str, int] = {}
        self.cache: dict[str, Fraction] = {}


def atom_predicates(vocab: Vocabulary, atom: int) -> list[tuple[str, bool]]:
    """Signs of each predicate in an atom; atom 0 is the all-positive one."""
    names = vocab.predicate_names()
    k = len(names)
    return [(p, ((atom >> (k - 1 - i)) & 1) == 0) for i, p in enumerate(names)]


def _compile_class(vocab: Vocabulary, f: Formula):
    """Compile a formula to fn(struct, env) -> bool over abstract unary
    structures; env maps variables to atom indices."""
    names = vocab.predicate_names()
    k = len(names)
    pred_pos = {p: i for i, p in enumerate(names)}

    def term_atom(t):
        if isinstance(t, Var):
            name = t.name
            return lambda s, env: env[name]
        if isinstance(t, Const):
            name = t.name
            return lambda s, env: s.consts[name]
        raise ClassUnsupported("function symbols are outside the unary fast path")

    def comp(g: Formula):
        if isinstance(g, Truth):
            return lambda s, env: True
        if isinstance(g, Falsity):
            return lambda s, env: False
        if isinstance(g, Atomic):
            if g.pred == "=":
                raise ClassUnsupported(
                    "equality is outside the unary fast path")
            i = pred_pos[g.pred]
            shift = k - 1 - i
            te = term_atom(g.args[0])
            return lambda s, env: ((te(s, env) >> shift) & 1) == 0
        if isinstance(g, Not):
            b = comp(g.body)
            return lambda s, env: not b(s, env)
        if isinstance(g, And):
            l, r = comp(g.left), comp(g.right)
            return lambda s, env: l(s, env) and r(s, env)
        if isinstance(g, Or):
            l, r = comp(g.left), comp(g.right)
            return lambda s, env: l(s, env) or r(s, env)
        if isinstance(g, Implies):
            l, r = comp(g.left), comp(g.right)
            return lambda s, env: (not l(s, env)) or r(s, env)
        if isinstance(g, Iff):
            l, r = comp(g.left), comp(g.right)
            return lambda s, env: l(s, env) == r(s, env)
        if isinstance(g, (Forall, Exists)):
            b = comp(g.body)
            var = g.var
            want_all = isinstance(g, Forall)

            def quant(s, env):
                old = env.get(var)
                try:
                    for j in range(s.A):
                        if s.n[j] == 0:
                            continue
                        env[var] = j
                        if b(s, env) != want_all:
                            return not want_all
                    return want_all
                finally:
                    if old is None:
                        env.pop(var, None)
                    else:
                        env[var] = old
            return quant
        if isinstance(g, (ExistsUnique, ExistsExactly)):
            b = comp(g.body)
            var = g.var
            target = 1 if isinstance(g, ExistsUnique) else g.count

            def count_q(s, env):
                old = env.get(var)
                try:
                    n = 0
                    for j in range(s.A):
                        if s.n[j] == 0:
                            continue
                        env[var] = j
                        if b(s, env):
                            n += s.n[j]
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
            le = comp_pexpr(g.lhs)
            re_ = comp_pexpr(g.rhs)
            if g.op == "=":
                return lambda s, env: le(s, env) == re_(s, env)
            return lambda s, env: le(s, env) <= re_(s, env)
        if isinstance(g, Compare):
            raise LangError(
                "approximate comparisons must be translated before counting")
        raise TypeError(f"not a formula: {g!r}")

    def comp_pexpr(e: PExpr):
        if isinstance(e, Rat):
            v = e.value
            return lambda s, env: v
        if isinstance(e, Eps):
            raise LangError("tolerance variables must be instantiated "
                            "before counting")
        if isinstance(e, CondProp):
            raise LangError("conditional proportions must be translated "
                            "before counting")
        if isinstance(e, Prop):
            body = comp(e.body)
            vs = e.vars
            kk = len(vs)
            closed = not pexpr_free_vars(e)
            key = format_pexpr(e) if closed else None

            def prop_val(s, env):
                if key is not None:
                    hit = s.cache.get(key)
                    if hit is not None:
                        return hit
                olds = [env.get(v) for v in vs]
                try:
                    live = [j for j in range(s.A) if s.n[j] > 0]
                    acc = 0
                    for tup in itertools.product(live, repeat=kk):
                        for v, j in zip(vs, tup):
                            env[v] = j
                        if body(s, env):
                            w = 1
                            for j in tup:
                                w *= s.n[j]
                            acc += w
                    val = Fraction(acc, s.N ** kk)
                finally:
                    for v, old in zip(vs, olds):
                        if old is None:
                            env.pop(v, None)
                        else:
                            env[v] = old
                if key is not None:
                    s.cache[key] = val
                return val
            return prop_val
        if isinstance(e, (PAdd, PSub, PMul)):
            l = comp_pexpr(e.left)
            r = comp_pexpr(e.right)
            if isinstance(e, PAdd):
                return lambda s, env: l(s, env) + r(s, env)
            if isinstance(e, PSub):
                return lambda s, env: l(s, env) - r(s, env)
            return lambda s, env: l(s, env) * r(s, env)
        raise TypeError(f"not a proportion expression: {e!r}")

    return comp(f)


def _compositions(total: int, parts: int):
    """All ordered tuples of nonnegative ints of given length summing to total."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def unary_count_many(vocab: Vocabulary, N: int, formulas: list[Formula],
                     budget: int = DEFAULT_BUDGET) -> list[int]:
    """Count satisfying worlds by summing over atom-count vectors.

    Requires a purely unary vocabulary and equality-free formulas; raises
    ClassUnsupported otherwise.  Agrees world-for-world with the naive
    enumeration (acceptance-tested bit-exactly).  The budget bounds the
    number of (composition, constant-assignment) pairs visited.
    """
    if not vocab.is_unary():
        raise ClassUnsupported("vocabulary has non-unary symbols")
    for f in formulas:
        _check_exact(f)
    compiled = [_compile_class(vocab, f) for f in formulas]

    k = len(vocab.predicates)
    A = 1 << k
    m = len(vocab.constants)
    work = math.comb(N + A - 1, A - 1) * A ** m
    if work > budget:
        raise BudgetExceededError(work, budget)
    const_names = list(vocab.constants)
    fact = [math.factorial(i) for i in range(N + 1)]
    counts = [0] * len(formulas)
    s = _Struct(N, k)

    for n in _compositions(N, A):
        s.n = n
        w_atoms = fact[N]
        for nj in n:
            w_atoms //= fact[nj]
        live = [j for j in range(A) if n[j] > 0]
        for assign in itertools.product(live, repeat=m):
            w_consts = 1
            for j in assign:
                w_consts *= n[j]
            s.consts = dict(zip(const_names, assign))
            s.cache = {}
            env: dict[str, int] = {}
            w = w_atoms * w_consts
            for t, fn in enumerate(compiled):
                if fn(s, env):
                    counts[t] += w
    return counts


# ---------------------------------------------------------------------------
# public entry points


def count_many(vocab: Vocabulary, N: int, formulas: list[Formula],
               budget: int = DEFAULT_BUDGET, jobs: int = 1,
               method: str = "auto") -> list[int]:
    """Count satisfying worlds for several formulas, sharing one pass.

    method: "auto" prefers the unary fast path, "unary" requires it,
    "naive" forces enumeration.
    """
    if method not in ("auto", "unary", "naive"):
        raise ValueError(f"unknown counting method {method!r}")
    if method != "naive":
        try:
            return unary_count_many(vocab, N, formulas, budget=budget)
        except ClassUnsupported as exc:
            if method == "unary":
                raise
            warnings.warn(
                f"unary fast path unavailable ({exc}); falling back to "
                "world enumeration", stacklevel=2)
    return naive_count_many(vocab, N, formulas, budget=budget, jobs=jobs)


def count_worlds(vocab: Vocabulary, N: int, formula: Formula,
                 budget: int = DEFAULT_BUDGET, jobs: int = 1,
                 method: str = "auto") -> WorldCount:
    (c,) = count_many(vocab, N, [formula], budget=budget, jobs=jobs,
                      method=method)
    return WorldCount(c, total_worlds(vocab, N))


def cond_prob(vocab: Vocabulary, N: int, phi: Formula, kb: Formula,
              budget: int = DEFAULT_BUDGET, jobs: int = 1,
              method: str = "auto") -> CondProb:
    """Pr_N(phi | kb) over worlds of size N; undefined when no world fits kb."""
    num, den = count_many(vocab, N, [And(phi, kb), kb],
                          budget=budget, jobs=jobs, method=method)
    if den == 0:
        return CondProb.undefined()
    return CondProb(Fraction(num, den), True)
