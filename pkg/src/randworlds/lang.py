"""AST for the statistical knowledge-base language.

Two layers share these node types:

* the surface language, with approximate comparisons (``~=[i]``, ``<~[i]``)
  and conditional proportions ``prop{psi | theta}[x]``;
* the exact language produced by :mod:`randworlds.translate`, with plain
  ``=`` / ``<=`` comparisons, subtraction, and tolerance variables.

All nodes are immutable; structural equality is the AST-equality used by the
round-trip law ``parse(print(f)) == f``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union


class LangError(Exception):
    """Base class for language-level errors."""


class DeclarationError(LangError):
    pass


class UnboundVariableError(LangError):
    pass


class ArityError(LangError):
    pass


class UndeclaredSymbolError(LangError):
    pass


# ---------------------------------------------------------------------------
# vocabulary


@dataclass(frozen=True)
class Vocabulary:
    """A finite first-order vocabulary.

    ``predicates`` maps name to arity (>= 1); ``functions`` maps name to
    arity (>= 1); ``constants`` is a tuple of names.  Insertion order of
    predicates is significant: it fixes the atom ordering used by the
    unary fast path and the maxent module.
    """

    predicates: tuple[tuple[str, int], ...] = ()
    functions: tuple[tuple[str, int], ...] = ()
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.predicates]
        names += [n for n, _ in self.functions]
        names += list(self.constants)
        if len(names) != len(set(names)):
            raise DeclarationError("duplicate symbol declaration")
        for n, r in self.predicates:
            if r < 1:
                raise DeclarationError(f"predicate {n} must have arity >= 1")
        for n, r in self.functions:
            if r < 1:
                raise DeclarationError(f"function {n} must have arity >= 1")

    @property
    def predicate_arity(self) -> dict[str, int]:
        return dict(self.predicates)

    @property
    def function_arity(self) -> dict[str, int]:
        return dict(self.functions)

    def is_unary(self) -> bool:
        """True when the vocabulary has only unary predicates and constants."""
        return not self.functions and all(r == 1 for _, r in self.predicates)

    def predicate_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.predicates)

    def merge(self, other: "Vocabulary") -> "Vocabulary":
        """Union of two vocabularies; shared symbols must agree on arity."""
        preds = dict(self.predicates)
        for n, r in other.predicates:
            if preds.get(n, r) != r:
                raise DeclarationError(f"conflicting arity for predicate {n}")
            preds[n] = r
        funcs = dict(self.functions)
        for n, r in other.functions:
            if funcs.get(n, r) != r:
                raise DeclarationError(f"conflicting arity for function {n}")
            funcs[n] = r
        consts = list(self.constants)
        for c in other.constants:
            if c not in consts:
                consts.append(c)
        return Vocabulary(tuple(preds.items()), tuple(funcs.items()), tuple(consts))


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class App:
    func: str
    args: tuple["Term", ...]


Term = Union[Var, Const, App]


# ---------------------------------------------------------------------------
# proportion expressions


@dataclass(frozen=True)
class Rat:
    """Rational literal, kept in lowest terms by Fraction."""

    value: Fraction


@dataclass(frozen=True)
class Prop:
    """``prop{body}[vars]``: fraction of tuples satisfying body."""

    body: "Formula"
    vars: tuple[str, ...]

    def __post_init__(self):
        if not self.vars or len(set(self.vars)) != len(self.vars):
            raise LangError("proportion variables must be nonempty and distinct")


@dataclass(frozen=True)
class CondProp:
    """``prop{body | cond}[vars]``: conditional proportion (surface only)."""

    body: "Formula"
    cond: "Formula"
    vars: tuple[str, ...]

    def __post_init__(self):
        if not self.vars or len(set(self.vars)) != len(self.vars):
            raise LangError("proportion variables must be nonempty and distinct")


@dataclass(frozen=True)
class PAdd:
    left: "PExpr"
    right: "PExpr"


@dataclass(frozen=True)
class PSub:
    """Difference; only produced by translation (exact layer)."""

    left: "PExpr"
    right: "PExpr"


@dataclass(frozen=True)
class PMul:
    left: "PExpr"
    right: "PExpr"


@dataclass(frozen=True)
class Eps:
    """Tolerance variable for approximate-comparison index i (exact layer)."""

    index: int


PExpr = Union[Rat, Prop, CondProp, PAdd, PSub, PMul, Eps]


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Truth:
    pass


@dataclass(frozen=True)
class Falsity:
    pass


@dataclass(frozen=True)
class Atomic:
    """Predicate application; ``pred == '='`` is built-in equality."""

    pred: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class ExistsUnique:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class ExistsExactly:
    count: int
    var: str
    body: "Formula"

    def __post_init__(self):
        if self.count < 0:
            raise LangError("exists_exactly count must be nonnegative")


@dataclass(frozen=True)
class Compare:
    """Approximate comparison: op is '~=' or '<~', index is the tolerance index."""

    lhs: PExpr
    op: str
    rhs: PExpr
    index: int

    def __post_init__(self):
        if self.op not in ("~=", "<~"):
            raise LangError(f"bad approximate comparison operator {self.op!r}")
        if self.index < 1:
            raise LangError("comparison index must be positive")


@dataclass(frozen=True)
class ExactCompare:
    """Exact comparison over proportion expressions: op is '=' or '<='."""

    lhs: PExpr
    op: str
    rhs: PExpr

    def __post_init__(self):
        if self.op not in ("=", "<="):
            raise LangError(f"bad exact comparison operator {self.op!r}")


Formula = Union[
    Truth, Falsity, Atomic, Not, And, Or, Implies, Iff,
    Forall, Exists, ExistsUnique, ExistsExactly, Compare, ExactCompare,
]

TRUE = Truth()
FALSE = Falsity()


def conj(*fs: Formula) -> Formula:
    """Left-associated conjunction; empty conjunction is TRUE."""
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


# ---------------------------------------------------------------------------
# traversal helpers


def term_free_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Const):
        return set()
    out: set[str] = set()
    for a in t.args:
        out |= term_free_vars(a)
    return out


def pexpr_free_vars(e: PExpr) -> set[str]:
    if isinstance(e, (Rat, Eps)):
        return set()
    if isinstance(e, Prop):
        return free_vars(e.body) - set(e.vars)
    if isinstance(e, CondProp):
        return (free_vars(e.body) | free_vars(e.cond)) - set(e.vars)
    return pexpr_free_vars(e.left) | pexpr_free_vars(e.right)


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, (Truth, Falsity)):
        return set()
    if isinstance(f, Atomic):
        out: set[str] = set()
        for t in f.args:
            out |= term_free_vars(t)
        return out
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or, Implies, Iff)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Forall, Exists, ExistsUnique, ExistsExactly)):
        return free_vars(f.body) - {f.var}
    if isinstance(f, (Compare, ExactCompare)):
        return pexpr_free_vars(f.lhs) | pexpr_free_vars(f.rhs)
    raise TypeError(f"not a formula: {f!r}")


def subformulas(f: Formula) -> Iterator[Formula]:
    """All formula nodes, including those nested inside proportion bodies."""
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.body)
    elif isinstance(f, (And, Or, Implies, Iff)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Forall, Exists, ExistsUnique, ExistsExactly)):
        yield from subformulas(f.body)
    elif isinstance(f, (Compare, ExactCompare)):
        for e in (f.lhs, f.rhs):
            yield from _pexpr_subformulas(e)


def _pexpr_subformulas(e: PExpr) -> Iterator[Formula]:
    if isinstance(e, Prop):
        yield from subformulas(e.body)
    elif isinstance(e, CondProp):
        yield from subformulas(e.body)
        yield from subformulas(e.cond)
    elif isinstance(e, (PAdd, PSub, PMul)):
        yield from _pexpr_subformulas(e.left)
        yield from _pexpr_subformulas(e.right)


def pexprs(f: Formula) -> Iterator[PExpr]:
    """All proportion-expression nodes anywhere in the formula."""
    for g in subformulas(f):
        if isinstance(g, (Compare, ExactCompare)):
            for e in (g.lhs, g.rhs):
                yield from _pexpr_nodes(e)


def _pexpr_nodes(e: PExpr) -> Iterator[PExpr]:
    yield e
    if isinstance(e, (PAdd, PSub, PMul)):
        yield from _pexpr_nodes(e.left)
        yield from _pexpr_nodes(e.right)


def tolerance_indices(f: Formula) -> set[int]:
    """Indices of approximate comparisons and tolerance variables in f."""
    out = set()
    for g in subformulas(f):
        if isinstance(g, Compare):
            out.add(g.index)
    for e in pexprs(f):
        if isinstance(e, Eps):
            out.add(e.index)
    return out


def uses_functions(f: Formula) -> bool:
    def term_has_app(t: Term) -> bool:
        return isinstance(t, App)

    for g in subformulas(f):
        if isinstance(g, Atomic) and any(term_has_app(t) for t in g.args):
            return True
    return False


# ---------------------------------------------------------------------------
# validation against a vocabulary


def check_formula(vocab: Vocabulary, f: Formula, bound: frozenset[str] = frozenset()):
    """Raise if f uses undeclared symbols, wrong arities, or unbound variables."""

    def check_term(t: Term, bound: frozenset[str]):
        if isinstance(t, Var):
            if t.name not in bound:
                raise UnboundVariableError(f"unbound variable {t.name}")
        elif isinstance(t, Const):
            if t.name not in vocab.constants:
                raise UndeclaredSymbolError(f"undeclared constant {t.name}")
        else:
            fa = vocab.function_arity
            if t.func not in fa:
                raise UndeclaredSymbolError(f"undeclared function {t.func}")
            if len(t.args) != fa[t.func]:
                raise ArityError(
                    f"function {t.func} expects {fa[t.func]} args, got {len(t.args)}")
            for a in t.args:
                check_term(a, bound)

    def check_pexpr(e: PExpr, bound: frozenset[str]):
        if isinstance(e, (Rat, Eps)):
            return
        if isinstance(e, Prop):
            rec(e.body, bound | set(e.vars))
        elif isinstance(e, CondProp):
            rec(e.body, bound | set(e.vars))
            rec(e.cond, bound | set(e.vars))
        else:
            check_pexpr(e.left, bound)
            check_pexpr(e.right, bound)

    def rec(g: Formula, bound: frozenset[str]):
        if isinstance(g, (Truth, Falsity)):
            return
        if isinstance(g, Atomic):
            if g.pred == "=":
                if len(g.args) != 2:
                    raise ArityError("equality takes two terms")
            else:
                pa = vocab.predicate_arity
                if g.pred not in pa:
                    raise UndeclaredSymbolError(f"undeclared predicate {g.pred}")
                if len(g.args) != pa[g.pred]:
                    raise ArityError(
                        f"predicate {g.pred} expects {pa[g.pred]} args, got {len(g.args)}")
            for t in g.args:
                check_term(t, bound)
        elif isinstance(g, Not):
            rec(g.body, bound)
        elif isinstance(g, (And, Or, Implies, Iff)):
            rec(g.left, bound)
            rec(g.right, bound)
        elif isinstance(g, (Forall, Exists, ExistsUnique, ExistsExactly)):
            rec(g.body, bound | {g.var})
        elif isinstance(g, (Compare, ExactCompare)):
            check_pexpr(g.lhs, bound)
            check_pexpr(g.rhs, bound)
        else:
            raise TypeError(f"not a formula: {g!r}")

    rec(f, bound)


# ---------------------------------------------------------------------------
# desugaring of counting quantifiers

_FRESH = 0


def _fresh(base: str, avoid: set[str]) -> str:
    i = 1
    while f"{base}_{i}" in avoid:
        i += 1
    return f"{base}_{i}"


def desugar(f: Formula) -> Formula:
    """Rewrite exists! and exists_exactly into plain quantifiers and equality.

    ``exists_exactly[n] x phi(x)`` becomes: there are n pairwise-distinct
    witnesses and every element satisfying phi equals one of them.
    """
    if isinstance(f, (Truth, Falsity, Atomic)):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.body))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(desugar(f.left), desugar(f.right))
    if isinstance(f, Forall):
        return Forall(f.var, desugar(f.body))
    if isinstance(f, Exists):
        return Exists(f.var, desugar(f.body))
    if isinstance(f, ExistsUnique):
        return desugar(ExistsExactly(1, f.var, f.body))
    if isinstance(f, ExistsExactly):
        body = desugar(f.body)
        n, x = f.count, f.var
        avoid = _all_var_names(body) | {x}
        if n == 0:
            return Forall(x, Not(body))
        ws = []
        for _ in range(n):
            w = _fresh(x, avoid)
            avoid.add(w)
            ws.append(w)
        parts: list[Formula] = [substitute_var(body, x, Var(w)) for w in ws]
        for i in range(n):
            for j in range(i + 1, n):
                parts.append(Not(Atomic("=", (Var(ws[i]), Var(ws[j])))))
        y = _fresh(x, avoid)
        cover = Forall(y, Implies(
            substitute_var(body, x, Var(y)),
            _disj([Atomic("=", (Var(y), Var(w))) for w in ws])))
        parts.append(cover)
        out: Formula = conj(*parts)
        for w in reversed(ws):
            out = Exists(w, out)
        return out
    if isinstance(f, Compare):
        return Compare(_desugar_pexpr(f.lhs), f.op, _desugar_pexpr(f.rhs), f.index)
    if isinstance(f, ExactCompare):
        return ExactCompare(_desugar_pexpr(f.lhs), f.op, _desugar_pexpr(f.rhs))
    raise TypeError(f"not a formula: {f!r}")


def _desugar_pexpr(e: PExpr) -> PExpr:
    if isinstance(e, (Rat, Eps)):
        return e
    if isinstance(e, Prop):
        return Prop(desugar(e.body), e.vars)
    if isinstance(e, CondProp):
        return CondProp(desugar(e.body), desugar(e.cond), e.vars)
    return type(e)(_desugar_pexpr(e.left), _desugar_pexpr(e.right))


def _disj(fs: list[Formula]) -> Formula:
    if not fs:
        return FALSE
    out = fs[0]
    for g in fs[1:]:
        out = Or(out, g)
    return out


def _all_var_names(f: Formula) -> set[str]:
    out: set[str] = set()
    for g in subformulas(f):
        if isinstance(g, (Forall, Exists, ExistsUnique, ExistsExactly)):
            out.add(g.var)
        if isinstance(g, Atomic):
            for t in g.args:
                out |= term_free_vars(t)
        if isinstance(g, (Compare, ExactCompare)):
            for e in (g.lhs, g.rhs):
                out |= _pexpr_var_names(e)
    return out


def _pexpr_var_names(e: PExpr) -> set[str]:
    if isinstance(e, (Rat, Eps)):
        return set()
    if isinstance(e, (Prop, CondProp)):
        return set(e.vars)
    return _pexpr_var_names(e.left) | _pexpr_var_names(e.right)


def substitute_var(f: Formula, name: str, repl: Term) -> Formula:
    """Capture-avoiding-enough substitution of a free variable by a term.

    Only used with fresh replacement variables or constants, so shadowing is
    the only case that needs care.
    """

    def sub_term(t: Term) -> Term:
        if isinstance(t, Var):
            return repl if t.name == name else t
        if isinstance(t, Const):
            return t
        return App(t.func, tuple(sub_term(a) for a in t.args))

    def sub_pexpr(e: PExpr) -> PExpr:
        if isinstance(e, (Rat, Eps)):
            return e
        if isinstance(e, Prop):
            if name in e.vars:
                return e
            return Prop(substitute_var(e.body, name, repl), e.vars)
        if isinstance(e, CondProp):
            if name in e.vars:
                return e
            return CondProp(substitute_var(e.body, name, repl),
                            substitute_var(e.cond, name, repl), e.vars)
        return type(e)(sub_pexpr(e.left), sub_pexpr(e.right))

    if isinstance(f, (Truth, Falsity)):
        return f
    if isinstance(f, Atomic):
        return Atomic(f.pred, tuple(sub_term(t) for t in f.args))
    if isinstance(f, Not):
        return Not(substitute_var(f.body, name, repl))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(substitute_var(f.left, name, repl),
                       substitute_var(f.right, name, repl))
    if isinstance(f, (Forall, Exists, ExistsUnique)):
        if f.var == name:
            return f
        return type(f)(f.var, substitute_var(f.body, name, repl))
    if isinstance(f, ExistsExactly):
        if f.var == name:
            return f
        return ExistsExactly(f.count, f.var, substitute_var(f.body, name, repl))
    if isinstance(f, Compare):
        return Compare(sub_pexpr(f.lhs), f.op, sub_pexpr(f.rhs), f.index)
    if isinstance(f, ExactCompare):
        return ExactCompare(sub_pexpr(f.lhs), f.op, sub_pexpr(f.rhs))
    raise TypeError(f"not a formula: {f!r}")
