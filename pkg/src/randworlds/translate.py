"""Translation of approximate comparisons into exact, conditional-free form.

Two passes, in a fixed order that matters:

1. each approximate comparison becomes exact inequalities over tolerance
   variables: ``z <~[i] z'`` becomes ``z - z' <= eps[i]``, and ``z ~=[i] z'``
   becomes the conjunction of both directions;
2. conditional proportions are eliminated by clearing denominators: each
   side of an inequality is normalized to (numerator, multiset of proportion
   denominators), and both sides are multiplied by the pointwise-max multiset.

Clearing denominators after introducing the tolerance terms is what gives
empty-condition comparisons their "vacuously true" reading (0 <= 0), and it
keeps a world where a tiny nonempty class misbehaves from slipping through.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .lang import (
    And, Atomic, Compare, CondProp, Eps, ExactCompare, Exists, ExistsExactly,
    ExistsUnique, Falsity, Forall, Formula, Iff, Implies, LangError, Not, Or,
    PAdd, PExpr, PMul, Prop, PSub, Rat, Truth, tolerance_indices,
)
from . import parser as _parser


class TranslationError(LangError):
    pass


@dataclass(frozen=True)
class ToleranceVector:
    """Assignment of a positive rational tolerance to each comparison index."""

    taus: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        for i, t in self.taus:
            if t <= 0:
                raise TranslationError(f"tolerance for index {i} must be positive")

    @classmethod
    def uniform(cls, indices, tau: Fraction) -> "ToleranceVector":
        return cls(tuple((i, Fraction(tau)) for i in sorted(indices)))

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.taus)

    def __getitem__(self, i: int) -> Fraction:
        for j, t in self.taus:
            if j == i:
                return t
        raise KeyError(i)

    def scaled(self, index: int, factor: Fraction) -> "ToleranceVector":
        """A copy with one index's tolerance multiplied by factor."""
        return ToleranceVector(tuple(
            (i, t * factor if i == index else t) for i, t in self.taus))


# ---------------------------------------------------------------------------
# denominator-cleared fractional form


def _prop_key(p: Prop) -> str:
    return _parser.format_pexpr(p)


def _product(factors: list[PExpr]) -> PExpr:
    if not factors:
        return Rat(Fraction(1))
    out = factors[0]
    for f in factors[1:]:
        out = PMul(out, f)
    return out


def _denoms_sorted(d: Counter) -> list[PExpr]:
    out: list[PExpr] = []
    for p in sorted(d, key=_prop_key):
        out.extend([p] * d[p])
    return out


def _frac(e: PExpr) -> tuple[PExpr, Counter]:
    """Normalize e to numerator/denominator form.

    The denominator is a multiset of unconditional Prop terms; the value of
    e equals numerator divided by the product of the multiset whenever every
    denominator is nonzero.
    """
    if isinstance(e, (Rat, Eps)):
        return e, Counter()
    if isinstance(e, Prop):
        return Prop(_translate(e.body), e.vars), Counter()
    if isinstance(e, CondProp):
        num = Prop(And(_translate(e.body), _translate(e.cond)), e.vars)
        den = Prop(_translate(e.cond), e.vars)
        return num, Counter({den: 1})
    if isinstance(e, PMul):
        nl, dl = _frac(e.left)
        nr, dr = _frac(e.right)
        return PMul(nl, nr), dl + dr
    if isinstance(e, (PAdd, PSub)):
        nl, dl = _frac(e.left)
        nr, dr = _frac(e.right)
        common = dl | dr  # pointwise max
        lift_l = _denoms_sorted(common - dl)
        lift_r = _denoms_sorted(common - dr)
        nl2 = PMul(nl, _product(lift_l)) if lift_l else nl
        nr2 = PMul(nr, _product(lift_r)) if lift_r else nr
        return type(e)(nl2, nr2), common
    raise TypeError(f"not a proportion expression: {e!r}")


def _clear(lhs: PExpr, op: str, rhs: PExpr) -> ExactCompare:
    nl, dl = _frac(lhs)
    nr, dr = _frac(rhs)
    common = dl | dr
    lift_l = _denoms_sorted(common - dl)
    lift_r = _denoms_sorted(common - dr)
    if lift_l:
        nl = PMul(nl, _product(lift_l))
    if lift_r:
        nr = PMul(nr, _product(lift_r))
    return ExactCompare(nl, op, nr)


def _translate(f: Formula) -> Formula:
    if isinstance(f, (Truth, Falsity, Atomic)):
        return f
    if isinstance(f, Not):
        return Not(_translate(f.body))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(_translate(f.left), _translate(f.right))
    if isinstance(f, (Forall, Exists, ExistsUnique)):
        return type(f)(f.var, _translate(f.body))
    if isinstance(f, ExistsExactly):
        return ExistsExactly(f.count, f.var, _translate(f.body))
    if isinstance(f, ExactCompare):
        return _clear(f.lhs, f.op, f.rhs)
    if isinstance(f, Compare):
        eps = Eps(f.index)
        forward = _clear(PSub(f.lhs, f.rhs), "<=", eps)
        if f.op == "<~":
            return forward
        backward = _clear(PSub(f.rhs, f.lhs), "<=", eps)
        return And(forward, backward)
    raise TypeError(f"not a formula: {f!r}")


def translate_to_exact(f: Formula) -> Formula:
    """Replace approximate comparisons and conditional proportions.

    The result contains only exact comparisons, unconditional proportions,
    and tolerance variables ``eps[i]``.
    """
    return _translate(f)


def _subst_eps_pexpr(e: PExpr, taus: dict[int, Fraction]) -> PExpr:
    if isinstance(e, Rat):
        return e
    if isinstance(e, Eps):
        if e.index not in taus:
            raise TranslationError(f"no tolerance supplied for index {e.index}")
        return Rat(taus[e.index])
    if isinstance(e, Prop):
        return Prop(_subst_eps(e.body, taus), e.vars)
    if isinstance(e, CondProp):
        return CondProp(_subst_eps(e.body, taus), _subst_eps(e.cond, taus), e.vars)
    return type(e)(_subst_eps_pexpr(e.left, taus), _subst_eps_pexpr(e.right, taus))


def _subst_eps(f: Formula, taus: dict[int, Fraction]) -> Formula:
    if isinstance(f, (Truth, Falsity, Atomic)):
        return f
    if isinstance(f, Not):
        return Not(_subst_eps(f.body, taus))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(_subst_eps(f.left, taus), _subst_eps(f.right, taus))
    if isinstance(f, (Forall, Exists, ExistsUnique)):
        return type(f)(f.var, _subst_eps(f.body, taus))
    if isinstance(f, ExistsExactly):
        return ExistsExactly(f.count, f.var, _subst_eps(f.body, taus))
    if isinstance(f, ExactCompare):
        return ExactCompare(_subst_eps_pexpr(f.lhs, taus), f.op,
                            _subst_eps_pexpr(f.rhs, taus))
    if isinstance(f, Compare):
        raise TranslationError("instantiate_tolerances expects a translated formula")
    raise TypeError(f"not a formula: {f!r}")


def instantiate_tolerances(f: Formula, tv: ToleranceVector) -> Formula:
    """Replace every tolerance variable eps[i] by the rational tv[i]."""
    return _subst_eps(f, tv.as_dict())


def ground_kb(f: Formula, tau: Fraction | ToleranceVector) -> Formula:
    """Translate and instantiate in one step; tau may be a uniform stage."""
    g = translate_to_exact(f)
    if isinstance(tau, ToleranceVector):
        tv = tau
    else:
        idx = tolerance_indices(f) or {1}
        tv = ToleranceVector.uniform(idx, Fraction(tau))
    return instantiate_tolerances(g, tv)
