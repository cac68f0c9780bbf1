"""Maximum-entropy fast path for unary vocabularies.

With k unary predicates, every domain element realizes exactly one of the
2^k atoms (full sign patterns over the predicates).  A supported KB turns
into linear constraints on the vector p⃗ of atom proportions; as the domain
grows, worlds concentrate around the entropy maximizer of that polytope,
so limiting degrees of belief reduce to reading conditional probabilities
off the maxent point.

Atom ordering is binary counting on declaration order with positive sign
first: for predicates (P1, P2) the atoms are P1∧P2, P1∧¬P2, ¬P1∧P2,
¬P1∧¬P2.  Atom j (0-based) makes predicate i positive iff bit (k-1-i) of
j is clear — the same convention the counting module uses.

The solver is an active-set method: forced-zero atoms are detected by
linear programs, and the equality-constrained subproblems are solved by
Newton iteration on the dual, where the stationarity condition
p_j = exp(-1 - (C^T λ)_j) holds by construction.  The reported KKT
residual is therefore just primal infeasibility plus any wrong-sign
multipliers, and lands near machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .lang import (
    And, Atomic, Compare, CondProp, Const, ExactCompare, Forall, Formula,
    Iff, Implies, LangError, Not, Or, Prop, Rat, Truth, Var, Vocabulary,
    free_vars,
)
from .parser import format_formula


class MaxentUnsupported(LangError):
    """KB statement outside the fragment the fast path understands."""


class InfeasibleConstraints(LangError):
    pass


class ZeroMassContext(LangError):
    """The query context has probability zero at the maxent point."""


@dataclass(frozen=True)
class Atom:
    index: int                       # 1-based, per the documented ordering
    signs: tuple[tuple[str, bool], ...]

    def describe(self) -> str:
        return " and ".join(p if pos else f"not {p}" for p, pos in self.signs)


def atoms(vocab: Vocabulary) -> list[Atom]:
    if not vocab.is_unary():
        raise MaxentUnsupported("atoms require a purely unary vocabulary")
    names = vocab.predicate_names()
    k = len(names)
    if k < 1:
        raise MaxentUnsupported("need at least one predicate")
    out = []
    for j in range(1 << k):
        signs = tuple((p, ((j >> (k - 1 - i)) & 1) == 0)
                      for i, p in enumerate(names))
        out.append(Atom(j + 1, signs))
    return out


@dataclass(frozen=True)
class LinearConstraint:
    """sum_j coeffs[j] * p_j  (op)  rhs, with op in {'=', '<='}."""

    coeffs: tuple[Fraction, ...]
    op: str
    rhs: Fraction
    origin: str = ""

    def describe(self) -> str:
        terms = [f"{c}*p{j + 1}" for j, c in enumerate(self.coeffs) if c != 0]
        lhs = " + ".join(terms) if terms else "0"
        return f"{lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class ConstraintSet:
    k: int
    constraints: tuple[LinearConstraint, ...]

    @property
    def n_atoms(self) -> int:
        return 1 << self.k


@dataclass(frozen=True)
class AtomDistribution:
    p: tuple[float, ...]
    entropy: float
    active: tuple[str, ...]
    kkt_residual: float


# ---------------------------------------------------------------------------
# constraint extraction


def _conjuncts(f: Formula):
    if isinstance(f, And):
        yield from _conjuncts(f.left)
        yield from _conjuncts(f.right)
    else:
        yield f


def _atom_sat(vocab: Vocabulary, body: Formula, var: str) -> list[bool]:
    """Truth of a quantifier-free unary combination at each atom."""
    names = vocab.predicate_names()
    k = len(names)
    pos = {p: i for i, p in enumerate(names)}

    def ev(g: Formula, j: int) -> bool:
        if isinstance(g, Truth):
            return True
        if isinstance(g, Atomic):
            if g.pred == "=" or len(g.args) != 1:
                raise MaxentUnsupported("only unary literals allowed here")
            (t,) = g.args
            if not isinstance(t, Var) or t.name != var:
                raise MaxentUnsupported(
                    f"literal must apply to the bound variable {var}")
            return ((j >> (k - 1 - pos[g.pred])) & 1) == 0
        if isinstance(g, Not):
            return not ev(g.body, j)
        if isinstance(g, And):
            return ev(g.left, j) and ev(g.right, j)
        if isinstance(g, Or):
            return ev(g.left, j) or ev(g.right, j)
        if isinstance(g, Implies):
            return (not ev(g.left, j)) or ev(g.right, j)
        if isinstance(g, Iff):
            return ev(g.left, j) == ev(g.right, j)
        raise MaxentUnsupported(
            f"unsupported shape inside a unary combination: {format_formula(g)}")

    return [ev(body, j) for j in range(1 << k)]


def _indicator(vocab: Vocabulary, body: Formula, var: str) -> list[Fraction]:
    return [Fraction(1) if s else Fraction(0)
            for s in _atom_sat(vocab, body, var)]


def _const_combination(f: Formula) -> str | None:
    """If f is a Boolean combination of unary literals about one constant,
    return the constant's name, else None."""
    consts: set[str] = set()

    def walk(g: Formula) -> bool:
        if isinstance(g, Atomic):
            if g.pred == "=" or len(g.args) != 1:
                return False
            (t,) = g.args
            if not isinstance(t, Const):
                return False
            consts.add(t.name)
            return True
        if isinstance(g, Not):
            return walk(g.body)
        if isinstance(g, (And, Or, Implies, Iff)):
            return walk(g.left) and walk(g.right)
        return False

    if walk(f) and len(consts) == 1:
        return consts.pop()
    return None


def constraints_from_kb(vocab: Vocabulary, kb: Formula
                        ) -> tuple[ConstraintSet, dict[str, list[Formula]]]:
    """Extract S(KB) plus per-constant context assertions.

    Supported statements: universally quantified unary combinations,
    approximate comparisons between a rational literal and a (conditional)
    proportion of unary combinations, and Boolean combinations about a
    single constant (which go to the context, not the polytope).
    Tolerances are dropped: this is the shrinking-tolerance limit.
    """
    if not vocab.is_unary():
        raise MaxentUnsupported("constraint extraction needs a unary vocabulary")
    A = 1 << len(vocab.predicates)
    cons: list[LinearConstraint] = []
    context: dict[str, list[Formula]] = {}

    def prop_sides(e) -> tuple[list[Fraction], list[Fraction] | None]:
        """Return (numerator indicator, condition indicator or None)."""
        if isinstance(e, Prop):
            if len(e.vars) != 1:
                raise MaxentUnsupported("only single-variable proportions")
            return _indicator(vocab, e.body, e.vars[0]), None
        if isinstance(e, CondProp):
            if len(e.vars) != 1:
                raise MaxentUnsupported("only single-variable proportions")
            v = e.vars[0]
            num = _indicator(vocab, And(e.body, e.cond), v)
            den = _indicator(vocab, e.cond, v)
            return num, den
        raise MaxentUnsupported("expected a proportion term")

    def add_compare(lhs, op, rhs, origin):
        # normalize to: proportion (op) literal, flipping <= when the
        # literal is on the left
        if isinstance(lhs, Rat) and not isinstance(rhs, Rat):
            if op == "<~":
                num, den = prop_sides(rhs)
                alpha = lhs.value
                # alpha <= prop  ==>  alpha*den - num <= 0
                if den is None:
                    den = [Fraction(1)] * A
                coeffs = [alpha * d - n for n, d in zip(num, den)]
                cons.append(LinearConstraint(tuple(coeffs), "<=", Fraction(0),
                                             origin))
                return
            lhs, rhs = rhs, lhs
        if not isinstance(rhs, Rat):
            raise MaxentUnsupported(
                "one side of a comparison must be a rational literal")
        num, den = prop_sides(lhs)
        alpha = rhs.value
        if den is None:
            den = [Fraction(1)] * A
        coeffs = [n - alpha * d for n, d in zip(num, den)]
        if op == "~=":
            cons.append(LinearConstraint(tuple(coeffs), "=", Fraction(0), origin))
        else:
            cons.append(LinearConstraint(tuple(coeffs), "<=", Fraction(0), origin))

    for stmt in _conjuncts(kb):
        if isinstance(stmt, Truth):
            continue
        if isinstance(stmt, Forall):
            sat = _atom_sat(vocab, stmt.body, stmt.var)
            for j, ok in enumerate(sat):
                if not ok:
                    row = [Fraction(0)] * A
                    row[j] = Fraction(1)
                    cons.append(LinearConstraint(
                        tuple(row), "=", Fraction(0),
                        format_formula(stmt)))
            continue
        if isinstance(stmt, Compare):
            add_compare(stmt.lhs, stmt.op, stmt.rhs, format_formula(stmt))
            continue
        c = _const_combination(stmt)
        if c is not None and not free_vars(stmt):
            context.setdefault(c, []).append(stmt)
            continue
        raise MaxentUnsupported(
            f"statement outside the supported fragment: {format_formula(stmt)}")

    return ConstraintSet(len(vocab.predicates), tuple(cons)), context


# ---------------------------------------------------------------------------
# solver


def _lp_matrices(cs: ConstraintSet):
    A = cs.n_atoms
    a_eq = [[1.0] * A]
    b_eq = [1.0]
    a_ub, b_ub = [], []
    for c in cs.constraints:
        row = [float(x) for x in c.coeffs]
        if c.op == "=":
            a_eq.append(row)
            b_eq.append(float(c.rhs))
        else:
            a_ub.append(row)
            b_ub.append(float(c.rhs))
    return a_eq, b_eq, a_ub or None, b_ub or None


def _forced_zeros(cs: ConstraintSet) -> list[bool]:
    """Atoms whose proportion is zero at every feasible point."""
    A = cs.n_atoms
    a_eq, b_eq, a_ub, b_ub = _lp_matrices(cs)
    forced = []
    for j in range(A):
        c = [0.0] * A
        c[j] = -1.0  # maximize p_j
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                      bounds=(0, 1), method="highs")
        if not res.success:
            raise InfeasibleConstraints("constraint set is infeasible")
        forced.append(-res.fun < 1e-9)
    return forced


def _newton_dual(C: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve max H(p) s.t. Cp = d, p = exp(-1 - C^T lam); returns (p, lam)."""
    m = C.shape[0]
    lam = np.zeros(m)
    for _ in range(200):
        expo = np.clip(-1.0 - C.T @ lam, -700.0, 60.0)
        p = np.exp(expo)
        g = C @ p - d
        if np.max(np.abs(g)) < 1e-13:
            break
        J = -(C * p) @ C.T
        try:
            step = np.linalg.solve(J, g)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(J, g, rcond=None)
        # damped update
        t = 1.0
        base = np.max(np.abs(g))
        for _ in range(50):
            trial = lam - t * step
            pt = np.exp(np.clip(-1.0 - C.T @ trial, -700.0, 60.0))
            if np.max(np.abs(C @ pt - d)) < base:
                break
            t *= 0.5
        lam = lam - t * step
    expo = np.clip(-1.0 - C.T @ lam, -700.0, 60.0)
    return np.exp(expo), lam


def maxent_point(cs: ConstraintSet) -> AtomDistribution:
    """Entropy maximizer over the constraint polytope (with simplex)."""
    A = cs.n_atoms
    forced = _forced_zeros(cs)
    support = [j for j in range(A) if not forced[j]]
    if not support:
        raise InfeasibleConstraints("every atom is forced to zero")

    eqs = [c for c in cs.constraints if c.op == "="]
    ineqs = [c for c in cs.constraints if c.op == "<="]

    def restrict(c: LinearConstraint):
        return np.array([float(c.coeffs[j]) for j in support]), float(c.rhs)

    base_rows = [np.ones(len(support))]
    base_rhs = [1.0]
    for c in eqs:
        row, b = restrict(c)
        if np.any(row != 0.0):
            base_rows.append(row)
            base_rhs.append(b)
    ineq_rows = [restrict(c) for c in ineqs]

    active: set[int] = set()
    p_s = None
    lam = None
    for _ in range(4 * max(1, len(ineqs)) + 4):
        C = np.array(base_rows + [ineq_rows[i][0] for i in sorted(active)])
        d = np.array(base_rhs + [ineq_rows[i][1] for i in sorted(active)])
        p_s, lam = _newton_dual(C, d)
        # wrong-sign multiplier: that inequality is not really binding
        drop = None
        for pos, i in enumerate(sorted(active)):
            if lam[len(base_rows) + pos] < -1e-10:
                drop = i
                break
        if drop is not None:
            active.discard(drop)
            continue
        # violated inactive inequality: bring it in
        worst, worst_v = None, 1e-10
        for i, (row, b) in enumerate(ineq_rows):
            if i in active:
                continue
            v = float(row @ p_s - b)
            if v > worst_v:
                worst, worst_v = i, v
        if worst is None:
            break
        active.add(worst)

    p = np.zeros(A)
    for idx, j in enumerate(support):
        p[j] = p_s[idx]

    # honest residual: primal feasibility over everything, multiplier signs
    resid = abs(float(np.sum(p)) - 1.0)
    active_desc = []
    for c in cs.constraints:
        val = float(sum(float(x) * p[j] for j, x in enumerate(c.coeffs)))
        gap = val - float(c.rhs)
        if c.op == "=":
            resid = max(resid, abs(gap))
            active_desc.append(c.describe())
        else:
            resid = max(resid, max(0.0, gap))
            if abs(gap) < 1e-9:
                active_desc.append(c.describe())
    entropy = float(-np.sum(p[p > 0] * np.log(p[p > 0])))
    return AtomDistribution(tuple(float(x) for x in p), entropy,
                            tuple(active_desc), resid)


# ---------------------------------------------------------------------------
# queries


def _mass(vocab: Vocabulary, dist: AtomDistribution, body: Formula,
          var: str) -> float:
    sat = _atom_sat(vocab, body, var)
    return sum(p for p, s in zip(dist.p, sat) if s)


def _about_var(f: Formula, const: str, var: str) -> Formula:
    """Rewrite literals about a constant into literals about a variable."""
    if isinstance(f, Atomic):
        return Atomic(f.pred, (Var(var),))
    if isinstance(f, Not):
        return Not(_about_var(f.body, const, var))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(_about_var(f.left, const, var),
                       _about_var(f.right, const, var))
    if isinstance(f, Truth):
        return f
    raise MaxentUnsupported("query must be a Boolean combination of literals")


def maxent_degree(vocab: Vocabulary, kb: Formula, query: Formula) -> float:
    """Limiting degree of belief via the concentration phenomenon.

    The query must be a Boolean combination of unary literals about one
    constant; the KB's assertions about that constant form the context.
    """
    cs, context = constraints_from_kb(vocab, kb)
    dist = maxent_point(cs)
    c = _const_combination(query)
    if c is None:
        raise MaxentUnsupported(
            "query must be a Boolean combination of unary literals about "
            "a single constant")
    var = "x"
    kappa: Formula = Truth()
    for stmt in context.get(c, []):
        g = _about_var(stmt, c, var)
        kappa = g if isinstance(kappa, Truth) else And(kappa, g)
    psi = _about_var(query, c, var)
    den = _mass(vocab, dist, kappa, var)
    if den <= 1e-12:
        raise ZeroMassContext(
            "context has zero probability at the maxent point; fall back "
            "to exact counting")
    num = _mass(vocab, dist, And(psi, kappa), var)
    return num / den


# ---------------------------------------------------------------------------
# default rules as statistical statements


def gmp_translate(rules, context: Formula,
                  constant: str = "c") -> tuple[Vocabulary, Formula, Formula]:
    """Turn propositional default rules into a unary statistical KB.

    Each rule antecedent/consequent is a Boolean combination of unary
    predicates applied to the variable ``x``; a rule of strength index i
    becomes ``prop{consequent | antecedent}[x] ~=[i] 1``; the context
    becomes an assertion about a fresh constant.  Returns the vocabulary,
    the KB (rule statements plus the context assertion), and the context
    assertion alone.
    """
    names: list[str] = []

    def collect(f: Formula):
        if isinstance(f, Atomic) and f.pred != "=" and f.pred not in names:
            names.append(f.pred)
        elif isinstance(f, Not):
            collect(f.body)
        elif isinstance(f, (And, Or, Implies, Iff)):
            collect(f.left)
            collect(f.right)

    for r in rules:
        collect(r.antecedent)
        collect(r.consequent)
    collect(context)
    vocab = Vocabulary(tuple((n, 1) for n in names), (), (constant,))

    def at_const(f: Formula) -> Formula:
        if isinstance(f, Atomic):
            return Atomic(f.pred, (Const(constant),))
        if isinstance(f, Not):
            return Not(at_const(f.body))
        if isinstance(f, (And, Or, Implies, Iff)):
            return type(f)(at_const(f.left), at_const(f.right))
        if isinstance(f, Truth):
            return f
        raise MaxentUnsupported("context must be a Boolean combination")

    stmts: list[Formula] = []
    for r in rules:
        stmts.append(Compare(
            CondProp(r.consequent, r.antecedent, ("x",)), "~=",
            Rat(Fraction(1)), r.strength_index))
    ctx = at_const(context)
    kb: Formula = ctx
    for s in stmts:
        kb = And(kb, s)
    return vocab, kb, ctx
