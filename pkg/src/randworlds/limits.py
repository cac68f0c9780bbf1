"""Desk-scale estimation of limiting degrees of belief.

The degree of belief behind a query is a double limit over exact
finite-domain values: domain size N grows first, the tolerance vector
shrinks second, and the order matters.  This module evaluates an exact
grid of Pr_N at a fixed schedule of (N, tolerance-stage) pairs and turns
it into a verdict:

* converged  — values stabilize in N within every stage and drift little
  across stages; the reported value is the smallest-stage representative;
* nonrobust  — index-skewed tolerance probes (or failed stabilization)
  show the answer depends on how tolerances shrink relative to each other;
* undefined  — some stage has no satisfying worlds for any large N in the
  grid (evidence the knowledge base is not eventually consistent);
* budget-limited — counting blew the world budget before a verdict.

Everything here is evidence at desk scale, not a proof about the limit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .counting import BudgetExceededError, CondProb, DEFAULT_BUDGET, cond_prob
from .lang import Formula, Vocabulary, subformulas, Atomic, tolerance_indices, uses_functions
from .translate import ToleranceVector, instantiate_tolerances, translate_to_exact

DEFAULT_STAGES = (Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))


@dataclass(frozen=True)
class Thresholds:
    delta_n: Fraction = Fraction(1, 20)
    delta_eps: Fraction = Fraction(1, 20)


@dataclass(frozen=True)
class Schedule:
    """Increasing domain sizes crossed with decreasing tolerance stages."""

    domain_sizes: tuple[int, ...]
    stages: tuple[ToleranceVector, ...]

    def __post_init__(self):
        if not self.domain_sizes or not self.stages:
            raise ValueError("schedule must be nonempty")
        if list(self.domain_sizes) != sorted(set(self.domain_sizes)):
            raise ValueError("domain sizes must be strictly increasing")
        for a, b in zip(self.stages, self.stages[1:]):
            da, db = a.as_dict(), b.as_dict()
            if set(da) != set(db) or not all(db[i] <= da[i] for i in da):
                raise ValueError("stages must be pointwise decreasing")

    def top_half(self) -> tuple[int, ...]:
        ns = self.domain_sizes
        return ns[len(ns) // 2:]


def _kb_is_small_domain(vocab: Vocabulary, kb: Formula, query: Formula) -> bool:
    if not vocab.is_unary():
        return False
    for f in (kb, query):
        if uses_functions(f):
            return False
        for g in subformulas(f):
            if isinstance(g, Atomic) and g.pred == "=":
                return False
    return True


def default_schedule(vocab: Vocabulary, kb: Formula,
                     query: Formula | None = None,
                     max_n: int | None = None) -> Schedule:
    """N in {2..8} when the unary fast path applies, {2..5} otherwise;
    three uniform tolerance stages 1/4, 1/8, 1/16."""
    q = query if query is not None else kb
    hi = 8 if _kb_is_small_domain(vocab, kb, q) else 5
    if max_n is not None:
        hi = min(hi, max_n)
    idx = (tolerance_indices(kb) | tolerance_indices(q)) or {1}
    stages = tuple(ToleranceVector.uniform(idx, t) for t in DEFAULT_STAGES)
    return Schedule(tuple(range(2, hi + 1)), stages)


@dataclass(frozen=True)
class GridCell:
    N: int
    stage: int
    prob: CondProb


@dataclass(frozen=True)
class ProbeResult:
    index: int
    factor: str           # "x4" or "/4"
    representative: Fraction | None


@dataclass(frozen=True)
class BeliefEstimate:
    grid: tuple[GridCell, ...]
    stage_low: tuple[Fraction | None, ...]   # min over top-half N, per stage
    stage_high: tuple[Fraction | None, ...]  # max over top-half N, per stage
    value: Fraction | None
    status: str            # converged | nonrobust | undefined | budget-limited
    probes: tuple[ProbeResult, ...]
    diagnostics: tuple[str, ...]

    def stage_representatives(self) -> list[Fraction | None]:
        return [None if lo is None else (lo + hi) / 2
                for lo, hi in zip(self.stage_low, self.stage_high)]

    def exit_code(self) -> int:
        return {"converged": 0, "nonrobust": 2, "undefined": 3,
                "budget-limited": 1}[self.status]

    def to_json(self, query: str, kb_file: str, stages=None) -> str:
        def frac(q):
            return None if q is None else f"{q.numerator}/{q.denominator}"

        grid = [{"N": c.N, "stage": c.stage,
                 "value": frac(c.prob.value) if c.prob.defined else None,
                 "defined": c.prob.defined}
                for c in self.grid]
        obj = {
            "query": query,
            "kb_file": kb_file,
            "grid": grid,
            "estimate": {"value": frac(self.value), "status": self.status},
            "probes": [{"index": p.index, "factor": p.factor,
                        "value": frac(p.representative)}
                       for p in self.probes],
            "diagnostics": list(self.diagnostics),
        }
        return json.dumps(obj, indent=2, sort_keys=True)


def _stage_rep(cells: list[CondProb]) -> tuple[Fraction | None, Fraction | None]:
    vals = [c.value for c in cells if c.defined]
    if not vals:
        return None, None
    return min(vals), max(vals)


def degree_of_belief(vocab: Vocabulary, query: Formula, kb: Formula,
                     schedule: Schedule | None = None,
                     thresholds: Thresholds = Thresholds(),
                     budget: int = DEFAULT_BUDGET, jobs: int = 1,
                     method: str = "auto") -> BeliefEstimate:
    """Estimate the limiting degree of belief in query given kb.

    The grid is computed stage by stage: within a stage only N varies
    (that is the inner limit), and only then are stages compared.
    """
    if schedule is None:
        schedule = default_schedule(vocab, kb, query)
    kb_x = translate_to_exact(kb)
    q_x = translate_to_exact(query)
    diagnostics: list[str] = []
    budget_hit = False

    def grid_for(tv: ToleranceVector) -> list[CondProb | None]:
        nonlocal budget_hit
        kb_t = instantiate_tolerances(kb_x, tv)
        q_t = instantiate_tolerances(q_x, tv)
        out: list[CondProb | None] = []
        for n in schedule.domain_sizes:
            try:
                out.append(cond_prob(vocab, n, q_t, kb_t, budget=budget,
                                     jobs=jobs, method=method))
            except BudgetExceededError as exc:
                budget_hit = True
                diagnostics.append(f"N={n}: {exc}")
                out.append(None)
        return out

    columns = [grid_for(tv) for tv in schedule.stages]
    cells = tuple(
        GridCell(n, s, c if c is not None else CondProb.undefined())
        for s, col in enumerate(columns)
        for n, c in zip(schedule.domain_sizes, col))

    top = set(schedule.top_half())
    lows: list[Fraction | None] = []
    highs: list[Fraction | None] = []
    stage_undefined = False
    for col in columns:
        tops = [c for n, c in zip(schedule.domain_sizes, col)
                if n in top and c is not None]
        defined = [c for c in tops if c.defined]
        if tops and not defined:
            stage_undefined = True
        lo, hi = _stage_rep(tops)
        lows.append(lo)
        highs.append(hi)

    reps = [None if lo is None else (lo + hi) / 2
            for lo, hi in zip(lows, highs)]

    probes: list[ProbeResult] = []
    base_tv = schedule.stages[-1]
    indices = sorted(base_tv.as_dict())
    if len(indices) >= 2:
        for i in indices:
            for factor, label in ((Fraction(4), "x4"), (Fraction(1, 4), "/4")):
                col = grid_for(base_tv.scaled(i, factor))
                tops = [c for n, c in zip(schedule.domain_sizes, col)
                        if n in top and c is not None]
                lo, hi = _stage_rep(tops)
                rep = None if lo is None else (lo + hi) / 2
                probes.append(ProbeResult(i, label, rep))

    # verdict, worst news first
    if stage_undefined:
        status = "undefined"
        diagnostics.append(
            "some tolerance stage has no satisfying worlds at any large N "
            "in the grid")
    elif budget_hit:
        status = "budget-limited"
    else:
        base_rep = reps[-1]
        probe_bad = any(
            p.representative is not None and base_rep is not None
            and abs(p.representative - base_rep) > thresholds.delta_eps
            for p in probes)
        spreads_ok = all(
            lo is not None and hi - lo <= thresholds.delta_n
            for lo, hi in zip(lows, highs))
        drift_ok = all(
            a is not None and b is not None
            and abs(a - b) <= thresholds.delta_eps
            for a, b in zip(reps, reps[1:])) if len(reps) > 1 else True
        if any(p.representative is None for p in probes):
            # an undefined probe is no evidence of a different limit, but
            # it is worth leaving a trace
            diagnostics.append(
                "some tolerance-ratio probes had no satisfying worlds at "
                "desk scale")
        if probe_bad:
            status = "nonrobust"
            diagnostics.append(
                "tolerance-ratio probes disagree with the base stage")
        elif spreads_ok and drift_ok:
            status = "converged"
        else:
            status = "nonrobust"
            diagnostics.append(
                "values did not stabilize within thresholds; this may be "
                "slow convergence rather than genuine tolerance-dependence")

    value = reps[-1] if status == "converged" else None
    return BeliefEstimate(cells, tuple(lows), tuple(highs), value, status,
                          tuple(probes), tuple(diagnostics))


def eventually_consistent(vocab: Vocabulary, kb: Formula,
                          schedule: Schedule | None = None,
                          budget: int = DEFAULT_BUDGET, jobs: int = 1,
                          method: str = "auto") -> str:
    """Check for evidence that the KB keeps satisfying worlds as N grows.

    Returns 'consistent-evidence', 'inconsistent-evidence' or 'inconclusive'.
    """
    from .lang import TRUE
    if schedule is None:
        schedule = default_schedule(vocab, kb)
    kb_x = translate_to_exact(kb)
    counts: list[list[CondProb | None]] = []
    for tv in schedule.stages:
        kb_t = instantiate_tolerances(kb_x, tv)
        col = []
        for n in schedule.domain_sizes:
            try:
                col.append(cond_prob(vocab, n, TRUE, kb_t, budget=budget,
                                     jobs=jobs, method=method))
            except BudgetExceededError:
                col.append(None)
        counts.append(col)

    top = set(schedule.top_half())
    last = counts[-1]
    top_cells = [c for n, c in zip(schedule.domain_sizes, last) if n in top]
    if top_cells and all(c is not None and c.defined for c in top_cells):
        return "consistent-evidence"
    for col in counts:
        # zero count on a suffix of the N list counts as evidence against
        if col and col[-1] is not None and not col[-1].defined:
            return "inconsistent-evidence"
    return "inconclusive"
