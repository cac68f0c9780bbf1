"""Default inference on top of the limit engine, plus the golden corpus.

A KB default-entails a conclusion when the limiting degree of belief is 1.
At desk scale "1" means: the estimate converged and its value is at least
1 - 1/20 (the same threshold the limit engine uses for stabilization).

The golden corpus lives in ``corpus/``: each case is a KB file
``<name>.rwkb`` plus ``<name>.expect.json`` naming a query, a method, the
expected outcome, and optional schedule overrides.  Expected values were
frozen from independent oracle runs (exact enumeration at small domain
sizes) before being wired into the harness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .counting import cond_prob, DEFAULT_BUDGET
from .lang import And, Formula, LangError, Not, Or, Vocabulary
from .limits import (
    BeliefEstimate, Schedule, Thresholds, default_schedule, degree_of_belief,
    eventually_consistent,
)
from .parser import parse_formula, parse_kb_file
from .translate import ToleranceVector, ground_kb

CORPUS_DIR = Path(__file__).parent / "corpus"

BELIEF_ONE = Fraction(19, 20)


class DempsterUndefined(LangError):
    pass


@dataclass(frozen=True)
class DefaultRule:
    """antecedent -> consequent, read statistically at a strength index."""

    antecedent: Formula
    consequent: Formula
    strength_index: int = 1


def dempster_combine(alphas) -> Fraction:
    """Combine independent pieces of evidence for the same conclusion:
    prod(a_i) / (prod(a_i) + prod(1 - a_i)).

    Undefined when one piece says impossible and another says certain.
    """
    vals = [Fraction(a) for a in alphas]
    if not vals:
        raise DempsterUndefined("need at least one value")
    for a in vals:
        if not 0 <= a <= 1:
            raise DempsterUndefined(f"value {a} outside [0, 1]")
    if any(a == 0 for a in vals) and any(a == 1 for a in vals):
        raise DempsterUndefined(
            "combination of a certain and an impossible report is undefined")
    top = Fraction(1)
    bottom = Fraction(1)
    for a in vals:
        top *= a
        bottom *= 1 - a
    if top + bottom == 0:
        # all zero or all one
        return Fraction(0) if top == 0 else Fraction(1)
    return top / (top + bottom)


@dataclass(frozen=True)
class EntailmentVerdict:
    verdict: str               # yes | no | nonrobust | unknown
    estimate: BeliefEstimate


def default_entails(vocab: Vocabulary, kb: Formula, phi: Formula,
                    schedule: Schedule | None = None,
                    thresholds: Thresholds = Thresholds(),
                    budget: int = DEFAULT_BUDGET, jobs: int = 1) -> EntailmentVerdict:
    est = degree_of_belief(vocab, phi, kb, schedule=schedule,
                           thresholds=thresholds, budget=budget, jobs=jobs)
    if est.status == "converged":
        verdict = "yes" if est.value >= BELIEF_ONE else "no"
    elif est.status == "nonrobust":
        verdict = "nonrobust"
    else:
        verdict = "unknown"
    return EntailmentVerdict(verdict, est)


# ---------------------------------------------------------------------------
# exact KLM-style identities


def conditioning_identity_gap(vocab, phi, theta, kb, N, budget=DEFAULT_BUDGET):
    """Pr(phi|kb) - [Pr(phi|kb&theta)Pr(theta|kb) + Pr(phi|kb&-theta)Pr(-theta|kb)].

    Exact rational; returns None when Pr(.|kb) itself is undefined.  A
    branch with conditioning weight zero contributes zero even though its
    conditional is undefined.
    """
    base = cond_prob(vocab, N, phi, kb, budget=budget)
    if not base.defined:
        return None
    p_theta = cond_prob(vocab, N, theta, kb, budget=budget).value
    total = Fraction(0)
    for branch, weight in ((theta, p_theta), (Not(theta), 1 - p_theta)):
        if weight == 0:
            continue
        c = cond_prob(vocab, N, phi, And(kb, branch), budget=budget)
        total += c.value * weight
    return base.value - total


def complementarity_gap(vocab, phi, kb, N, budget=DEFAULT_BUDGET):
    """Pr(phi|kb) + Pr(-phi|kb) - 1, exact; None when undefined."""
    a = cond_prob(vocab, N, phi, kb, budget=budget)
    if not a.defined:
        return None
    b = cond_prob(vocab, N, Not(phi), kb, budget=budget)
    return a.value + b.value - 1


# ---------------------------------------------------------------------------
# corpus


@dataclass(frozen=True)
class CorpusCase:
    name: str
    kb_path: Path
    query: str
    method: str                 # eval | maxent | consistency | grid
    expected: dict
    schedule: dict | None
    grid: dict | None


@dataclass(frozen=True)
class CaseResult:
    name: str
    passed: bool
    detail: str


def load_corpus(directory: Path | None = None) -> list[CorpusCase]:
    directory = directory or CORPUS_DIR
    cases = []
    for expect in sorted(directory.glob("*.expect.json")):
        name = expect.name[: -len(".expect.json")]
        spec = json.loads(expect.read_text())
        cases.append(CorpusCase(
            name=name,
            kb_path=directory / f"{name}.rwkb",
            query=spec.get("query", "true"),
            method=spec.get("method", "eval"),
            expected=spec["expected"],
            schedule=spec.get("schedule"),
            grid=spec.get("grid"),
        ))
    return cases


def _schedule_from_override(vocab, kb, query, override) -> Schedule | None:
    if override is None:
        return None
    base = default_schedule(vocab, kb, query)
    sizes = tuple(override.get("domain_sizes", base.domain_sizes))
    if "stages" in override:
        from .lang import tolerance_indices
        idx = (tolerance_indices(kb) | tolerance_indices(query)) or {1}
        stages = tuple(ToleranceVector.uniform(idx, Fraction(s))
                       for s in override["stages"])
    else:
        stages = base.stages
    return Schedule(sizes, stages)


def _check_expected(expected: dict, value, status: str | None) -> tuple[bool, str]:
    if "verdict" in expected:
        ok = status == expected["verdict"]
        return ok, f"status={status}, want {expected['verdict']}"
    if value is None:
        return False, f"no value (status={status})"
    v = value if isinstance(value, Fraction) else \
        Fraction(value).limit_denominator(10 ** 12)

    def f(x):
        return Fraction(x)

    if "value" in expected:
        tol = f(expected.get("tol", "1/1000000"))
        want = f(expected["value"])
        ok = abs(v - want) <= tol
        return ok, f"value={float(v):.6f}, want {float(want):.6f} +/- {float(tol)}"
    if "interval" in expected:
        lo, hi = (f(x) for x in expected["interval"])
        ok = lo <= v <= hi
        return ok, f"value={float(v):.6f}, want in [{float(lo)}, {float(hi)}]"
    if "max" in expected:
        hi = f(expected["max"])
        return v < hi, f"value={float(v):.6f}, want < {float(hi)}"
    if "min" in expected:
        lo = f(expected["min"])
        return v > lo, f"value={float(v):.6f}, want > {float(lo)}"
    return False, "malformed expectation"


def run_case(case: CorpusCase, budget: int = DEFAULT_BUDGET,
             jobs: int = 1) -> CaseResult:
    vocab, kb = parse_kb_file(case.kb_path)
    query = parse_formula(case.query, vocab)

    if case.method == "consistency":
        sched = _schedule_from_override(vocab, kb, query, case.schedule)
        verdict = eventually_consistent(vocab, kb, schedule=sched,
                                        budget=budget, jobs=jobs)
        ok, detail = _check_expected(case.expected, None, verdict)
        return CaseResult(case.name, ok, detail)

    if case.method == "maxent":
        from .maxent import maxent_degree
        val = maxent_degree(vocab, kb, query)
        ok, detail = _check_expected(case.expected, val, None)
        return CaseResult(case.name, ok, detail)

    if case.method == "grid":
        n = case.grid["N"]
        tau = Fraction(case.grid["stage"])
        kb_t = ground_kb(kb, tau)
        q_t = ground_kb(query, tau)
        c = cond_prob(vocab, n, q_t, kb_t, budget=budget, jobs=jobs)
        val = c.value if c.defined else None
        ok, detail = _check_expected(case.expected, val,
                                     None if c.defined else "undefined")
        return CaseResult(case.name, ok, f"N={n}, stage={tau}: {detail}")

    if case.method == "eval":
        sched = _schedule_from_override(vocab, kb, query, case.schedule)
        est = degree_of_belief(vocab, query, kb, schedule=sched,
                               budget=budget, jobs=jobs)
        ok, detail = _check_expected(case.expected, est.value, est.status)
        return CaseResult(case.name, ok, detail)

    return CaseResult(case.name, False, f"unknown method {case.method}")


# ---------------------------------------------------------------------------
# property suites


def _klm_cases():
    """Curated exact checks of the classical inference-relation properties."""
    corpus = {c.name: c for c in load_corpus()}

    def setup(name):
        vocab, kb = parse_kb_file(corpus[name].kb_path)
        return vocab, kb

    def q(vocab, text):
        return parse_formula(text, vocab)

    cases = []

    def exact_one(label, name, extra, query, n, tau):
        def run():
            vocab, kb = setup(name)
            kb_full = And(kb, q(vocab, extra)) if extra else kb
            kb_t = ground_kb(kb_full, Fraction(tau))
            c = cond_prob(vocab, n, q(vocab, query), kb_t)
            ok = c.defined and c.value == 1
            return ok, f"Pr={c.value if c.defined else 'undef'}, want exactly 1"
        cases.append((label, run))

    # Reflexivity: Pr(KB|KB) = 1 wherever defined
    def reflexivity(name, n, tau):
        def run():
            vocab, kb = setup(name)
            kb_t = ground_kb(kb, Fraction(tau))
            c = cond_prob(vocab, n, kb_t, kb_t)
            ok = c.defined and c.value == 1
            return ok, f"Pr(KB|KB)={c.value if c.defined else 'undef'}"
        cases.append((f"reflexivity[{name}]", run))

    reflexivity("hepatitis", 5, "1/8")
    reflexivity("tweety_penguin", 8, "1/8")
    reflexivity("broken_arm", 5, "1/4")

    # Right Weakening: a default conclusion survives logical weakening
    exact_one("right-weakening[broken_arm]", "broken_arm",
              "LeftBroken(Eric)", "not LeftUsable(Eric)", 5, "1/4")
    exact_one("right-weakening[broken_arm,weakened]", "broken_arm",
              "LeftBroken(Eric)",
              "not LeftUsable(Eric) or not RightUsable(Eric)", 5, "1/4")
    exact_one("right-weakening[penguin]", "tweety_penguin", None,
              "not Fly(Tweety)", 8, "1/8")
    exact_one("right-weakening[penguin,weakened]", "tweety_penguin", None,
              "not Fly(Tweety) or not Bird(Tweety)", 8, "1/8")

    # Or: both disjunct premises entail the conclusion, so does the disjunction
    exact_one("or-rule[left-premise]", "broken_arm", "LeftBroken(Eric)",
              "not LeftUsable(Eric) or not RightUsable(Eric)", 5, "1/4")
    exact_one("or-rule[right-premise]", "broken_arm", "RightBroken(Eric)",
              "not LeftUsable(Eric) or not RightUsable(Eric)", 5, "1/4")
    exact_one("or-rule[disjunction]", "broken_arm",
              "LeftBroken(Eric) or RightBroken(Eric)",
              "not LeftUsable(Eric) or not RightUsable(Eric)", 5, "1/4")

    # Conditioning identity and complementarity, exact at N <= 5
    triples = [
        ("hepatitis", "Hep(Eric)", "Jaun(Eric)"),
        ("tweety_penguin", "Fly(Tweety)", "Bird(Tweety)"),
        ("broken_arm", "LeftUsable(Eric)", "LeftBroken(Eric)"),
        ("white", "White(c)", "White(c)"),
    ]
    for name, phi_s, theta_s in triples:
        def run(name=name, phi_s=phi_s, theta_s=theta_s):
            vocab, kb = setup(name)
            phi, theta = q(vocab, phi_s), q(vocab, theta_s)
            kb_t = ground_kb(kb, Fraction(1, 4))
            for n in range(2, 6):
                gap = conditioning_identity_gap(vocab, phi, theta, kb_t, n)
                if gap not in (None, 0):
                    return False, f"conditioning gap {gap} at N={n}"
                gap2 = complementarity_gap(vocab, phi, kb_t, n)
                if gap2 not in (None, 0):
                    return False, f"complementarity gap {gap2} at N={n}"
            return True, "exact at N=2..5"
        cases.append((f"conditioning[{name}]", run))

    return cases


def run_property_suite(suite: str, budget: int = DEFAULT_BUDGET,
                       jobs: int = 1) -> list[CaseResult]:
    """suite 'klm': inference-relation properties on curated instances;
    suite 'corpus': every golden case against its frozen expectation."""
    if suite == "klm":
        out = []
        for label, run in _klm_cases():
            try:
                ok, detail = run()
            except LangError as exc:
                ok, detail = False, str(exc)
            out.append(CaseResult(label, ok, detail))
        return out
    if suite == "corpus":
        return [run_case(c, budget=budget, jobs=jobs) for c in load_corpus()]
    raise ValueError(f"unknown suite {suite!r}")
