"""Acceptance gate.

Each criterion prints one PASS/FAIL line (straight to the terminal,
bypassing capture) and then asserts.  Exact identities are checked with
Fractions; trend checks use the stated tolerances.
"""

import sys
import time
from fractions import Fraction

import pytest

from randworlds.counting import (
    cond_prob, naive_count_many, unary_count_many,
)
from randworlds.defaults import (
    dempster_combine, load_corpus, run_property_suite,
)
from randworlds.lang import uses_functions, subformulas, Atomic
from randworlds.limits import (
    Schedule, degree_of_belief, eventually_consistent,
)
from randworlds.maxent import constraints_from_kb, maxent_degree, maxent_point
from randworlds.parser import parse_formula, parse_kb, parse_kb_file
from randworlds.translate import ToleranceVector, ground_kb
from randworlds.worlds import total_worlds


_capfd = None


@pytest.fixture(autouse=True)
def _live_output(capfd):
    global _capfd
    _capfd = capfd
    yield
    _capfd = None


def report(num, ok, detail):
    # one line per criterion, straight to the terminal even on success;
    # pytest's fd-level capture would otherwise swallow it
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    with _capfd.disabled():
        print(line, file=sys.stderr, flush=True)
    assert ok, line


def fv(v):
    return "none" if v is None else f"{float(v):.4f}"


def stages(*taus, idx=frozenset({1})):
    return tuple(ToleranceVector.uniform(idx, Fraction(t)) for t in taus)


def corpus_kb(name):
    case = {c.name: c for c in load_corpus()}[name]
    return parse_kb_file(case.kb_path)


def test_criterion_01_unary_matches_naive():
    # bit-exact agreement of the two counters on every unary corpus KB,
    # N in 2..5, at each default tolerance stage; cells whose naive
    # enumeration exceeds 2^17 worlds are skipped to hold the runtime
    # bound, and the line says how many
    t0 = time.monotonic()
    cap = 1 << 17
    checked = skipped = 0
    for case in load_corpus():
        vocab, kb = parse_kb_file(case.kb_path)
        if not vocab.is_unary() or uses_functions(kb):
            continue
        if any(isinstance(g, Atomic) and g.pred == "="
               for g in subformulas(kb)):
            continue
        for tau in ("1/4", "1/8", "1/16"):
            g = ground_kb(kb, Fraction(tau))
            for n in range(2, 6):
                if total_worlds(vocab, n) > cap:
                    skipped += 1
                    continue
                assert (unary_count_many(vocab, n, [g]) ==
                        naive_count_many(vocab, n, [g])), (case.name, tau, n)
                checked += 1
    elapsed = time.monotonic() - t0
    report(1, elapsed <= 300,
           f"unary == naive on {checked} cells ({skipped} skipped above "
           f"2^17 worlds) in {elapsed:.0f}s")


def test_criterion_02_direct_inference():
    vocab, kb = corpus_kb("hepatitis")
    q = parse_formula("Hep(Eric)", vocab)
    g_kb = ground_kb(kb, Fraction(1, 8))
    lo, hi = Fraction(27, 40), Fraction(37, 40)   # 0.675, 0.925
    in_range = True
    for n in range(2, 9):
        c = cond_prob(vocab, n, q, g_kb)
        if c.defined and not lo <= c.value <= hi:
            in_range = False
    sched = Schedule(tuple(range(2, 9)), stages("1/8", "1/16"))
    est = degree_of_belief(vocab, q, kb, schedule=sched)
    ok = (in_range and est.status == "converged"
          and abs(est.value - Fraction(4, 5)) <= Fraction(1, 20))
    report(2, ok,
           f"Pr_N in [0.675, 0.925] for N=2..8: {in_range}; "
           f"estimate {fv(est.value)} [{est.status}]")


def test_criterion_03_independence_factorization():
    vocab, kb = corpus_kb("independence")
    g = ground_kb(kb, Fraction(1, 4))
    joint_q = parse_formula("Hep(Eric) and Over60(Eric)", vocab)
    a_q = parse_formula("Hep(Eric)", vocab)
    b_q = parse_formula("Over60(Eric)", vocab)
    exact = True
    for n in range(2, 6):
        j = cond_prob(vocab, n, joint_q, g)
        a = cond_prob(vocab, n, a_q, g)
        b = cond_prob(vocab, n, b_q, g)
        if not (j.defined and a.defined and b.defined
                and j.value == a.value * b.value):
            exact = False
    sched = Schedule(tuple(range(2, 7)), stages("1/4", "1/8", "1/16",
                                                idx=frozenset({1, 2})))
    est = degree_of_belief(vocab, joint_q, kb, schedule=sched)
    trend = est.value is not None and \
        abs(est.value - Fraction(8, 25)) <= Fraction(1, 20)
    report(3, exact and trend,
           f"joint == product exactly at N=2..5: {exact}; trend "
           f"{fv(est.value)} vs 0.32 [{est.status}]")


def test_criterion_04_lottery():
    ok = True
    details = []
    for n_tickets in (2, 3, 4):
        vocab, kb = parse_kb(
            "predicate Winner/1; predicate Ticket/1; const c;\n"
            "exists! x Winner(x).\n"
            "forall x (Winner(x) => Ticket(x)).\n"
            f"exists_exactly[{n_tickets}] x Ticket(x).\n"
            "Ticket(c).\n")
        win = parse_formula("Winner(c)", vocab)
        some = parse_formula("exists x Winner(x)", vocab)
        for n in range(n_tickets, n_tickets + 3):
            c1 = cond_prob(vocab, n, win, kb)
            c2 = cond_prob(vocab, n, some, kb)
            if not (c1.defined and c1.value == Fraction(1, n_tickets)
                    and c2.value == 1):
                ok = False
        details.append(f"1/{n_tickets}")
    report(4, ok, f"Pr(win) = {', '.join(details)} exactly; "
                  "Pr(some winner) = 1 exactly")


def test_criterion_05_unique_names():
    vocab, kb = corpus_kb("unique_names")
    q = parse_formula("c1 = c2", vocab)
    ok = all(
        cond_prob(vocab, n, q, kb).value == Fraction(n, 3 * n - 2)
        for n in range(2, 7))
    vocab2, kb2 = corpus_kb("unique_names_prior")
    q2 = parse_formula("c1 = c2", vocab2)
    ok2 = all(
        cond_prob(vocab2, n, q2, kb2).value == Fraction(1, n)
        for n in range(2, 7))
    report(5, ok and ok2,
           "collision given some collision = N/(3N-2); prior = 1/N, "
           "exactly for N=2..6")


def test_criterion_06_maxent_worked_example():
    vocab, kb = corpus_kb("p1p2")
    cs, _ = constraints_from_kb(vocab, kb)
    d = maxent_point(cs)
    want = (0.3, 0.7, 0.0, 0.0)
    point_ok = all(abs(p - w) <= 1e-6 for p, w in zip(d.p, want))
    val = maxent_degree(vocab, kb, parse_formula("P2(c)", vocab))
    report(6, point_ok and abs(val - 0.3) <= 1e-6,
           f"maxent point {tuple(round(p, 6) for p in d.p)}; "
           f"degree {val:.6f}")


def test_criterion_07_membership_statistics():
    vocab, kb = corpus_kb("black_clyde")
    val = maxent_degree(vocab, kb, parse_formula("Black(Clyde)", vocab))
    g = ground_kb(kb, Fraction(1, 8))
    c = cond_prob(vocab, 8, parse_formula("Black(Clyde)", vocab), g,
                  method="unary")
    agree = c.defined and abs(c.value - Fraction(47, 100)) <= Fraction(1, 10)
    report(7, abs(val - 0.47) <= 1e-3 and agree,
           f"maxent {val:.4f} vs 0.47; exact count at N=8 "
           f"{fv(c.value if c.defined else None)}, within 0.1")


def _delta(a, b):
    return a * b / (a * b + (1 - a) * (1 - b))


def test_criterion_08_evidence_combination():
    exact = dempster_combine([Fraction(4, 5), Fraction(4, 5)]) == \
        Fraction(16, 17)

    vocab, kb = corpus_kb("nixon_dempster")
    q = parse_formula("Pacifist(Nixon)", vocab)
    in_interval = True
    tested = []
    for tau, ns in ((Fraction(1, 32), (9, 10)), (Fraction(1, 16), (8,))):
        lo = _delta(Fraction(4, 5) - tau, Fraction(4, 5) - tau)
        hi = _delta(min(Fraction(1), Fraction(4, 5) + tau),
                    min(Fraction(1), Fraction(4, 5) + tau))
        g = ground_kb(kb, tau)
        for n in ns:
            c = cond_prob(vocab, n, q, g)
            if not (c.defined and lo <= c.value <= hi):
                in_interval = False
            tested.append(f"N={n}")

    vocab_s, kb_s = corpus_kb("nixon_conflict_shared")
    est_s = degree_of_belief(vocab_s,
                             parse_formula("Pacifist(Nixon)", vocab_s), kb_s)
    shared_ok = est_s.value is not None and \
        abs(est_s.value - Fraction(1, 2)) <= Fraction(1, 20)

    vocab_d, kb_d = corpus_kb("nixon_conflict")
    est_d = degree_of_belief(vocab_d,
                             parse_formula("Pacifist(Nixon)", vocab_d), kb_d)
    distinct_ok = est_d.status == "nonrobust"

    report(8, exact and in_interval and shared_ok and distinct_ok,
           f"delta(0.8, 0.8) = 16/17 exactly; interval holds at "
           f"{', '.join(tested)}; shared-index -> "
           f"{fv(est_s.value)}; distinct-index -> {est_d.status}")


def test_criterion_09_inference_relation_properties():
    results = run_property_suite("klm")
    bad = [r.name for r in results if not r.passed]
    report(9, not bad,
           f"{len(results)} property instances"
           + (f"; failing: {bad}" if bad else " all exact"))


def test_criterion_10_language_dependence():
    vocab, kb = corpus_kb("white")
    q = parse_formula("White(c)", vocab)
    white_ok = all(cond_prob(vocab, n, q, kb).value == Fraction(1, 2)
                   for n in range(2, 9))

    vocab_rb, kb_rb = corpus_kb("red_blue")
    est_rb = degree_of_belief(vocab_rb, parse_formula("Red(c)", vocab_rb),
                              kb_rb)
    rb_ok = est_rb.value is not None and \
        abs(est_rb.value - Fraction(1, 3)) <= Fraction(1, 20)

    vocab_fb, kb_fb = corpus_kb("flying_bird")
    sched = Schedule(tuple(range(2, 25)), stages("1/16"))
    est_fb = degree_of_belief(vocab_fb, parse_formula("Bird(Opus)", vocab_fb),
                              kb_fb, schedule=sched)
    fb_ok = est_fb.value is not None and \
        abs(est_fb.value - Fraction(2, 3)) <= Fraction(1, 20)

    report(10, white_ok and rb_ok and fb_ok,
           f"White exactly 1/2 at N=2..8; refinement {fv(est_rb.value)}"
           f" vs 1/3; new-individual {fv(est_fb.value)} vs 2/3")


def test_criterion_11_partition_inconsistency():
    vocab, kb = corpus_kb("poole_partition")
    verdict = eventually_consistent(vocab, kb)
    report(11, verdict == "inconsistent-evidence",
           f"partition KB verdict: {verdict}")
