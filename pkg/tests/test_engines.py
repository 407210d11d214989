from fractions import Fraction

import pytest
import sympy

from toroprep.algebra import Constant, Status
from toroprep.engines import (
    InadmissibleForm,
    RationallyIndependent,
    ValuationState,
    chain_rounds,
    compute_invariant,
    default_limit,
    descent_violations,
    resolve_dependent_valuation,
    run_lemma_a,
    run_lemma_b,
    run_pair_ordering,
)
from toroprep.forms import LocalForm, classify_toroidal_morphism, translate, trivial
from toroprep.patterns import PatternMismatch

T = trivial()
NZ = Constant("α", Status.NONZERO)


def one_point_a(a, b, d):
    return LocalForm.make([(a, 0, 0), (b, 0, 0), (d, 0, 1)], [T, translate("y", NZ), T], "x", "uv")


def one_over_one(a, d):
    return LocalForm.make([(a, 0, 0), (0, 1, 0), (d, 0, 1)], None, "x", "u")


def labels(trace, chart=None):
    return {s.disposition.label for s in trace.steps if chart is None or s.chart.name == chart}


def test_isolated_point_a_equals_b_equals_one():
    tr = run_lemma_a([LocalForm.make([(1, 0, 0), (0, 1, 0), (0, 0, 1)], None, "xy", "uv")])
    assert tr.outcome == "all_toroidal"
    hit = [s for s in tr.steps if s.chart.name == "point.x" and dict(s.condition)["α1"] is Status.NONZERO]
    assert {s.disposition.label for s in hit} == {"1-point maps to 1-point"}
    assert labels(tr, "point.z") == {"3-point maps to 3-point"}


def test_descent_last_round_maps_to_one_point():
    tr = run_lemma_a([one_point_a(2, 2, 1)])
    lead = [s for s in tr.steps if s.chart.name == "curve.lead"]
    assert {s.disposition.label for s in lead} == {"1-point maps to 1-point"}
    assert all(s.disposition.kind == "toroidal" for s in tr.steps)


def test_a_lambda_chain_three_two_one():
    tr = run_lemma_a([one_point_a(3, 3, 0)])
    assert tr.outcome == "all_toroidal"
    centers = [r.value for s in tr.steps for r in s.invariants if r.role == "center"]
    # one center record per chart branch; the chain visits 3, 2, 1 in order
    assert sorted(set(centers), reverse=True) == [3, 2, 1]
    assert centers == sorted(centers, reverse=True)
    assert descent_violations(tr) == []
    assert list(chain_rounds(tr).values()) == [(3, 3)]


def test_omega_chain_three_two_one():
    tr = run_lemma_b([one_over_one(4, 1)])
    assert tr.outcome == "all_toroidal"
    events = sorted({s.event for s in tr.steps})
    assert len(events) == 3
    firsts = [next(s for s in tr.steps if s.event == e) for e in events]
    assert [s.invariants[0].value for s in firsts] == [3, 2, 1]
    assert descent_violations(tr) == []


def test_lemma_b_first_round_outcomes():
    tr = run_lemma_b([one_over_one(2, 1)])
    assert labels(tr, "curve.lead") == {"1-point maps to 1-point"}
    tr = run_lemma_b([LocalForm.make([(2, 0, 0), (3, 0, 0), (0, 0, 1)], [T, translate("y", NZ), T], "x", "uv")])
    first = [s for s in tr.steps if s.event == 1]
    assert {s.disposition.label for s in first if s.chart.name == "curve.tail"} == {"2-point maps to 3-point"}


def test_every_leaf_is_toroidal():
    for f in (one_point_a(5, 7, 2), one_point_a(4, 4, 0),
              LocalForm.make([(3, 1, 0), (1, 2, 0), (0, 0, 1)], None, "xy", "uv")):
        tr = run_lemma_a([f])
        assert tr.outcome == "all_toroidal"
        assert tr.leaves
        for _, leaf, d in tr.leaves:
            assert d.kind == "toroidal"
            assert d.target is not None
            assert d.change_of_variable or classify_toroidal_morphism(d.target.form) is not None


def test_inadmissible_input():
    with pytest.raises(InadmissibleForm):
        run_lemma_a([LocalForm.make([(1, 0, 0), (0, 1, 0), (0, 0, 1)], None, "x", "u")])
    with pytest.raises(InadmissibleForm):
        run_lemma_b([LocalForm.make([(2, 1, 0), (1, 1, 0), (3, 3, 1)], None, "xy", "uv")])


def test_budget_exhaustion_is_reported():
    tr = run_lemma_a([one_point_a(9, 9, 0)], budget=2)
    assert tr.outcome == "exhausted"
    assert tr.diagnostics
    assert default_limit(3) == 40


def test_pair_ordering_increases_product():
    f = LocalForm.make([(2, 3, 0), (3, 1, 0), (0, 0, 1)], None, "xy", "uv")
    tr = run_pair_ordering(f)
    assert tr.outcome == "ordered"
    assert descent_violations(tr) == []
    for _, leaf, _ in tr.leaves:
        if leaf.upstairs != 2:
            continue
        x, y = sorted(leaf.divisor_up)
        (a, b), (c, d) = ((r.mono[x], r.mono[y]) for r in leaf.rows[:2])
        assert (a - c) * (b - d) >= 0


# --- invariants ---------------------------------------------------------------

def test_invariant_values():
    assert compute_invariant(one_point_a(4, 6, 1), "A_lambda").value == 3
    assert compute_invariant(one_over_one(2, 1), "Omega_E").value == 1
    f = LocalForm.make([(2, 3, 0), (3, 1, 0), (1, 1, 1)], None, "xy", "uv")
    assert compute_invariant(f, "PairProduct").value == -2


def test_invariant_pattern_mismatch():
    with pytest.raises(PatternMismatch):
        compute_invariant(LocalForm.make([(1, 0, 0), (0, 1, 0), (0, 0, 1)], None, "xy", "uv"), "A_lambda")


# --- valuations ---------------------------------------------------------------

def test_valuation_equal_values():
    t = resolve_dependent_valuation(ValuationState((3, 3)))
    assert len(t.steps) == 1
    assert t.final == (3, 0)


def test_valuation_five_three():
    t = resolve_dependent_valuation(ValuationState((5, 3)))
    assert [s.after for s in t.steps] == [(2, 3), (2, 1), (1, 1), (1, 0)]


def test_valuation_rational_values():
    t = resolve_dependent_valuation(ValuationState((Fraction(1, 2), Fraction(3, 4))))
    assert 0 in t.final and len(t.steps) == 3


def test_valuation_independent():
    with pytest.raises(RationallyIndependent):
        resolve_dependent_valuation(ValuationState((2, 1), independent=True))
    with pytest.raises(RationallyIndependent):
        resolve_dependent_valuation(ValuationState((2, sympy.sqrt(2))))
