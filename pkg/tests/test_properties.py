"""Property tests for the invariants the modules promise."""
import random
from fractions import Fraction
from math import gcd

import numpy as np
from hypothesis import HealthCheck, given, settings, strategies as st

from toroprep.algebra import Constant, Status
from toroprep import scenarios
from toroprep.charts import Center, Disposition, divide_rows, enumerate_charts, normalize, specialize_form, substitute
from toroprep.cli import form_json, form_load
from toroprep.engines import (
    TraceStep,
    ValuationState,
    descent_violations,
    resolve_dependent_valuation,
    run_lemma_a,
    run_lemma_b,
    run_pair_ordering,
)
from toroprep.forms import (
    LocalForm,
    classify_prepared,
    classify_toroidal_morphism,
    classify_toroidal_pair,
    translate,
    trivial,
    unit_series,
    validate,
)
from toroprep.oracle import cross_check_matrix, pair_ordering_events, subtractive_euclid_steps, verify_chain

FAST = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])

exps = st.integers(min_value=0, max_value=6)
rows = st.tuples(exps, exps, exps)


@st.composite
def forms(draw, allow_constants=True):
    m = [draw(rows) for _ in range(3)]
    down = draw(st.sets(st.integers(0, 2), min_size=1, max_size=3))
    up = {k for i in down for k in range(3) if m[i][k]}
    if not up:
        k = draw(st.integers(0, 2))
        i = min(down)
        m[i] = tuple(max(1, e) if j == k else e for j, e in enumerate(m[i]))
        up = {k}
    factors = []
    for i in range(3):
        kind = draw(st.sampled_from(["trivial", "translate", "unit"] if allow_constants else ["trivial"]))
        if kind == "translate":
            coord = draw(st.sampled_from([k for k in range(3) if k not in up] or [0]))
            status = Status.NONZERO if i in down else draw(st.sampled_from(list(Status)))
            if coord in up:
                factors.append(trivial())
                continue
            factors.append(translate("xyz"[coord], Constant(f"c{i}", status)))
        elif kind == "unit":
            factors.append(unit_series(f"γ{i}", draw(st.sets(st.sampled_from("xyz"), max_size=2))))
        else:
            factors.append(trivial())
    f = LocalForm.make(m, factors, "".join("xyz"[k] for k in sorted(up)), "".join("uvw"[i] for i in sorted(down)))
    assert validate(f) == []
    return f


centers = st.sampled_from([
    Center.point(), Center.curve("x", "z"), Center.curve("y", "z"), Center.curve("x", "y"),
    Center.two_curve("x", "y"), Center.curve("z", "x"),
])


@FAST
@given(forms())
def test_normalize_idempotent(f):
    n = normalize(f)
    assert normalize(n) == n


@FAST
@given(forms(), centers, st.integers(0, 2))
def test_substitution_composes_exponents(f, center, which):
    charts = enumerate_charts(center, step=1)
    chart = charts[which % len(charts)]
    for br in substitute(f, chart).branches:
        # zero constants turn translates into coordinates on both sides
        E = np.array(normalize(specialize_form(f, dict(br.condition))).matrix)
        S = np.array(br.chart.monomial)
        assert (E @ S).tolist() == [list(r) for r in br.form.matrix]
        assert validate(br.form) == []


@FAST
@given(forms(), centers, st.integers(0, 2))
def test_branches_partition_assignments(f, center, which):
    charts = enumerate_charts(center, step=1)
    res = substitute(f, charts[which % len(charts)])
    conds = [b.condition for b in res.branches]
    labels = {l for c in conds for l, _ in c}
    assert len(set(conds)) == len(conds) == 2 ** len(labels)
    assert all(len(c) == len(labels) for c in conds)


@FAST
@given(forms(allow_constants=False), centers, st.integers(0, 2))
def test_monomial_forms_are_functorial(f, center, which):
    charts = enumerate_charts(center, step=1)
    chart = charts[which % len(charts)]
    for br in substitute(f, chart).branches:
        step = TraceStep(0, 0, "p", 0, center, br.chart, br.condition, f, br.form, 1, Disposition("unresolved"))
        assert cross_check_matrix(step).ok


@FAST
@given(forms(), centers, st.integers(0, 2), st.integers(0, 10 ** 6))
def test_substitution_matches_sampling(f, center, which, seed):
    charts = enumerate_charts(center, step=1)
    chart = charts[which % len(charts)]
    steps = [TraceStep(i, 0, "p", 0, center, br.chart, br.condition, f, br.form, 1, Disposition("unresolved"))
             for i, br in enumerate(substitute(f, chart).branches)]
    assert verify_chain(steps, samples=5, seed=seed).ok


@FAST
@given(forms(), st.integers(0, 2), st.integers(0, 2))
def test_divide_then_multiply_restores(f, i, j):
    q = divide_rows(f, i, j)
    if q is None:
        return
    assert (q.rows[i] * f.rows[j]).mono == f.rows[i].mono


@FAST
@given(forms())
def test_classification_deterministic_and_contained(f):
    assert classify_prepared(f) == classify_prepared(f)
    if classify_toroidal_morphism(f) is not None:
        assert classify_prepared(f).prepared
    c = classify_prepared(f)
    if c.case == "1":
        assert classify_toroidal_pair(f, c.permutation[:2]) is not None


@FAST
@given(forms())
def test_pair_determinant_recheck(f):
    pc = classify_toroidal_pair(f) if f.downstairs >= 2 else None
    if pc is not None and pc.case == 2:
        d = dict(pc.data)
        assert d["a"] * d["d"] - d["b"] * d["c"] != 0
    if pc is not None and pc.case == 3:
        d = dict(pc.data)
        assert gcd(d["a"], d["b"]) == 1


@FAST
@given(forms())
def test_form_json_round_trip(f):
    assert form_load(form_json(f), "f") == f


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_lemma_a_descent(seed):
    tr = run_lemma_a([scenarios.lemma_a_descent_form(random.Random(seed), top=12)])
    assert tr.outcome == "all_toroidal"
    assert descent_violations(tr) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_lemma_b_descent(seed):
    tr = run_lemma_b([scenarios.lemma_b_descent_form(random.Random(seed), top=12)])
    assert tr.outcome == "all_toroidal"
    assert descent_violations(tr) == []


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_lemma_a_full_pipeline(seed):
    tr = run_lemma_a([scenarios.lemma_a_start_form(random.Random(seed), top=4)])
    assert tr.outcome == "all_toroidal"
    assert descent_violations(tr) == []
    assert all(d.kind == "toroidal" for _, _, d in tr.leaves)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(1, 12), st.integers(1, 12))
def test_pair_ordering_matches_recursion(a, b, c, d):
    f = LocalForm.make([(a, b, 0), (c, d, 0), (0, 0, 1)], None, "xy", "uv")
    tr = run_pair_ordering(f)
    assert len({s.event for s in tr.steps}) == pair_ordering_events((a, b), (c, d))
    assert descent_violations(tr) == []


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 300), st.integers(1, 300), st.integers(1, 5))
def test_valuation_matches_euclid(p, q, scale):
    t = resolve_dependent_valuation(ValuationState((Fraction(p, scale), Fraction(q, scale))))
    assert len(t.steps) == subtractive_euclid_steps(p, q)
    assert 0 in t.final and min(t.final) == 0
