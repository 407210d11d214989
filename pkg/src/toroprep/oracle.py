"""Independent checks of engine output.

* exact-rational sampling of every chart substitution (polynomial identity
  testing over Q, no floating point),
* golden tables of branch outcomes with the pipeline that must reproduce them,
* integer matrix identities for the monomial parts of every step.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import sympy

from .algebra import Constant, Nested, Shift, Status, Term
from .charts import Center, ChartSubstitution, enumerate_charts, substitute
from .engines import CURVE_PARAMS, POINT_PARAMS, TraceStep, dispose
from .forms import LocalForm, translate, trivial
from .patterns import patterns_a, patterns_b

try:  # gmpy2 rationals are several times faster than Fraction
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction

SAMPLE_RANGE = 97


class EvaluationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SamplePoint:
    coords: tuple               # three nonzero rationals
    constants: tuple = ()       # sorted (label, rational)

    def constant(self, label: str):
        return dict(self.constants)[label]

    def as_json(self) -> dict:
        return {"coords": [str(c) for c in self.coords],
                "constants": {l: str(v) for l, v in self.constants}}


def random_rational(rng: random.Random):
    n = rng.randint(1, SAMPLE_RANGE)
    d = rng.randint(1, SAMPLE_RANGE)
    return Q(n if rng.random() < 0.5 else -n, d)


def sample_point(rng: random.Random, constants) -> SamplePoint:
    """Nonzero coordinates; constants follow their status (zero, else a nonzero sample)."""
    coords = tuple(random_rational(rng) for _ in range(3))
    vals = []
    for c in sorted(constants, key=lambda c: c.label):
        vals.append((c.label, Q(0) if c.status is Status.ZERO else random_rational(rng)))
    return SamplePoint(coords, tuple(dict(vals).items()))


def unit_model(symbol: str, args) -> object:
    """Value of an opaque unit series: one plus the sum of its arguments."""
    return 1 + sum(args)


def evaluate_term(term: Term, coords, consts: dict, model: Callable = unit_model):
    if term.factor.mixed is not None:
        raise EvaluationError("mixed series rows have no sample value")
    val = Q(1)
    for c, e in zip(coords, term.mono):
        if e:
            val *= c ** e
    for atom, n in term.factor.atoms:
        if isinstance(atom, Shift):
            a = consts[atom.const.label] + coords[atom.coord]
        elif isinstance(atom, Nested):
            a = consts[atom.const.label] + evaluate_term(atom.term, coords, consts, model)
        else:
            a = model(atom.symbol, [evaluate_term(t, coords, consts, model) for t in atom.args])
        if a == 0 and n < 0:
            raise EvaluationError("a unit factor vanished at the sample")
        val *= a ** n
    return val


def evaluate(form: LocalForm, point: SamplePoint, model: Callable = unit_model) -> tuple:
    consts = dict(point.constants)
    return tuple(evaluate_term(r, point.coords, consts, model) for r in form.rows)


def map_down(chart: ChartSubstitution, point: SamplePoint) -> tuple:
    consts = dict(point.constants)
    return tuple(evaluate_term(t, point.coords, consts) for t in chart.images())


# --- verification of substitution chains ---------------------------------------

@dataclass(frozen=True)
class Mismatch:
    step: int
    check: str                  # "substitution" | "target"
    point: SamplePoint
    expected: tuple
    got: tuple

    def as_json(self) -> dict:
        return {"step": self.step, "check": self.check, "point": self.point.as_json(),
                "expected": [str(v) for v in self.expected], "got": [str(v) for v in self.got]}


@dataclass
class VerifyReport:
    seed: int
    samples: int
    steps: int = 0
    evaluations: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def as_json(self) -> dict:
        return {"seed": self.seed, "samples": self.samples, "steps": self.steps,
                "evaluations": self.evaluations, "ok": self.ok,
                "mismatches": [m.as_json() for m in self.mismatches]}


def _constants(*forms, chart=None, condition=()) -> list:
    """One constant per label; the branch condition, then any zero status, wins."""
    found = set()
    for f in forms:
        found |= f.constants()
    if chart is not None:
        found |= set(chart.constants())
    status: dict = {}
    for c in found:
        if status.get(c.label) is not Status.ZERO:
            status[c.label] = c.status
    status.update(dict(condition))
    return [Constant(l, s) for l, s in sorted(status.items())]


def verify_step(step: TraceStep, samples: int, rng: random.Random, model: Callable = unit_model) -> list:
    """Sample ``samples`` points upstairs and compare both sides of the substitution exactly."""
    before, after, chart = step.before, step.after, step.chart
    if before.has_mixed() or after.has_mixed():
        raise EvaluationError("verify_chain needs forms without mixed series")
    consts = _constants(before, after, chart=chart, condition=step.condition)
    target = step.disposition.target if step.disposition is not None else None
    out = []
    done = tries = 0
    while done < samples:
        tries += 1
        if tries > 20 * samples + 100:
            raise EvaluationError(f"step {step.index}: could not find admissible samples")
        p = sample_point(rng, consts)
        try:
            down = SamplePoint(map_down(chart, p), p.constants)
            lhs = evaluate(before, down, model)
            rhs = evaluate(after, p, model)
            tgt = evaluate(target.form, p, model) if target is not None else None
        except (EvaluationError, ZeroDivisionError):
            continue
        done += 1
        if lhs != rhs:
            out.append(Mismatch(step.index, "substitution", p, lhs, rhs))
            break
        if tgt is not None:
            den = rhs[target.denominator]
            back = tuple(t * den if i in target.ratios else t for i, t in enumerate(tgt))
            if back != rhs:
                out.append(Mismatch(step.index, "target", p, rhs, back))
                break
    return out


def verify_chain(trace, samples: int = 100, seed: int = 0, model: Callable = unit_model) -> VerifyReport:
    """Check every step of ``trace`` at ``samples`` seeded exact-rational points."""
    rng = random.Random(seed)
    rep = VerifyReport(seed, samples)
    for step in trace.steps if hasattr(trace, "steps") else trace:
        rep.steps += 1
        rep.evaluations += samples
        rep.mismatches.extend(verify_step(step, samples, rng, model))
    return rep


def corrupt_step(step: TraceStep, row: int = 0, coord: Optional[int] = None, delta: int = 1) -> TraceStep:
    """Copy of ``step`` whose after-form has one exponent shifted (negative control)."""
    t = step.after.rows[row]
    if coord is None:
        coord = max(range(3), key=lambda k: t.mono[k])
    mono = list(t.mono)
    mono[coord] += delta if mono[coord] + delta >= 0 else abs(delta)
    bad = step.after.replace_row(row, Term(tuple(mono), t.factor))
    return TraceStep(step.index, step.event, step.stage, step.entry, step.center, step.chart,
                     step.condition, step.before, bad, step.child, step.disposition, step.invariants)


# --- matrix identities ---------------------------------------------------------

@dataclass(frozen=True)
class MatrixReport:
    step: int
    product_ok: bool
    det_checked: bool
    det_ok: bool = True
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.product_ok and self.det_ok


@lru_cache(maxsize=65536)
def _det(m: tuple) -> int:
    return int(sympy.Matrix(m).det())


def cross_check_matrix(step: TraceStep) -> MatrixReport:
    """E' = E * S for the exponent matrices, plus det multiplicativity on trivial-factor forms."""
    e = np.array(step.before.matrix, dtype=np.int64)
    s = np.array(step.chart.monomial, dtype=np.int64)
    e2 = np.array(step.after.matrix, dtype=np.int64)
    prod = e @ s
    ok = bool((prod == e2).all())
    detail = "" if ok else f"E*S={prod.tolist()} but E'={e2.tolist()}"
    trivial = all(r.factor.kind == "trivial" for r in step.before.rows)
    if not trivial:
        return MatrixReport(step.index, ok, False, True, detail)
    d_e, d_s, d_e2 = _det(step.before.matrix), _det(step.chart.monomial), _det(step.after.matrix)
    det_ok = d_e2 == d_e * d_s
    if not det_ok:
        detail += f" det(E')={d_e2} != det(E)det(S)={d_e * d_s}"
    return MatrixReport(step.index, ok, True, det_ok, detail.strip())


# --- golden case tables ----------------------------------------------------------

@dataclass(frozen=True)
class Expected:
    kind: str                       # "toroidal" | "unresolved"
    label: str = ""                 # "1-point maps to 2-point" for toroidal outcomes
    pattern: str = ""               # shape the unresolved branch must match
    w_order: Optional[str] = None   # name of the expected order of w along the lead coordinate

    def render(self) -> str:
        if self.kind == "toroidal":
            return self.label
        extra = f", ord w = {self.w_order}" if self.w_order else ""
        return f"still unresolved: {self.pattern}{extra}"


@dataclass(frozen=True)
class GoldenRow:
    lemma: str
    pattern: str
    chart: str
    branch: str                     # integer-data and constant conditions, human readable
    condition: tuple                # chart constants fixed by the branch
    expected: Expected
    instances: tuple                # ((params dict items), LocalForm)
    center: Center

    def key(self) -> tuple:
        return (self.pattern, self.chart, self.branch)


ALPHA = Constant("α", Status.NONZERO)
NZ, ZR = Status.NONZERO, Status.ZERO


def _iso(a, b):
    return LocalForm.make([(a, 0, 0), (0, b, 0), (0, 0, 1)], divisor_up="xy", divisor_down="uv")


def _two_curves(a, b, c, d):
    return LocalForm.make([(a, b, 0), (c, d, 0), (0, 0, 1)], divisor_up="xy", divisor_down="uv")


def _one_point(a, b, d, down="uv"):
    return LocalForm.make([(a, 0, 0), (b, 0, 0), (d, 0, 1)], [trivial(), translate("y", ALPHA), trivial()],
                          divisor_up="x", divisor_down=down)


def _one_over_one(a, d):
    return LocalForm.make([(a, 0, 0), (0, 1, 0), (d, 0, 1)], divisor_up="x", divisor_down="u")


def _two_point(a, b, c, d, e, f):
    return LocalForm.make([(a, b, 0), (c, d, 0), (e, f, 1)], divisor_up="xy", divisor_down="uv")


def _rows(lemma, pattern, center, build, specs):
    out = []
    for chart, branch, cond, expected, params in specs:
        inst = tuple((tuple(sorted(p.items())), build(**p)) for p in params)
        out.append(GoldenRow(lemma, pattern, chart, branch, tuple(sorted(cond.items())), expected, inst, center))
    return out


def _tor(m, n):
    return Expected("toroidal", f"{m}-point maps to {n}-point")


def _unres(pattern, w_order=None):
    return Expected("unresolved", pattern=pattern, w_order=w_order)


def _table_a() -> list:
    P = Center.point()
    C = Center.curve(0, 2)
    rows = []
    rows += _rows("A", "A.2pt_isolated", P, _iso, [
        ("point.x", "a=1, b>1, α!=0", {"α": NZ}, _tor(1, 2), [dict(a=1, b=2), dict(a=1, b=5)]),
        ("point.x", "a=b=1, α!=0", {"α": NZ}, _tor(1, 1), [dict(a=1, b=1)]),
        ("point.x", "a=1, α=0", {"α": ZR}, _tor(2, 2), [dict(a=1, b=1), dict(a=1, b=4)]),
        ("point.x", "a>1, β!=0, α!=0", {"α": NZ, "β": NZ}, _tor(1, 3), [dict(a=2, b=2), dict(a=3, b=7)]),
        ("point.x", "a>1, β!=0, α=0", {"α": ZR, "β": NZ}, _tor(2, 3), [dict(a=2, b=3), dict(a=4, b=4)]),
        ("point.x", "a>1, β=0, α!=0", {"α": NZ, "β": ZR}, _unres("A.1pt_wxz"), [dict(a=2, b=2), dict(a=3, b=5)]),
        ("point.x", "a>1, β=0, α=0", {"α": ZR, "β": ZR}, _unres("A.2pt_wxz"), [dict(a=2, b=3), dict(a=5, b=5)]),
        ("point.y", "b=1", {}, _tor(2, 2), [dict(a=1, b=1)]),
        ("point.y", "b>1, α!=0", {"α": NZ}, _tor(2, 3), [dict(a=1, b=2), dict(a=3, b=4)]),
        ("point.y", "b>1, α=0", {"α": ZR}, _unres("A.2pt_wxz"), [dict(a=1, b=2), dict(a=2, b=6)]),
        ("point.z", "any", {}, _tor(3, 3), [dict(a=1, b=1), dict(a=2, b=5)]),
    ])
    rows += _rows("A", "A.2pt_two_curves", C, _two_curves, [
        ("curve.lead", "β!=0", {"β": NZ}, _tor(2, 3), [dict(a=1, b=1, c=2, d=1), dict(a=2, b=3, c=1, d=4)]),
        ("curve.lead", "β=0", {"β": ZR}, _unres("A.2pt_wxz"), [dict(a=1, b=2, c=3, d=1), dict(a=2, b=1, c=2, d=5)]),
        ("curve.tail", "any", {}, _tor(3, 3), [dict(a=1, b=1, c=2, d=1), dict(a=3, b=2, c=1, d=1)]),
    ])
    rows += _rows("A", "A.1pt_descent", C, _one_point, [
        ("curve.lead", "d+1=a=b", {}, _tor(1, 1), [dict(a=1, b=1, d=0), dict(a=3, b=3, d=2)]),
        ("curve.lead", "d+1=a<b", {}, _tor(1, 2), [dict(a=2, b=3, d=1), dict(a=1, b=4, d=0)]),
        ("curve.lead", "d+1<a<=b, β!=0", {"β": NZ}, _tor(1, 3), [dict(a=3, b=3, d=0), dict(a=4, b=7, d=1)]),
        ("curve.lead", "d+1<a<=b, β=0", {"β": ZR}, _unres("A.1pt_descent", "d+1"),
         [dict(a=3, b=3, d=0), dict(a=5, b=6, d=2)]),
        ("curve.tail", "any", {}, _tor(2, 3), [dict(a=2, b=2, d=1), dict(a=4, b=6, d=0)]),
    ])
    rows += _rows("A", "A.2pt_descent", C, _two_point, [
        ("curve.lead", "(e+1,f)=(a,b)", {}, _tor(2, 2), [dict(a=2, b=1, c=3, d=3, e=1, f=1), dict(a=1, b=0, c=2, d=1, e=0, f=0)]),
        ("curve.lead", "(e+1,f)<(a,b), β!=0", {"β": NZ}, _tor(2, 3),
         [dict(a=3, b=1, c=4, d=3, e=1, f=1), dict(a=2, b=2, c=3, d=5, e=0, f=1)]),
        ("curve.lead", "(e+1,f)<(a,b), β=0", {"β": ZR}, _unres("A.2pt_descent", "e+1"),
         [dict(a=3, b=1, c=4, d=3, e=1, f=1), dict(a=4, b=2, c=5, d=7, e=0, f=0)]),
        ("curve.tail", "any", {}, _tor(3, 3), [dict(a=2, b=1, c=3, d=3, e=1, f=1), dict(a=3, b=2, c=4, d=5, e=0, f=1)]),
    ])
    return rows


def _table_b() -> list:
    C = Center.curve(0, 2)
    rows = []
    rows += _rows("B", "B.1pt_over_2pt", C, _one_point, [
        ("curve.lead", "d+1=a", {}, _tor(1, 2), [dict(a=1, b=1, d=0), dict(a=3, b=1, d=2)]),
        ("curve.lead", "d+1<a, β!=0", {"β": NZ}, _tor(1, 3), [dict(a=2, b=1, d=0), dict(a=5, b=2, d=1)]),
        ("curve.lead", "d+1<a, β=0", {"β": ZR}, _unres("B.1pt_over_2pt", "d+1"), [dict(a=2, b=1, d=0), dict(a=6, b=3, d=2)]),
        ("curve.tail", "any", {}, _tor(2, 3), [dict(a=1, b=1, d=0), dict(a=4, b=2, d=1)]),
    ])
    rows += _rows("B", "B.1pt_over_1pt", C, _one_over_one, [
        ("curve.lead", "d+1=a", {}, _tor(1, 1), [dict(a=1, d=0), dict(a=4, d=3)]),
        ("curve.lead", "d+1<a, β!=0", {"β": NZ}, _tor(1, 2), [dict(a=2, d=0), dict(a=5, d=1)]),
        ("curve.lead", "d+1<a, β=0", {"β": ZR}, _unres("B.1pt_over_1pt", "d+1"), [dict(a=2, d=0), dict(a=6, d=3)]),
        ("curve.tail", "any", {}, _tor(2, 2), [dict(a=1, d=0), dict(a=4, d=2)]),
    ])
    rows += _rows("B", "B.2pt", C, lambda a, b, d, e, g, h: _two_point(a, b, d, e, g, h), [
        ("curve.lead", "(g+1,h)=(a,b)", {}, _tor(2, 2), [dict(a=1, b=0, d=0, e=1, g=0, h=0), dict(a=2, b=1, d=1, e=2, g=1, h=1)]),
        ("curve.lead", "(g+1,h)<(a,b), β!=0", {"β": NZ}, _tor(2, 3),
         [dict(a=2, b=1, d=1, e=1, g=0, h=0), dict(a=3, b=2, d=1, e=3, g=1, h=1)]),
        ("curve.lead", "(g+1,h)<(a,b), β=0", {"β": ZR}, _unres("B.2pt", "g+1"),
         [dict(a=2, b=1, d=1, e=1, g=0, h=0), dict(a=4, b=2, d=1, e=3, g=2, h=1)]),
        ("curve.tail", "any", {}, _tor(3, 3), [dict(a=1, b=0, d=0, e=1, g=0, h=0), dict(a=3, b=2, d=1, e=3, g=1, h=1)]),
    ])
    return rows


def golden_case_table(lemma: str) -> list:
    """Every outcome the proofs enumerate, keyed by (pattern, chart, branch)."""
    lemma = lemma.upper()
    if lemma == "A":
        rows = _table_a()
    elif lemma == "B":
        rows = _table_b()
    else:
        raise ValueError(f"unknown lemma {lemma!r}")
    return sorted(rows, key=GoldenRow.key)


@dataclass(frozen=True)
class GoldenResult:
    row: GoldenRow
    params: tuple
    condition: tuple
    ok: bool
    got: str
    step: TraceStep


def _describe(d, form: LocalForm) -> str:
    if d.kind == "toroidal":
        return d.label
    return f"{d.kind}: {', '.join(d.patterns)} (w row {form.rows[2].mono})"


def _w_order_ok(row: GoldenRow, params: dict, form: LocalForm) -> bool:
    if row.expected.w_order is None:
        return True
    name = row.expected.w_order.split("+")[0]
    want = params[name] + 1
    return form.rows[2].mono[row.center.coords[0]] == want


def check_golden_row(row: GoldenRow) -> list:
    """Run the engine pipeline on every instance of ``row`` and every matching branch."""
    params_ = POINT_PARAMS if row.lemma == "A" else CURVE_PARAMS
    pats = patterns_a if row.lemma == "A" else patterns_b
    out = []
    for params, form in row.instances:
        pdict = dict(params)
        charts = {c.name: c for c in enumerate_charts(row.center, form.upstairs)}
        bf = substitute(form, charts[row.chart], classifier=lambda f: dispose(f, params_, pats))
        want = dict(row.condition)
        hits = [b for b in bf.branches if all(dict(b.condition).get(l) is s for l, s in want.items())]
        if not hits:
            raise AssertionError(f"no branch of {row.key()} matches {want}")
        for k, br in enumerate(hits):
            d = br.disposition
            if row.expected.kind == "toroidal":
                ok = d.kind == "toroidal" and d.label == row.expected.label
            else:
                ok = d.kind == "unresolved" and row.expected.pattern in d.patterns and _w_order_ok(row, pdict, br.form)
            step = TraceStep(k, 0, "golden", 0, row.center, br.chart, br.condition, form, br.form, 0, d)
            out.append(GoldenResult(row, params, br.condition, ok, _describe(d, br.form), step))
    return out


def check_golden(lemma: str) -> list:
    out = []
    for row in golden_case_table(lemma):
        out.extend(check_golden_row(row))
    return out


# --- integer oracles ---------------------------------------------------------------

def pair_ordering_events(u: tuple, v: tuple) -> int:
    """Blow-ups needed to make two exponent pairs comparable, by direct recursion.

    A 2-curve blow-up sends every pair ``(a, b)`` to ``(a + b, b)`` in one
    chart and ``(a, a + b)`` in the other; only children whose product stays
    negative need another blow-up.
    """
    count = 0
    stack = [(u, v)]
    while stack:
        (a, b), (c, d) = stack.pop()
        if (a - c) * (b - d) >= 0:
            continue
        count += 1
        stack.append(((a + b, b), (c + d, d)))
        stack.append(((a, a + b), (c, c + d)))
    return count


def subtractive_euclid_steps(p: int, q: int) -> int:
    """Sum of the partial quotients of ``p / q``."""
    steps = 0
    while p and q:
        k, r = divmod(max(p, q), min(p, q))
        steps += k
        p, q = min(p, q), r
    return steps
