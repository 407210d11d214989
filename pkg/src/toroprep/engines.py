"""Invariant-driven blow-up algorithms over a fiber of local forms.

Both algorithms treat every fiber entry as a germ and every non-invertibility
curve through a germ as a locus.  Blowing up a center replaces the germ by one
child per (chart, constant branch); children whose map to the blown-up target
is defined are classified and retired, the others stay active.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .charts import (
    Center,
    ChartSubstitution,
    Disposition,
    blow_up_target,
    enumerate_charts,
    substitute,
)
from .forms import (
    MORPHISM_CASE,
    LocalForm,
    is_toroidal,
    validate,
)
from .patterns import (
    A_INITIAL,
    B_INITIAL,
    PatternMismatch,
    a_value,
    isolated_point,
    noninvertible_curves,
    omega_value,
    pair_product,
    patterns_a,
    patterns_b,
    two_point_shape,
    with_generic_nonzero,
)

log = logging.getLogger(__name__)

POINT_PARAMS = (0, 1, 2)   # ideal of a point of the target
CURVE_PARAMS = (0, 2)      # ideal of the curve u = w = 0


class EngineError(RuntimeError):
    """The run reached a state the algorithm does not allow (a defect, not an outcome)."""


class InadmissibleForm(ValueError):
    pass


@dataclass(frozen=True)
class InvariantRecord:
    kind: str                      # "A_lambda" | "Omega_E" | "PairProduct"
    value: int
    role: str = "center"           # "center" | "child"
    locus: Optional[int] = None
    parent: Optional[int] = None
    depth: int = 0
    root: Optional[int] = None     # value at the root of the locus chain


@dataclass(frozen=True)
class TraceStep:
    index: int
    event: int
    stage: str
    entry: int
    center: Center
    chart: ChartSubstitution
    condition: tuple
    before: LocalForm
    after: LocalForm
    child: int
    disposition: Disposition
    invariants: tuple = ()


@dataclass
class Trace:
    algorithm: str
    initial: list = field(default_factory=list)     # [(id, LocalForm)]
    steps: list = field(default_factory=list)
    leaves: list = field(default_factory=list)      # [(id, LocalForm, Disposition)]
    outcome: str = "running"
    diagnostics: list = field(default_factory=list)
    budget: Optional[int] = None                    # fixed per-stage limit, or None for defaults
    limits: dict = field(default_factory=dict)      # stage -> round limit in force

    def events(self) -> int:
        return max((s.event for s in self.steps), default=0)


@dataclass
class _Entry:
    id: int
    form: LocalForm
    depth: int = 0
    rounds: dict = field(default_factory=dict)  # stage -> blow-ups of that stage along the branch
    loci: dict = field(default_factory=dict)   # curve -> _Locus
    info: Optional[tuple] = None               # cached selection data


@dataclass(frozen=True)
class _Locus:
    id: int
    parent: Optional[int]
    depth: int
    root: int


def dispose(form: LocalForm, center_params, patterns: Callable) -> Disposition:
    """Disposition of a germ with respect to the blow-up of the target center."""
    tm = blow_up_target(form, center_params)
    if tm is None:
        pats = patterns(form)
        return Disposition("unresolved" if pats else "undefined", patterns=pats)
    tf = tm.form
    label = f"{form.upstairs}-point maps to {tf.downstairs}-point"
    if is_toroidal(tf):
        return Disposition("toroidal", label, MORPHISM_CASE.get((tf.upstairs, tf.downstairs)), target=tm)
    return Disposition("not_toroidal", label, target=tm)


def default_limit(start_value: int) -> int:
    return 10 * (abs(start_value) + 1)


class _Runner:
    def __init__(self, algorithm, center_params, patterns, kind, value, budget, forms):
        self.center_params = center_params
        self.patterns = patterns
        self.kind = kind
        self.value = value
        self.trace = Trace(algorithm, budget=budget)
        self.active: dict = {}
        self._next = 0
        self._locus = 0
        self.event = 0
        self.retire = True   # classified children leave the active set
        for f in forms:
            e = _Entry(self._new_id(), f)
            self.trace.initial.append((e.id, f))
            d = dispose(f, center_params, patterns)
            if d.kind == "toroidal":
                self.trace.leaves.append((e.id, f, d))
            else:
                self.active[e.id] = e

    def _new_id(self) -> int:
        self._next += 1
        return self._next - 1

    def _new_locus(self, parent: Optional[_Locus], value: int) -> _Locus:
        self._locus += 1
        if parent is None:
            return _Locus(self._locus, None, 0, value)
        return _Locus(self._locus, parent.id, parent.depth + 1, parent.root)

    def _classify(self, form: LocalForm) -> Disposition:
        return dispose(form, self.center_params, self.patterns)

    def ordered(self) -> list:
        return [self.active[k] for k in sorted(self.active)]

    def loci_values(self, e: _Entry) -> list:
        out = []
        for c in noninvertible_curves(e.form, self.center_params):
            v = self.value(e.form, c)
            if v is not None and v > 0:
                out.append((v, c))
        return out

    def best_locus(self, analyze=None):
        """Entry and curve of maximal invariant; ties go to the lowest entry id."""
        best = None
        for k in sorted(self.active):
            e = self.active[k]
            if e.info is None:
                e.info = analyze(e) if analyze else (self.loci_values(e),)
            for v, c in e.info[-1]:
                if best is None or v > best[0]:
                    best = (v, e, c)
        return best

    def stage_start_value(self, stage: str) -> int:
        """Largest invariant over the active germs when ``stage`` first fires."""
        if stage in ("iv", "descent"):
            return max((v for e in self.active.values() for v, _ in self.loci_values(e)), default=0)
        if stage == "iii":
            vals = []
            for e in self.active.values():
                t = two_point_shape(e.form) or _monomial_pair_view(e.form)
                if t is not None:
                    vals += [abs(_pp(t, p)) for p in PAIRS]
            return max(vals, default=0)
        return max((sum(r.mono) for e in self.active.values() for r in e.form.rows), default=0)

    def blow_up(self, e: _Entry, stage: str, center: Center, curve=None, pair=None):
        limits = self.trace.limits
        if stage not in limits:
            limits[stage] = self.trace.budget if self.trace.budget is not None else default_limit(self.stage_start_value(stage))
        done = e.rounds.get(stage, 0)
        if done >= limits[stage]:
            self.trace.outcome = "exhausted"
            self.trace.diagnostics.append(
                f"stage {stage} round limit {limits[stage]} reached at germ {e.id}: {e.form}")
            return False
        rounds = dict(e.rounds)
        rounds[stage] = done + 1
        self.event += 1
        del self.active[e.id]
        center_rec = ()
        tag = None
        if curve is not None:
            v = self.value(e.form, curve)
            tag = e.loci.get(curve) or self._new_locus(None, v)
            center_rec = (InvariantRecord(self.kind, v, "center", tag.id, tag.parent, tag.depth, tag.root),)
        elif pair is not None:
            t = two_point_shape(e.form) or _monomial_pair_view(e.form)
            center_rec = (InvariantRecord("PairProduct", _pp(t, pair), "center"),)
        for chart in enumerate_charts(center, e.form.upstairs, step=self.event):
            bf = substitute(e.form, chart, classifier=self._classify)
            for br in bf.branches:
                child = _Entry(self._new_id(), br.form, e.depth + 1, rounds)
                recs = list(center_rec)
                if tag is not None:
                    for c in noninvertible_curves(br.form, self.center_params):
                        cv = self.value(br.form, c)
                        if cv is None:
                            continue
                        if br.chart.exceptional in c:
                            child.loci[c] = lt = self._new_locus(tag, cv)
                            recs.append(InvariantRecord(self.kind, cv, "child", lt.id, lt.parent, lt.depth, lt.root))
                        elif c in e.loci:
                            child.loci[c] = e.loci[c]
                elif pair is not None and br.form.upstairs == 2:
                    t = two_point_shape(br.form) or _monomial_pair_view(br.form)
                    if t is not None:
                        recs.append(InvariantRecord("PairProduct", _pp(t, pair), "child"))
                d = br.disposition
                self.trace.steps.append(TraceStep(
                    len(self.trace.steps), self.event, stage, e.id, center, br.chart, br.condition,
                    e.form, br.form, child.id, d, tuple(recs)))
                if not self.retire:
                    self.active[child.id] = child
                elif d.kind == "toroidal":
                    self.trace.leaves.append((child.id, br.form, d))
                elif d.kind == "not_toroidal":
                    raise EngineError(f"germ {child.id} maps to the target but is not toroidal: {br.form}")
                else:
                    self.active[child.id] = child
        return True

    def finish(self, done_outcome: str) -> Trace:
        if self.trace.outcome == "running":
            self.trace.outcome = done_outcome
        return self.trace


def _monomial_pair_view(form: LocalForm):
    """Exponents of u, v, w on the two divisor coordinates of a 2-point."""
    if form.upstairs != 2:
        return None
    x, y = sorted(form.divisor_up)
    u, v, w = ((r.mono[x], r.mono[y]) for r in form.rows)

    class _V:
        pass

    t = _V()
    t.u, t.v, t.w = u, v, w
    return t


def _pp(t, pair) -> int:
    vals = (t.u, t.v, t.w)
    return pair_product(vals[pair[0]], vals[pair[1]])


PAIRS = ((0, 1), (0, 2), (1, 2))


def _negative_pair(form: LocalForm, pairs=PAIRS):
    t = two_point_shape(form) or _monomial_pair_view(form)
    if t is None:
        return None
    for p in pairs:
        if _pp(t, p) < 0:
            return p
    return None


def _fiber_forms(fiber) -> list:
    return [f for f in (fiber.forms if hasattr(fiber, "forms") else fiber)]


@dataclass(frozen=True)
class Fiber:
    forms: tuple


# --- algorithm A: blowing up a 2-point of the target ---------------------------

def check_admissible(forms, patterns, allowed, label):
    for i, f in enumerate(forms):
        bad = validate(f)
        if bad:
            raise InadmissibleForm(f"form {i}: {bad}")
        pats = set(patterns(with_generic_nonzero(f)))
        if not pats & allowed:
            raise InadmissibleForm(f"form {i} is not an admissible {label} input: {f}")


def run_lemma_a(fiber, budget: Optional[int] = None) -> Trace:
    """Resolve the map to the blow-up of a 2-point over every germ of the fiber.

    Stages, each taking priority over the next: (i) isolated points of the
    non-invertibility locus, (ii) curves along which w has order zero,
    (iii) 2-curve blow-ups until the exponent pairs of u, v and w are
    totally ordered, (iv) curve blow-ups in decreasing order of
    ``min(ord u, ord v) - ord w``.
    """
    forms = _fiber_forms(fiber)
    check_admissible(forms, patterns_a, A_INITIAL, "2-point blow-up")
    r = _Runner("lemma_a", POINT_PARAMS, patterns_a, "A_lambda", a_value, budget, forms)
    while r.active and r.trace.outcome == "running":
        action = _select_a(r)
        if action is None:
            raise EngineError("no admissible center for germs " + ", ".join(str(e.form) for e in r.ordered()))
        r.blow_up(*action)
    return r.finish("all_toroidal")


def _analyze_a(r: _Runner, e: _Entry) -> tuple:
    """(stage-i flag, stage-ii curve, stage-iii pair, stage-iv loci) of one germ."""
    f = e.form
    point = isolated_point(f, POINT_PARAMS)
    flat = None
    for c in noninvertible_curves(f, POINT_PARAMS):
        if a_value(f, c) is not None and f.rows[2].mono[c[0]] == 0:
            flat = c
            break
    pair = None
    t = two_point_shape(f)
    if t is not None and sum(t.w) > 0:
        pair = _negative_pair(f)
    return point, flat, pair, r.loci_values(e)


def _select_a(r: _Runner):
    entries = r.ordered()
    for e in entries:
        if e.info is None:
            e.info = _analyze_a(r, e)
    for e in entries:
        if e.info[0]:
            return (e, "i", Center.point())
    for e in entries:
        if e.info[1] is not None:
            return (e, "ii", Center.curve(*e.info[1]), e.info[1])
    for e in entries:
        if e.info[2] is not None:
            x, y = sorted(e.form.divisor_up)
            return (e, "iii", Center.two_curve(x, y), None, e.info[2])
    best = r.best_locus()
    if best is None:
        return None
    return (best[1], "iv", Center.curve(*best[2]), best[2])


def run_pair_ordering(form: LocalForm, pairs=((0, 1),), budget: Optional[int] = None) -> Trace:
    """Blow up 2-curves over a 2-point until the chosen exponent pairs are comparable.

    Every child is re-examined whatever its disposition; children without a
    negative pair product are the leaves.
    """
    r = _Runner("pair_ordering", POINT_PARAMS, patterns_a, "PairProduct", lambda f, c: None, budget, [])
    r.retire = False
    e = _Entry(r._new_id(), form)
    r.trace.initial.append((e.id, form))
    r.active[e.id] = e
    while r.active and r.trace.outcome == "running":
        e = r.ordered()[0]
        p = _negative_pair(e.form, pairs) if e.form.upstairs == 2 else None
        if p is None:
            del r.active[e.id]
            r.trace.leaves.append((e.id, e.form, dispose(e.form, POINT_PARAMS, patterns_a)))
            continue
        x, y = sorted(e.form.divisor_up)
        r.blow_up(e, "iii", Center.two_curve(x, y), None, p)
    return r.finish("ordered")


# --- algorithm B: blowing up a curve through a 1-point -------------------------

def run_lemma_b(fiber, budget: Optional[int] = None) -> Trace:
    """Blow up non-invertibility curves of ``(u, w)`` in decreasing order of ``ord u - ord w``."""
    forms = _fiber_forms(fiber)
    check_admissible(forms, patterns_b, B_INITIAL, "curve blow-up")
    r = _Runner("lemma_b", CURVE_PARAMS, patterns_b, "Omega_E", omega_value, budget, forms)
    while r.active and r.trace.outcome == "running":
        best = r.best_locus()
        if best is None:
            raise EngineError("no curve with positive invariant among " + ", ".join(str(e.form) for e in r.ordered()))
        v, e, c = best
        r.blow_up(e, "descent", Center.curve(*c), c)
    return r.finish("all_toroidal")


# --- invariants ------------------------------------------------------------------

def compute_invariant(form: LocalForm, kind: str, curve=None) -> InvariantRecord:
    if kind == "A_lambda":
        pats = patterns_a(form)
        if not {"A.1pt_descent", "A.2pt_descent"} & set(pats):
            raise PatternMismatch(f"A_lambda is defined on descent shapes only, got {pats}")
        curves = [curve] if curve else noninvertible_curves(form, POINT_PARAMS)
        vals = [a_value(form, c) for c in curves]
        vals = [v for v in vals if v is not None]
        if not vals:
            raise PatternMismatch("no locus carries A_lambda")
        return InvariantRecord(kind, max(vals))
    if kind == "Omega_E":
        pats = patterns_b(form)
        if not pats:
            raise PatternMismatch("Omega_E is defined on curve blow-up shapes only")
        curves = [curve] if curve else noninvertible_curves(form, CURVE_PARAMS)
        vals = [v for v in (omega_value(form, c) for c in curves) if v is not None]
        if not vals:
            raise PatternMismatch("no locus carries Omega_E")
        return InvariantRecord(kind, max(vals))
    if kind == "PairProduct":
        if "A.2pt_pair" not in patterns_a(form):
            raise PatternMismatch("PairProduct is defined on 2-points with w = x^e y^f z, e+f>0")
        t = two_point_shape(form)
        return InvariantRecord(kind, pair_product(t.u, t.v))
    raise ValueError(f"unknown invariant {kind}")


# --- valuations ------------------------------------------------------------------

class RationallyIndependent(ValueError):
    """Independent values: the center is already resolved and no blow-up is needed."""


@dataclass(frozen=True)
class ValuationState:
    values: tuple              # (nu(u), nu(v)), positive
    independent: bool = False  # declared rationally independent


@dataclass(frozen=True)
class ValuationStep:
    index: int
    chart: str
    before: tuple
    after: tuple


@dataclass
class ValuationTrace:
    steps: list
    outcome: str
    final: tuple


def _ratio(u, v) -> Fraction:
    if isinstance(u, (int, Fraction)) and isinstance(v, (int, Fraction)):
        return Fraction(v) / Fraction(u)
    import sympy

    r = sympy.nsimplify(sympy.simplify(sympy.sympify(v) / sympy.sympify(u)))
    if not r.is_rational:
        raise RationallyIndependent("values are rationally independent: resolved, no blow-ups needed")
    return Fraction(int(r.p), int(r.q))


def resolve_dependent_valuation(state: ValuationState) -> ValuationTrace:
    """Blow up 2-curves along the center of a monomial valuation until it leaves the 2-curve.

    Each step divides the parameter of larger value by the other one; equal
    values end in the translated chart where the quotient is a unit.
    """
    if state.independent:
        raise RationallyIndependent("values are rationally independent: resolved, no blow-ups needed")
    u, v = state.values
    r = _ratio(u, v)
    if u <= 0 or r <= 0:
        raise ValueError("valuation values must be positive")
    scale = u
    nu, nv = Fraction(1), r
    steps = []
    while nu > 0 and nv > 0:
        before = (scale * nu, scale * nv)
        if nv > nu:
            chart, nv = "u=u1, v=u1*v1", nv - nu
        elif nu > nv:
            chart, nu = "u=u1*v1, v=v1", nu - nv
        else:
            chart, nv = "u=u1, v=u1*(v1+alpha), alpha!=0", Fraction(0)
        steps.append(ValuationStep(len(steps), chart, before, (scale * nu, scale * nv)))
    return ValuationTrace(steps, "resolved", (scale * nu, scale * nv))


# --- trace invariants ------------------------------------------------------------

def descent_violations(trace: Trace) -> list:
    """Broken monotonicity or round bounds along the locus chains of ``trace``."""
    out = []
    for s in trace.steps:
        center = [r for r in s.invariants if r.role == "center"]
        if not center:
            continue
        c = center[0]
        for r in s.invariants:
            if r.role != "child":
                continue
            if r.kind == "PairProduct":
                if c.value < 0 and not r.value > c.value:
                    out.append(f"step {s.index}: pair product {c.value} -> {r.value}")
            elif not 0 < r.value < c.value:
                out.append(f"step {s.index}: {r.kind} {c.value} -> {r.value}")
        if c.kind in ("A_lambda", "Omega_E") and s.stage in ("iv", "descent"):
            if c.depth + 1 > c.root:
                out.append(f"step {s.index}: round {c.depth + 1} on a chain starting at {c.root}")
    return out


def chain_rounds(trace: Trace) -> dict:
    """Blow-up rounds per locus chain root: ``{root locus id: (initial value, rounds)}``."""
    roots: dict = {}
    seen = set()
    for s in trace.steps:
        for r in s.invariants:
            if r.role == "center" and r.locus is not None and (s.event, r.locus) not in seen:
                seen.add((s.event, r.locus))
                key = r.locus if r.parent is None else None
                if key is not None:
                    roots.setdefault(key, [r.value, 0])
    # chains are reconstructed from parent links
    parent = {}
    for s in trace.steps:
        for r in s.invariants:
            if r.locus is not None:
                parent[r.locus] = r.parent
    for ev, loc in seen:
        root = loc
        while parent.get(root) is not None:
            root = parent[root]
        if root in roots:
            roots[root][1] += 1
    return {k: tuple(v) for k, v in roots.items()}
