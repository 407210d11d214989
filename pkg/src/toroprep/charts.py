"""Blow-up charts and the transformation of local forms through them."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .algebra import (
    COORDS,
    PARAMS,
    TRIVIAL,
    ZERO_MONO,
    Constant,
    Factor,
    Shift,
    Status,
    Term,
    mono_add,
    specialize_term,
    substitute_term,
    unit_vector,
)
from .forms import LocalForm, coord_index, divisor_support, validate


@dataclass(frozen=True)
class Center:
    """A possible center through the point: the point itself or a coordinate curve.

    ``coords`` lists the vanishing coordinates; for curves the first one is the
    coordinate kept in the leading chart.
    """

    kind: str          # "point" | "curve" | "two_curve"
    coords: tuple = (0, 1, 2)

    @staticmethod
    def point() -> "Center":
        return Center("point", (0, 1, 2))

    @staticmethod
    def curve(lead, tail) -> "Center":
        return Center("curve", (coord_index(lead), coord_index(tail)))

    @staticmethod
    def two_curve(lead, tail) -> "Center":
        return Center("two_curve", (coord_index(lead), coord_index(tail)))

    def __str__(self) -> str:
        eqs = "=".join(COORDS[c] for c in self.coords)
        return f"{self.kind}({eqs}=0)"


@dataclass(frozen=True)
class ChartSubstitution:
    """Old coordinate ``j`` equals ``monomial[j]`` in the new coordinates,
    times ``(c + t_k)`` when ``translates[j] == (k, c)``.
    """

    name: str
    monomial: tuple                  # 3 rows of new-coordinate exponents
    translates: tuple = (None, None, None)
    exceptional: int = 0             # new coordinate cutting out the exceptional divisor

    def images(self) -> tuple:
        out = []
        for j in range(3):
            tr = self.translates[j]
            f = TRIVIAL if tr is None else Factor.build([(Shift(tr[1], tr[0]), 1)])
            out.append(Term(tuple(self.monomial[j]), f))
        return tuple(out)

    def constants(self) -> list:
        return [tr[1] for tr in self.translates if tr is not None]

    def specialize(self, assignment) -> "ChartSubstitution":
        mono = [tuple(r) for r in self.monomial]
        trs = list(self.translates)
        for j, tr in enumerate(trs):
            if tr is None:
                continue
            status = assignment.get(tr[1].label, tr[1].status)
            if status is Status.ZERO:
                mono[j] = mono_add(mono[j], unit_vector(tr[0]))
                trs[j] = None
            else:
                trs[j] = (tr[0], tr[1].with_status(status))
        return ChartSubstitution(self.name, tuple(mono), tuple(trs), self.exceptional)

    def is_identity(self) -> bool:
        return self.monomial == tuple(unit_vector(j) for j in range(3)) and not any(self.translates)


IDENTITY = ChartSubstitution("identity", tuple(unit_vector(j) for j in range(3)))


class ChartError(ValueError):
    pass


def _fresh(symbol: str, step) -> Constant:
    return Constant(symbol if step is None else f"{symbol}{step}")


def enumerate_charts(center: Center, at: int = 3, step=None) -> list:
    """Chart families covering the exceptional divisor of ``center``.

    A point gives three charts, curves and 2-curves two each.  Free constants
    are ``GENERIC`` and labelled with ``step`` so that traces stay unambiguous.
    """
    cs = center.coords
    if len(set(cs)) != len(cs):
        raise ChartError(f"center {center} references a coordinate twice")
    if center.kind == "point":
        a, b = _fresh("α", step), _fresh("β", step)
        x, y, z = unit_vector(0), unit_vector(1), unit_vector(2)
        return [
            ChartSubstitution("point.x", (x, x, x), (None, (1, a), (2, b)), exceptional=0),
            ChartSubstitution("point.y", (mono_add(x, y), y, y), (None, None, (2, a)), exceptional=1),
            ChartSubstitution("point.z", (mono_add(x, z), mono_add(y, z), z), exceptional=2),
        ]
    if len(cs) != 2:
        raise ChartError(f"{center.kind} center needs two equations")
    if center.kind == "two_curve" and at < 2:
        raise ChartError("a 2-curve only passes through 2- and 3-points")
    lead, tail = cs
    c = _fresh("β" if center.kind == "curve" else "α", step)
    ident = [unit_vector(j) for j in range(3)]
    m1 = list(ident)
    m1[tail] = unit_vector(lead)
    tr1 = [None, None, None]
    tr1[tail] = (tail, c)
    m2 = list(ident)
    m2[lead] = mono_add(unit_vector(lead), unit_vector(tail))
    tag = "curve" if center.kind == "curve" else "twocurve"
    return [
        ChartSubstitution(f"{tag}.lead", tuple(m1), tuple(tr1), exceptional=lead),
        ChartSubstitution(f"{tag}.tail", tuple(m2), exceptional=tail),
    ]


# --- substitution ------------------------------------------------------------

@dataclass(frozen=True)
class Disposition:
    kind: str                        # "toroidal" | "unresolved" | "undefined"
    label: str = ""                  # e.g. "1-point maps to 2-point"
    case: Optional[int] = None       # toroidal morphism case number
    patterns: tuple = ()             # unresolved pattern ids
    target: Optional["TargetMap"] = None

    @property
    def change_of_variable(self) -> bool:
        """True when the target form is toroidal only after a change of variables."""
        if self.kind != "toroidal" or self.target is None:
            return False
        from .forms import classify_toroidal_morphism

        return classify_toroidal_morphism(self.target.form) is None


@dataclass(frozen=True)
class Branch:
    condition: tuple                 # sorted ((label, Status), ...)
    chart: ChartSubstitution         # specialized to the branch
    form: LocalForm
    disposition: Optional[Disposition] = None

    def condition_str(self) -> str:
        if not self.condition:
            return "any"
        return ", ".join(f"{l}{'=0' if s is Status.ZERO else '!=0'}" for l, s in self.condition)


@dataclass(frozen=True)
class BranchedForms:
    source: LocalForm
    chart: ChartSubstitution
    branches: tuple


def assignments(labels: Sequence[str]):
    labels = sorted(set(labels))
    for combo in product((Status.ZERO, Status.NONZERO), repeat=len(labels)):
        yield tuple(zip(labels, combo))


def specialize_form(form: LocalForm, assignment) -> LocalForm:
    rows = tuple(specialize_term(t, assignment) for t in form.rows)
    return LocalForm(rows, form.divisor_up, form.divisor_down, form.upstairs, form.downstairs)


def apply_chart(form: LocalForm, chart: ChartSubstitution) -> LocalForm:
    """Substitute a fully specialized chart into a specialized form."""
    images = chart.images()
    rows = tuple(substitute_term(t, images) for t in form.rows)
    if any(min(t.mono) < 0 for t in rows):
        raise ChartError("substitution produced a negative exponent")
    out = LocalForm(rows, frozenset(), form.divisor_down, 0, form.downstairs)
    up = divisor_support(out)
    return LocalForm(rows, up, form.divisor_down, len(up), form.downstairs)


def substitute(form: LocalForm, chart: ChartSubstitution, classifier=None) -> BranchedForms:
    """Pull ``form`` back through ``chart``, splitting every open constant.

    ``classifier`` (optional) maps a branch form to a :class:`Disposition`.
    """
    if form.has_mixed():
        raise ChartError("mixed series rows cannot be blown up")
    labels = set(form.generic_labels())
    labels |= {c.label for c in chart.constants() if c.status is Status.GENERIC}
    out = []
    for cond in assignments(labels):
        a = dict(cond)
        f = specialize_form(form, a)
        ch = chart.specialize(a)
        new = apply_chart(f, ch)
        bad = validate(new)
        if bad:
            raise ChartError(f"branch {cond} produced an invalid form: {bad}")
        disp = classifier(new) if classifier else None
        out.append(Branch(cond, ch, new, disp))
    return BranchedForms(form, chart, tuple(out))


def divide_rows(form: LocalForm, numerator, denominator) -> Optional[LocalForm]:
    """Replace row ``numerator`` by ``numerator/denominator``; ``None`` if not regular."""
    i, j = (PARAMS.index(p) if isinstance(p, str) else p for p in (numerator, denominator))
    if form.rows[j].factor.kind == "mixed" or form.rows[i].factor.kind == "mixed":
        return None
    q = form.rows[i].divide(form.rows[j])
    if q is None:
        return None
    return form.replace_row(i, q)


@dataclass(frozen=True)
class TargetMap:
    """The point's image on the blown-up target and the local form there."""

    denominator: int
    form: LocalForm
    ratios: tuple = ()   # rows replaced by their quotient by the denominator


def blow_up_target(form: LocalForm, center_params: Sequence[int]) -> Optional[TargetMap]:
    """Express ``form`` in the chart of the target blow-up that contains the image.

    The first parameter (in u, v, w order) dividing all others of the center
    is chosen.  Ratios that stay units are non-divisor parameters after
    subtracting their value, which the toroidality test handles implicitly.
    """
    center = sorted(center_params)
    monos = [form.rows[r].mono for r in center]
    for den in center:
        m = form.rows[den].mono
        if not all(p <= q for n in monos for p, q in zip(m, n)):
            continue
        cur = form
        ok = True
        for r in center:
            if r == den:
                continue
            nxt = divide_rows(cur, r, den)
            if nxt is None:
                ok = False
                break
            cur = nxt
        if not ok:
            continue
        down = {den}
        for r in range(3):
            if r == den:
                continue
            if r in form.divisor_down and (r not in center or cur.rows[r].mono != ZERO_MONO):
                down.add(r)
        img = LocalForm(cur.rows, cur.divisor_up, frozenset(down), cur.upstairs, len(down))
        return TargetMap(den, img, tuple(r for r in center if r != den))
    return None


def normalize(form: LocalForm) -> LocalForm:
    """Canonical bookkeeping form.

    Zero translates become coordinates, nonzero translates are absorbed as
    opaque units and the divisor coordinates are cut down to the support of
    the divisor rows.  Idempotent.
    """
    rows = []
    for t in form.rows:
        if t.factor.mixed is not None:
            rows.append(t)
            continue
        zero = {c.label: Status.ZERO for c in t.factor.constants() if c.status is Status.ZERO}
        t = specialize_term(t, zero)
        f = t.factor
        if f.atoms and not f.opaque and all(c.status is Status.NONZERO for c in f.constants()):
            f = Factor(f.atoms, opaque=True)
        rows.append(Term(t.mono, f))
    out = LocalForm(tuple(rows), form.divisor_up, form.divisor_down, form.upstairs, form.downstairs)
    up = divisor_support(out) & form.divisor_up if form.divisor_down else form.divisor_up
    return LocalForm(out.rows, up, out.divisor_down, len(up), out.downstairs)
