"""Shape recognition for the intermediate forms of the preparation algorithms.

Pattern ids are prefixed by the algorithm they belong to: ``A.`` for the
blow-up of a 2-point of the target, ``B.`` for the blow-up of a curve through
a 1-point.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Optional

from .algebra import Status, log_derivative
from .forms import LocalForm


class PatternMismatch(ValueError):
    pass


# --- non-invertibility locus -------------------------------------------------

def _invertible(monos) -> bool:
    for m in monos:
        if all(all(p <= q for p, q in zip(m, n)) for n in monos):
            return True
    return False


def restrict(form: LocalForm, params, coords) -> list:
    return [tuple(form.rows[i].mono[c] for c in coords) for i in params]


def ideal_invertible(form: LocalForm, params) -> bool:
    return _invertible(restrict(form, params, (0, 1, 2)))


def noninvertible_curves(form: LocalForm, params) -> list:
    """Coordinate curves along which the ideal generated by ``params`` is not principal.

    Each curve is returned as ``(lead, tail)`` with ``lead`` a divisor
    coordinate; both are divisor coordinates for a 2-curve.
    """
    return list(_curves(form.matrix, form.divisor_up, tuple(params)))


@lru_cache(maxsize=1 << 16)
def _curves(matrix, divisor_up, params) -> tuple:
    out = []
    for pair in combinations(range(3), 2):
        if not set(pair) & divisor_up:
            continue
        if _invertible([tuple(matrix[i][c] for c in pair) for i in params]):
            continue
        a, b = pair
        out.append((a, b) if a in divisor_up else (b, a))
    return tuple(out)


def isolated_point(form: LocalForm, params) -> bool:
    return not ideal_invertible(form, params) and not noninvertible_curves(form, params)


# --- shapes --------------------------------------------------------------------

@dataclass(frozen=True)
class OnePoint:
    x: int
    y: int
    z: int
    a: int   # u = x^a
    b: int   # v = x^b (translate in y)
    d: int   # w = x^d z


@dataclass(frozen=True)
class TwoPoint:
    x: int
    y: int
    z: int
    u: tuple  # exponents of u on (x, y)
    v: tuple
    w: tuple  # w = x^e y^f z


def _w_free(form: LocalForm) -> Optional[int]:
    """Free coordinate occurring linearly in w, if w is a monomial times it."""
    w = form.rows[2]
    free = [k for k in range(3) if k not in form.divisor_up and w.mono[k]]
    if len(free) == 1 and w.mono[free[0]] == 1:
        return free[0]
    return None


def one_point_shape(form: LocalForm, free_v: bool = False) -> Optional[OnePoint]:
    if form.upstairs != 1 or form.generic_labels():
        return None
    (x,) = sorted(form.divisor_up)
    z = _w_free(form)
    if z is None:
        return None
    (y,) = [k for k in range(3) if k not in (x, z)]
    u, v, w = form.rows
    if any(u.mono[k] for k in (y, z)) or any(w.mono[k] for k in (y,)):
        return None
    if free_v:
        if v.factor.kind != "trivial" or v.mono != tuple(1 if k == y else 0 for k in range(3)):
            return None
        return OnePoint(x, y, z, u.mono[x], 0, w.mono[x])
    if any(v.mono[k] for k in (y, z)):
        return None
    lu, lv = log_derivative(u.factor, form.divisor_up), log_derivative(v.factor, form.divisor_up)
    if lu is None or lv is None:
        return None
    a, b = u.mono[x], v.mono[x]
    if a * lv.get(y, 0) - b * lu.get(y, 0) == 0:
        return None
    return OnePoint(x, y, z, a, b, w.mono[x])


def two_point_shape(form: LocalForm) -> Optional[TwoPoint]:
    if form.upstairs != 2 or form.generic_labels():
        return None
    x, y = sorted(form.divisor_up)
    z = 3 - x - y
    u, v, w = form.rows
    if u.mono[z] or v.mono[z]:
        return None
    if w.mono[z] != 1:
        return None
    return TwoPoint(x, y, z, (u.mono[x], u.mono[y]), (v.mono[x], v.mono[y]), (w.mono[x], w.mono[y]))


def strictly_below(p, q) -> bool:
    return p[0] <= q[0] and p[1] <= q[1] and p != q


def pair_product(p, q) -> int:
    return (p[0] - q[0]) * (p[1] - q[1])


def _det2(p, q) -> int:
    return p[0] * q[1] - p[1] * q[0]


# --- algorithm A ---------------------------------------------------------------

def patterns_a(form: LocalForm) -> tuple:
    """Every intermediate shape of algorithm A matched by ``form``."""
    out = []
    if form.downstairs != 2 or form.divisor_down != frozenset({0, 1}):
        return ()
    s = one_point_shape(form)
    if s is not None and s.a > 0 and s.b > 0:
        if s.d == 0:
            out.append("A.1pt_translate")
        if s.d in (0, 1):
            out.append("A.1pt_wxz")
        if s.d < min(s.a, s.b):
            out.append("A.1pt_descent")
    t = two_point_shape(form)
    if t is not None:
        u, v, w = t.u, t.v, t.w
        if w == (0, 0) and _det2(u, v) != 0:
            out.append("A.2pt_monomial")
            if 0 in u and 0 in v and u.index(0) != v.index(0) and max(u) > 0 and max(v) > 0:
                out.append("A.2pt_isolated")
            elif (u.count(0) == 1 and min(v) > 0) or (v.count(0) == 1 and min(u) > 0):
                out.append("A.2pt_one_curve")
            elif min(u) > 0 and min(v) > 0:
                out.append("A.2pt_two_curves")
        if w in ((1, 0), (0, 1)):
            k = w.index(1)
            if u[k] >= 1 and v[k] >= 1:
                out.append("A.2pt_wxz")
        if w == (1, 1) and min(u + v) >= 1:
            out.append("A.2pt_wxyz")
        if sum(w) > 0:
            out.append("A.2pt_pair")
            if (strictly_below(w, u) and strictly_below(u, v)) or (strictly_below(w, v) and strictly_below(v, u)):
                out.append("A.2pt_descent")
    return tuple(out)


A_INITIAL = {"A.1pt_translate", "A.2pt_monomial", "A.1pt_descent", "A.2pt_descent"}


def a_value(form: LocalForm, curve) -> Optional[int]:
    """``min(ord u, ord v) - ord w`` along ``curve`` when w carries its free coordinate."""
    lead, tail = curve
    if tail in form.divisor_up or form.rows[2].mono[tail] != 1:
        return None
    if form.rows[0].mono[tail] or form.rows[1].mono[tail]:
        return None
    u, v, w = (r.mono[lead] for r in form.rows)
    return min(u, v) - w


def omega_value(form: LocalForm, curve) -> Optional[int]:
    lead, tail = curve
    if tail in form.divisor_up or form.rows[2].mono[tail] != 1 or form.rows[0].mono[tail]:
        return None
    return form.rows[0].mono[lead] - form.rows[2].mono[lead]


# --- algorithm B ---------------------------------------------------------------

def patterns_b(form: LocalForm) -> tuple:
    out = []
    if form.downstairs == 2 and form.divisor_down == frozenset({0, 1}):
        t = two_point_shape(form)
        if t is not None and _det2(t.u, t.v) != 0 and strictly_below(t.w, t.u):
            out.append("B.2pt")
            if t.w == (0, 0):
                out.append("B.2pt_start")
        s = one_point_shape(form)
        if s is not None and s.b > 0 and s.d < s.a:
            out.append("B.1pt_over_2pt")
            if s.d == 0:
                out.append("B.1pt_over_2pt_start")
    elif form.downstairs == 1 and form.divisor_down == frozenset({0}):
        s = one_point_shape(form, free_v=True)
        if s is not None and s.d < s.a:
            out.append("B.1pt_over_1pt")
            if s.d == 0:
                out.append("B.1pt_over_1pt_start")
    return tuple(out)


B_INITIAL = {"B.2pt", "B.1pt_over_2pt", "B.1pt_over_1pt"}


def with_generic_nonzero(form: LocalForm) -> LocalForm:
    from .charts import specialize_form

    return specialize_form(form, {l: Status.NONZERO for l in form.generic_labels()})
