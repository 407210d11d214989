"""Local monomial forms of a morphism of 3-folds and their classification."""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from itertools import permutations
from math import gcd
from typing import Iterable, Optional, Sequence

from .algebra import (
    COORDS,
    PARAMS,
    TRIVIAL,
    ZERO_MONO,
    Constant,
    Factor,
    Gamma,
    Mixed,
    Shift,
    Status,
    Term,
    log_derivative,
    mono_add,
    unit_vector,
)


class PointType(IntEnum):
    ONE = 1
    TWO = 2
    THREE = 3


class MixedSeriesError(ValueError):
    """Raised when a classification is asked of a row it is undefined on."""


def coord_index(c) -> int:
    return COORDS.index(c) if isinstance(c, str) else int(c)


def param_index(p) -> int:
    return PARAMS.index(p) if isinstance(p, str) else int(p)


# --- row factor constructors -------------------------------------------------

def trivial() -> Factor:
    return TRIVIAL


def translate(coord, const: Constant) -> Factor:
    return Factor.build([(Shift(const, coord_index(coord)), 1)])


def unit_series(symbol: str = "γ", variables: Iterable = ()) -> Factor:
    args = tuple(Term(unit_vector(coord_index(v))) for v in variables)
    return Factor.build([(Gamma(symbol, args), 1)], opaque=True)


def mixed_series(pattern: str, gamma: str = "γ", **params) -> Factor:
    return Factor(mixed=Mixed(pattern, gamma, tuple(sorted(params.items()))))


@dataclass(frozen=True)
class LocalForm:
    """Expression of the target parameters (u, v, w) at a point upstairs.

    Row ``i`` is ``x^a y^b z^c * factor``.  ``divisor_up`` holds the coordinate
    indices whose vanishing is the toroidal divisor at the point, and
    ``divisor_down`` the parameter indices cutting out the divisor below.
    """

    rows: tuple  # tuple[Term, Term, Term]
    divisor_up: frozenset
    divisor_down: frozenset
    upstairs: int
    downstairs: int

    @staticmethod
    def make(rows: Sequence[Sequence[int]], factors=None, divisor_up="", divisor_down="",
             upstairs: Optional[int] = None, downstairs: Optional[int] = None) -> "LocalForm":
        factors = factors or [TRIVIAL] * 3
        terms = tuple(Term(tuple(int(e) for e in r), f) for r, f in zip(rows, factors))
        up = frozenset(coord_index(c) for c in divisor_up)
        down = frozenset(param_index(p) for p in divisor_down)
        return LocalForm(
            terms, up, down,
            len(up) if upstairs is None else upstairs,
            len(down) if downstairs is None else downstairs,
        )

    @property
    def matrix(self) -> tuple:
        return tuple(r.mono for r in self.rows)

    @property
    def factors(self) -> tuple:
        return tuple(r.factor for r in self.rows)

    def constants(self) -> set:
        out: set = set()
        for r in self.rows:
            out |= r.factor.constants()
        return out

    def generic_labels(self) -> list:
        return sorted({c.label for c in self.constants() if c.status is Status.GENERIC})

    def replace_row(self, i: int, term: Term) -> "LocalForm":
        rows = list(self.rows)
        rows[i] = term
        return LocalForm(tuple(rows), self.divisor_up, self.divisor_down, self.upstairs, self.downstairs)

    def has_mixed(self) -> bool:
        return any(r.factor.mixed is not None for r in self.rows)

    def __str__(self) -> str:
        return "; ".join(f"{PARAMS[i]}={render_term(t)}" for i, t in enumerate(self.rows))


def render_term(term: Term) -> str:
    parts = []
    for k, e in enumerate(term.mono):
        if e:
            parts.append(COORDS[k] + (f"^{e}" if e != 1 else ""))
    f = term.factor
    if f.kind == "translate":
        s = f.translate
        parts.append(f"({s.const.label}+{COORDS[s.coord]})")
    elif f.kind == "unit":
        parts.append("ε")
    elif f.kind == "mixed":
        parts.append(f"[{f.mixed.pattern}]")
    return "*".join(parts) or "1"


def effective_mono(term: Term) -> tuple:
    """Monomial part with zero-constant translates folded in."""
    mono = term.mono
    for atom, n in term.factor.atoms:
        if isinstance(atom, Shift) and atom.const.status is Status.ZERO and n > 0:
            mono = mono_add(mono, tuple(n * e for e in unit_vector(atom.coord)))
    return mono


def divisor_support(form: LocalForm) -> frozenset:
    return frozenset(
        j for i in form.divisor_down for j, e in enumerate(effective_mono(form.rows[i])) if e > 0
    )


def validate(form: LocalForm) -> list:
    """List every violated form invariant; empty means the form is well posed."""
    out = []
    if len(form.divisor_up) != form.upstairs:
        out.append(f"arity mismatch upstairs: {form.upstairs}-point with {len(form.divisor_up)} divisor coordinates")
    if len(form.divisor_down) != form.downstairs:
        out.append(f"arity mismatch downstairs: {form.downstairs}-point with {len(form.divisor_down)} divisor parameters")
    if not 1 <= form.upstairs <= 3 or not 1 <= form.downstairs <= 3:
        out.append("point type outside 1..3")
    for i, term in enumerate(form.rows):
        if len(term.mono) != 3 or any(not isinstance(e, int) or e < 0 for e in term.mono):
            out.append(f"negative exponent in row {PARAMS[i]}")
            continue
        if i in form.divisor_down:
            for j, e in enumerate(effective_mono(term)):
                if e > 0 and j not in form.divisor_up:
                    out.append(f"{COORDS[j]} outside divisor (row {PARAMS[i]})")
    return out


# --- toroidality certificate -------------------------------------------------

def log_jacobian(form: LocalForm) -> Optional[list]:
    """Matrix of the pullback on logarithmic differentials at the point.

    Columns are ``dlog`` of divisor coordinates followed by ``d`` of the free
    coordinates (scaled by the translate constants, which does not change
    singularity).  ``None`` when some entry is not determined qualitatively.
    """
    if form.has_mixed() or form.generic_labels():
        return None
    dv = sorted(form.divisor_up)
    free = [k for k in range(3) if k not in form.divisor_up]
    cols = len(dv) + len(free)
    if cols != 3:
        return None
    out = []
    for i, term in enumerate(form.rows):
        ld = log_derivative(term.factor, form.divisor_up)
        if i in form.divisor_down:
            if ld is None or any(term.mono[k] for k in free):
                return None
            out.append([term.mono[j] for j in dv] + [ld.get(k, 0) for k in free])
        elif term.mono == ZERO_MONO:
            if ld is None:
                return None
            out.append([0] * len(dv) + [ld.get(k, 0) for k in free])
        elif sum(term.mono) == 1 and term.mono.index(1) in free:
            k = term.mono.index(1)
            out.append([0] * len(dv) + [1 if c == k else 0 for c in free])
        else:
            out.append([0, 0, 0])
    return out


def det3(m) -> int:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def toroidal_determinant(form: LocalForm) -> Optional[int]:
    m = log_jacobian(form)
    return None if m is None else det3(m)


def is_toroidal(form: LocalForm) -> bool:
    """True when the form is log étale at the point, i.e. toroidal after a formal change of variables."""
    if validate(form) or divisor_support(form) != form.divisor_up:
        return False
    d = toroidal_determinant(form)
    return d is not None and d != 0


# --- toroidal pairs ----------------------------------------------------------

@dataclass(frozen=True)
class PairCase:
    case: int
    name: str
    data: tuple = ()


PAIR_NAMES = {1: "1-point translate", 2: "2-point monomial", 3: "2-point power translate",
              4: "3-point rank two", 5: "1-point over 1-point", 6: "2-point over 1-point"}


def _translate_off(term: Term, divisor: frozenset) -> Optional[Shift]:
    s = term.factor.translate
    if s is not None and s.const.status is Status.NONZERO and s.coord not in divisor:
        return s
    return None


def _is_free_coord(term: Term, divisor: frozenset) -> bool:
    return (term.factor.kind == "trivial" and sum(term.mono) == 1
            and term.mono.index(1) not in divisor)


def _primitive(vec) -> tuple:
    g = gcd(*vec)
    return g, tuple(v // g for v in vec)


def classify_toroidal_pair(form: LocalForm, pair=(0, 1)) -> Optional[PairCase]:
    i, j = (param_index(p) for p in pair)
    ti, tj = form.rows[i], form.rows[j]
    if ti.factor.mixed is not None or tj.factor.mixed is not None:
        raise MixedSeriesError(f"pair ({PARAMS[i]},{PARAMS[j]}) carries a mixed series")
    D = form.divisor_up
    dv = sorted(D)
    p, q = form.upstairs, form.downstairs
    unitish = ("trivial", "unit")
    if q >= 2:
        if i not in form.divisor_down or j not in form.divisor_down:
            return None
        if p == 1:
            (x,) = dv
            a, b = ti.mono[x], tj.mono[x]
            if (ti.mono == tuple(a * e for e in unit_vector(x)) and ti.factor.kind == "trivial" and a > 0
                    and tj.mono == tuple(b * e for e in unit_vector(x)) and b > 0
                    and _translate_off(tj, D) is not None):
                return PairCase(1, PAIR_NAMES[1], (("a", a), ("b", b)))
            return None
        if p == 2:
            x, y = dv
            if any(ti.mono[k] or tj.mono[k] for k in range(3) if k not in D):
                return None
            a, b, c, d = ti.mono[x], ti.mono[y], tj.mono[x], tj.mono[y]
            if ti.factor.kind in unitish and tj.factor.kind in unitish and a * d - b * c != 0:
                return PairCase(2, PAIR_NAMES[2], (("a", a), ("b", b), ("c", c), ("d", d)))
            if a > 0 and b > 0 and c > 0 and d > 0 and ti.factor.kind == "trivial" \
                    and _translate_off(tj, D) is not None:
                k, prim = _primitive((a, b))
                t, prim2 = _primitive((c, d))
                if prim == prim2:
                    return PairCase(3, PAIR_NAMES[3], (("a", prim[0]), ("b", prim[1]), ("k", k), ("t", t)))
            return None
        if ti.factor.kind in unitish and tj.factor.kind in unitish and _rank2(ti.mono, tj.mono):
            return PairCase(4, PAIR_NAMES[4], (("rows", (ti.mono, tj.mono)),))
        return None
    if i not in form.divisor_down or j in form.divisor_down:
        return None
    if p == 1:
        (x,) = dv
        a = ti.mono[x]
        if ti.mono == tuple(a * e for e in unit_vector(x)) and a > 0 and ti.factor.kind == "trivial" \
                and _is_free_coord(tj, D):
            return PairCase(5, PAIR_NAMES[5], (("a", a),))
        return None
    if p == 2:
        x, y = dv
        a, b = ti.mono[x], ti.mono[y]
        if a > 0 and b > 0 and ti.factor.kind == "trivial" and _is_free_coord(tj, D) \
                and all(ti.mono[k] == 0 for k in range(3) if k not in D):
            k, prim = _primitive((a, b))
            return PairCase(6, PAIR_NAMES[6], (("a", prim[0]), ("b", prim[1]), ("k", k)))
    return None


def _rank2(r1, r2) -> bool:
    return any(r1[s] * r2[t] - r1[t] * r2[s] for s in range(3) for t in range(s + 1, 3))


# --- the six toroidal morphism shapes ----------------------------------------

@dataclass(frozen=True)
class MorphismCase:
    case: int
    coords: tuple   # coords[i] is the original index playing the role of x, y, z
    params: tuple   # params[i] is the original index playing the role of u, v, w


def _view(form: LocalForm, cperm, pperm):
    rows = []
    for pi in pperm:
        t = form.rows[pi]
        mono = tuple(t.mono[c] for c in cperm)
        s = t.factor.translate
        tc = cperm.index(s.coord) if s is not None else None
        ts = s.const.status if s is not None else None
        rows.append((mono, t.factor.kind, tc, ts))
    return rows


def _is_mono(row, support) -> bool:
    return row[1] == "trivial" and all(e == 0 for k, e in enumerate(row[0]) if k not in support)


def _is_tr(row, coord, support) -> bool:
    return (row[1] == "translate" and row[2] == coord and row[3] is Status.NONZERO
            and all(e == 0 for k, e in enumerate(row[0]) if k not in support))


def _is_coord(row, coord) -> bool:
    if row[1] == "trivial":
        return row[0] == unit_vector(coord)
    return row[1] == "translate" and row[0] == ZERO_MONO and row[2] == coord and row[3] is Status.NONZERO


def _match_case(p: int, q: int, r) -> bool:
    u, v, w = r
    if (p, q) == (3, 3):
        return all(_is_mono(x, {0, 1, 2}) for x in r) and det3([x[0] for x in r]) != 0
    if (p, q) == (2, 3):
        return (_is_mono(u, {0, 1}) and _is_mono(v, {0, 1}) and _is_tr(w, 2, {0, 1})
                and u[0][0] * v[0][1] - u[0][1] * v[0][0] != 0)
    if (p, q) == (1, 3):
        return (_is_mono(u, {0}) and _is_tr(v, 1, {0}) and _is_tr(w, 2, {0})
                and min(u[0][0], v[0][0], w[0][0]) > 0)
    if (p, q) == (2, 2):
        return (_is_mono(u, {0, 1}) and _is_mono(v, {0, 1}) and _is_coord(w, 2)
                and u[0][0] * v[0][1] - u[0][1] * v[0][0] != 0)
    if (p, q) == (1, 2):
        return (_is_mono(u, {0}) and _is_tr(v, 1, {0}) and _is_coord(w, 2)
                and min(u[0][0], v[0][0]) > 0)
    if (p, q) == (1, 1):
        return _is_mono(u, {0}) and u[0][0] > 0 and _is_coord(v, 1) and _is_coord(w, 2)
    return False


MORPHISM_CASE = {(3, 3): 1, (2, 3): 2, (1, 3): 3, (2, 2): 4, (1, 2): 5, (1, 1): 6}


def _orders(first: Iterable, size: int = 3):
    first = sorted(first)
    rest = [k for k in range(size) if k not in first]
    for a in permutations(first):
        for b in permutations(rest):
            yield a + b


def classify_toroidal_morphism(form: LocalForm) -> Optional[MorphismCase]:
    """Match the triple against the six displayed toroidal shapes."""
    key = (form.upstairs, form.downstairs)
    if key not in MORPHISM_CASE or form.has_mixed() or validate(form):
        return None
    for pperm in _orders(form.divisor_down):
        for cperm in _orders(form.divisor_up):
            if _match_case(*key, _view(form, cperm, pperm)):
                return MorphismCase(MORPHISM_CASE[key], cperm, pperm)
    return None


# --- prepared forms ----------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    verdict: str                  # "prepared" | "not_prepared"
    case: Optional[str] = None    # "1", "2a", "2b", "2c", "3"
    permutation: tuple = ()       # parameter order witnessing the case
    pair: Optional[PairCase] = None
    reason: str = ""
    morphism: Optional[MorphismCase] = None

    @property
    def prepared(self) -> bool:
        return self.verdict == "prepared"


def _match_2b(form: LocalForm) -> bool:
    if form.upstairs != 1:
        return False
    (x,) = sorted(form.divisor_up)
    u, v, w = form.rows
    mx = v.factor.mixed
    a = u.mono[x]
    return (u.factor.kind == "trivial" and a > 0 and u.mono == tuple(a * e for e in unit_vector(x))
            and mx is not None and mx.pattern == "2b"
            and v.mono == tuple(v.mono[x] * e for e in unit_vector(x))
            and _is_free_coord(w, form.divisor_up))


def _match_2c(form: LocalForm) -> bool:
    if form.upstairs != 2:
        return False
    x, y = sorted(form.divisor_up)
    u, v, w = form.rows
    mx = v.factor.mixed
    if mx is None or mx.pattern != "2c" or u.factor.kind != "trivial" or not _is_free_coord(w, form.divisor_up):
        return False
    if any(u.mono[k] or v.mono[k] for k in range(3) if k not in form.divisor_up):
        return False
    k, (a, b) = _primitive((u.mono[x], u.mono[y]))
    if a <= 0 or b <= 0:
        return False
    l = v.mono[x] // a if a else 0
    if (v.mono[x], v.mono[y]) != (l * a, l * b):
        return False
    c, d = mx.param("c", 0), mx.param("d", 0)
    return a * d - b * c != 0


def _unit_times_monomial(term: Term) -> bool:
    kind = term.factor.kind
    if kind in ("trivial", "unit"):
        return True
    return kind == "translate" and term.factor.translate.const.status is Status.NONZERO


def classify_prepared(form: LocalForm) -> Classification:
    if validate(form):
        return Classification("not_prepared", reason="invalid form: " + "; ".join(validate(form)))
    q = form.downstairs
    morph = classify_toroidal_morphism(form)
    if q == 3:
        for i, t in enumerate(form.rows):
            if not _unit_times_monomial(t):
                return Classification("not_prepared", reason=f"{PARAMS[i]} is not a unit times a monomial",
                                      morphism=morph)
        for pp in permutations(range(3)):
            pc = classify_toroidal_pair(form, pp[:2])
            if pc is not None:
                return Classification("prepared", "1", pp, pc, morphism=morph)
        return Classification("not_prepared", reason="no permutation gives a toroidal pair", morphism=morph)
    if q == 2:
        try:
            pc = classify_toroidal_pair(form, (0, 1))
        except MixedSeriesError:
            pc = None
        if pc is not None:
            return Classification("prepared", "2a", (0, 1, 2), pc, morphism=morph)
        if _match_2b(form):
            return Classification("prepared", "2b", (0, 1, 2), morphism=morph)
        if _match_2c(form):
            return Classification("prepared", "2c", (0, 1, 2), morphism=morph)
        return Classification("not_prepared", reason="w not covered by 2a/2b/2c: (u,v) is not a toroidal pair",
                              morphism=morph)
    try:
        pc = classify_toroidal_pair(form, (0, 1))
    except MixedSeriesError:
        pc = None
    if pc is not None:
        return Classification("prepared", "3", (0, 1, 2), pc, morphism=morph)
    return Classification("not_prepared", reason="supplied parameters (u,v) are not a toroidal pair", morphism=morph)


# --- cuspidal divisors -------------------------------------------------------

@dataclass(frozen=True)
class Locus:
    name: str
    has_3_point: bool
    toroidal_neighborhood: bool
    components: tuple = ()   # for 2-curves: the two components it lies on


@dataclass(frozen=True)
class CuspidalReport:
    cuspidal: bool
    strongly_cuspidal: bool
    violations: tuple        # loci without a 3-point and without a toroidal neighborhood
    missing_3_points: tuple


def check_cuspidal(components: Sequence[Locus], two_curves: Sequence[Locus]) -> CuspidalReport:
    names = {c.name for c in components}
    for c in two_curves:
        if len(c.components) != 2 or not set(c.components) <= names or c.components[0] == c.components[1]:
            raise ValueError(f"2-curve {c.name} references unknown or repeated components {c.components}")
    loci = list(components) + list(two_curves)
    bad = tuple(l.name for l in loci if not l.has_3_point and not l.toroidal_neighborhood)
    missing = tuple(l.name for l in loci if not l.has_3_point)
    return CuspidalReport(not bad, not missing, bad, missing)
