"""Structured factors: monomial times a product of unit atoms.

Every row of a local form is a :class:`Term`, i.e. ``x^e * F`` where ``F`` is
a :class:`Factor`.  A factor is a finite product of atoms raised to integer
powers:

``Shift(c, k)``    the translate ``(c + t_k)``
``Nested(c, T)``   ``(c + T)`` for a term ``T`` vanishing at the origin
``Gamma(s, args)`` an opaque unit series ``s(args)``

Constants are qualitative (:class:`Status`); nothing here ever evaluates a
field element.  Substitution of coordinates is closed on this algebra, which
is what lets the blow-up calculus stay exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Union

COORDS = ("x", "y", "z")
PARAMS = ("u", "v", "w")

Mono = tuple  # tuple[int, int, int]

ZERO_MONO: Mono = (0, 0, 0)


def unit_vector(k: int) -> Mono:
    return tuple(1 if i == k else 0 for i in range(3))


def mono_add(a: Mono, b: Mono) -> Mono:
    return tuple(p + q for p, q in zip(a, b))


def mono_sub(a: Mono, b: Mono) -> Mono:
    return tuple(p - q for p, q in zip(a, b))


def mono_scale(a: Mono, n: int) -> Mono:
    return tuple(n * p for p in a)


def mono_leq(a: Mono, b: Mono) -> bool:
    return all(p <= q for p, q in zip(a, b))


class Status(str, Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    GENERIC = "generic"


@dataclass(frozen=True)
class Constant:
    """A field constant known only by whether it vanishes."""

    label: str
    status: Status = Status.GENERIC

    def with_status(self, status: Status) -> "Constant":
        return Constant(self.label, status)

    def __str__(self) -> str:
        mark = {Status.ZERO: "=0", Status.NONZERO: "!=0", Status.GENERIC: "?"}
        return f"{self.label}{mark[self.status]}"


@dataclass(frozen=True)
class Shift:
    const: Constant
    coord: int


@dataclass(frozen=True)
class Nested:
    const: Constant
    term: "Term"


@dataclass(frozen=True)
class Gamma:
    symbol: str
    args: tuple  # tuple[Term, ...]


Atom = Union[Shift, Nested, Gamma]


@dataclass(frozen=True)
class Mixed:
    """Classification-only marker for ``gamma + monomial`` shapes.

    ``pattern`` is ``"2b"`` or ``"2c"``; ``params`` holds the integer data of
    the shape as sorted ``(name, value)`` pairs.
    """

    pattern: str
    gamma: str = "γ"
    params: tuple = ()

    def param(self, name: str, default=None):
        return dict(self.params).get(name, default)


@lru_cache(maxsize=1 << 16)
def _repr_key(atom) -> str:
    return repr(atom)


def _atom_key(item):
    return _repr_key(item[0])


@dataclass(frozen=True)
class Factor:
    atoms: tuple = ()  # sorted tuple[(Atom, int)], no zero powers
    opaque: bool = False
    mixed: Optional[Mixed] = None

    @staticmethod
    def build(pairs: Iterable, opaque: bool = False) -> "Factor":
        pairs = tuple(pairs)
        if not pairs:
            return Factor((), opaque)
        if len(pairs) == 1 and pairs[0][1]:
            return Factor(pairs, opaque)
        acc: dict = {}
        for atom, n in pairs:
            acc[atom] = acc.get(atom, 0) + n
        atoms = tuple(sorted(((a, n) for a, n in acc.items() if n), key=_atom_key))
        return Factor(atoms, opaque)

    def __mul__(self, other: "Factor") -> "Factor":
        if self.mixed or other.mixed:
            raise ValueError("mixed series factors do not multiply")
        return Factor.build(self.atoms + other.atoms, self.opaque or other.opaque)

    def __pow__(self, n: int) -> "Factor":
        if self.mixed and n != 1:
            raise ValueError("mixed series factors do not exponentiate")
        if n == 1:
            return self
        return Factor.build(((a, n * p) for a, p in self.atoms), self.opaque)

    def inverse(self) -> "Factor":
        return self ** -1

    @property
    def kind(self) -> str:
        if self.mixed is not None:
            return "mixed"
        if not self.atoms:
            return "trivial"
        if not self.opaque and len(self.atoms) == 1:
            atom, n = self.atoms[0]
            if isinstance(atom, Shift) and n == 1:
                return "translate"
        return "unit"

    @property
    def translate(self) -> Optional[Shift]:
        return self.atoms[0][0] if self.kind == "translate" else None

    def constants(self) -> set:
        out: set = set()
        for atom, _ in self.atoms:
            out |= atom_constants(atom)
        return out

    def coords(self) -> set:
        out: set = set()
        for atom, _ in self.atoms:
            out |= atom_coords(atom)
        if self.mixed is not None:
            out |= {0, 1, 2}
        return out


TRIVIAL = Factor()


@dataclass(frozen=True)
class Term:
    mono: Mono = ZERO_MONO
    factor: Factor = TRIVIAL

    def __mul__(self, other: "Term") -> "Term":
        return Term(mono_add(self.mono, other.mono), self.factor * other.factor)

    def __pow__(self, n: int) -> "Term":
        return Term(mono_scale(self.mono, n), self.factor ** n)

    def divide(self, other: "Term") -> Optional["Term"]:
        mono = mono_sub(self.mono, other.mono)
        if min(mono) < 0:
            return None
        return Term(mono, self.factor * other.factor.inverse())


def atom_constants(atom: Atom) -> set:
    if isinstance(atom, Shift):
        return {atom.const}
    if isinstance(atom, Nested):
        return {atom.const} | atom.term.factor.constants()
    out: set = set()
    for arg in atom.args:
        out |= arg.factor.constants()
    return out


@lru_cache(maxsize=1 << 16)
def atom_coords(atom: Atom) -> frozenset:
    if isinstance(atom, Shift):
        return frozenset((atom.coord,))
    terms = (atom.term,) if isinstance(atom, Nested) else atom.args
    out: set = set()
    for t in terms:
        out |= {i for i, e in enumerate(t.mono) if e} | t.factor.coords()
    return frozenset(out)


# --- specialization of constants -------------------------------------------

def specialize_term(term: Term, assignment: Mapping[str, Status]) -> Term:
    """Replace constants by their assigned status; zero translates become coordinates."""
    if term.factor.mixed is not None:
        return term
    mono = term.mono
    pairs = []
    for atom, n in term.factor.atoms:
        piece = _specialize_atom(atom, assignment)
        if isinstance(piece, Term):
            if n < 0:
                raise ValueError("a vanishing translate cannot carry a negative power")
            scaled = piece ** n
            mono = mono_add(mono, scaled.mono)
            pairs.extend(scaled.factor.atoms)
        else:
            pairs.append((piece, n))
    return Term(mono, Factor.build(pairs, term.factor.opaque))


def _const(c: Constant, assignment: Mapping[str, Status]) -> Constant:
    status = assignment.get(c.label)
    return c if status is None else c.with_status(status)


def _specialize_atom(atom: Atom, assignment):
    if isinstance(atom, Shift):
        c = _const(atom.const, assignment)
        if c.status is Status.ZERO:
            return Term(unit_vector(atom.coord))
        return Shift(c, atom.coord)
    if isinstance(atom, Nested):
        c = _const(atom.const, assignment)
        inner = specialize_term(atom.term, assignment)
        if c.status is Status.ZERO:
            return inner
        return Nested(c, inner)
    return Gamma(atom.symbol, tuple(specialize_term(t, assignment) for t in atom.args))


# --- coordinate substitution -----------------------------------------------

def substitute_term(term: Term, images: tuple) -> Term:
    """Compose ``term`` with ``old coord j -> images[j]`` (each image a Term)."""
    if term.factor.mixed is not None:
        raise ValueError("mixed series rows have no substitution rule")
    mono = [0, 0, 0]
    pairs = []
    for j, e in enumerate(term.mono):
        if e:
            img = images[j]
            for k in range(3):
                mono[k] += e * img.mono[k]
            pairs.extend((a, e * n) for a, n in img.factor.atoms)
    pairs.extend((_substitute_atom(a, images), n) for a, n in term.factor.atoms)
    opaque = term.factor.opaque or any(images[j].factor.opaque for j, e in enumerate(term.mono) if e)
    return Term(tuple(mono), Factor.build(pairs, opaque))


def _substitute_atom(atom: Atom, images: tuple) -> Atom:
    if not any(images[k] != _IDENTITY_IMAGES[k] for k in atom_coords(atom)):
        return atom
    if isinstance(atom, Shift):
        img = images[atom.coord]
        if not img.factor.atoms and sum(img.mono) == 1:
            return Shift(atom.const, img.mono.index(1))
        return Nested(atom.const, img)
    if isinstance(atom, Nested):
        return Nested(atom.const, substitute_term(atom.term, images))
    return Gamma(atom.symbol, tuple(substitute_term(t, images) for t in atom.args))


_IDENTITY_IMAGES = tuple(Term(unit_vector(k)) for k in range(3))


# --- first-order data at the origin ----------------------------------------

def log_derivative(factor: Factor, divisor: frozenset) -> Optional[dict]:
    """Integer log-derivative of ``factor`` along non-divisor coordinates.

    Returns ``{coord: n}`` meaning ``d log F = sum n * dt_k / c_k`` at the
    origin, or ``None`` when the coefficient is not determined by the
    qualitative data (opaque series, or two constants on one coordinate).
    """
    out: dict = {}
    seen: dict = {}
    for atom, n in factor.atoms:
        if isinstance(atom, Shift):
            if atom.coord in divisor:
                continue
            if seen.setdefault(atom.coord, atom.const.label) != atom.const.label:
                return None
            out[atom.coord] = out.get(atom.coord, 0) + n
            continue
        terms = (atom.term,) if isinstance(atom, Nested) else atom.args
        for t in terms:
            if _linear_free_coord(t, divisor) is not None:
                return None
    return {k: n for k, n in out.items() if n}


def _linear_free_coord(term: Term, divisor: frozenset) -> Optional[int]:
    """Coordinate ``k`` if ``term`` has a nonzero ``dt_k`` at the origin."""
    if sum(term.mono) != 1:
        return None
    k = term.mono.index(1)
    return None if k in divisor else k


def is_unit_at_origin(factor: Factor) -> bool:
    """Every atom of a specialized factor is a unit unless a constant is still open."""
    return all(c.status is Status.NONZERO for c in factor.constants())
