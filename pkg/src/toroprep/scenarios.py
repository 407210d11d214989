"""Seeded random inputs for the preparation engines.

Every generator takes a ``random.Random`` so batches are reproducible.
"""
from __future__ import annotations

import random

from .algebra import Constant, Status
from .forms import LocalForm, translate, trivial

ALPHA = Constant("α", Status.NONZERO)


def _below(p, q) -> bool:
    return p[0] <= q[0] and p[1] <= q[1] and p != q


def lemma_a_descent_form(rng: random.Random, top: int = 20) -> LocalForm:
    """A germ entering the final curve-descent stage of the 2-point algorithm.

    Half the time a 1-point ``u=x^a, v=x^b(α+y), w=x^d z`` with ``d < min(a, b)``,
    otherwise a 2-point whose exponent pairs satisfy ``w < u < v`` or ``w < v < u``.
    """
    r = lambda: rng.randint(1, top)
    if rng.random() < 0.5:
        while True:
            a, b, d = r(), r(), r()
            if d < min(a, b):
                return LocalForm.make([(a, 0, 0), (b, 0, 0), (d, 0, 1)], [trivial(), translate("y", ALPHA), trivial()],
                                      "x", "uv")
    while True:
        a, b, c, d, e, f = (r() for _ in range(6))
        u, v, w = (a, b), (c, d), (e, f)
        if a * d - b * c and _below(w, u) and _below(w, v) and (_below(u, v) or _below(v, u)):
            return LocalForm.make([(a, b, 0), (c, d, 0), (e, f, 1)], None, "xy", "uv")


def lemma_a_start_form(rng: random.Random, top: int = 6) -> LocalForm:
    """A germ of the fiber right after the 2-point of the target is blown up.

    The full pipeline inflates exponents during pair ordering, so keep ``top`` small.
    """
    r = lambda: rng.randint(1, top)
    k = rng.randrange(4)
    if k == 0:
        return LocalForm.make([(r(), 0, 0), (r(), 0, 0), (0, 0, 1)], [trivial(), translate("y", ALPHA), trivial()],
                              "x", "uv")
    while True:
        a, b, c, d = r(), r(), r(), r()
        if k == 1:
            b, c = 0, 0
        elif k == 2:
            b = 0
        if a * d - b * c:
            return LocalForm.make([(a, b, 0), (c, d, 0), (0, 0, 1)], None, "xy", "uv")


def lemma_b_descent_form(rng: random.Random, top: int = 20) -> LocalForm:
    """A germ over a curve through a 1-point with ``ord u > ord w`` along the curve."""
    r = lambda: rng.randint(1, top)
    k = rng.randrange(3)
    while True:
        if k == 0:
            a, b, c, d = r(), r(), r(), r()
            e, f = rng.randint(0, a), rng.randint(0, b)
            if a * d - b * c and _below((e, f), (a, b)):
                return LocalForm.make([(a, b, 0), (c, d, 0), (e, f, 1)], None, "xy", "uv")
        elif k == 1:
            a, b = r(), r()
            d = rng.randint(0, a - 1)
            return LocalForm.make([(a, 0, 0), (b, 0, 0), (d, 0, 1)], [trivial(), translate("y", ALPHA), trivial()],
                                  "x", "uv")
        else:
            a = r()
            d = rng.randint(0, a - 1)
            return LocalForm.make([(a, 0, 0), (0, 1, 0), (d, 0, 1)], None, "x", "u")


def unordered_pair_form(rng: random.Random, top: int = 20) -> LocalForm:
    """A 2-point with ``u = x^a y^b``, ``v = x^c y^d`` and ``(a-c)(b-d) < 0``."""
    r = lambda: rng.randint(1, top)
    while True:
        a, b, c, d = r(), r(), r(), r()
        if (a - c) * (b - d) < 0:
            return LocalForm.make([(a, b, 0), (c, d, 0), (0, 0, 1)], None, "xy", "uv")


def coprime_pair(rng: random.Random, top: int = 1000) -> tuple:
    from math import gcd

    while True:
        p, q = rng.randint(1, top), rng.randint(1, top)
        if gcd(p, q) == 1:
            return p, q
