"""
2-curve blow-ups: valuations and exponent pairs
===============================================

Blowing up the 2-curve ``x = y = 0`` acts on exponent pairs like one step of
a subtractive Euclidean algorithm.  Two views of the same arithmetic follow.
"""

from fractions import Fraction

from toroprep.engines import ValuationState, resolve_dependent_valuation, run_pair_ordering
from toroprep.forms import LocalForm
from toroprep.oracle import pair_ordering_events, subtractive_euclid_steps

# A monomial valuation with nu(u) = 5, nu(v) = 3 leaves the 2-curve after
# as many blow-ups as the subtractive algorithm needs on (5, 3).
t = resolve_dependent_valuation(ValuationState((5, 3)))
for s in t.steps:
    print(f"({s.before[0]}, {s.before[1]}) -> ({s.after[0]}, {s.after[1]})   chart {s.chart}")
print("steps:", len(t.steps), "oracle:", subtractive_euclid_steps(5, 3))

# rational values work the same way
t = resolve_dependent_valuation(ValuationState((Fraction(7, 2), Fraction(3, 2))))
print("nu = (7/2, 3/2):", [tuple(str(v) for v in s.after) for s in t.steps])

# %%
# A germ ``u = x^2 y^3, v = x^3 y`` has incomparable exponent pairs; the
# pair product (2-3)(3-1) = -2 is negative.  Blow up 2-curves until every
# child has comparable pairs.
f = LocalForm.make([(2, 3, 0), (3, 1, 0), (0, 0, 1)], None, "xy", "uv")
tr = run_pair_ordering(f)
for s in tr.steps:
    vals = [r.value for r in s.invariants]
    print(f"event {s.event} {s.chart.name:<14} {s.after}   pair product {vals}")
print("blow-ups:", len({s.event for s in tr.steps}), "oracle:", pair_ordering_events((2, 3), (3, 1)))
