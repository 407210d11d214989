"""
Walking one germ down to toroidal forms
=======================================

A 1-point germ ``u = x^3, v = x^3 (α + y), w = z`` over a 2-point of the
target.  The ideal ``(u, v, w)`` is not principal along the curve
``x = z = 0``; each curve blow-up lowers ``min(ord u, ord v) - ord w`` by one
on the branch that stays unresolved.
"""

from toroprep.algebra import Constant, Status
from toroprep.engines import chain_rounds, descent_violations, run_lemma_a, run_lemma_b
from toroprep.forms import LocalForm, translate, trivial
from toroprep.oracle import verify_chain

alpha = Constant("α", Status.NONZERO)
germ = LocalForm.make([(3, 0, 0), (3, 0, 0), (0, 0, 1)], [trivial(), translate("y", alpha), trivial()], "x", "uv")
print("start:", germ)

trace = run_lemma_a([germ])

# Each event is one blow-up; each chart branch is one step.
for step in trace.steps:
    inv = " ".join(f"{r.role}={r.value}" for r in step.invariants)
    cond = ", ".join(f"{l}{'=0' if st is Status.ZERO else '!=0'}" for l, st in step.condition) or "-"
    print(f"event {step.event} [{step.stage}] {step.chart.name:<10} {cond}")
    print(f"    -> {step.after}   {step.disposition.label or 'unresolved'}   {inv}")

print("outcome:", trace.outcome)
print("chains (initial value, rounds):", chain_rounds(trace))
print("descent violations:", descent_violations(trace))

# %%
# Every substitution is an identity of rational functions; check it on
# random exact rationals.
rep = verify_chain(trace, samples=50, seed=1)
print(f"oracle: {rep.steps} steps, {rep.evaluations} evaluations, ok={rep.ok}")

# %%
# The curve algorithm runs the same way: ``u = x^4, v = y, w = x z`` over a
# 1-point has ord u - ord w = 3 along ``x = z = 0``.
curve = LocalForm.make([(4, 0, 0), (0, 1, 0), (1, 0, 1)], None, "x", "u")
tb = run_lemma_b([curve])
for e in sorted({s.event for s in tb.steps}):
    first = next(s for s in tb.steps if s.event == e)
    print(f"round {e}: ord u - ord w = {first.invariants[0].value}")
print("leaves:")
for i, leaf, d in tb.leaves:
    print(f"  #{i} {leaf}  ({d.label}, case {d.case})")
