"""
Golden case tables
==================

Every chart branch of the two preparation algorithms, with the outcome the
engine must reproduce.  Each row is replayed on concrete exponent data.
"""

from collections import Counter

from toroprep.cli import render_case_table
from toroprep.oracle import check_golden

for lemma in "AB":
    print(f"## algorithm {lemma}\n")
    print(render_case_table(lemma))
    results = check_golden(lemma)
    tally = Counter("ok" if r.ok else "MISMATCH" for r in results)
    print(f"replayed {len(results)} instance branches: {dict(tally)}\n")

# %%
# A replay in detail: the unresolved branch of a descent round hands the
# germ back with ord w one higher.
r = next(r for r in check_golden("A") if r.row.expected.kind == "unresolved" and r.row.pattern == "A.1pt_descent")
print("parameters:", dict(r.params))
print("before:", r.step.before)
print("after: ", r.step.after)
print("got:   ", r.got)
