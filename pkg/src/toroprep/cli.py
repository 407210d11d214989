"""Command line driver: scenario files in, JSON traces and markdown tables out.

Exit codes: 0 success, 1 internal engine defect, 2 unparsable scenario,
3 invalid scenario, 4 budget exhausted, 5 oracle mismatch.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .algebra import COORDS, PARAMS, Constant, Factor, Gamma, Mixed, Nested, Shift, Status, Term
from .charts import Disposition
from .engines import (
    EngineError,
    InadmissibleForm,
    RationallyIndependent,
    ValuationState,
    resolve_dependent_valuation,
    run_lemma_a,
    run_lemma_b,
)
from .forms import (
    LocalForm,
    MixedSeriesError,
    classify_prepared,
    classify_toroidal_morphism,
    classify_toroidal_pair,
    is_toroidal,
    validate,
)
from .oracle import corrupt_step, cross_check_matrix, golden_case_table, verify_chain

ALGORITHMS = ("classify", "lemma_a", "lemma_b", "valuation", "verify")
EXIT_OK, EXIT_DEFECT, EXIT_PARSE, EXIT_INVALID, EXIT_EXHAUSTED, EXIT_MISMATCH = 0, 1, 2, 3, 4, 5


class ScenarioError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _invalid(path: str, msg: str) -> ScenarioError:
    return ScenarioError(EXIT_INVALID, f"{path}: {msg}")


# --- factor and form descriptors ---------------------------------------------------

def _const_json(c: Constant) -> dict:
    return {"label": c.label, "class": c.status.value}


def _const_load(d, path: str) -> Constant:
    if not isinstance(d, dict) or "label" not in d:
        raise _invalid(path, "constant needs a label")
    try:
        return Constant(str(d["label"]), Status(d.get("class", "generic")))
    except ValueError:
        raise _invalid(path, f"unknown constant class {d.get('class')!r}") from None


def term_json(t: Term) -> dict:
    return {"mono": list(t.mono), "factor": factor_json(t.factor)}


def _atom_json(atom) -> dict:
    if isinstance(atom, Shift):
        return {"shift": {**_const_json(atom.const), "coord": COORDS[atom.coord]}}
    if isinstance(atom, Nested):
        return {"nested": {**_const_json(atom.const), "term": term_json(atom.term)}}
    return {"gamma": {"symbol": atom.symbol, "args": [term_json(t) for t in atom.args]}}


def factor_json(f: Factor):
    if f.mixed is not None:
        return {"mixed": f.mixed.pattern, "gamma": f.mixed.gamma, "params": dict(f.mixed.params)}
    if f.kind == "trivial" and not f.opaque:
        return "trivial"
    if f.kind == "translate":
        s = f.translate
        return {"translate": COORDS[s.coord], "constant": _const_json(s.const)}
    if f.opaque and len(f.atoms) == 1:
        atom, n = f.atoms[0]
        if n == 1 and isinstance(atom, Gamma) and all(
                not a.factor.atoms and sum(a.mono) == 1 for a in atom.args):
            return {"unit": atom.symbol, "variables": [COORDS[a.mono.index(1)] for a in atom.args]}
    return {"atoms": [[_atom_json(a), n] for a, n in f.atoms], "opaque": f.opaque}


def _coord(c, path: str) -> int:
    if c not in COORDS:
        raise _invalid(path, f"unknown coordinate {c!r}")
    return COORDS.index(c)


def _mono(m, path: str) -> tuple:
    if not isinstance(m, list) or len(m) != 3 or not all(isinstance(e, int) and not isinstance(e, bool) for e in m):
        raise _invalid(path, "exponent row must be three integers")
    return tuple(m)


def term_load(d, path: str) -> Term:
    if not isinstance(d, dict):
        raise _invalid(path, "term must be an object")
    return Term(_mono(d.get("mono"), path + ".mono"), factor_load(d.get("factor", "trivial"), path + ".factor"))


def _atom_load(d, path: str):
    if isinstance(d, dict) and "shift" in d:
        s = d["shift"]
        return Shift(_const_load(s, path + ".shift"), _coord(s.get("coord"), path + ".shift.coord"))
    if isinstance(d, dict) and "nested" in d:
        s = d["nested"]
        return Nested(_const_load(s, path + ".nested"), term_load(s.get("term"), path + ".nested.term"))
    if isinstance(d, dict) and "gamma" in d:
        g = d["gamma"]
        args = tuple(term_load(a, f"{path}.gamma.args[{i}]") for i, a in enumerate(g.get("args", [])))
        return Gamma(str(g.get("symbol", "γ")), args)
    raise _invalid(path, "unknown atom")


def factor_load(d, path: str) -> Factor:
    if d == "trivial":
        return Factor()
    if not isinstance(d, dict):
        raise _invalid(path, f"unknown factor descriptor {d!r}")
    if "translate" in d:
        return Factor.build([(Shift(_const_load(d.get("constant"), path + ".constant"),
                                    _coord(d["translate"], path + ".translate")), 1)])
    if "unit" in d:
        args = tuple(Term(tuple(1 if k == _coord(v, path + ".variables") else 0 for k in range(3)))
                     for v in d.get("variables", []))
        return Factor.build([(Gamma(str(d["unit"]), args), 1)], opaque=True)
    if "mixed" in d:
        if d["mixed"] not in ("2b", "2c"):
            raise _invalid(path, "mixed series pattern must be 2b or 2c")
        params = d.get("params", {})
        if not isinstance(params, dict) or not all(isinstance(v, int) for v in params.values()):
            raise _invalid(path + ".params", "integer parameters expected")
        return Factor(mixed=Mixed(d["mixed"], str(d.get("gamma", "γ")), tuple(sorted(params.items()))))
    if "atoms" in d:
        pairs = []
        for i, item in enumerate(d["atoms"]):
            if not isinstance(item, list) or len(item) != 2 or not isinstance(item[1], int):
                raise _invalid(f"{path}.atoms[{i}]", "expected [atom, power]")
            pairs.append((_atom_load(item[0], f"{path}.atoms[{i}]"), item[1]))
        return Factor.build(pairs, bool(d.get("opaque", False)))
    raise _invalid(path, "unknown factor descriptor")


def form_json(f: LocalForm) -> dict:
    return {
        "upstairs": f.upstairs,
        "downstairs": f.downstairs,
        "rows": [list(r.mono) for r in f.rows],
        "factors": [factor_json(r.factor) for r in f.rows],
        "divisor_up": [COORDS[k] for k in sorted(f.divisor_up)],
        "divisor_down": [PARAMS[k] for k in sorted(f.divisor_down)],
    }


def form_load(d, path: str) -> LocalForm:
    if not isinstance(d, dict):
        raise _invalid(path, "form must be an object")
    rows = d.get("rows")
    if not isinstance(rows, list) or len(rows) != 3:
        raise _invalid(path + ".rows", "three exponent rows expected")
    monos = [_mono(r, f"{path}.rows[{i}]") for i, r in enumerate(rows)]
    factors = d.get("factors", ["trivial"] * 3)
    if not isinstance(factors, list) or len(factors) != 3:
        raise _invalid(path + ".factors", "three factor descriptors expected")
    terms = tuple(Term(m, factor_load(fd, f"{path}.factors[{i}]")) for i, (m, fd) in enumerate(zip(monos, factors)))
    up = d.get("divisor_up", [])
    down = d.get("divisor_down", [])
    if any(c not in COORDS for c in up):
        raise _invalid(path + ".divisor_up", f"unknown coordinate in {up}")
    if any(p not in PARAMS for p in down):
        raise _invalid(path + ".divisor_down", f"unknown parameter in {down}")
    up_set = frozenset(COORDS.index(c) for c in up)
    down_set = frozenset(PARAMS.index(p) for p in down)
    form = LocalForm(terms, up_set, down_set, int(d.get("upstairs", len(up_set))), int(d.get("downstairs", len(down_set))))
    problems = validate(form)
    if problems:
        raise _invalid(path, "; ".join(problems))
    return form


# --- scenarios --------------------------------------------------------------------

@dataclass
class Scenario:
    version: int
    algorithm: str
    fiber: list = field(default_factory=list)
    options: dict = field(default_factory=dict)
    valuation: Optional[dict] = None
    corrupt: Optional[dict] = None

    def as_json(self) -> dict:
        out = {"version": self.version, "algorithm": self.algorithm,
               "fiber": [form_json(f) for f in self.fiber], "options": dict(self.options)}
        if self.valuation is not None:
            out["valuation"] = self.valuation
        if self.corrupt is not None:
            out["corrupt"] = self.corrupt
        return out


def parse_scenario(data) -> Scenario:
    if not isinstance(data, dict):
        raise _invalid("$", "scenario must be an object")
    if data.get("version") != 1:
        raise _invalid("version", f"unsupported version {data.get('version')!r}")
    algo = data.get("algorithm")
    if algo not in ALGORITHMS:
        raise _invalid("algorithm", f"expected one of {', '.join(ALGORITHMS)}")
    fiber = data.get("fiber", [])
    if not isinstance(fiber, list):
        raise _invalid("fiber", "list of forms expected")
    forms = [form_load(f, f"fiber[{i}]") for i, f in enumerate(fiber)]
    options = data.get("options", {})
    if not isinstance(options, dict):
        raise _invalid("options", "object expected")
    for k in ("budget", "samples", "seed"):
        if k in options and (not isinstance(options[k], int) or options[k] < 0):
            raise _invalid(f"options.{k}", "nonnegative integer expected")
    if "run" in options and options["run"] not in ("lemma_a", "lemma_b"):
        raise _invalid("options.run", "lemma_a or lemma_b expected")
    val = data.get("valuation")
    if algo == "valuation":
        if not isinstance(val, dict) or not isinstance(val.get("values"), list) or len(val["values"]) != 2:
            raise _invalid("valuation.values", "two values expected")
    return Scenario(1, algo, forms, options, val, data.get("corrupt"))


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(EXIT_PARSE, f"{path}: no such file") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ScenarioError(EXIT_PARSE, f"{path}: {exc}") from None
    return parse_scenario(data)


# --- trace serialization --------------------------------------------------------------

def disposition_json(d: Optional[Disposition]):
    if d is None:
        return None
    out = {"kind": d.kind, "label": d.label, "case": d.case, "patterns": list(d.patterns)}
    if d.kind == "toroidal":
        out["change_of_variable"] = d.change_of_variable
    if d.target is not None:
        out["target"] = {"denominator": PARAMS[d.target.denominator], "form": form_json(d.target.form)}
    return out


def _chart_json(c) -> dict:
    return {
        "name": c.name,
        "monomial": [list(r) for r in c.monomial],
        "translates": [None if t is None else {"coord": COORDS[t[0]], "constant": _const_json(t[1])}
                       for t in c.translates],
        "exceptional": COORDS[c.exceptional],
    }


def trace_json(trace) -> dict:
    steps = []
    for s in trace.steps:
        steps.append({
            "index": s.index,
            "event": s.event,
            "stage": s.stage,
            "entry": s.entry,
            "center": {"kind": s.center.kind, "coords": [COORDS[c] for c in s.center.coords]},
            "chart": _chart_json(s.chart),
            "branch": {label: status.value for label, status in s.condition},
            "before": form_json(s.before),
            "results": [{"id": s.child, "form": form_json(s.after), "disposition": disposition_json(s.disposition)}],
            "invariants": [{"kind": r.kind, "value": r.value, "role": r.role, "locus": r.locus,
                            "parent": r.parent, "depth": r.depth, "root": r.root} for r in s.invariants],
        })
    return {
        "version": 1,
        "algorithm": trace.algorithm,
        "outcome": trace.outcome,
        "budget": trace.budget,
        "limits": dict(sorted(trace.limits.items())),
        "initial": [{"id": i, "form": form_json(f)} for i, f in trace.initial],
        "steps": steps,
        "leaves": [{"id": i, "form": form_json(f), "disposition": disposition_json(d)} for i, f, d in trace.leaves],
        "diagnostics": list(trace.diagnostics),
    }


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=1) + "\n"


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".toroprep-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- dispatch ---------------------------------------------------------------------

def _classify_json(form: LocalForm) -> dict:
    out = {"form": form_json(form)}
    try:
        c = classify_prepared(form)
        out["prepared"] = {"verdict": c.verdict, "case": c.case, "reason": c.reason,
                           "pair": c.pair.case if c.pair else None}
    except MixedSeriesError as exc:
        out["prepared"] = {"verdict": "error", "reason": str(exc)}
    if form.has_mixed():
        out["toroidal"] = None
        return out
    m = classify_toroidal_morphism(form)
    out["toroidal"] = is_toroidal(form)
    out["morphism_case"] = m.case if m else None
    pair = classify_toroidal_pair(form)
    out["pair_case"] = pair.case if pair else None
    return out


def _valuation_value(v):
    if isinstance(v, int):
        return Fraction(v)
    s = str(v)
    try:
        return Fraction(s)
    except ValueError:
        import sympy

        return sympy.sympify(s)


def run_scenario(sc: Scenario, command: Optional[str] = None, samples=None, seed=None, budget=None):
    """Execute ``sc``; returns (exit code, JSON document)."""
    algo = sc.algorithm
    if command is not None and command != "verify" and command != algo:
        raise _invalid("algorithm", f"scenario is {algo!r}, command is {command!r}")
    opts = dict(sc.options)
    budget = opts.get("budget") if budget is None else budget
    samples = opts.get("samples", 100) if samples is None else samples
    seed = opts.get("seed", 0) if seed is None else seed
    verify = command == "verify" or algo == "verify"
    if algo == "verify":
        algo = opts.get("run", "lemma_a")

    if algo == "classify":
        return EXIT_OK, {"version": 1, "algorithm": "classify", "results": [_classify_json(f) for f in sc.fiber]}

    if algo == "valuation":
        vals = tuple(_valuation_value(v) for v in sc.valuation["values"])
        state = ValuationState(vals, bool(sc.valuation.get("independent", False)))
        try:
            t = resolve_dependent_valuation(state)
        except RationallyIndependent as exc:
            return EXIT_OK, {"version": 1, "algorithm": "valuation", "outcome": "independent",
                             "message": str(exc), "steps": []}
        except ValueError as exc:
            raise _invalid("valuation.values", str(exc)) from None
        return EXIT_OK, {
            "version": 1, "algorithm": "valuation", "outcome": t.outcome,
            "final": [str(v) for v in t.final],
            "steps": [{"index": s.index, "chart": s.chart, "before": [str(v) for v in s.before],
                       "after": [str(v) for v in s.after]} for s in t.steps],
        }

    run = run_lemma_a if algo == "lemma_a" else run_lemma_b
    try:
        trace = run(sc.fiber, budget=budget)
    except InadmissibleForm as exc:
        raise _invalid("fiber", str(exc)) from None
    doc = trace_json(trace)
    code = EXIT_EXHAUSTED if trace.outcome == "exhausted" else EXIT_OK
    if verify:
        steps = list(trace.steps)
        if sc.corrupt:
            i = int(sc.corrupt.get("step", 0))
            if not 0 <= i < len(steps):
                raise _invalid("corrupt.step", f"trace has {len(steps)} steps")
            coord = sc.corrupt.get("coord")
            coord = None if coord is None else _coord(coord, "corrupt.coord")
            steps[i] = corrupt_step(steps[i], int(sc.corrupt.get("row", 0)), coord, int(sc.corrupt.get("delta", 1)))
        rep = verify_chain(steps, samples=samples, seed=seed)
        matrix = [cross_check_matrix(s) for s in steps]
        doc["verification"] = rep.as_json()
        doc["matrix"] = {"checked": len(matrix), "failures": [
            {"step": m.step, "detail": m.detail} for m in matrix if not m.ok]}
        if not rep.ok or any(not m.ok for m in matrix):
            code = EXIT_MISMATCH
    return code, doc


def render_case_table(lemma: str) -> str:
    """Markdown table of the golden outcomes, ordered by (pattern, chart, branch)."""
    rows = golden_case_table(lemma)
    out = ["| pattern | chart | branch | outcome |", "|---|---|---|---|"]
    for r in rows:
        out.append(f"| {r.pattern} | {r.chart} | {r.branch} | {r.expected.render()} |")
    return "\n".join(out) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toroprep", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("classify", "lemma-a", "lemma-b", "valuation", "verify"):
        s = sub.add_parser(name)
        s.add_argument("--scenario", required=True)
        s.add_argument("--out")
        s.add_argument("--samples", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--budget", type=int)
    s = sub.add_parser("case-table")
    s.add_argument("lemma", choices=["A", "B", "a", "b"])
    s.add_argument("--out")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "case-table":
        _emit(render_case_table(args.lemma), args.out)
        return EXIT_OK
    try:
        sc = load_scenario(args.scenario)
        code, doc = run_scenario(sc, args.command.replace("-", "_"), args.samples, args.seed, args.budget)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except EngineError as exc:
        print(f"engine defect: {exc}", file=sys.stderr)
        return EXIT_DEFECT
    _emit(dumps(doc), args.out)
    if code == EXIT_MISMATCH:
        bad = doc["verification"]["mismatches"][:1] or doc["matrix"]["failures"][:1]
        print(f"oracle mismatch: {json.dumps(bad, ensure_ascii=False)}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
