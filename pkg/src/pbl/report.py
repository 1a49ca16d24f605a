"""Text and JSON rendering of pipeline results.

Text tables show exact rationals, with 6-significant-digit decimals marked
by a leading ``~`` where they help. JSON output is ``formats.canonical``.
"""
from __future__ import annotations

from .bounds import BoundReport, Verdict, fmt_q
from .formats import (FORMAT_VERSION, bound_report_to_json, canonical,
                      evaluation_to_json, partition_to_json)
from .oracles import ComplexityValue, CrossCheck
from .synth import Evaluation, PipelineResult, describe_pipeline


def approx(q) -> str:
    return f"~{float(q):.6g}"


def _q(q) -> str:
    return str(q)


def _table(rows) -> str:
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows) + "\n"


def _bound_rows(rep: BoundReport):
    rows = [("kind", rep.kind), ("side", rep.side), ("eps", _q(rep.eps)),
            ("formulation", rep.mode), ("status", rep.status)]
    if rep.value is not None:
        lo, hi = rep.bracket
        rows += [("V (exact)", f"{_q(rep.value)}  ({approx(rep.value)})"),
                 ("log2 V bracket", f"[{lo},{hi}]  (log2 V {approx(rep.log2_approx)})"),
                 ("witness support", str(len(rep.support)) if rep.kind == "pprt" else "-"),
                 ("certified value", _q(rep.certificate.value))]
    rows.append(("lp size", f"{rep.lp_size[0]} vars x {rep.lp_size[1]} rows"))
    rows += [("note", n) for n in rep.notes]
    return rows


def render_report(obj, fmt: str = "text", relation=None) -> str:
    """Render any pipeline result; deterministic for a given input."""
    if fmt not in ("text", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    js = fmt == "json"
    if isinstance(obj, BoundReport):
        if js:
            return canonical(bound_report_to_json(obj))
        head = ""
        if obj.value is not None:
            head = f"V={obj.value}, bracketing [{obj.bracket[0]},{obj.bracket[1]}]\n"
        return head + _table(_bound_rows(obj))
    if isinstance(obj, Evaluation):
        if js:
            return canonical(evaluation_to_json(obj, relation))
        rows = [(f"correct {relation.input_label(c)}", f"{_q(p)}  ({approx(p)})")
                for c, p in enumerate(obj.correct)]
        rows += [("worst-case error", f"{_q(obj.error)}  ({approx(obj.error)})"),
                 ("cost", str(obj.cost))]
        return _table(rows)
    if isinstance(obj, PipelineResult):
        summary = describe_pipeline(obj)
        if js:
            doc = {"format_version": FORMAT_VERSION, "pipeline": summary,
                   "bound": bound_report_to_json(obj.report),
                   "checks": {k: bool(v) for k, v in obj.checks.items()}}
            if obj.evaluation is not None:
                doc["evaluation"] = evaluation_to_json(obj.evaluation, obj.report.relation)
            return canonical(doc)
        rows = [(k, str(v)) for k, v in summary.items()]
        rows += [(f"check {k}", "pass" if v else "FAIL") for k, v in obj.checks.items()]
        return _table(rows)
    if isinstance(obj, ComplexityValue):
        if js:
            from .formats import tree_to_json
            return canonical({"format_version": FORMAT_VERSION, "measure": obj.measure,
                              "value": obj.value, "witness": tree_to_json(obj.witness)})
        return _table([("measure", obj.measure), ("value", str(obj.value))])
    if isinstance(obj, Verdict):
        if js:
            doc = {"format_version": FORMAT_VERSION, "accepted": obj.ok,
                   "certified_value": fmt_q(obj.value), "violations": list(obj.violations)}
            if obj.separation_value is not None:
                doc["partition_min"] = fmt_q(obj.separation_value)
                doc["partition_min_witness"] = partition_to_json(obj.separation_witness)
            return canonical(doc)
        rows = [("verdict", "accepted" if obj.ok else "REJECTED"),
                ("certified value", f"{_q(obj.value)}  ({approx(obj.value)})")]
        if obj.separation_value is not None:
            rows.append(("min over P of sum v", _q(obj.separation_value)))
        rows += [("violation", v) for v in obj.violations]
        return _table(rows)
    if isinstance(obj, CrossCheck):
        vals = {k: (fmt_q(v) if v is not None else None) for k, v in obj.values.items()}
        if js:
            return canonical({"format_version": FORMAT_VERSION, "ok": obj.ok, "values": vals,
                              "discrepancies": obj.discrepancies})
        rows = [("crosscheck", "pass" if obj.ok else "FAIL")] + [(k, str(v)) for k, v in vals.items()]
        rows += [("discrepancy", d) for d in obj.discrepancies]
        return _table(rows)
    raise TypeError(f"cannot render {type(obj).__name__}")
