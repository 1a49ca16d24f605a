"""JSON documents: protocols, certificates and reports.

Every document carries ``"format_version": 1``; exact quantities are always
strings ``"p/q"``, never floats. ``canonical`` gives the byte-stable text
form (sorted keys).
"""
from __future__ import annotations

import json
from fractions import Fraction

from .bounds import (BoundReport, DualCertificate, fmt_q, labeled_key,
                     parse_labeled_key)
from .relation import (Assignment, LabeledPartition, MalformedInput, Rectangle,
                       Relation, mask_of)
from .synth import Evaluation, RandomizedProtocol, SupportEntry
from .trees import Leaf, Query, Speak

FORMAT_VERSION = 1


def canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def parse_q(text) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise MalformedInput(f"expected a rational string, got {text!r}")
    s = str(text)
    if any(ch in s for ch in ".eE"):
        raise MalformedInput(f"rationals must be exact p/q strings, got {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise MalformedInput(f"bad rational {s!r}") from None


def _check_version(doc):
    if not isinstance(doc, dict):
        raise MalformedInput("document must be a JSON object")
    v = doc.get("format_version", FORMAT_VERSION)
    if v != FORMAT_VERSION:
        raise MalformedInput(f"unsupported format_version {v}")


# ---------------------------------------------------------------- trees

def tree_to_json(tree) -> dict:
    if isinstance(tree, Leaf):
        return {"out": tree.out}
    if isinstance(tree, Speak):
        return {"speaker": tree.speaker, "send": list(tree.send),
                "on0": tree_to_json(tree.on0), "on1": tree_to_json(tree.on1)}
    return {"query": tree.var, "on0": tree_to_json(tree.on0), "on1": tree_to_json(tree.on1)}


def tree_from_json(doc, side: str, shape):
    if not isinstance(doc, dict):
        raise MalformedInput("tree node must be an object")
    if "out" in doc:
        if not isinstance(doc["out"], int):
            raise MalformedInput("leaf output must be an integer")
        return Leaf(doc["out"])
    try:
        on0, on1 = doc["on0"], doc["on1"]
    except KeyError:
        raise MalformedInput("internal node needs on0 and on1") from None
    if side == "cc":
        sp, send = doc.get("speaker"), doc.get("send")
        size = shape[0] if sp == "A" else shape[1]
        if sp not in ("A", "B") or not isinstance(send, list) or len(send) != size \
                or any(b not in (0, 1) for b in send):
            raise MalformedInput("bad communication node")
        return Speak(sp, tuple(send), tree_from_json(on0, side, shape),
                     tree_from_json(on1, side, shape))
    var = doc.get("query")
    if not isinstance(var, int) or not 0 <= var < shape[0]:
        raise MalformedInput("bad query node")
    return Query(var, tree_from_json(on0, side, shape), tree_from_json(on1, side, shape))


# ---------------------------------------------------------------- partitions

def partition_to_json(p: LabeledPartition) -> dict:
    if p.side == "cc":
        blocks = [{"z": lb.z, "rows": list(lb.block.rows), "cols": list(lb.block.cols)}
                  for lb in p.blocks]
    else:
        blocks = [{"z": lb.z, "pattern": lb.block.pattern(p.shape[0])} for lb in p.blocks]
    return {"blocks": blocks}


def partition_from_json(doc, side: str, shape) -> LabeledPartition:
    try:
        pairs = []
        for b in doc["blocks"]:
            if side == "cc":
                rows, cols = b["rows"], b["cols"]
                if any(not 0 <= r < shape[0] for r in rows) or any(not 0 <= c < shape[1] for c in cols):
                    raise MalformedInput("block index out of range")
                pairs.append((int(b["z"]), Rectangle(mask_of(rows), mask_of(cols))))
            else:
                if len(b["pattern"]) != shape[0]:
                    raise MalformedInput("pattern length differs from n")
                pairs.append((int(b["z"]), Assignment.from_pattern(b["pattern"])))
        return LabeledPartition.build(side, shape, pairs)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, MalformedInput):
            raise
        raise MalformedInput(f"bad partition: {e}") from None


# ---------------------------------------------------------------- protocols

def _shape_fields(side, shape) -> dict:
    return {"x_size": shape[0], "y_size": shape[1]} if side == "cc" else {"n": shape[0]}


def _shape_from(doc, side):
    try:
        return (int(doc["x_size"]), int(doc["y_size"])) if side == "cc" else (int(doc["n"]),)
    except (KeyError, TypeError, ValueError):
        raise MalformedInput("document is missing its input-space size") from None


def protocol_to_json(proto: RandomizedProtocol) -> dict:
    doc = {"format_version": FORMAT_VERSION, "side": proto.side,
           **_shape_fields(proto.side, proto.shape),
           "support": [{"prob": fmt_q(e.prob), "partition": partition_to_json(e.partition),
                        "tree": tree_to_json(e.tree)} for e in proto.support]}
    return doc


def protocol_from_json(doc) -> RandomizedProtocol:
    if isinstance(doc, str):
        doc = _loads(doc)
    _check_version(doc)
    side = doc.get("side")
    if side not in ("cc", "query"):
        raise MalformedInput("protocol side must be cc or query")
    shape = _shape_from(doc, side)
    entries = []
    for e in doc.get("support", []):
        entries.append(SupportEntry(parse_q(e["prob"]),
                                    partition_from_json(e["partition"], side, shape),
                                    tree_from_json(e["tree"], side, shape)))
    try:
        return RandomizedProtocol(side, shape, tuple(entries))
    except ValueError as e:
        raise MalformedInput(str(e)) from None


# ---------------------------------------------------------------- certificates

def certificate_to_json(cert: DualCertificate, rel: Relation) -> dict:
    doc = {"format_version": FORMAT_VERSION, "kind": cert.kind, "side": cert.side,
           "eps": fmt_q(cert.eps),
           "mu": {rel.input_label(c): fmt_q(v) for c, v in sorted(cert.mu.items())},
           "phi": {rel.input_label(c): fmt_q(v) for c, v in sorted(cert.phi.items())}}
    if cert.kind == "pprt":
        space = rel.block_space()
        doc["v"] = {labeled_key(rel.side, rel.shape, z, space.blocks[b]): fmt_q(v)
                    for (z, b), v in sorted(cert.v.items())}
        doc["lambda"] = fmt_q(cert.lam)
    return doc


def certificate_from_json(doc, rel: Relation) -> DualCertificate:
    if isinstance(doc, str):
        doc = _loads(doc)
    _check_version(doc)
    kind, side = doc.get("kind"), doc.get("side")
    if kind not in ("prt", "pprt") or side not in ("cc", "query"):
        raise MalformedInput("certificate needs kind prt|pprt and side cc|query")
    try:
        mu = {rel.cell_of(k): parse_q(v) for k, v in doc.get("mu", {}).items()}
        phi = {rel.cell_of(k): parse_q(v) for k, v in doc.get("phi", {}).items()}
        cert = DualCertificate(kind, side, parse_q(doc.get("eps", "0")), mu, phi)
        if kind == "pprt":
            space = rel.block_space()
            for key, v in doc.get("v", {}).items():
                z, block = parse_labeled_key(side, key)
                try:
                    cert.v[(z, space.index(block))] = parse_q(v)
                except KeyError:
                    raise MalformedInput(f"certificate block {key} is not in the input space") from None
            cert.lam = parse_q(doc.get("lambda", "0"))
    except (ValueError, IndexError) as e:
        if isinstance(e, MalformedInput):
            raise
        raise MalformedInput(f"bad certificate: {e}") from None
    return cert


# ---------------------------------------------------------------- reports

def bound_report_to_json(rep: BoundReport) -> dict:
    rel = rep.relation
    space = rel.block_space()
    doc = {"format_version": FORMAT_VERSION, "kind": rep.kind, "side": rep.side,
           "eps": fmt_q(rep.eps), "mode": rep.mode, "status": rep.status,
           "lp_size": {"variables": rep.lp_size[0], "constraints": rep.lp_size[1]},
           "notes": list(rep.notes)}
    if rep.value is not None:
        doc["value"] = fmt_q(rep.value)
        doc["log2_bracket"] = list(rep.bracket)
        doc["log2_approx"] = f"{rep.log2_approx:.6g}"
        doc["witness"] = {
            "w": {labeled_key(rel.side, rel.shape, z, space.blocks[b]): fmt_q(v)
                  for (z, b), v in sorted(rep.w.items())},
            "partitions": [{"a": fmt_q(a), **partition_to_json(p)} for a, p in rep.support],
        }
        doc["certificate"] = certificate_to_json(rep.certificate, rel)
    return doc


def evaluation_to_json(ev: Evaluation, rel: Relation) -> dict:
    return {"format_version": FORMAT_VERSION, "side": rel.side,
            "correct": {rel.input_label(c): fmt_q(p) for c, p in enumerate(ev.correct)},
            "error": fmt_q(ev.error), "cost": ev.cost}


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedInput(f"not JSON: {e}") from None


def read_json(path: str):
    with open(path) as fh:
        return _loads(fh.read())
