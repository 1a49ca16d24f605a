"""Partition bound (prt) and public-coin partition bound (pprt).

Both sides share one code path: a *block* is a rectangle (cc, weight 1) or an
assignment (query, weight 2^|A|), and a labeled block is (z, block).

pprt comes in two formulations:

* direct: variables w (per labeled block) and a (per labeled partition) with
  the linking equalities, exactly as the program is usually written;
* reduced: a alone. Each partition covers every input once and the a sum to
  one, so the per-input mass equalities hold automatically and w is a
  function of a. Objective becomes sum_P a_P * cost(P).

By default the reduced LP is built over *signature columns*: labeled
partitions are grouped by the set of inputs they label correctly, only the
cheapest (canonical-first) member of each group is kept, and groups
dominated by a superset group of no greater cost are dropped. That leaves the
optimal value unchanged and keeps the LP at most 2^(#inputs) columns wide.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from . import kernels
from .caps import Caps, DEFAULT, check
from .lp import LPInstance, LPSolution, check_duality, check_farkas, solve_lp
from .relation import (Assignment, LabeledBlock, LabeledPartition, Rectangle,
                       Relation, bits_of, block_space, labeled_partition_count,
                       enumerate_labeled_partitions, _check_partition_caps)

KINDS = ("prt", "pprt")


class CertificateMismatch(ValueError):
    """Certificate indexes do not match the relation."""


def parse_eps(text) -> Fraction:
    """Exact epsilon from "p/q" or an integer string; decimals are refused."""
    if isinstance(text, Fraction):
        eps = text
    else:
        s = str(text).strip()
        if any(ch in s for ch in ".eE"):
            raise ValueError(f"epsilon must be an exact rational like 1/8, got {s!r}")
        try:
            eps = Fraction(s)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot parse epsilon {s!r}") from None
    if not 0 <= eps < 1:
        raise ValueError(f"epsilon must satisfy 0 <= eps < 1, got {eps}")
    return eps


def fmt_q(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def pow2(k: int) -> Fraction:
    return Fraction(2) ** k


def log2_bracket(q: Fraction) -> tuple[int, int]:
    """(largest k with 2^k <= q, smallest k with q <= 2^k), for q > 0."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("log2 bracket needs a positive value")
    k = q.numerator.bit_length() - q.denominator.bit_length()
    while pow2(k) > q:
        k -= 1
    while pow2(k + 1) <= q:
        k += 1
    return k, (k if pow2(k) == q else k + 1)


def ceil_log2(q: Fraction) -> int:
    return log2_bracket(q)[1]


def block_key(side: str, shape, block) -> str:
    return block.key if side == "cc" else block.pattern(shape[0])


def labeled_key(side: str, shape, z: int, block) -> str:
    return f"{z}:{block_key(side, shape, block)}"


def parse_labeled_key(side: str, key: str):
    z, _, rest = key.partition(":")
    block = Rectangle.from_key(rest) if side == "cc" else Assignment.from_pattern(rest)
    return int(z), block


# ---------------------------------------------------------------- LP builders

@dataclass
class BoundLP(LPInstance):
    kind: str = "prt"
    mode: str = "prt"          # prt | reduced | direct
    relation: Optional[Relation] = None
    eps: Fraction = Fraction(0)
    partitions: list = field(default_factory=list)
    labeled_blocks: list = field(default_factory=list)   # (z, block index)


def _check_block_caps(rel: Relation, caps: Caps) -> None:
    if rel.side == "cc":
        check(max(rel.x_size, rel.y_size), caps.grid_side, "grid side")
    else:
        check(rel.n, caps.query_lp_n, "query n")


def _add_w_block(lp: BoundLP, rel: Relation):
    """w variables plus the per-input correctness and mass rows."""
    space = rel.block_space()
    corr = [dict() for _ in range(rel.num_inputs)]
    mass = [dict() for _ in range(rel.num_inputs)]
    for b, (blk, bm, cost) in enumerate(zip(space.blocks, space.masks, space.costs)):
        cells = bits_of(bm)
        for z in range(rel.num_outputs):
            j = lp.add_var("w[" + labeled_key(rel.side, rel.shape, z, blk) + "]", cost)
            lp.labeled_blocks.append((z, b))
            for c in cells:
                mass[c][j] = 1
                if z in rel.accept[c]:
                    corr[c][j] = 1
    for c in range(rel.num_inputs):
        lp.add_constraint(f"corr[{rel.input_label(c)}]", corr[c], ">=", 1 - lp.eps)
    for c in range(rel.num_inputs):
        lp.add_constraint(f"mass[{rel.input_label(c)}]", mass[c], "=", 1)


def build_prt(rel: Relation, eps, caps: Caps = DEFAULT) -> BoundLP:
    eps = parse_eps(eps)
    _check_block_caps(rel, caps)
    lp = BoundLP(kind="prt", mode="prt", relation=rel, eps=eps)
    _add_w_block(lp, rel)
    return lp


def signature_columns(rel: Relation, caps: Caps = DEFAULT, prune: bool = True) -> list[LabeledPartition]:
    """Cheapest labeled partition per correctness signature, mask ascending."""
    _check_partition_caps(rel.side, rel.shape, caps)
    check(labeled_partition_count(rel, caps), caps.labeled, "labeled partitions")
    space = rel.block_space()
    best_cost, best_n, best_blocks, best_labels, _ = kernels.scan_signatures(
        space, rel.accept_masks)
    keep = kernels.undominated(best_cost, space.ncells) if prune else best_cost < kernels.INF
    out = []
    for m in np.flatnonzero(keep):
        k = int(best_n[m])
        out.append(LabeledPartition(rel.side, rel.shape, tuple(
            LabeledBlock(int(best_labels[m, i]), space.blocks[int(best_blocks[m, i])])
            for i in range(k))))
    return out


def build_pprt_reduced(rel: Relation, eps, partitions: Optional[Iterable[LabeledPartition]] = None,
                       caps: Caps = DEFAULT) -> BoundLP:
    """a-only formulation. ``partitions`` defaults to the signature columns;
    pass ``enumerate_labeled_partitions(rel)`` for the full column set."""
    eps = parse_eps(eps)
    if partitions is None:
        partitions = signature_columns(rel, caps)
    lp = BoundLP(kind="pprt", mode="reduced", relation=rel, eps=eps)
    corr = [dict() for _ in range(rel.num_inputs)]
    total = {}
    for k, p in enumerate(partitions):
        j = lp.add_var(f"a[{k}]", p.cost)
        lp.partitions.append(p)
        total[j] = 1
        for c in bits_of(p.correct_mask(rel)):
            corr[c][j] = 1
    for c in range(rel.num_inputs):
        lp.add_constraint(f"corr[{rel.input_label(c)}]", corr[c], ">=", 1 - eps)
    lp.add_constraint("sum", total, "=", 1)
    return lp


def build_pprt_direct(rel: Relation, eps, partitions: Optional[Iterable[LabeledPartition]] = None,
                      caps: Caps = DEFAULT) -> BoundLP:
    """w and a variables with the linking equalities, over every labeled
    partition (materialized, hence the tighter cap)."""
    eps = parse_eps(eps)
    _check_block_caps(rel, caps)
    if partitions is None:
        _check_partition_caps(rel.side, rel.shape, caps)
        check(labeled_partition_count(rel, caps), caps.direct_labeled, "labeled partitions (direct)")
        partitions = enumerate_labeled_partitions(rel, caps)
    lp = BoundLP(kind="pprt", mode="direct", relation=rel, eps=eps)
    _add_w_block(lp, rel)
    space = rel.block_space()
    wcol = {(z, b): j for j, (z, b) in enumerate(lp.labeled_blocks)}
    link = {j: {j: 1} for j in range(len(lp.labeled_blocks))}
    total = {}
    for k, p in enumerate(partitions):
        j = lp.add_var(f"a[{k}]", 0)
        lp.partitions.append(p)
        total[j] = 1
        for lb in p.blocks:
            link[wcol[(lb.z, space.index(lb.block))]][j] = -1
    for (z, b), j in wcol.items():
        lp.add_constraint("link[" + labeled_key(rel.side, rel.shape, z, space.blocks[b]) + "]",
                          link[j], "=", 0)
    lp.add_constraint("sum", total, "=", 1)
    return lp


# ---------------------------------------------------------------- certificates

@dataclass
class DualCertificate:
    kind: str
    side: str
    eps: Fraction
    mu: dict[int, Fraction]                    # cell -> value
    phi: dict[int, Fraction]
    v: dict[tuple[int, int], Fraction] = field(default_factory=dict)   # (z, block idx)
    lam: Fraction = Fraction(0)

    @property
    def value(self) -> Fraction:
        out = (1 - self.eps) * sum(self.mu.values(), Fraction(0)) + sum(self.phi.values(), Fraction(0))
        return out + self.lam if self.kind == "pprt" else out


@dataclass
class Verdict:
    ok: bool
    value: Fraction
    violations: list[str] = field(default_factory=list)
    separation_value: Optional[Fraction] = None
    separation_witness: Optional[LabeledPartition] = None


def min_weight_partition(v: dict[tuple[int, int], Fraction], side: str, shape,
                         num_outputs: int, caps: Caps = DEFAULT):
    """Least sum of v over the labeled blocks of any labeled partition.

    Labels are chosen per block independently (lowest label wins ties); the
    partition search is the memoized least-uncovered-cell recursion over the
    uncovered set, exact via integer scaling.
    Returns (value, witness LabeledPartition).
    """
    shape = tuple(shape)
    _check_partition_caps(side, shape, caps)
    space = block_space(side, shape)
    best, label = [], []
    for b in range(len(space.blocks)):
        vals = [Fraction(v.get((z, b), 0)) for z in range(num_outputs)]
        z = min(range(num_outputs), key=lambda t: (vals[t], t))
        best.append(vals[z])
        label.append(z)
    den = math.lcm(*(q.denominator for q in best)) if best else 1
    ints = [int(q * den) for q in best]
    total, picked = kernels.min_weight(space, ints)
    witness = LabeledPartition(side, shape, tuple(LabeledBlock(label[b], space.blocks[b])
                                                  for b in picked))
    return Fraction(total, den), witness


def verify_dual_certificate(rel: Relation, eps, cert: DualCertificate, kind: Optional[str] = None,
                            caps: Caps = DEFAULT) -> Verdict:
    """Check every dual constraint exactly; an accepting verdict's value is a
    proved lower bound on the bound by weak duality."""
    eps = parse_eps(eps)
    kind = kind or cert.kind
    if kind not in KINDS or cert.kind != kind or cert.side != rel.side or cert.eps != eps:
        raise CertificateMismatch("certificate kind/side/eps does not match the request")
    cells = set(range(rel.num_inputs))
    if set(cert.mu) - cells or set(cert.phi) - cells:
        raise CertificateMismatch("certificate names inputs outside the relation")
    space = rel.block_space()
    nb = len(space.blocks)
    if any(not (0 <= z < rel.num_outputs and 0 <= b < nb) for z, b in cert.v):
        raise CertificateMismatch("certificate names labeled blocks outside the relation")
    mu = [Fraction(cert.mu.get(c, 0)) for c in range(rel.num_inputs)]
    phi = [Fraction(cert.phi.get(c, 0)) for c in range(rel.num_inputs)]
    bad = [f"mu[{rel.input_label(c)}] < 0" for c in range(rel.num_inputs) if mu[c] < 0]
    for b, (blk, bm, cost) in enumerate(zip(space.blocks, space.masks, space.costs)):
        members = bits_of(bm)
        phi_sum = sum((phi[c] for c in members), Fraction(0))
        for z in range(rel.num_outputs):
            acc = rel.accept_masks[z]
            lhs = phi_sum + sum((mu[c] for c in members if acc >> c & 1), Fraction(0))
            if kind == "pprt":
                lhs += Fraction(cert.v.get((z, b), 0))
            if lhs > cost:
                bad.append(f"block {labeled_key(rel.side, rel.shape, z, blk)}: "
                           f"{fmt_q(lhs)} > {cost}")
    verdict = Verdict(not bad, cert.value, bad)
    if kind == "pprt":
        sep, wit = min_weight_partition(cert.v, rel.side, rel.shape, rel.num_outputs, caps)
        verdict.separation_value, verdict.separation_witness = sep, wit
        if sep < cert.lam:
            verdict.ok = False
            verdict.violations.append(f"partition constraint: min over P of sum v = "
                                      f"{fmt_q(sep)} < lambda = {fmt_q(cert.lam)}")
    return verdict


def _extract_certificate(lp: BoundLP, sol: LPSolution) -> DualCertificate:
    rel = lp.relation
    y = sol.dual_by_id(lp)
    labels = [rel.input_label(c) for c in range(rel.num_inputs)]
    mu = {c: y[f"corr[{labels[c]}]"] for c in range(rel.num_inputs)}
    cert = DualCertificate(lp.kind, rel.side, lp.eps, mu, {c: Fraction(0) for c in mu})
    space = rel.block_space()
    if lp.mode in ("prt", "direct"):
        cert.phi = {c: y[f"mass[{labels[c]}]"] for c in range(rel.num_inputs)}
    if lp.mode == "direct":
        for z, b in lp.labeled_blocks:
            cert.v[(z, b)] = y["link[" + labeled_key(rel.side, rel.shape, z, space.blocks[b]) + "]"]
        cert.lam = y["sum"]
    elif lp.mode == "reduced":
        # phi = 0 and v tight at every block constraint
        for b, (bm, cost) in enumerate(zip(space.masks, space.costs)):
            for z in range(rel.num_outputs):
                s = sum((mu[c] for c in bits_of(bm & rel.accept_masks[z])), Fraction(0))
                cert.v[(z, b)] = cost - s
        cert.lam = y["sum"]
    return cert


# ---------------------------------------------------------------- reports

@dataclass
class BoundReport:
    kind: str
    side: str
    eps: Fraction
    mode: str
    status: str
    relation: Relation
    value: Optional[Fraction] = None
    dual_value: Optional[Fraction] = None
    infeasibility_certified: Optional[bool] = None
    bracket: Optional[tuple[int, int]] = None
    w: dict = field(default_factory=dict)                   # (z, block idx) -> weight
    support: list = field(default_factory=list)             # [(a_P, LabeledPartition)]
    certificate: Optional[DualCertificate] = None
    lp_size: tuple[int, int] = (0, 0)
    pivots: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def log2_approx(self) -> Optional[float]:
        if self.value is None or self.value <= 0:
            return None
        return math.log2(self.value.numerator) - math.log2(self.value.denominator)


def compute_bound(rel: Relation, eps, kind: str = "pprt", mode: str = "reduced",
                  caps: Caps = DEFAULT) -> BoundReport:
    """Build, solve and certify one bound.

    Infeasibility (an input with no acceptable output) is reported as a
    status, never raised.
    """
    eps = parse_eps(eps)
    if kind not in KINDS:
        raise ValueError(f"unknown bound kind {kind!r}")
    if kind == "prt":
        lp, mode = build_prt(rel, eps, caps), "prt"
    elif mode == "reduced":
        lp = build_pprt_reduced(rel, eps, caps=caps)
    elif mode == "direct":
        lp = build_pprt_direct(rel, eps, caps=caps)
    else:
        raise ValueError(f"unknown pprt mode {mode!r}")
    sol = solve_lp(lp)
    rep = BoundReport(kind, rel.side, eps, mode, sol.status, rel,
                      lp_size=(lp.num_vars, len(lp.constraints)), pivots=sol.pivots)
    if eps == 0:
        rep.notes.append("eps = 0 is an extension: the bounds are defined for eps > 0")
    if sol.status != "optimal":
        if sol.status == "infeasible":
            rep.infeasibility_certified = check_farkas(lp, sol.farkas)
        empty = [rel.input_label(c) for c, s in enumerate(rel.accept) if not s]
        if empty:
            rep.notes.append("infeasible: no acceptable output at " + ", ".join(empty))
        else:
            rep.notes.append(f"LP status {sol.status}")
        return rep
    if not check_duality(lp, sol):
        raise AssertionError("solver returned an uncertified optimum")
    rep.value = sol.value
    rep.dual_value = sum((c.rhs * y for c, y in zip(lp.constraints, sol.dual)), Fraction(0))
    rep.bracket = log2_bracket(sol.value)
    x = sol.primal
    if lp.mode in ("prt", "direct"):
        for j, zb in enumerate(lp.labeled_blocks):
            if x[j]:
                rep.w[zb] = x[j]
    offset = len(lp.labeled_blocks) if lp.mode == "direct" else 0
    space = rel.block_space()
    for k, p in enumerate(lp.partitions):
        a = x[offset + k]
        if a:
            rep.support.append((a, p))
            if lp.mode == "reduced":
                for lb in p.blocks:
                    key = (lb.z, space.index(lb.block))
                    rep.w[key] = rep.w.get(key, Fraction(0)) + a
    rep.certificate = _extract_certificate(lp, sol)
    return rep
