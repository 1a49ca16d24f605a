"""Partitions to protocols and back, truncation, randomized assembly.

Communication trees realize a rectangle partition with m blocks in at most
ceil(log2 m)^2 bits. Each round works on the live blocks L (those still
possible given the transcript), restricted to the rows and columns still
consistent with it; restricted to that sub-grid they partition it.

* |L| = 2: the two blocks are row- or column-disjoint; one bit decides.
* otherwise Alice names a live block containing her row that row-intersects
  at most ceil(|L|/2) live blocks, or flags that she has none, in which case
  Bob names one containing his column that column-intersects at most
  ceil(|L|/2). The true block always qualifies for one of them, because a
  block disjoint from it cannot share both a row and a column with it.
  Blocks disjoint from the named one on the speaker's coordinate die.

Names index the round's candidate list, so a round costs at most
1 + ceil(log2 |L|) bits; any bit that every consistent input would send
identically is elided. With |L| <= 2^(k-r) in round r the total is at most
(k - 1) + k(k + 1)/2 <= k^2.

Decision trees realize a subcube partition whose assignments have size at
most m with m^2 queries: repeatedly query every unqueried variable of the
first live assignment. Two blocks conflict on a shared variable, so each
round uncovers a new variable of the true block.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .bounds import BoundReport, ceil_log2, compute_bound, fmt_q
from .caps import Caps, DEFAULT
from .relation import (Assignment, LabeledPartition, PartitionError, Rectangle,
                       Relation, bits_of)
from .trees import CCTree, DTree, Leaf, Query, Speak, depth, run_tree


class SynthesisError(RuntimeError):
    """A synthesized tree would exceed its depth budget, or the input
    partition is malformed."""


class MalformedTree(ValueError):
    """A tree's leaves do not form a valid partition."""


# ---------------------------------------------------------------- cc synthesis

def _send(speaker: str, size: int, value: dict[int, int], nvalues: int,
          cont: Callable[[int, int], CCTree]) -> CCTree:
    """Transmit ``value[input]`` (for the consistent inputs given as keys)
    MSB first in ceil(log2 nvalues) bits, skipping bits that are constant
    over the inputs still consistent; ``cont(v, inputs_mask)`` builds the
    rest."""
    nbits = ceil_log2(Fraction(nvalues)) if nvalues > 1 else 0

    def level(bit: int, inputs: list[int], prefix: int) -> CCTree:
        if bit < 0:
            return cont(prefix, sum(1 << i for i in inputs))
        ones = [i for i in inputs if value[i] >> bit & 1]
        zeros = [i for i in inputs if not value[i] >> bit & 1]
        if not ones:
            return level(bit - 1, zeros, prefix)
        if not zeros:
            return level(bit - 1, ones, prefix | 1 << bit)
        send = [0] * size
        for i in ones:
            send[i] = 1
        return Speak(speaker, tuple(send), level(bit - 1, zeros, prefix),
                     level(bit - 1, ones, prefix | 1 << bit))

    return level(nbits - 1, sorted(value), 0)


class _CCSynth:
    def __init__(self, partition: LabeledPartition):
        self.x_size, self.y_size = partition.shape
        self.rows = [lb.block.row_mask for lb in partition.blocks]
        self.cols = [lb.block.col_mask for lb in partition.blocks]
        self.labels = [lb.z for lb in partition.blocks]

    def build(self, live, rmask: int, cmask: int) -> CCTree:
        live = [b for b in live if self.rows[b] & rmask and self.cols[b] & cmask]
        if not live:
            raise SynthesisError("no live block for a consistent input")
        if len(live) == 1:
            return Leaf(self.labels[live[0]])
        R = {b: self.rows[b] & rmask for b in live}
        C = {b: self.cols[b] & cmask for b in live}
        if len(live) == 2:
            b1, b2 = live
            if not R[b1] & R[b2]:
                value = {x: 0 if R[b1] >> x & 1 else 1 for x in bits_of(rmask)}
                return _send("A", self.x_size, value, 2,
                             lambda v, sub: self.build([live[v]], sub, cmask))
            if not C[b1] & C[b2]:
                value = {y: 0 if C[b1] >> y & 1 else 1 for y in bits_of(cmask)}
                return _send("B", self.y_size, value, 2,
                             lambda v, sub: self.build([live[v]], rmask, sub))
            raise SynthesisError("two live blocks overlap")
        half = (len(live) + 1) // 2
        qa = [b for b in live if sum(1 for o in live if R[o] & R[b]) <= half]
        qb = [b for b in live if sum(1 for o in live if C[o] & C[b]) <= half]
        pick_a = {}
        for x in bits_of(rmask):
            hit = next((k for k, b in enumerate(qa) if R[b] >> x & 1), None)
            if hit is not None:
                pick_a[x] = hit

        def alice_names(v: int, sub: int) -> CCTree:
            named = qa[v]
            return self.build([o for o in live if R[o] & R[named]], sub, cmask)

        def bob_turn(sub_rows: int) -> CCTree:
            pick_b = {}
            for y in bits_of(cmask):
                hit = next((k for k, b in enumerate(qb) if C[b] >> y & 1), None)
                if hit is None:
                    raise SynthesisError("neither player can name a halving block")
                pick_b[y] = hit

            def bob_names(v: int, sub: int) -> CCTree:
                named = qb[v]
                return self.build([o for o in live if C[o] & C[named]], sub_rows, sub)
            return _send("B", self.y_size, pick_b, len(qb), bob_names)

        consistent = bits_of(rmask)
        if len(pick_a) == len(consistent):
            return _send("A", self.x_size, pick_a, len(qa), alice_names)
        if not pick_a:
            return bob_turn(rmask)
        flag = {x: int(x in pick_a) for x in consistent}

        def after_flag(found: int, sub: int) -> CCTree:
            if found:
                return _send("A", self.x_size, {x: pick_a[x] for x in bits_of(sub)},
                             len(qa), alice_names)
            return bob_turn(sub)
        return _send("A", self.x_size, flag, 2, after_flag)


def cc_budget(m: int) -> int:
    return ceil_log2(Fraction(m)) ** 2 if m > 1 else 0


def synth_cc_tree(partition: LabeledPartition) -> CCTree:
    """Protocol tree outputting the label of the block containing (x, y),
    with depth at most ceil(log2 m)^2 for m blocks."""
    if partition.side != "cc":
        raise SynthesisError("synth_cc_tree needs a cc partition")
    m = partition.block_count
    if m == 1:
        return Leaf(partition.blocks[0].z)
    x_size, y_size = partition.shape
    tree = _CCSynth(partition).build(list(range(m)), (1 << x_size) - 1, (1 << y_size) - 1)
    if depth(tree) > cc_budget(m):
        raise SynthesisError(f"tree depth {depth(tree)} exceeds budget {cc_budget(m)}")
    return tree


# ---------------------------------------------------------------- query synthesis

def synth_query_tree(partition: LabeledPartition) -> DTree:
    """Decision tree outputting the containing block's label with depth at
    most (max |A|)^2."""
    if partition.side != "query":
        raise SynthesisError("synth_query_tree needs a query partition")
    blocks = [(lb.block.support, lb.block.values, lb.z) for lb in partition.blocks]
    if len(blocks) == 1:
        return Leaf(blocks[0][2])

    def alive(live, ksup, kval):
        return [b for b in live if (blocks[b][1] ^ kval) & blocks[b][0] & ksup == 0]

    def new_round(live, ksup, kval) -> DTree:
        live = alive(live, ksup, kval)
        if not live:
            raise SynthesisError("no live assignment for a consistent input")
        if len(live) == 1:
            return Leaf(blocks[live[0]][2])
        todo = bits_of(blocks[live[0]][0] & ~ksup)
        if not todo:
            raise SynthesisError("assignments of the partition overlap")
        return ask(live, ksup, kval, todo)

    def ask(live, ksup, kval, todo) -> DTree:
        live = alive(live, ksup, kval)
        if len(live) == 1:
            return Leaf(blocks[live[0]][2])
        if not todo:
            return new_round(live, ksup, kval)
        i, rest = todo[0], todo[1:]
        return Query(i, ask(live, ksup | 1 << i, kval, rest),
                     ask(live, ksup | 1 << i, kval | 1 << i, rest))

    tree = new_round(list(range(len(blocks))), 0, 0)
    budget = partition.max_assignment_size ** 2
    if depth(tree) > budget:
        raise SynthesisError(f"tree depth {depth(tree)} exceeds budget {budget}")
    return tree


def synth_tree(partition: LabeledPartition):
    return synth_cc_tree(partition) if partition.side == "cc" else synth_query_tree(partition)


# ---------------------------------------------------------------- trees -> partitions

def tree_to_partition(tree, side: str, shape) -> LabeledPartition:
    """Leaves of a tree as a labeled partition (unreachable leaves dropped).

    cc: each leaf's input set is recomputed by running every input through
    the tree and must equal the product of its projections.
    """
    shape = tuple(shape)
    if side == "cc":
        x_size, y_size = shape
        leaves = []

        def walk(t, rows, cols, path):
            if not rows or not cols:
                return
            if isinstance(t, Leaf):
                leaves.append((path, rows, cols, t.out))
                return
            if not isinstance(t, Speak) or t.speaker not in "AB":
                raise MalformedTree("unexpected node in communication tree")
            size = x_size if t.speaker == "A" else y_size
            if len(t.send) != size:
                raise MalformedTree("send map does not cover the speaker's inputs")
            ones = sum(1 << i for i in range(size) if t.send[i])
            if t.speaker == "A":
                walk(t.on0, rows & ~ones, cols, path + "0")
                walk(t.on1, rows & ones, cols, path + "1")
            else:
                walk(t.on0, rows, cols & ~ones, path + "0")
                walk(t.on1, rows, cols & ones, path + "1")

        walk(tree, (1 << x_size) - 1, (1 << y_size) - 1, "")
        reached: dict[str, set] = {}
        for x in range(x_size):
            for y in range(y_size):
                t, path = tree, ""
                while isinstance(t, Speak):
                    bit = t.send[x if t.speaker == "A" else y]
                    t, path = (t.on1, path + "1") if bit else (t.on0, path + "0")
                reached.setdefault(path, set()).add((x, y))
        pairs = []
        for path, rows, cols, out in leaves:
            rect = {(x, y) for x in bits_of(rows) for y in bits_of(cols)}
            if reached.get(path, set()) != rect:
                raise MalformedTree(f"leaf {path or '(root)'} is not a rectangle")
            pairs.append((out, Rectangle(rows, cols)))
        return LabeledPartition.build("cc", shape, pairs)

    pairs = []

    def walk_q(t, sup, val):
        if isinstance(t, Leaf):
            pairs.append((t.out, Assignment(sup, val)))
            return
        if not isinstance(t, Query):
            raise MalformedTree("unexpected node in decision tree")
        if sup >> t.var & 1:
            raise MalformedTree(f"variable {t.var} queried twice on a path")
        walk_q(t.on0, sup | 1 << t.var, val)
        walk_q(t.on1, sup | 1 << t.var, val | 1 << t.var)

    walk_q(tree, 0, 0)
    try:
        return LabeledPartition.build("query", shape, pairs)
    except PartitionError as e:
        raise MalformedTree(str(e)) from None


# ---------------------------------------------------------------- truncation

@dataclass
class Truncation:
    eps: Fraction
    value: Fraction                  # V = sum_P a_P * cost(P)
    threshold: Fraction              # V / eps
    delta: Fraction                  # dropped mass
    kept: list                       # [(rescaled prob, item)]
    dropped: list                    # [(prob, item)]


def truncate_support(support, eps, side: str, cost: Callable = None,
                     size: Callable = None) -> Truncation:
    """Drop the partitions that are too large relative to V/eps and rescale.

    cc drops n_P >= V/eps; query drops any block with 2^|A| > V/eps. Markov
    gives delta <= eps, asserted exactly. ``cost``/``size`` default to the
    LabeledPartition attributes (overridable for synthetic supports).
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("truncation needs eps > 0")
    if side == "cc":
        cost = cost or (lambda p: p.block_count)
        size = size or (lambda p: p.block_count)
    else:
        cost = cost or (lambda p: p.cost)
        size = size or (lambda p: 1 << p.max_assignment_size)
    if sum((a for a, _ in support), Fraction(0)) != 1:
        raise ValueError("support probabilities must sum to 1")
    value = sum((a * cost(p) for a, p in support), Fraction(0))
    threshold = value / eps
    too_big = (lambda s: s >= threshold) if side == "cc" else (lambda s: s > threshold)
    dropped = [(a, p) for a, p in support if too_big(size(p))]
    kept = [(a, p) for a, p in support if not too_big(size(p))]
    delta = sum((a for a, _ in dropped), Fraction(0))
    if delta > eps:
        raise AssertionError(f"dropped mass {delta} exceeds eps {eps}")
    if delta == 1:
        raise SynthesisError("truncation dropped all probability mass")
    scale = 1 / (1 - delta)
    return Truncation(eps, value, threshold, delta, [(a * scale, p) for a, p in kept], dropped)


def truncate_distribution(report: BoundReport) -> Truncation:
    if report.kind != "pprt" or report.status != "optimal":
        raise ValueError("truncation needs an optimal pprt report")
    tr = truncate_support(report.support, report.eps, report.side)
    if tr.value != report.value:
        raise AssertionError("witness objective differs from the reported value")
    return tr


# ---------------------------------------------------------------- randomized protocols

@dataclass(frozen=True)
class SupportEntry:
    prob: Fraction
    partition: LabeledPartition
    tree: object


@dataclass(frozen=True)
class RandomizedProtocol:
    side: str
    shape: tuple[int, ...]
    support: tuple[SupportEntry, ...]

    def __post_init__(self):
        if not self.support:
            raise ValueError("empty support")
        if any(e.prob <= 0 for e in self.support):
            raise ValueError("support probabilities must be positive")
        if sum((e.prob for e in self.support), Fraction(0)) != 1:
            raise ValueError("support probabilities must sum to 1")

    @property
    def cost(self) -> int:
        return max(depth(e.tree) for e in self.support)

    def sample(self, seed: int) -> SupportEntry:
        """Inverse-CDF draw over the canonical support order."""
        u = Fraction(random.Random(seed).getrandbits(64), 1 << 64)
        acc = Fraction(0)
        for e in self.support:
            acc += e.prob
            if u < acc:
                return e
        return self.support[-1]


def assemble_randomized(probabilities, partitions, side: str) -> RandomizedProtocol:
    partitions = list(partitions)
    probabilities = [Fraction(p) for p in probabilities]
    if len(partitions) != len(probabilities):
        raise ValueError("one probability per partition")
    if any(p.side != side for p in partitions):
        raise ValueError("partition side mismatch")
    shape = partitions[0].shape
    entries = tuple(SupportEntry(a, p, synth_tree(p)) for a, p in zip(probabilities, partitions) if a)
    return RandomizedProtocol(side, shape, entries)


@dataclass
class Evaluation:
    correct: list[Fraction]      # per input cell
    error: Fraction
    cost: int


def evaluate_protocol(protocol: RandomizedProtocol, rel: Relation) -> Evaluation:
    """Exact per-input success probabilities by running every support tree."""
    if protocol.side != rel.side or tuple(protocol.shape) != tuple(rel.shape):
        raise ValueError("protocol and relation sides do not match")
    correct = [Fraction(0)] * rel.num_inputs
    for e in protocol.support:
        for c in range(rel.num_inputs):
            if run_tree(e.tree, rel.side, rel.shape, c) in rel.accept[c]:
                correct[c] += e.prob
    return Evaluation(correct, 1 - min(correct), protocol.cost)


# ---------------------------------------------------------------- pipeline

@dataclass
class PipelineResult:
    report: BoundReport
    truncation: Optional[Truncation] = None
    protocol: Optional[RandomizedProtocol] = None
    evaluation: Optional[Evaluation] = None
    budget: Optional[int] = None
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(self.checks.values())


def synthesis_budget(value: Fraction, eps: Fraction, side: str) -> int:
    """cc: (ceil(log2(V/eps)) + 1)^2; query: ceil(log2(V/eps))^2."""
    k = ceil_log2(value / eps)
    return (k + 1) ** 2 if side == "cc" else k * k


def run_pipeline(rel: Relation, eps, caps: Caps = DEFAULT) -> PipelineResult:
    """pprt witness -> truncate -> synthesize -> evaluate, with the
    error and cost budgets checked exactly."""
    report = compute_bound(rel, eps, "pprt", "reduced", caps)
    res = PipelineResult(report)
    if report.status != "optimal":
        return res
    if report.eps == 0:
        raise ValueError("the synthesis pipeline needs eps > 0")
    res.truncation = truncate_distribution(report)
    probs = [a for a, _ in res.truncation.kept]
    parts = [p for _, p in res.truncation.kept]
    res.protocol = assemble_randomized(probs, parts, rel.side)
    res.evaluation = evaluate_protocol(res.protocol, rel)
    res.budget = synthesis_budget(report.value, report.eps, rel.side)
    res.checks = {
        "delta <= eps": res.truncation.delta <= report.eps,
        "error <= 2 eps": res.evaluation.error <= 2 * report.eps,
        "cost <= budget": res.evaluation.cost <= res.budget,
    }
    return res


def describe_pipeline(res: PipelineResult) -> dict:
    if res.evaluation is None:
        return {"status": res.report.status}
    return {
        "status": "ok" if res.ok else "failed",
        "V": fmt_q(res.report.value),
        "delta": fmt_q(res.truncation.delta),
        "error": fmt_q(res.evaluation.error),
        "cost": res.evaluation.cost,
        "budget": res.budget,
        "support": len(res.protocol.support),
    }
