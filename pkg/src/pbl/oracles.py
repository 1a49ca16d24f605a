"""Brute-force references, deliberately independent of the LP pipeline and
of the canonical partition recursion.

* deterministic communication / query complexity by memoized recursion;
* partitions found by enumerating *all* set partitions of the input space
  (restricted-growth strings) and keeping those whose blocks are rectangles
  or subcubes;
* pprt_0 as the cheapest everywhere-correct labeled partition.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional

from .caps import Caps, DEFAULT, check
from .trees import Leaf, Query, Speak

MEASURES = ("dcc", "dq")


@dataclass
class ComplexityValue:
    measure: str
    value: int
    witness: object


def _agreeing_output(cells_mask: int, accept_masks) -> Optional[int]:
    for z, am in enumerate(accept_masks):
        if cells_mask & ~am == 0:
            return z
    return None


def _submasks(mask: int):
    """Proper nonempty submasks S with S's complement in mask, each unordered
    split once (S holds the lowest bit)."""
    low = mask & -mask
    rest = mask ^ low
    s = rest
    while True:
        sub = s | low
        if sub != mask:
            yield sub
        if s == 0:
            break
        s = (s - 1) & rest


def det_cc(rel, caps: Caps = DEFAULT) -> ComplexityValue:
    """D(f): 0 on a rectangle where one output is accepted everywhere,
    else 1 + the best split of the rows (Alice) or columns (Bob)."""
    if rel.side != "cc":
        raise ValueError("det_cc needs a cc relation")
    check(max(rel.x_size, rel.y_size), caps.grid_side, "grid side")
    ys = rel.y_size
    acc = rel.accept_masks

    def cells(rows, cols):
        m = 0
        for x in range(rel.x_size):
            if rows >> x & 1:
                m |= cols << (x * ys)
        return m

    @lru_cache(maxsize=None)
    def solve(rows, cols):
        z = _agreeing_output(cells(rows, cols), acc)
        if z is not None:
            return 0, ("leaf", z)
        best = None
        for who, mask in (("A", rows), ("B", cols)):
            for s in _submasks(mask):
                other = mask ^ s
                if who == "A":
                    d = max(solve(s, cols)[0], solve(other, cols)[0])
                else:
                    d = max(solve(rows, s)[0], solve(rows, other)[0])
                if best is None or d + 1 < best[0]:
                    best = (d + 1, (who, s, other))
        if best is None:
            return 10 ** 9, ("none", None)      # a cell with an empty accept set
        return best

    def tree(rows, cols):
        _, move = solve(rows, cols)
        if move[0] == "leaf":
            return Leaf(move[1])
        if move[0] == "none":
            raise ValueError("relation has an input with no acceptable output")
        who, s, other = move
        size = rel.x_size if who == "A" else rel.y_size
        send = tuple(int(other >> i & 1) for i in range(size))
        if who == "A":
            return Speak("A", send, tree(s, cols), tree(other, cols))
        return Speak("B", send, tree(rows, s), tree(rows, other))

    full_r, full_c = (1 << rel.x_size) - 1, (1 << rel.y_size) - 1
    value = solve(full_r, full_c)[0]
    return ComplexityValue("dcc", value, tree(full_r, full_c))


def det_query(rel, caps: Caps = DEFAULT) -> ComplexityValue:
    """D(f) over assignments: 0 when one output is accepted on the whole
    subcube, else 1 + the best variable to query next."""
    if rel.side != "query":
        raise ValueError("det_query needs a query relation")
    n = rel.n
    check(n, caps.oracle_n, "query n")
    acc = rel.accept_masks
    var_cells = []
    for i in range(n):
        ones = sum(1 << c for c in range(1 << n) if c >> (n - 1 - i) & 1)
        var_cells.append((rel.full_mask & ~ones, ones))

    memo: dict = {}

    def solve(sup, val, cmask):
        key = (sup, val)
        if key in memo:
            return memo[key]
        z = _agreeing_output(cmask, acc)
        if z is not None:
            out = (0, ("leaf", z))
        else:
            out = (10 ** 9, ("none", None))
            for i in range(n):
                if sup >> i & 1:
                    continue
                d0 = solve(sup | 1 << i, val, cmask & var_cells[i][0])[0]
                d1 = solve(sup | 1 << i, val | 1 << i, cmask & var_cells[i][1])[0]
                d = 1 + max(d0, d1)
                if d < out[0]:
                    out = (d, ("query", i))
        memo[key] = out
        return out

    def tree(sup, val, cmask):
        _, move = solve(sup, val, cmask)
        if move[0] == "leaf":
            return Leaf(move[1])
        if move[0] == "none":
            raise ValueError("relation has an input with no acceptable output")
        i = move[1]
        return Query(i, tree(sup | 1 << i, val, cmask & var_cells[i][0]),
                     tree(sup | 1 << i, val | 1 << i, cmask & var_cells[i][1]))

    value = solve(0, 0, rel.full_mask)[0]
    return ComplexityValue("dq", value, tree(0, 0, rel.full_mask))


# ---------------------------------------------------------------- set partitions

def set_partitions(k: int) -> Iterator[list[int]]:
    """All set partitions of range(k) as block bitmasks (restricted growth)."""
    if k == 0:
        yield []
        return
    a = [0] * k

    def rec(i, nblocks):
        if i == k:
            blocks = [0] * nblocks
            for j, b in enumerate(a):
                blocks[b] |= 1 << j
            yield blocks
            return
        for b in range(nblocks + 1):
            a[i] = b
            yield from rec(i + 1, max(nblocks, b + 1))

    yield from rec(0, 0)


def is_rectangle(mask: int, x_size: int, y_size: int) -> bool:
    rows = cols = 0
    for c in range(x_size * y_size):
        if mask >> c & 1:
            rows |= 1 << (c // y_size)
            cols |= 1 << (c % y_size)
    prod = 0
    for x in range(x_size):
        if rows >> x & 1:
            prod |= cols << (x * y_size)
    return prod == mask


def is_subcube(mask: int, n: int) -> bool:
    pts = [c for c in range(1 << n) if mask >> c & 1]
    if not pts:
        return False
    same_and, same_or = pts[0], pts[0]
    for p in pts:
        same_and &= p
        same_or |= p
    fixed = ~(same_and ^ same_or) & ((1 << n) - 1)
    return len(pts) == 1 << (n - bin(fixed).count("1"))


def brute_partitions(side: str, shape) -> list[list[int]]:
    """Partitions of the input space into rectangles/subcubes, by filtering
    every set partition."""
    if side == "cc":
        a, b = shape
        return [p for p in set_partitions(a * b) if all(is_rectangle(m, a, b) for m in p)]
    (n,) = shape
    return [p for p in set_partitions(1 << n) if all(is_subcube(m, n) for m in p)]


def brute_labeled_count(side: str, shape, num_outputs: int) -> int:
    return sum(num_outputs ** len(p) for p in brute_partitions(side, shape))


def _block_weight(side: str, shape, mask: int) -> int:
    if side == "cc":
        return 1
    n = shape[0]
    size = bin(mask).count("1")
    return (1 << n) // size          # 2^|A| for a subcube of 2^(n-|A|) points


def exhaustive_pprt0(rel) -> Optional[Fraction]:
    """Cheapest everywhere-correct labeled partition (None if none exists)."""
    limit = 9 if rel.side == "cc" else 3
    if (rel.num_inputs if rel.side == "cc" else rel.n) > limit:
        raise ValueError("exhaustive search is limited to tiny relations")
    best = None
    for p in brute_partitions(rel.side, rel.shape):
        if all(_agreeing_output(m, rel.accept_masks) is not None for m in p):
            cost = sum(_block_weight(rel.side, rel.shape, m) for m in p)
            if best is None or cost < best:
                best = cost
    return None if best is None else Fraction(best)


# ---------------------------------------------------------------- cross check

@dataclass
class CrossCheck:
    ok: bool
    values: dict = field(default_factory=dict)
    discrepancies: list[str] = field(default_factory=list)


def crosscheck_pprt(rel, eps, caps: Caps = DEFAULT) -> CrossCheck:
    """Direct and reduced pprt agree; at eps = 0 both match exhaustive search."""
    from .bounds import compute_bound, parse_eps
    eps = parse_eps(eps)
    direct = compute_bound(rel, eps, "pprt", "direct", caps)
    reduced = compute_bound(rel, eps, "pprt", "reduced", caps)
    out = CrossCheck(True, {"direct": direct.value, "reduced": reduced.value})
    if direct.status != reduced.status:
        out.discrepancies.append(f"status direct={direct.status} reduced={reduced.status}")
    elif direct.value != reduced.value:
        out.discrepancies.append(f"value direct={direct.value} reduced={reduced.value}")
    if eps == 0:
        ex = exhaustive_pprt0(rel)
        out.values["exhaustive"] = ex
        if ex != reduced.value:
            out.discrepancies.append(f"exhaustive={ex} reduced={reduced.value}")
    out.ok = not out.discrepancies
    return out
