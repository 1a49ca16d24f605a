"""Relations, rectangles, assignments and labeled partitions.

Inputs are addressed by a flat *cell* index everywhere:

* cc side: cell ``x * y_size + y`` (row-major).
* query side: cell ``int(bits, 2)`` where ``bits`` is the input written with
  variable 0 as the leftmost character. Variable ``i`` is therefore bit
  ``n - 1 - i`` of the cell index.

Block membership is kept as an integer bitmask over cells.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterator, Sequence, Union

import numpy as np

from .caps import Caps, DEFAULT, check


class MalformedInput(ValueError):
    """A relation, protocol or certificate document failed validation."""


class PartitionError(ValueError):
    """Blocks overlap or leave an input uncovered."""


def popcount(v: int) -> int:
    return bin(v).count("1")


def bits_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


# ---------------------------------------------------------------- blocks

@dataclass(frozen=True, order=True)
class Rectangle:
    """Combinatorial rectangle ``rows x cols``; both sets given as bitmasks."""
    row_mask: int
    col_mask: int

    def __post_init__(self):
        if self.row_mask <= 0 or self.col_mask <= 0:
            raise ValueError("rectangle needs nonempty rows and cols")

    @property
    def rows(self) -> tuple[int, ...]:
        return bits_of(self.row_mask)

    @property
    def cols(self) -> tuple[int, ...]:
        return bits_of(self.col_mask)

    def contains(self, x: int, y: int) -> bool:
        return bool(self.row_mask >> x & 1 and self.col_mask >> y & 1)

    def cell_mask(self, y_size: int) -> int:
        m = 0
        for x in self.rows:
            m |= self.col_mask << (x * y_size)
        return m

    @property
    def key(self) -> str:
        return ",".join(map(str, self.rows)) + ":" + ",".join(map(str, self.cols))

    @classmethod
    def from_key(cls, key: str) -> "Rectangle":
        rows, _, cols = key.partition(":")
        return cls(mask_of(int(t) for t in rows.split(",")),
                   mask_of(int(t) for t in cols.split(",")))


@dataclass(frozen=True, order=True)
class Assignment:
    """Partial assignment of bits; ``support`` and ``values`` are bitmasks
    over variable indices (bit ``i`` is variable ``i``)."""
    support: int
    values: int

    def __post_init__(self):
        if self.support < 0 or self.values & ~self.support:
            raise ValueError("assignment values outside its support")

    @property
    def size(self) -> int:
        return popcount(self.support)

    @property
    def bindings(self) -> dict[int, int]:
        return {i: self.values >> i & 1 for i in bits_of(self.support)}

    def consistent(self, x: Sequence[int]) -> bool:
        return all(x[i] == b for i, b in self.bindings.items())

    def cell_mask(self, n: int) -> int:
        m = 0
        for cell in range(1 << n):
            if self.consistent(cell_to_bits(cell, n)):
                m |= 1 << cell
        return m

    def pattern(self, n: int) -> str:
        return "".join(str(self.values >> i & 1) if self.support >> i & 1 else "*"
                       for i in range(n))

    @classmethod
    def from_pattern(cls, pattern: str) -> "Assignment":
        sup = val = 0
        for i, ch in enumerate(pattern):
            if ch == "*":
                continue
            if ch not in "01":
                raise MalformedInput(f"bad assignment pattern {pattern!r}")
            sup |= 1 << i
            val |= int(ch) << i
        return cls(sup, val)


Block = Union[Rectangle, Assignment]


def cell_to_bits(cell: int, n: int) -> tuple[int, ...]:
    return tuple(cell >> (n - 1 - i) & 1 for i in range(n))


def bits_to_cell(bits: Sequence[int]) -> int:
    c = 0
    for b in bits:
        c = c << 1 | b
    return c


# ---------------------------------------------------------------- relation

@dataclass(frozen=True)
class Relation:
    side: str
    outputs: tuple[str, ...]
    accept: tuple[frozenset, ...]
    x_size: int = 0
    y_size: int = 0
    n: int = 0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.side not in ("cc", "query"):
            raise MalformedInput(f"unknown side {self.side!r}")
        if not self.outputs:
            raise MalformedInput("relation needs at least one output")
        if self.side == "cc" and (self.x_size < 1 or self.y_size < 1):
            raise MalformedInput("x_size and y_size must be positive")
        if len(self.accept) != self.num_inputs:
            raise MalformedInput("accept table does not cover the input space")
        for s in self.accept:
            for z in s:
                if not 0 <= z < len(self.outputs):
                    raise MalformedInput(f"out-of-range output {z}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.x_size, self.y_size) if self.side == "cc" else (self.n,)

    @property
    def num_inputs(self) -> int:
        return self.x_size * self.y_size if self.side == "cc" else 1 << self.n

    @property
    def num_outputs(self) -> int:
        return len(self.outputs)

    def input_label(self, cell: int) -> str:
        if self.side == "cc":
            return f"({cell // self.y_size},{cell % self.y_size})"
        return "".join(map(str, cell_to_bits(cell, self.n)))

    def cell_of(self, label: str) -> int:
        if self.side == "cc":
            x, y = (int(t) for t in label.strip("()").split(","))
            if not (0 <= x < self.x_size and 0 <= y < self.y_size):
                raise MalformedInput(f"input {label} out of range")
            return x * self.y_size + y
        if len(label) != self.n or set(label) - {"0", "1"}:
            raise MalformedInput(f"bad query input {label!r}")
        return int(label, 2)

    @cached_property
    def accept_masks(self) -> tuple[int, ...]:
        """Per output z: bitmask of cells at which z is accepted."""
        out = [0] * len(self.outputs)
        for cell, s in enumerate(self.accept):
            for z in s:
                out[z] |= 1 << cell
        return tuple(out)

    @property
    def full_mask(self) -> int:
        return (1 << self.num_inputs) - 1

    def block_mask(self, block: Block) -> int:
        if self.side == "cc":
            return block.cell_mask(self.y_size)
        return block.cell_mask(self.n)

    def block_space(self) -> "BlockSpace":
        return block_space(self.side, self.shape)

    # constructors --------------------------------------------------------

    @classmethod
    def from_cc_table(cls, table, outputs=("0", "1"), name="") -> "Relation":
        """``table[x][y]`` is an iterable of accepted output indices."""
        x_size, y_size = len(table), len(table[0])
        acc = tuple(frozenset(table[x][y]) for x in range(x_size) for y in range(y_size))
        return cls("cc", tuple(outputs), acc, x_size=x_size, y_size=y_size, name=name)

    @classmethod
    def from_cc_function(cls, x_size, y_size, fn, outputs=("0", "1"), name="") -> "Relation":
        return cls.from_cc_table([[[fn(x, y)] for y in range(y_size)]
                                  for x in range(x_size)], outputs, name)

    @classmethod
    def from_query_function(cls, n, fn, outputs=("0", "1"), name="") -> "Relation":
        acc = tuple(frozenset([fn(cell_to_bits(c, n))]) for c in range(1 << n))
        return cls("query", tuple(outputs), acc, n=n, name=name)


def load_relation(doc: Union[str, dict]) -> Relation:
    """Validate a relation document (JSON text or parsed dict)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise MalformedInput(f"not JSON: {e}") from None
    if not isinstance(doc, dict):
        raise MalformedInput("relation document must be an object")
    kind = doc.get("kind")
    outputs = doc.get("outputs")
    if not isinstance(outputs, list) or not outputs:
        raise MalformedInput("missing outputs list")
    outputs = tuple(str(o) for o in outputs)
    accept = doc.get("accept")

    def accept_set(entry, where):
        if not isinstance(entry, list) or not all(isinstance(z, int) for z in entry):
            raise MalformedInput(f"accept entry at {where} must be a list of ints")
        if len(set(entry)) != len(entry):
            raise MalformedInput(f"duplicate accept entry at {where}")
        for z in entry:
            if not 0 <= z < len(outputs):
                raise MalformedInput(f"out-of-range output {z} at {where}")
        return frozenset(entry)

    if kind == "cc":
        try:
            x_size, y_size = int(doc["x_size"]), int(doc["y_size"])
        except (KeyError, TypeError, ValueError):
            raise MalformedInput("cc relation needs integer x_size and y_size") from None
        if x_size < 1 or y_size < 1:
            raise MalformedInput("empty input space")
        if (not isinstance(accept, list) or len(accept) != x_size
                or any(not isinstance(r, list) or len(r) != y_size for r in accept)):
            raise MalformedInput("accept must be an x_size by y_size nested list")
        acc = tuple(accept_set(accept[x][y], f"({x},{y})")
                    for x in range(x_size) for y in range(y_size))
        return Relation("cc", outputs, acc, x_size=x_size, y_size=y_size,
                        name=str(doc.get("name", "")))
    if kind == "query":
        try:
            n = int(doc["n"])
        except (KeyError, TypeError, ValueError):
            raise MalformedInput("query relation needs integer n") from None
        if n < 1:
            raise MalformedInput("empty input space")
        if not isinstance(accept, dict) or len(accept) != 1 << n:
            raise MalformedInput("accept must map every n-bit string")
        acc = [None] * (1 << n)
        for key, entry in accept.items():
            if len(key) != n or set(key) - {"0", "1"}:
                raise MalformedInput(f"bad input key {key!r}")
            acc[int(key, 2)] = accept_set(entry, key)
        return Relation("query", outputs, tuple(acc), n=n, name=str(doc.get("name", "")))
    raise MalformedInput(f"unknown relation kind {kind!r}")


def dump_relation(rel: Relation) -> dict:
    doc = {"format_version": 1, "kind": rel.side, "outputs": list(rel.outputs)}
    if rel.name:
        doc["name"] = rel.name
    if rel.side == "cc":
        doc.update(x_size=rel.x_size, y_size=rel.y_size,
                   accept=[[sorted(rel.accept[x * rel.y_size + y]) for y in range(rel.y_size)]
                           for x in range(rel.x_size)])
    else:
        doc.update(n=rel.n, accept={rel.input_label(c): sorted(s)
                                    for c, s in enumerate(rel.accept)})
    return doc


# ---------------------------------------------------------------- block spaces

def enumerate_rectangles(x_size: int, y_size: int, caps: Caps = DEFAULT) -> list[Rectangle]:
    """All (2^a - 1)(2^b - 1) rectangles: row mask ascending, then col mask."""
    check(max(x_size, y_size), caps.grid_side, "grid side")
    return [Rectangle(r, c) for r in range(1, 1 << x_size) for c in range(1, 1 << y_size)]


def enumerate_assignments(n: int, caps: Caps = DEFAULT) -> list[Assignment]:
    """All 3^n assignments: support mask ascending, then bound values."""
    check(n, max(caps.query_lp_n, caps.oracle_n), "n")
    out = []
    for sup in range(1 << n):
        bound = bits_of(sup)
        for v in range(1 << len(bound)):
            out.append(Assignment(sup, mask_of(b for k, b in enumerate(bound) if v >> k & 1)))
    return out


@dataclass(frozen=True)
class BlockSpace:
    """Every block of one input space with cell masks and objective weights.

    ``by_cell[c]`` lists the indices of blocks whose *least* cell is ``c``;
    the canonical partition recursion only ever needs those.
    """
    side: str
    shape: tuple[int, ...]
    blocks: tuple
    masks: tuple[int, ...]
    costs: tuple[int, ...]
    ncells: int
    by_cell: tuple[tuple[int, ...], ...]

    def index(self, block: Block) -> int:
        return self._index[block]

    @cached_property
    def _index(self) -> dict:
        return {b: i for i, b in enumerate(self.blocks)}

    @cached_property
    def arrays(self):
        """(masks, costs, ptr, idx) as int64 arrays for the kernels."""
        ptr = np.zeros(self.ncells + 1, dtype=np.int64)
        idx = []
        for c in range(self.ncells):
            idx.extend(self.by_cell[c])
            ptr[c + 1] = len(idx)
        return (np.array(self.masks, dtype=np.int64), np.array(self.costs, dtype=np.int64),
                ptr, np.array(idx, dtype=np.int64))


def _least_bit(m: int) -> int:
    return (m & -m).bit_length() - 1


@lru_cache(maxsize=32)
def block_space(side: str, shape: tuple[int, ...]) -> BlockSpace:
    if side == "cc":
        x_size, y_size = shape
        blocks = enumerate_rectangles(x_size, y_size, Caps(grid_side=max(shape)))
        masks = [b.cell_mask(y_size) for b in blocks]
        costs = [1] * len(blocks)
        ncells = x_size * y_size
    else:
        (n,) = shape
        blocks = enumerate_assignments(n, Caps(query_lp_n=n, oracle_n=n))
        masks = [b.cell_mask(n) for b in blocks]
        costs = [1 << b.size for b in blocks]
        ncells = 1 << n
    by_cell = [[] for _ in range(ncells)]
    for i, m in enumerate(masks):
        by_cell[_least_bit(m)].append(i)
    return BlockSpace(side, tuple(shape), tuple(blocks), tuple(masks), tuple(costs),
                      ncells, tuple(tuple(b) for b in by_cell))


def _partition_indices(space: BlockSpace) -> Iterator[tuple[int, ...]]:
    full = (1 << space.ncells) - 1
    chosen: list[int] = []

    def rec(covered: int):
        if covered == full:
            yield tuple(chosen)
            return
        cell = _least_bit(~covered & full)
        for b in space.by_cell[cell]:
            if space.masks[b] & covered == 0:
                chosen.append(b)
                yield from rec(covered | space.masks[b])
                chosen.pop()

    yield from rec(0)


def enumerate_rectangle_partitions(x_size: int, y_size: int,
                                   caps: Caps = DEFAULT) -> Iterator[tuple[Rectangle, ...]]:
    """Every partition of the grid into rectangles, each exactly once.

    Canonical recursion: cover the least uncovered cell (row-major) with each
    rectangle that contains it and avoids covered cells. Blocks come out
    ordered by their least cell.
    """
    check(x_size * y_size, caps.cells, "grid cells")
    space = block_space("cc", (x_size, y_size))
    for p in _partition_indices(space):
        yield tuple(space.blocks[i] for i in p)


def enumerate_subcube_partitions(n: int, caps: Caps = DEFAULT) -> Iterator[tuple[Assignment, ...]]:
    """Every partition of {0,1}^n into subcubes, each exactly once."""
    check(n, caps.query_n, "query n")
    if n == 0:
        yield (Assignment(0, 0),)
        return
    space = block_space("query", (n,))
    for p in _partition_indices(space):
        yield tuple(space.blocks[i] for i in p)


# ---------------------------------------------------------------- partitions

@dataclass(frozen=True)
class LabeledBlock:
    z: int
    block: Block


@dataclass(frozen=True)
class LabeledPartition:
    side: str
    shape: tuple[int, ...]
    blocks: tuple[LabeledBlock, ...]

    @classmethod
    def build(cls, side: str, shape, pairs) -> "LabeledPartition":
        """Canonicalize (sort by least cell) and validate."""
        shape = tuple(shape)
        space_cells = _ncells(side, shape)
        items = [LabeledBlock(z, b) for z, b in pairs]
        masks = [_mask(side, shape, lb.block) for lb in items]
        covered = 0
        for m in masks:
            if m & covered:
                raise PartitionError("blocks overlap")
            covered |= m
        if covered != (1 << space_cells) - 1:
            raise PartitionError("blocks do not cover the input space")
        order = sorted(range(len(items)), key=lambda i: _least_bit(masks[i]))
        return cls(side, shape, tuple(items[i] for i in order))

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    @property
    def max_assignment_size(self) -> int:
        return max(lb.block.size for lb in self.blocks)

    @property
    def cost(self) -> int:
        """Objective weight: n_P (cc) or the sum of 2^|A| (query)."""
        if self.side == "cc":
            return len(self.blocks)
        return sum(1 << lb.block.size for lb in self.blocks)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(_mask(self.side, self.shape, lb.block) for lb in self.blocks)

    @cached_property
    def label_at(self) -> tuple[int, ...]:
        out = [0] * _ncells(self.side, self.shape)
        for lb, m in zip(self.blocks, self.masks):
            for c in bits_of(m):
                out[c] = lb.z
        return tuple(out)

    def correct_mask(self, rel: Relation) -> int:
        """Cells whose containing block carries an accepted label."""
        m = 0
        for lb, bm in zip(self.blocks, self.masks):
            m |= bm & rel.accept_masks[lb.z]
        return m


def _ncells(side, shape) -> int:
    return shape[0] * shape[1] if side == "cc" else 1 << shape[0]


def _mask(side, shape, block) -> int:
    return block.cell_mask(shape[1]) if side == "cc" else block.cell_mask(shape[0])


def block_at(partition: LabeledPartition, cell: int) -> LabeledBlock:
    """The unique labeled block containing ``cell``."""
    hits = [lb for lb, m in zip(partition.blocks, partition.masks) if m >> cell & 1]
    if len(hits) != 1:
        raise PartitionError(f"input {cell} lies in {len(hits)} blocks")
    return hits[0]


def count_partitions(side: str, shape, caps: Caps = DEFAULT) -> dict[int, int]:
    """Histogram {block count: number of unlabeled partitions}."""
    from . import kernels
    _check_partition_caps(side, shape, caps)
    return kernels.partition_histogram(block_space(side, tuple(shape)))


def _check_partition_caps(side, shape, caps):
    if side == "cc":
        check(shape[0] * shape[1], caps.cells, "grid cells")
    else:
        check(shape[0], caps.query_n, "query n")


def labeled_partition_count(rel: Relation, caps: Caps = DEFAULT) -> int:
    hist = count_partitions(rel.side, rel.shape, caps)
    z = rel.num_outputs
    return sum(cnt * z ** k for k, cnt in hist.items())


def enumerate_labeled_partitions(rel: Relation, caps: Caps = DEFAULT) -> Iterator[LabeledPartition]:
    """Every (partition, labeling) pair; labels vary independently per block,
    last block fastest."""
    total = labeled_partition_count(rel, caps)
    check(total, caps.labeled, "labeled partitions")
    parts = (enumerate_rectangle_partitions(rel.x_size, rel.y_size, caps) if rel.side == "cc"
             else enumerate_subcube_partitions(rel.n, caps))
    nz = rel.num_outputs
    for blocks in parts:
        k = len(blocks)
        for code in range(nz ** k):
            labels = []
            for _ in range(k):
                code, z = divmod(code, nz)
                labels.append(z)
            labels.reverse()
            yield LabeledPartition(rel.side, rel.shape,
                                   tuple(LabeledBlock(z, b) for z, b in zip(labels, blocks)))
