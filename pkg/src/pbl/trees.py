"""Communication protocol trees and decision trees."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .relation import cell_to_bits


@dataclass(frozen=True)
class Leaf:
    out: int


@dataclass(frozen=True)
class Speak:
    speaker: str                 # "A" (rows) or "B" (columns)
    send: tuple[int, ...]        # bit sent, indexed by the speaker's input
    on0: "CCTree"
    on1: "CCTree"


@dataclass(frozen=True)
class Query:
    var: int
    on0: "DTree"
    on1: "DTree"


CCTree = Union[Leaf, Speak]
DTree = Union[Leaf, Query]


def depth(tree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(tree.on0), depth(tree.on1))


def run_cc(tree: CCTree, x: int, y: int) -> int:
    while not isinstance(tree, Leaf):
        bit = tree.send[x if tree.speaker == "A" else y]
        tree = tree.on1 if bit else tree.on0
    return tree.out


def run_query(tree: DTree, bits) -> int:
    while not isinstance(tree, Leaf):
        tree = tree.on1 if bits[tree.var] else tree.on0
    return tree.out


def run_tree(tree, side: str, shape, cell: int) -> int:
    if side == "cc":
        return run_cc(tree, cell // shape[1], cell % shape[1])
    return run_query(tree, cell_to_bits(cell, shape[0]))
