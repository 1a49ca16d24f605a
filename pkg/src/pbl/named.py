"""Small named relations used by the tests, the acceptance suite and the CLI."""
from __future__ import annotations

import random

from .relation import Relation


def xor1() -> Relation:
    return Relation.from_cc_function(2, 2, lambda x, y: x ^ y, name="XOR_1")


def and1() -> Relation:
    return Relation.from_cc_function(2, 2, lambda x, y: x & y, name="AND_1")


def constant(x_size: int = 2, y_size: int = 2) -> Relation:
    return Relation.from_cc_function(x_size, y_size, lambda x, y: 0,
                                     name=f"CONST_{x_size}x{y_size}")


def equality(k: int) -> Relation:
    return Relation.from_cc_function(k, k, lambda x, y: int(x == y), name=f"EQ_{k}")


def greater_than(k: int) -> Relation:
    return Relation.from_cc_function(k, k, lambda x, y: int(x > y), name=f"GT_{k}")


def sum_mod(k: int, q: int) -> Relation:
    return Relation.from_cc_function(k, k, lambda x, y: (x + y) % q,
                                     outputs=tuple(str(i) for i in range(q)),
                                     name=f"SUMMOD{q}_{k}")


def parity(n: int) -> Relation:
    return Relation.from_query_function(n, lambda b: sum(b) % 2, name=f"PARITY_{n}")


def or_n(n: int) -> Relation:
    return Relation.from_query_function(n, lambda b: int(any(b)), name=f"OR_{n}")


def and_n(n: int) -> Relation:
    return Relation.from_query_function(n, lambda b: int(all(b)), name=f"AND_{n}")


def majority3() -> Relation:
    return Relation.from_query_function(3, lambda b: int(sum(b) >= 2), name="MAJ_3")


def query_constant(n: int) -> Relation:
    return Relation.from_query_function(n, lambda b: 0, name=f"QCONST_{n}")


def random_cc(x_size: int, y_size: int, seed: int, num_outputs: int = 2,
              multi: float = 0.3) -> Relation:
    """Each input accepts one random output, plus each other output with
    probability ``multi``."""
    rng = random.Random(seed)
    table = []
    for _ in range(x_size):
        row = []
        for _ in range(y_size):
            z0 = rng.randrange(num_outputs)
            row.append(sorted({z0} | {z for z in range(num_outputs) if rng.random() < multi}))
        table.append(row)
    return Relation.from_cc_table(table, tuple(str(i) for i in range(num_outputs)),
                                  name=f"RAND_{x_size}x{y_size}_s{seed}")


def random_query(n: int, seed: int, num_outputs: int = 2, multi: float = 0.3) -> Relation:
    rng = random.Random(seed)
    acc = []
    for _ in range(1 << n):
        z0 = rng.randrange(num_outputs)
        acc.append(frozenset({z0} | {z for z in range(num_outputs) if rng.random() < multi}))
    return Relation("query", tuple(str(i) for i in range(num_outputs)), tuple(acc), n=n,
                    name=f"QRAND_{n}_s{seed}")


REGISTRY = {
    "xor1": xor1, "and1": and1, "const": constant,
    "eq2": lambda: equality(2), "eq3": lambda: equality(3), "eq4": lambda: equality(4),
    "gt3": lambda: greater_than(3), "summod3": lambda: sum_mod(3, 3),
    "parity1": lambda: parity(1), "parity2": lambda: parity(2), "parity3": lambda: parity(3),
    "or2": lambda: or_n(2), "or3": lambda: or_n(3), "maj3": majority3,
}
