"""Size caps for the exhaustive enumerations.

Defaults keep every command desk-fast. ``allow_large`` lifts the defaults to
the hard limits; the ``PBL_CAPS`` environment variable (``cells=6,query_n=2``)
may only lower them.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace


class CapExceeded(Exception):
    """An input is larger than the active caps allow."""


@dataclass(frozen=True)
class Caps:
    # cc: cells of a grid whose rectangle partitions are enumerated
    cells: int = 9
    # cc: grid side for rectangle-only work (prt LP, det_cc)
    grid_side: int = 4
    # query: n for subcube-partition enumeration
    query_n: int = 3
    # query: n for assignment-only work (prt LP)
    query_lp_n: int = 5
    # query: n for the deterministic query oracle
    oracle_n: int = 10
    # labeled partitions materialized by the direct pprt formulation
    direct_labeled: int = 8000
    # labeled partitions streamed by any one scan
    labeled: int = 2_000_000_000


HARD = Caps(cells=16, grid_side=6, query_n=4, query_lp_n=7, oracle_n=12,
            direct_labeled=50_000, labeled=2_000_000_000)
DEFAULT = Caps()


def _parse_env(text: str) -> dict[str, int]:
    out = {}
    names = {f.name for f in fields(Caps)}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in names:
            raise ValueError(f"PBL_CAPS: unknown cap {key!r}")
        out[key] = int(val)
    return out


def active_caps(allow_large: bool = False, env: str | None = None) -> Caps:
    base = HARD if allow_large else DEFAULT
    text = os.environ.get("PBL_CAPS", "") if env is None else env
    lowered = {k: min(v, getattr(base, k)) for k, v in _parse_env(text).items()}
    return replace(base, **lowered)


def check(value: int, limit: int, what: str) -> None:
    if value > limit:
        raise CapExceeded(f"{what} = {value} exceeds cap {limit}"
                          " (use --allow-large for the hard limit)")
