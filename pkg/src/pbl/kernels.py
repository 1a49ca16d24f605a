"""Hot loops over the canonical partition recursion.

All kernels walk partitions with an explicit stack: at each depth the least
uncovered cell is covered by every block whose least cell it is and which
avoids the covered set. Blocks enter in increasing least-cell order, which is
the canonical block order of a partition.

Each ``_*_kernel`` is compiled with numba when available (see ``_accel``);
``PBL_ACCEL=python`` runs the identical source interpreted.
"""
from __future__ import annotations

import numpy as np

from ._accel import jit

INF = np.int64(1) << 62


@jit
def _lowest_zero(cov, ncells):
    c = 0
    while c < ncells and (cov >> c) & 1:
        c += 1
    return c


@jit
def _histogram_kernel(masks, ptr, idx, ncells, hist):
    full = (np.int64(1) << ncells) - 1
    cov = np.zeros(ncells + 1, np.int64)
    pos = np.zeros(ncells + 1, np.int64)
    cell = np.zeros(ncells + 1, np.int64)
    d = 0
    pos[0] = ptr[0]
    total = 0
    while True:
        found = -1
        while pos[d] < ptr[cell[d] + 1]:
            b = idx[pos[d]]
            pos[d] += 1
            if masks[b] & cov[d] == 0:
                found = b
                break
        if found < 0:
            d -= 1
            if d < 0:
                break
            continue
        nc = cov[d] | masks[found]
        if nc == full:
            hist[d + 1] += 1
            total += 1
            continue
        d += 1
        cov[d] = nc
        cell[d] = _lowest_zero(nc, ncells)
        pos[d] = ptr[cell[d]]
    return total


@jit
def _scan_kernel(masks, costs, ptr, idx, ncells, dl_count, dl_mask,
                 best_cost, best_n, best_blocks, best_pick):
    """Cheapest labeled partition for every correctness mask.

    ``dl_mask[b, k]`` is the k-th distinct correct-cell mask block ``b`` can
    take over the labels; labelings are walked as an odometer, last block
    fastest. Strict improvement keeps the canonical-first witness on ties.
    Returns the number of (partition, distinct-label choice) pairs visited.
    """
    full = (np.int64(1) << ncells) - 1
    cov = np.zeros(ncells + 1, np.int64)
    pos = np.zeros(ncells + 1, np.int64)
    cell = np.zeros(ncells + 1, np.int64)
    chosen = np.zeros(ncells + 1, np.int64)
    odo = np.zeros(ncells + 1, np.int64)
    d = 0
    pos[0] = ptr[0]
    visited = 0
    while True:
        found = -1
        while pos[d] < ptr[cell[d] + 1]:
            b = idx[pos[d]]
            pos[d] += 1
            if masks[b] & cov[d] == 0:
                found = b
                break
        if found < 0:
            d -= 1
            if d < 0:
                break
            continue
        chosen[d] = found
        nc = cov[d] | masks[found]
        if nc == full:
            k = d + 1
            cost = 0
            for i in range(k):
                cost += costs[chosen[i]]
                odo[i] = 0
            while True:
                visited += 1
                m = 0
                for i in range(k):
                    m |= dl_mask[chosen[i], odo[i]]
                if cost < best_cost[m]:
                    best_cost[m] = cost
                    best_n[m] = k
                    for i in range(k):
                        best_blocks[m, i] = chosen[i]
                        best_pick[m, i] = odo[i]
                i = k - 1
                while i >= 0:
                    odo[i] += 1
                    if odo[i] < dl_count[chosen[i]]:
                        break
                    odo[i] = 0
                    i -= 1
                if i < 0:
                    break
            continue
        d += 1
        cov[d] = nc
        cell[d] = _lowest_zero(nc, ncells)
        pos[d] = ptr[cell[d]]
    return visited


@jit
def _undominated_kernel(best_cost, ncells, keep):
    """keep[m] iff mask m is attained and strictly cheaper than every
    attained strict superset mask."""
    size = np.int64(1) << ncells
    sup = best_cost.copy()
    for i in range(ncells):
        bit = np.int64(1) << i
        for m in range(size - 1, -1, -1):
            if m & bit == 0 and sup[m | bit] < sup[m]:
                sup[m] = sup[m | bit]
    for m in range(size):
        if best_cost[m] >= INF:
            continue
        strict = INF
        for i in range(ncells):
            bit = np.int64(1) << i
            if m & bit == 0 and sup[m | bit] < strict:
                strict = sup[m | bit]
        keep[m] = best_cost[m] < strict


@jit
def _min_weight_kernel(masks, ptr, idx, weights, ncells, g, choice):
    """g[cov] = least total weight of a partition of the complement of cov."""
    full = (np.int64(1) << ncells) - 1
    for cov in range(full - 1, -1, -1):
        c = _lowest_zero(cov, ncells)
        bb = -1
        best = g[full]
        for p in range(ptr[c], ptr[c + 1]):
            b = idx[p]
            if masks[b] & cov == 0:
                val = weights[b] + g[cov | masks[b]]
                if bb < 0 or val < best:
                    best = val
                    bb = b
        g[cov] = best
        choice[cov] = bb


# ---------------------------------------------------------------- wrappers

def partition_histogram(space) -> dict[int, int]:
    masks, _, ptr, idx = space.arrays
    hist = np.zeros(space.ncells + 2, np.int64)
    _histogram_kernel(masks, ptr, idx, space.ncells, hist)
    return {k: int(v) for k, v in enumerate(hist) if v}


def distinct_label_masks(space, accept_masks):
    """Per block, the distinct correct-cell masks over labels (first label
    wins) as padded arrays plus the label that realizes each."""
    nb = len(space.masks)
    nz = len(accept_masks)
    count = np.zeros(nb, np.int64)
    dmask = np.zeros((nb, nz), np.int64)
    dlabel = np.zeros((nb, nz), np.int64)
    for b, bm in enumerate(space.masks):
        seen = {}
        for z, am in enumerate(accept_masks):
            m = bm & am
            if m not in seen:
                seen[m] = z
                dmask[b, len(seen) - 1] = m
                dlabel[b, len(seen) - 1] = z
        count[b] = len(seen)
    return count, dmask, dlabel


def scan_signatures(space, accept_masks):
    """Run the signature scan; returns (best_cost, best_n, best_blocks,
    best_labels, visited) where best_labels holds actual output labels."""
    masks, costs, ptr, idx = space.arrays
    count, dmask, dlabel = distinct_label_masks(space, accept_masks)
    size = 1 << space.ncells
    best_cost = np.full(size, INF, np.int64)
    best_n = np.zeros(size, np.int64)
    best_blocks = np.zeros((size, space.ncells), np.int64)
    best_pick = np.zeros((size, space.ncells), np.int64)
    visited = _scan_kernel(masks, costs, ptr, idx, space.ncells, count, dmask,
                           best_cost, best_n, best_blocks, best_pick)
    best_labels = np.take_along_axis(dlabel[best_blocks], best_pick[:, :, None], 2)[:, :, 0]
    return best_cost, best_n, best_blocks, best_labels, int(visited)


def undominated(best_cost, ncells) -> np.ndarray:
    keep = np.zeros(len(best_cost), np.bool_)
    _undominated_kernel(best_cost, ncells, keep)
    return keep


def min_weight(space, weights):
    """Least-weight partition for integer block weights (any size).

    Uses the int64 kernel when the sums provably fit, else the interpreted
    kernel over Python ints. Returns (value, block indices in canonical order).
    """
    masks, _, ptr, idx = space.arrays
    size = 1 << space.ncells
    bound = (space.ncells + 1) * max((abs(w) for w in weights), default=0)
    if bound < (1 << 62):
        w = np.array(weights, dtype=np.int64)
        g = np.zeros(size, np.int64)
        kernel = _min_weight_kernel
    else:
        w = np.array(list(weights), dtype=object)
        g = np.array([0] * size, dtype=object)
        kernel = _min_weight_kernel.py_func
    choice = np.zeros(size, np.int64)
    kernel(masks, ptr, idx, w, space.ncells, g, choice)
    full = size - 1
    cov, picked = 0, []
    while cov != full:
        b = int(choice[cov])
        picked.append(b)
        cov |= space.masks[b]
    return int(g[0]), picked
