"""Time the partition kernels with numba against the interpreted fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Each backend runs in its own process (the switch is the PBL_ACCEL
environment variable, read at import). numba timings exclude the first,
compiling call.
"""
import argparse
import json
import os
import subprocess
import sys
import time


def cases():
    import numpy as np

    from pbl import kernels, named
    from pbl.relation import block_space

    eq3 = named.equality(3)
    par3 = named.parity(3)
    s33 = block_space("cc", (3, 3))
    s34 = block_space("cc", (3, 4))
    q3 = block_space("query", (3,))
    rng = np.random.default_rng(0)
    weights = [int(w) for w in rng.integers(-50, 50, len(s33.masks))]
    return [
        ("histogram 3x3", lambda: kernels.partition_histogram(s33)),
        ("histogram 3x4", lambda: kernels.partition_histogram(s34)),
        ("signature scan EQ 3x3", lambda: kernels.scan_signatures(s33, eq3.accept_masks)),
        ("signature scan parity n=3", lambda: kernels.scan_signatures(q3, par3.accept_masks)),
        ("min-weight DP 3x3", lambda: kernels.min_weight(s33, weights)),
    ]


def child(repeat):
    from pbl import _accel
    out = {"numba": _accel.USE_NUMBA, "times": {}}
    for name, fn in cases():
        fn()                                  # warm-up (compiles under numba)
        best = float("inf")
        for _ in range(repeat):
            t = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t)
        out["times"][name] = best
    print(json.dumps(out))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        child(args.repeat)
        return
    results = {}
    for mode in ("numba", "python"):
        env = dict(os.environ, PBL_ACCEL=mode)
        proc = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(args.repeat)],
                              env=env, capture_output=True, text=True)
        if proc.returncode:
            print(f"{mode} backend failed:\n{proc.stderr}", file=sys.stderr)
            continue
        results[mode] = json.loads(proc.stdout.strip().splitlines()[-1])["times"]
    names = list(next(iter(results.values())))
    print(f"{'kernel':28s} {'numba (s)':>10s} {'python (s)':>11s} {'speedup':>8s}")
    for name in names:
        nb = results.get("numba", {}).get(name)
        py = results.get("python", {}).get(name)
        ratio = f"{py / nb:8.1f}" if nb and py else "       -"
        fmt = lambda t: f"{t:10.4f}" if t is not None else "         -"
        print(f"{name:28s} {fmt(nb)} {fmt(py):>11s} {ratio}")


if __name__ == "__main__":
    main()
