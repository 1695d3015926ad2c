"""Compare the numba kernels with the numpy fallback on representative workloads.

Each backend runs in its own interpreter because the backend is fixed at
import time by ITBCODES_BACKEND. Numba timings exclude JIT compilation: every
workload runs once as warm-up before it is timed.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from itbcodes.catalog import load_code
from itbcodes.decoder import DecoderConfig
from itbcodes.distance import exhaustive_logical_search, random_is_upper_bound
from itbcodes.linalg import rank
from itbcodes.montecarlo import run_code_capacity
from itbcodes.algebra import Torus
from itbcodes.search import SearchSpec, run_search

repeat = int(sys.argv[1])
c144 = load_code("bb_144_12_12")
c84 = load_code("84_6_10")
c54 = load_code("54_8_6")

work = {
    "rank H_X x100 (144)": lambda: [rank(c144.hx) for _ in range(100)],
    "random IS 2000 it (84)": lambda: random_is_upper_bound(c84, "X", 2000, seed=0, threads=1),
    "exhaustive w<=5 (54)": lambda: exhaustive_logical_search(c54, "X", 5),
    "BP-OSD 2000 shots (54, p=0.05)": lambda: run_code_capacity(c54, 0.05, 2000, DecoderConfig(), seed=0),
    "search + triage, 500 pairs (3,3,3)": lambda: run_search(
        SearchSpec(Torus(3, 3, 3), pair_range=(0, 500), certify="none", seed=0)),
}
out = {}
for name, fn in work.items():
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out[name] = best
print(json.dumps(out))
"""


def run(backend: str, repeat: int) -> dict[str, float]:
    env = dict(os.environ, ITBCODES_BACKEND=backend, ITBCODES_THREADS="1")
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast, slow = run("numba", args.repeat), run("numpy", args.repeat)
    width = max(map(len, fast))
    print(f"{'workload':<{width}}  {'numba s':>9}  {'numpy s':>9}  {'speedup':>8}")
    for name in fast:
        print(f"{name:<{width}}  {fast[name]:9.4f}  {slow[name]:9.4f}  {slow[name] / fast[name]:7.1f}x")


if __name__ == "__main__":
    main()
