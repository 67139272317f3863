"""Compare the numba and pure-numpy kernel backends.

Kernel timings run in-process against both backends. End-to-end workloads run
in a child process per backend, since the backend is fixed at import time by
the SPINMUR_BACKEND environment variable.

    python3 benchmarks/bench_backends.py [--repeat 5] [--json out.json]
"""
import argparse
import json
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from spinmur import kernels
from spinmur.families import target_pair
from spinmur.minimax import binary_arrays
from spinmur.qubit import marginals, spin_observable
from spinmur.verify import random_biobservable

WORKLOADS = {
    "incompatibility_degree(pi/3)": "incompatibility_degree(math.pi / 3)",
    "curve(steps=25)": "[incompatibility_degree(a) for a in np.linspace(0, math.pi, 25)]",
    "global_minimax(pi/2, restarts=16)": "global_minimax(math.pi / 2, restarts=16)",
}

CHILD = """
import math, sys, timeit, json
import numpy as np
from spinmur import kernels
from spinmur.minimax import incompatibility_degree, global_minimax
stmt, repeat = sys.argv[1], int(sys.argv[2])
eval(stmt)  # warm-up (includes compilation or cache load)
best = min(timeit.repeat(stmt, globals=globals(), number=1, repeat=repeat))
print(json.dumps({"backend": kernels.backend.name, "seconds": best}))
"""


def instances(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        p = target_pair(rng.uniform(0, math.pi))
        targets = [spin_observable(p.a), spin_observable(p.b)]
        out.append(binary_arrays(targets, marginals(random_biobservable(rng))))
    return out


def kernel_timings(repeat):
    cases = instances(20)
    rows = {}
    for name in ("numpy", "numba"):
        be = kernels.get_backend(name)
        pts = be.sphere_grid(32, 64)
        be.error_batch(*cases[0], pts)
        kernels.sphere_sup(*cases[0], be=be)
        grid = min(timeit.repeat(lambda: [be.error_batch(*c, pts) for c in cases], number=1, repeat=repeat))
        sup = min(timeit.repeat(lambda: [kernels.sphere_sup(*c, be=be) for c in cases], number=1, repeat=repeat))
        rows[name] = {"error_batch 32x64 grid": grid / len(cases), "sphere_sup": sup / len(cases)}
    return rows


def workload_timings(repeat):
    rows = {"numpy": {}, "numba": {}}
    for label, stmt in WORKLOADS.items():
        for name in rows:
            env = dict(os.environ, SPINMUR_BACKEND=name)
            out = subprocess.run([sys.executable, "-c", CHILD, stmt, str(repeat)], env=env,
                                 capture_output=True, text=True, check=True)
            res = json.loads(out.stdout)
            assert res["backend"] == name
            rows[name][label] = res["seconds"]
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args()
    table = kernel_timings(args.repeat)
    for name, rows in workload_timings(max(1, args.repeat // 2)).items():
        table[name].update(rows)
    width = max(len(k) for k in table["numpy"])
    print(f"{'case':<{width}}  {'numpy [s]':>11}  {'numba [s]':>11}  {'speedup':>8}")
    for case in table["numpy"]:
        a, b = table["numpy"][case], table["numba"][case]
        print(f"{case:<{width}}  {a:>11.3e}  {b:>11.3e}  {a / b:>7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(table, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
