"""Compiled vs pure-Python polynomial kernels.

Runs the same workloads through ``dualjet.symbolic._ckernels`` and
``dualjet.symbolic._pykernels`` and reports the median time of each, then
times one end-to-end curvature and Bianchi computation per backend in a
subprocess (the backend is fixed at import).

    python3 benchmarks/bench_kernels.py [--repeat 5] [--no-end-to-end]
"""

import argparse
import os
import random
import statistics
import subprocess
import sys
import time

import numpy as np

from dualjet.chart import JetChart
from dualjet.connections import random_polynomial
from dualjet.symbolic import _pykernels
from dualjet.symbolic.expr import symbol_id

try:
    from dualjet.symbolic import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _polys(count, seed=0):
    ch = JetChart(2, 2)
    coords = list(ch.T) + list(ch.X) + [p for row in ch.P for p in row]
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        e = random_polynomial(rng, coords, degree=4, max_terms=8)
        out.append(dict(e._p))
    return out, ch


def _workloads(k):
    polys, ch = _polys(60)
    ids = [symbol_id(s) for s in ch.coordinate_names]
    derivs = {ids[0]: {(): 1}, ids[2]: {(ids[3], 1): 2}}
    vals = {i: np.random.default_rng(i).uniform(0.2, 1.2, 2000) for i in ids}
    pairs = [(polys[i], polys[(i * 7 + 3) % len(polys)]) for i in range(len(polys))]

    def mul():
        for p, q in pairs:
            k.poly_mul(p, q)

    def addmul():
        acc = {}
        for p, q in pairs:
            k.poly_addmul(acc, p, q, 3)

    def diff():
        for p, q in pairs:
            k.poly_diff(k.poly_mul(p, q), derivs)

    def evalp():
        for p in polys:
            k.poly_eval_points(p, vals, 2000)

    return {"poly_mul": mul, "poly_addmul": addmul, "poly_diff": diff, "poly_eval_points": evalp}


def _time(fn, repeat):
    fn()
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return statistics.median(ts)


_E2E = """
import time
from dualjet.chart import JetChart
from dualjet.connections import random_cartan
from dualjet.identity_verifier import bianchi_residuals
from dualjet.symbolic import BACKEND
t0 = time.perf_counter()
r = bianchi_residuals(random_cartan(JetChart(2, 2), seed=1))
assert r.passed
print(BACKEND, time.perf_counter() - t0)
"""


def end_to_end():
    out = {}
    for pure in ("0", "1"):
        env = dict(os.environ, DUALJET_PURE_PYTHON=pure)
        res = subprocess.run([sys.executable, "-c", _E2E], env=env, capture_output=True, text=True, check=True)
        backend, secs = res.stdout.split()
        out[backend] = float(secs)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; only the pure-Python timings are shown")
    py = _workloads(_pykernels)
    cy = _workloads(_ckernels) if _ckernels else {}
    print(f"{'kernel':<18}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in py.items():
        tp = _time(fn, args.repeat) * 1e3
        if name in cy:
            tc = _time(cy[name], args.repeat) * 1e3
            print(f"{name:<18}{tp:>12.2f}{tc:>12.2f}{tp / tc:>9.1f}x")
        else:
            print(f"{name:<18}{tp:>12.2f}{'-':>12}{'-':>10}")
    if not args.no_end_to_end:
        e = end_to_end()
        line = "  ".join(f"{k} {v:.2f}s" for k, v in sorted(e.items()))
        print(f"bianchi suite, random Cartan m=n=2: {line}")
        if "cython" in e and "python" in e:
            print(f"end-to-end speedup {e['python'] / e['cython']:.1f}x")


if __name__ == "__main__":
    main()
