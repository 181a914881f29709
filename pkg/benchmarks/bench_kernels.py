"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Micro benchmarks call both modules directly on the same random inputs; the
end-to-end rows run one engine query in a subprocess per backend (the backend
is fixed at import, so ``ZONECHECK_PURE=1`` selects the fallback).
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

import numpy as np

from zonecheck import _dbmpy

try:
    from zonecheck import _dbmcore
except ImportError:
    _dbmcore = None

INF = _dbmpy.INF


def random_dbm(rng, dim, k=10):
    m = [INF] * (dim * dim)
    for i in range(dim):
        m[i * dim + i] = 1
    for i in range(1, dim):
        m[i] = rng.choice([1, -2 * rng.randint(0, k) + 1])  # 0 - x_i <= -c
        m[i * dim] = 2 * rng.randint(k, 3 * k) + rng.randint(0, 1)
    for _ in range(dim):
        i, j = rng.randrange(1, dim), rng.randrange(1, dim)
        if i != j:
            m[i * dim + j] = 2 * rng.randint(0, 2 * k) + 1
    out = _dbmpy.close(tuple(m), dim)
    return out if out is not None else random_dbm(rng, dim, k)


def random_mdp(rng, n, acts=2, fan=3):
    state_start, act_start, succ, prob = [0], [0], [], []
    for s in range(n):
        for _ in range(acts):
            ts = rng.sample(range(n), fan)
            w = np.array([rng.random() for _ in ts])
            w /= w.sum()
            succ.extend(ts)
            prob.extend(w.tolist())
            act_start.append(len(succ))
        state_start.append(len(act_start) - 1)
    fixed = np.zeros(n, dtype=np.uint8)
    fixed[: n // 10] = 1
    values = np.zeros(n)
    values[: n // 20] = 1.0
    return (
        np.array(state_start, dtype=np.int64),
        np.array(act_start, dtype=np.int64),
        np.array(succ, dtype=np.int64),
        np.array(prob),
        fixed,
        values,
    )


def micro(repeat):
    rng = random.Random(1)
    rows = []
    for dim in (3, 5, 8):
        ds = [random_dbm(rng, dim) for _ in range(200)]
        pairs = list(zip(ds, ds[1:]))
        cases = {
            "close": lambda mod: [mod.close(d, dim) for d in ds],
            "intersect": lambda mod: [mod.intersect(a, b, dim) for a, b in pairs],
            "includes": lambda mod: [mod.includes(a, b) for a, b in pairs],
            "down": lambda mod: [mod.down(d, dim) for d in ds],
            "reset": lambda mod: [mod.reset(d, dim, 1) for d in ds],
        }
        for name, fn in cases.items():
            rows.append((f"{name} dim={dim} x200", _time(fn, repeat)))
    mdp = random_mdp(rng, 2000)

    def vi(mod):
        ss, as_, su, pr, fx, vals = mdp
        if mod is _dbmpy:
            mod.value_iterate(ss, as_, su, pr, fx, list(vals), True, 1e-9, 10**6)
        else:
            mod.value_iterate(ss, as_, su, pr, fx, vals.copy(), True, 1e-9, 10**6)

    rows.append(("value_iterate n=2000", _time(vi, max(1, repeat // 5))))
    return rows


def _time(fn, repeat):
    py = min(timeit.repeat(lambda: fn(_dbmpy), number=1, repeat=repeat))
    cy = None if _dbmcore is None else min(timeit.repeat(lambda: fn(_dbmcore), number=1, repeat=repeat))
    return py, cy


QUERIES = [
    ("example", "Pmin=? [ F<=10 done ]"),
    ("csma1", "Pmin=? [ F<=24 done ]"),
    ("firewire", "Pmin=? [ F<=80 done ]"),
]


def end_to_end():
    rows = []
    for model, prop in QUERIES:
        times = []
        for pure in ("1", "0"):
            env = dict(os.environ, ZONECHECK_PURE=pure)
            code = (
                "import time,zonecheck.cli as c;t=time.perf_counter();"
                f"c.main(['check',{model!r},{prop!r},'--format','json']);"
                "import sys;print(time.perf_counter()-t,file=sys.stderr)"
            )
            r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
            times.append(float(r.stderr.strip().splitlines()[-1]))
        rows.append((f"{model} {prop}", (times[0], times[1] if _dbmcore is not None else None)))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args()
    rows = micro(args.repeat)
    if not args.skip_e2e:
        rows += end_to_end()
    print(f"{'case':45} {'python':>10} {'cython':>10} {'speedup':>8}")
    for name, (py, cy) in rows:
        if cy is None:
            print(f"{name:45} {py:10.4f} {'-':>10} {'-':>8}")
        else:
            print(f"{name:45} {py:10.4f} {cy:10.4f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
