"""Compare the compiled and numpy kernel backends.

    python3 bench/bench_kernels.py [--repeat 5] [--json out.json]

Each case times Wick convolution, Wick correlation (the adjoint) and a single
Wick product on a random dense signal, and checks the two backends agree.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from wicksys._backend import backends
from wicksys.multiindex import TruncationPolicy

CASES = [
    # (J, D, taps, input length, density)
    (3, 4, 8, 32, 1.0),
    (4, 4, 16, 64, 1.0),
    (4, 5, 16, 64, 0.3),
    (6, 4, 32, 128, 0.2),
]


def _signal(rng, n, B, density):
    x = rng.standard_normal((n, B)) + 1j * rng.standard_normal((n, B))
    x[rng.random((n, B)) > density] = 0
    return np.ascontiguousarray(x)


def run(repeat=5, seed=0):
    mods = backends()
    rows = []
    rng = np.random.default_rng(seed)
    for J, D, nh, nu, density in CASES:
        table = TruncationPolicy(J, D).basis().add_table
        B = table.shape[0]
        h, u = _signal(rng, nh, B, density), _signal(rng, nu, B, density)
        y = _signal(rng, nh + nu - 1, B, 1.0)
        ops = {
            "convolve": lambda m: m.wick_convolve_dense(h, u, table),
            "correlate": lambda m: m.wick_correlate_dense(h, y, table, nu),
            "product": lambda m: m.wick_dense(h[0], u[0], table),
        }
        for op, fn in ops.items():
            times = {}
            outs = {}
            for name, mod in mods.items():
                outs[name] = fn(mod)
                times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=repeat))
            ref = outs["python"][0] if isinstance(outs["python"], tuple) else outs["python"]
            err = 0.0
            for name, out in outs.items():
                out = out[0] if isinstance(out, tuple) else out
                err = max(err, float(np.max(np.abs(out - ref), initial=0.0)))
            rows.append({"J": J, "D": D, "B": B, "taps": nh, "len": nu, "density": density, "op": op,
                         "times": times, "max_abs_diff": err})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="write raw timings here")
    args = ap.parse_args(argv)
    rows = run(args.repeat)
    names = sorted(rows[0]["times"])
    head = f"{'J':>2} {'D':>2} {'B':>5} {'taps':>4} {'len':>4} {'op':<9}" + "".join(f"{n:>12}" for n in names)
    if "cython" in names:
        head += f"{'speedup':>9}"
    print(head)
    for r in rows:
        line = f"{r['J']:>2} {r['D']:>2} {r['B']:>5} {r['taps']:>4} {r['len']:>4} {r['op']:<9}"
        line += "".join(f"{r['times'][n] * 1e3:>10.2f}ms" for n in names)
        if "cython" in names:
            line += f"{r['times']['python'] / r['times']['cython']:>8.1f}x"
        print(line)
    worst = max(r["max_abs_diff"] for r in rows)
    print(f"max |cython - python| = {worst:.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if worst < 1e-9 else 1


if __name__ == "__main__":
    sys.exit(main())
