"""Time the numba and numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--primes 101,499,1009] [--repeat 5]

Each kernel runs once per backend before timing so numba's compile cost is
excluded; the table reports the best of ``--repeat`` runs in milliseconds and
checks that both backends return identical counts.
"""
import argparse
import time

import numpy as np

from dpat import kernels
from dpat.catalog import catalog_lookup
from dpat.evaluate import evaluate
from dpat.finfield import make_field, multiplicative_subgroup


def _best(fn, repeat):
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1e3, out


def _cases(F):
    squares = evaluate(catalog_lookup("nonzero-squares").formula, F, free=("x",)).flat_mask()
    full = np.ones(F.q, dtype=bool)
    units = multiplicative_subgroup(F, 2).mask()
    yield "ap3", lambda b: kernels.ap3_counts(squares, full, F.p, F.n, backend=b)
    yield "shift", lambda b: kernels.shift_counts(squares, units, F.p, F.n, backend=b)
    if F.q <= 4096:
        g = F.elements()
        rows = squares[F.sub(g[:, None], g[None, :])]     # paley2: x - y a nonzero square
        g2 = F.mul(g, g)
        yield "skew", lambda b: kernels.skew_counts(rows, g, g2, F.p, F.n, backend=b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--primes", default="101,499,1009,4093")
    ap.add_argument("--degree", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.BACKENDS
    print(f"{'kernel':<8}{'q':>8}" + "".join(f"{b + ' ms':>14}" for b in backends) + f"{'speedup':>10}  agree")
    for p in (int(v) for v in args.primes.split(",")):
        F = make_field(p, args.degree)
        for name, run in _cases(F):
            times, outs = [], []
            for b in backends:
                ms, out = _best(lambda: run(b), args.repeat)
                times.append(ms)
                outs.append(out)
            agree = all(np.array_equal(outs[0], o) for o in outs[1:])
            speed = f"{times[-1] / times[0]:.1f}x" if len(times) > 1 else "-"
            print(f"{name:<8}{F.q:>8}" + "".join(f"{t:>14.2f}" for t in times) + f"{speed:>10}  {agree}", flush=True)


if __name__ == "__main__":
    main()
