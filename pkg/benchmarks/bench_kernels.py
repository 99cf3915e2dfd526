"""Compare the compiled core against the numpy fallback on the hot kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--seed 0]

Prints the median wall time per call for each backend, the speed-up, and
whether the two backends returned the same answer.
"""

import argparse
import statistics
import time

import numpy as np

from conrec import kernels
from conrec.rng import stream
from conrec.sphere import sample_uniform_directions


def _timed(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def vertex_case(d, N, seed):
    rng = stream(seed, d, N)
    phi = np.ascontiguousarray(sample_uniform_directions(d, N, rng))
    eps = rng.uniform(-1, 1, N)
    return lambda mod: mod.vertex_max_norm(phi, eps, 1.0, 1e-12, 1e-9)


def pocs_case(d, N, T, seed):
    rng = stream(seed, d, N, T)
    phi = sample_uniform_directions(d, T * N, rng).reshape(T, N, d)
    x = sample_uniform_directions(d, T, rng)
    q = np.einsum("tnj,tj->tn", phi, x) + rng.uniform(-1, 1, (T, N))
    x0 = np.full((T, d), 2.0)
    return lambda mod: mod.pocs_batch(phi, q, 1.0, x0, 1e-9, 1_000_000)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    py = kernels.get_backend("python")
    try:
        cc = kernels.get_backend("compiled")
    except ImportError:
        print("compiled extension not built; only the fallback is available")
        return 1

    cases = [
        ("vertex d=2 N=32", vertex_case(2, 32, args.seed)),
        ("vertex d=3 N=32", vertex_case(3, 32, args.seed)),
        ("vertex d=3 N=64", vertex_case(3, 64, args.seed)),
        ("vertex d=4 N=24", vertex_case(4, 24, args.seed)),
        ("pocs_batch d=3 N=20 T=2000", pocs_case(3, 20, 2000, args.seed)),
        ("pocs_batch d=5 N=60 T=500", pocs_case(5, 60, 500, args.seed)),
    ]
    print(f"{'case':<30s} {'compiled':>12s} {'python':>12s} {'speed-up':>9s}  agree")
    for name, run in cases:
        t_c, out_c = _timed(lambda: run(cc), args.repeat)
        t_p, out_p = _timed(lambda: run(py), max(1, args.repeat // 2))
        agree = np.allclose(np.asarray(out_c[0]), np.asarray(out_p[0]), atol=1e-12)
        print(f"{name:<30s} {t_c * 1e3:10.2f}ms {t_p * 1e3:10.2f}ms {t_p / t_c:8.1f}x  {agree}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
