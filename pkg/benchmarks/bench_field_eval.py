#!/usr/bin/env python3
"""Benchmark the log-source field kernel: numba JIT vs pure numpy.

The kernel evaluates value/gradient/Hessian of a logarithmic source expansion
at many points; it dominates the runtime of identity checks, stability sweeps
and the boundary flow.  The active backend follows the TORSIONLAB_NO_NUMBA
environment flag; this script times both implementations directly and checks
they agree.

Usage:
    python benchmarks/bench_field_eval.py
    python benchmarks/bench_field_eval.py --points 2000 20000 --sources 128 512
    python benchmarks/bench_field_eval.py --output results.json
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from torsionlab import _kernels  # noqa: E402


def time_call(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, nargs="+", default=[1000, 10000, 100000])
    parser.add_argument("--sources", type=int, nargs="+", default=[64, 256, 1024])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--output", default=None, help="optional JSON results path")
    args = parser.parse_args(argv)

    if not _kernels._HAVE_NUMBA:
        print("numba backend unavailable (TORSIONLAB_NO_NUMBA set or numba missing);")
        print("only the numpy path will be timed.")

    rng = np.random.default_rng(0)
    rows = []
    print(f"{'points':>8} {'sources':>8} {'numba (s)':>12} {'numpy (s)':>12} {'speedup':>9} {'agree':>7}")
    print("-" * 62)
    for n_pts in args.points:
        for n_src in args.sources:
            pts = rng.uniform(-0.8, 0.8, size=(n_pts, 2))
            theta = rng.uniform(0.0, 2 * np.pi, n_src)
            src = 2.0 * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
            coeffs = rng.standard_normal(n_src)
            t_numpy = time_call(
                _kernels.log_source_fields_numpy, pts, src, coeffs, repeats=args.repeats
            )
            if _kernels._HAVE_NUMBA:
                _kernels._log_source_fields_numba(pts[:2], src, coeffs)  # warm JIT
                t_numba = time_call(
                    _kernels._log_source_fields_numba, pts, src, coeffs, repeats=args.repeats
                )
                u1, g1, h1 = _kernels._log_source_fields_numba(pts, src, coeffs)
            else:
                t_numba = float("nan")
                u1 = g1 = h1 = None
            u2, g2, h2 = _kernels.log_source_fields_numpy(pts, src, coeffs)
            if u1 is not None:
                scale = max(1.0, float(np.max(np.abs(u2))))
                agree = (
                    np.max(np.abs(u1 - u2)) / scale < 1e-12
                    and np.max(np.abs(g1 - g2)) < 1e-10
                    and np.max(np.abs(h1 - h2)) < 1e-9
                )
                speedup = t_numpy / t_numba
            else:
                agree, speedup = True, float("nan")
            print(
                f"{n_pts:>8} {n_src:>8} {t_numba:>12.5f} {t_numpy:>12.5f} "
                f"{speedup:>8.2f}x {'yes' if agree else 'NO':>7}"
            )
            rows.append(
                {
                    "points": n_pts,
                    "sources": n_src,
                    "numba_s": t_numba,
                    "numpy_s": t_numpy,
                    "speedup": speedup,
                    "agree": bool(agree),
                }
            )
    if args.output:
        Path(args.output).write_text(json.dumps(rows, indent=2) + "\n")
        print(f"\nwrote {args.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
