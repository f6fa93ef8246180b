"""Timing comparison of the compiled and pure-numpy stencil kernels.

Run as ``python3 benchmarks/bench_kernels.py``.  Reports per-call time
for the Laplacian apply (the conjugate-gradient inner loop) and the
per-cell gradient form on 2D and 3D grids, plus the max discrepancy
between backends.
"""

from __future__ import annotations

import time

import numpy as np

from cracktip import _kernels
from cracktip._kernels import fallback


def _time(fn, *args, repeat=20):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    if _kernels.BACKEND != "compiled":
        print("NOTE: compiled backend unavailable; timing pure vs pure "
              "(build the extension, or unset CRACKTIP_PURE_PYTHON)")
    rng = np.random.default_rng(0)
    print(f"{'case':<26}{'pure':>12}{'compiled':>12}{'speedup':>10}{'max|diff|':>12}")
    for shape in ((201, 202), (65, 66, 65)):
        u = rng.standard_normal(shape)
        weights = [rng.random(np.diff(u, axis=ax).shape) for ax in range(u.ndim)]
        h = 2.0 / (shape[0] - 1)

        t_pure = _time(fallback.lap_apply, u, weights)
        t_fast = _time(_kernels.lap_apply, u, weights)
        diff = float(np.abs(_kernels.lap_apply(u, weights)
                            - fallback.lap_apply(u, weights)).max())
        label = f"lap_apply {'x'.join(map(str, shape))}"
        print(f"{label:<26}{t_pure * 1e3:>10.2f}ms{t_fast * 1e3:>10.2f}ms"
              f"{t_pure / t_fast:>9.1f}x{diff:>12.2e}")

        t_pure = _time(fallback.cell_grad_sq, u, h)
        t_fast = _time(_kernels.cell_grad_sq, u, h)
        diff = float(np.abs(_kernels.cell_grad_sq(u, h)
                            - fallback.cell_grad_sq(u, h)).max())
        label = f"cell_grad_sq {'x'.join(map(str, shape))}"
        print(f"{label:<26}{t_pure * 1e3:>10.2f}ms{t_fast * 1e3:>10.2f}ms"
              f"{t_pure / t_fast:>9.1f}x{diff:>12.2e}")


if __name__ == "__main__":
    main()
