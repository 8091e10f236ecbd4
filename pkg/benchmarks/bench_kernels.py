"""Timing comparison of the compiled kernels against the NumPy fallback.

Run as a script; needs the extension built (pip install -e .) to show
both columns, otherwise only the fallback is timed.
"""

from __future__ import annotations

import time

import numpy as np

from sceneforge.kernels import pyref

try:
    from sceneforge.kernels import _core
except ImportError:
    _core = None

REPEATS = 5


def best_of(fn, *args) -> float:
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kde(backend, rng):
    samples = rng.normal(size=(200, 3))
    queries = rng.normal(size=(5000, 3))
    h = np.array([0.3, 0.3, 0.4])
    return best_of(backend.kde_density, samples, h, queries)


def bench_overlap(backend, rng):
    boxes = [
        np.concatenate([rng.uniform(-1, 1, 3), rng.uniform(0.1, 1, 3), [rng.uniform(0, 6.3)]])
        for _ in range(200)
    ]

    def run():
        for a in boxes:
            for b in boxes:
                backend.boxes_overlap(a, b, 0.005)

    return best_of(run)


def bench_segment(backend, rng):
    segs = [(rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3)) for _ in range(500)]
    boxes = [
        np.concatenate([rng.uniform(-1, 1, 3), rng.uniform(0.1, 1, 3), [rng.uniform(0, 6.3)]])
        for _ in range(50)
    ]

    def run():
        for p0, p1 in segs:
            for b in boxes:
                backend.segment_box_hits(p0, p1, b)

    return best_of(run)


def bench_rect(backend, rng):
    cases = [
        (rng.uniform(-2, 2, 2), rng.uniform(0.05, 1, 2), rng.uniform(0, 6.3), rng.uniform(0.2, 1.5, 2))
        for _ in range(5000)
    ]

    def run():
        for c, h, ang, s in cases:
            backend.rect_outside_fraction(c, h, ang, s)

    return best_of(run)


def main() -> None:
    benches = [
        ("kde_density 200x5000", bench_kde),
        ("boxes_overlap 200x200", bench_overlap),
        ("segment_box_hits 500x50", bench_segment),
        ("rect_outside 5000", bench_rect),
    ]
    print(f"{'benchmark':<26} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, bench in benches:
        t_py = bench(pyref, np.random.default_rng(0))
        if _core is None:
            print(f"{name:<26} {t_py * 1e3:>8.1f}ms {'n/a':>10} {'n/a':>8}")
            continue
        t_c = bench(_core, np.random.default_rng(0))
        print(
            f"{name:<26} {t_py * 1e3:>8.1f}ms {t_c * 1e3:>8.1f}ms {t_py / t_c:>7.1f}x"
        )


if __name__ == "__main__":
    main()
