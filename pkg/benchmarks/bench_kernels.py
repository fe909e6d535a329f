"""Benchmark the compiled peak-matching kernel against the pure-Python fallback.

Runs score_modified_cosine on identical random spectrum pairs through both
backends, checks the scores are bit-identical, and reports per-call times.

    python3 benchmarks/bench_kernels.py [--trials N] [--seed S]
"""

import argparse
import time

import numpy as np

from mzembed.kernels import _reference

try:
    from mzembed.kernels import _matching
except ImportError:
    _matching = None


def make_pairs(rng, n_peaks, count, mz_range):
    pairs = []
    for _ in range(count):
        mz_a = np.sort(rng.uniform(*mz_range, n_peaks))
        mz_b = np.sort(rng.uniform(*mz_range, n_peaks))
        int_a = rng.uniform(0.05, 1.0, n_peaks)
        int_b = rng.uniform(0.05, 1.0, n_peaks)
        prec_diff = float(rng.uniform(-20.0, 20.0))
        pairs.append((mz_a, int_a, mz_b, int_b, prec_diff))
    return pairs


def time_backend(impl, pairs, tol):
    start = time.perf_counter()
    scores = [
        impl.score_modified_cosine(mz_a, int_a, mz_b, int_b, prec_diff, tol)
        for mz_a, int_a, mz_b, int_b, prec_diff in pairs
    ]
    return time.perf_counter() - start, scores


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=1000, help="pairs per case")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _matching is None:
        print("compiled backend not built; nothing to compare")
        return 1

    rng = np.random.default_rng(args.seed)
    tol = 0.1
    # (label, peaks per spectrum, m/z range); the narrow range forces
    # dense candidate sets and the exhaustive matcher, the wide ranges
    # are typical sparse library spectra.
    cases = [
        ("sparse  8 peaks", 8, (100.0, 1000.0)),
        ("sparse 16 peaks", 16, (100.0, 1000.0)),
        ("sparse 32 peaks", 32, (100.0, 1000.0)),
        ("sparse 64 peaks", 64, (100.0, 1000.0)),
        ("dense  12 peaks", 12, (100.0, 103.0)),
    ]

    print(f"{'case':<18} {'python':>12} {'cython':>12} {'speedup':>9}")
    for label, n_peaks, mz_range in cases:
        pairs = make_pairs(rng, n_peaks, args.trials, mz_range)
        t_py, s_py = time_backend(_reference, pairs, tol)
        t_cy, s_cy = time_backend(_matching, pairs, tol)
        if s_py != s_cy:
            raise AssertionError(f"{label}: backends disagree")
        per_py = t_py / args.trials * 1e6
        per_cy = t_cy / args.trials * 1e6
        print(
            f"{label:<18} {per_py:>9.1f} us {per_cy:>9.1f} us {t_py / t_cy:>8.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
