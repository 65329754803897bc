"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Both backends get identical inputs; their outputs are checked for equality
before timing.
"""

import argparse
import timeit

import numpy as np

from genauto.kernels import PROB, TFT, _pykernels

try:
    from genauto.kernels import _ckernels
except ImportError:
    _ckernels = None


def match_case(plays=10, rounds=50):
    rng = np.random.default_rng(0)
    params = rng.random(6)
    ua = rng.random((plays, rounds))
    ub = np.zeros((plays, rounds))
    return (PROB, params, TFT, np.zeros(6), ua, ub)


def path_case(n):
    rng = np.random.default_rng(n)
    return (rng.random((n, n)),)


CASES = {
    "run_matches 10x50": ("run_matches", match_case()),
    "run_matches 50x500": ("run_matches", match_case(50, 500)),
    "simple_path_sums n=3": ("simple_path_sums", path_case(3)),
    "simple_path_sums n=6": ("simple_path_sums", path_case(6)),
    "simple_path_sums n=8": ("simple_path_sums", path_case(8)),
}


def best_time(fn, args, repeat):
    calls = max(1, int(0.2 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-7)))
    return min(timeit.repeat(lambda: fn(*args), number=calls, repeat=repeat)) / calls


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        raise SystemExit("compiled kernels not built; run `pip install -e . --no-build-isolation` first")

    print(f"{'kernel':<24}{'python':>12}{'cython':>12}{'speedup':>10}")
    for label, (name, case) in CASES.items():
        py, cy = getattr(_pykernels, name), getattr(_ckernels, name)
        for a, b in zip(np.atleast_1d(py(*case)), np.atleast_1d(cy(*case))):
            np.testing.assert_array_equal(a, b)
        t_py = best_time(py, case, args.repeat)
        t_cy = best_time(cy, case, args.repeat)
        print(f"{label:<24}{t_py * 1e6:>10.1f}us{t_cy * 1e6:>10.1f}us{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
