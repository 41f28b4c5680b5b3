"""Compare the numba and pure-numpy kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Each row times one call (best of ``--repeat``) after a warm-up call, so numba
compilation is excluded, and checks that both flavours agree.
"""
import argparse
import timeit

import numpy as np

from spectral_evasion.kernels import (_as_codes, _diagonal_average_numba, _diagonal_average_numpy,
                                      _levenshtein_numba, _levenshtein_numpy)


def best_time(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def diagonal_cases(rng):
    for d, L, n in ((10, 10, 1000), (50, 50, 2000), (50, 50, 8000), (50, 50, 32000)):
        left, right = rng.standard_normal((d, L)), rng.standard_normal((d, n - L + 1))
        yield f"diagonal_average d={d} L={L} N={n}", (left, right), \
            _diagonal_average_numba, _diagonal_average_numpy, np.allclose


def levenshtein_cases(rng):
    for n in (10, 100, 1000, 3000):
        a, b = (list(rng.integers(0, 20, n)) for _ in range(2))
        yield f"levenshtein n={n}", _as_codes(a, b), \
            _levenshtein_numba, _levenshtein_numpy, lambda x, y: x == y


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"{'case':40s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}  agree")
    for cases in (diagonal_cases(rng), levenshtein_cases(rng)):
        for name, inputs, fast, slow, same in cases:
            tf = best_time(lambda: fast(*inputs), args.repeat)
            ts = best_time(lambda: slow(*inputs), args.repeat)
            agree = same(fast(*inputs), slow(*inputs))
            print(f"{name:40s} {tf * 1e3:10.3f} {ts * 1e3:10.3f} {ts / tf:8.2f}  {agree}")


if __name__ == "__main__":
    main()
