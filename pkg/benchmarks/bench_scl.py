"""Compare the compiled list-decoder kernel against the numpy fallback.

Times `scl_paths` on identical noisy codewords for a few (code, list)
shapes and prints the per-decode cost and speedup. Run from the repo root:

    python3 benchmarks/bench_scl.py [--trials 50]
"""

import argparse
import time

import numpy as np

from sptdiff.channel import derive_rng
from sptdiff.polar import _scl_py
from sptdiff.polar.code import PolarCode

try:
    from sptdiff.polar import _sclcore
except ImportError:
    _sclcore = None


def _workload(code: PolarCode, trials: int, rng) -> np.ndarray:
    """Channel LLRs for random codewords at a mid-waterfall SNR."""
    payload = rng.integers(0, 2, size=(trials, code.payload_bits), dtype=np.int8)
    coded = np.stack([code.encode(p) for p in payload])
    mu = 3.0
    noise = rng.standard_normal(coded.shape)
    return mu * (1.0 - 2.0 * coded) + np.sqrt(2.0 * mu) * noise


def _time_kernel(kernel, full_llrs, frozen, list_size: int) -> float:
    start = time.perf_counter()
    for row in full_llrs:
        kernel.scl_paths(row, frozen, list_size)
    return (time.perf_counter() - start) / len(full_llrs)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=50)
    args = parser.parse_args()

    rng = derive_rng(12, 9)
    print(f"{'code':>12} {'list':>5} {'numpy':>12} {'compiled':>12} {'speedup':>8}")
    for coded_bits, info_bits, list_size in (
        (64, 32, 8),
        (240, 120, 8),
        (256, 128, 8),
        (256, 128, 32),
    ):
        code = PolarCode(coded_bits, info_bits)
        llrs = _workload(code, args.trials, rng)
        # benchmark the kernel on the mother-code layout decode() feeds it
        # (shortened positions pinned to a huge known-zero LLR)
        full = np.full((args.trials, code.mother_bits), 1e30)
        full[:, :code.coded_bits] = llrs
        t_py = _time_kernel(_scl_py, full, code.frozen, list_size)
        label = f"({coded_bits},{info_bits})"
        if _sclcore is None:
            print(f"{label:>12} {list_size:>5} {t_py * 1e3:>10.2f}ms {'n/a':>12} {'':>8}")
            continue
        t_c = _time_kernel(_sclcore, full, code.frozen, list_size)
        print(f"{label:>12} {list_size:>5} {t_py * 1e3:>10.2f}ms "
              f"{t_c * 1e3:>10.2f}ms {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
