"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is timed on the same inputs with every available backend; the
outputs are checked to agree before timings are reported.
"""
import argparse
import time

import numpy as np

from syncpulse import kernels
from syncpulse.oracle import discretize
from syncpulse.sequence import PulseTrain, pair_expansion
from syncpulse.spectral import SpectralDensity


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    exp = pair_expansion(PulseTrain(32, 1.7), 60.0)
    e = np.linspace(0.0, 3.0, 200_000)
    yield "modulation_power (33 terms, 2e5 nodes)", lambda b: kernels.modulation_power(
        e, exp.coefficients, exp.offsets, backend=b)

    k = rng.normal(size=20_001)
    yield "train_sums (N = 2e4)", lambda b: kernels.train_sums(k, backend=b)

    modes = discretize(SpectralDensity.gaussian(), 4096)
    dur = np.full(201, 6.283185)
    flips = np.ones(201, dtype=np.uint8)
    flips[-1] = 0

    def evolve(b):
        da = np.zeros(len(modes), complex)
        db = np.zeros(len(modes), complex)
        kernels.evolve_branches(modes.epsilon, modes.h, dur, flips, da, db, True, backend=b)
        return da, db

    yield "evolve_branches (4096 modes, 200 pulses)", evolve


def _agree(x, y):
    if isinstance(x, tuple):
        return all(_agree(a, b) for a, b in zip(x, y))
    return np.allclose(x, y, rtol=1e-10, atol=1e-12)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND})")
    header = f"{'kernel':45s}" + "".join(f"{b:>12s}" for b in backends)
    if "cython" in backends:
        header += f"{'speedup':>10s}"
    print(header)
    for name, fn in cases():
        outs = {b: fn(b) for b in backends}
        if len(backends) > 1 and not _agree(outs["python"], outs["cython"]):
            raise SystemExit(f"{name}: backends disagree")
        t = {b: _best(lambda: fn(b), args.repeat) for b in backends}
        row = f"{name:45s}" + "".join(f"{t[b] * 1e3:10.2f}ms" for b in backends)
        if "cython" in backends:
            row += f"{t['python'] / t['cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
