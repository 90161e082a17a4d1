"""Exercise thresholds of a five-right call as the mean refraction time varies.

Run:  python3 demos/threshold_sweep.py
"""

from __future__ import annotations

import math

import numpy as np

from multistop import Contract, RefractionSpec, reference_model, solve_all

K, ALPHA, N = 50.0, -0.02, 5
MEANS = np.arange(0.5, 10.01, 0.5)


def sweep(shape: int) -> np.ndarray:
    model = reference_model()
    rows = []
    for mean in MEANS:
        res = solve_all(model, Contract(K, ALPHA, N), RefractionSpec.from_mean(float(mean), shape))
        rows.append(res.thresholds)
    return np.array(rows)


def main() -> None:
    print(f"log K = {math.log(K):.4f}")
    for shape, label in ((1, "exponential"), (2, "Erlang-2")):
        th = sweep(shape)
        print(f"\n{label} refraction: exercise price levels S_k = exp(x_k)")
        print("mean  " + "  ".join(f"{'k=' + str(k):>8}" for k in range(1, N + 1)))
        for mean, row in zip(MEANS, th):
            print(f"{mean:4.1f}  " + "  ".join(f"{math.exp(x):8.3f}" for x in row))
        # the first threshold ignores refraction; later ones move non-monotonically
        for k in range(2, N + 1):
            d = np.diff(th[:, k - 1])
            turn = MEANS[1:][np.flatnonzero(np.diff(np.sign(d)))[0] + 1] if np.any(d > 0) and np.any(d < 0) else None
            note = f"turns near mean {turn:.1f}" if turn is not None else "monotone"
            print(f"  k={k}: {note}")


if __name__ == "__main__":
    main()
