"""Compare closed-form values with simulated threshold strategies.

Run:  python3 demos/monte_carlo_crosscheck.py [n_paths]
"""

from __future__ import annotations

import math
import sys

from multistop import (Contract, RefractionSpec, SimConfig, reference_model, simulate_strategy_value,
                       solve_all)

K, ALPHA = 50.0, -0.02


def main(n_paths: int = 50_000) -> None:
    model = reference_model()
    spec = RefractionSpec.from_mean(1.0)
    contract = Contract(K, ALPHA, 3)
    res = solve_all(model, contract, spec)
    x0 = math.log(K)
    cfg = SimConfig(seed=2024, n_paths=n_paths)
    print(f"start at S = {K}, {n_paths} paths per estimate")
    for k in range(1, contract.n_exercises + 1):
        c = Contract(K, ALPHA, k)
        est = simulate_strategy_value(model, c, spec if k > 1 else None, res.thresholds[:k], x0, cfg)
        exact = res.values[k - 1](x0)
        z = (est.mean - exact) / est.std_error
        print(f"k={k}: analytic {exact:9.4f}  simulated {est.mean:9.4f} +- {est.std_error:.4f}  z={z:+.2f}")

    # moving the second threshold away from its optimum loses value
    two = Contract(K, ALPHA, 2)
    x1, x2 = res.thresholds[:2]
    print("\nsecond threshold scan (same random numbers for every level)")
    for off in (-0.3, -0.15, 0.0, 0.15, 0.3):
        est = simulate_strategy_value(model, two, spec, (x1, x2 + off), x0, cfg)
        print(f"  x2 {off:+.2f}: {est.mean:9.4f} +- {est.std_error:.4f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 50_000)
