"""Exact convolution of piecewise exponential-polynomials with a resolvent density.

Run:  python3 demos/expfun_tour.py
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from multistop import ExpPoly, convolve_density, reference_model, resolvent_density
from multistop.expfun import to_text


def main() -> None:
    model = reference_model()
    r = resolvent_density(model, 1.98)
    print("resolvent density of X at an Exp(1.98) time:")
    print(to_text(r))

    payoff = ExpPoly.call_payoff(50.0)
    smoothed = convolve_density(payoff, r)
    print("E[(exp(x + X_e) - 50)^+] as an ExpPoly:")
    print(to_text(smoothed))

    # the algebra is exact: compare with brute-force quadrature
    for x in (3.0, math.log(50.0), 4.5):
        pts = sorted({-60.0, 0.0, math.log(50.0) - x, 60.0})
        ref = sum(quad(lambda y: payoff(x + y) * r(y), a, b, limit=200)[0]
                  for a, b in zip(pts[:-1], pts[1:]))
        print(f"x={x:.4f}: algebra {smoothed(x):.12f}  quadrature {ref:.12f}")

    # repeated decays produce polynomial factors
    twice = convolve_density(smoothed, r)
    print(f"\nafter a second convolution the maximum polynomial degree is {twice.max_degree()}")
    print("values:", np.round(twice(np.linspace(3.0, 5.0, 5)), 6))


if __name__ == "__main__":
    main()
