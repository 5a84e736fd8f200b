"""Groundstate polarization of one emitter versus coupling strength.

Solves the self-consistent polaron displacements on the default line
(N = 301, L = 10 lambda0) and checks that <sz> = -delta_r for every
coupling.
"""
import numpy as np

from polaron.model import ModelConfig, build_discrete_bath
from polaron.static_polaron import groundstate_polarization, solve_single_qubit_fixed_point


def main():
    print(f"{'alpha':>6} {'delta_r':>10} {'<sz>':>10} {'iterations':>10}")
    for alpha in np.linspace(0.0, 0.9, 10):
        cfg = ModelConfig(alpha=alpha)
        sol = solve_single_qubit_fixed_point(build_discrete_bath(cfg), 1.0)
        sz = groundstate_polarization(sol)[0]
        print(f"{alpha:6.2f} {sol.delta_r:10.5f} {sz:10.5f} {sol.iterations:10d}")


if __name__ == "__main__":
    main()
