"""Spontaneous emission of an excited emitter into the line.

Evolves the single-excitation polaron Hamiltonian up to the revival time,
fits the decay rate and reports where the emitted photon ends up.
"""
import math

import numpy as np

from polaron.dynamics import fit_decay_rate, markovian_rate_lamb, spontaneous_emission_run
from polaron.model import ModelConfig


def main():
    for alpha in (0.05, 0.1, 0.2):
        s = spontaneous_emission_run(ModelConfig(alpha=alpha))
        fit = fit_decay_rate(s.times, s.survival)
        golden = math.pi * alpha * s.solution.delta_r
        peak = abs(s.bath.frequencies[np.argmax(s.final_density)])
        gamma, shift = markovian_rate_lamb(alpha, 1.0, s.bath.omega_c)
        print(f"alpha={alpha:.2f}  fitted rate={fit.rate:.4f}  pi*alpha*delta_r={golden:.4f}  "
              f"flags={list(fit.flags)}  photon peak={peak:.3f}  delta_r={s.solution.delta_r:.3f}  "
              f"markov lamb shift={shift:.4f}")


if __name__ == "__main__":
    main()
