"""Polaron ansatz against exact diagonalization on a three-mode line.

The truncated Fock-space oracle gives the exact groundstate energy and
polarization; the polaron energy is an upper bound.
"""
from polaron.model import ModelConfig, build_discrete_bath
from polaron.oracle import FockBasis, build_hamiltonian, exact_groundstate, lab_sigma_z
from polaron.static_polaron import groundstate_polarization, solve_single_qubit_fixed_point


def main():
    basis = FockBasis(3, 8)
    for alpha in (0.05, 0.1, 0.2, 0.4):
        cfg = ModelConfig(alpha=alpha, num_segments=7, line_length=1.0)
        bath = build_discrete_bath(cfg).subset([4, 5, 6])
        sol = solve_single_qubit_fixed_point(bath, 1.0)
        E0, psi = exact_groundstate(build_hamiltonian(basis, bath, [1.0]))
        print(f"alpha={alpha:.2f}  E_polaron-E_exact={sol.groundstate_energy - E0:.2e}  "
              f"<sz> polaron={groundstate_polarization(sol)[0]:.4f} exact={lab_sigma_z(basis, psi):.4f}")


if __name__ == "__main__":
    main()
