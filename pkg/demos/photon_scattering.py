"""Single-photon scattering off one emitter at alpha = 0.1.

Prints the reflection and transmission probabilities over the packet's
frequency window, the reflection phase and the per-mode unitarity error.
"""
from polaron.model import ModelConfig
from polaron.scattering import run_scattering


def main():
    res = run_scattering(ModelConfig(alpha=0.1))
    s = res.supported()
    print(f"delta_r={res.delta_r:.4f}  t_final={res.t_final:.2f}  spin residual={res.spin_residual:.1e}")
    print(f"{'omega':>8} {'T':>8} {'R':>8} {'theta_r':>8}")
    for w, T, R, th in zip(res.omega[s], res.T[s], res.R[s], res.theta_r[s]):
        print(f"{w:8.3f} {T:8.4f} {R:8.4f} {th:8.3f}")
    print(f"reflection peak={res.reflection_peak():.3f}  phase jump={res.reflection_phase_jump():.3f}  "
          f"max|T+R-1|={res.unitarity_deviation():.3f}")


if __name__ == "__main__":
    main()
