"""
Bath and coupling construction for the few-impurity spin-boson model.

The line has length ``L`` and propagation speed ``v``.  Lengths in
:class:`ModelConfig` are given in units of ``lambda0 = 2*pi*v/Delta_1``
(the bare wavelength of the first emitter); frequencies are absolute.
With the defaults ``v = 1`` and ``Delta_1 = 1`` this reproduces the
usual choice ``L = 10 lambda0``.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class BathKind(str, enum.Enum):
    DISCRETE = "Discrete"
    CONTINUUM = "Continuum"


class ConfigError(ValueError):
    """Invalid model parameters."""


def coupling_from_alpha(alpha, v=1.0):
    """Bare coupling ``g = sqrt(pi v alpha)`` (taken real and positive)."""
    alpha = float(alpha)
    v = float(v)
    if alpha < 0 or v <= 0 or not math.isfinite(alpha) or not math.isfinite(v):
        raise ConfigError(f"need alpha >= 0 and v > 0, got alpha={alpha}, v={v}")
    return math.sqrt(math.pi * v * alpha)


def alpha_from_coupling(g, v=1.0):
    """Dimensionless coupling ``alpha = |g|^2 / (pi v)``."""
    g = abs(g)
    v = float(v)
    if v <= 0 or not math.isfinite(g) or not math.isfinite(v):
        raise ConfigError(f"need finite g and v > 0, got g={g}, v={v}")
    return g * g / (math.pi * v)


@dataclass(frozen=True)
class ModelConfig:
    """Physical parameters of the line and its emitters.

    Parameters
    ----------
    alpha : float
        Dimensionless spin-boson coupling.
    qubit_gaps : tuple of float
        Bare transition frequencies ``Delta_i``.
    qubit_positions : tuple of float, optional
        Emitter positions in units of ``lambda0``.  Defaults to the middle
        of the line for every emitter.
    num_segments : int
        Number of line segments ``N`` (= number of bosonic modes).
    line_length : float
        ``L`` in units of ``lambda0``.
    speed : float
        Propagation speed ``v``.
    cutoff : float, optional
        Exponential cutoff ``omega_c``; only used (and required) for the
        continuum kind.  For the discrete kind it is derived as ``v N / L``.
    kind : BathKind
    """

    alpha: float = 0.1
    qubit_gaps: tuple = (1.0,)
    qubit_positions: tuple | None = None
    num_segments: int = 301
    line_length: float = 10.0
    speed: float = 1.0
    cutoff: float | None = None
    kind: BathKind = BathKind.DISCRETE

    def __post_init__(self):
        object.__setattr__(self, "kind", BathKind(self.kind))
        gaps = tuple(float(x) for x in np.atleast_1d(self.qubit_gaps))
        object.__setattr__(self, "qubit_gaps", gaps)
        if self.qubit_positions is None:
            pos = tuple(0.5 * float(self.line_length) for _ in gaps)
        else:
            pos = tuple(float(x) for x in np.atleast_1d(self.qubit_positions))
        object.__setattr__(self, "qubit_positions", pos)
        self.validate()

    def validate(self):
        nums = [self.alpha, self.line_length, self.speed, *self.qubit_gaps,
                *self.qubit_positions]
        if self.cutoff is not None:
            nums.append(self.cutoff)
        if not all(math.isfinite(float(x)) for x in nums):
            raise ConfigError("non-finite model parameter")
        if len(self.qubit_gaps) < 1:
            raise ConfigError("at least one emitter is required")
        if len(self.qubit_gaps) != len(self.qubit_positions):
            raise ConfigError("qubit_gaps and qubit_positions differ in length")
        if int(self.num_segments) != self.num_segments or self.num_segments < 2:
            raise ConfigError(f"num_segments must be an integer >= 2, got {self.num_segments}")
        if self.line_length <= 0 or self.speed <= 0:
            raise ConfigError("line_length and speed must be positive")
        if self.alpha < 0:
            raise ConfigError("alpha must be non-negative")
        if any(d <= 0 for d in self.qubit_gaps):
            raise ConfigError("all qubit gaps must be positive")
        if any(not 0 <= x < self.line_length for x in self.qubit_positions):
            raise ConfigError("qubit positions must lie in [0, L)")
        if self.kind is BathKind.CONTINUUM and (self.cutoff is None or self.cutoff <= 0):
            raise ConfigError("continuum model needs a positive cutoff")

    @property
    def num_qubits(self):
        return len(self.qubit_gaps)

    @property
    def lambda0(self):
        return 2 * math.pi * self.speed / self.qubit_gaps[0]

    @property
    def length(self):
        """Absolute line length ``L``."""
        return self.line_length * self.lambda0

    @property
    def positions(self):
        """Absolute emitter positions."""
        return np.array(self.qubit_positions) * self.lambda0

    @property
    def g(self):
        return coupling_from_alpha(self.alpha, self.speed)

    @property
    def omega_c(self):
        if self.kind is BathKind.DISCRETE:
            return self.speed * self.num_segments / self.length
        return float(self.cutoff)

    def replace(self, **changes):
        kw = dict(alpha=self.alpha, qubit_gaps=self.qubit_gaps,
                  qubit_positions=self.qubit_positions,
                  num_segments=self.num_segments, line_length=self.line_length,
                  speed=self.speed, cutoff=self.cutoff, kind=self.kind)
        kw.update(changes)
        return ModelConfig(**kw)

    # -- run-file serialisation -------------------------------------------

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "N": int(self.num_segments),
            "L_over_lambda0": float(self.line_length),
            "alpha": float(self.alpha),
            "gaps": list(self.qubit_gaps),
            "positions": list(self.qubit_positions),
            "omega_c": float(self.omega_c),
        }

    @classmethod
    def from_dict(cls, d):
        expected = {"kind", "N", "L_over_lambda0", "alpha", "gaps", "positions", "omega_c"}
        missing = expected - set(d)
        extra = set(d) - expected
        if missing or extra:
            raise ConfigError(f"run file keys mismatch: missing={sorted(missing)}, "
                              f"unexpected={sorted(extra)}")
        kind = BathKind(d["kind"])
        cfg = cls(alpha=d["alpha"], qubit_gaps=tuple(d["gaps"]),
                  qubit_positions=tuple(d["positions"]), num_segments=int(d["N"]),
                  line_length=d["L_over_lambda0"],
                  cutoff=None if kind is BathKind.DISCRETE else d["omega_c"],
                  kind=kind)
        if kind is BathKind.DISCRETE and d["omega_c"] is not None:
            if not math.isclose(d["omega_c"], cfg.omega_c, rel_tol=1e-9):
                raise ConfigError("omega_c is derived (v N / L) for the discrete model; "
                                  f"file has {d['omega_c']}, expected {cfg.omega_c}")
        return cfg

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, source):
        """Load from a JSON string or a path to a run file."""
        if isinstance(source, Path) or (isinstance(source, str)
                                         and not source.lstrip().startswith("{")):
            source = Path(source).read_text()
        return cls.from_dict(json.loads(source))


@dataclass(frozen=True)
class DiscreteBath:
    """Mode table of the discretised line.

    ``couplings[i, n]`` is the coupling of emitter ``i`` to mode ``n``; the
    modes are ordered by ``mode_index`` running from ``-(N-1)//2``
    upwards, so for odd ``N`` the zero mode sits in the middle.
    """

    mode_index: np.ndarray
    momenta: np.ndarray
    frequencies: np.ndarray
    couplings: np.ndarray
    length: float
    speed: float = 1.0
    omega_c: float = field(default=float("nan"))

    @property
    def num_modes(self):
        return self.frequencies.size

    @property
    def num_qubits(self):
        return self.couplings.shape[0]

    @property
    def mode_spacing(self):
        """Frequency spacing of the linear part of the band, ``2 pi v / L``."""
        return 2 * math.pi * self.speed / self.length

    def subset(self, modes):
        """Bath restricted to the given mode positions (array indices)."""
        modes = np.asarray(modes)
        return DiscreteBath(self.mode_index[modes], self.momenta[modes],
                            self.frequencies[modes], self.couplings[:, modes],
                            self.length, self.speed, self.omega_c)

    def coupled_modes(self):
        """Array indices of modes with non-zero frequency."""
        return np.flatnonzero(self.frequencies > 0)


def build_discrete_bath(config: ModelConfig) -> DiscreteBath:
    """Mode frequencies and couplings of the discretised line.

    ``omega_n = omega_c sqrt(2 - 2 cos(2 pi n / N))`` and
    ``g_in = g sqrt(omega_n / 2L) exp(i 2 pi n x_i / L)``.
    """
    if config.kind is not BathKind.DISCRETE:
        raise ConfigError("build_discrete_bath needs a discrete model")
    N = int(config.num_segments)
    L = config.length
    n = np.arange(N) - (N - 1) // 2
    k = 2 * np.pi * n / L
    wc = config.omega_c
    w = wc * np.sqrt(np.maximum(2.0 - 2.0 * np.cos(2 * np.pi * n / N), 0.0))
    w[n == 0] = 0.0
    amp = config.g * np.sqrt(w / (2 * L))
    phase = np.exp(1j * np.outer(config.positions, k))
    couplings = amp[None, :] * phase
    return DiscreteBath(n, k, w, couplings, L, config.speed, wc)


def continuum_coupling(k, qubit, config: ModelConfig):
    """Continuum coupling ``g exp(-w/2wc) sqrt(w/2L) exp(i k x_i)``, ``w = v|k|``."""
    if config.kind is not BathKind.CONTINUUM:
        raise ConfigError("continuum_coupling needs a continuum model")
    k = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k)):
        raise ConfigError("non-finite momentum")
    w = config.speed * np.abs(k)
    x = config.positions[qubit]
    out = (config.g * np.exp(-w / (2 * config.omega_c)) * np.sqrt(w / (2 * config.length))
           * np.exp(1j * k * x))
    return out if out.ndim else complex(out)


def spectral_density(omega, config: ModelConfig):
    """Ohmic spectral density.

    Continuum: ``pi alpha w exp(-w/wc)``.  Discrete: the low-frequency
    Ohmic form ``pi alpha w``, valid for ``w << wc`` only.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ConfigError("spectral density needs omega >= 0")
    J = np.pi * config.alpha * omega
    if config.kind is BathKind.CONTINUUM:
        J = J * np.exp(-omega / config.omega_c)
    return J if J.ndim else float(J)


def ohmic_density(omega, alpha, omega_c=math.inf):
    """``pi alpha w exp(-w/wc)`` as a plain function of its arguments."""
    omega = np.asarray(omega, dtype=float)
    J = np.pi * alpha * omega
    if math.isfinite(omega_c):
        J = J * np.exp(-omega / omega_c)
    return J if J.ndim else float(J)
