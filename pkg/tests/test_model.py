import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polaron.model import (BathKind, ConfigError, ModelConfig, alpha_from_coupling,
                           build_discrete_bath, continuum_coupling, coupling_from_alpha,
                           ohmic_density, spectral_density)


def test_defaults_match_standard_line():
    cfg = ModelConfig()
    assert cfg.num_segments == 301
    assert cfg.lambda0 == pytest.approx(2 * math.pi)
    assert cfg.length == pytest.approx(20 * math.pi)
    assert cfg.omega_c == pytest.approx(301 / (20 * math.pi))


def test_bath_layout(default_bath):
    b = default_bath
    assert b.num_modes == 301
    assert b.mode_index[0] == -150 and b.mode_index[-1] == 150
    assert b.frequencies[b.mode_index == 0] == 0.0
    assert np.all(b.couplings[:, b.mode_index == 0] == 0)
    assert b.mode_spacing == pytest.approx(0.1)


def test_dispersion_linear_at_low_k(default_bath):
    b = default_bath
    low = np.abs(b.mode_index) <= 3
    np.testing.assert_allclose(b.frequencies[low], np.abs(b.momenta[low]), rtol=1e-3)


def test_alpha_zero_decouples():
    b = build_discrete_bath(ModelConfig(alpha=0.0))
    assert np.all(b.couplings == 0)


@given(st.floats(0.0, 2.0))
def test_alpha_round_trip(alpha):
    assert alpha_from_coupling(coupling_from_alpha(alpha)) == pytest.approx(alpha, abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 80).map(lambda n: 2 * n + 1), st.floats(0.5, 20.0), st.floats(0.0, 1.0))
def test_coupling_modulus_matches_alpha(N, L, alpha):
    cfg = ModelConfig(alpha=alpha, num_segments=N, line_length=L)
    b = build_discrete_bath(cfg)
    expected = math.pi * alpha * b.frequencies / (2 * cfg.length)
    np.testing.assert_allclose(np.abs(b.couplings[0]) ** 2, expected, rtol=1e-12, atol=1e-300)


def test_symmetric_bath_is_mirror_symmetric(default_bath):
    w = default_bath.frequencies
    np.testing.assert_allclose(w, w[::-1], rtol=1e-13)


def test_spectral_density_continuum_and_discrete():
    cont = ModelConfig(alpha=0.2, cutoff=50.0, kind=BathKind.CONTINUUM)
    assert spectral_density(1.0, cont) == pytest.approx(math.pi * 0.2 * math.exp(-1 / 50))
    assert spectral_density(1.0, ModelConfig(alpha=0.2)) == pytest.approx(math.pi * 0.2)
    assert ohmic_density(2.0, 0.1) == pytest.approx(0.2 * math.pi)
    with pytest.raises(ConfigError):
        spectral_density(-1.0, cont)


def test_continuum_coupling_consistent_with_density():
    cfg = ModelConfig(alpha=0.3, cutoff=10.0, kind=BathKind.CONTINUUM)
    k = np.array([0.5, 1.0, 3.0])
    g = continuum_coupling(k, 0, cfg)
    # |g|^2 * 2L / pi = alpha w e^{-w/wc}, i.e. J / pi^2 * pi
    np.testing.assert_allclose(np.abs(g) ** 2 * 2 * cfg.length / math.pi,
                               spectral_density(np.abs(k), cfg) / math.pi, rtol=1e-12)
    with pytest.raises(ConfigError):
        continuum_coupling(np.array([np.nan]), 0, cfg)


@pytest.mark.parametrize("kw", [
    dict(alpha=-0.1), dict(num_segments=1), dict(line_length=0.0),
    dict(qubit_gaps=(1.0, 1.0), qubit_positions=(1.0,)), dict(qubit_positions=(11.0,)),
    dict(kind=BathKind.CONTINUUM), dict(alpha=float("nan")), dict(qubit_gaps=(0.0,)),
])
def test_invalid_configs_rejected(kw):
    with pytest.raises(ConfigError):
        ModelConfig(**kw)


def test_run_file_round_trip(tmp_path):
    cfg = ModelConfig(alpha=0.25, qubit_gaps=(1.0, 1.2), qubit_positions=(4.0, 6.0))
    path = tmp_path / "run.json"
    cfg.to_json(path)
    data = json.loads(path.read_text())
    assert set(data) == {"kind", "N", "L_over_lambda0", "alpha", "gaps", "positions", "omega_c"}
    assert ModelConfig.from_json(path) == cfg


def test_run_file_rejects_bad_keys_and_omega_c():
    d = ModelConfig().to_dict()
    with pytest.raises(ConfigError):
        ModelConfig.from_dict({**d, "extra": 1})
    with pytest.raises(ConfigError):
        ModelConfig.from_dict({k: v for k, v in d.items() if k != "alpha"})
    with pytest.raises(ConfigError):
        ModelConfig.from_dict({**d, "omega_c": 1.0})
