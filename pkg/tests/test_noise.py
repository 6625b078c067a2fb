import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybrid_oracle.noise import (
    IDENTITY,
    SIGMA_X,
    NoiseConfig,
    draw_etas,
    draw_phase_flips,
    draw_signs,
    error_unitaries,
    error_unitary,
    stream_rng,
    Stream,
)


def test_zero_spread_is_exact():
    cfg = NoiseConfig(eta_mean=1e-3)
    assert np.all(draw_etas(cfg, 0, 1000) == 1e-3)


def test_eta_moments():
    cfg = NoiseConfig(eta_mean=1e-3, eta_rel_sd=0.05, seed=11)
    etas = draw_etas(cfg, 0, 10**6)
    sd = cfg.eta_sd
    assert abs(etas.mean() - 1e-3) < 3 * sd / 1e3
    assert abs(etas.std() - sd) < 0.05 * sd


def test_clamping():
    cfg = NoiseConfig(eta_mean=0.49, eta_rel_sd=0.1 / 0.49, seed=2)
    etas = draw_etas(cfg, 0, 10**5)
    assert etas.max() <= 0.5 and etas.min() >= 0.0


def test_no_phase_flips_when_chi_zero():
    assert not draw_phase_flips(NoiseConfig(), 0, 1000).any()


def test_flip_fraction_half():
    cfg = NoiseConfig(chi_mean=0.5, seed=4)
    assert abs(draw_phase_flips(cfg, 0, 10**6).mean() - 0.5) < 0.002


def test_flip_fraction_small():
    cfg = NoiseConfig(chi_mean=1e-2, chi_rel_sd=0.1, seed=5)
    frac = draw_phase_flips(cfg, 0, 10**6).mean()
    assert abs(frac - 1e-2) < 3 * np.sqrt(1e-2 * 0.99 / 1e6)


def test_streams_are_pure_functions_of_position():
    cfg = NoiseConfig(eta_mean=1e-3, eta_rel_sd=0.1, sign_mode="per_gate_random", seed=9)
    assert np.array_equal(draw_etas(cfg, 3, 500), draw_etas(cfg, 3, 500))
    assert not np.array_equal(draw_etas(cfg, 3, 500), draw_etas(cfg, 4, 500))
    assert np.array_equal(draw_etas(cfg, 3, 1000)[:500], draw_etas(cfg, 3, 500))
    assert np.array_equal(draw_signs(cfg, 3, 1000)[:300], draw_signs(cfg, 3, 300))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 700), min_size=1, max_size=6))
def test_chunked_reads_match_one_read(chunks):
    # the engines read streams in chunks; every split must give the same sequence
    total = sum(chunks)
    whole = stream_rng(1, 0, Stream.ETA).normal(0, 1, total)
    rng = stream_rng(1, 0, Stream.ETA)
    parts = np.concatenate([rng.normal(0, 1, c) for c in chunks])
    assert np.array_equal(whole, parts)
    whole_u = stream_rng(1, 0, Stream.SIGN).random(total)
    rng = stream_rng(1, 0, Stream.SIGN)
    assert np.array_equal(whole_u, np.concatenate([rng.random(c) for c in chunks]))


def test_sign_modes():
    assert np.all(draw_signs(NoiseConfig(sign_mode="all_minus"), 0, 10) == -1)
    signs = draw_signs(NoiseConfig(sign_mode="per_gate_random", seed=1), 0, 10**5)
    assert set(np.unique(signs)) == {-1, 1}
    assert abs(signs.mean()) < 0.02


def test_error_unitary_examples():
    assert np.allclose(error_unitary(0.0), IDENTITY, atol=1e-15)
    half = (IDENTITY + 1j * SIGMA_X) / np.sqrt(2)
    assert np.allclose(error_unitary(0.5, 1), half, atol=1e-15)
    out = error_unitary(0.25) @ np.array([1, 0])
    assert abs(abs(out[1]) ** 2 - 0.25) < 1e-15


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 0.5), st.sampled_from([1, -1]))
def test_error_unitary_is_unitary(eta, sign):
    u = error_unitary(eta, sign)
    assert np.abs(u.conj().T @ u - IDENTITY).max() < 1e-14


def test_stack_matches_single():
    etas = np.array([0.0, 0.1, 0.3])
    signs = np.array([1, -1, 1])
    stack = error_unitaries(etas, signs)
    for e, s, m in zip(etas, signs, stack):
        assert np.allclose(m, error_unitary(e, s), atol=1e-15)


def test_config_validation_and_json():
    cfg = NoiseConfig(eta_mean=2e-3, eta_rel_sd=0.05, chi_mean=1e-3, seed=3, phase_model="between")
    assert NoiseConfig.from_json(cfg.to_json()) == cfg
    assert NoiseConfig.from_absolute(1e-3, 5e-5).eta_rel_sd == pytest.approx(0.05)
    for bad in (dict(eta_mean=0.6), dict(sign_mode="x"), dict(phase_model="x"), dict(seed=-1)):
        with pytest.raises(ValueError):
            NoiseConfig(**bad)
    with pytest.raises(ValueError):
        NoiseConfig.from_dict({"bogus": 1})
