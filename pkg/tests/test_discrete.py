"""Difference operators and the summation identities on random fields."""

import numpy as np
import pytest

from latres.discrete import (Field1D, Field2D, WindowTooSmall, backward_x,
                             divergence_minus, divergence_theorem_residual,
                             forward_x, forward_y, green_identity_residual,
                             identity_residuals, laplacian,
                             product_rule_residuals,
                             summation_by_parts_1d_residual,
                             telescoping_residual, waveguide_green_residual)


def _rand2(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_forward_backward_offsets():
    f = Field1D(np.array([1.0, 4.0, 9.0]), offset=5)
    fx = forward_x(f)
    assert np.allclose(fx.values, [3.0, 5.0])
    assert fx.offset == 5
    bx = backward_x(f)
    assert np.allclose(bx.values, [3.0, 5.0])
    assert bx.offset == 6


def test_window_too_small():
    with pytest.raises(WindowTooSmall):
        forward_x(Field1D(np.array([1.0])))
    with pytest.raises(WindowTooSmall):
        laplacian(Field2D(np.ones((2, 5))))


def test_laplacian_matches_divergence_of_gradient(rng):
    u = _rand2(rng, (7, 8))
    f = Field2D(u)
    lap = laplacian(f)
    div = divergence_minus(forward_x(f), forward_y(f))
    # compare on the common interior window
    a = lap.values
    b = div.values[lap.m_offset - div.m_offset:, lap.n_offset - div.n_offset:]
    b = b[:a.shape[0], :a.shape[1]]
    assert np.max(np.abs(a - b)) < 1e-12


def test_pseudo_periodic_check():
    kappa = 0.31
    n = np.arange(9)
    v = np.exp(2j * np.pi * kappa * n / 3)
    f = Field1D(v, period=3, kappa=kappa)
    assert f.check_pseudo_periodic()
    bad = Field1D(v + np.array([0.0] * 8 + [0.1]), period=3, kappa=kappa)
    assert not bad.check_pseudo_periodic()


def test_product_rules_random(rng):
    for _ in range(100):
        v = _rand2(rng, 11)
        w = _rand2(rng, 11)
        res = product_rule_residuals(v, w)
        assert max(res.values()) < 1e-12


def test_telescoping_and_sbp_random(rng):
    for _ in range(100):
        v = _rand2(rng, 13)
        w = _rand2(rng, 13)
        assert telescoping_residual(v) < 1e-12
        assert summation_by_parts_1d_residual(v, w) < 1e-12


def test_divergence_and_green_random(rng):
    for _ in range(100):
        f1 = _rand2(rng, (6, 7))
        f2 = _rand2(rng, (6, 7))
        assert divergence_theorem_residual(f1, f2) < 1e-12
        assert green_identity_residual(f1, f2) < 1e-12


def test_waveguide_green_random(rng):
    for _ in range(50):
        z = _rand2(rng, 9)
        masses = rng.uniform(0.5, 3.0, 9)
        springs = rng.uniform(0.5, 3.0, 9)
        assert waveguide_green_residual(z, masses, springs) < 1e-12
    with pytest.raises(ValueError):
        waveguide_green_residual(z[:2], masses[:2], springs[:2])


def test_identity_bundle(rng):
    v = _rand2(rng, (8, 8))
    w = _rand2(rng, (8, 8))
    res = identity_residuals(v, w)
    assert set(res) == {"summation_by_parts_1d", "divergence_theorem",
                        "green_identity", "waveguide_green"}
    assert max(res.values()) < 1e-12
