"""Guided-mode location, explicit N=2 criteria, and dispersion continuation."""

import numpy as np
import pytest

from latres.structure import BlochPoint
from latres.guided import (EigenvalueTracker, eigenvalue_ell,
                           find_guided_modes, guided_mode_criteria_n2,
                           sigma_min)

MODE1_KAPPA = 0.06167366437892
MODE1_OMEGA = 0.97916666666667


def test_mode1_location(mode1):
    assert mode1.kappa0 == pytest.approx(MODE1_KAPPA, abs=1e-10)
    assert mode1.omega0 == pytest.approx(MODE1_OMEGA, abs=1e-10)
    assert mode1.sigma < 1e-12
    assert mode1.region_size == 1


def test_sigma_min_small_only_at_mode(fixture1, mode1):
    at_mode = sigma_min(fixture1, BlochPoint(mode1.kappa0, mode1.omega0))
    nearby = sigma_min(fixture1, BlochPoint(mode1.kappa0 + 0.01,
                                            mode1.omega0))
    assert at_mode < 1e-12
    assert nearby > 1e-4


def test_criteria_vanish_at_mode(fixture1, mode1):
    c1, c2 = guided_mode_criteria_n2(fixture1, mode1.kappa0, mode1.omega0)
    assert abs(c1) < 1e-10
    assert abs(c2) < 1e-10
    c1, c2 = guided_mode_criteria_n2(fixture1, mode1.kappa0 + 0.02,
                                     mode1.omega0)
    assert abs(c1) + abs(c2) > 1e-3


def test_criteria_require_n2(n3_params):
    with pytest.raises(ValueError):
        guided_mode_criteria_n2(n3_params, 0.0, 1.0)


def test_no_mode_for_uniform_coupling(uniform_coupling):
    modes = find_guided_modes(uniform_coupling, (0.0, 0.3, 0.7, 1.2),
                              density=60)
    assert modes == []


def test_mode_null_vector_solves_homogeneous(fixture1, mode1):
    # the chain part of the null vector is nonzero (the mode lives in the
    # waveguide) and the reduced system maps the vector to ~0
    assert np.linalg.norm(mode1.c) > 0.1 * np.linalg.norm(mode1.null_vector)
    assert mode1.sigma < 1e-12


def test_n3_antisymmetric_mode(n3_params):
    modes = find_guided_modes(n3_params, (-0.05, 0.05, 1.1, 1.3), density=80)
    assert len(modes) == 1
    mode = modes[0]
    assert mode.kappa0 == 0.0
    assert mode.omega0 == pytest.approx(1.1914657677046268, abs=1e-9)
    c = mode.c
    c = c / np.max(np.abs(c))
    assert abs(c[0]) <= 1e-10
    assert abs(c[1] + c[2]) <= 1e-8


def test_eigenvalue_zero_at_mode(fixture1, mode1):
    ell = eigenvalue_ell(fixture1, BlochPoint(mode1.kappa0, mode1.omega0))
    assert abs(ell) < 1e-10


def test_tracker_newton_recovers_mode_frequency(fixture1, mode1):
    tracker = EigenvalueTracker(fixture1)
    tracker.value(mode1.kappa0, mode1.omega0)
    om = tracker.solve_omega(mode1.kappa0, mode1.omega0 + 1e-4)
    assert abs(om - mode1.omega0) < 1e-10


def test_dispersion_fit_frozen_coefficients(fit1):
    assert fit1.slope == pytest.approx(0.32989868701667, rel=1e-8)
    assert fit1.curvature.real == pytest.approx(2.637894301650, rel=1e-6)
    assert fit1.curvature.imag == pytest.approx(0.072210750373, rel=1e-4)
    assert fit1.fit_residual < 1e-10
    assert abs(fit1.slope_imag) < 1e-8


def test_dispersion_stays_in_lower_half_plane(fit1, bif_fit):
    for fit in (fit1, bif_fit):
        assert fit.max_im_omega <= 1e-12
        assert fit.curvature.imag >= 0.0


def test_bifurcation_fixture_dispersion_is_even(bif_fit):
    assert abs(bif_fit.slope) <= 1e-8
    assert bif_fit.curvature.real == pytest.approx(2.766832117691, rel=1e-6)


def test_bifurcation_mode_is_standing(bif_mode):
    assert bif_mode.kappa0 == 0.0
    assert bif_mode.omega0 == pytest.approx(0.9778859327860294, abs=1e-9)
