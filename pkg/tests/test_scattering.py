"""Fourier scattering solver: frozen values, conservation, field residuals."""

import numpy as np
import pytest

from latres.structure import BlochPoint, ThresholdError, classify_harmonics
from latres.scattering import (IncidentField, assemble_system, column_flux,
                               lattice_residual, reconstruct_field,
                               scan_transmission, solve_scattering)

POINT = BlochPoint(0.2, 1.5)


def test_assembled_shapes(fixture1):
    sys_ = assemble_system(fixture1, POINT, IncidentField.unit_left(2))
    assert sys_.B.shape == (6, 6)
    assert sys_.F.shape == (6,)
    assert sys_.harmonics.propagating == (0,)


def test_frozen_solution_values(fixture1):
    sol = solve_scattering(fixture1, POINT)
    assert sol.T == pytest.approx(0.3776283265443278, abs=1e-13)
    assert sol.R == pytest.approx(0.925957259808103, abs=1e-13)
    assert sol.a_minus[0] == pytest.approx(
        -0.8573968469913306 - 0.34966769047290536j, abs=1e-12)
    assert sol.b_plus[0] == pytest.approx(
        0.14260315300866935 - 0.3496676904729053j, abs=1e-12)
    assert sol.c[0] == pytest.approx(
        0.16764957417194712 - 0.4110823510747128j, abs=1e-12)
    assert sol.c[1] == pytest.approx(
        0.014311328437585065 - 0.035091854961057094j, abs=1e-12)
    assert sol.energy_residual < 1e-14
    assert sol.flags == ()


def test_energy_conservation_unitarity(fixture1):
    sol = solve_scattering(fixture1, POINT)
    assert sol.T ** 2 + sol.R ** 2 == pytest.approx(1.0, abs=1e-13)


def test_right_incidence_same_transmission(fixture1):
    # with incidence from the right the transmitted wave exits to the left,
    # i.e. on the a_minus coefficient (reported as R)
    left = solve_scattering(fixture1, POINT, IncidentField.unit_left(2))
    right = solve_scattering(fixture1, POINT, IncidentField.unit_right(2))
    assert right.R == pytest.approx(left.T, abs=1e-12)


def test_lattice_equation_residual(fixture1):
    sol = solve_scattering(fixture1, POINT)
    for m, n in ((-4, 0), (-2, 1), (1, 0), (3, 1), (6, 5)):
        assert lattice_residual(sol, m, n) < 1e-12


def test_reconstructed_field_pseudo_periodic(fixture1):
    sol = solve_scattering(fixture1, POINT)
    n = np.arange(2)
    u0, z0 = reconstruct_field(sol, -3, n)
    u2, z2 = reconstruct_field(sol, -3, n + 2)
    tw = np.exp(2j * np.pi * 0.2)
    assert np.max(np.abs(u2 - tw * u0)) < 1e-12
    assert np.max(np.abs(z2 - tw * z0)) < 1e-12


def test_column_flux_independent_of_m(fixture1):
    sol = solve_scattering(fixture1, POINT)
    fluxes = [column_flux(sol, m) for m in (-5, -2, 1, 4, 9)]
    assert np.max(np.abs(np.diff(fluxes))) < 1e-12


def test_incident_on_evanescent_order_rejected(fixture1):
    # at this point order 1 is evanescent: incidence on it is unphysical
    with pytest.raises(ValueError):
        solve_scattering(fixture1, POINT, IncidentField.unit_left(2, order=1))


def test_threshold_point_rejected(fixture1):
    with pytest.raises(ThresholdError):
        solve_scattering(fixture1, BlochPoint(0.0, 4.0))


def test_multi_propagating_flux_weighted(fixture1):
    point = BlochPoint(0.1, 4.05)
    hs = classify_harmonics(fixture1, point)
    assert len(hs.propagating) == 2
    sol = solve_scattering(fixture1, point)
    assert "multi_prop_flux_weighted" in sol.flags
    # flux-weighted T, R still satisfy energy balance
    assert sol.T ** 2 + sol.R ** 2 == pytest.approx(1.0, abs=1e-12)


def test_random_incidence_conservation(fixture1, rng):
    for _ in range(50):
        kap = rng.uniform(-0.5, 0.5)
        om = rng.uniform(0.1, 7.9)
        try:
            hs = classify_harmonics(fixture1, BlochPoint(kap, om))
        except ThresholdError:
            continue
        if not hs.propagating or hs.has_threshold:
            continue
        a = np.zeros(2, dtype=complex)
        b = np.zeros(2, dtype=complex)
        for l in hs.propagating:
            a[l] = rng.standard_normal() + 1j * rng.standard_normal()
            b[l] = rng.standard_normal() + 1j * rng.standard_normal()
        sol = solve_scattering(fixture1, BlochPoint(kap, om),
                               IncidentField(a, b))
        assert sol.energy_residual <= 1e-12 * sol.incident_flux


def test_near_singular_flagged_at_mode(fixture1, mode1):
    sol = solve_scattering(
        fixture1, BlochPoint(mode1.kappa0, mode1.omega0))
    assert "near_singular" in sol.flags
    assert sol.condition > 1e12


def test_scan_rows_and_sentinels(fixture1):
    rows = scan_transmission(fixture1, [0.2], [1.5])
    kap, om, T, R, resid, flags = rows[0]
    assert T == pytest.approx(0.3776283265443278, abs=1e-12)
    # at (0, 4) both orders sit on threshold curves
    rows = scan_transmission(fixture1, [0.0], [4.0])
    assert rows[0][5] == "threshold"
    assert np.isnan(rows[0][2])
    # a point where order 0 does not propagate
    rows = scan_transmission(fixture1, [0.2], [7.9])
    assert rows[0][5] == "incident_not_propagating"
