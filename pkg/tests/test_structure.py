"""Harmonic classification, bands, and region counting."""

import numpy as np
import pytest

from latres.structure import (BlochPoint, StructureParams, ambient_dispersion,
                              classify_harmonics, propagating_count,
                              region_diagram, waveguide_band_matrix,
                              waveguide_bands, _harmonic_arrays)


def test_params_validation():
    with pytest.raises(ValueError):
        StructureParams(N=2, masses=[1.0], springs=[1.0, 1.0], gammas=[1, 1])
    with pytest.raises(ValueError):
        StructureParams(N=2, masses=[1.0, -1.0], springs=[1.0, 1.0],
                        gammas=[1, 1])
    with pytest.raises(ValueError):
        StructureParams(N=2, masses=[1.0, 1.0], springs=[0.0, 1.0],
                        gammas=[1, 1])


def test_params_json_roundtrip(tmp_path, fixture1):
    doc = fixture1.to_dict()
    p = StructureParams.from_dict(doc)
    assert p.N == fixture1.N
    assert np.allclose(p.masses, fixture1.masses)
    assert np.allclose(p.gammas, fixture1.gammas)
    # complex couplings via {"re", "im"} objects
    doc["gammas"][0] = {"re": 1.5, "im": -0.25}
    p = StructureParams.from_dict(doc)
    assert p.gammas[0] == 1.5 - 0.25j


def test_ambient_dispersion_range():
    th = np.linspace(0, 0.5, 101)
    ph = np.linspace(0, 0.5, 101)
    w = ambient_dispersion(th[:, None], ph[None, :])
    assert w.min() == pytest.approx(0.0)
    assert w.max() == pytest.approx(8.0)
    assert ambient_dispersion(0.25, 0.25) == pytest.approx(4.0)


def test_classification_kinds(fixture1):
    hs = classify_harmonics(fixture1, BlochPoint(0.2, 1.5))
    kinds = [h.kind for h in hs.harmonics]
    assert kinds == ["propagating", "evanescent"]
    assert hs.propagating == (0,)
    # order 0 exponent matches the closed form acos(chi)/2pi
    chi0 = (4.0 - 1.5) / 2.0 - np.cos(2 * np.pi * 0.1)
    assert hs.theta[0] == pytest.approx(np.arccos(chi0) / (2 * np.pi))
    # the evanescent exponent reproduces the dispersion relation
    for h in hs.harmonics:
        w = ambient_dispersion(h.theta, h.phi)
        assert abs(w - 1.5) < 1e-12


def test_band_edge_evanescent_class(fixture1):
    # high frequency: chi < -1 for some order puts Re theta at 1/2
    hs = classify_harmonics(fixture1, BlochPoint(0.1, 7.5))
    kinds = {h.kind for h in hs.harmonics}
    assert "band-edge-evanescent" in kinds
    for h in hs.harmonics:
        if h.kind == "band-edge-evanescent":
            assert h.theta.real == pytest.approx(0.5)
            assert h.theta.imag > 0
            w = ambient_dispersion(h.theta, h.phi)
            assert abs(w - 7.5) < 1e-12


def test_threshold_flagging(fixture1):
    # at (kappa, omega) = (0, 4) both orders sit exactly on threshold curves:
    # chi_0 = -1 and chi_1 = +1
    hs = classify_harmonics(fixture1, BlochPoint(0.0, 4.0))
    assert hs.has_threshold
    assert all(h.kind == "linear-threshold" for h in hs.harmonics)


def test_complex_omega_continuation_sign_law(fixture1):
    # continued propagating order must move into the matching half plane
    hs = classify_harmonics(fixture1, BlochPoint(0.2, 1.5 - 1e-4j))
    th = hs.theta[0]
    lhs = np.sin(2 * np.pi * th.real) * 2.0 * np.sinh(2 * np.pi * th.imag)
    assert abs(lhs - (-1e-4)) < 1e-8
    w = ambient_dispersion(th, hs.phi[0])
    assert abs(w - (1.5 - 1e-4j)) < 1e-10


def test_waveguide_bands_hermitian_and_range(fixture1):
    for kap in (0.0, 0.17, 0.5):
        B = waveguide_band_matrix(fixture1, kap)
        assert np.allclose(B, B.conj().T)
        bands = waveguide_bands(fixture1, kap)
        assert np.all(np.diff(bands) >= 0)
        assert np.all(bands >= -1e-12)
    # kappa=0 bottom band is the zero (translation) mode of the free chain
    assert waveguide_bands(fixture1, 0.0)[0] == pytest.approx(0.0, abs=1e-12)


def test_bands_frozen_value(fixture1):
    bands = waveguide_bands(fixture1, 0.3)
    assert bands[0] == pytest.approx(0.5299572145389398, rel=1e-12)
    assert bands[1] == pytest.approx(2.47004278546106, rel=1e-12)


def test_region_diagram_counts(fixture1):
    kg = np.linspace(-0.5, 0.5, 21)
    wg = np.linspace(0.1, 7.9, 41)
    diag = region_diagram(fixture1, kg, wg)
    assert diag.counts.shape == (21, 41)
    for i, kap in enumerate(kg):
        for j, om in enumerate(wg):
            if not diag.threshold_mask[i, j]:
                assert diag.counts[i, j] == propagating_count(fixture1, kap, om)
    assert diag.counts.max() <= fixture1.N


def test_harmonic_arrays_phi_ladder():
    phi, theta, kinds, prop = _harmonic_arrays(4, 0.3, 2.0)
    assert np.allclose(phi, (0.3 + np.arange(4)) / 4.0)
    assert len(kinds) == 4
