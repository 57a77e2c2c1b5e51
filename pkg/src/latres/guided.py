"""Guided-mode location, the explicit N=2 criteria, and dispersion fitting.

A guided mode is a sourceless solution whose propagating coefficients all
vanish: an isolated real pair (kappa0, omega0) where the homogeneous system,
restricted to the evanescent and chain unknowns, becomes singular.  Around
such a pair the zero set of the tracked eigenvalue of the full system defines
a complex dispersion curve omega_gm(kappa) whose local quadratic expansion
drives every resonance quantity downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import warnings

import numpy as np
from scipy.optimize import fsolve, minimize

from .structure import (BlochPoint, StructureParams, ThresholdError,
                        _harmonic_arrays)
from .scattering import _assemble, IncidentField

TWO_PI = 2.0 * np.pi


def _homogeneous_matrix(params, kappa, omega):
    zero = np.zeros(params.N, dtype=complex)
    B, _, phi, theta, kinds, prop = _assemble(params, kappa, omega, zero, zero)
    return B, prop


def sigma_min(params: StructureParams, point: BlochPoint) -> float:
    """Normalized smallest singular value of the reduced homogeneous system.

    The columns of the propagating outgoing coefficients are deleted (their
    amplitudes are forced to zero), leaving an overdetermined
    3N x (3N - 2 |P|) matrix; the ratio of its smallest to largest singular
    value vanishes exactly at a guided mode.
    """
    N = params.N
    B, prop = _homogeneous_matrix(params, point.kappa, point.omega)
    prop = set(int(p) for p in prop)
    keep = ([l for l in range(N) if l not in prop]
            + [N + l for l in range(N) if l not in prop]
            + [2 * N + l for l in range(N)])
    s = np.linalg.svd(B[:, keep], compute_uv=False)
    return float(s[-1] / s[0])


def null_vector(params: StructureParams, point: BlochPoint):
    """Reduced null vector (evanescent a_minus, b_plus, then c) at a mode."""
    N = params.N
    B, prop = _homogeneous_matrix(params, point.kappa, point.omega)
    prop = set(int(p) for p in prop)
    keep = ([l for l in range(N) if l not in prop]
            + [N + l for l in range(N) if l not in prop]
            + [2 * N + l for l in range(N)])
    _, _, Vh = np.linalg.svd(B[:, keep])
    vec = Vh[-1].conj()
    labels = ([("a_minus", l) for l in range(N) if l not in prop]
              + [("b_plus", l) for l in range(N) if l not in prop]
              + [("c", l) for l in range(N)])
    return vec, labels


@dataclass(frozen=True)
class GuidedMode:
    """An isolated real (kappa0, omega0) with its confined field profile."""

    kappa0: float
    omega0: float
    sigma: float
    null_vector: np.ndarray
    null_labels: tuple
    region_size: int

    @property
    def c(self) -> np.ndarray:
        """Chain coefficients of the null vector."""
        idx = [i for i, (kind, _) in enumerate(self.null_labels) if kind == "c"]
        return self.null_vector[idx]


def guided_mode_criteria_n2(params: StructureParams, kappa: float,
                            omega: float):
    """The two complex residuals whose common zero marks an N=2 guided mode.

    Valid in the single-propagating region where the second order is
    evanescent; there sin(2 pi theta_1) = i sqrt(chi_1^2 - 1) with
    chi_1 = 2 - omega/2 + cos(pi kappa).
    """
    if params.N != 2:
        raise ValueError("criteria are specific to period N=2")
    g0, g1 = params.gammas
    g0c, g1c = np.conj(g0), np.conj(g1)
    M0, M1 = params.masses
    k0, k1 = params.springs
    chi1 = 2.0 - omega / 2.0 + np.cos(np.pi * kappa)
    s = 1j * np.sqrt(chi1 ** 2 - 1.0 + 0j)
    c1 = ((g1c - g0c) / (g0c + g1c)
          * ((k0 + k1) * (1 / M1 - 1 / M0)
             + 2j * np.sin(np.pi * kappa) / np.sqrt(M0 * M1) * (k0 - k1))
          - g0c * g1c * (g0 + g1) / ((g0c + g1c) * 1j * s)
          + 2 * omega
          + (k0 + k1) * (-1 / M0 - 1 / M1 - 2 * np.cos(np.pi * kappa) / np.sqrt(M0 * M1)))
    c2 = ((g1c - g0c) / (g0c + g1c)
          * (2 * omega + (k0 + k1) * (2 * np.cos(np.pi * kappa) / np.sqrt(M0 * M1)
                                      - 1 / M0 - 1 / M1))
          + g0c * g1c * (g1 - g0) / ((g0c + g1c) * 1j * s)
          + (k0 + k1) * (1 / M1 - 1 / M0)
          + 2j * np.sin(np.pi * kappa) * (k1 - k0) / np.sqrt(M0 * M1))
    return c1, c2


def _in_single_prop_region(params, kappa, omega):
    _, _, kinds, prop = _harmonic_arrays(params.N, kappa, omega)
    return len(prop) >= 1 and "linear-threshold" not in kinds


def find_guided_modes(params: StructureParams, window, density: int = 400,
                      tol: float = 1e-8, coarse_tol: float = 0.05):
    """Scan sigma_min over a window and polish its deep local minima.

    window = (kappa_min, kappa_max, omega_min, omega_max).  Grid local minima
    below coarse_tol are refined by Nelder-Mead; candidates whose refined
    sigma_min falls below tol are kept, then +-kappa duplicates are merged
    (the representative has kappa0 >= 0).
    """
    kmin, kmax, wmin, wmax = window
    kappas = np.linspace(kmin, kmax, density)
    omegas = np.linspace(wmin, wmax, density)
    grid = np.full((density, density), np.inf)
    for i, kap in enumerate(kappas):
        for j, om in enumerate(omegas):
            try:
                grid[i, j] = sigma_min(params, BlochPoint(kap, om))
            except ThresholdError:
                continue

    candidates = []
    interior = grid[1:-1, 1:-1]
    is_min = np.ones_like(interior, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            is_min &= interior <= grid[1 + di:density - 1 + di,
                                       1 + dj:density - 1 + dj]
    ii, jj = np.where(is_min & (interior < coarse_tol))
    for i, j in zip(ii + 1, jj + 1):
        candidates.append((kappas[i], omegas[j]))

    modes = []
    seen = []
    for kap, om in candidates:
        f = lambda x: sigma_min(params, BlochPoint(x[0], x[1]))
        res = minimize(f, [kap, om], method="Nelder-Mead",
                       options=dict(xatol=1e-13, fatol=1e-16, maxiter=2000))
        kap0, om0 = res.x
        sig = res.fun
        if params.N == 2 and sig < 1e-4:
            # polish against the explicit criteria when they apply; fsolve
            # grumbles once the residual hits roundoff, which is the goal here
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    root = fsolve(
                        lambda x: [np.real(v) for v in
                                   guided_mode_criteria_n2(params, x[0], x[1])],
                        [kap0, om0], xtol=1e-14)
                trial = sigma_min(params, BlochPoint(root[0], root[1]))
                if trial < sig:
                    kap0, om0, sig = root[0], root[1], trial
            except (ValueError, FloatingPointError):
                pass
        if sig > tol:
            continue
        if abs(kap0) < 1e-7:
            # below the +-kappa merge scale: a symmetric standing mode
            kap0 = 0.0
        kap0 = abs(kap0)  # +-kappa representative
        if any(abs(kap0 - a) < 1e-6 and abs(om0 - b) < 1e-6 for a, b in seen):
            continue
        seen.append((kap0, om0))
        vec, labels = null_vector(params, BlochPoint(kap0, om0))
        _, _, _, prop = _harmonic_arrays(params.N, kap0, om0)
        modes.append(GuidedMode(kappa0=float(kap0), omega0=float(om0),
                                sigma=float(sig), null_vector=vec,
                                null_labels=tuple(labels),
                                region_size=len(prop)))
    modes.sort(key=lambda m: (m.kappa0, m.omega0))
    return modes


class EigenvalueTracker:
    """Follow the smallest-magnitude eigenvalue of the full system matrix.

    Eigenvalues are matched between calls by eigenvector overlap rather than
    magnitude sorting, so the tracked branch does not swap near its zero.
    """

    def __init__(self, params: StructureParams, overlap_min: float = 0.7):
        self.params = params
        self.overlap_min = overlap_min
        self._vref = None

    def reset(self):
        self._vref = None

    def value(self, kappa, omega):
        B, _ = _homogeneous_matrix(self.params, kappa, omega)
        w, V = np.linalg.eig(B)
        if self._vref is None:
            i = int(np.argmin(np.abs(w)))
        else:
            ov = np.abs(self._vref.conj() @ V)
            i = int(np.argmax(ov))
            if ov[i] < self.overlap_min * np.linalg.norm(V[:, i]):
                raise RuntimeError(
                    f"lost eigenvalue track at (kappa={kappa}, omega={omega}): "
                    f"best overlap {ov[i]:.3f}")
        self._vref = V[:, i] / np.linalg.norm(V[:, i])
        return w[i]

    def eigenvector(self):
        return self._vref

    def solve_omega(self, kappa, omega_seed, tol: float = 1e-13,
                    max_iter: int = 80):
        """Newton in complex omega for a zero of the tracked eigenvalue."""
        om = complex(omega_seed)
        for _ in range(max_iter):
            val = self.value(kappa, om)
            if abs(val) < tol:
                return om
            h = 1e-7 * (1.0 + abs(om))
            val2 = self.value(kappa, om + h)
            om = om - val / ((val2 - val) / h)
        raise RuntimeError(f"eigenvalue Newton did not converge at kappa={kappa}")


def eigenvalue_ell(params: StructureParams, point: BlochPoint,
                   tracker: EigenvalueTracker = None) -> complex:
    """Smallest-magnitude eigenvalue of the full 3N x 3N system at a point."""
    if tracker is None:
        tracker = EigenvalueTracker(params)
    return tracker.value(point.kappa, point.omega)


@dataclass(frozen=True)
class DispersionFit:
    """Local expansion omega_gm(kappa0 + kt) = omega0 - slope*kt - curvature*kt^2.

    slope is real (its fitted imaginary part must vanish); Im(curvature) >= 0,
    equivalently the continued curve stays in the closed lower half plane.
    """

    kappa0: float
    omega0: float
    slope: float
    curvature: complex
    fit_window: float
    fit_residual: float
    slope_imag: float
    max_im_omega: float
    samples: tuple  # ((kt, omega), ...)


def continue_and_fit_dispersion(params: StructureParams, mode: GuidedMode,
                                radius: float = 0.004, num: int = 10,
                                degree: int = 4) -> DispersionFit:
    """Continue the eigenvalue zero to complex omega on both sides of kappa0.

    Newton-solves the tracked eigenvalue for complex omega at real
    kappa = kappa0 + kt, marching outward in both directions, then
    least-squares fits a degree-`degree` polynomial in kt and reads the
    linear and quadratic coefficients.
    """
    kts = np.linspace(0.0, radius, num + 1)[1:]
    pts = [(0.0, complex(mode.omega0))]
    for sgn in (1.0, -1.0):
        tracker = EigenvalueTracker(params)
        tracker.value(mode.kappa0, mode.omega0)  # seed the eigenvector
        om_prev = complex(mode.omega0)
        for kt in sgn * kts:
            om_prev = tracker.solve_omega(mode.kappa0 + kt, om_prev)
            pts.append((float(kt), om_prev))
    pts.sort()
    kk = np.array([p[0] for p in pts])
    oo = np.array([p[1] for p in pts])
    V = np.vander(kk, degree + 1, increasing=True)
    coef, res, *_ = np.linalg.lstsq(V, oo, rcond=None)
    slope = -coef[1]
    curvature = -coef[2]
    fit_res = float(np.max(np.abs(V @ coef - oo)))
    if abs(slope.imag) > 1e-8:
        raise RuntimeError(
            f"dispersion linear coefficient has imaginary part {slope.imag}")
    return DispersionFit(
        kappa0=mode.kappa0, omega0=mode.omega0, slope=float(slope.real),
        curvature=complex(curvature), fit_window=float(radius),
        fit_residual=fit_res, slope_imag=float(slope.imag),
        max_im_omega=float(np.max(oo.imag)), samples=tuple(pts))
