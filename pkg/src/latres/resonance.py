"""Transmission anomalies: peak/dip curves, local fits, enhancement, bifurcation.

Near a guided mode the transmission swings between exactly 0 and 1 along two
real-analytic frequency curves omega_a(kappa) (peak) and omega_b(kappa) (dip)
that emanate from (kappa0, omega0).  Their quadratic expansions, together
with the complex dispersion curve and a smooth background, reproduce the full
anomaly through a closed-form approximation, and the chain amplitude at the
optimally detuned frequency diverges like 1/kt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, fsolve, least_squares

from .structure import BlochPoint, StructureParams
from .scattering import IncidentField, solve_scattering
from .guided import (DispersionFit, GuidedMode, find_guided_modes,
                     guided_mode_criteria_n2, null_vector, sigma_min)


def _outgoing_pair(params, kappa, omega, order=0):
    """Complex reflection and transmission coefficients (a_minus, b_plus)."""
    sol = solve_scattering(params, BlochPoint(kappa, omega),
                           IncidentField.unit_left(params.N, order))
    return sol.a_minus[order], sol.b_plus[order], sol.c


def _window_root(params, kappa, center, halfw, which, order=0,
                 grid_pts: int = 81, zooms: int = 6, tol: float = 1e-13):
    """Zero of the reflection ('a') or transmission ('b') coefficient in omega.

    The resonance is much narrower than the search window (its width scales
    with Im(curvature) * kt^2), so a naive Newton from the window center jumps
    to remote roots.  Instead: iteratively zoom a coarse modulus grid onto the
    minimum, then polish with an unclamped complex-secant Newton and demand
    the root lands back on the real axis inside the window.
    """
    idx = 0 if which == "a" else 1
    c, h = center, halfw
    for _ in range(zooms):
        ws = np.linspace(c - h, c + h, grid_pts)
        vals = [abs(_outgoing_pair(params, kappa, w, order)[idx]) for w in ws]
        i = int(np.argmin(vals))
        c, h = ws[i], 2.2 * (ws[1] - ws[0])
        if vals[i] < 1e-3:
            break
    om = complex(c)
    for _ in range(60):
        f = _outgoing_pair(params, kappa, om, order)[idx]
        if abs(f) < tol:
            break
        hs = 1e-10 * (1.0 + abs(om))
        f2 = _outgoing_pair(params, kappa, om + hs, order)[idx]
        om = om - f / ((f2 - f) / hs)
    if abs(om.imag) > 1e-8:
        raise RuntimeError(f"root left the real axis: Im omega = {om.imag}")
    if abs(om.real - center) > 4.0 * halfw:
        raise RuntimeError("root escaped the search window")
    return float(om.real)


@dataclass(frozen=True)
class PeakDipCurves:
    """Sampled peak (T=1) and dip (T=0) frequency curves around a mode."""

    kappa0: float
    omega0: float
    kt: np.ndarray
    omega_a: np.ndarray
    omega_b: np.ndarray
    t_at_peak: np.ndarray
    t_at_dip: np.ndarray


def peak_dip_curves(params: StructureParams, mode: GuidedMode,
                    fit: DispersionFit, kt_samples=None,
                    window_scale: float = 10.0) -> PeakDipCurves:
    """Root-find omega_a (reflection zero) and omega_b (transmission zero).

    The search window for each kt is centered on the real part of the
    continued dispersion curve with half-width window_scale*|curvature|*kt^2.
    """
    if kt_samples is None:
        kt_samples = np.concatenate([np.linspace(-0.006, -0.00075, 8),
                                     np.linspace(0.00075, 0.006, 8)])
    kt_samples = np.asarray(kt_samples, dtype=float)
    oa, ob, tpk, tdp = [], [], [], []
    for kt in kt_samples:
        center = mode.omega0 - fit.slope * kt - fit.curvature.real * kt ** 2
        halfw = max(window_scale * abs(fit.curvature) * kt ** 2, 1e-9)
        wa = _window_root(params, mode.kappa0 + kt, center, halfw, "a")
        wb = _window_root(params, mode.kappa0 + kt, center, halfw, "b")
        oa.append(wa)
        ob.append(wb)
        tpk.append(abs(_outgoing_pair(params, mode.kappa0 + kt, wa)[1]))
        tdp.append(abs(_outgoing_pair(params, mode.kappa0 + kt, wb)[1]))
    return PeakDipCurves(kappa0=mode.kappa0, omega0=mode.omega0,
                         kt=kt_samples, omega_a=np.array(oa),
                         omega_b=np.array(ob), t_at_peak=np.array(tpk),
                         t_at_dip=np.array(tdp))


@dataclass(frozen=True)
class AnomalyFit:
    """All coefficients of the local transmission model around a mode.

    slope/curvature come from the dispersion fit; peak_curvature and
    dip_curvature from cubic fits of the peak/dip curves (their shared linear
    coefficient must equal -slope); t_bg is the background transmission at
    kappa0 extrapolated to omega0 with r_bg = sqrt(1 - t_bg^2); bg_slope is
    the linear frequency coefficient of the background; eta is the background
    parameter of the two-sided model fitted globally over the window.
    """

    kappa0: float
    omega0: float
    slope: float
    curvature: complex
    peak_curvature: float
    dip_curvature: float
    peak_linear: float
    dip_linear: float
    t_bg: float
    r_bg: float
    bg_slope: float
    eta: float
    ordering_sign: int


def fit_anomaly(params: StructureParams, mode: GuidedMode, fit: DispersionFit,
                curves: PeakDipCurves = None) -> AnomalyFit:
    """Extract the anomaly coefficients from direct solves around the mode."""
    if curves is None:
        curves = peak_dip_curves(params, mode, fit)
    kk = np.concatenate([[0.0], curves.kt])
    aa = np.concatenate([[mode.omega0], curves.omega_a])
    bb = np.concatenate([[mode.omega0], curves.omega_b])
    pa = np.polyfit(kk, aa, 3)
    pb = np.polyfit(kk, bb, 3)
    peak_curv, dip_curv = -pa[1], -pb[1]
    peak_lin, dip_lin = -pa[2], -pb[2]
    signs = np.sign(curves.omega_a - curves.omega_b)
    ordering = int(signs[0]) if np.all(signs == signs[0]) else 0

    # background transmission at kappa0: quadratic fit in the detuning,
    # excluding the resonance point itself
    wt = np.linspace(-0.004, 0.004, 33)
    wt = wt[np.abs(wt) > 1e-6]
    Ts = np.array([abs(_outgoing_pair(params, mode.kappa0,
                                      mode.omega0 + w)[1]) for w in wt])
    p = np.polyfit(wt, Ts, 2)
    t_bg = float(p[2])
    r_bg = float(np.sqrt(max(0.0, 1.0 - t_bg ** 2)))
    bg_slope = float(p[1] / t_bg) if t_bg != 0 else 0.0

    # two-sided model fitted over the whole anomaly window
    data = []
    for kt in (-0.006, -0.004, -0.002, 0.002, 0.004, 0.006):
        ws = -fit.slope * kt + np.linspace(-12 * abs(fit.curvature) * kt ** 2,
                                           12 * abs(fit.curvature) * kt ** 2, 40)
        for w in ws:
            data.append((kt, w, abs(_outgoing_pair(
                params, mode.kappa0 + kt, mode.omega0 + w)[1])))
    data = np.array(data)

    def model(p_, kt, w):
        t0, eta, r2_, t2_ = p_
        num = (t0 ** 2 * np.abs(w + fit.slope * kt + t2_ * kt ** 2) ** 2
               * np.abs(1 + eta * w) ** 2)
        den = ((1 - t0 ** 2)
               * np.abs(w + fit.slope * kt + r2_ * kt ** 2) ** 2 + num)
        return np.sqrt(num / den)

    res = least_squares(
        lambda p_: model(p_, data[:, 0], data[:, 1]) - data[:, 2],
        [max(t_bg, 0.1), bg_slope, peak_curv.real, dip_curv.real])
    eta = float(res.x[1])

    return AnomalyFit(
        kappa0=mode.kappa0, omega0=mode.omega0, slope=fit.slope,
        curvature=fit.curvature, peak_curvature=float(peak_curv),
        dip_curvature=float(dip_curv), peak_linear=float(peak_lin),
        dip_linear=float(dip_lin), t_bg=t_bg, r_bg=r_bg, bg_slope=bg_slope,
        eta=eta, ordering_sign=ordering)


def approx_transmission(fit: AnomalyFit, kt, wt, variant: str = "one_sided"):
    """Closed-form local transmission model.

    one_sided: T = t_bg |wt + slope*kt + dip_curvature*kt^2|
                   / |wt + slope*kt + curvature*kt^2| * |1 + bg_slope*wt|.
    two_sided: the energy-balanced form with both peak and dip quadratics and
    the eta background.
    """
    kt = np.asarray(kt, dtype=float)
    wt = np.asarray(wt, dtype=float)
    num_lin = wt + fit.slope * kt
    if variant == "one_sided":
        num = np.abs(num_lin + fit.dip_curvature * kt ** 2)
        den = np.abs(num_lin + fit.curvature * kt ** 2)
        out = np.where(den == 0.0, fit.t_bg,
                       fit.t_bg * np.divide(num, np.where(den == 0, 1.0, den))
                       * np.abs(1.0 + fit.bg_slope * wt))
        return out if out.ndim else float(out)
    if variant == "two_sided":
        num = (fit.t_bg ** 2 * np.abs(num_lin + fit.dip_curvature * kt ** 2) ** 2
               * np.abs(1.0 + fit.eta * wt) ** 2)
        den = (fit.r_bg ** 2 * np.abs(num_lin + fit.peak_curvature * kt ** 2) ** 2
               + num)
        out = np.where(den == 0.0, fit.t_bg, np.sqrt(np.divide(
            num, np.where(den == 0, 1.0, den))))
        return out if out.ndim else float(out)
    raise ValueError(f"unknown variant {variant!r}")


def approx_error_sup(params: StructureParams, fit: AnomalyFit,
                     kt_max: float, num_kt: int = 6, num_w: int = 25,
                     window_scale: float = 8.0,
                     variant: str = "two_sided") -> float:
    """Sup of |T_model - T_direct| over the anomaly window of half-width kt_max."""
    worst = 0.0
    for kt in np.linspace(-kt_max, kt_max, num_kt):
        if abs(kt) < 0.05 * kt_max:
            continue
        half = window_scale * abs(fit.curvature) * kt ** 2
        for w in -fit.slope * kt + np.linspace(-half, half, num_w):
            t_direct = abs(_outgoing_pair(params, fit.kappa0 + kt,
                                          fit.omega0 + w)[1])
            t_model = approx_transmission(fit, kt, w, variant)
            worst = max(worst, abs(t_model - t_direct))
    return worst


def enhancement_scan(params: StructureParams, mode: GuidedMode,
                     fit: DispersionFit, kt_list):
    """Chain amplitude at the optimally detuned frequency for each kt.

    Returns rows (kt, omega_opt, amplitude) with amplitude the root sum of
    squares of the chain coefficients under unit left incidence.
    """
    rows = []
    for kt in kt_list:
        om_opt = mode.omega0 - fit.slope * kt - fit.curvature.real * kt ** 2
        # direct solve even when B is badly conditioned: at the optimal
        # detuning the system sits close to the dispersion curve by design,
        # and the least-squares fallback would suppress the resonant response
        sol = solve_scattering(params, BlochPoint(mode.kappa0 + kt, om_opt),
                               IncidentField.unit_left(params.N),
                               cond_limit=np.inf)
        rows.append((float(kt), float(om_opt),
                     float(np.sqrt(np.sum(np.abs(sol.c) ** 2)))))
    return rows


@dataclass(frozen=True)
class BifurcationBranch:
    """The guided-mode branch near the critical coupling gamma0*."""

    gamma0_star: float
    omega0_star: float
    samples: tuple          # (gamma0, kappa0 >= 0, omega0)
    sqrt_slope: float       # log-log slope of kappa0 vs (gamma0* - gamma0)
    g_curvature_sign: int


def find_bifurcation(params: StructureParams, gamma0_bracket,
                     omega_seed: float = None, gamma_index: int = 0):
    """Critical coupling where the mode pair is created at kappa = 0.

    Solves the two real criterion equations at kappa = 0 for
    (omega, gamma0) by Newton, seeded from the bracket midpoint.
    Returns (gamma0_star, omega0_star).
    """
    lo, hi = gamma0_bracket
    g_seed = 0.5 * (lo + hi)
    if omega_seed is None:
        # coarse scan of the criterion residuals at kappa = 0 for a seed
        p0 = params.replace_gamma(gamma_index, g_seed)
        ws = np.linspace(0.05, 3.95, 160)
        resid = [sum(abs(v) ** 2 for v in guided_mode_criteria_n2(p0, 0.0, w))
                 for w in ws]
        omega_seed = float(ws[int(np.argmin(resid))])

    def eqs(x):
        om, g0 = x
        p = params.replace_gamma(gamma_index, g0)
        c1, c2 = guided_mode_criteria_n2(p, 0.0, om)
        return [np.real(c1), np.real(c2)]

    root, info, ok, msg = fsolve(eqs, [omega_seed, g_seed], xtol=1e-14,
                                 full_output=True)
    if ok != 1:
        raise RuntimeError(f"bifurcation solve failed: {msg}")
    om_star, g_star = float(root[0]), float(root[1])
    if not (lo <= g_star <= hi):
        raise RuntimeError(
            f"bifurcation root gamma0={g_star} escaped bracket {gamma0_bracket}")
    return g_star, om_star


def _gamma_of_kappa(params, kappa, seed, gamma_index=0):
    """Coupling value at which a guided mode sits at the given kappa.

    Inverts the criteria: solves them in (omega, gamma0) at fixed kappa.
    Returns (gamma0, omega0).
    """
    def eqs(x):
        om, g0 = x
        p = params.replace_gamma(gamma_index, g0)
        c1, c2 = guided_mode_criteria_n2(p, kappa, om)
        return [np.real(c1), np.real(c2)]

    root = fsolve(eqs, seed, xtol=1e-12)
    return float(root[1]), float(root[0])


def trace_branch(params: StructureParams, gamma0_values,
                 gamma0_bracket=None, gamma_index: int = 0,
                 kappa_max: float = 0.2) -> BifurcationBranch:
    """Follow the mode pair from the bifurcation point down in gamma0.

    For each requested gamma0 the branch position kappa0 solves
    g(kappa0) = gamma0, where g(kappa) is the coupling that puts a mode at
    kappa (a well-conditioned scalar equation bracketed by bisection); the
    square-root law kappa0 ~ sqrt(gamma0* - gamma0) is then fitted on a
    log-log scale.
    """
    if gamma0_bracket is None:
        gmin = min(gamma0_values)
        gamma0_bracket = (gmin - 0.5, max(gamma0_values) + 0.5)
    g_star, om_star = find_bifurcation(params, gamma0_bracket,
                                       gamma_index=gamma_index)

    seed = [om_star, g_star]

    def g_of_kappa(kap):
        g0, _ = _gamma_of_kappa(params, kap, seed, gamma_index)
        return g0

    # curvature sign of g at 0: does the branch live below or above g_star
    h = 1e-3
    sign = int(np.sign(g_of_kappa(h) - g_star))

    samples = []
    for g0 in sorted(gamma0_values, reverse=(sign < 0)):
        target = g0
        f = lambda kap: g_of_kappa(kap) - target
        lo, hi = 1e-6, 1e-3
        while f(lo) * f(hi) > 0:
            hi *= 2.0
            if hi > kappa_max:
                raise RuntimeError(
                    f"no branch point for gamma0={g0} below kappa={kappa_max}")
        kap0 = brentq(f, lo, hi, xtol=1e-14)
        _, om0 = _gamma_of_kappa(params, kap0, seed, gamma_index)
        samples.append((float(g0), float(kap0), float(om0)))

    gs = np.array([s[0] for s in samples])
    ks = np.array([s[1] for s in samples])
    dist = np.abs(g_star - gs)
    if len(samples) >= 2:
        slope = float(np.polyfit(np.log(dist), np.log(ks), 1)[0])
    else:
        slope = float("nan")
    return BifurcationBranch(gamma0_star=g_star, omega0_star=om_star,
                             samples=tuple(samples), sqrt_slope=slope,
                             g_curvature_sign=sign)
