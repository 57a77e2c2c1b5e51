"""Command-line entry point: every operation as a subcommand.

Structure parameters are read from a JSON config; results are emitted as CSV
(fixed column orders, 17 significant digits) or JSON.  Output is fully
deterministic for a given config and seed.  The LATRES_LOG environment
variable selects the logging level (DEBUG/INFO/WARNING/...).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .structure import (BlochPoint, StructureParams, ThresholdError,
                        classify_harmonics, region_diagram, waveguide_bands)
from .scattering import (IncidentField, column_flux, lattice_residual,
                         reconstruct_field, scan_transmission,
                         solve_scattering)
from .dtn import cross_validate, default_truncation, solve_truncated
from .guided import (continue_and_fit_dispersion, find_guided_modes,
                     sigma_min)
from .resonance import (approx_transmission, enhancement_scan, fit_anomaly,
                        find_bifurcation, peak_dip_curves, trace_branch)
from .timedomain import LatticeState, evolve, gaussian_pulse
from .discrete import identity_residuals

log = logging.getLogger("latres")

FMT = "%.17g"


def _fnum(x) -> str:
    return FMT % x


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w"), True


def _emit(path, lines):
    fh, close = _open_out(path)
    try:
        for line in lines:
            fh.write(line + "\n")
    finally:
        if close:
            fh.close()


def _grid(spec: str) -> np.ndarray:
    """Parse 'min,max,num' into a linspace."""
    lo, hi, num = spec.split(",")
    return np.linspace(float(lo), float(hi), int(num))


def _params(args) -> StructureParams:
    if not args.config:
        raise SystemExit("a --config JSON file with the structure is required")
    return StructureParams.from_json(args.config)


def _pmap(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_regions(args):
    params = _params(args)
    diagram = region_diagram(params, _grid(args.kappa_grid),
                             _grid(args.omega_grid))
    lines = ["kappa,omega,num_propagating"]
    for i, kap in enumerate(diagram.kappa_grid):
        for j, om in enumerate(diagram.omega_grid):
            lines.append(f"{_fnum(kap)},{_fnum(om)},{diagram.counts[i, j]}")
    _emit(args.out, lines)
    return 0


def cmd_bands(args):
    params = _params(args)
    header = "kappa," + ",".join(f"band_{j}" for j in range(params.N))
    lines = [header]
    for kap in _grid(args.kappa_grid):
        bands = waveguide_bands(params, kap)
        lines.append(",".join([_fnum(kap)] + [_fnum(b) for b in bands]))
    _emit(args.out, lines)
    return 0


def _incident_from_args(args, N):
    a = np.zeros(N, dtype=complex)
    b = np.zeros(N, dtype=complex)
    if args.a_inc:
        for i, v in enumerate(json.loads(args.a_inc)):
            a[i] = complex(v["re"], v.get("im", 0.0)) if isinstance(v, dict) else v
    else:
        a[args.order] = 1.0
    if args.b_inc:
        for i, v in enumerate(json.loads(args.b_inc)):
            b[i] = complex(v["re"], v.get("im", 0.0)) if isinstance(v, dict) else v
    return IncidentField(a, b)


def _cnum(z) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def cmd_scatter(args):
    params = _params(args)
    point = BlochPoint(args.kappa, args.omega)
    incident = _incident_from_args(args, params.N)
    if args.method == "dtn":
        trunc = solve_truncated(params, point, incident, args.M)
        doc = {
            "method": "dtn",
            "M": trunc.M,
            "z": [_cnum(v) for v in trunc.z],
            "u_m0": [_cnum(v) for v in trunc.u[trunc.M + 1]],
            "linear_residual": trunc.residual,
        }
    else:
        sol = solve_scattering(params, point, incident)
        doc = {
            "method": "fourier",
            "a_minus": [_cnum(v) for v in sol.a_minus],
            "b_plus": [_cnum(v) for v in sol.b_plus],
            "c": [_cnum(v) for v in sol.c],
            "T": sol.T,
            "R": sol.R,
            "energy_residual": sol.energy_residual,
            "condition": sol.condition,
            "flags": list(sol.flags),
        }
    _emit(args.out, [json.dumps(doc, indent=2, sort_keys=True)])
    return 0


def cmd_scan(args):
    params = _params(args)
    kappas = _grid(args.kappa_grid)
    omegas = _grid(args.omega_grid)

    def one(kap):
        return scan_transmission(params, [kap], omegas, args.order)

    chunks = _pmap(one, kappas, args.threads)
    lines = ["kappa,omega,T,R,energy_residual,flags"]
    for rows in chunks:
        for kap, om, T, R, resid, flags in rows:
            lines.append(",".join([
                _fnum(kap), _fnum(om),
                "nan" if np.isnan(T) else _fnum(T),
                "nan" if np.isnan(R) else _fnum(R),
                "nan" if np.isnan(resid) else _fnum(resid),
                flags]))
    _emit(args.out, lines)
    return 0


def _mode_doc(mode):
    return {
        "kappa0": mode.kappa0,
        "omega0": mode.omega0,
        "sigma_min": mode.sigma,
        "num_propagating": mode.region_size,
        "null_vector": [
            {"kind": kind, "order": order, **_cnum(v)}
            for (kind, order), v in zip(mode.null_labels, mode.null_vector)],
    }


def cmd_guided(args):
    params = _params(args)
    window = tuple(float(x) for x in args.window.split(","))
    modes = find_guided_modes(params, window, density=args.density,
                              tol=args.tol)
    _emit(args.out, [json.dumps([_mode_doc(m) for m in modes], indent=2,
                                sort_keys=True)])
    return 0


def _locate_mode(params, args):
    window = tuple(float(x) for x in args.window.split(","))
    modes = find_guided_modes(params, window, density=args.density)
    if not modes:
        raise SystemExit("no guided mode found in the window")
    if args.mode_index >= len(modes):
        raise SystemExit(f"mode index {args.mode_index} out of range "
                         f"({len(modes)} found)")
    return modes[args.mode_index]


def cmd_dispersion(args):
    params = _params(args)
    mode = _locate_mode(params, args)
    fit = continue_and_fit_dispersion(params, mode, radius=args.radius)
    lines = ["kappa,re_omega,im_omega"]
    for kt, om in fit.samples:
        lines.append(",".join([_fnum(mode.kappa0 + kt), _fnum(om.real),
                               _fnum(om.imag)]))
    _emit(args.out, lines)
    meta = {
        "kappa0": fit.kappa0, "omega0": fit.omega0,
        "linear_coefficient": fit.slope,
        "quadratic_coefficient": _cnum(fit.curvature),
        "sign_convention": "omega = omega0 - linear*kt - quadratic*kt^2",
        "fit_residual": fit.fit_residual,
    }
    print(json.dumps(meta, sort_keys=True), file=sys.stderr)
    return 0


def cmd_anomaly(args):
    params = _params(args)
    mode = _locate_mode(params, args)
    dfit = continue_and_fit_dispersion(params, mode)
    afit = fit_anomaly(params, mode, dfit)
    # direct vs closed-form transmission across the anomaly window
    lines = ["kappa,omega,T_direct,T_approx"]
    for kt in (-0.003, -0.002, -0.001, 0.001, 0.002, 0.003):
        half = 8.0 * abs(afit.curvature) * kt ** 2
        for w in -afit.slope * kt + np.linspace(-half, half, 11):
            sol = solve_scattering(
                params, BlochPoint(afit.kappa0 + kt, afit.omega0 + w))
            t_model = approx_transmission(afit, kt, w, "two_sided")
            lines.append(",".join([
                _fnum(afit.kappa0 + kt), _fnum(afit.omega0 + w),
                _fnum(sol.T), _fnum(t_model)]))
    _emit(args.out, lines)
    meta = {
        "kappa0": afit.kappa0, "omega0": afit.omega0,
        "linear_coefficient": afit.slope,
        "quadratic_coefficient": _cnum(afit.curvature),
        "peak_curvature": afit.peak_curvature,
        "dip_curvature": afit.dip_curvature,
        "t_background": afit.t_bg,
        "r_background": afit.r_bg,
        "background_slope": afit.bg_slope,
        "eta": afit.eta,
        "ordering_sign": afit.ordering_sign,
        "sign_convention": "omega = omega0 - linear*kt - quadratic*kt^2",
    }
    print(json.dumps(meta, sort_keys=True), file=sys.stderr)
    return 0


def cmd_bifurcate(args):
    params = _params(args)
    grid = np.linspace(args.gamma0_min, args.gamma0_max, args.num)
    branch = trace_branch(params, list(grid),
                          gamma0_bracket=(args.gamma0_min - 0.5,
                                          args.gamma0_max + 0.5))
    lines = ["gamma0,kappa0,omega0"]
    for g0, kap0, om0 in branch.samples:
        lines.append(",".join([_fnum(g0), _fnum(kap0), _fnum(om0)]))
    _emit(args.out, lines)
    meta = {
        "gamma0_star": branch.gamma0_star,
        "omega0_star": branch.omega0_star,
        "sqrt_slope": branch.sqrt_slope,
        "g_curvature_sign": branch.g_curvature_sign,
    }
    print(json.dumps(meta, sort_keys=True), file=sys.stderr)
    return 0


def cmd_enhance(args):
    params = _params(args)
    mode = _locate_mode(params, args)
    fit = continue_and_fit_dispersion(params, mode)
    kts = np.logspace(np.log10(args.kt_min), np.log10(args.kt_max), args.num)
    rows = enhancement_scan(params, mode, fit, kts)
    lines = ["kappa_tilde,omega_opt,amplitude"]
    for kt, om, amp in rows:
        lines.append(",".join([_fnum(kt), _fnum(om), _fnum(amp)]))
    _emit(args.out, lines)
    return 0


def cmd_evolve(args):
    params = _params(args)
    if args.init == "file":
        with open(args.init_file) as fh:
            doc = json.load(fh)
        state = LatticeState(
            z=np.array([complex(v["re"], v.get("im", 0)) for v in doc["z"]]),
            u=np.array([[complex(v["re"], v.get("im", 0)) for v in row]
                        for row in doc["u"]]),
            kappa=args.kappa)
    else:
        state = gaussian_pulse(params, args.mx, args.kappa,
                               center=-args.mx / 2.0, width=args.mx / 8.0,
                               symmetry=args.init)
    result = evolve(params, state, args.dt, args.steps,
                    record_every=args.record_every)
    lines = ["t,norm,waveguide_energy"]
    for t, nrm, wg in zip(result.times, result.norms,
                          result.waveguide_energy):
        lines.append(",".join([_fnum(t), _fnum(nrm), _fnum(wg)]))
    _emit(args.out, lines)
    return 0


def cmd_validate(args):
    params = _params(args)
    rng = np.random.default_rng(args.seed)
    checks = []

    def record(name, value, limit):
        ok = value <= limit
        checks.append((name, value, limit, ok))

    # conservation on random points with random propagating incidence
    worst = 0.0
    tried = 0
    while tried < 50:
        kap = rng.uniform(-0.5, 0.5)
        om = rng.uniform(0.05, 7.95)
        try:
            hs = classify_harmonics(params, BlochPoint(kap, om))
        except ThresholdError:
            continue
        if not hs.propagating or hs.has_threshold:
            continue
        a = np.zeros(params.N, dtype=complex)
        b = np.zeros(params.N, dtype=complex)
        for l in hs.propagating:
            a[l] = rng.standard_normal() + 1j * rng.standard_normal()
            b[l] = rng.standard_normal() + 1j * rng.standard_normal()
        sol = solve_scattering(params, BlochPoint(kap, om),
                               IncidentField(a, b))
        worst = max(worst, sol.energy_residual / sol.incident_flux)
        tried += 1
    record("energy_conservation", worst, 1e-12)

    # cross-oracle on a few points
    worst = 0.0
    tried = 0
    while tried < 5:
        kap = rng.uniform(-0.5, 0.5)
        om = rng.uniform(0.3, 7.7)
        try:
            hs = classify_harmonics(params, BlochPoint(kap, om))
        except ThresholdError:
            continue
        if 0 not in hs.propagating or hs.has_threshold:
            continue
        taus = [h.theta.imag for h in hs.harmonics if h.theta.imag > 0]
        if taus and min(taus) < 0.08:
            continue
        worst = max(worst, cross_validate(params, BlochPoint(kap, om)))
        tried += 1
    record("cross_oracle", worst, 1e-8)

    # discrete identities on random fields
    v = rng.standard_normal((7, 6)) + 1j * rng.standard_normal((7, 6))
    w = rng.standard_normal((7, 6)) + 1j * rng.standard_normal((7, 6))
    res = identity_residuals(v, w)
    record("discrete_identities", max(res.values()), 1e-12)

    width = max(len(c[0]) for c in checks)
    failed = False
    for name, value, limit, ok in checks:
        status = "PASS" if ok else "FAIL"
        print(f"{name:<{width}}  {value:12.3e}  (limit {limit:.0e})  {status}")
        failed = failed or not ok
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="latres",
        description="Scattering, guided modes, and resonances of a periodic "
                    "waveguide coupled to a 2D lattice.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="structure JSON path")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--threads", type=int,
                       default=os.cpu_count() or 1,
                       help="parallel workers for grid scans")

    p = sub.add_parser("regions", help="propagating-order count diagram")
    common(p)
    p.add_argument("--kappa-grid", default="-0.5,0.5,101")
    p.add_argument("--omega-grid", default="0,8,101")
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("bands", help="chain band structure over kappa")
    common(p)
    p.add_argument("--kappa-grid", default="-0.5,0.5,101")
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("scatter", help="solve one scattering point")
    common(p)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--method", choices=("fourier", "dtn"), default="fourier")
    p.add_argument("--M", type=int, help="truncation half-width for dtn")
    p.add_argument("--order", type=int, default=0,
                   help="incident order for default unit left incidence")
    p.add_argument("--a-inc", help="JSON list of left incident amplitudes")
    p.add_argument("--b-inc", help="JSON list of right incident amplitudes")
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("scan", help="transmission over a grid")
    common(p)
    p.add_argument("--kappa-grid", required=True)
    p.add_argument("--omega-grid", required=True)
    p.add_argument("--order", type=int, default=0)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("guided", help="locate guided modes in a window")
    common(p)
    p.add_argument("--window", required=True,
                   help="kappa_min,kappa_max,omega_min,omega_max")
    p.add_argument("--density", type=int, default=400)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_guided)

    for name, fn in (("dispersion", cmd_dispersion), ("anomaly", cmd_anomaly),
                     ("enhance", cmd_enhance)):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--window", required=True)
        p.add_argument("--density", type=int, default=400)
        p.add_argument("--mode-index", type=int, default=0)
        if name == "dispersion":
            p.add_argument("--radius", type=float, default=0.004)
        if name == "enhance":
            p.add_argument("--kt-min", type=float, default=1e-4)
            p.add_argument("--kt-max", type=float, default=1e-2)
            p.add_argument("--num", type=int, default=9)
        p.set_defaults(func=fn)

    p = sub.add_parser("bifurcate", help="critical coupling and mode branch")
    common(p)
    p.add_argument("--gamma0-min", type=float, required=True)
    p.add_argument("--gamma0-max", type=float, required=True)
    p.add_argument("--num", type=int, default=8)
    p.set_defaults(func=cmd_bifurcate)

    p = sub.add_parser("evolve", help="time-domain integration")
    common(p)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--mx", type=int, default=60)
    p.add_argument("--record-every", type=int, default=10)
    p.add_argument("--init", choices=("antisymmetric", "symmetric", "file"),
                   default="symmetric")
    p.add_argument("--init-file", help="JSON state for --init file")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("validate", help="cross-oracle and conservation suite")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_validate)

    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("LATRES_LOG", "WARNING").upper())
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RuntimeError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
