"""Discrete difference calculus on integer lattices.

Forward/backward differences, the five-point Laplacian, and the summation
identities (product rules, telescoping, summation by parts, divergence
theorem, Green identity) that the frequency- and time-domain solvers rely on.
Output windows shrink by the stencil footprint; no padding conventions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Field1D:
    """Complex samples v_n for n = offset .. offset + len - 1.

    Optional pseudo-period metadata (N, kappa): v_{n+N} = e^{2 pi i kappa} v_n.
    """

    values: np.ndarray
    offset: int = 0
    period: int = None
    kappa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    def __len__(self):
        return len(self.values)

    def at(self, n: int) -> complex:
        return self.values[n - self.offset]

    def check_pseudo_periodic(self, tol: float = 1e-12) -> bool:
        if self.period is None or len(self.values) <= self.period:
            return True
        v = self.values
        tw = np.exp(2j * np.pi * self.kappa)
        return np.max(np.abs(v[self.period:] - tw * v[:-self.period])) <= tol * (
            1.0 + np.max(np.abs(v)))


@dataclass(frozen=True)
class Field2D:
    """Complex samples u_{mn} on a rectangle; indices (m, n) start at offsets."""

    values: np.ndarray  # shape (num_m, num_n)
    m_offset: int = 0
    n_offset: int = 0
    period: int = None
    kappa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        if self.values.ndim != 2:
            raise ValueError("Field2D values must be a 2-d array")

    def at(self, m: int, n: int) -> complex:
        return self.values[m - self.m_offset, n - self.n_offset]


class WindowTooSmall(ValueError):
    """The difference stencil does not fit in the field's window."""


def _need(cond):
    if not cond:
        raise WindowTooSmall("field window too small for stencil")


def forward_x(f):
    """(v_x)_n = v_{n+1} - v_n; works on Field1D (index n) or Field2D (index m)."""
    if isinstance(f, Field1D):
        _need(len(f.values) >= 2)
        return Field1D(f.values[1:] - f.values[:-1], f.offset)
    _need(f.values.shape[0] >= 2)
    return Field2D(f.values[1:, :] - f.values[:-1, :], f.m_offset, f.n_offset)


def backward_x(f):
    """(v_xbar)_n = v_n - v_{n-1}; window start shifts up by one."""
    if isinstance(f, Field1D):
        _need(len(f.values) >= 2)
        return Field1D(f.values[1:] - f.values[:-1], f.offset + 1)
    _need(f.values.shape[0] >= 2)
    return Field2D(f.values[1:, :] - f.values[:-1, :], f.m_offset + 1, f.n_offset)


def forward_y(f: Field2D) -> Field2D:
    _need(f.values.shape[1] >= 2)
    return Field2D(f.values[:, 1:] - f.values[:, :-1], f.m_offset, f.n_offset)


def backward_y(f: Field2D) -> Field2D:
    _need(f.values.shape[1] >= 2)
    return Field2D(f.values[:, 1:] - f.values[:, :-1], f.m_offset, f.n_offset + 1)


def divergence_minus(fx: Field2D, fy: Field2D) -> Field2D:
    """(div- F)_{mn} = (F1_x-bar + F2_y-bar)_{mn} on the common window."""
    dx = backward_x(fx)
    dy = backward_y(fy)
    m0 = max(dx.m_offset, dy.m_offset)
    n0 = max(dx.n_offset, dy.n_offset)
    m1 = min(dx.m_offset + dx.values.shape[0], dy.m_offset + dy.values.shape[0])
    n1 = min(dx.n_offset + dx.values.shape[1], dy.n_offset + dy.values.shape[1])
    _need(m1 > m0 and n1 > n0)
    a = dx.values[m0 - dx.m_offset:m1 - dx.m_offset, n0 - dx.n_offset:n1 - dx.n_offset]
    b = dy.values[m0 - dy.m_offset:m1 - dy.m_offset, n0 - dy.n_offset:n1 - dy.n_offset]
    return Field2D(a + b, m0, n0)


def laplacian(f: Field2D) -> Field2D:
    """Five-point Laplacian u_{m+1,n}+u_{m-1,n}+u_{m,n+1}+u_{m,n-1}-4u_{mn}."""
    v = f.values
    _need(v.shape[0] >= 3 and v.shape[1] >= 3)
    out = (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2]
           - 4.0 * v[1:-1, 1:-1])
    return Field2D(out, f.m_offset + 1, f.n_offset + 1)


def difference_ops(f, which: str):
    """Dispatch by operator name; mirrors the stencil naming used in tests."""
    ops = {
        "forward_x": forward_x,
        "backward_x": backward_x,
        "forward_y": forward_y,
        "backward_y": backward_y,
        "laplacian": laplacian,
    }
    if which not in ops:
        raise ValueError(f"unknown difference operator {which!r}")
    return ops[which](f)


# ---------------------------------------------------------------------------
# identity residuals
# ---------------------------------------------------------------------------

def product_rule_residuals(v: np.ndarray, w: np.ndarray) -> dict:
    """Pointwise residuals of the four discrete product rules.

    (vw)_x = v_x w+ + v w_x = v_x w + v+ w_x, and the backward analogues.
    """
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    vw = v * w
    fx = lambda a: a[1:] - a[:-1]
    res = {
        "forward_a": np.max(np.abs(fx(vw) - (fx(v) * w[1:] + v[:-1] * fx(w)))),
        "forward_b": np.max(np.abs(fx(vw) - (fx(v) * w[:-1] + v[1:] * fx(w)))),
        "backward_a": np.max(np.abs(fx(vw) - (fx(v) * w[:-1] + v[1:] * fx(w)))),
        "backward_b": np.max(np.abs(fx(vw) - (fx(v) * w[1:] + v[:-1] * fx(w)))),
    }
    return res


def telescoping_residual(v: np.ndarray) -> float:
    """|sum of forward differences - endpoint difference| (fundamental theorem)."""
    v = np.asarray(v, dtype=complex)
    return abs(np.sum(v[1:] - v[:-1]) - (v[-1] - v[0]))


def summation_by_parts_1d_residual(v: np.ndarray, w: np.ndarray) -> float:
    """Residual of the 1D summation-by-parts identity on the full window.

    sum_{m=m1+1}^{m2} [(backward-diff v)_m w_m + v_{m-1} (backward-diff w)_m]
        = v_{m2} w_{m2} - v_{m1} w_{m1}.
    """
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    dv = v[1:] - v[:-1]
    dw = w[1:] - w[:-1]
    lhs = np.sum(dv * w[1:]) + np.sum(v[:-1] * dw)
    rhs = v[-1] * w[-1] - v[0] * w[0]
    return abs(lhs - rhs)


def divergence_theorem_residual(f1: np.ndarray, f2: np.ndarray) -> float:
    """Residual of the rectangular discrete divergence theorem.

    The fields are given on [m1, m2] x [n1, n2]; the sum of the backward
    divergence over the interior [m1+1, m2] x [n1+1, n2] must equal the
    boundary sums of F1 and F2.
    """
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)
    div = (f1[1:, 1:] - f1[:-1, 1:]) + (f2[1:, 1:] - f2[1:, :-1])
    lhs = np.sum(div)
    rhs = np.sum(f1[-1, 1:] - f1[0, 1:]) + np.sum(f2[1:, -1] - f2[1:, 0])
    return abs(lhs - rhs)


def green_identity_residual(v: np.ndarray, u: np.ndarray) -> float:
    """Residual of the 2D summation-by-parts (Green) identity.

    sum_R (v Delta u) = boundary flux sums of v u_x and v u_y minus
    sum_R (grad- v . grad- u), on the interior of the supplied rectangle.
    """
    v = np.asarray(v, dtype=complex)
    u = np.asarray(u, dtype=complex)
    # interior indices 1..-2 of each axis play the role of [m1+1, m2] etc.,
    # with one halo row/column on every side for the stencils.
    lap = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2]
           - 4.0 * u[1:-1, 1:-1])
    lhs = np.sum(v[1:-1, 1:-1] * lap)
    ux = u[1:, :] - u[:-1, :]   # (u_x)_{mn} = u_{m+1,n} - u_{mn}
    uy = u[:, 1:] - u[:, :-1]
    # boundary terms: (v u_x) at m2 and m1, summed over n in [n1+1, n2]
    bx = np.sum(v[-2, 1:-1] * ux[-1, 1:-1] - v[0, 1:-1] * ux[0, 1:-1])
    by = np.sum(v[1:-1, -2] * uy[1:-1, -1] - v[1:-1, 0] * uy[1:-1, 0])
    dvx = v[1:, :] - v[:-1, :]  # backward diff sampled at the upper index
    dux = u[1:, :] - u[:-1, :]
    dvy = v[:, 1:] - v[:, :-1]
    duy = u[:, 1:] - u[:, :-1]
    grad = np.sum(dvx[:-1, 1:-1] * dux[:-1, 1:-1]) + \
        np.sum(dvy[1:-1, :-1] * duy[1:-1, :-1])
    rhs = bx + by - grad
    return abs(lhs - rhs)


def waveguide_green_residual(z: np.ndarray, masses: np.ndarray,
                             springs: np.ndarray) -> float:
    """Residual of the chain summation-by-parts formula on a window.

    With zeta_n = z_n / sqrt(M_n) and the chain operator
    (A z)_n = ((k_n + k_{n-1})/M_n) z_n - (k_n/sqrt(M_n M_{n+1})) z_{n+1}
    - (k_{n-1}/sqrt(M_n M_{n-1})) z_{n-1}, one has

    sum_{n=n1}^{n2} conj(z)_n (A z)_n
        = -k_{n2} conj(zeta)_{n2} (zeta_{n2+1} - zeta_{n2})
          + k_{n1-1} conj(zeta)_{n1} (zeta_{n1} - zeta_{n1-1})
          + sum_{n=n1}^{n2-1} k_n |zeta-difference|-type bond products.

    The arrays z, masses, springs are given on [n1-1, n2+1] (one-cell halo);
    masses/springs indexed the same way.
    """
    z = np.asarray(z, dtype=complex)
    M = np.asarray(masses, dtype=float)
    k = np.asarray(springs, dtype=float)
    if not (len(z) == len(M) == len(k)) or len(z) < 3:
        raise ValueError("need arrays of equal length >= 3 (window plus halo)")
    zeta = z / np.sqrt(M)
    # interior window is indices 1..-2
    n1, n2 = 1, len(z) - 2
    lhs = 0.0 + 0.0j
    for n in range(n1, n2 + 1):
        az = ((k[n] + k[n - 1]) / M[n]) * z[n] \
            - (k[n] / np.sqrt(M[n] * M[n + 1])) * z[n + 1] \
            - (k[n - 1] / np.sqrt(M[n] * M[n - 1])) * z[n - 1]
        lhs += np.conj(z[n]) * az
    bonds = sum(k[n] * np.conj(zeta[n + 1] - zeta[n]) * (zeta[n + 1] - zeta[n])
                for n in range(n1, n2))
    rhs = -k[n2] * np.conj(zeta[n2]) * (zeta[n2 + 1] - zeta[n2]) \
        + k[n1 - 1] * np.conj(zeta[n1]) * (zeta[n1] - zeta[n1 - 1]) + bonds
    return abs(lhs - rhs)


def identity_residuals(v2d: np.ndarray, w2d: np.ndarray,
                       masses: np.ndarray = None,
                       springs: np.ndarray = None) -> dict:
    """Evaluate every summation identity on the supplied rectangle.

    Returns a dict of named residuals; the 1D identities use row 0 of the
    rectangles, the waveguide identity uses optional masses/springs (defaults
    to a uniform chain).
    """
    v2d = np.asarray(v2d, dtype=complex)
    w2d = np.asarray(w2d, dtype=complex)
    n = v2d.shape[1]
    if masses is None:
        masses = np.ones(n)
    if springs is None:
        springs = np.ones(n)
    return {
        "summation_by_parts_1d": summation_by_parts_1d_residual(v2d[0], w2d[0]),
        "divergence_theorem": divergence_theorem_residual(v2d, w2d),
        "green_identity": green_identity_residual(v2d, w2d),
        "waveguide_green": waveguide_green_residual(v2d[0], masses, springs),
    }
