"""Structure definition, harmonic classification, and band/region diagrams.

The physical system is a one-dimensional mass-spring chain (period N in the
transverse index n) coupled along the line m = 0 of a two-dimensional square
lattice.  Fields are pseudo-periodic in n with Bloch wavenumber kappa and
time-harmonic with frequency omega.  Everything downstream builds on the
per-order exponents (phi_l, theta_l) computed here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

# harmonic classes
PROPAGATING = "propagating"
EVANESCENT = "evanescent"
BAND_EDGE_EVANESCENT = "band-edge-evanescent"
LINEAR_THRESHOLD = "linear-threshold"


class ThresholdError(ValueError):
    """Raised when an operation cannot proceed on a threshold curve."""


@dataclass(frozen=True)
class StructureParams:
    """Periodic waveguide structure: period, masses, springs, couplings.

    masses and springs are positive reals of length N; gammas are the
    (possibly complex) constants coupling chain site n to lattice site (0, n).
    """

    N: int
    masses: np.ndarray
    springs: np.ndarray
    gammas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "masses", np.asarray(self.masses, dtype=float))
        object.__setattr__(self, "springs", np.asarray(self.springs, dtype=float))
        object.__setattr__(self, "gammas", np.asarray(self.gammas, dtype=complex))
        if self.N < 1:
            raise ValueError("period N must be >= 1")
        for name in ("masses", "springs", "gammas"):
            if getattr(self, name).shape != (self.N,):
                raise ValueError(f"{name} must have length exactly N={self.N}")
        if np.any(self.masses <= 0):
            raise ValueError("all masses must be positive")
        if np.any(self.springs <= 0):
            raise ValueError("all spring constants must be positive")

    def replace_gamma(self, index: int, value: complex) -> "StructureParams":
        """Return a copy with gammas[index] replaced (used by branch tracing)."""
        g = self.gammas.copy()
        g[index] = value
        return StructureParams(self.N, self.masses, self.springs, g)

    @staticmethod
    def from_dict(doc: dict) -> "StructureParams":
        def as_complex(x):
            if isinstance(x, dict):
                return complex(x.get("re", 0.0), x.get("im", 0.0))
            return complex(x)

        return StructureParams(
            N=int(doc["N"]),
            masses=np.array(doc["masses"], dtype=float),
            springs=np.array(doc["springs"], dtype=float),
            gammas=np.array([as_complex(g) for g in doc["gammas"]], dtype=complex),
        )

    @staticmethod
    def from_json(path: str) -> "StructureParams":
        with open(path) as fh:
            return StructureParams.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        def enc(g: complex):
            return g.real if g.imag == 0 else {"re": g.real, "im": g.imag}

        return {
            "N": self.N,
            "masses": self.masses.tolist(),
            "springs": self.springs.tolist(),
            "gammas": [enc(g) for g in self.gammas],
        }


@dataclass(frozen=True)
class BlochPoint:
    """A (kappa, omega) pair; complex omega is allowed for continuation."""

    kappa: complex
    omega: complex

    @property
    def is_real(self) -> bool:
        return self.kappa.imag == 0.0 and self.omega.imag == 0.0


@dataclass(frozen=True)
class Harmonic:
    """One Fourier order: transverse exponent phi, normal exponent theta."""

    order: int
    phi: float
    theta: complex
    kind: str


@dataclass(frozen=True)
class HarmonicSet:
    """All N harmonics at a Bloch point plus the set of propagating orders."""

    point: BlochPoint
    harmonics: tuple
    propagating: tuple

    @property
    def phi(self) -> np.ndarray:
        return np.array([h.phi for h in self.harmonics])

    @property
    def theta(self) -> np.ndarray:
        return np.array([h.theta for h in self.harmonics], dtype=complex)

    @property
    def has_threshold(self) -> bool:
        return any(h.kind == LINEAR_THRESHOLD for h in self.harmonics)


def ambient_dispersion(theta, phi):
    """Frequency of the plane wave e^{2 pi i (theta m + phi n)} on the lattice."""
    return 4.0 - 2.0 * np.cos(TWO_PI * theta) - 2.0 * np.cos(TWO_PI * phi)


def _harmonic_arrays(N, kappa, omega, threshold_tol=1e-9):
    """Vectorized classification core.

    Returns (phi, theta, kinds, prop) where kinds is a list of class strings
    and prop is the array of propagating order indices.
    """
    phi = (kappa + np.arange(N)) / N
    chi = (4.0 - omega) / 2.0 - np.cos(TWO_PI * phi)
    theta = np.zeros(N, dtype=complex)
    kinds = [None] * N

    if np.iscomplexobj(np.asarray(omega)) and np.imag(omega) != 0.0:
        # Analytic continuation from the real-omega branch along a straight
        # path in omega.  The principal arccos already continues the
        # propagating branch; for decaying orders pick the sign that keeps
        # the field bounded.
        chi_re = (4.0 - np.real(omega)) / 2.0 - np.cos(TWO_PI * np.real(phi))
        for l in range(N):
            p = np.arccos(chi[l] + 0j) / TWO_PI
            if -1.0 < chi_re[l] < 1.0:
                theta[l] = p
                kinds[l] = PROPAGATING
            else:
                cand = p if np.imag(p) > 0 else -p
                theta[l] = cand - np.floor(np.real(cand))
                kinds[l] = EVANESCENT if chi_re[l] > 0 else BAND_EDGE_EVANESCENT
        _check_sign_law(theta, kinds, omega)
    else:
        chi = np.real(chi)
        for l in range(N):
            x = chi[l]
            if abs(x - 1.0) < threshold_tol or abs(x + 1.0) < threshold_tol:
                theta[l] = 0.0 if x > 0 else 0.5
                kinds[l] = LINEAR_THRESHOLD
            elif -1.0 < x < 1.0:
                theta[l] = np.arccos(x) / TWO_PI
                kinds[l] = PROPAGATING
            elif x > 1.0:
                theta[l] = 1j * np.arccosh(x) / TWO_PI
                kinds[l] = EVANESCENT
            else:
                theta[l] = 0.5 + 1j * np.arccosh(-x) / TWO_PI
                kinds[l] = BAND_EDGE_EVANESCENT

    prop = np.array([l for l in range(N) if kinds[l] == PROPAGATING], dtype=int)
    return phi, theta, kinds, prop


def _check_sign_law(theta, kinds, omega):
    """Check Im(dispersion) consistency of the continued branch.

    Taking the imaginary part of omega = 4 - 2cos(2 pi theta) - 2cos(2 pi phi)
    with real phi gives sin(2 pi Re theta) * 2 sinh(2 pi Im theta) = Im omega;
    in particular a formerly propagating order must satisfy
    sign(Im theta) = sign(Im omega).
    """
    for l, (th, kind) in enumerate(zip(theta, kinds)):
        if kind != PROPAGATING:
            continue
        lhs = np.sin(TWO_PI * th.real) * 2.0 * np.sinh(TWO_PI * th.imag)
        if abs(lhs - np.imag(omega)) > 1e-8 * (1.0 + abs(omega)):
            raise ValueError(
                f"branch-continuation sign law violated at order {l}: "
                f"{lhs} vs Im omega = {np.imag(omega)}"
            )


def classify_harmonics(params: StructureParams, point: BlochPoint,
                       threshold_tol: float = 1e-9) -> HarmonicSet:
    """Classify the N Fourier orders at a Bloch point.

    Orders within threshold_tol of a threshold are flagged (not silently
    classified); callers that cannot handle thresholds should check
    HarmonicSet.has_threshold or catch ThresholdError from assembly.
    """
    kappa = point.kappa if point.kappa.imag else point.kappa.real
    omega = point.omega if np.imag(point.omega) else np.real(point.omega)
    phi, theta, kinds, prop = _harmonic_arrays(params.N, kappa, omega, threshold_tol)
    harms = tuple(
        Harmonic(order=l, phi=phi[l], theta=theta[l], kind=kinds[l])
        for l in range(params.N)
    )
    return HarmonicSet(point=point, harmonics=harms, propagating=tuple(prop))


def waveguide_band_matrix(params: StructureParams, kappa: float) -> np.ndarray:
    """The N x N Hermitian Floquet matrix of the isolated chain at kappa.

    Row n reads ((k_n + k_{n-1})/M_n) z_n - (k_n/sqrt(M_n M_{n+1})) z_{n+1}
    - (k_{n-1}/sqrt(M_n M_{n-1})) z_{n-1}, with wrap-around entries picking up
    the Bloch factor e^{+-2 pi i kappa}.
    """
    N = params.N
    M, k = params.masses, params.springs
    tw = np.exp(2j * np.pi * kappa)
    B = np.zeros((N, N), dtype=complex)
    for n in range(N):
        kn, knm = k[n], k[(n - 1) % N]
        B[n, n] += (kn + knm) / M[n]
        cp = -kn / np.sqrt(M[n] * M[(n + 1) % N])
        cm = -knm / np.sqrt(M[n] * M[(n - 1) % N])
        if n + 1 < N:
            B[n, n + 1] += cp
        else:
            B[n, 0] += cp * tw
        if n - 1 >= 0:
            B[n, n - 1] += cm
        else:
            B[n, N - 1] += cm / tw
    return B


def waveguide_bands(params: StructureParams, kappa: float) -> np.ndarray:
    """Sorted real eigenvalues of the chain's Floquet matrix at kappa."""
    return np.sort(np.linalg.eigvalsh(waveguide_band_matrix(params, kappa)))


@dataclass(frozen=True)
class RegionDiagram:
    """|P| (number of propagating orders) on a (kappa, omega) grid."""

    kappa_grid: np.ndarray
    omega_grid: np.ndarray
    counts: np.ndarray  # shape (len(kappa_grid), len(omega_grid))
    threshold_mask: np.ndarray = field(default=None)


def region_diagram(params: StructureParams, kappa_grid, omega_grid) -> RegionDiagram:
    """Count propagating orders at every grid point."""
    kappa_grid = np.asarray(kappa_grid, dtype=float)
    omega_grid = np.asarray(omega_grid, dtype=float)
    counts = np.zeros((len(kappa_grid), len(omega_grid)), dtype=int)
    thresh = np.zeros_like(counts, dtype=bool)
    for i, kap in enumerate(kappa_grid):
        # chi for all orders and omegas at once
        phi = (kap + np.arange(params.N)) / params.N
        chi = (4.0 - omega_grid[:, None]) / 2.0 - np.cos(TWO_PI * phi)[None, :]
        counts[i] = np.sum((chi > -1.0) & (chi < 1.0), axis=1)
        thresh[i] = np.any(np.abs(np.abs(chi) - 1.0) < 1e-9, axis=1)
    return RegionDiagram(kappa_grid, omega_grid, counts, thresh)


def propagating_count(params: StructureParams, kappa: float, omega: float) -> int:
    """|P| at a single real point."""
    _, _, _, prop = _harmonic_arrays(params.N, kappa, omega)
    return len(prop)
