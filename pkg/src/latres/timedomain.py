"""Explicit time integration of the coupled chain-lattice dynamics.

The state s = (z, u) evolves by ds/dt = -i H s where H is the Hermitian block
operator combining the chain, the lattice Laplacian-type stencil, and the
coupling along m = 0.  The strip is closed with zero-Dirichlet walls at
m = +-Mx and a Bloch-twisted wrap in n, which keeps H exactly Hermitian so
norm conservation is limited only by the integrator.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .structure import StructureParams, waveguide_band_matrix


@dataclass(frozen=True)
class LatticeState:
    """Chain amplitudes z (length N) and strip field u on [-Mx, Mx] x [0, N-1]."""

    z: np.ndarray
    u: np.ndarray
    kappa: float
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=complex))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=complex))
        if self.u.ndim != 2 or self.u.shape[0] % 2 != 1:
            raise ValueError("u must be 2-d with an odd number of rows")
        if self.u.shape[1] != len(self.z):
            raise ValueError("u and z disagree on the period N")

    @property
    def mx(self) -> int:
        return (self.u.shape[0] - 1) // 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.z) ** 2)
                             + np.sum(np.abs(self.u) ** 2)))

    def waveguide_energy(self) -> float:
        return float(np.sum(np.abs(self.z) ** 2))


def apply_omega(params: StructureParams, state: LatticeState):
    """The Hermitian generator applied to a state: (H1 z + G u, G* z + H2 u).

    The chain block is the Bloch-reduced band matrix; the lattice block is
    4u minus the four neighbors with a kappa twist across the n-wrap and zero
    Dirichlet data beyond m = +-Mx; the coupling feeds gamma_n u_{0n} into
    the chain and conj(gamma_n) z_n into the line m = 0.
    """
    z, u = state.z, state.u
    mid = state.mx
    tw = np.exp(2j * np.pi * state.kappa)

    dz = waveguide_band_matrix(params, state.kappa) @ z + params.gammas * u[mid]

    du = 4.0 * u
    du[1:] -= u[:-1]
    du[:-1] -= u[1:]
    du -= np.roll(u, -1, axis=1) * np.where(
        np.arange(u.shape[1]) == u.shape[1] - 1, tw, 1.0)
    du -= np.roll(u, 1, axis=1) * np.where(
        np.arange(u.shape[1]) == 0, 1.0 / tw, 1.0)
    du[mid] += np.conj(params.gammas) * z
    return dz, du


def _rhs(params, state):
    dz, du = apply_omega(params, state)
    return -1j * dz, -1j * du


def rk4_step(params: StructureParams, state: LatticeState,
             dt: float) -> LatticeState:
    """One classical Runge-Kutta step of ds/dt = -i H s."""
    z, u = state.z, state.u
    k1z, k1u = _rhs(params, state)
    s2 = replace(state, z=z + 0.5 * dt * k1z, u=u + 0.5 * dt * k1u)
    k2z, k2u = _rhs(params, s2)
    s3 = replace(state, z=z + 0.5 * dt * k2z, u=u + 0.5 * dt * k2u)
    k3z, k3u = _rhs(params, s3)
    s4 = replace(state, z=z + dt * k3z, u=u + dt * k3u)
    k4z, k4u = _rhs(params, s4)
    return replace(
        state,
        z=z + dt / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z),
        u=u + dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u),
        t=state.t + dt)


@dataclass(frozen=True)
class EvolutionResult:
    state: LatticeState
    times: np.ndarray
    norms: np.ndarray
    waveguide_energy: np.ndarray

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - self.norms[0])))


def evolve(params: StructureParams, state: LatticeState, dt: float,
           steps: int, record_every: int = 1,
           drift_limit: float = 1e-4) -> EvolutionResult:
    """Integrate for `steps` RK4 steps, recording norm and chain energy."""
    times = [state.t]
    norms = [state.norm()]
    wg = [state.waveguide_energy()]
    for i in range(steps):
        state = rk4_step(params, state, dt)
        if (i + 1) % record_every == 0 or i + 1 == steps:
            times.append(state.t)
            norms.append(state.norm())
            wg.append(state.waveguide_energy())
            if abs(norms[-1] - norms[0]) > drift_limit * max(1.0, norms[0]):
                raise RuntimeError(
                    f"norm drift {abs(norms[-1] - norms[0]):.3e} exceeds "
                    f"{drift_limit}; reduce dt")
    return EvolutionResult(state=state, times=np.array(times),
                           norms=np.array(norms),
                           waveguide_energy=np.array(wg))


def antisymmetrize(state: LatticeState) -> LatticeState:
    """Project u onto the m-antisymmetric subspace (u_{-m,n} = -u_{mn})."""
    u = 0.5 * (state.u - state.u[::-1])
    return replace(state, u=u)


def gaussian_pulse(params: StructureParams, mx: int, kappa: float,
                   center: float, width: float, theta: float = 0.25,
                   symmetry: str = "symmetric") -> LatticeState:
    """A localized wavepacket on the strip with z = 0.

    The envelope is a Gaussian in m centered at `center`, modulated by a
    plane-wave carrier e^{2 pi i theta m}; symmetry 'antisymmetric' makes
    u_{mn} = -u_{-m,n} (so the coupling line value vanishes), 'symmetric'
    mirrors the pulse evenly.
    """
    m = np.arange(-mx, mx + 1, dtype=float)
    env = np.exp(-((m - center) / width) ** 2) * np.exp(2j * np.pi * theta * m)
    if symmetry == "antisymmetric":
        prof = env - env[::-1]
    elif symmetry == "symmetric":
        prof = env + env[::-1]
    else:
        raise ValueError("symmetry must be 'symmetric' or 'antisymmetric'")
    n = np.arange(params.N)
    trans = np.exp(2j * np.pi * kappa * n / params.N)
    u = np.outer(prof, trans)
    return LatticeState(z=np.zeros(params.N, dtype=complex), u=u, kappa=kappa)


def hermiticity_residual(params: StructureParams, kappa: float, mx: int,
                         seed: int = 0, trials: int = 4) -> float:
    """Max |<H s1, s2> - <s1, H s2>| over random unit states."""
    rng = np.random.default_rng(seed)
    N = params.N

    def rand_state():
        z = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        u = rng.standard_normal((2 * mx + 1, N)) + 1j * rng.standard_normal(
            (2 * mx + 1, N))
        s = LatticeState(z=z, u=u, kappa=kappa)
        nrm = s.norm()
        return replace(s, z=z / nrm, u=u / nrm)

    def inner(a, b):
        return np.vdot(a.z, b.z) + np.vdot(a.u.ravel(), b.u.ravel())

    worst = 0.0
    for _ in range(trials):
        s1, s2 = rand_state(), rand_state()
        h1z, h1u = apply_omega(params, s1)
        h2z, h2u = apply_omega(params, s2)
        hs1 = replace(s1, z=h1z, u=h1u)
        hs2 = replace(s2, z=h2z, u=h2u)
        worst = max(worst, abs(inner(hs1, s2) - inner(s1, hs2)))
    return worst
