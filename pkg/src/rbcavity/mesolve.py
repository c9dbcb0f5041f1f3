"""Lindblad master-equation integration for small dense systems.

Two integration paths are provided:

* ``method="expm"`` (default for constant or split Hamiltonians): the
  generator is frozen at each reporting-interval midpoint and exponentiated
  exactly (scaled Taylor action).  The interval width doubles as the
  integration step; halve the reporting step to tighten the envelope
  midpoint error.  This path runs on the compiled kernel when available.

* ``method="rk45"``: adaptive Dormand-Prince 4(5) on the vectorised density
  matrix (rtol 1e-8 / atol 1e-10 by default).  Required for an arbitrary
  time-dependent Hamiltonian callable and kept as an independent
  cross-check of the exponential path.

Collapse operators follow the convention C = sqrt(2 kappa) a for cavity
field decay and C = sqrt(2 gamma_ij) |j><i| for spontaneous decay, i.e. the
dissipator is D[C]rho = C rho C^dag - {C^dag C, rho}/2 and a bare cavity
mode has an intensity decay of 2 kappa (FWHM linewidth 2 kappa).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.integrate import simpson

from . import _kernels


class IntegrationError(RuntimeError):
    """Integration failure; carries the last successfully reached time."""

    def __init__(self, message: str, t_last: float):
        super().__init__(f"{message} (last good time: {t_last:.3e} s)")
        self.t_last = t_last


class ChannelKind(str, Enum):
    CAVITY_PLUS = "cavity_plus"
    CAVITY_MINUS = "cavity_minus"
    SPONTANEOUS = "spontaneous"


@dataclass(frozen=True)
class CollapseChannel:
    operator: np.ndarray
    rate_tag: str
    counts_as: ChannelKind

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError(f"collapse operator {self.rate_tag!r} must be square")
        object.__setattr__(self, "operator", op)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray                  # (T,)
    states: np.ndarray                 # (T, n, n)
    channels: tuple[CollapseChannel, ...]
    channel_flux: np.ndarray           # (n_channels, T), Tr(C^dag C rho)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def final_state(self) -> np.ndarray:
        return self.states[-1]


def validate_density_matrix(rho: np.ndarray, *, herm_tol: float = 1e-12,
                            trace_tol: float = 1e-8, eig_floor: float = -1e-8) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    scale = max(1.0, float(np.abs(rho).max()))
    if np.abs(rho - rho.conj().T).max() > herm_tol * scale:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > trace_tol or abs(np.trace(rho).imag) > trace_tol:
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < eig_floor:
        raise ValueError("density matrix has a significantly negative eigenvalue")


def expectation(rho: np.ndarray, observable: np.ndarray) -> float:
    """Tr(O rho) for a Hermitian observable; the imaginary residue is checked."""
    rho = np.asarray(rho)
    obs = np.asarray(observable)
    if rho.shape != obs.shape:
        raise ValueError("dimension mismatch between state and observable")
    val = np.einsum("ij,ji->", obs, rho)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation value has imaginary residue {val.imag:.2e}")
    return float(val.real)


def _check_hermitian(H: np.ndarray, what: str) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    scale = max(1.0, float(np.abs(H).max()))
    if np.abs(H - H.conj().T).max() > 1e-10 * scale:
        raise ValueError(f"{what} is not Hermitian")
    return H


def _pack_refill(channels: Sequence[CollapseChannel], n: int):
    """Flatten sum_k C_k . C_k^dag into a pair list (see kernel docstring)."""
    pr1, pr2, pc1, pc2, pw = [], [], [], [], []
    for ch in channels:
        rows, cols = np.nonzero(ch.operator)
        vals = ch.operator[rows, cols]
        for u in range(len(vals)):
            for w in range(len(vals)):
                pr1.append(rows[u])
                pr2.append(rows[w])
                pc1.append(cols[u])
                pc2.append(cols[w])
                pw.append(vals[u] * np.conj(vals[w]))
    return (
        np.asarray(pr1, dtype=np.int64),
        np.asarray(pr2, dtype=np.int64),
        np.asarray(pc1, dtype=np.int64),
        np.asarray(pc2, dtype=np.int64),
        np.asarray(pw, dtype=complex),
    )


def _drift_matrix(H: np.ndarray, channels: Sequence[CollapseChannel]) -> np.ndarray:
    # K = -iH - (1/2) sum C^dag C
    K = -1j * H
    for ch in channels:
        K -= 0.5 * (ch.operator.conj().T @ ch.operator)
    return K


def _normalize_hamiltonian(hamiltonian):
    """Return (H0, H1, envelope) with H1/envelope possibly trivial, or a callable."""
    if callable(hamiltonian):
        return hamiltonian
    if isinstance(hamiltonian, tuple):
        H0, H1, envelope = hamiltonian
        return (_check_hermitian(H0, "static Hamiltonian"),
                _check_hermitian(H1, "modulated Hamiltonian"), envelope)
    H0 = _check_hermitian(hamiltonian, "Hamiltonian")
    return (H0, np.zeros_like(H0), lambda t: 0.0)


def evolve(hamiltonian, channels: Sequence[CollapseChannel], rho0: np.ndarray,
           t_grid: np.ndarray, *, method: str = "auto",
           rtol: float = 1e-8, atol: float = 1e-10,
           expm_tol: float = 1e-12) -> Trajectory:
    """Integrate the master equation over a uniform time grid.

    `hamiltonian` may be a constant Hermitian matrix, a tuple
    (H0, H1, envelope) meaning H(t) = H0 + envelope(t) * H1, or a callable
    t -> matrix (forces the rk45 path).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) < 2 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("time grid must be strictly increasing with >= 2 points")
    rho0 = np.asarray(rho0, dtype=complex)
    validate_density_matrix(rho0)
    channels = tuple(channels)
    for ch in channels:
        if ch.operator.shape != rho0.shape:
            raise ValueError(f"channel {ch.rate_tag!r} dimension mismatch")

    ham = _normalize_hamiltonian(hamiltonian)
    if callable(ham):
        if method == "expm":
            raise ValueError("the exponential integrator needs a constant or split Hamiltonian")
        method = "rk45"
    elif method == "auto":
        method = "expm"

    if method == "expm":
        H0, H1, envelope = ham
        states = _evolve_expm(H0, H1, envelope, channels, rho0, t_grid, expm_tol)
    elif method == "rk45":
        states = _evolve_rk45(ham, channels, rho0, t_grid, rtol, atol)
    else:
        raise ValueError(f"unknown method {method!r}")

    flux = np.empty((len(channels), len(t_grid)))
    for k, ch in enumerate(channels):
        weight = ch.operator.conj().T @ ch.operator
        flux[k] = np.einsum("ij,tji->t", weight, states).real
    return Trajectory(times=t_grid, states=states, channels=channels, channel_flux=flux)


def _evolve_expm(H0, H1, envelope, channels, rho0, t_grid, expm_tol):
    steps = np.diff(t_grid)
    if np.abs(steps - steps[0]).max() > 1e-9 * steps[0]:
        raise ValueError("the exponential integrator expects a uniform grid")
    dt = float(steps[0])
    K0 = _drift_matrix(H0, channels)
    K1 = -1j * np.asarray(H1, dtype=complex)
    fmid = np.array([float(envelope(t + dt / 2.0)) for t in t_grid[:-1]])
    refill = _pack_refill(channels, rho0.shape[0])
    return _kernels.propagate(K0, K1, fmid, *refill, rho0, dt, tol=expm_tol)


# ---------------------------------------------------------------------------
# Dormand-Prince 4(5) reference path

_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _evolve_rk45(ham, channels, rho0, t_grid, rtol, atol):
    n = rho0.shape[0]
    refill = _pack_refill(channels, n)
    half_gsum = sum(0.5 * (ch.operator.conj().T @ ch.operator) for ch in channels) \
        if channels else np.zeros((n, n), dtype=complex)

    if callable(ham):
        def K_of_t(t):
            return -1j * np.asarray(ham(t), dtype=complex) - half_gsum
    else:
        H0, H1, envelope = ham
        K0 = -1j * H0 - half_gsum
        K1c = -1j * H1

        def K_of_t(t):
            return K0 + float(envelope(t)) * K1c

    def rhs(t, rho):
        return _kernels.lindblad_apply(K_of_t(t), *refill, rho)

    states = np.empty((len(t_grid), n, n), dtype=complex)
    states[0] = rho0
    rho = rho0.copy()
    t = t_grid[0]
    h = (t_grid[1] - t_grid[0]) / 10.0
    k1 = rhs(t, rho)
    ks = [None] * 7
    for idx in range(1, len(t_grid)):
        target = t_grid[idx]
        while t < target - 1e-15 * abs(target):
            h = min(h, target - t)
            ks[0] = k1
            for s in range(1, 7):
                acc = sum(a * ks[j] for j, a in enumerate(_DP_A[s]) if a != 0.0)
                ks[s] = rhs(t + _DP_C[s] * h, rho + h * acc)
            rho_new = rho + h * sum(a * ks[j] for j, a in enumerate(_DP_A[6]) if a != 0.0)
            err = h * sum(e * ks[j] for j, e in enumerate(_DP_E) if e != 0.0)
            scale = atol + rtol * np.maximum(np.abs(rho), np.abs(rho_new))
            err_norm = float(np.sqrt(np.mean((np.abs(err) / scale) ** 2)))
            if err_norm <= 1.0:
                t += h
                rho = rho_new
                k1 = ks[6]  # FSAL
                h *= min(5.0, max(0.2, 0.9 * err_norm ** -0.2 if err_norm > 0 else 5.0))
            else:
                h *= max(0.1, 0.9 * err_norm ** -0.2)
                if h < 1e-18:
                    raise IntegrationError("rk45 step size underflow", t)
        states[idx] = rho
    return states


# ---------------------------------------------------------------------------
# Flux bookkeeping

def integrate_channel_flux(traj: Trajectory, selector: ChannelKind | str) -> float:
    """Time-integrated emission (photon number) of all channels of one kind."""
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    kind = ChannelKind(selector)
    total = np.zeros_like(traj.times)
    for k, ch in enumerate(traj.channels):
        if ch.counts_as is kind:
            total = total + traj.channel_flux[k]
    return float(simpson(total, x=traj.times))


def excitation_balance(traj: Trajectory, excitation_number: np.ndarray,
                       hamiltonian) -> tuple[float, float]:
    """Returns (injected, emitted + stored - initial) excitation quanta.

    The Hamiltonian injection rate is -i Tr([N, H(t)] rho); every collapse
    channel removes exactly one excitation quantum, so the two numbers agree
    for a faithful integration.
    """
    ham = _normalize_hamiltonian(hamiltonian)
    if callable(ham):
        H_of_t = ham
    else:
        H0, H1, envelope = ham

        def H_of_t(t):
            return H0 + float(envelope(t)) * H1

    N = np.asarray(excitation_number)
    rate = np.empty(len(traj.times))
    for k, t in enumerate(traj.times):
        H = H_of_t(t)
        comm = N @ H - H @ N
        rate[k] = (-1j * np.einsum("ij,ji->", comm, traj.states[k])).real
    injected = float(simpson(rate, x=traj.times))

    emitted = sum(
        integrate_channel_flux(traj, kind)
        for kind in ChannelKind
        if any(ch.counts_as is kind for ch in traj.channels)
    )
    stored_initial = expectation(traj.states[0], N)
    stored_final = expectation(traj.states[-1], N)
    return injected, emitted + stored_final - stored_initial
