"""Dressed atom + two-polarisation cavity system.

Assembles the basis |atomic state, n+, n-> (photon numbers truncated to one
quantum in either circular mode, with the double-occupation state excluded),
the static and laser-modulated Hamiltonians in the frame rotating at the
laser frequency, and the collapse channels, then runs the photon-production,
depopulation and cw-scattering experiments.

Detuning convention: the laser (cavity) detuning Delta_L (Delta_C) is zero
when resonant with the zero-field transition from |F_g=1, m=0> to the m=0
sublevel of the lowest excited hyperfine level of the chosen line.  The
quantisation axis lies along the cavity, so the cavity supports only
sigma+/- photons and the (linearly polarised, transverse) pump decomposes
into equal sigma+ and sigma- components: every coupling changes m_F by +-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .angular import HalfInt, coupling_zero_field
from .atomstruct import (
    Atom,
    ConfigurationError,
    TransitionLine,
    ZeemanSolution,
    default_atom,
    diagonalize_level,
    hyperfine_shift,
    lande_g_F,
    mixed_coupling,
)
from .mesolve import (
    ChannelKind,
    CollapseChannel,
    Trajectory,
    evolve,
    integrate_channel_flux,
)

PHOTON_STATES = ((0, 0), (1, 0), (0, 1))


@dataclass(frozen=True)
class Pulse:
    """Driving pulse; amplitudes are angular frequencies (rad/s), times s."""

    shape: str = "sin_squared"           # or "constant"
    peak_rabi: float = 0.0               # peak of the bare Rabi envelope
    duration: float = 500e-9
    laser_detuning: float | None = None  # None: derived from the Raman condition

    def __post_init__(self):
        if self.shape not in ("sin_squared", "constant"):
            raise ConfigurationError(f"unknown pulse shape {self.shape!r}")
        if self.duration <= 0:
            raise ConfigurationError("pulse duration must be positive")

    def envelope(self, t: float) -> float:
        if self.shape == "constant":
            return self.peak_rabi
        if 0.0 <= t <= self.duration:
            s = math.sin(math.pi * t / self.duration)
            return self.peak_rabi * s * s
        return 0.0


@dataclass(frozen=True)
class CavityParams:
    g_bar: float                     # rad/s, as entering the Hamiltonian
    kappa: float                     # rad/s field decay; FWHM linewidth = 2 kappa
    gamma: float                     # rad/s atomic amplitude decay
    delta_C: float = 0.0             # rad/s cavity detuning
    coupling_reduction: float = 1.0  # free-flight averaging factor already in g_bar

    def __post_init__(self):
        if min(self.g_bar, self.kappa, self.gamma) <= 0:
            raise ConfigurationError("rates g_bar, kappa, gamma must be positive")
        if not 0 < self.coupling_reduction <= 1:
            raise ConfigurationError("coupling_reduction must be in (0, 1]")


@dataclass(frozen=True)
class AtomicState:
    kind: str                 # "ground", "excited" or "sink"
    F: HalfInt | None = None
    m: HalfInt | None = None

    def label(self) -> str:
        if self.kind == "sink":
            return "sink"
        tag = "g" if self.kind == "ground" else "x"
        return f"{tag}:{self.F}:{self.m}"


@dataclass(frozen=True)
class EmissionResult:
    n_cav_plus: float
    n_cav_minus: float
    n_spont: float
    eta: float
    F_P: float
    final_populations: dict[str, float]
    depopulation: float
    trajectory: Trajectory | None = None

    def __post_init__(self):
        if min(self.n_cav_plus, self.n_cav_minus, self.n_spont) < -1e-9:
            raise ValueError("negative photon number")


@dataclass(frozen=True)
class CavitySystem:
    line: TransitionLine
    params: CavityParams
    B: float
    nlz_enabled: bool
    atomic_states: tuple[AtomicState, ...]
    atomic_energies: np.ndarray               # rad/s, rotating-frame shifts (Delta_L-independent part)
    coupling_table: dict[tuple[int, int], float]   # (ground idx, excited idx) -> A
    decay_table: dict[tuple[int, int], float]      # (excited idx, target idx) -> gamma_ij
    dark_sink: int
    ground_solution: ZeemanSolution | None = field(default=None, repr=False)
    excited_solution: ZeemanSolution | None = field(default=None, repr=False)

    @property
    def n_atomic(self) -> int:
        return len(self.atomic_states)

    @property
    def dim(self) -> int:
        return self.n_atomic * len(PHOTON_STATES)

    def index(self, atomic: int, photons: tuple[int, int]) -> int:
        return atomic * len(PHOTON_STATES) + PHOTON_STATES.index(photons)

    def atomic_index(self, kind: str, F=None, m=None) -> int:
        for k, st in enumerate(self.atomic_states):
            if st.kind != kind:
                continue
            if kind == "sink":
                return k
            if st.F.twice == HalfInt.of(F).twice and st.m.twice == HalfInt.of(m).twice:
                return k
        raise KeyError(f"no atomic state {kind} F={F} m={m}")

    def ground_energy(self, m) -> float:
        k = self.atomic_index("ground", 1, m)
        return float(self.atomic_energies[k])

    def excited_energy(self, F, m) -> float:
        k = self.atomic_index("excited", F, m)
        return float(self.atomic_energies[k])

    def raman_laser_detuning(self, initial_m: int) -> float:
        """Two-photon-resonant Delta_L for production out of |F_g=1, initial_m>."""
        e_init = self.ground_energy(initial_m)
        e_final = self.ground_energy(-initial_m)
        return self.params.delta_C + (e_final - e_init)


def _excited_f_values(line: TransitionLine) -> list[HalfInt]:
    fvals = line.excited.f_values
    # the coupled levels are the two lowest F of the excited manifold
    return sorted(fvals, key=lambda f: f.twice)[:2]


def build_system(line: TransitionLine, params: CavityParams, B: float, *,
                 nlz_enabled: bool = True, atom: Atom | None = None) -> CavitySystem:
    """Assemble basis, level shifts, coupling and decay tables at field B.

    With `nlz_enabled=False` the hyperfine mixing is switched off: zero-field
    coupling prefactors and linear (Lande) Zeeman shifts are used for every
    level, which is the reference model without nonlinear Zeeman effects.
    """
    if B < 0:
        raise ValueError("field magnitude B must be >= 0")
    if atom is None:
        atom = default_atom()
    consts = atom.constants
    gl = line.ground
    xl = line.excited
    f_excited = _excited_f_values(line)
    f_low = f_excited[0]

    gsol = diagonalize_level(gl, B, consts)
    xsol = diagonalize_level(xl, B, consts)

    # zero-field reference energies of |F_g=1, m=0> and |F_x=lowest, m=0>
    e_g_ref = hyperfine_shift(gl, 1)
    e_x_ref = hyperfine_shift(xl, f_low)

    states: list[AtomicState] = []
    energies: list[float] = []
    mub_B = consts.mu_B * B / consts.hbar

    for tm in (-2, 0, 2):
        states.append(AtomicState("ground", HalfInt(2), HalfInt(tm)))
        if nlz_enabled:
            e = gsol.energy(1, tm / 2) - e_g_ref
        else:
            e = lande_g_F(gl, 1, consts) * (tm / 2) * mub_B
        energies.append(e)
    for F in f_excited:
        for tm in range(-F.twice, F.twice + 1, 2):
            states.append(AtomicState("excited", F, HalfInt(tm)))
            if nlz_enabled:
                e = xsol.energy(F, tm / 2) - e_x_ref
            else:
                e = hyperfine_shift(xl, F) - e_x_ref
                if F.twice > 0:
                    e += lande_g_F(xl, F, consts) * (tm / 2) * mub_B
            energies.append(e)
    sink = len(states)
    states.append(AtomicState("sink"))
    energies.append(0.0)

    # the rotating-frame anchor is the lowest excited level's m=0 state;
    # ground block occupies indices 0..2 and m runs upward within an F block
    anchor = energies[3 + f_low.twice // 2]
    energies = [e - anchor for e in energies]

    def prefactor(F_g, m_g, F_x, m_x, q) -> float:
        if nlz_enabled:
            return mixed_coupling(line, (F_g, m_g), (F_x, m_x), q, B,
                                  excited_solution=xsol, constants=consts)
        return coupling_zero_field(F_g, m_g, F_x, m_x, q, gl.I, gl.J, xl.J)

    couplings: dict[tuple[int, int], float] = {}
    for gk in range(3):
        g_st = states[gk]
        for xk in range(3, sink):
            x_st = states[xk]
            dm = (x_st.m.twice - g_st.m.twice) // 2
            if dm not in (-1, 1):
                continue
            a = prefactor(1, g_st.m.value, x_st.F, x_st.m, -dm)
            if a != 0.0:
                couplings[(gk, xk)] = a

    # spontaneous decay: branching over the full lower manifold (F_g = 1 and
    # 2, every q); the F_g=2 share is routed into the dark sink so that each
    # excited state keeps the full amplitude decay gamma
    decays: dict[tuple[int, int], float] = {}
    strength_total = (gl.J.twice + 1) / (xl.J.twice + 1)
    for xk in range(3, sink):
        x_st = states[xk]
        to_sink = 0.0
        for F_g in (1, 2):
            for tmg in range(-2 * F_g, 2 * F_g + 1, 2):
                q = (tmg - x_st.m.twice) // 2
                if q not in (-1, 0, 1) or (tmg - x_st.m.twice) % 2:
                    continue
                a = prefactor(F_g, tmg / 2, x_st.F, x_st.m, q)
                w = a * a / strength_total
                if w == 0.0:
                    continue
                if F_g == 1:
                    gk = next(k for k in range(3) if states[k].m.twice == tmg)
                    decays[(xk, gk)] = params.gamma * w
                else:
                    to_sink += params.gamma * w
        if to_sink > 0.0:
            decays[(xk, sink)] = to_sink

    return CavitySystem(
        line=line, params=params, B=B, nlz_enabled=nlz_enabled,
        atomic_states=tuple(states), atomic_energies=np.array(energies),
        coupling_table=couplings, decay_table=decays, dark_sink=sink,
        ground_solution=gsol, excited_solution=xsol,
    )


def build_interaction(system: CavitySystem, pulse: Pulse,
                      delta_L: float | None = None):
    """Static + laser-modulated Hamiltonian halves and the pulse envelope.

    Returns (H0, H1, envelope) with H(t) = H0 + envelope(t) * H1 in the
    rotating frame of the laser, plus the per-state excitation number used
    for the accounting invariant.
    """
    if delta_L is None:
        delta_L = pulse.laser_detuning
    if delta_L is None:
        raise ConfigurationError("laser detuning not set; pass delta_L or set it on the pulse")
    n_ph = len(PHOTON_STATES)
    dim = system.dim
    H0 = np.zeros((dim, dim), dtype=complex)
    H1 = np.zeros((dim, dim), dtype=complex)
    delta_C = system.params.delta_C

    for ak, st in enumerate(system.atomic_states):
        excited = st.kind == "excited"
        for pk, (np_, nm_) in enumerate(PHOTON_STATES):
            idx = ak * n_ph + pk
            e = system.atomic_energies[ak] + (np_ + nm_) * (delta_C - delta_L)
            if not excited:
                e += delta_L
            H0[idx, idx] = e

    g_bar = system.params.g_bar
    for (gk, xk), a in system.coupling_table.items():
        dm = (system.atomic_states[xk].m.twice - system.atomic_states[gk].m.twice) // 2
        # laser leg: photon numbers unchanged
        for pk in range(n_ph):
            gi = gk * n_ph + pk
            xi = xk * n_ph + pk
            H1[xi, gi] += -0.5 * a
            H1[gi, xi] += -0.5 * a
        # cavity leg: |x, vac> <-> |g, one sigma+- photon>
        ph = (1, 0) if dm == 1 else (0, 1)
        gi = gk * n_ph + PHOTON_STATES.index(ph)
        xi = xk * n_ph + PHOTON_STATES.index((0, 0))
        H0[xi, gi] += -a * g_bar
        H0[gi, xi] += -a * g_bar

    return H0, H1, pulse.envelope


def collapse_channels(system: CavitySystem) -> list[CollapseChannel]:
    n_ph = len(PHOTON_STATES)
    dim = system.dim
    chans: list[CollapseChannel] = []
    for sign, kind in ((1, ChannelKind.CAVITY_PLUS), (-1, ChannelKind.CAVITY_MINUS)):
        ph_one = (1, 0) if sign == 1 else (0, 1)
        op = np.zeros((dim, dim), dtype=complex)
        for ak in range(system.n_atomic):
            op[ak * n_ph + 0, ak * n_ph + PHOTON_STATES.index(ph_one)] = 1.0
        chans.append(CollapseChannel(
            np.sqrt(2 * system.params.kappa) * op,
            f"cavity sigma{'+' if sign == 1 else '-'} decay", kind,
        ))
    for (xk, tk), rate in system.decay_table.items():
        op = np.zeros((dim, dim), dtype=complex)
        for pk in range(n_ph):
            op[tk * n_ph + pk, xk * n_ph + pk] = 1.0
        src = system.atomic_states[xk].label()
        dst = system.atomic_states[tk].label()
        chans.append(CollapseChannel(
            np.sqrt(2 * rate) * op, f"spont {src} -> {dst}", ChannelKind.SPONTANEOUS,
        ))
    return chans


def excitation_number(system: CavitySystem) -> np.ndarray:
    n_ph = len(PHOTON_STATES)
    diag = np.zeros(system.dim)
    for ak, st in enumerate(system.atomic_states):
        for pk, (np_, nm_) in enumerate(PHOTON_STATES):
            diag[ak * n_ph + pk] = (1 if st.kind == "excited" else 0) + np_ + nm_
    return np.diag(diag).astype(complex)


def _default_grid(system: CavitySystem, pulse: Pulse, dt: float) -> np.ndarray:
    tail = 10.0 / (2 * system.params.kappa) + 3.0 / (2 * system.params.gamma)
    t_end = pulse.duration + tail
    n_steps = int(math.ceil(t_end / dt))
    return np.arange(n_steps + 1) * dt


def _ground_rho(system: CavitySystem, populations: dict[int, float]) -> np.ndarray:
    rho = np.zeros((system.dim, system.dim), dtype=complex)
    for m, p in populations.items():
        idx = system.index(system.atomic_index("ground", 1, m), (0, 0))
        rho[idx, idx] = p
    return rho


def _atomic_populations(system: CavitySystem, rho: np.ndarray) -> dict[str, float]:
    n_ph = len(PHOTON_STATES)
    pops = {}
    for ak, st in enumerate(system.atomic_states):
        p = sum(rho[ak * n_ph + pk, ak * n_ph + pk].real for pk in range(n_ph))
        pops[st.label()] = p
    return pops


def _run(system: CavitySystem, pulse: Pulse, delta_L: float, rho0: np.ndarray,
         dt: float, keep_trajectory: bool) -> tuple[Trajectory, dict[str, float]]:
    H0, H1, env = build_interaction(system, pulse, delta_L)
    t_grid = _default_grid(system, pulse, dt)
    traj = evolve((H0, H1, env), collapse_channels(system), rho0, t_grid)
    pops = _atomic_populations(system, traj.final_state())
    return traj, pops


def run_photon_production(system: CavitySystem, pulse: Pulse, initial_m: int, *,
                          dt: float = 1e-9, keep_trajectory: bool = False) -> EmissionResult:
    """Drive one V-STIRAP transfer |1, initial_m> -> |1, -initial_m>.

    An atom starting in m = +1 (-1) emits a sigma+ (sigma-) photon; unless
    the pulse carries an explicit laser detuning the two-photon-resonant
    value Delta_C +- 2 Delta_Z is used.
    """
    if initial_m not in (-1, 1):
        raise ValueError("initial_m must be +1 or -1")
    delta_L = pulse.laser_detuning
    if delta_L is None:
        delta_L = system.raman_laser_detuning(initial_m)
    rho0 = _ground_rho(system, {initial_m: 1.0})
    traj, pops = _run(system, pulse, delta_L, rho0, dt, keep_trajectory)

    n_plus = integrate_channel_flux(traj, ChannelKind.CAVITY_PLUS)
    n_minus = integrate_channel_flux(traj, ChannelKind.CAVITY_MINUS)
    n_spont = integrate_channel_flux(traj, ChannelKind.SPONTANEOUS)
    eta = n_plus if initial_m == 1 else n_minus
    initial_label = system.atomic_states[system.atomic_index("ground", 1, initial_m)].label()
    return EmissionResult(
        n_cav_plus=n_plus, n_cav_minus=n_minus, n_spont=n_spont, eta=eta,
        F_P=(n_plus + n_minus) / n_spont if n_spont > 0 else math.inf,
        final_populations=pops,
        depopulation=1.0 - pops[initial_label],
        trajectory=traj if keep_trajectory else None,
    )


def run_depopulation(system: CavitySystem, pulse: Pulse, wrong_state_m: int, *,
                     dt: float = 1e-9) -> tuple[float, float]:
    """Depletion of an atom parked in the stretched state the pulse does not address.

    The pulse is tuned for production out of the opposite stretched state
    (-wrong_state_m); returns (depopulation fraction, spontaneous photons).
    """
    if wrong_state_m not in (-1, 1):
        raise ValueError("wrong_state_m must be +1 or -1")
    delta_L = pulse.laser_detuning
    if delta_L is None:
        delta_L = system.raman_laser_detuning(-wrong_state_m)
    rho0 = _ground_rho(system, {wrong_state_m: 1.0})
    traj, pops = _run(system, pulse, delta_L, rho0, dt, False)
    label = system.atomic_states[system.atomic_index("ground", 1, wrong_state_m)].label()
    n_spont = integrate_channel_flux(traj, ChannelKind.SPONTANEOUS)
    return 1.0 - pops[label], n_spont


def run_cw_scattering(system: CavitySystem, omega_bar: float,
                      delta_L_values: Sequence[float], *, dwell: float = 2e-6,
                      dt: float = 2e-9) -> dict[str, np.ndarray]:
    """Integrated sigma+- emission versus laser detuning under constant drive.

    The atom starts in an equal mixture of the three F_g=1 sublevels with the
    cavity in vacuum; emission is integrated over a fixed dwell time.
    """
    pulse = Pulse(shape="constant", peak_rabi=omega_bar, duration=dwell)
    rho0 = _ground_rho(system, {-1: 1 / 3, 0: 1 / 3, 1: 1 / 3})
    t_grid = np.arange(int(math.ceil(dwell / dt)) + 1) * dt
    chans = collapse_channels(system)
    out_p, out_m = [], []
    for dL in delta_L_values:
        H0, H1, env = build_interaction(system, pulse, float(dL))
        traj = evolve((H0, H1, env), chans, rho0, t_grid)
        out_p.append(integrate_channel_flux(traj, ChannelKind.CAVITY_PLUS))
        out_m.append(integrate_channel_flux(traj, ChannelKind.CAVITY_MINUS))
    return {
        "delta_L": np.asarray(delta_L_values, dtype=float),
        "n_plus": np.array(out_p),
        "n_minus": np.array(out_m),
    }


def cavity_params_from_geometry(length: float, mirror_transmissions: tuple[float, float],
                                scattering_losses: tuple[float, float], wavelength: float,
                                mirror_radius: float, dipole: float, *,
                                atom: Atom | None = None) -> tuple[float, float, float]:
    """(finesse, kappa, g_bar0) from mirror data and geometry.

    Losses and transmissions are in ppm.  kappa is the field decay rate, so
    the linewidth is Delta_omega_FWHM = 2 kappa = free spectral range / finesse.
    The vacuum coupling uses the Gaussian mode volume V = (pi/4) w0^2 L with
    g_bar0 = d sqrt(omega / (4 hbar eps0 V)), normalised so that multiplying
    by the angular prefactor A of a transition gives that transition's
    coupling rate.
    """
    if atom is None:
        atom = default_atom()
    consts = atom.constants
    if length >= 2 * mirror_radius:
        raise ValueError("unstable resonator: length must be below 2 R_cav")
    total_loss = (sum(mirror_transmissions) + sum(scattering_losses)) * 1e-6
    if total_loss <= 0:
        raise ValueError("total round-trip loss must be positive")
    finesse = 2 * math.pi / total_loss
    fsr = math.pi * consts.c / length            # angular free spectral range
    kappa = fsr / finesse / 2.0
    omega = 2 * math.pi * consts.c / wavelength
    waist_sq = (wavelength / (2 * math.pi)) * math.sqrt(length * (2 * mirror_radius - length))
    mode_volume = (math.pi / 4.0) * waist_sq * length
    g_bar0 = dipole * math.sqrt(omega / (4 * consts.hbar * consts.eps0 * mode_volume))
    return finesse, kappa, g_bar0
