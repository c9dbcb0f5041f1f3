"""Hyperfine + Zeeman structure of a fine-structure level.

Builds the hyperfine and magnetic Hamiltonians of one fine-structure level in
the |F, m_F> basis, diagonalises them per m_F block (only states of equal m_F
are coupled by an axial field) and exposes the resulting level shifts and
mixing coefficients c_FF'.  Field-dressed transition prefactors are obtained
by contracting the mixing coefficients with the zero-field prefactors over
the full excited manifold.

All energies are angular frequencies (rad/s); fields are in tesla.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from .angular import HalfInt, Spinlike, clebsch_gordan, coupling_zero_field
from .units import MHZ

DATA_ENV_VAR = "RBCAVITY_DATA"


class ConfigurationError(Exception):
    """Raised for inconsistent level or scenario configuration."""


@dataclass(frozen=True)
class PhysicalConstants:
    mu_B: float          # J/T
    hbar: float          # J s
    eps0: float          # F/m
    c: float             # m/s
    g_S: float
    g_L: float
    g_I: float           # negative for 87Rb

    def __post_init__(self):
        for name in ("mu_B", "hbar", "eps0", "c", "g_S", "g_L"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")


@dataclass(frozen=True)
class FineLevel:
    I: HalfInt
    J: HalfInt
    L: HalfInt
    S: HalfInt
    A_hfs: float         # rad/s
    B_hfs: float         # rad/s
    label: str = ""

    def __post_init__(self):
        if not abs(self.L.twice - self.S.twice) <= self.J.twice <= self.L.twice + self.S.twice:
            raise ConfigurationError(f"J={self.J} violates the L,S triangle rule")
        if self.B_hfs != 0.0 and (self.J.twice <= 1 or self.I.twice <= 1):
            raise ConfigurationError(
                "electric-quadrupole constant is undefined for J=1/2 or I=1/2"
            )

    @property
    def f_values(self) -> list[HalfInt]:
        lo = abs(self.I.twice - self.J.twice)
        hi = self.I.twice + self.J.twice
        return [HalfInt(t) for t in range(lo, hi + 1, 2)]

    def basis(self) -> list[tuple[HalfInt, HalfInt]]:
        """All |F, m_F> states, grouped by F ascending then m_F ascending."""
        out = []
        for F in self.f_values:
            for tm in range(-F.twice, F.twice + 1, 2):
                out.append((F, HalfInt(tm)))
        return out


@dataclass(frozen=True)
class TransitionLine:
    ground: FineLevel
    excited: FineLevel
    reduced_dipole: float    # C m
    wavelength: float        # m
    label: str = ""

    def __post_init__(self):
        if self.reduced_dipole <= 0:
            raise ConfigurationError("reduced dipole moment must be positive")

    @property
    def omega(self) -> float:
        """Optical angular frequency of the line."""
        return 2.0 * np.pi * 299792458.0 / self.wavelength


@dataclass(frozen=True)
class Atom:
    constants: PhysicalConstants
    levels: dict[str, FineLevel]
    lines: dict[str, TransitionLine]

    def line(self, label: str) -> TransitionLine:
        try:
            return self.lines[label.upper()]
        except KeyError:
            raise ConfigurationError(
                f"unknown line {label!r}; configured: {sorted(self.lines)}"
            ) from None


def _parse_halfint(s) -> HalfInt:
    if isinstance(s, str):
        return HalfInt.of(Fraction(s))
    return HalfInt.of(s)


def load_atom(path: str | None = None) -> Atom:
    """Load constants and level data from the JSON data file.

    The packaged 87Rb file is used unless `path` or the RBCAVITY_DATA
    environment variable points elsewhere.
    """
    if path is None:
        path = os.environ.get(DATA_ENV_VAR)
    if path is None:
        text = resources.files("rbcavity.data").joinpath("rb87.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = json.loads(text)

    consts = PhysicalConstants(**raw["constants"])
    levels = {}
    for name, spec in raw["levels"].items():
        levels[name] = FineLevel(
            I=_parse_halfint(spec["I"]),
            J=_parse_halfint(spec["J"]),
            L=_parse_halfint(spec["L"]),
            S=_parse_halfint(spec["S"]),
            A_hfs=spec["A_hfs_MHz"] * MHZ,
            B_hfs=spec["B_hfs_MHz"] * MHZ,
            label=name,
        )
    lines = {}
    for name, spec in raw["lines"].items():
        lines[name] = TransitionLine(
            ground=levels[spec["ground"]],
            excited=levels[spec["excited"]],
            reduced_dipole=spec["reduced_dipole_Cm"],
            wavelength=spec["wavelength_nm"] * 1e-9,
            label=name,
        )
    return Atom(constants=consts, levels=levels, lines=lines)


_default_atom: Atom | None = None


def default_atom() -> Atom:
    global _default_atom
    if _default_atom is None:
        _default_atom = load_atom()
    return _default_atom


# ---------------------------------------------------------------------------
# g-factors

def lande_g_J(level: FineLevel, constants: PhysicalConstants) -> float:
    J = level.J.value
    L = level.L.value
    S = level.S.value
    jj = J * (J + 1)
    return (
        constants.g_L * (jj - S * (S + 1) + L * (L + 1)) / (2 * jj)
        + constants.g_S * (jj + S * (S + 1) - L * (L + 1)) / (2 * jj)
    )


def lande_g_F(level: FineLevel, F: Spinlike, constants: PhysicalConstants) -> float:
    Fv = HalfInt.of(F).value
    I = level.I.value
    J = level.J.value
    ff = Fv * (Fv + 1)
    g_J = lande_g_J(level, constants)
    return (
        g_J * (ff - I * (I + 1) + J * (J + 1)) / (2 * ff)
        + constants.g_I * (ff + I * (I + 1) - J * (J + 1)) / (2 * ff)
    )


# ---------------------------------------------------------------------------
# Hamiltonians

def hyperfine_shift(level: FineLevel, F: Spinlike) -> float:
    """Hyperfine eigenvalue of the F manifold (rad/s), from K = F(F+1)-I(I+1)-J(J+1)."""
    Fv = HalfInt.of(F).value
    I = level.I.value
    J = level.J.value
    K = Fv * (Fv + 1) - I * (I + 1) - J * (J + 1)
    e = 0.5 * level.A_hfs * K
    if level.B_hfs != 0.0:
        num = 0.75 * K * (K + 1) - I * (I + 1) * J * (J + 1)
        den = 2 * I * (2 * I - 1) * J * (2 * J - 1)
        e += level.B_hfs * num / den
    return e


def build_hyperfine_hamiltonian(level: FineLevel) -> np.ndarray:
    """Hyperfine Hamiltonian in the |F, m_F> basis (diagonal), rad/s."""
    states = level.basis()
    H = np.zeros((len(states), len(states)), dtype=complex)
    for k, (F, _m) in enumerate(states):
        H[k, k] = hyperfine_shift(level, F)
    return H


def build_zeeman_hamiltonian(level: FineLevel, B: float,
                             constants: PhysicalConstants | None = None) -> np.ndarray:
    """Magnetic Hamiltonian (mu_B/hbar)(g_J J_z + g_I I_z)B in the |F, m_F> basis.

    Within one fine-structure level the electronic part g_S S_z + g_L L_z
    projects onto g_J J_z.  Matrix elements follow from expanding |F, m_F>
    onto |m_I, m_J>; only equal-m_F states are connected.
    """
    if constants is None:
        constants = default_atom().constants
    states = level.basis()
    n = len(states)
    H = np.zeros((n, n), dtype=complex)
    if B == 0.0:
        return H
    g_J = lande_g_J(level, constants)
    scale = constants.mu_B * B / constants.hbar
    I, J = level.I, level.J
    for a, (Fa, ma) in enumerate(states):
        for b, (Fb, mb) in enumerate(states):
            if ma.twice != mb.twice or b < a:
                continue
            elem = 0.0
            for tmj in range(-J.twice, J.twice + 1, 2):
                tmi = ma.twice - tmj
                if abs(tmi) > I.twice:
                    continue
                ca = clebsch_gordan(I, HalfInt(tmi), J, HalfInt(tmj), Fa, ma)
                cb = clebsch_gordan(I, HalfInt(tmi), J, HalfInt(tmj), Fb, mb)
                elem += ca * cb * (g_J * tmj / 2.0 + constants.g_I * tmi / 2.0)
            H[a, b] = scale * elem
            H[b, a] = scale * elem
    return H


# ---------------------------------------------------------------------------
# Diagonalisation

@dataclass(frozen=True)
class ZeemanBlock:
    m_F: HalfInt
    f_labels: tuple[HalfInt, ...]        # adiabatic labels, one per eigenstate
    energies: np.ndarray                 # rad/s, aligned with f_labels
    mixing: np.ndarray                   # rows: labelled state; cols: zero-field F'


@dataclass(frozen=True)
class ZeemanSolution:
    level: FineLevel
    B: float
    blocks: dict[int, ZeemanBlock] = field(repr=False)   # keyed by 2*m_F

    def block(self, m_F: Spinlike) -> ZeemanBlock:
        tm = HalfInt.of(m_F).twice
        try:
            return self.blocks[tm]
        except KeyError:
            raise KeyError(f"no m_F={HalfInt(tm)} block in level {self.level.label}") from None

    def energy(self, F: Spinlike, m_F: Spinlike) -> float:
        blk = self.block(m_F)
        tF = HalfInt.of(F).twice
        for k, lab in enumerate(blk.f_labels):
            if lab.twice == tF:
                return float(blk.energies[k])
        raise KeyError(f"no state F={HalfInt.of(F)}, m_F={HalfInt.of(m_F)}")

    def mixing_row(self, F: Spinlike, m_F: Spinlike) -> dict[HalfInt, float]:
        """c_FF' for the labelled state, keyed by the zero-field F'."""
        blk = self.block(m_F)
        tF = HalfInt.of(F).twice
        for k, lab in enumerate(blk.f_labels):
            if lab.twice == tF:
                return {fp: float(blk.mixing[k, j]) for j, fp in enumerate(blk.f_labels)}
        raise KeyError(f"no state F={HalfInt.of(F)}, m_F={HalfInt.of(m_F)}")

    def states(self) -> list[tuple[HalfInt, HalfInt]]:
        out = []
        for tm in sorted(self.blocks):
            for lab in self.blocks[tm].f_labels:
                out.append((lab, HalfInt(tm)))
        return out


def diagonalize_level(level: FineLevel, B: float,
                      constants: PhysicalConstants | None = None) -> ZeemanSolution:
    """Per-m_F diagonalisation of the hyperfine + magnetic Hamiltonian.

    Eigenstates are labelled by adiabatic continuation from B=0: within an
    m_F block eigenvalues cannot cross (no remaining symmetry), so sorting
    block eigenvalues and matching them against the zero-field hyperfine
    ordering reproduces the |F, m_F>~ labels.  Mixing-row signs are fixed by
    making the largest-magnitude coefficient positive.
    """
    if B < 0:
        raise ValueError("field magnitude B must be >= 0")
    if constants is None:
        constants = default_atom().constants
    states = level.basis()
    H = build_hyperfine_hamiltonian(level) + build_zeeman_hamiltonian(level, B, constants)
    Hr = H.real  # Clebsch-Gordan expansion is real

    blocks: dict[int, ZeemanBlock] = {}
    tms = sorted({m.twice for _F, m in states})
    for tm in tms:
        idx = [k for k, (_F, m) in enumerate(states) if m.twice == tm]
        f_present = [F for F, m in states if m.twice == tm]
        sub = Hr[np.ix_(idx, idx)]
        evals, evecs = np.linalg.eigh(sub)
        # zero-field ordering of the F labels present in this block
        order = np.argsort([hyperfine_shift(level, F) for F in f_present], kind="stable")
        labels = tuple(f_present[j] for j in order)
        mixing = np.empty((len(idx), len(idx)))
        energies = np.empty(len(idx))
        for rank, lab in enumerate(labels):
            vec = evecs[:, rank]
            k_dom = int(np.argmax(np.abs(vec)))
            if vec[k_dom] < 0:
                vec = -vec
            mixing[rank] = vec
            energies[rank] = evals[rank]
        blocks[tm] = ZeemanBlock(
            m_F=HalfInt(tm), f_labels=labels, energies=energies, mixing=mixing
        )
    return ZeemanSolution(level=level, B=B, blocks=blocks)


def zeeman_field_from_splitting(delta_Z: float, level: FineLevel, F: Spinlike,
                                m_F: Spinlike,
                                constants: PhysicalConstants | None = None) -> float:
    """|B| producing the weak-field shift hbar*delta_Z = m_F g_F mu_B |B|."""
    if constants is None:
        constants = default_atom().constants
    tm = HalfInt.of(m_F)
    if tm.twice == 0:
        raise ValueError("m_F = 0 has no linear Zeeman shift")
    g_F = lande_g_F(level, F, constants)
    return abs(delta_Z * constants.hbar / (tm.value * g_F * constants.mu_B))


# ---------------------------------------------------------------------------
# Field-dressed couplings

def mixed_coupling(line: TransitionLine, ground: tuple[Spinlike, Spinlike],
                   excited: tuple[Spinlike, Spinlike], q: int, B: float, *,
                   excited_solution: ZeemanSolution | None = None,
                   ground_solution: ZeemanSolution | None = None,
                   include_ground_mixing: bool = False,
                   constants: PhysicalConstants | None = None) -> float:
    """Field-dressed transition prefactor A_{g psi~(x)}.

    Contracts the excited-state mixing coefficients (over the full excited
    manifold) with the zero-field prefactors.  Ground-level mixing is
    neglected by default; `include_ground_mixing=True` contracts both sides.
    """
    F_g, m_g = (HalfInt.of(v) for v in ground)
    F_x, m_x = (HalfInt.of(v) for v in excited)
    if m_g.twice != m_x.twice + 2 * q:
        return 0.0
    if excited_solution is None:
        excited_solution = diagonalize_level(line.excited, B, constants)
    cx = excited_solution.mixing_row(F_x, m_x)

    I = line.ground.I
    J_g, J_x = line.ground.J, line.excited.J

    if not include_ground_mixing:
        total = 0.0
        for Fxp, c in cx.items():
            if c == 0.0:
                continue
            total += c * coupling_zero_field(F_g, m_g, Fxp, m_x, q, I, J_g, J_x)
        return total

    if ground_solution is None:
        ground_solution = diagonalize_level(line.ground, B, constants)
    cg = ground_solution.mixing_row(F_g, m_g)
    total = 0.0
    for Fxp, cxv in cx.items():
        if cxv == 0.0:
            continue
        for Fgp, cgv in cg.items():
            if cgv == 0.0:
                continue
            total += cxv * cgv * coupling_zero_field(Fgp, m_g, Fxp, m_x, q, I, J_g, J_x)
    return total
