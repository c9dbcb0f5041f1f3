"""Scenario presets, detuning sweeps and derived comparisons.

A Scenario bundles the line choice, cavity rates, ground-state Zeeman
splitting and driving pulse of one operating configuration.  The five
presets mirror the configurations studied with this source: the present
cavity driven on the D2 line (photon production and the two-photon
interference variant), the same cavity on the D1 line, a five-fold
shortened cavity and a fibre-tip cavity.

All preset numbers are stored in user units (MHz over 2pi, ns) and
converted on construction; scenarios serialise losslessly to JSON so that
every exported result can be reproduced from its sidecar.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace

import numpy as np

from .atomstruct import (
    Atom,
    ConfigurationError,
    default_atom,
    zeeman_field_from_splitting,
)
from .cavitysys import (
    CavityParams,
    CavitySystem,
    EmissionResult,
    Pulse,
    build_system,
    run_depopulation,
    run_photon_production,
)
from .hom import contamination_probability
from .units import MHZ, NS


@dataclass(frozen=True)
class Scenario:
    name: str
    line: str                    # "D1" or "D2"
    cavity: CavityParams
    delta_Z: float               # rad/s ground-state shift of |m_F|=1
    pulse: Pulse
    nlz_enabled: bool = True

    def __post_init__(self):
        if self.line not in ("D1", "D2"):
            raise ConfigurationError(f"line must be 'D1' or 'D2', got {self.line!r}")
        if self.delta_Z < 0:
            raise ConfigurationError("delta_Z is a magnitude; must be >= 0")

    def field(self, atom: Atom | None = None) -> float:
        atom = atom or default_atom()
        if self.delta_Z == 0.0:
            return 0.0
        return zeeman_field_from_splitting(self.delta_Z, atom.levels["5S1_2"], 1, 1,
                                           atom.constants)

    def build(self, delta_C: float | None = None, *,
              atom: Atom | None = None) -> CavitySystem:
        atom = atom or default_atom()
        params = self.cavity if delta_C is None else replace(self.cavity, delta_C=delta_C)
        return build_system(atom.line(self.line), params, self.field(atom),
                            nlz_enabled=self.nlz_enabled, atom=atom)

    # -- JSON round trip ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "line": self.line,
            "g_bar_MHz": self.cavity.g_bar / MHZ,
            "kappa_MHz": self.cavity.kappa / MHZ,
            "gamma_MHz": self.cavity.gamma / MHZ,
            "delta_C_MHz": self.cavity.delta_C / MHZ,
            "coupling_reduction": self.cavity.coupling_reduction,
            "delta_Z_MHz": self.delta_Z / MHZ,
            "pulse": {
                "shape": self.pulse.shape,
                "peak_rabi_MHz": self.pulse.peak_rabi / MHZ,
                "duration_ns": self.pulse.duration / NS,
                "laser_detuning_MHz": (
                    None if self.pulse.laser_detuning is None
                    else self.pulse.laser_detuning / MHZ),
            },
            "nlz": self.nlz_enabled,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        try:
            pulse_d = d["pulse"]
            pulse = Pulse(
                shape=pulse_d.get("shape", "sin_squared"),
                peak_rabi=pulse_d["peak_rabi_MHz"] * MHZ,
                duration=pulse_d["duration_ns"] * NS,
                laser_detuning=(None if pulse_d.get("laser_detuning_MHz") is None
                                else pulse_d["laser_detuning_MHz"] * MHZ),
            )
            cavity = CavityParams(
                g_bar=d["g_bar_MHz"] * MHZ,
                kappa=d["kappa_MHz"] * MHZ,
                gamma=d["gamma_MHz"] * MHZ,
                delta_C=d.get("delta_C_MHz", 0.0) * MHZ,
                coupling_reduction=d.get("coupling_reduction", 1.0),
            )
            return cls(name=d["name"], line=d["line"], cavity=cavity,
                       delta_Z=d["delta_Z_MHz"] * MHZ, pulse=pulse,
                       nlz_enabled=bool(d.get("nlz", True)))
        except KeyError as exc:
            raise ConfigurationError(f"scenario is missing field {exc}") from None


def scenario_presets() -> dict[str, Scenario]:
    """The five named operating configurations."""

    def mk(name, line, g, kappa, dz, omega0, length_ns, delta_C=0.0, gamma=3.0):
        return Scenario(
            name=name, line=line,
            cavity=CavityParams(g_bar=g * MHZ, kappa=kappa * MHZ, gamma=gamma * MHZ,
                                delta_C=delta_C * MHZ),
            delta_Z=dz * MHZ,
            pulse=Pulse(peak_rabi=omega0 * MHZ, duration=length_ns * NS),
        )

    return {
        "D2-current": mk("D2-current", "D2", 7.32, 1.875, 14.0, 14.0, 500.0, delta_C=81.0),
        "D2-HOM": mk("D2-HOM", "D2", 7.32, 1.875, 14.0, 19.0, 300.0, delta_C=72.0),
        "D1-current": mk("D1-current", "D1", 7.27, 1.875, 14.0, 35.0, 500.0, delta_C=0.0),
        "D1-short": mk("D1-short", "D1", 24.29, 9.375, 70.0, 120.0, 500.0, delta_C=3.9),
        "D1-fibre": mk("D1-fibre", "D1", 66.0, 6.06, 42.0, 66.0, 500.0, delta_C=29.0),
    }


DEFAULT_SWEEP_RANGES_MHZ = {
    "D2-current": (-20.0, 110.0),
    "D2-HOM": (-20.0, 110.0),
    "D1-current": (-40.0, 40.0),
    "D1-short": (-60.0, 70.0),
    "D1-fibre": (-30.0, 70.0),
}


def excited_level_markers(scenario: Scenario) -> dict[tuple[float, float], float]:
    """Detuning positions (rad/s) of the field-dressed excited m-sublevels.

    Positions follow the plot convention: the shift of each dressed sublevel
    relative to the zero-field lowest excited level, on the same scale as
    delta_C.
    """
    atom = default_atom()
    sys0 = scenario.build(delta_C=0.0, atom=atom)
    from .atomstruct import hyperfine_shift  # local import to avoid cycle noise
    line = atom.line(scenario.line)
    e_ref = hyperfine_shift(line.excited, sys0.atomic_states[3].F)
    if scenario.nlz_enabled:
        anchor = sys0.excited_solution.energy(sys0.atomic_states[3].F, 0) - e_ref
    else:
        anchor = 0.0
    out = {}
    for k, st in enumerate(sys0.atomic_states):
        if st.kind != "excited":
            continue
        out[(st.F.value, st.m.value)] = float(sys0.atomic_energies[k]) + anchor
    return out


def midway_detuning(scenario: Scenario) -> float:
    """Detuning halfway between the two dressed m=0 excited levels."""
    markers = excited_level_markers(scenario)
    f_vals = sorted({f for f, _m in markers})
    return 0.5 * (markers[(f_vals[0], 0.0)] + markers[(f_vals[1], 0.0)])


@dataclass(frozen=True)
class SweepResult:
    scenario: Scenario
    delta_C: np.ndarray
    eta_plus: np.ndarray
    eta_minus: np.ndarray
    n_spont_plus: np.ndarray
    n_spont_minus: np.ndarray
    F_P_plus: np.ndarray
    F_P_minus: np.ndarray
    depopulation_plus: np.ndarray | None = None
    depopulation_minus: np.ndarray | None = None
    errors: tuple[str | None, ...] = ()

    def equal_emission_crossings(self) -> list[float]:
        """delta_C values (rad/s) where eta_plus = eta_minus, by linear interpolation."""
        d = self.eta_plus - self.eta_minus
        out = []
        for i in range(len(d) - 1):
            if not (np.isfinite(d[i]) and np.isfinite(d[i + 1])):
                continue
            if d[i] == 0.0:
                out.append(float(self.delta_C[i]))
            elif d[i] * d[i + 1] < 0:
                x = self.delta_C[i] - d[i] * (self.delta_C[i + 1] - self.delta_C[i]) / (d[i + 1] - d[i])
                out.append(float(x))
        return out

    def write_csv(self, path, sidecar_path=None) -> None:
        cols = ["delta_C_MHz", "eta_plus", "eta_minus", "n_spont_plus", "n_spont_minus",
                "F_P_plus", "F_P_minus"]
        have_dep = self.depopulation_plus is not None
        if have_dep:
            cols += ["depopulation_plus", "depopulation_minus"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for k in range(len(self.delta_C)):
                row = [self.delta_C[k] / MHZ, self.eta_plus[k], self.eta_minus[k],
                       self.n_spont_plus[k], self.n_spont_minus[k],
                       self.F_P_plus[k], self.F_P_minus[k]]
                if have_dep:
                    row += [self.depopulation_plus[k], self.depopulation_minus[k]]
                w.writerow([repr(float(v)) for v in row])
        if sidecar_path is not None:
            sidecar = {
                "scenario": self.scenario.to_dict(),
                "grid_MHz": [float(x / MHZ) for x in self.delta_C],
                "errors": list(self.errors) if self.errors else [None] * len(self.delta_C),
            }
            with open(sidecar_path, "w") as fh:
                json.dump(sidecar, fh, indent=2)
                fh.write("\n")


def run_production_pair(scenario: Scenario, delta_C: float | None = None, *,
                        dt: float = 1e-9) -> tuple[EmissionResult, EmissionResult]:
    """Production runs for both polarisations at one cavity detuning."""
    system = scenario.build(delta_C)
    plus = run_photon_production(system, scenario.pulse, +1, dt=dt)
    minus = run_photon_production(system, scenario.pulse, -1, dt=dt)
    return plus, minus


def sweep_cavity_detuning(scenario: Scenario, delta_C_range: tuple[float, float],
                          n_points: int = 97, *, include_depopulation: bool = False,
                          dt: float = 2e-9) -> SweepResult:
    """Run both production directions at each detuning of a uniform grid.

    A failed point is recorded in `errors` and filled with NaN; the sweep
    continues.
    """
    if n_points < 2:
        raise ValueError("need at least 2 sweep points")
    grid = np.linspace(delta_C_range[0], delta_C_range[1], n_points)
    shape = (n_points,)
    cols = {name: np.full(shape, np.nan) for name in
            ("eta_p", "eta_m", "sp_p", "sp_m", "fp_p", "fp_m", "dep_p", "dep_m")}
    errors: list[str | None] = [None] * n_points
    for k, dc in enumerate(grid):
        try:
            system = scenario.build(float(dc))
            plus = run_photon_production(system, scenario.pulse, +1, dt=dt)
            minus = run_photon_production(system, scenario.pulse, -1, dt=dt)
            cols["eta_p"][k] = plus.eta
            cols["eta_m"][k] = minus.eta
            cols["sp_p"][k] = plus.n_spont
            cols["sp_m"][k] = minus.n_spont
            cols["fp_p"][k] = plus.F_P
            cols["fp_m"][k] = minus.F_P
            if include_depopulation:
                cols["dep_p"][k], _ = run_depopulation(system, scenario.pulse, +1, dt=dt)
                cols["dep_m"][k], _ = run_depopulation(system, scenario.pulse, -1, dt=dt)
        except Exception as exc:  # noqa: BLE001 - per-point fault isolation
            errors[k] = f"{type(exc).__name__}: {exc}"
    return SweepResult(
        scenario=scenario, delta_C=grid,
        eta_plus=cols["eta_p"], eta_minus=cols["eta_m"],
        n_spont_plus=cols["sp_p"], n_spont_minus=cols["sp_m"],
        F_P_plus=cols["fp_p"], F_P_minus=cols["fp_m"],
        depopulation_plus=cols["dep_p"] if include_depopulation else None,
        depopulation_minus=cols["dep_m"] if include_depopulation else None,
        errors=tuple(errors),
    )


def conditional_imbalance(eta_plus: float, eta_minus: float) -> float:
    """P(sigma+|sigma-) / {P(sigma+|sigma-) + P(sigma-|sigma+)}.

    Each conditional production probability is the corresponding direction's
    efficiency under perfect preparation by the heralding detection.
    """
    total = eta_plus + eta_minus
    if total <= 0:
        raise ValueError("both efficiencies vanish; imbalance undefined")
    return eta_plus / total


def decay_branching(system: CavitySystem, F_x, m_x=0) -> dict[str, float]:
    """Branching probabilities of one dressed excited sublevel, by target label."""
    xk = system.atomic_index("excited", F_x, m_x)
    gamma = system.params.gamma
    return {
        system.atomic_states[tk].label(): rate / gamma
        for (src, tk), rate in system.decay_table.items()
        if src == xk
    }


def hom_contamination(scenario: Scenario, delta_C: float | None = None, *,
                      dt: float = 2e-9) -> tuple[float, dict]:
    """Contamination probability of cavity emissions for one operating point.

    Runs both production directions, takes the decay branching of the dressed
    m=0 excited level nearest the cavity as the intermediate state, and
    weights the per-polarisation contamination odds 1/(F_P+1) by branching
    into the process's initial sublevel and by relative efficiency.
    """
    system = scenario.build(delta_C)
    plus = run_photon_production(system, scenario.pulse, +1, dt=dt)
    minus = run_photon_production(system, scenario.pulse, -1, dt=dt)
    markers = excited_level_markers(scenario)
    dc = system.params.delta_C
    mediator_F = min((f for f, m in markers if m == 0.0),
                     key=lambda f: abs(markers[(f, 0.0)] - dc))
    branching = decay_branching(system, mediator_F, 0)
    b_plus = branching.get("g:1:1", 0.0)     # sigma+ process restarts from |1,+1>
    b_minus = branching.get("g:1:-1", 0.0)
    p_cont = contamination_probability((plus.eta, minus.eta), (plus.F_P, minus.F_P),
                                       (b_plus, b_minus))
    details = {
        "eta": (plus.eta, minus.eta),
        "F_P": (plus.F_P, minus.F_P),
        "branching": (b_plus, b_minus),
        "mediator_F": float(mediator_F),
    }
    return p_cont, details
