"""Command-line interface.

Subcommands
    levels      Breit-Rabi curves (and optionally coupling tables) as CSV
    produce     photon production at one operating point, both polarisations
    sweep       cavity-detuning sweep with CSV + JSON sidecar export
    scattering  cw laser-scan emission spectra
    hom         two-photon correlation curves from a wavepacket model (or a
                measured profile, which is fitted first)
    fit         fit the two-component emission model to a measured profile

All user-facing frequencies are nu = omega/2pi in MHz, times in ns and
fields in gauss.  Exit status: 0 success, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .atomstruct import ConfigurationError, default_atom, diagonalize_level, mixed_coupling
from .cavitysys import run_cw_scattering, run_photon_production
from .experiments import (
    DEFAULT_SWEEP_RANGES_MHZ,
    Scenario,
    SweepResult,
    conditional_imbalance,
    scenario_presets,
    sweep_cavity_detuning,
)
from .hom import (
    WavepacketModel,
    fit_emission_model,
    visibility,
    weighted_pair_interference,
)
from .mesolve import IntegrationError
from .units import GAUSS, MHZ, NS

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load_scenario(args) -> Scenario:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            payload = json.load(fh)
        if "scenario" in payload:
            payload = payload["scenario"]
        scenario = Scenario.from_dict(payload)
    else:
        presets = scenario_presets()
        name = getattr(args, "scenario", None)
        if name not in presets:
            raise ConfigurationError(
                f"unknown scenario {name!r}; choose from {sorted(presets)} or pass --config")
        scenario = presets[name]
    nlz = getattr(args, "nlz", None)
    if nlz is not None:
        scenario = Scenario(name=scenario.name, line=scenario.line,
                            cavity=scenario.cavity, delta_Z=scenario.delta_Z,
                            pulse=scenario.pulse, nlz_enabled=(nlz == "on"))
    return scenario


def _parse_grid(spec: str) -> tuple[float, float, int]:
    try:
        start, stop, points = spec.split(":")
        return float(start), float(stop), int(points)
    except ValueError:
        raise ConfigurationError(
            f"bad --grid {spec!r}; expected start:stop:points in MHz") from None


# ---------------------------------------------------------------------------
# levels

def _cmd_levels(args) -> int:
    atom = default_atom()
    if args.level not in atom.levels:
        raise ConfigurationError(
            f"unknown level {args.level!r}; configured: {sorted(atom.levels)}")
    level = atom.levels[args.level]
    b_grid = np.linspace(0.0, args.bmax, args.points)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["B_gauss", "level_label", "F", "m_F", "energy_MHz"])
        for bg in b_grid:
            sol = diagonalize_level(level, bg * GAUSS, atom.constants)
            for F, m in sol.states():
                w.writerow([repr(float(bg)), level.label, repr(float(F.value)),
                            repr(float(m.value)), repr(float(sol.energy(F, m) / MHZ))])
    print(f"levels: wrote {args.points} field points for {args.level} to {args.out}")

    if args.couplings:
        line = atom.line(args.line)
        with open(args.couplings, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["B_gauss", "ground_label", "excited_label", "q", "A_coeff"])
            for bg in b_grid:
                xsol = diagonalize_level(line.excited, bg * GAUSS, atom.constants)
                for F, m in xsol.states():
                    for tmg in (-2, 0, 2):
                        q = (tmg - m.twice) // 2
                        if q not in (-1, 0, 1) or (tmg - m.twice) % 2:
                            continue
                        a = mixed_coupling(line, (1, tmg / 2), (F, m), q, bg * GAUSS,
                                           excited_solution=xsol)
                        w.writerow([repr(float(bg)), f"g:1:{tmg // 2}",
                                    f"x:{F}:{m}", q, repr(float(a))])
        print(f"levels: wrote coupling table to {args.couplings}")
    return 0


# ---------------------------------------------------------------------------
# produce

def _cmd_produce(args) -> int:
    scenario = _load_scenario(args)
    delta_C = None if args.delta_c is None else args.delta_c * MHZ
    system = scenario.build(delta_C)
    plus = run_photon_production(system, scenario.pulse, +1, dt=args.dt_ns * NS)
    minus = run_photon_production(system, scenario.pulse, -1, dt=args.dt_ns * NS)
    imbalance = conditional_imbalance(plus.eta, minus.eta)
    print(f"produce {scenario.name} delta_C/2pi={system.params.delta_C / MHZ:.3f} MHz: "
          f"eta+={plus.eta:.4f} eta-={minus.eta:.4f} "
          f"F_P+={plus.F_P:.3f} F_P-={minus.F_P:.3f} imbalance={imbalance:.3f}")
    if args.out:
        payload = {
            "scenario": scenario.to_dict(),
            "delta_C_MHz": system.params.delta_C / MHZ,
            "results": {
                "sigma_plus": _emission_dict(plus),
                "sigma_minus": _emission_dict(minus),
                "imbalance": imbalance,
            },
        }
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return 0


def _emission_dict(res) -> dict:
    return {
        "eta": res.eta,
        "n_cav_plus": res.n_cav_plus,
        "n_cav_minus": res.n_cav_minus,
        "n_spont": res.n_spont,
        "F_P": res.F_P,
        "depopulation": res.depopulation,
        "final_populations": res.final_populations,
    }


# ---------------------------------------------------------------------------
# sweep

def _sweep_point(payload):
    scenario_dict, dc, dt, include_dep = payload
    scenario = Scenario.from_dict(scenario_dict)
    n_cols = 8 if include_dep else 6
    try:
        system = scenario.build(dc)
        plus = run_photon_production(system, scenario.pulse, +1, dt=dt)
        minus = run_photon_production(system, scenario.pulse, -1, dt=dt)
        out = [plus.eta, minus.eta, plus.n_spont, minus.n_spont, plus.F_P, minus.F_P]
        if include_dep:
            from .cavitysys import run_depopulation
            out.append(run_depopulation(system, scenario.pulse, +1, dt=dt)[0])
            out.append(run_depopulation(system, scenario.pulse, -1, dt=dt)[0])
        return out, None
    except Exception as exc:  # noqa: BLE001 - per-point fault isolation
        return [float("nan")] * n_cols, f"{type(exc).__name__}: {exc}"


def _cmd_sweep(args) -> int:
    scenario = _load_scenario(args)
    if args.grid:
        start, stop, points = _parse_grid(args.grid)
    else:
        start, stop = DEFAULT_SWEEP_RANGES_MHZ.get(scenario.name, (-20.0, 110.0))
        points = 97
    dt = args.dt_ns * NS

    if args.jobs > 1:
        grid = np.linspace(start * MHZ, stop * MHZ, points)
        payloads = [(scenario.to_dict(), float(dc), dt, args.depopulation) for dc in grid]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, payloads))
        cols = np.array([r[0] for r in results])
        errors = tuple(r[1] for r in results)
        sweep = SweepResult(
            scenario=scenario, delta_C=grid,
            eta_plus=cols[:, 0], eta_minus=cols[:, 1],
            n_spont_plus=cols[:, 2], n_spont_minus=cols[:, 3],
            F_P_plus=cols[:, 4], F_P_minus=cols[:, 5],
            depopulation_plus=cols[:, 6] if args.depopulation else None,
            depopulation_minus=cols[:, 7] if args.depopulation else None,
            errors=errors,
        )
    else:
        sweep = sweep_cavity_detuning(scenario, (start * MHZ, stop * MHZ), points,
                                      dt=dt, include_depopulation=args.depopulation)

    failed = [e for e in sweep.errors if e]
    if failed:
        print(f"sweep: {len(failed)} of {points} points failed "
              f"(first: {failed[0]})", file=sys.stderr)
        if len(failed) == points:
            raise IntegrationError("every sweep point failed", float("nan"))
    sidecar = args.sidecar or (str(args.out) + ".json")
    sweep.write_csv(args.out, sidecar)
    crossings = [f"{x / MHZ:.2f}" for x in sweep.equal_emission_crossings()]
    print(f"sweep {scenario.name}: {points} points over [{start}, {stop}] MHz -> {args.out}; "
          f"equal-emission crossings at {crossings} MHz")
    return 0


# ---------------------------------------------------------------------------
# scattering

def _cmd_scattering(args) -> int:
    scenario = _load_scenario(args)
    system = scenario.build()
    dz = scenario.delta_Z / MHZ
    if args.grid:
        start, stop, points = _parse_grid(args.grid)
    else:
        dc = system.params.delta_C / MHZ
        start, stop, points = dc - 2 * dz - 13.0, dc + 2 * dz + 13.0, 41
    grid = np.linspace(start * MHZ, stop * MHZ, points)
    out = run_cw_scattering(system, args.omega_bar * MHZ, grid,
                            dwell=args.dwell_ns * NS)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta_L_MHz", "n_plus", "n_minus"])
        for k in range(len(grid)):
            w.writerow([repr(float(out["delta_L"][k] / MHZ)), repr(float(out["n_plus"][k])),
                        repr(float(out["n_minus"][k]))])
    k_plus = int(np.argmax(out["n_plus"]))
    k_minus = int(np.argmax(out["n_minus"]))
    print(f"scattering {scenario.name}: peaks n+ at {out['delta_L'][k_plus] / MHZ:.2f} MHz, "
          f"n- at {out['delta_L'][k_minus] / MHZ:.2f} MHz -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# hom / fit

def _model_from_json(path) -> WavepacketModel:
    with open(path) as fh:
        d = json.load(fh)
    try:
        return WavepacketModel(
            delta_t=d["delta_t_ns"] * NS,
            t0=d["t0_ns"] * NS,
            delta_t_prime=d["delta_t_prime_ns"] * NS,
            t0_prime=d["t0_prime_ns"] * NS,
            jitter=d["jitter_ns"] * NS,
            P_cont=d["P_cont"],
            L_ph=d["L_ph_ns"] * NS,
            beat_fraction=d.get("beat_fraction", 0.0),
            beat_freq=d.get("beat_freq_MHz", 0.0) * MHZ,
        )
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"bad wavepacket model: {exc}") from None


def _model_to_json(model: WavepacketModel) -> dict:
    return {
        "delta_t_ns": model.delta_t / NS,
        "t0_ns": model.t0 / NS,
        "delta_t_prime_ns": model.delta_t_prime / NS,
        "t0_prime_ns": model.t0_prime / NS,
        "jitter_ns": model.jitter / NS,
        "P_cont": model.P_cont,
        "L_ph_ns": model.L_ph / NS,
        "beat_fraction": model.beat_fraction,
        "beat_freq_MHz": model.beat_freq / MHZ,
    }


def _read_profile(path):
    times, counts = [], []
    with open(path) as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip() or row[0].startswith("#"):
                continue
            try:
                t, y = float(row[0]), float(row[1])
            except ValueError:
                continue  # header
            times.append(t * NS)
            counts.append(y)
    if len(times) < 20:
        raise ConfigurationError(f"profile {path} has fewer than 20 usable rows")
    t = np.asarray(times)
    y = np.asarray(counts, dtype=float)
    norm = np.trapezoid(y, t)
    if norm <= 0:
        raise ConfigurationError("profile has no counts")
    return t, y / norm


def _cmd_hom(args) -> int:
    if args.model:
        model = _model_from_json(args.model)
    elif args.profile:
        t, y = _read_profile(args.profile)
        model, _resid = fit_emission_model(t, y, args.length_ns * NS)
    else:
        raise ConfigurationError("hom needs --model or --profile")
    if args.beat_fraction is not None:
        model = WavepacketModel(**{**model.__dict__,
                                   "beat_fraction": args.beat_fraction,
                                   "beat_freq": args.beat_freq * MHZ})
    curve = weighted_pair_interference(model)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau_ns", "P_perp", "P_para"])
        for k in range(len(curve.tau)):
            w.writerow([repr(float(curve.tau[k] / NS)), repr(float(curve.P_perp[k])),
                        repr(float(curve.P_para[k]))])
    v_full = visibility(curve)
    summary = {
        "model": _model_to_json(model),
        "visibility_full": v_full,
    }
    if args.window_ns:
        summary["visibility_window"] = visibility(curve, window=args.window_ns * NS)
        summary["window_ns"] = args.window_ns
    if args.summary:
        with open(args.summary, "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    windowed = (f" windowed={summary['visibility_window'] * 100:.1f}%"
                if args.window_ns else "")
    print(f"hom: visibility={v_full * 100:.1f}%{windowed} -> {args.out}")
    return 0


def _cmd_fit(args) -> int:
    t, y = _read_profile(args.profile)
    model, resid = fit_emission_model(t, y, args.length_ns * NS)
    with open(args.out, "w") as fh:
        json.dump(_model_to_json(model), fh, indent=2)
        fh.write("\n")
    print(f"fit: delta_t={model.delta_t / NS:.1f} ns t0={model.t0 / NS:.1f} ns "
          f"P_cont={model.P_cont:.3f} rms={resid:.3e} -> {args.out}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rbcavity", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add_scenario_args(sp):
        sp.add_argument("--scenario", help="preset name (see experiments)")
        sp.add_argument("--config", help="JSON file with an inline scenario")
        sp.add_argument("--nlz", choices=["on", "off"], default=None,
                        help="override the nonlinear-Zeeman treatment")

    sp = sub.add_parser("levels", help="Breit-Rabi curves as CSV")
    sp.add_argument("--level", required=True, help="e.g. 5S1_2, 5P1_2, 5P3_2")
    sp.add_argument("--bmax", type=float, default=250.0, help="max field in gauss")
    sp.add_argument("--points", type=int, default=251)
    sp.add_argument("--out", required=True)
    sp.add_argument("--couplings", help="also write the coupling table CSV here")
    sp.add_argument("--line", default="D2", help="line for the coupling table")
    sp.set_defaults(func=_cmd_levels)

    sp = sub.add_parser("produce", help="single-point photon production")
    add_scenario_args(sp)
    sp.add_argument("--delta-c", type=float, default=None, dest="delta_c",
                    help="cavity detuning in MHz (default: scenario value)")
    sp.add_argument("--dt-ns", type=float, default=1.0)
    sp.add_argument("--out", help="JSON output path")
    sp.set_defaults(func=_cmd_produce)

    sp = sub.add_parser("sweep", help="cavity-detuning sweep")
    add_scenario_args(sp)
    sp.add_argument("--grid", help="start:stop:points in MHz")
    sp.add_argument("--depopulation", action="store_true")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--dt-ns", type=float, default=2.0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--sidecar", help="JSON sidecar path (default: <out>.json)")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("scattering", help="cw laser-scan emission")
    add_scenario_args(sp)
    sp.add_argument("--omega-bar", type=float, default=2.0, dest="omega_bar",
                    help="constant drive amplitude in MHz")
    sp.add_argument("--dwell-ns", type=float, default=2000.0)
    sp.add_argument("--grid", help="start:stop:points for delta_L in MHz")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_scattering)

    sp = sub.add_parser("hom", help="two-photon correlation curves")
    sp.add_argument("--model", help="wavepacket model JSON")
    sp.add_argument("--profile", help="measured profile CSV (time_ns, counts)")
    sp.add_argument("--length-ns", type=float, default=300.0)
    sp.add_argument("--beat-fraction", type=float, default=None)
    sp.add_argument("--beat-freq", type=float, default=15.0,
                    help="beat frequency in MHz")
    sp.add_argument("--window-ns", type=float, default=None)
    sp.add_argument("--out", required=True)
    sp.add_argument("--summary", help="JSON summary path")
    sp.set_defaults(func=_cmd_hom)

    sp = sub.add_parser("fit", help="fit the emission model to a profile")
    sp.add_argument("--profile", required=True)
    sp.add_argument("--length-ns", type=float, default=300.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_fit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
