"""Benchmark: compiled vs pure-NumPy propagation kernel.

Runs a realistic photon-production solve for both lines with each backend
and prints wall times plus the maximum state discrepancy.

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from rbcavity._kernels import _pykernel
from rbcavity.cavitysys import build_interaction, collapse_channels, run_photon_production
from rbcavity.experiments import scenario_presets
from rbcavity.mesolve import _drift_matrix, _pack_refill
from rbcavity.units import MHZ

try:
    from rbcavity._kernels import _cykernel
except ImportError:
    _cykernel = None


def kernel_args(scenario_name, delta_C_mhz, dt=1e-9):
    scenario = scenario_presets()[scenario_name]
    system = scenario.build(delta_C_mhz * MHZ)
    pulse = scenario.pulse
    H0, H1, env = build_interaction(system, pulse, system.raman_laser_detuning(+1))
    channels = collapse_channels(system)
    K0 = _drift_matrix(H0, channels)
    K1 = -1j * H1
    tail = 10.0 / (2 * system.params.kappa)
    n_steps = int(np.ceil((pulse.duration + tail) / dt))
    fmid = np.array([env((k + 0.5) * dt) for k in range(n_steps)])
    refill = _pack_refill(channels, system.dim)
    rho0 = np.zeros((system.dim, system.dim), complex)
    rho0[system.index(system.atomic_index("ground", 1, 1), (0, 0))] = 0.0
    idx = system.index(system.atomic_index("ground", 1, 1), (0, 0))
    rho0[idx, idx] = 1.0
    return (K0, K1, fmid, *refill, rho0, dt), system.dim, n_steps


def bench(fn, args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    cases = [("D2-current", 72.0), ("D1-fibre", 29.0)]
    print(f"{'case':>12} {'dim':>4} {'steps':>6} {'numpy':>9} {'cython':>9} "
          f"{'speedup':>8} {'max|diff|':>10}")
    for name, dc in cases:
        args, dim, steps = kernel_args(name, dc)
        t_py, s_py = bench(_pykernel.propagate, args)
        if _cykernel is None:
            print(f"{name:>12} {dim:>4} {steps:>6} {t_py:>8.3f}s   (compiled kernel not built)")
            continue
        t_cy, s_cy = bench(_cykernel.propagate, args)
        diff = float(np.abs(s_py - s_cy).max())
        print(f"{name:>12} {dim:>4} {steps:>6} {t_py:>8.3f}s {t_cy:>8.3f}s "
              f"{t_py / t_cy:>7.1f}x {diff:>10.2e}")

    # whole-experiment timing through the public entry point
    scenario = scenario_presets()["D2-current"]
    system = scenario.build(72.0 * MHZ)
    t0 = time.perf_counter()
    res = run_photon_production(system, scenario.pulse, +1)
    print(f"\nfull D2 production solve (active backend): "
          f"{time.perf_counter() - t0:.3f} s, eta = {res.eta:.4f}")


if __name__ == "__main__":
    main()
