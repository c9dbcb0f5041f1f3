"""Photon wavepacket statistics and two-photon interference.

Photons leaving the cavity are modelled as Gaussian wavepackets.  A
spontaneous decay during the driving pulse restarts the emission, producing
a shortened, late "contaminated" wavepacket; its typical start time and
spread follow from the pulse profile, and the contaminated fraction follows
from the per-polarisation efficiencies, effective Purcell factors and decay
branching.  Two-photon correlation functions at a 50:50 beam splitter are
evaluated for the four clean/contaminated pair scenarios (with arrival-time
jitter on contaminated members and an optional frequency beat) and combined
into the measurable coincidence curves and visibility.

Correlation integrals are evaluated numerically on a uniform grid; for
Gaussian wavepackets the kernels are entire functions, so trapezoidal
sampling at ~1 ns is far below the 1e-6 relative-error budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import fftconvolve


@dataclass(frozen=True)
class WavepacketModel:
    delta_t: float            # clean width parameter (s)
    t0: float                 # clean peak arrival (s)
    delta_t_prime: float      # contaminated width (s)
    t0_prime: float           # contaminated mean arrival (s)
    jitter: float             # contaminated arrival spread Delta tau' (s)
    P_cont: float             # probability an emission is contaminated
    L_ph: float               # driving pulse length (s)
    beat_fraction: float = 0.0
    beat_freq: float = 0.0    # rad/s frequency difference of beating pairs

    def __post_init__(self):
        if self.delta_t <= 0 or self.delta_t_prime <= 0:
            raise ValueError("wavepacket widths must be positive")
        if not 0.0 <= self.P_cont <= 1.0:
            raise ValueError("P_cont must lie in [0, 1]")
        if not 0.0 <= self.beat_fraction <= 1.0:
            raise ValueError("beat_fraction must lie in [0, 1]")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")

    @classmethod
    def from_spontaneous_time(cls, delta_t: float, t0: float, L_ph: float,
                              t_sp: float, jitter: float, P_cont: float,
                              **kw) -> "WavepacketModel":
        dtp, t0p = contaminated_params(delta_t, t0, L_ph, t_sp)
        return cls(delta_t=delta_t, t0=t0, delta_t_prime=dtp, t0_prime=t0p,
                   jitter=jitter, P_cont=P_cont, L_ph=L_ph, **kw)


@dataclass(frozen=True)
class CorrelationCurve:
    tau: np.ndarray
    P_perp: np.ndarray
    P_para: np.ndarray

    def __post_init__(self):
        if not (len(self.tau) == len(self.P_perp) == len(self.P_para)):
            raise ValueError("curve arrays must share one grid")


def gaussian_wavepacket(t, delta_t: float, t0: float):
    """Normalised Gaussian photon amplitude (2/(pi dt^2))^(1/4) e^-((t-t0)/dt)^2."""
    if delta_t <= 0:
        raise ValueError("width parameter delta_t must be positive")
    t = np.asarray(t, dtype=float)
    return (2.0 / (math.pi * delta_t**2)) ** 0.25 * np.exp(-(((t - t0) / delta_t) ** 2))


def arrival_gaussian(t, t0: float, spread: float):
    """Normalised arrival-time distribution (1/(s sqrt(pi))) e^-((t-t0)/s)^2."""
    t = np.asarray(t, dtype=float)
    return np.exp(-(((t - t0) / spread) ** 2)) / (spread * math.sqrt(math.pi))


def contaminated_params(delta_t: float, t0: float, L_ph: float,
                        t_sp: float) -> tuple[float, float]:
    """Width and centre of the post-decay wavepacket.

    The emission restarts at the typical decay time t_sp, so the packet is
    shortened by the lost fraction of the pulse and centred on the remaining
    window: delta_t' = ((L_ph - t_sp)/L_ph) delta_t, t0' = (L_ph + t_sp)/2.
    """
    if not 0.0 < t_sp < L_ph:
        raise ValueError("t_sp must lie strictly inside the pulse")
    return (L_ph - t_sp) / L_ph * delta_t, (L_ph + t_sp) / 2.0


@dataclass(frozen=True)
class SpontaneousTiming:
    t: np.ndarray
    p_emm: np.ndarray           # normalised start-time distribution of contaminated photons
    t_sp: float                 # centre of the Gaussian fit
    delta_tau: float            # width parameter of the Gaussian fit
    residual: float


def _sin4_cumulative(t, L_ph):
    # integral of sin^4(pi s/L) from 0 to t, normalised to 1 at t = L
    u = np.pi * np.asarray(t, dtype=float) / L_ph
    raw = (L_ph / np.pi) * (3 * u / 8 - np.sin(2 * u) / 4 + np.sin(4 * u) / 32)
    return raw / (3 * L_ph / 8)


def spontaneous_timing(L_ph: float, psi_sq, n_grid: int = 2001) -> SpontaneousTiming:
    """Start-time statistics of emissions that follow one spontaneous decay.

    The decay probability tracks the pump intensity, sin^4(pi t/L_ph),
    normalised to one event per pulse.  The probability that the last decay
    happened by time t is then F(t)^2 with F the normalised cumulative, its
    density is 2 F f, and weighting by the photon intensity still to come
    (from `psi_sq`, a callable or (t, y) sample pair) gives the start-time
    distribution of contaminated emissions.  The approximating Gaussian is
    matched to its first two moments (variance of the arrival form is
    delta_tau^2/2); the residual field records how Gaussian it actually is.
    """
    t = np.linspace(0.0, L_ph, n_grid)
    if callable(psi_sq):
        intensity = np.asarray([float(psi_sq(tk)) for tk in t])
    else:
        ts, ys = psi_sq
        intensity = np.interp(t, np.asarray(ts, float), np.asarray(ys, float))
    if np.any(intensity < 0) or intensity.max() <= 0:
        raise ValueError("psi_sq must be nonnegative and not identically zero")

    F = _sin4_cumulative(t, L_ph)
    f = np.sin(np.pi * t / L_ph) ** 4 / (3 * L_ph / 8)
    p_last_decay = 2.0 * F * f

    # probability the photon is still to be emitted after t
    dt = t[1] - t[0]
    cum = np.concatenate(([0.0], np.cumsum((intensity[1:] + intensity[:-1]) * dt / 2)))
    remaining = cum[-1] - cum
    p_emm = p_last_decay * remaining
    norm = np.trapezoid(p_emm, t)
    if norm <= 0:
        raise ValueError("degenerate emission profile")
    p_emm = p_emm / norm

    t_sp = float(np.trapezoid(t * p_emm, t))
    var = float(np.trapezoid((t - t_sp) ** 2 * p_emm, t))
    delta_tau = math.sqrt(2.0 * var)
    rms = float(np.sqrt(np.mean((arrival_gaussian(t, t_sp, delta_tau) - p_emm) ** 2)))
    return SpontaneousTiming(t=t, p_emm=p_emm, t_sp=t_sp,
                             delta_tau=delta_tau, residual=rms)


def contamination_probability(eta: tuple[float, float], F_P: tuple[float, float],
                              decay_branching: tuple[float, float]) -> float:
    """Probability that a cavity emission follows a spontaneous decay.

    `eta`, `F_P` and `decay_branching` hold the (sigma+, sigma-) production
    efficiencies, effective Purcell factors, and branching probabilities of
    the intermediate excited state into the initial sublevel of the
    corresponding process (|1,+1> for sigma+, |1,-1> for sigma-).
    """
    eta_p, eta_m = eta
    total = eta_p + eta_m
    if total <= 0:
        raise ValueError("both efficiencies vanish")
    out = 0.0
    for eta_s, fp, branch in ((eta_p, F_P[0], decay_branching[0]),
                              (eta_m, F_P[1], decay_branching[1])):
        out += (eta_s / total) * branch * (1.0 - fp / (fp + 1.0))
    return out


def model_emission_profile(model: WavepacketModel, t, n_jitter: int = 201):
    """Expected measured intensity: clean plus jitter-averaged contaminated part."""
    t = np.asarray(t, dtype=float)
    clean = gaussian_wavepacket(t, model.delta_t, model.t0) ** 2
    if model.P_cont == 0.0:
        return clean
    if model.jitter <= 1e-6 * model.delta_t_prime:
        cont = gaussian_wavepacket(t, model.delta_t_prime, model.t0_prime) ** 2
    else:
        # average the shifted intensity over the Gaussian start-time spread
        spread = model.jitter / math.sqrt(2.0)      # std of the arrival Gaussian
        shifts = np.linspace(-6 * spread * math.sqrt(2), 6 * spread * math.sqrt(2), n_jitter)
        weights = arrival_gaussian(shifts, 0.0, model.jitter)
        profs = gaussian_wavepacket(t[None, :] - shifts[:, None],
                                    model.delta_t_prime, model.t0_prime) ** 2
        cont = np.trapezoid(weights[:, None] * profs, shifts, axis=0)
    return (1.0 - model.P_cont) * clean + model.P_cont * cont


def fit_emission_model(t, samples, L_ph: float, *, enforce_length_relation: bool = True,
                       P_cont_fixed: float | None = None) -> tuple[WavepacketModel, float]:
    """Damped least-squares fit of the two-component emission model.

    With `enforce_length_relation` the contaminated width and centre are tied
    to a fitted decay time t_sp through the shortened-wavepacket relations,
    leaving (delta_t, t0, t_sp, jitter, P_cont) free; otherwise all six
    profile parameters float.  Returns the model and the RMS residual.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(samples, dtype=float)
    if len(t) < 20:
        raise ValueError("need at least 20 samples")
    if t.min() > 0.05 * L_ph or t.max() < 0.95 * L_ph:
        raise ValueError("samples must span the pulse window")

    fit_pc = P_cont_fixed is None
    pc0 = 0.15 if fit_pc else P_cont_fixed

    if enforce_length_relation:
        # params: delta_t, t0, t_sp, jitter, (P_cont)
        x0 = [0.3 * L_ph, 0.4 * L_ph, 0.5 * L_ph, 0.15 * L_ph]
        lo = [1e-3 * L_ph, -L_ph, 1e-3 * L_ph, 0.0]
        hi = [3 * L_ph, 2 * L_ph, 0.999 * L_ph, L_ph]

        def unpack(x):
            pc = x[4] if fit_pc else pc0
            return WavepacketModel.from_spontaneous_time(
                delta_t=x[0], t0=x[1], L_ph=L_ph, t_sp=x[2], jitter=x[3], P_cont=pc)
    else:
        # params: delta_t, t0, delta_t', t0', jitter, (P_cont)
        x0 = [0.3 * L_ph, 0.4 * L_ph, 0.15 * L_ph, 0.75 * L_ph, 0.15 * L_ph]
        lo = [1e-3 * L_ph, -L_ph, 1e-3 * L_ph, -L_ph, 0.0]
        hi = [3 * L_ph, 2 * L_ph, 3 * L_ph, 2 * L_ph, L_ph]

        def unpack(x):
            pc = x[5] if fit_pc else pc0
            return WavepacketModel(delta_t=x[0], t0=x[1], delta_t_prime=x[2],
                                   t0_prime=x[3], jitter=x[4], P_cont=pc, L_ph=L_ph)
    if fit_pc:
        x0 = x0 + [pc0]
        lo = lo + [0.0]
        hi = hi + [1.0]

    def residuals(x):
        try:
            m = unpack(x)
        except ValueError:
            return np.full_like(y, 1e6)
        return model_emission_profile(m, t) - y

    sol = least_squares(residuals, x0, bounds=(lo, hi))
    if not sol.success:
        raise RuntimeError(f"emission-model fit did not converge: {sol.message}")
    model = unpack(sol.x)
    return model, float(np.sqrt(np.mean(sol.fun**2)))


# ---------------------------------------------------------------------------
# Two-photon correlations

def _correlation_grids(params_a, params_b, offset, jitter, dt):
    widths = [params_a[0], params_b[0]]
    centers = [params_a[1], params_b[1]]
    pad = 4 * max(widths) + 5 * jitter + abs(offset) + 20 * dt
    lo = min(centers) - pad
    hi = max(centers) + pad
    n = int(math.ceil((hi - lo) / dt)) + 1
    return lo + dt * np.arange(n)


def hom_correlations(a: tuple[float, float], b: tuple[float, float],
                     delta_tau_off: float = 0.0, jitter: float = 0.0,
                     beat: float = 0.0, *, dt: float = 1e-9,
                     n_jitter: int = 41) -> CorrelationCurve:
    """Beam-splitter coincidence densities for one photon pair.

    `a` and `b` are (width, centre) wavepacket parameters of the first and
    second photon.  On top of the centre difference an extra fixed offset
    `delta_tau_off` and a Gaussian jitter of width parameter `jitter` are
    applied symmetrically; a nonzero `beat` multiplies the interference term
    by cos(beat * tau).

    P_perp is the symmetrised intensity correlation of distinguishable
    photons (integrating to 1/2); P_para subtracts the two-photon
    interference and vanishes identically for identical inputs.
    """
    if jitter < 0:
        raise ValueError("jitter must be >= 0")
    t = _correlation_grids(a, b, delta_tau_off, jitter, dt)

    if jitter <= 1e-6 * min(a[0], b[0]):
        nodes = np.array([0.0])
        weights = np.array([1.0])
    else:
        # node spacing must resolve both the jitter Gaussian and the packet
        # widths (the interference weight decays on the narrower scale)
        spacing = min(a[0], b[0], jitter) / 6.0
        half = 6.0 * jitter
        n = max(n_jitter, 2 * int(math.ceil(half / spacing)) + 1)
        nodes = np.linspace(-half, half, n)
        weights = arrival_gaussian(nodes, 0.0, jitter)
        weights = weights / weights.sum()

    n = len(t)
    acc_perp = np.zeros(2 * n - 1)
    acc_intf = np.zeros(2 * n - 1)
    for node, w in zip(nodes, weights):
        shift = (delta_tau_off + node) / 2.0
        eps_a = gaussian_wavepacket(t, a[0], a[1] + shift)
        eps_b = gaussian_wavepacket(t, b[0], b[1] - shift)
        ia = eps_a**2
        ib = eps_b**2
        # corr[k] = integral f(t) g(t + tau_k) dt on tau_k = (k - n + 1) dt
        c_ab = fftconvolve(ib, ia[::-1]) * dt
        c_ba = fftconvolve(ia, ib[::-1]) * dt
        u = eps_a * eps_b
        auto_u = fftconvolve(u, u[::-1]) * dt
        acc_perp += w * 0.25 * (c_ab + c_ba)
        acc_intf += w * 0.5 * auto_u

    tau = (np.arange(2 * n - 1) - (n - 1)) * dt
    if beat != 0.0:
        acc_intf = acc_intf * np.cos(beat * tau)
    return CorrelationCurve(tau=tau, P_perp=acc_perp, P_para=acc_perp - acc_intf)


def _pair_scenarios(model: WavepacketModel):
    clean = (model.delta_t, model.t0)
    cont = (model.delta_t_prime, model.t0_prime)
    return (
        (clean, clean, 0.0),
        (clean, cont, model.jitter),
        (cont, clean, model.jitter),
        (cont, cont, math.sqrt(2.0) * model.jitter),
    )


def pair_weights(P_cont: float) -> tuple[float, float, float, float]:
    """Weights of (clean-clean, clean-cont, cont-clean, cont-cont) pairs."""
    p = P_cont
    return ((1 - p) ** 2, (1 - p) * p, p * (1 - p), p * p)


def weighted_pair_interference(model: WavepacketModel,
                               weights: tuple[float, float, float, float] | None = None,
                               *, dt: float = 1e-9) -> CorrelationCurve:
    """Coincidence curves of the clean/contaminated pair mixture.

    Weights default to the independent-contamination combination of the
    model's P_cont and must sum to one.  A nonzero beat_fraction mixes in
    the same pair combination with the interference term oscillating at
    beat_freq.
    """
    if weights is None:
        weights = pair_weights(model.P_cont)
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("pair weights must sum to 1")

    curves = [hom_correlations(a, b, 0.0, jit, 0.0, dt=dt)
              for (a, b, jit) in _pair_scenarios(model)]
    if model.beat_fraction > 0.0:
        beat_curves = [hom_correlations(a, b, 0.0, jit, model.beat_freq, dt=dt)
                       for (a, b, jit) in _pair_scenarios(model)]

    # combine on a common grid (the widest one)
    ref = max(curves, key=lambda c: len(c.tau))
    tau = ref.tau
    perp = np.zeros_like(tau)
    para = np.zeros_like(tau)
    for k, curve in enumerate(curves):
        w = weights[k]
        perp_k = np.interp(tau, curve.tau, curve.P_perp, left=0.0, right=0.0)
        para_k = np.interp(tau, curve.tau, curve.P_para, left=0.0, right=0.0)
        if model.beat_fraction > 0.0:
            bc = beat_curves[k]
            para_b = np.interp(tau, bc.tau, bc.P_para, left=0.0, right=0.0)
            para_k = (1 - model.beat_fraction) * para_k + model.beat_fraction * para_b
        perp += w * perp_k
        para += w * para_k
    return CorrelationCurve(tau=tau, P_perp=perp, P_para=para)


def visibility(curve: CorrelationCurve, window: float | None = None) -> float:
    """V = 1 - (integral of P_para)/(integral of P_perp) over |tau| <= window."""
    if window is None:
        mask = slice(None)
    else:
        mask = np.abs(curve.tau) <= window
    denom = np.trapezoid(curve.P_perp[mask], curve.tau[mask])
    if denom <= 0:
        raise ValueError("no coincidence weight in the requested window")
    num = np.trapezoid(curve.P_para[mask], curve.tau[mask])
    return 1.0 - num / denom
