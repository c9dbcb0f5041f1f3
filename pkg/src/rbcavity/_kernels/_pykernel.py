"""Pure-NumPy propagation kernel.

Algorithm (shared verbatim with the compiled kernel): the master equation
    drho/dt = K(t) rho + rho K(t)^dag + sum_k C_k rho C_k^dag,
    K(t) = K0 + f(t) K1,
is advanced one reporting interval at a time with the envelope frozen at the
interval midpoint, and the frozen generator is exponentiated exactly by a
scaled Taylor expansion of its action.  The collapse refill term is applied
through a precomputed flat pair list: for COO entries (r_u, c_u, v_u) and
(r_w, c_w, v_w) of one collapse operator,
    (C rho C^dag)[r_u, r_w] += v_u conj(v_w) rho[c_u, c_w].
"""

import numpy as np

BACKEND = "numpy"

_THETA = 4.0        # max generator norm per Taylor sub-step
_MAX_TERMS = 40


def lindblad_apply(K, pr1, pr2, pc1, pc2, pw, rho):
    """One application of the Lindblad generator to rho."""
    out = K @ rho + rho @ K.conj().T
    if len(pw):
        np.add.at(out, (pr1, pr2), pw * rho[pc1, pc2])
    return out


def _segment_norm_bound(K, pair_weight_sum):
    # crude upper bound on the 1-norm of the generator, used only to pick
    # the Taylor sub-step count
    return 2.0 * np.abs(K).sum(axis=0).max() + pair_weight_sum


def _expm_apply(K, pr1, pr2, pc1, pc2, pw, rho, dt, tol, pair_weight_sum):
    nb = _segment_norm_bound(K, pair_weight_sum) * dt
    m = max(1, int(np.ceil(nb / _THETA)))
    hs = dt / m
    for _ in range(m):
        out = rho.copy()
        term = rho
        for j in range(1, _MAX_TERMS + 1):
            term = (hs / j) * lindblad_apply(K, pr1, pr2, pc1, pc2, pw, term)
            out += term
            if np.linalg.norm(term) <= tol * np.linalg.norm(out):
                break
        else:
            raise RuntimeError("Taylor expansion of the propagator did not converge")
        rho = out
    return rho


def propagate(K0, K1, fmid, pr1, pr2, pc1, pc2, pw, rho0, dt, tol=1e-12):
    """Propagate rho0 across len(fmid) uniform reporting intervals of width dt.

    Returns an array of shape (len(fmid)+1, n, n) holding rho at every grid
    point, starting with rho0.
    """
    n = rho0.shape[0]
    steps = len(fmid)
    states = np.empty((steps + 1, n, n), dtype=complex)
    states[0] = rho0
    rho = rho0.astype(complex, copy=True)
    pair_weight_sum = float(np.abs(pw).sum()) if len(pw) else 0.0
    prev_f = None
    K = None
    for k in range(steps):
        f = fmid[k]
        if K is None or f != prev_f:
            K = K0 if f == 0.0 else K0 + f * K1
            prev_f = f
        rho = _expm_apply(K, pr1, pr2, pc1, pc2, pw, rho, dt, tol, pair_weight_sum)
        states[k + 1] = rho
    return states
