"""Hot inner loops: network Euler-Maruyama chunks and the finite-volume
Fokker-Planck update.

Each kernel has two interchangeable implementations with identical
signatures and in-place semantics: a vectorized numpy one and a scalar
loop compiled with numba when available. Selection happens per call via
``active(name)``; set ``BALANCENET_NO_NUMBA=1`` to force the numpy path
(see benchmarks/kernel_bench.py for a timing comparison).

The two paths agree to floating-point reduction-order differences
(~1e-13 relative); within one path results are bit-reproducible.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    _HAVE_NUMBA = False


def numba_available() -> bool:
    return _HAVE_NUMBA


def numba_enabled() -> bool:
    if not _HAVE_NUMBA:
        return False
    return os.environ.get("BALANCENET_NO_NUMBA", "0").lower() not in ("1", "true", "yes")


# ---------------------------------------------------------------------------
# electrically coupled network, state (x, y) per agent, one population
# ---------------------------------------------------------------------------


def electrical_chunk_numpy(states, noise, dt, gamma_g, f3, f2, f1, f0, a, b, sig):
    """Advance ``noise.shape[0]`` Euler-Maruyama steps in place.

    states: (N, 2), noise: (steps, N) standard normals for the voltage.
    Returns True when all entries stayed finite.
    """
    x = states[:, 0]
    y = states[:, 1]
    sq = math.sqrt(dt)
    for s in range(noise.shape[0]):
        xm = x.mean()
        fx = ((f3 * x + f2) * x + f1) * x + f0
        dx = (fx - y + gamma_g * (xm - x)) * dt + (sig * sq) * noise[s]
        dy = (a * dt) * (b * x - y)
        x += dx
        y += dy
    return bool(np.isfinite(states).all())


def _electrical_chunk_loop(states, noise, dt, gamma_g, f3, f2, f1, f0, a, b, sig):
    n = states.shape[0]
    sq = math.sqrt(dt)
    for s in range(noise.shape[0]):
        xm = 0.0
        for i in range(n):
            xm += states[i, 0]
        xm /= n
        for i in range(n):
            x = states[i, 0]
            y = states[i, 1]
            fx = ((f3 * x + f2) * x + f1) * x + f0
            states[i, 0] = x + (fx - y + gamma_g * (xm - x)) * dt + sig * sq * noise[s, i]
            states[i, 1] = y + a * (b * x - y) * dt
    return bool(np.all(np.isfinite(states)))


# ---------------------------------------------------------------------------
# chemically coupled network, state (x, y, s) per agent, P populations
# ---------------------------------------------------------------------------


def chemical_chunk_numpy(states, noise, dt, coef, erev, offsets, f3, f2, f1, f0,
                         a, b, c, inv_tau, al_gain, al_theta, al_inv_slope, sig):
    """Advance the conductance-coupled network in place.

    coef[p, q] is the already gamma-scaled signed coupling from source
    population q onto targets in p; the interaction on agent i in p is
    sum_q coef[p, q] * (x_i - erev[q]) * mean_s_q.
    """
    npop = offsets.shape[0] - 1
    x = states[:, 0]
    y = states[:, 1]
    sv = states[:, 2]
    sq = math.sqrt(dt)
    inter = np.empty_like(x)
    for s in range(noise.shape[0]):
        sbar = np.empty(npop)
        for q in range(npop):
            sbar[q] = sv[offsets[q]:offsets[q + 1]].mean()
        for p in range(npop):
            seg = slice(offsets[p], offsets[p + 1])
            acc = np.zeros(offsets[p + 1] - offsets[p])
            for q in range(npop):
                acc += (coef[p, q] * sbar[q]) * (x[seg] - erev[q])
            inter[seg] = acc
        fx = ((f3 * x + f2) * x + f1) * x + f0
        al = al_gain / (1.0 + np.exp(-(x - al_theta) * al_inv_slope))
        nx = x + (fx - y + inter) * dt + (sig * sq) * noise[s]
        ny = y + (a * dt) * (b * x - y + c)
        ns = sv + (-sv * inv_tau + al * (1.0 - sv)) * dt
        x[:] = nx
        y[:] = ny
        sv[:] = ns
    return bool(np.isfinite(states).all())


def _chemical_chunk_loop(states, noise, dt, coef, erev, offsets, f3, f2, f1, f0,
                         a, b, c, inv_tau, al_gain, al_theta, al_inv_slope, sig):
    npop = offsets.shape[0] - 1
    sq = math.sqrt(dt)
    sbar = np.empty(npop)
    for s in range(noise.shape[0]):
        for q in range(npop):
            acc = 0.0
            for i in range(offsets[q], offsets[q + 1]):
                acc += states[i, 2]
            sbar[q] = acc / (offsets[q + 1] - offsets[q])
        for p in range(npop):
            for i in range(offsets[p], offsets[p + 1]):
                x = states[i, 0]
                y = states[i, 1]
                sv = states[i, 2]
                inter = 0.0
                for q in range(npop):
                    inter += (coef[p, q] * sbar[q]) * (x - erev[q])
                fx = ((f3 * x + f2) * x + f1) * x + f0
                al = al_gain / (1.0 + math.exp(-(x - al_theta) * al_inv_slope))
                states[i, 0] = x + (fx - y + inter) * dt + sig * sq * noise[s, i]
                states[i, 1] = y + a * (b * x - y + c) * dt
                states[i, 2] = sv + (-sv * inv_tau + al * (1.0 - sv)) * dt
    return bool(np.all(np.isfinite(states)))


# ---------------------------------------------------------------------------
# 1D conservative finite-volume drift-diffusion update
# ---------------------------------------------------------------------------


def fp_chunk_numpy(mu, flux, f_face, alpha_face, beta_w, inv_eps, half_sig2,
                   dx, dt, nsteps, i_out):
    """Advance the density ``nsteps`` explicit steps in place.

    Velocity on interior faces is f(x) - I(t)/eps * alpha(x) with I(t)
    recomputed from the start-of-step density (beta_w = beta(centers)*dx);
    first-order upwind advection, centered diffusion, no-flux boundaries.
    i_out receives the start-of-step interaction values.
    """
    m = mu.shape[0]
    inv_dx = 1.0 / dx
    for s in range(nsteps):
        big_i = float(beta_w @ mu)
        i_out[s] = big_i
        v = f_face[1:m] - (inv_eps * big_i) * alpha_face[1:m]
        up = np.where(v > 0.0, mu[:-1], mu[1:])
        flux[1:m] = v * up - half_sig2 * (mu[1:] - mu[:-1]) * inv_dx
        flux[0] = 0.0
        flux[m] = 0.0
        mu += (dt * inv_dx) * (flux[:m] - flux[1:])


def _fp_chunk_loop(mu, flux, f_face, alpha_face, beta_w, inv_eps, half_sig2,
                   dx, dt, nsteps, i_out):
    m = mu.shape[0]
    inv_dx = 1.0 / dx
    for s in range(nsteps):
        big_i = 0.0
        for j in range(m):
            big_i += beta_w[j] * mu[j]
        i_out[s] = big_i
        ie = inv_eps * big_i
        flux[0] = 0.0
        flux[m] = 0.0
        for f in range(1, m):
            v = f_face[f] - ie * alpha_face[f]
            if v > 0.0:
                adv = v * mu[f - 1]
            else:
                adv = v * mu[f]
            flux[f] = adv - half_sig2 * (mu[f] - mu[f - 1]) * inv_dx
        for j in range(m):
            mu[j] += dt * inv_dx * (flux[j] - flux[j + 1])


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

IMPLEMENTATIONS: dict[str, dict[str, object]] = {}


def _register(name, numpy_impl, loop_impl):
    entry = {"numpy": numpy_impl, "numba": None}
    if _HAVE_NUMBA:
        entry["numba"] = njit(cache=True, nogil=True)(loop_impl)
    IMPLEMENTATIONS[name] = entry


_register("electrical_chunk", electrical_chunk_numpy, _electrical_chunk_loop)
_register("chemical_chunk", chemical_chunk_numpy, _chemical_chunk_loop)
_register("fp_chunk", fp_chunk_numpy, _fp_chunk_loop)


def active(name: str):
    """Return the currently selected implementation of a kernel."""
    entry = IMPLEMENTATIONS[name]
    if numba_enabled() and entry["numba"] is not None:
        return entry["numba"]
    return entry["numpy"]
