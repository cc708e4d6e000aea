"""Compiled fast paths for the Poisson models.

The generic simulator enumerates transitions in Python, which is fine
for fuzzing and small studies but too slow for the 1e7..1e9-event
scaling experiments.  These kernels replicate the exact dynamics of
PoissonK1Model and PoissonKModel with unit-size jumps; they use numba's
own RNG stream (seeded per call), so they are reproducible run-to-run
but sample a different stream than the generic simulator.  Statistical
equivalence with the generic path is covered by tests.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from .models import PoissonK1Model, PoissonKModel

__all__ = [
    "supports_fast_path",
    "fast_embedded",
    "fast_horizons_batch",
    "pk1_occupation",
    "pk1_postmove_states",
]


# ---------------------------------------------------------------------------
# PoissonK1: two queues, theta_reinit = 1
# ---------------------------------------------------------------------------


@njit(cache=True)
def _pk1_step(lam, mu, theta, p, qb, qa):
    """One event; returns (tau, c, qb, qa). c in ticks."""
    g1 = mu if qa > 0 else 0.0
    fm1 = mu if qb < 0 else 0.0
    u = theta if qa == 0 else 0.0
    d = theta if qb == 0 else 0.0
    total = lam + g1 + fm1 + lam + u + d
    tau = np.random.exponential(1.0 / total)
    x = np.random.uniform(0.0, total)
    c = 0
    if x < lam:
        qa += 1
    elif x < lam + g1:
        qa -= 1
    elif x < lam + g1 + fm1:
        qb += 1
    elif x < lam + g1 + fm1 + lam:
        qb -= 1
    else:
        c = 1 if x < lam + g1 + fm1 + lam + u else -1
        np.random.uniform(0.0, 1.0)  # reinit decision draw (theta_reinit = 1)
        qa = np.random.geometric(p) - 1
        qb = -(np.random.geometric(p) - 1)
    return tau, c, qb, qa


@njit(cache=True)
def _pk1_embedded(lam, mu, theta, p, qb, qa, n_events, seed):
    np.random.seed(seed)
    c = np.empty(n_events, dtype=np.int8)
    tau = np.empty(n_events, dtype=np.float64)
    for n in range(n_events):
        tau[n], cn, qb, qa = _pk1_step(lam, mu, theta, p, qb, qa)
        c[n] = cn
    return c, tau, qb, qa


@njit(cache=True)
def _pk1_occupation(lam, mu, theta, p, qb, qa, n_events, burn_in, cap, seed):
    """Time-weighted occupation over (|q_-1|, q_1) clamped at cap."""
    np.random.seed(seed)
    occ = np.zeros((cap + 1, cap + 1), dtype=np.float64)
    outside = 0.0
    for n in range(n_events):
        b, a = -qb, qa
        tau, _, qb, qa = _pk1_step(lam, mu, theta, p, qb, qa)
        if n >= burn_in:
            if b <= cap and a <= cap:
                occ[b, a] += tau
            else:
                outside += tau
    return occ, outside, qb, qa


@njit(cache=True, parallel=True)
def _pk1_horizons_batch(lam, mu, theta, p, qb0, qa0, horizons, seeds):
    """Z (ticks) and event counts at calendar horizons, one path per seed."""
    n_paths = seeds.shape[0]
    nh = horizons.shape[0]
    Z = np.zeros((n_paths, nh), dtype=np.int64)
    N = np.zeros((n_paths, nh), dtype=np.int64)
    for k in prange(n_paths):
        np.random.seed(seeds[k])
        qb, qa = qb0, qa0
        t = 0.0
        z = 0
        n = 0
        h = 0
        while h < nh:
            tau, c, qb, qa = _pk1_step(lam, mu, theta, p, qb, qa)
            t += tau
            while h < nh and t > horizons[h]:
                Z[k, h] = z
                N[k, h] = n
                h += 1
            z += c
            n += 1
        # note: Z records the value strictly before the event straddling
        # the horizon, i.e. Z(N(t)) with N(t) = number of events by t
    return Z, N


@njit(cache=True)
def _pk1_postmove(lam, mu, theta, p, qb, qa, n_moves, max_events, seed):
    """Post-price-move states: rows (q_-1, q_1, direction)."""
    np.random.seed(seed)
    out = np.empty((n_moves, 3), dtype=np.int64)
    got = 0
    for _ in range(max_events):
        if got >= n_moves:
            break
        _, c, qb, qa = _pk1_step(lam, mu, theta, p, qb, qa)
        if c != 0:
            out[got, 0] = qb
            out[got, 1] = qa
            out[got, 2] = c
            got += 1
    return out, got


# ---------------------------------------------------------------------------
# PoissonK: index-dependent Poisson flows, unit sizes
# ---------------------------------------------------------------------------


@njit(cache=True)
def _pk_embedded(
    K,
    lamf,
    lamg,
    gamf,
    gamg,
    muf,
    mug,
    theta_up,
    theta_dn,
    theta_reinit,
    pb,
    pre,
    q0,
    n_events,
    seed,
):
    np.random.seed(seed)
    m = 2 * K
    q = q0.copy()
    c = np.empty(n_events, dtype=np.int8)
    tau = np.empty(n_events, dtype=np.float64)
    rates = np.empty(2 * m + 2, dtype=np.float64)
    for n in range(n_events):
        # best bid/ask positions: jbb in [-1, m-1], jba in [0, m]
        jbb = -1
        for j in range(m - 1, -1, -1):
            if q[j] < 0:
                jbb = j
                break
        jba = m
        for j in range(m):
            if q[j] > 0:
                jba = j
                break
        total = 0.0
        for j in range(m):
            fr = 0.0
            if j > jbb:
                fr += lamf[j]
            if j == jbb:
                fr += gamf[j]
            if j <= jbb and q[j] < 0:
                fr += muf[j]
            gr = 0.0
            if j < jba:
                gr += lamg[j]
            if j == jba:
                gr += gamg[j]
            if j >= jba and q[j] > 0:
                gr += mug[j]
            rates[2 * j] = fr
            rates[2 * j + 1] = gr
            total += fr + gr
        uu = theta_up[jba]
        dd = theta_dn[jbb + 1]
        rates[2 * m] = uu
        rates[2 * m + 1] = dd
        total += uu + dd
        tau[n] = np.random.exponential(1.0 / total)
        x = np.random.uniform(0.0, total)
        acc = 0.0
        idx = 2 * m + 1
        for r in range(2 * m + 2):
            acc += rates[r]
            if x < acc:
                idx = r
                break
        cn = 0
        if idx < 2 * m:
            j = idx // 2
            q[j] += 1 if idx % 2 == 0 else -1
        else:
            up = idx == 2 * m
            cn = 1 if up else -1
            if np.random.uniform(0.0, 1.0) < theta_reinit:
                for j in range(K):
                    q[j] = -(np.random.geometric(pre) - 1)
                for j in range(K, m):
                    q[j] = np.random.geometric(pre) - 1
            elif up:
                for j in range(m - 1):
                    q[j] = q[j + 1]
                q[m - 1] = np.random.geometric(pb) - 1
            else:
                for j in range(m - 1, 0, -1):
                    q[j] = q[j - 1]
                q[0] = -(np.random.geometric(pb) - 1)
        c[n] = cn
    return c, tau, q


def _pk_arrays(model: PoissonKModel):
    """Position-indexed rate tables for the compiled PoissonK kernel."""
    K = model.K
    m = 2 * K
    from .book import index_of

    lamf = np.empty(m)
    lamg = np.empty(m)
    gamf = np.empty(m)
    gamg = np.empty(m)
    muf = np.empty(m)
    mug = np.empty(m)
    for j in range(m):
        i = index_of(j, K)
        lamf[j] = model.lam[i]
        lamg[j] = model.lam[-i]
        gamf[j] = model.gam[i]
        gamg[j] = model.gam[-i]
        muf[j] = model.mu[i]
        mug[j] = model.mu[-i]
    theta_up = np.empty(m + 1)
    for j in range(m):
        theta_up[j] = model.theta[index_of(j, K)]
    theta_up[m] = model.theta[K + 1]  # saturated best ask
    theta_dn = np.empty(m + 1)
    theta_dn[0] = model.theta[K + 1]  # saturated best bid
    for j in range(m):
        theta_dn[j + 1] = model.theta[-index_of(j, K)]
    return lamf, lamg, gamf, gamg, muf, mug, theta_up, theta_dn


def supports_fast_path(model):
    return isinstance(model, (PoissonK1Model, PoissonKModel)) and getattr(model, "_ud", None) is None


def _as_numba_seed(seed):
    return int(np.uint32(seed & 0xFFFFFFFF))


def fast_embedded(model, q0, n_events, seed):
    """(c, tau, final q) via the compiled kernel; model must support it."""
    if isinstance(model, PoissonK1Model):
        c, tau, qb, qa = _pk1_embedded(
            model.lam,
            model.mu,
            model.theta,
            model.pi_inc.p,
            int(q0[0]),
            int(q0[1]),
            int(n_events),
            _as_numba_seed(seed),
        )
        return c, tau, np.array([qb, qa], dtype=np.int64)
    if isinstance(model, PoissonKModel):
        tables = _pk_arrays(model)
        c, tau, q = _pk_embedded(
            model.K,
            *tables,
            model.theta_reinit,
            model.pi_K.p,
            model.pi_inc.p,
            np.asarray(q0, dtype=np.int64),
            int(n_events),
            _as_numba_seed(seed),
        )
        return c, tau, q
    raise TypeError(f"no fast path for model {model.name!r}")


def fast_horizons_batch(model, q0, horizons, seeds):
    """Z(N(t)) in ticks and N(t) at each horizon, one row per path."""
    if not isinstance(model, PoissonK1Model):
        raise TypeError("horizon batch kernel only available for poisson_k1")
    horizons = np.asarray(horizons, dtype=np.float64)
    seeds = np.asarray([_as_numba_seed(s) for s in seeds], dtype=np.int64)
    return _pk1_horizons_batch(
        model.lam,
        model.mu,
        model.theta,
        model.pi_inc.p,
        int(q0[0]),
        int(q0[1]),
        horizons,
        seeds,
    )


def pk1_occupation(model, q0, n_events, burn_in, cap, seed):
    if not isinstance(model, PoissonK1Model):
        raise TypeError("occupation kernel only available for poisson_k1")
    return _pk1_occupation(
        model.lam,
        model.mu,
        model.theta,
        model.pi_inc.p,
        int(q0[0]),
        int(q0[1]),
        int(n_events),
        int(burn_in),
        int(cap),
        _as_numba_seed(seed),
    )


def pk1_postmove_states(model, q0, n_moves, max_events, seed):
    if not isinstance(model, PoissonK1Model):
        raise TypeError("post-move kernel only available for poisson_k1")
    return _pk1_postmove(
        model.lam,
        model.mu,
        model.theta,
        model.pi_inc.p,
        int(q0[0]),
        int(q0[1]),
        int(n_moves),
        int(max_events),
        _as_numba_seed(seed),
    )
