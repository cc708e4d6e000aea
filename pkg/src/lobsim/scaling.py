"""Diffusive scaling statistics of the reference price.

The event-time variance is the autocovariance series of the per-event
price increments, truncated at an adaptive lag window (geometric mixing
justifies the cutoff); the calendar-time variance divides by the mean
waiting time.  Variance ratios across horizons and normality statistics
of rescaled terminal values probe the Brownian limit at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import WindowTooLargeError
from .kernels import fast_embedded, fast_horizons_batch, supports_fast_path
from .models import PoissonK1Model
from .simulate import batch_simulate, simulate

__all__ = [
    "autocovariance",
    "sigma2_series",
    "batch_means_variance",
    "mean_with_stderr",
    "ScalingReport",
    "scaling_report",
    "run_embedded",
]


def autocovariance(x, max_lag):
    """Empirical autocovariances gamma(0..max_lag), 1/N normalization."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    x = x - x.mean()
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1].real / n
    return acov


def sigma2_series(c, lag_window=None):
    """Event-time long-run variance: gamma(0) + 2 sum_k w_k gamma(k).

    The lag weights w_k = 1 - k/(M+1) taper the truncated series
    (guaranteeing a nonnegative estimate).  With lag_window None the
    cutoff is adaptive: the smallest lag at which |gamma| stays below
    twice its standard error for five consecutive lags, capped at
    length/10.  Returns (sigma2, autocovariances 0..M, diagnostics).
    """
    c = np.asarray(c, dtype=np.float64)
    n = len(c)
    if n < 100:
        raise WindowTooLargeError("need at least 100 samples")
    cap = n // 10
    if lag_window is not None:
        M = int(lag_window)
        if M > cap:
            raise WindowTooLargeError(f"lag window {M} exceeds length/10 = {cap}")
        acov = autocovariance(c, M)
    else:
        probe = min(cap, max(200, 50))
        acov = autocovariance(c, probe)
        stderr = acov[0] / math.sqrt(n)
        M = None
        run = 0
        for k in range(1, probe + 1):
            if abs(acov[k]) < 2.0 * stderr:
                run += 1
                if run >= 5:
                    M = k - 4
                    break
            else:
                run = 0
        if M is None:
            M = probe
        acov = acov[: M + 1]
    Mw = len(acov) - 1
    weights = 1.0 - np.arange(1, Mw + 1) / (Mw + 1.0)
    sigma2 = float(acov[0] + 2.0 * (weights * acov[1:]).sum())
    # geometric-decay diagnostic justifying the truncation
    mags = np.abs(acov[1:])
    nz = mags > 0
    if nz.sum() >= 2:
        ks = np.arange(1, len(acov))[nz]
        slope = float(np.polyfit(ks, np.log(mags[nz]), 1)[0])
    else:
        slope = -np.inf
    diagnostics = {
        "lag_window": int(len(acov) - 1),
        "stderr_gamma": float(acov[0] / math.sqrt(n)),
        "log_decay_slope": slope,
        "n": int(n),
    }
    return sigma2, acov, diagnostics


def batch_means_variance(x, n_blocks=1000):
    """Long-run variance of a series via nonoverlapping batch means.

    For increments c this is Var(Z(b))/b with b the block length, the
    direct counterpart of the autocovariance series estimate.
    """
    x = np.asarray(x, dtype=np.float64)
    b = len(x) // n_blocks
    if b < 1:
        raise WindowTooLargeError("too few samples for the requested block count")
    sums = x[: b * n_blocks].reshape(n_blocks, b).sum(axis=1)
    return float(sums.var(ddof=1) / b), b


def mean_with_stderr(x, n_blocks=100):
    """Ergodic-average mean with a batch-means standard error."""
    x = np.asarray(x, dtype=np.float64)
    m = float(x.mean())
    n_blocks = min(n_blocks, max(2, len(x) // 10))
    b = len(x) // n_blocks
    means = x[: b * n_blocks].reshape(n_blocks, b).mean(axis=1)
    se = float(means.std(ddof=1) / math.sqrt(n_blocks))
    return m, se


def run_embedded(model, q0, n_events, seed):
    """(c, tau, final q): compiled kernel when available, generic otherwise."""
    if supports_fast_path(model):
        return fast_embedded(model, q0, n_events, seed)
    from .book import LobState

    s = simulate(
        model,
        LobState(q=np.asarray(q0), p_ref_half=1),
        max_events=n_events,
        seed=seed,
        record_occupation=False,
    )
    return s.c, s.tau, s.final.q


@dataclass
class ScalingReport:
    mean_c: float
    mean_c_stderr: float
    sigma2_event: float
    sigma2_direct: float
    e_tau: float
    e_tau_stderr: float
    sigma2_calendar: float
    variance_ratios: dict  # (n, t) -> ratio
    skewness: float
    excess_kurtosis: float
    ks_distance: float
    n_events: int
    n_paths: int
    lag_window: int
    nonzero_drift: bool
    rescaled_terminal: np.ndarray = field(repr=False, default=None)
    autocov: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        return {
            "mean_c": self.mean_c,
            "mean_c_stderr": self.mean_c_stderr,
            "sigma2_event": self.sigma2_event,
            "sigma2_direct": self.sigma2_direct,
            "e_tau": self.e_tau,
            "e_tau_stderr": self.e_tau_stderr,
            "sigma2_calendar": self.sigma2_calendar,
            "variance_ratios": {f"{n},{t}": r for (n, t), r in self.variance_ratios.items()},
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
            "ks_distance": self.ks_distance,
            "n_events": self.n_events,
            "n_paths": self.n_paths,
            "lag_window": self.lag_window,
            "nonzero_drift": self.nonzero_drift,
        }


def _horizon_z_generic(model, q0, horizons, n_paths, base_seed):
    """Z(N(t)) at the horizons for each path, via the generic simulator."""
    from .book import LobState

    t_max = float(max(horizons))
    summaries = batch_simulate(
        model,
        LobState(q=np.asarray(q0), p_ref_half=1),
        n_paths,
        max_time=t_max * 1.0000001,
        base_seed=base_seed,
        record_occupation=False,
    )
    Z = np.zeros((n_paths, len(horizons)), dtype=np.int64)
    for k, s in enumerate(summaries):
        times = s.event_times()
        z = np.concatenate([[0], np.cumsum(s.c.astype(np.int64))])
        for h, t in enumerate(horizons):
            Z[k, h] = z[int(np.searchsorted(times, t, side="right"))]
    return Z


def scaling_report(
    model,
    q0,
    *,
    n_events=1_000_000,
    burn_in=None,
    n_paths=1000,
    n_grid=(1_000, 10_000, 100_000),
    t_grid=(0.5, 1.0, 2.0),
    seed=0,
    lag_window=None,
):
    """Full diffusive-limit diagnostic for one model.

    A long run estimates the event-time variance, the mean waiting time
    and their ratio (the calendar-time variance); a batch of paths then
    measures Var(Z(N(nt))) across events-equivalent horizons n*t and
    the normality of rescaled terminal values.
    """
    if burn_in is None:
        burn_in = max(100_000, n_events // 100)
    burn_in = min(burn_in, n_events // 2)
    c, tau, q_end = run_embedded(model, q0, n_events, seed)
    c = c[burn_in:].astype(np.float64)
    tau = tau[burn_in:]
    mean_c, mean_c_se = mean_with_stderr(c)
    nonzero_drift = abs(mean_c) > 3.0 * mean_c_se
    sigma2_event, acov, diag = sigma2_series(c, lag_window=lag_window)
    sigma2_direct, _ = batch_means_variance(c, n_blocks=min(1000, len(c) // 100))
    e_tau, e_tau_se = mean_with_stderr(tau)
    sigma2_calendar = sigma2_event / e_tau

    # horizons in calendar time: n is an events-equivalent scale
    pairs = [(n, t) for n in n_grid for t in t_grid]
    horizons = np.array(sorted({n * t * e_tau for n, t in pairs}))
    seeds = np.random.SeedSequence(seed + 1).generate_state(n_paths, dtype=np.uint32)
    if isinstance(model, PoissonK1Model) and supports_fast_path(model):
        Z, _ = fast_horizons_batch(model, q0, horizons, seeds)
    else:
        Z = _horizon_z_generic(model, q0, horizons, n_paths, base_seed=seed + 1)
    hidx = {h: k for k, h in enumerate(horizons)}
    ddof = 1 if n_paths > 1 else 0  # degenerate single-path batch
    ratios = {}
    for n, t in pairs:
        col = Z[:, hidx[n * t * e_tau]].astype(np.float64)
        ratios[(n, t)] = float(col.var(ddof=ddof) / (sigma2_event * n * t))
    zmax = Z[:, -1].astype(np.float64)
    resc = zmax / math.sqrt(sigma2_calendar * horizons[-1])
    skew = float(stats.skew(resc))
    kurt = float(stats.kurtosis(resc))
    spread = resc.std(ddof=ddof) if n_paths > 1 else 1.0
    ks = float(stats.kstest(resc, "norm", args=(resc.mean(), spread)).statistic)
    return ScalingReport(
        mean_c=mean_c,
        mean_c_stderr=mean_c_se,
        sigma2_event=sigma2_event,
        sigma2_direct=sigma2_direct,
        e_tau=e_tau,
        e_tau_stderr=e_tau_se,
        sigma2_calendar=sigma2_calendar,
        variance_ratios=ratios,
        skewness=skew,
        excess_kurtosis=kurt,
        ks_distance=ks,
        n_events=n_events,
        n_paths=n_paths,
        lag_window=diag["lag_window"],
        nonzero_drift=nonzero_drift,
        rescaled_terminal=resc,
        autocov=acov,
    )
