"""Numeric certification of the ergodicity hypotheses.

Everything here evaluates drift inequalities and rate bounds on a
finite scan of states and reports them as verified-on-scan (never as a
proof): the Lyapunov function is V(q) = sum_i z^(|q_i| - U) and the
continuous-time check evaluates the generator applied to V exactly
through the enumerated transitions, with price jumps forced to zero.
The embedded-chain check adds the price-move terms, with the four
boundary/reinit expectations estimated by Monte Carlo.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .book import (
    DECREASE,
    INCREASE,
    PRICE_DOWN,
    PRICE_UP,
    best_ask_index,
    best_bid_index,
    in_state_space,
    index_of,
    pos_of,
)
from .errors import (
    DivergentBoundaryMomentError,
    EmptyScanError,
    RadiusExceededError,
)
from .models import generating_function

__all__ = [
    "DriftCertificate",
    "AssumptionReport",
    "lyapunov",
    "qv_ctmc",
    "scan_states",
    "drift_check_ctmc",
    "drift_check_embedded",
    "check_assumptions",
]

DEFAULT_Z_GRID = (1.05, 1.1, 1.2)


def lyapunov(q, z, U):
    """V(q) = sum_i z^(|q_i| - U)."""
    return float(sum(z ** (abs(int(x)) - U) for x in q))


@dataclass
class DriftCertificate:
    z: float
    U: float
    scanned_states: int
    gamma_hat: float
    B_hat: float
    worst_state: tuple
    violated: bool
    kind: str = "ctmc"  # or "embedded"
    core_v_threshold: float = 0.0
    moment_stderr: dict = field(default_factory=dict)
    assumption8_ok: bool = True
    assumption8_witness: tuple | None = None

    def holds(self):
        return (not self.violated) and self.gamma_hat > 0

    def to_dict(self):
        return {
            "kind": self.kind,
            "z": self.z,
            "U": self.U,
            "scanned_states": self.scanned_states,
            "gamma_hat": self.gamma_hat,
            "B_hat": self.B_hat,
            "worst_state": list(self.worst_state),
            "violated": self.violated,
            "core_v_threshold": self.core_v_threshold,
            "moment_stderr": self.moment_stderr,
            "assumption8_ok": self.assumption8_ok,
            "assumption8_witness": (
                list(self.assumption8_witness) if self.assumption8_witness else None
            ),
        }


def qv_ctmc(model, q, z, U):
    """Generator applied to V at q, price jumps dropped (u = d = 0)."""
    s = 0.0
    K = model.K
    for code, i, n, rate in model.transitions(q):
        if code in (PRICE_UP, PRICE_DOWN):
            continue
        qi = int(q[pos_of(i, K)])
        qi2 = qi + n if code == INCREASE else qi - n
        s += rate * (z ** (abs(qi2) - U) - z ** (abs(qi) - U))
    return s


# ---------------------------------------------------------------------------
# Scan sets
# ---------------------------------------------------------------------------


def scan_states(model, cap, max_states=20000, seed=0):
    """Deterministic scan of the box {|q_i| <= cap} within the model's space.

    Exhaustive when the box is small enough; otherwise structured
    extreme states (single large queues, full corners) plus a seeded
    random sample of sign-interleaved states.
    """
    K = model.K
    box = (2 * cap + 1) ** (2 * K)
    states = []
    if box <= 4 * max_states:
        for combo in itertools.product(range(-cap, cap + 1), repeat=2 * K):
            if in_state_space(combo, K) and model.in_support(np.asarray(combo)):
                states.append(combo)
        return states
    seen = set()

    def add(q):
        tq = tuple(int(x) for x in q)
        if tq not in seen and in_state_space(tq, K) and model.in_support(np.asarray(tq)):
            seen.add(tq)
            states.append(tq)

    # extremes: single large queues with the correct sign, and corners
    for j in range(2 * K):
        for v in (1, 2, cap // 2, cap):
            for sgn in (-1, 1):
                q = [0] * (2 * K)
                q[j] = sgn * v
                add(q)
    corner = [-cap] * K + [cap] * K
    add(corner)
    add([-cap] * K + [0] * K)
    add([0] * K + [cap] * K)
    add([0] * (2 * K))
    rng = np.random.default_rng(seed)
    indices = [i for i in range(-K - 1, K + 2) if i != 0]
    tries = 0
    while len(states) < max_states and tries < 50 * max_states:
        tries += 1
        ibb = int(rng.choice([i for i in indices if i <= K]))
        higher = [i for i in indices if i > ibb and i <= K + 1]
        if not higher:
            continue
        iba = int(rng.choice(higher))
        q = [0] * (2 * K)
        for j in range(2 * K):
            i = index_of(j, K)
            if i < ibb:
                q[j] = -int(rng.integers(0, cap + 1))
            elif i == ibb:
                q[j] = -int(rng.integers(1, cap + 1))
            elif i == iba and iba <= K:
                q[j] = int(rng.integers(1, cap + 1))
            elif i > iba:
                q[j] = int(rng.integers(0, cap + 1))
        add(q)
    return states


# ---------------------------------------------------------------------------
# Drift certificates
# ---------------------------------------------------------------------------


def _fit_certificate(states, V, DV, z, U, kind, core_quantile=0.9):
    V = np.asarray(V)
    DV = np.asarray(DV)
    thr = float(np.quantile(V, core_quantile))
    tail = V > thr
    core = ~tail
    if not core.any():
        core = np.ones_like(tail)
    violated = bool((DV[tail] >= 0).any()) if tail.any() else False
    B_cap = max(0.0, float(DV[core].max()))
    if tail.any():
        gamma = float(((B_cap - DV[tail]) / V[tail]).min())
    else:
        gamma = float(((B_cap - DV) / V).min())
    B_hat = float((DV + gamma * V).max())
    worst = states[int(np.argmax(DV + gamma * V))]
    return DriftCertificate(
        z=z,
        U=U,
        scanned_states=len(states),
        gamma_hat=gamma,
        B_hat=B_hat,
        worst_state=tuple(int(x) for x in worst),
        violated=violated,
        kind=kind,
        core_v_threshold=thr,
    )


def drift_check_ctmc(model, z, U, scan):
    """Lyapunov drift certificate for the pure-jump chain (u = d = 0).

    Fits the offset B on the low-V core first, then maximizes gamma on
    the high-V tail; the returned pair satisfies QV <= -gamma V + B on
    every scanned state, with equality at the worst state.
    """
    states = list(scan)
    if not states:
        raise EmptyScanError("drift scan is empty")
    if z > model.z_max:
        raise RadiusExceededError(f"z={z} beyond declared radius {model.z_max}")
    V = [lyapunov(q, z, U) for q in states]
    DV = [qv_ctmc(model, q, z, U) for q in states]
    return _fit_certificate(states, V, DV, z, U, kind="ctmc")


def _mc_moment(samples_fn, value_fn, mc_draws, rng, what):
    vals = np.array([value_fn(samples_fn(rng)) for _ in range(mc_draws)])
    m = float(vals.mean())
    stderr = float(vals.std(ddof=1) / np.sqrt(mc_draws))
    half = mc_draws // 2
    m1, m2 = float(vals[:half].mean()), float(vals[half:].mean())
    if not np.isfinite(m) or abs(m1 - m2) > 0.5 * (abs(m) + 1e-12):
        raise DivergentBoundaryMomentError(f"unstable Monte Carlo moment for {what}")
    return m, stderr


def drift_check_embedded(model, z, U, scan, mc_draws=20000, rng=None):
    """Drift certificate for the embedded chain including price moves.

    The pure-jump part is exact (rates normalized to proportions); the
    boundary/reinit expectations are Monte Carlo with a tail-stability
    check, which fails fast when z exceeds a declared moment radius.
    """
    states = list(scan)
    if not states:
        raise EmptyScanError("drift scan is empty")
    if z > model.z_max:
        raise RadiusExceededError(f"z={z} beyond declared radius {model.z_max}")
    if rng is None:
        rng = np.random.default_rng(0)
    for dist, what in (
        (model.pi_K, "pi_K"),
        (model.pi_minus_K, "pi_-K"),
        (model.pi_inc, "pi_inc"),
        (model.pi_dec, "pi_dec"),
    ):
        radius = getattr(dist, "z_radius", np.inf)
        if z >= radius:
            raise DivergentBoundaryMomentError(
                f"{what}: z={z} at or beyond moment radius {radius}"
            )
    e_K, se_K = _mc_moment(
        model.pi_K.sample, lambda l: z ** (abs(l) - U), mc_draws, rng, "pi_K"
    )
    e_mK, se_mK = _mc_moment(
        model.pi_minus_K.sample, lambda l: z ** (abs(l) - U), mc_draws, rng, "pi_-K"
    )
    e_inc, se_inc = _mc_moment(
        model.pi_inc.sample, lambda q: lyapunov(q, z, U), mc_draws, rng, "pi_inc"
    )
    e_dec, se_dec = _mc_moment(
        model.pi_dec.sample, lambda q: lyapunov(q, z, U), mc_draws, rng, "pi_dec"
    )
    tr = model.theta_reinit
    K = model.K
    kept = []
    V = []
    DV = []
    a8_ok = True
    a8_witness = None
    for q in states:
        v = lyapunov(q, z, U)
        trans = model.transitions(q)
        tot_fg = sum(t[3] for t in trans if t[0] in (INCREASE, DECREASE))
        uu = sum(t[3] for t in trans if t[0] == PRICE_UP)
        dd = sum(t[3] for t in trans if t[0] == PRICE_DOWN)
        tot = tot_fg + uu + dd
        if tot <= 0:
            continue
        if tot_fg <= 1e-9 * tot and (uu + dd) > 0 and a8_ok:
            a8_ok = False
            a8_witness = tuple(int(x) for x in q)
        dv = qv_ctmc(model, q, z, U) / tot if tot_fg > 0 else 0.0
        if uu > 0:
            dv += (uu / tot) * (
                (1 - tr) * (e_K - z ** (abs(int(q[pos_of(-K, K)])) - U))
                + tr * (e_inc - v)
            )
        if dd > 0:
            dv += (dd / tot) * (
                (1 - tr) * (e_mK - z ** (abs(int(q[pos_of(K, K)])) - U))
                + tr * (e_dec - v)
            )
        kept.append(q)
        V.append(v)
        DV.append(dv)
    cert = _fit_certificate(kept, V, DV, z, U, kind="embedded")
    cert.moment_stderr = {
        "pi_K": se_K,
        "pi_-K": se_mK,
        "pi_inc": se_inc,
        "pi_dec": se_dec,
    }
    cert.assumption8_ok = a8_ok
    cert.assumption8_witness = a8_witness
    if not a8_ok:
        cert.violated = True
        if a8_witness is not None:
            cert.worst_state = a8_witness
    return cert


# ---------------------------------------------------------------------------
# Assumption report
# ---------------------------------------------------------------------------


@dataclass
class AssumptionReport:
    """Per-assumption verified-on-scan statuses with numeric margins."""

    entries: dict = field(default_factory=dict)
    scan_size: int = 0
    z_grid: tuple = DEFAULT_Z_GRID
    U_grid: tuple = (5,)

    def status(self, number):
        return self.entries[number]["status"]

    def all_ok(self):
        return all(e["status"] != "violated" for e in self.entries.values())

    def to_dict(self):
        return {
            "scan_size": self.scan_size,
            "z_grid": list(self.z_grid),
            "U_grid": list(self.U_grid),
            "assumptions": {str(k): v for k, v in self.entries.items()},
        }


def _pair_margin(model, q, i, z, U, direction_pair, embedded):
    """Bracketed tail-drift expression for one (q, i) pair.

    direction_pair 'f' checks the ask-side inequality, 'g' the bid-side
    one.  When the leading star rate is zero the raw per-queue drift is
    used instead (the bracket's denominator degenerates).
    """
    gf, gfi, fstar = generating_function(model, i, q, "f", z)
    gg, ggi, gstar = generating_function(model, i, q, "g", z)
    if embedded:
        trans = model.transitions(q)
        tot = sum(t[3] for t in trans if t[0] in (INCREASE, DECREASE))
        if tot <= 0:
            return None
        fstar, gstar = fstar / tot, gstar / tot
    if direction_pair == "f":
        if fstar <= 0:
            return -gstar * (1.0 - ggi)
        return fstar - gstar * (1.0 - ggi) / (gf - 1.0)
    if gstar <= 0:
        return -fstar * (1.0 - gfi)
    return gstar - fstar * (1.0 - gfi) / (gg - 1.0)


def check_assumptions(model, scan, z_grid=DEFAULT_Z_GRID, U_grid=(5,)):
    """Evaluate each ergodicity assumption's inequality on the scan.

    Returns a report, never raises on a violation: each violated entry
    carries a concrete witness state.
    """
    states = [np.asarray(q, dtype=np.int64) for q in scan]
    if not states:
        raise EmptyScanError("assumption scan is empty")
    K = model.K
    rep = AssumptionReport(scan_size=len(states), z_grid=tuple(z_grid), U_grid=tuple(U_grid))
    z0 = min(z_grid)

    # assumption 2: no sign reversal in a single jump (structural)
    witness = None
    for q in states:
        ibb = best_bid_index(q, K)
        iba = best_ask_index(q, K)
        for j in range(2 * K):
            i = index_of(j, K)
            qi = int(q[j])
            if i >= iba:
                nm = model.size_support(i, q, "g")
                if any(model.g(i, q, n) > 0 for n in range(max(1, qi + 1), nm + 1)):
                    witness = (tuple(int(x) for x in q), i)
                    break
            if i <= ibb:
                nm = model.size_support(i, q, "f")
                if any(model.f(i, q, n) > 0 for n in range(max(1, -qi + 1), nm + 1)):
                    witness = (tuple(int(x) for x in q), i)
                    break
        if witness:
            break
    rep.entries[2] = {
        "status": "violated" if witness else "verified-on-scan",
        "witness": witness,
    }

    # assumption 3: bounded insertion intensity (L) at the smallest grid z
    sup_l = 0.0
    arg_l = None
    for q in states:
        ibb = best_bid_index(q, K)
        iba = best_ask_index(q, K)
        for j in range(2 * K):
            i = index_of(j, K)
            val = 0.0
            if i > ibb:
                gf, _, fstar = generating_function(model, i, q, "f", z0)
                val += fstar * gf
            if i < iba:
                gg, _, gstar = generating_function(model, i, q, "g", z0)
                val += gstar * gg
            if val > sup_l:
                sup_l, arg_l = val, (tuple(int(x) for x in q), i)
    rep.entries[3] = {
        "status": "verified-on-scan" if np.isfinite(sup_l) else "violated",
        "L": sup_l,
        "witness": None if np.isfinite(sup_l) else arg_l,
    }

    # assumptions 4 (ctmc) and 6 (embedded): tail drift brackets
    for number, embedded in ((4, False), (6, True)):
        best = None  # (margin r, z, U) maximizing r over the grid
        witness = None
        for U in U_grid:
            for z in z_grid:
                sup = -np.inf
                arg = None
                seen_pair = False
                for q in states:
                    ibb = best_bid_index(q, K)
                    iba = best_ask_index(q, K)
                    for j in range(2 * K):
                        i = index_of(j, K)
                        qi = int(q[j])
                        if qi > U and i >= iba:
                            m = _pair_margin(model, q, i, z, U, "f", embedded)
                        elif qi < -U and i <= ibb:
                            m = _pair_margin(model, q, i, z, U, "g", embedded)
                        else:
                            continue
                        if m is None:
                            continue
                        seen_pair = True
                        if m > sup:
                            sup, arg = m, (tuple(int(x) for x in q), i)
                if not seen_pair:
                    continue
                r = -sup
                if best is None or r > best[0]:
                    best = (r, z, U)
                    witness = arg
        if best is None:
            rep.entries[number] = {"status": "not-applicable", "note": "no tail pairs in scan"}
        else:
            rep.entries[number] = {
                "status": "verified-on-scan" if best[0] > 0 else "violated",
                "r": best[0],
                "z": best[1],
                "U": best[2],
                "witness": witness if best[0] <= 0 else None,
            }

    # assumption 5: generating functions bounded away from 1 in the tail
    U5 = min(U_grid)
    inf_b = np.inf
    arg_b = None
    for z in z_grid:
        for q in states:
            ibb = best_bid_index(q, K)
            iba = best_ask_index(q, K)
            for j in range(2 * K):
                i = index_of(j, K)
                qi = int(q[j])
                if qi > U5 and i >= iba:
                    gf, _, fstar = generating_function(model, i, q, "f", z)
                    if fstar > 0 and gf - 1.0 < inf_b:
                        inf_b, arg_b = gf - 1.0, (tuple(int(x) for x in q), i)
                elif qi < -U5 and i <= ibb:
                    gg, _, gstar = generating_function(model, i, q, "g", z)
                    if gstar > 0 and gg - 1.0 < inf_b:
                        inf_b, arg_b = gg - 1.0, (tuple(int(x) for x in q), i)
    if not np.isfinite(inf_b):
        rep.entries[5] = {"status": "not-applicable", "note": "no tail pairs in scan"}
    else:
        rep.entries[5] = {
            "status": "verified-on-scan" if inf_b > 0 else "violated",
            "B": inf_b,
            "witness": arg_b if inf_b <= 0 else None,
        }

    # assumption 7: boundary/reinit exponential moments (sampled)
    rng = np.random.default_rng(7)
    U7 = min(U_grid)
    try:
        parts = {}
        e, _ = _mc_moment(model.pi_K.sample, lambda l: z0 ** (abs(l) - U7), 5000, rng, "pi_K")
        parts["pi_K"] = e
        e, _ = _mc_moment(model.pi_minus_K.sample, lambda l: z0 ** (abs(l) - U7), 5000, rng, "pi_-K")
        parts["pi_-K"] = e
        e, _ = _mc_moment(model.pi_inc.sample, lambda q: lyapunov(q, z0, U7), 5000, rng, "pi_inc")
        parts["pi_inc"] = e
        e, _ = _mc_moment(model.pi_dec.sample, lambda q: lyapunov(q, z0, U7), 5000, rng, "pi_dec")
        parts["pi_dec"] = e
        rep.entries[7] = {
            "status": "verified-on-scan",
            "L_pi": sum(parts.values()),
            "z": z0,
            "parts": parts,
        }
    except DivergentBoundaryMomentError as exc:
        rep.entries[7] = {"status": "violated", "witness": str(exc)}

    # assumption 8: price jumps are never the only possible event off a core
    core = []
    sup_prop = 0.0
    arg_p = None
    for q in states:
        trans = model.transitions(q)
        tot_fg = sum(t[3] for t in trans if t[0] in (INCREASE, DECREASE))
        ud = sum(t[3] for t in trans if t[0] in (PRICE_UP, PRICE_DOWN))
        tot = tot_fg + ud
        if tot <= 0:
            continue
        prop = ud / tot
        if prop >= 1.0 - 1e-9:
            core.append(tuple(int(x) for x in q))
        elif prop > sup_prop:
            sup_prop, arg_p = prop, tuple(int(x) for x in q)
    core_ok = len(core) <= max(100, len(states) // 100)
    rep.entries[8] = {
        "status": "verified-on-scan" if core_ok and sup_prop < 1.0 else "violated",
        "sup_proportion": sup_prop,
        "core_size": len(core),
        "witness": None if core_ok else core[: 5],
    }

    # assumption 9: total event rate bounded below (m)
    inf_rate = np.inf
    arg_m = None
    for q in states:
        tot = sum(t[3] for t in model.transitions(q))
        if tot < inf_rate:
            inf_rate, arg_m = tot, tuple(int(x) for x in q)
    rep.entries[9] = {
        "status": "verified-on-scan" if inf_rate > 0 else "violated",
        "m": inf_rate,
        "witness": arg_m if inf_rate <= 0 else None,
    }
    return rep
