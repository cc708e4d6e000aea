"""Rate models: the generator's ingredients and the concrete model zoo.

A RateModel supplies the per-limit insertion/depletion rates f and g,
the price-jump rates u and d, the reinitialization probability and the
boundary/reinit distributions.  Four concrete models are provided:

* PoissonK1Model    -- two queues, constant spread, full reinit on moves
* PoissonKModel     -- index-dependent Poisson flows, K limits per side
* ZeroIntelligenceModel -- distance-indexed flows, linear cancellations
* QueueReactiveModel    -- tabulated queue-size-dependent intensities

All zoo models have unit jump sizes; the generic machinery supports
finite size supports declared per (index, direction).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
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
from .distributions import GeometricBoundary, GeometricBook
from .errors import AbsorbingStateError, RadiusExceededError

__all__ = [
    "RateModel",
    "PoissonK1Params",
    "PoissonKParams",
    "ZeroIntelligenceParams",
    "QueueReactiveParams",
    "PoissonK1Model",
    "PoissonKModel",
    "ZeroIntelligenceModel",
    "QueueReactiveModel",
    "total_rate",
    "enumerate_transitions",
    "validate_params",
    "generating_function",
    "make_mid_reversion_ud",
    "default_model",
    "build_model",
]


class SignedTable:
    """Lookup table over signed limit indices -H..-1, 1..H."""

    def __init__(self, values, H):
        values = np.asarray(values, dtype=float)
        if values.shape != (2 * H,):
            raise ValueError(f"expected {2 * H} values, got {values.shape}")
        self.values = values
        self.H = H

    def __getitem__(self, i):
        return self.values[i + self.H if i < 0 else i + self.H - 1]


def _table_at(table, x):
    """Tabulated intensity with the tail held at the last value."""
    if x < 0:
        return 0.0
    return table[x] if x < len(table) else table[-1]


# ---------------------------------------------------------------------------
# Parameter sets with constraint validators
# ---------------------------------------------------------------------------


@dataclass
class PoissonK1Params:
    lam: float
    mu: float
    theta: float
    reinit_p: float = 0.5

    def validate(self):
        v = []
        if not self.lam > 0:
            v.append("λ > 0 required")
        if not self.lam < self.mu:
            v.append("λ < μ required")
        if not math.isfinite(self.mu):
            v.append("μ < ∞ required")
        if self.theta < 0:
            v.append("θ ≥ 0 required")
        if not 0 < self.reinit_p < 1:
            v.append("reinit_p in (0,1) required")
        return v


@dataclass
class PoissonKParams:
    K: int
    lam: list  # λ_i over i = -K..-1, 1..K
    mu: list  # μ_i, same indexing
    gam: list  # γ_i, same indexing
    theta: list  # θ_i over i = -K..-1, 1..K, nondecreasing in i
    theta_reinit: float = 0.5
    boundary_p: float = 0.5
    reinit_p: float = 0.5

    def validate(self):
        v = []
        K = self.K
        for name, arr in (("λ", self.lam), ("μ", self.mu), ("γ", self.gam), ("θ", self.theta)):
            if len(arr) != 2 * K:
                v.append(f"{name} table must have {2 * K} entries")
        if v:
            return v
        lam = SignedTable(self.lam, K)
        mu = SignedTable(self.mu, K)
        for i in [x for x in range(-K, K + 1) if x != 0]:
            if not lam[i] > 0:
                v.append(f"λ_i > 0 required (i={i})")
            if not mu[-i] > lam[i]:
                v.append(f"μ_-i > λ_i required (i={i})")
        if any(g < 0 for g in self.gam):
            v.append("γ_i ≥ 0 required")
        th = list(self.theta)
        if any(t < 0 for t in th):
            v.append("θ_i ≥ 0 required")
        if any(th[k] > th[k + 1] for k in range(len(th) - 1)):
            v.append("θ_i nondecreasing")
        if not 0 <= self.theta_reinit <= 1:
            v.append("θ^reinit in [0,1] required")
        return v


@dataclass
class ZeroIntelligenceParams:
    K: int
    lam_by_distance: list  # λ_φ, φ = 0..(length-1), tail held
    mu_by_distance: list  # μ_φ
    gamma: float
    theta: list  # θ_i over i = -K..-1, 1..K
    theta_reinit: float = 0.5
    boundary_p: float = 0.5
    reinit_p: float = 0.5

    def validate(self):
        v = []
        if any(x <= 0 for x in self.lam_by_distance):
            v.append("λ_φ > 0 required")
        if any(x <= 0 for x in self.mu_by_distance):
            v.append("μ_φ > 0 required")
        if self.gamma < 0:
            v.append("γ ≥ 0 required")
        if len(self.theta) != 2 * self.K:
            v.append(f"θ table must have {2 * self.K} entries")
        else:
            th = list(self.theta)
            if any(t < 0 for t in th):
                v.append("θ_i ≥ 0 required")
            if any(th[k] > th[k + 1] for k in range(len(th) - 1)):
                v.append("θ_i nondecreasing")
        if not 0 <= self.theta_reinit <= 1:
            v.append("θ^reinit in [0,1] required")
        return v


@dataclass
class QueueReactiveParams:
    K: int
    lam_tables: list  # one intensity table per |i| = 1..K, tail held
    mu_tables: list
    theta: float
    theta_reinit: float = 0.5
    boundary_p: float = 0.5
    reinit_p: float = 0.5

    def validate(self):
        v = []
        if len(self.lam_tables) != self.K or len(self.mu_tables) != self.K:
            v.append(f"need {self.K} λ and μ tables (one per |i|)")
            return v
        for k, (lt, mt) in enumerate(zip(self.lam_tables, self.mu_tables), start=1):
            if mt[0] != 0:
                v.append(f"μ(0)=0 required (|i|={k})")
            if any(x < 0 for x in lt) or any(x < 0 for x in mt):
                v.append(f"nonnegative intensities required (|i|={k})")
            # the tail condition lambda(x) < mu(x) is an ergodicity
            # hypothesis, not well-formedness: the drift checker reports it
            if min(l + m for l, m in zip(lt, mt)) <= 0:
                v.append(f"inf(λ+μ) > 0 required (|i|={k})")
        if self.theta < 0:
            v.append("θ ≥ 0 required")
        if not 0 <= self.theta_reinit <= 1:
            v.append("θ^reinit in [0,1] required")
        return v


def validate_params(params):
    """Structured constraint report: list of violated inequalities (empty = ok)."""
    return params.validate()


# ---------------------------------------------------------------------------
# Model contract
# ---------------------------------------------------------------------------


class RateModel(ABC):
    """Generator ingredients; immutable after construction."""

    name = "abstract"
    K: int
    theta_reinit: float
    pi_K = None
    pi_minus_K = None
    pi_inc = None
    pi_dec = None
    #: radius within which all size generating functions converge
    z_max = math.inf

    @abstractmethod
    def f(self, i, q, n):
        """Insertion-direction rate at signed index i, size n."""

    @abstractmethod
    def g(self, i, q, n):
        """Depletion-direction rate at signed index i, size n."""

    @abstractmethod
    def u(self, q):
        """Rate of a one-tick reference-price increase."""

    @abstractmethod
    def d(self, q):
        """Rate of a one-tick reference-price decrease."""

    def size_support(self, i, q, direction):
        """Largest jump size with nonzero rate (all zoo models: 1)."""
        return 1

    def f_star(self, i, q):
        return sum(self.f(i, q, n) for n in range(1, self.size_support(i, q, "f") + 1))

    def g_star(self, i, q):
        return sum(self.g(i, q, n) for n in range(1, self.size_support(i, q, "g") + 1))

    def in_support(self, q):
        """Membership in the model's state space (default: all of Ω)."""
        return in_state_space(q, self.K)

    def transitions(self, q):
        """Complete list of (kind, index, size, rate) with positive rate.

        Moves that would leave the state space are omitted (their rates
        are zero by convention).
        """
        K = self.K
        out = []
        ql = np.asarray(q, dtype=np.int64)
        for j in range(2 * K):
            i = index_of(j, K)
            for n in range(1, self.size_support(i, q, "f") + 1):
                r = self.f(i, q, n)
                if r > 0 and self._target_ok(ql, j, n):
                    out.append((INCREASE, i, n, r))
            for n in range(1, self.size_support(i, q, "g") + 1):
                r = self.g(i, q, n)
                if r > 0 and self._target_ok(ql, j, -n):
                    out.append((DECREASE, i, n, r))
        uu = self.u(q)
        if uu > 0:
            out.append((PRICE_UP, 0, 0, uu))
        dd = self.d(q)
        if dd > 0:
            out.append((PRICE_DOWN, 0, 0, dd))
        return out

    def _target_ok(self, q, j, delta):
        q2 = q.copy()
        q2[j] += delta
        return in_state_space(q2, self.K) and self.in_support(q2)


# ---------------------------------------------------------------------------
# Concrete models
# ---------------------------------------------------------------------------


class PoissonK1Model(RateModel):
    """Two-queue Poisson model with constant one-tick spread.

    Insertions at rate λ, depletions at rate μ while the queue is
    nonempty; the reference price moves at rate θ when the facing queue
    is empty and the whole book is always redrawn (θ^reinit = 1).
    """

    name = "poisson_k1"
    K = 1

    def __init__(self, params: PoissonK1Params, ud_override=None):
        self.params = params
        self.lam = params.lam
        self.mu = params.mu
        self.theta = params.theta
        self.theta_reinit = 1.0
        self.pi_inc = GeometricBook(1, params.reinit_p)
        self.pi_dec = GeometricBook(1, params.reinit_p)
        self.pi_K = GeometricBoundary(params.reinit_p, +1)  # unused when θ^reinit=1
        self.pi_minus_K = GeometricBoundary(params.reinit_p, -1)
        self._ud = ud_override

    def f(self, i, q, n):
        if n != 1:
            return 0.0
        if i == 1:
            return self.lam
        return self.mu if q[0] < 0 else 0.0

    def g(self, i, q, n):
        if n != 1:
            return 0.0
        if i == 1:
            return self.mu if q[1] > 0 else 0.0
        return self.lam

    def u(self, q):
        if self._ud is not None:
            return self._ud[0](q)
        return self.theta if q[1] == 0 else 0.0

    def d(self, q):
        if self._ud is not None:
            return self._ud[1](q)
        return self.theta if q[0] == 0 else 0.0

    def in_support(self, q):
        return q[0] <= 0 <= q[1]

    def transitions(self, q):
        qb, qa = int(q[0]), int(q[1])
        out = [(INCREASE, 1, 1, self.lam)]
        if qa > 0:
            out.append((DECREASE, 1, 1, self.mu))
        if qb < 0:
            out.append((INCREASE, -1, 1, self.mu))
        out.append((DECREASE, -1, 1, self.lam))
        uu, dd = self.u(q), self.d(q)
        if uu > 0:
            out.append((PRICE_UP, 0, 0, uu))
        if dd > 0:
            out.append((PRICE_DOWN, 0, 0, dd))
        return out


class PoissonKModel(RateModel):
    """Index-dependent Poisson flows with K limits per side.

    λ_i drives insertions, γ_i market orders at the touch, μ_i
    cancellations behind the touch; price-jump rates follow the
    nondecreasing θ table indexed by the saturating best-ask/bid index
    (the table is extended to |i| = K+1 by repeating the last value).
    """

    name = "poisson_k"

    def __init__(self, params: PoissonKParams, ud_override=None):
        self.params = params
        K = self.K = params.K
        self.lam = SignedTable(params.lam, K)
        self.mu = SignedTable(params.mu, K)
        self.gam = SignedTable(params.gam, K)
        th = list(params.theta)
        self.theta = SignedTable([th[0]] + th + [th[-1]], K + 1)
        self.theta_reinit = params.theta_reinit
        self.pi_K = GeometricBoundary(params.boundary_p, +1)
        self.pi_minus_K = GeometricBoundary(params.boundary_p, -1)
        self.pi_inc = GeometricBook(K, params.reinit_p)
        self.pi_dec = GeometricBook(K, params.reinit_p)
        self._ud = ud_override

    def f(self, i, q, n):
        if n != 1:
            return 0.0
        ibb = best_bid_index(q, self.K)
        r = 0.0
        if i > ibb:
            r += self.lam[i]
        if i == ibb:
            r += self.gam[i]
        if i <= ibb and q[pos_of(i, self.K)] < 0:
            r += self.mu[i]
        return r

    def g(self, i, q, n):
        if n != 1:
            return 0.0
        iba = best_ask_index(q, self.K)
        r = 0.0
        if i < iba:
            r += self.lam[-i]
        if i == iba:
            r += self.gam[-i]
        if i >= iba and q[pos_of(i, self.K)] > 0:
            r += self.mu[-i]
        return r

    def u(self, q):
        if self._ud is not None:
            return self._ud[0](q)
        return self.theta[best_ask_index(q, self.K)]

    def d(self, q):
        if self._ud is not None:
            return self._ud[1](q)
        return self.theta[-best_bid_index(q, self.K)]

    def transitions(self, q):
        K = self.K
        ibb = best_bid_index(q, K)
        iba = best_ask_index(q, K)
        out = []
        for j in range(2 * K):
            i = index_of(j, K)
            qi = int(q[j])
            fr = 0.0
            if i > ibb:
                fr += self.lam[i]
            if i == ibb:
                fr += self.gam[i]
            if i <= ibb and qi < 0:
                fr += self.mu[i]
            if fr > 0:
                out.append((INCREASE, i, 1, fr))
            gr = 0.0
            if i < iba:
                gr += self.lam[-i]
            if i == iba:
                gr += self.gam[-i]
            if i >= iba and qi > 0:
                gr += self.mu[-i]
            if gr > 0:
                out.append((DECREASE, i, 1, gr))
        uu, dd = self.u(q), self.d(q)
        if uu > 0:
            out.append((PRICE_UP, 0, 0, uu))
        if dd > 0:
            out.append((PRICE_DOWN, 0, 0, dd))
        return out


class ZeroIntelligenceModel(RateModel):
    """Distance-indexed Poisson flows with cancellations linear in queue size."""

    name = "zero_intelligence"

    def __init__(self, params: ZeroIntelligenceParams, ud_override=None):
        self.params = params
        K = self.K = params.K
        self.lam_d = list(params.lam_by_distance)
        self.mu_d = list(params.mu_by_distance)
        self.gamma = params.gamma
        th = list(params.theta)
        self.theta = SignedTable([th[0]] + th + [th[-1]], K + 1)
        self.theta_reinit = params.theta_reinit
        self.pi_K = GeometricBoundary(params.boundary_p, +1)
        self.pi_minus_K = GeometricBoundary(params.boundary_p, -1)
        self.pi_inc = GeometricBook(K, params.reinit_p)
        self.pi_dec = GeometricBook(K, params.reinit_p)
        self._ud = ud_override

    def f(self, i, q, n):
        if n != 1:
            return 0.0
        K = self.K
        ibb = best_bid_index(q, K)
        iba = best_ask_index(q, K)
        r = 0.0
        if i > ibb:
            r += _table_at(self.lam_d, abs(i - ibb))
        if i == ibb:
            r += self.gamma
        if i <= ibb:
            r += abs(int(q[pos_of(i, K)])) * _table_at(self.mu_d, abs(i - iba))
        return r

    def g(self, i, q, n):
        if n != 1:
            return 0.0
        K = self.K
        ibb = best_bid_index(q, K)
        iba = best_ask_index(q, K)
        r = 0.0
        if i < iba:
            r += _table_at(self.lam_d, abs(i - iba))
        if i == iba:
            r += self.gamma
        if i >= iba:
            r += abs(int(q[pos_of(i, K)])) * _table_at(self.mu_d, abs(i - ibb))
        return r

    def u(self, q):
        if self._ud is not None:
            return self._ud[0](q)
        return self.theta[best_ask_index(q, self.K)]

    def d(self, q):
        if self._ud is not None:
            return self._ud[1](q)
        return self.theta[-best_bid_index(q, self.K)]

    def transitions(self, q):
        K = self.K
        out = []
        for j in range(2 * K):
            i = index_of(j, K)
            fr = self.f(i, q, 1)
            if fr > 0:
                out.append((INCREASE, i, 1, fr))
            gr = self.g(i, q, 1)
            if gr > 0:
                out.append((DECREASE, i, 1, gr))
        uu, dd = self.u(q), self.d(q)
        if uu > 0:
            out.append((PRICE_UP, 0, 0, uu))
        if dd > 0:
            out.append((PRICE_DOWN, 0, 0, dd))
        return out


class QueueReactiveModel(RateModel):
    """Tabulated queue-size-dependent intensities (rate-based price moves).

    Lives on the restricted space with nonpositive bid entries and
    nonnegative ask entries; μ(0)=0 keeps it there.
    """

    name = "queue_reactive"

    def __init__(self, params: QueueReactiveParams, ud_override=None):
        self.params = params
        K = self.K = params.K
        self.lam_tables = [list(t) for t in params.lam_tables]
        self.mu_tables = [list(t) for t in params.mu_tables]
        self.theta = params.theta
        self.theta_reinit = params.theta_reinit
        self.pi_K = GeometricBoundary(params.boundary_p, +1)
        self.pi_minus_K = GeometricBoundary(params.boundary_p, -1)
        self.pi_inc = GeometricBook(K, params.reinit_p)
        self.pi_dec = GeometricBook(K, params.reinit_p)
        self._ud = ud_override

    def _lam(self, a, x):
        return _table_at(self.lam_tables[a - 1], x)

    def _mu(self, a, x):
        return _table_at(self.mu_tables[a - 1], x)

    def f(self, i, q, n):
        if n != 1:
            return 0.0
        qi = int(q[pos_of(i, self.K)])
        if i > 0:
            return self._lam(i, qi)
        return self._mu(-i, -qi)

    def g(self, i, q, n):
        if n != 1:
            return 0.0
        qi = int(q[pos_of(i, self.K)])
        if i > 0:
            return self._mu(i, qi)
        return self._lam(-i, -qi)

    def u(self, q):
        if self._ud is not None:
            return self._ud[0](q)
        return self.theta if q[pos_of(1, self.K)] == 0 else 0.0

    def d(self, q):
        if self._ud is not None:
            return self._ud[1](q)
        return self.theta if q[pos_of(-1, self.K)] == 0 else 0.0

    def in_support(self, q):
        K = self.K
        return all(q[j] <= 0 for j in range(K)) and all(q[j] >= 0 for j in range(K, 2 * K))

    def transitions(self, q):
        K = self.K
        out = []
        for j in range(2 * K):
            i = index_of(j, K)
            qi = int(q[j])
            if i > 0:
                fr = self._lam(i, qi)
                gr = self._mu(i, qi)
            else:
                fr = self._mu(-i, -qi)
                gr = self._lam(-i, -qi)
            if fr > 0:
                out.append((INCREASE, i, 1, fr))
            if gr > 0:
                out.append((DECREASE, i, 1, gr))
        uu, dd = self.u(q), self.d(q)
        if uu > 0:
            out.append((PRICE_UP, 0, 0, uu))
        if dd > 0:
            out.append((PRICE_DOWN, 0, 0, dd))
        return out


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------


def total_rate(model, q):
    """Exact sum of all outgoing rates at q; errors on an absorbing state."""
    r = sum(t[3] for t in model.transitions(q))
    if r <= 0:
        raise AbsorbingStateError(q)
    return r


def enumerate_transitions(model, q):
    return model.transitions(q)


def generating_function(model, i, q, direction, z):
    """(G(z), G(1/z), star rate) for the size distribution at (i, q).

    Uses the 0/0 := 0 convention: a zero star rate returns zeros rather
    than an error.
    """
    if z > model.z_max:
        raise RadiusExceededError(f"z={z} beyond declared radius {model.z_max}")
    rate_fn = model.f if direction == "f" else model.g
    nmax = model.size_support(i, q, direction)
    rates = [rate_fn(i, q, n) for n in range(1, nmax + 1)]
    star = sum(rates)
    if star == 0:
        return 0.0, 0.0, 0.0
    gz = sum(z**n * r for n, r in enumerate(rates, start=1)) / star
    giz = sum(z ** (-n) * r for n, r in enumerate(rates, start=1)) / star
    return gz, giz, star


def make_mid_reversion_ud(theta0, theta1, tick, K):
    """Price-jump rates chasing the mid: optional plug-in for any queue model.

    θ0 is the exogenous move rate; θ1 scales the pull of the reference
    price towards the current mid.
    """

    def u(q):
        i_mid = (best_bid_index(q, K) + best_ask_index(q, K)) / 2.0
        return theta0 + theta1 * max(0.0, tick * (i_mid - 0.5))

    def d(q):
        i_mid = (best_bid_index(q, K) + best_ask_index(q, K)) / 2.0
        return theta0 + theta1 * max(0.0, -tick * (i_mid + 0.5))

    return u, d


# ---------------------------------------------------------------------------
# Zoo defaults and config-driven construction
# ---------------------------------------------------------------------------

_MODEL_CLASSES = {
    "poisson_k1": (PoissonK1Model, PoissonK1Params),
    "poisson_k": (PoissonKModel, PoissonKParams),
    "zero_intelligence": (ZeroIntelligenceModel, ZeroIntelligenceParams),
    "queue_reactive": (QueueReactiveModel, QueueReactiveParams),
}


def default_model(name, K=3):
    """Zoo model with default parameters (chosen to satisfy all checks)."""
    if name == "poisson_k1":
        return PoissonK1Model(PoissonK1Params(lam=1.0, mu=2.0, theta=0.5))
    if name == "poisson_k":
        n = 2 * K
        return PoissonKModel(
            PoissonKParams(
                K=K,
                lam=[0.8] * n,
                mu=[2.0] * n,
                gam=[0.3] * n,
                theta=list(np.linspace(0.1, 0.5, n)),
            )
        )
    if name == "zero_intelligence":
        return ZeroIntelligenceModel(
            ZeroIntelligenceParams(
                K=K,
                lam_by_distance=[0.8] * (2 * K + 2),
                mu_by_distance=[0.4] * (2 * K + 2),
                gamma=0.3,
                theta=list(np.linspace(0.1, 0.5, 2 * K)),
            )
        )
    if name == "queue_reactive":
        return QueueReactiveModel(
            QueueReactiveParams(
                K=K,
                lam_tables=[[1.2, 1.0, 0.8, 0.6, 0.5]] * K,
                mu_tables=[[0.0, 0.8, 1.2, 1.5, 1.8]] * K,
                theta=0.4,
            )
        )
    raise ValueError(f"unknown model name {name!r}")


def build_model(spec: dict):
    """Construct a model from a config mapping: {'name': ..., params...}.

    Two optional keys plug in replacement price-move rates: 'ud_constant'
    ([up_rate, down_rate], a diagnostic override) and 'mid_reversion'
    ({theta0, theta1, tick}, the reference price chasing the mid).
    """
    spec = dict(spec)
    name = spec.pop("name", None)
    if name not in _MODEL_CLASSES:
        raise ValueError(f"unknown model name {name!r}")
    ud = None
    const = spec.pop("ud_constant", None)
    mid = spec.pop("mid_reversion", None)
    cls, params_cls = _MODEL_CLASSES[name]
    params = params_cls(**spec)
    K = getattr(params, "K", 1)
    if const is not None:
        up, down = float(const[0]), float(const[1])
        ud = (lambda q: up, lambda q: down)
    elif mid is not None:
        ud = make_mid_reversion_ud(
            mid["theta0"], mid["theta1"], mid.get("tick", 1.0), K
        )
    return cls(params, ud_override=ud)
