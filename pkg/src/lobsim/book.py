"""Order-book state types and indexing geometry.

The book is a vector of 2K signed queue sizes indexed by
i in {-K,...,-1,1,...,K} (negative entries are bid orders, positive
entries ask orders), centered on a reference price living on the
half-tick-shifted grid.  Prices are kept internally as integer counts
of half ticks so that arithmetic stays exact over long runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SignPatternViolation

__all__ = [
    "BookParams",
    "LobState",
    "Event",
    "MidSpread",
    "signed_indices",
    "pos_of",
    "index_of",
    "best_bid_index",
    "best_ask_index",
    "in_state_space",
    "validate_state",
    "price_of_index",
    "half_ticks_of_index",
    "mid_and_spread",
]


@dataclass(frozen=True)
class BookParams:
    """Book geometry: K limits per side, tick size."""

    K: int
    tick: float = 1.0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not self.tick > 0:
            raise ValueError("tick must be > 0")


def signed_indices(K):
    """The signed limit indices -K..-1, 1..K in vector order."""
    return list(range(-K, 0)) + list(range(1, K + 1))


def pos_of(i, K):
    """Array position of signed index i (i != 0)."""
    return i + K if i < 0 else i + K - 1


def index_of(j, K):
    """Signed index of array position j."""
    return j - K if j < K else j - K + 1


def best_bid_index(q, K):
    """max(-K-1, sup{i : q_i < 0}); -K-1 when the bid side is empty."""
    for j in range(2 * K - 1, -1, -1):
        if q[j] < 0:
            return index_of(j, K)
    return -K - 1


def best_ask_index(q, K):
    """min(K+1, inf{i : q_i > 0}); K+1 when the ask side is empty."""
    for j in range(2 * K):
        if q[j] > 0:
            return index_of(j, K)
    return K + 1


def in_state_space(q, K):
    """Membership test for the sign-interleaved state space."""
    try:
        validate_state(q, K)
    except SignPatternViolation:
        return False
    return True


def validate_state(q, K):
    """Return q as an int array if it satisfies the sign pattern.

    Raises SignPatternViolation naming the first offending index: some
    entry is positive at or below the best bid, or negative at or above
    the best ask.
    """
    q = np.asarray(q, dtype=np.int64)
    if q.shape != (2 * K,):
        raise ValueError(f"expected vector of length {2 * K}, got shape {q.shape}")
    ibb = best_bid_index(q, K)
    iba = best_ask_index(q, K)
    if ibb >= iba:
        # some positive entry sits at or below a negative one
        for j in range(2 * K):
            i = index_of(j, K)
            if q[j] > 0 and i <= ibb:
                raise SignPatternViolation(i)
            if q[j] < 0 and i >= iba:
                raise SignPatternViolation(i)
        raise SignPatternViolation(ibb)  # unreachable; defensive
    return q


def half_ticks_of_index(p_ref_half, i):
    """Price of limit i as a half-tick count, given p_ref as a half-tick count.

    For i > 0 the limit sits at p_ref + (i - 0.5) * tick; for i < 0 at
    p_ref + (i + 0.5) * tick.  In half ticks both collapse to
    p_ref_half + 2i -/+ 1, an even count (a full-tick grid point).
    """
    if i == 0:
        raise ValueError("index 0 does not exist")
    return p_ref_half + 2 * i - (1 if i > 0 else -1)


def price_of_index(p_ref, i, tick):
    """Price of the limit with signed index i."""
    if i == 0:
        raise ValueError("index 0 does not exist")
    offset = (i - 0.5) if i > 0 else (i + 0.5)
    return p_ref + offset * tick


@dataclass(frozen=True)
class MidSpread:
    p_mid: float
    spread: float
    i_mid: float
    saturated: bool


def mid_and_spread(q, p_ref, tick, K=None):
    """Mid price, spread and half-integer mid index.

    Empty sides use the saturated indices -(K+1)/(K+1); the flag marks
    results built from a saturated side so downstream statistics can
    filter them.
    """
    if K is None:
        K = len(q) // 2
    ibb = best_bid_index(q, K)
    iba = best_ask_index(q, K)
    i_mid = (ibb + iba) / 2.0
    p_mid = p_ref + tick * i_mid
    spread = price_of_index(p_ref, iba, tick) - price_of_index(p_ref, ibb, tick)
    saturated = (ibb == -K - 1) or (iba == K + 1)
    return MidSpread(p_mid=p_mid, spread=spread, i_mid=i_mid, saturated=saturated)


@dataclass
class LobState:
    """Full Markov state: queue vector plus reference price.

    p_ref_half is the reference price in half ticks and must be odd so
    that p_ref sits on the shifted grid tick * (0.5 + integer).
    """

    q: np.ndarray
    p_ref_half: int
    tick: float = 1.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=np.int64)
        if self.p_ref_half % 2 == 0:
            raise ValueError("p_ref_half must be odd (price on the shifted grid)")

    @property
    def K(self):
        return len(self.q) // 2

    @property
    def p_ref(self):
        return self.p_ref_half * self.tick / 2.0

    @classmethod
    def from_price(cls, q, p_ref, tick):
        half = round(2.0 * p_ref / tick)
        if half % 2 == 0 or abs(half * tick / 2.0 - p_ref) > 1e-9 * max(1.0, abs(p_ref)):
            raise ValueError("p_ref must lie on the grid tick * (0.5 + integer)")
        return cls(q=np.asarray(q, dtype=np.int64), p_ref_half=int(half), tick=tick)

    def price_of(self, i):
        return half_ticks_of_index(self.p_ref_half, i) * self.tick / 2.0

    def copy(self):
        return LobState(q=self.q.copy(), p_ref_half=self.p_ref_half, tick=self.tick)


# Event kind codes used in transition lists (kept as plain ints for speed).
INCREASE = 0
DECREASE = 1
PRICE_UP = 2
PRICE_DOWN = 3

_KIND_NAMES = {INCREASE: "inc", DECREASE: "dec", PRICE_UP: "up", PRICE_DOWN: "down"}


@dataclass(frozen=True)
class Event:
    """One generator transition.

    kind is one of "inc", "dec", "up", "down".  Pure jumps carry a
    signed index and a size n >= 1.  Price moves carry mode "shift"
    (with the boundary fill) or "reinit" (with the redrawn book).
    """

    kind: str
    index: int = 0
    size: int = 0
    mode: str | None = None
    fill: int | None = None
    redrawn: tuple | None = None

    @staticmethod
    def kind_name(code):
        return _KIND_NAMES[code]
