"""Boundary-fill and book-reinitialization distributions.

Defaults follow a geometric family: the boundary fill after an up move
is a nonnegative geometric queue (new outermost ask), its negation
after a down move, and the full-book redraws are products of per-index
geometrics with the correct signs (bid entries nonpositive, ask entries
nonnegative, hence always inside the state space).  The geometric tail
gives finite exponential moments for z < 1/(1-p), which is what the
boundary-moment bound requires.
"""

from __future__ import annotations

import numpy as np

__all__ = ["GeometricBoundary", "GeometricBook"]


class GeometricBoundary:
    """Signed geometric fill distribution for the shifted boundary queue.

    |L| ~ Geometric(p) on {0, 1, 2, ...}; sign +1 for the new ask queue
    at index K (up moves), -1 for the new bid queue at -K (down moves).
    """

    def __init__(self, p, sign):
        if not 0 < p <= 1:
            raise ValueError("p must be in (0, 1]")
        if sign not in (-1, 1):
            raise ValueError("sign must be +-1")
        self.p = p
        self.sign = sign

    @property
    def z_radius(self):
        """Exponential moments E[z^|L|] are finite for z below this."""
        return np.inf if self.p == 1.0 else 1.0 / (1.0 - self.p)

    def sample(self, rng):
        return self.sign * (int(rng.geometric(self.p)) - 1)

    def pmf(self, l):
        k = self.sign * l
        if k < 0:
            return 0.0
        return self.p * (1.0 - self.p) ** k

    def moment(self, z, U):
        """E[z^(|L| - U)], analytic."""
        if z >= self.z_radius:
            return np.inf
        return z ** (-U) * self.p / (1.0 - (1.0 - self.p) * z)


class GeometricBook:
    """Product-of-geometrics redraw for the full queue vector.

    Each |q_i| ~ Geometric(p) independently, bid indices negated.  The
    support is contained in the sign-interleaved state space, so no
    conditioning is needed.
    """

    def __init__(self, K, p):
        if not 0 < p <= 1:
            raise ValueError("p must be in (0, 1]")
        self.K = K
        self.p = p

    @property
    def z_radius(self):
        return np.inf if self.p == 1.0 else 1.0 / (1.0 - self.p)

    def sample(self, rng):
        mags = rng.geometric(self.p, size=2 * self.K).astype(np.int64) - 1
        mags[: self.K] *= -1
        return mags

    def pmf(self, q):
        K = self.K
        out = 1.0
        for j, v in enumerate(q):
            k = -int(v) if j < K else int(v)
            if k < 0:
                return 0.0
            out *= self.p * (1.0 - self.p) ** k
        return out

    def marginal_pmf(self, j, v):
        """pmf of coordinate at array position j taking value v."""
        k = -int(v) if j < self.K else int(v)
        if k < 0:
            return 0.0
        return self.p * (1.0 - self.p) ** k

    def v_moment(self, z, U):
        """E[sum_i z^(|Q_i| - U)], analytic."""
        if z >= self.z_radius:
            return np.inf
        return 2 * self.K * z ** (-U) * self.p / (1.0 - (1.0 - self.p) * z)
