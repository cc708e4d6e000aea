"""Brute-force stationary oracle on truncated state spaces.

Enumerates the sign-interleaved states inside a per-index cap, builds
the exact rate matrix from the model's enumerated transitions (moves
leaving the truncation are redirected by projecting onto the cap, which
keeps row sums at zero), and solves pi Q = 0 by sparse linear algebra.
Used to validate simulation output on small instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from .book import (
    DECREASE,
    INCREASE,
    PRICE_DOWN,
    PRICE_UP,
    best_ask_index,
    best_bid_index,
    in_state_space,
    mid_and_spread,
    pos_of,
)
from .errors import IllConditionedError, ReducibleError, StateSpaceTooLargeError

__all__ = [
    "TruncatedGenerator",
    "truncated_generator",
    "stationary_solve",
    "tv_distance",
    "normalize_measure",
    "shape_statistics",
]


@dataclass
class TruncatedGenerator:
    states: list  # tuples, enumeration order
    index: dict  # tuple -> row
    Q: sp.csr_matrix
    cap: int
    price_mode: str
    redirected_rate: float = 0.0  # total rate mass projected onto the cap


def _enumerate_box(model, cap, state_bound):
    K = model.K
    box = (2 * cap + 1) ** (2 * K)
    if box > 50 * state_bound:
        raise StateSpaceTooLargeError(box, state_bound)
    states = []
    for combo in itertools.product(range(-cap, cap + 1), repeat=2 * K):
        if in_state_space(combo, K) and model.in_support(np.asarray(combo)):
            states.append(combo)
            if len(states) > state_bound:
                raise StateSpaceTooLargeError(len(states), state_bound)
    return states


def truncated_generator(model, cap, price_mode="frozen", state_bound=2_000_000):
    """Exact generator on the truncation {|q_i| <= cap}.

    price_mode "frozen" drops u and d (the constant-reference-price
    regime); "collapsed" folds price moves into intra-book
    redistribution using the boundary/reinit distributions discretized
    on the truncated set.
    """
    if price_mode not in ("frozen", "collapsed"):
        raise ValueError("price_mode must be 'frozen' or 'collapsed'")
    K = model.K
    states = _enumerate_box(model, cap, state_bound)
    index = {s: r for r, s in enumerate(states)}
    n = len(states)
    rows, cols, vals = [], [], []
    redirected = 0.0

    # discretized reinit distributions (renormalized on the truncation)
    if price_mode == "collapsed":
        w_inc = np.array([model.pi_inc.pmf(s) for s in states])
        w_dec = np.array([model.pi_dec.pmf(s) for s in states])
        if w_inc.sum() > 0:
            w_inc = w_inc / w_inc.sum()
        if w_dec.sum() > 0:
            w_dec = w_dec / w_dec.sum()

    def add(r, target, rate):
        nonlocal redirected
        c = index.get(target)
        if c is None:
            clipped = tuple(max(-cap, min(cap, x)) for x in target)
            if clipped == states[r]:
                return  # projected onto itself: the move vanishes
            c = index.get(clipped)
            if c is None:
                return  # clipped state outside the model space; drop
            redirected += rate
        if c == r:
            return
        rows.append(r)
        cols.append(c)
        vals.append(rate)

    for r, s in enumerate(states):
        q = np.asarray(s, dtype=np.int64)
        for code, i, m, rate in model.transitions(q):
            if code in (INCREASE, DECREASE):
                j = pos_of(i, K)
                delta = m if code == INCREASE else -m
                target = s[:j] + (s[j] + delta,) + s[j + 1 :]
                add(r, target, rate)
            elif price_mode == "frozen":
                continue
            else:
                up = code == PRICE_UP
                tr = model.theta_reinit
                w = w_inc if up else w_dec
                if tr > 0:
                    for c2 in np.nonzero(w)[0]:
                        if c2 != r:
                            rows.append(r)
                            cols.append(int(c2))
                            vals.append(rate * tr * float(w[c2]))
                if tr < 1:
                    dist = model.pi_K if up else model.pi_minus_K
                    shifted = s[1:] if up else s[:-1]
                    tail_mass = 1.0
                    for mag in range(0, cap + 1):
                        l = dist.sign * mag
                        p = dist.pmf(l) if mag < cap else tail_mass
                        tail_mass -= dist.pmf(l)
                        target = shifted + (l,) if up else (l,) + shifted
                        add(r, target, rate * (1 - tr) * p)

    Q = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    diag = -np.asarray(Q.sum(axis=1)).ravel()
    Q = Q + sp.diags(diag)
    return TruncatedGenerator(
        states=states,
        index=index,
        Q=Q.tocsr(),
        cap=cap,
        price_mode=price_mode,
        redirected_rate=redirected,
    )


def stationary_solve(gen: TruncatedGenerator, residual_tol=1e-10):
    """Stationary distribution of the truncated generator.

    Verifies irreducibility by a strong-connectivity sweep, then solves
    pi Q = 0 with the normalization sum(pi) = 1.
    """
    Q = gen.Q
    n = Q.shape[0]
    if n == 1:
        return np.array([1.0])
    off = Q.copy()
    off.setdiag(0)
    off.eliminate_zeros()
    ncomp, labels = csgraph.connected_components(off, directed=True, connection="strong")
    if ncomp > 1:
        closed = []
        pattern = (off != 0).tocoo()
        out_edges = set()
        for r, c in zip(pattern.row, pattern.col):
            if labels[r] != labels[c]:
                out_edges.add(labels[r])
        for comp in range(ncomp):
            if comp not in out_edges:
                closed.append([gen.states[k] for k in np.nonzero(labels == comp)[0][:10]])
        raise ReducibleError(closed)
    A = Q.transpose().tolil()
    A[0, :] = 1.0
    b = np.zeros(n)
    b[0] = 1.0
    pi = spla.spsolve(A.tocsr(), b)
    residual = float(np.abs(pi @ Q).max())
    scale = float(np.abs(Q.data).max()) if Q.nnz else 1.0
    if residual > residual_tol * scale:
        raise IllConditionedError(residual, residual_tol * scale)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def normalize_measure(measure):
    """Normalize a dict state -> weight into a probability dict."""
    total = sum(measure.values())
    if total <= 0:
        raise ValueError("empty measure")
    return {k: v / total for k, v in measure.items()}


def tv_distance(p, q):
    """Total variation distance between two dict-valued distributions."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


@dataclass
class ShapeStatistics:
    mean_abs_q: dict  # signed index -> E|q_i|
    spread_hist: dict  # spread in ticks -> probability
    i_mid_hist: dict  # half-integer i_mid -> probability

    def to_dict(self):
        return {
            "mean_abs_q": {str(k): v for k, v in self.mean_abs_q.items()},
            "spread_hist": {str(k): v for k, v in self.spread_hist.items()},
            "i_mid_hist": {str(k): v for k, v in self.i_mid_hist.items()},
        }


def shape_statistics(measure, K=None, tick=1.0):
    """Book-shape statistics under a probability measure over states.

    Accepts a dict state -> weight (normalized internally) or a pair
    (states, probs) from the oracle.
    """
    if isinstance(measure, dict):
        dist = normalize_measure(measure)
        items = list(dist.items())
    else:
        states, probs = measure
        items = [(tuple(int(x) for x in s), float(p)) for s, p in zip(states, probs)]
    if not items:
        raise ValueError("empty measure")
    if K is None:
        K = len(items[0][0]) // 2
    mean_abs = {i: 0.0 for i in list(range(-K, 0)) + list(range(1, K + 1))}
    spread_hist = {}
    imid_hist = {}
    for s, p in items:
        for j in range(2 * K):
            i = j - K if j < K else j - K + 1
            mean_abs[i] += p * abs(s[j])
        ibb = best_bid_index(s, K)
        iba = best_ask_index(s, K)
        spread = iba - ibb - 1  # in ticks
        imid = (ibb + iba) / 2.0
        spread_hist[spread] = spread_hist.get(spread, 0.0) + p
        imid_hist[imid] = imid_hist.get(imid, 0.0) + p
    return ShapeStatistics(mean_abs_q=mean_abs, spread_hist=spread_hist, i_mid_hist=imid_hist)
