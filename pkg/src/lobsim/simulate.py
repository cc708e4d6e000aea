"""Exact event-by-event simulation of the order-book Markov process.

Sampling uses competing exponential clocks collapsed into a single
exponential waiting time plus a categorical draw over the enumerated
transitions, which has the same law as per-transition clocks.  One
uniform draw is always consumed for the reinitialization decision on a
price move, even when θ^reinit is 0 or 1, so that RNG streams stay
aligned across parameter changes.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .book import (
    DECREASE,
    INCREASE,
    PRICE_DOWN,
    PRICE_UP,
    Event,
    LobState,
    in_state_space,
    pos_of,
    validate_state,
)
from .errors import AbsorbingStateError, InvalidEventError

__all__ = [
    "EventRecord",
    "PathSummary",
    "CsvEventSink",
    "sample_next",
    "apply_event",
    "simulate",
    "batch_simulate",
]

_CODE_TO_KIND = {INCREASE: "inc", DECREASE: "dec", PRICE_UP: "up", PRICE_DOWN: "down"}
_KIND_TO_CODE = {v: k for k, v in _CODE_TO_KIND.items()}


@dataclass
class EventRecord:
    seq: int
    t: float
    tau: float
    event: Event
    c: float  # price increment in price units: -tick, 0 or +tick
    p_ref: float
    post_q: np.ndarray | None = None


@dataclass
class PathSummary:
    """Embedded-chain extracts of one simulated path."""

    c: np.ndarray  # per-event price increments in ticks (-1, 0, +1)
    tau: np.ndarray  # waiting times
    n_events: int
    t_final: float
    initial: LobState
    final: LobState
    occupation: dict = field(default_factory=dict)  # tuple(q) -> holding time
    absorbed: bool = False
    error: str | None = None
    seed: object = None

    @property
    def tick(self):
        return self.initial.tick

    def Z(self):
        """Cumulative price change after each event, in ticks."""
        return np.cumsum(self.c.astype(np.int64))

    def event_times(self):
        return np.cumsum(self.tau)

    def N_of_t(self, t):
        """Number of events up to time t."""
        return int(np.searchsorted(self.event_times(), t, side="right"))

    def Z_at_time(self, t):
        """p_ref(t) - p_ref(0) in ticks."""
        n = self.N_of_t(t)
        return int(self.c[:n].astype(np.int64).sum())


class CsvEventSink:
    """Event-log sink writing the CSV compatibility contract.

    Columns: seq,t,tau,kind,index,size,c,p_ref and optionally the queue
    vector.  Floats are serialized with 17 significant digits.
    """

    def __init__(self, fh, K, include_q=True):
        self.fh = fh
        self.K = K
        self.include_q = include_q
        cols = ["seq", "t", "tau", "kind", "index", "size", "c", "p_ref"]
        if include_q:
            cols += [f"q_{i}" for i in range(-K, 0)] + [f"q_{i}" for i in range(1, K + 1)]
        fh.write(",".join(cols) + "\n")

    def write(self, rec: EventRecord):
        row = [
            str(rec.seq),
            f"{rec.t:.17g}",
            f"{rec.tau:.17g}",
            rec.event.kind,
            str(rec.event.index),
            str(rec.event.size),
            f"{rec.c:.17g}",
            f"{rec.p_ref:.17g}",
        ]
        if self.include_q:
            if rec.post_q is not None:
                row += [str(int(x)) for x in rec.post_q]
            else:
                row += [""] * (2 * self.K)
        self.fh.write(",".join(row) + "\n")


def sample_next(model, q, rng):
    """Waiting time and next event at state q.

    tau ~ Exp(total rate); the event is drawn categorically with
    probability rate / total over the enumerated transitions.
    """
    trans = model.transitions(q)
    total = sum(t[3] for t in trans)
    if total <= 0:
        raise AbsorbingStateError(q)
    tau = rng.exponential(1.0 / total)
    x = rng.uniform(0.0, total)
    acc = 0.0
    chosen = trans[-1]
    for t in trans:
        acc += t[3]
        if x < acc:
            chosen = t
            break
    code, i, n, _ = chosen
    return tau, Event(kind=_CODE_TO_KIND[code], index=i, size=n)


def _apply_price_move(model, q, up, rng):
    """Resolve a price move: returns (new q, mode, fill, redrawn)."""
    reinit = rng.random() < model.theta_reinit  # always consumed
    K = model.K
    if reinit:
        dist = model.pi_inc if up else model.pi_dec
        q2 = np.asarray(dist.sample(rng), dtype=np.int64)
        return q2, "reinit", None, tuple(int(x) for x in q2)
    if up:
        l = model.pi_K.sample(rng)
        q2 = np.empty_like(q)
        q2[:-1] = q[1:]
        q2[-1] = l
    else:
        l = model.pi_minus_K.sample(rng)
        q2 = np.empty_like(q)
        q2[1:] = q[:-1]
        q2[0] = l
    return q2, "shift", int(l), None


def apply_event(model, state, event, rng):
    """Apply one enumerated event; returns (new state, resolved event).

    Pure jumps change one queue size; price moves shift the indexing
    frame (boundary fill from π_K / π_-K) or redraw the whole book
    (π^inc / π^dec) and move p_ref by exactly one tick.
    """
    q = state.q
    p_half = state.p_ref_half
    code = _KIND_TO_CODE[event.kind]
    if code in (INCREASE, DECREASE):
        j = pos_of(event.index, model.K)
        delta = event.size if code == INCREASE else -event.size
        q2 = q.copy()
        q2[j] += delta
        if not (in_state_space(q2, model.K) and model.in_support(q2)):
            raise InvalidEventError(
                f"{event.kind}({event.index},{event.size}) leaves the state space at q={tuple(q)}"
            )
        return LobState(q=q2, p_ref_half=p_half, tick=state.tick), event
    up = code == PRICE_UP
    q2, mode, fill, redrawn = _apply_price_move(model, q, up, rng)
    p2 = p_half + (2 if up else -2)
    resolved = Event(kind=event.kind, mode=mode, fill=fill, redrawn=redrawn)
    return LobState(q=q2, p_ref_half=p2, tick=state.tick), resolved


def simulate(
    model,
    initial: LobState,
    *,
    max_events=None,
    max_time=None,
    rng=None,
    seed=None,
    sink=None,
    record_occupation=True,
    record_embedded=True,
    post_state_every=1,
    validate_each=False,
):
    """Run one path until the stop criterion; returns a PathSummary.

    Exactly reproducible from (model, initial, seed).  On an absorbing
    state the partial summary is returned with the flag set.
    """
    if max_events is None and max_time is None:
        raise ValueError("need max_events or max_time")
    if rng is None:
        rng = np.random.default_rng(seed)
    K = model.K
    tick = initial.tick
    q = initial.q.copy()
    p_half = initial.p_ref_half
    t = 0.0
    n = 0
    cs, taus = [], []
    occupation = {}
    absorbed = False
    while True:
        if max_events is not None and n >= max_events:
            break
        trans = model.transitions(q)
        total = 0.0
        for tr in trans:
            total += tr[3]
        if total <= 0:
            absorbed = True
            break
        tau = rng.exponential(1.0 / total)
        if max_time is not None and t + tau > max_time:
            if record_occupation:
                key = tuple(int(x) for x in q)
                occupation[key] = occupation.get(key, 0.0) + (max_time - t)
            t = max_time
            break
        x = rng.uniform(0.0, total)
        acc = 0.0
        chosen = trans[-1]
        for tr in trans:
            acc += tr[3]
            if x < acc:
                chosen = tr
                break
        if record_occupation:
            key = tuple(int(x) for x in q)
            occupation[key] = occupation.get(key, 0.0) + tau
        code, i, sz, _ = chosen
        c_tick = 0
        mode = fill = redrawn = None
        if code == INCREASE:
            q[pos_of(i, K)] += sz
        elif code == DECREASE:
            q[pos_of(i, K)] -= sz
        else:
            up = code == PRICE_UP
            q, mode, fill, redrawn = _apply_price_move(model, q, up, rng)
            c_tick = 1 if up else -1
            p_half += 2 * c_tick
        t += tau
        n += 1
        if validate_each:
            validate_state(q, K)
            if not model.in_support(q):
                raise InvalidEventError(f"state left the model support: q={tuple(q)}")
        if record_embedded:
            cs.append(c_tick)
            taus.append(tau)
        if sink is not None:
            post_q = q.copy() if (post_state_every and n % post_state_every == 0) else None
            sink.write(
                EventRecord(
                    seq=n,
                    t=t,
                    tau=tau,
                    event=Event(
                        kind=_CODE_TO_KIND[code], index=i, size=sz,
                        mode=mode, fill=fill, redrawn=redrawn,
                    ),
                    c=c_tick * tick,
                    p_ref=p_half * tick / 2.0,
                    post_q=post_q,
                )
            )
    return PathSummary(
        c=np.array(cs, dtype=np.int8),
        tau=np.array(taus, dtype=np.float64),
        n_events=n,
        t_final=t,
        initial=initial.copy(),
        final=LobState(q=q.copy(), p_ref_half=p_half, tick=tick),
        occupation=occupation,
        absorbed=absorbed,
        seed=seed,
    )


def _worker_count(workers):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("LOBSIM_MAX_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def batch_simulate(
    model,
    initial: LobState,
    n_paths,
    *,
    max_events=None,
    max_time=None,
    base_seed=0,
    workers=None,
    **kwargs,
):
    """Independent paths with per-path seeds spawned from base_seed.

    Results are identical regardless of worker count or execution
    order: path k always uses the k-th spawned seed sequence.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    seeds = np.random.SeedSequence(base_seed).spawn(n_paths)

    def run_one(k):
        try:
            return simulate(
                model,
                initial,
                max_events=max_events,
                max_time=max_time,
                rng=np.random.default_rng(seeds[k]),
                seed=(base_seed, k),
                **kwargs,
            )
        except Exception as exc:  # aggregate, do not abort the batch
            return PathSummary(
                c=np.array([], dtype=np.int8),
                tau=np.array([], dtype=np.float64),
                n_events=0,
                t_final=0.0,
                initial=initial.copy(),
                final=initial.copy(),
                absorbed=isinstance(exc, AbsorbingStateError),
                error=str(exc),
                seed=(base_seed, k),
            )

    nw = _worker_count(workers)
    if nw == 1:
        return [run_one(k) for k in range(n_paths)]
    with ThreadPoolExecutor(max_workers=nw) as pool:
        return list(pool.map(run_one, range(n_paths)))
