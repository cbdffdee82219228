"""Random-walk instrumentation for the buffered selection rule.

For a run of the buffered rule with buffer ``d`` define, in revelation order,

    X_i = 1 - x_i  if element i was active, else -x_i
    W_i = X_1 + ... + X_i          (actives above expectation)
    S_i = selected_count_i - prefix_i   (selections above expectation)

W - S counts active-but-discarded elements exactly, and the discard steps are
exactly the steps where ceil(W) first exceeds every earlier ceiling and the
buffer.  The reversed increments form a zero-mean walk with steps bounded by
1, which yields the first-passage tail bound checked here by Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adversary import Order
from .errors import BadParameters, IndexOutOfRange, SchemeMismatch
from .instance import Instance, Trace, compensated_cumsum
from .schemes import algorithm_d, simulate_batch

__all__ = [
    "WalkPair",
    "build_walks",
    "new_integral_heights",
    "reversed_process",
    "martingale_tail_estimate",
    "batch_walks",
    "snap_ceil",
]

#: Values within this distance of an integer are snapped before the ceiling;
#: prefix sums of generic reals only sit on integers through float noise.
INTEGER_SNAP = 1e-9


@dataclass
class WalkPair:
    W: np.ndarray
    S: np.ndarray
    d: float


def build_walks(trace: Trace, x_in_order: np.ndarray, d: float) -> WalkPair:
    """Reconstruct (W, S) from a trace of the buffered rule.

    Uses the same compensated prefix sums the policy itself used, so the
    eligibility arithmetic is bit-identical.
    """
    if not trace.scheme.startswith("algd"):
        raise SchemeMismatch(f"walks are defined for the buffered rule, got {trace.scheme}")
    x = np.asarray(x_in_order, dtype=np.float64)
    prefix = compensated_cumsum(x)
    active_cum = np.cumsum(trace.active.astype(np.int64))
    W = active_cum - prefix
    S = trace.count_after.astype(np.float64) - prefix
    return WalkPair(W=W, S=S, d=float(d))


def snap_ceil(W: np.ndarray) -> np.ndarray:
    """Ceiling with the integer-snap rule applied first."""
    W = np.asarray(W, dtype=np.float64)
    r = np.round(W)
    snapped = np.where(np.abs(W - r) <= INTEGER_SNAP, r, W)
    return np.ceil(snapped)


def new_integral_heights(W: np.ndarray, d: float) -> np.ndarray:
    """Indices where ceil(W) exceeds d and every earlier ceiling (0-based)."""
    c = snap_ceil(W)
    prev_max = np.concatenate([[-np.inf], np.maximum.accumulate(c)[:-1]])
    return np.where((c > d) & (c > prev_max))[0]


def reversed_process(W: np.ndarray, m: int) -> np.ndarray:
    """Q_i = W_{m-i-1} - W_{m-1} for i = 0..m-1, with W_0 = 0.

    ``m`` is 1-based (1 <= m <= n); Q_0 = 0 and Q_{m-1} = -W_{m-1}.
    """
    W = np.asarray(W, dtype=np.float64)
    n = len(W)
    if not (1 <= m <= n):
        raise IndexOutOfRange(f"m={m} outside [1, {n}]")
    padded = np.concatenate([[0.0], W])  # padded[j] = W_j with W_0 = 0
    idx = m - 1 - np.arange(m)  # W_{m-1}, W_{m-2}, ..., W_0
    return padded[idx] - padded[m - 1]


def batch_walks(inst: Instance, order: Order, d: float, trials: int, rng):
    """Simulate the buffered rule and return (active, selected, W, S) matrices.

    W and S are (trials, n) in revelation order; active/selected are in
    original index space as produced by ``simulate_batch``.
    """
    spec = algorithm_d(d)
    active, selected = simulate_batch(spec, inst, order, trials, rng)
    perm = order.static_permutation(inst.n)
    act_ord = active[:, perm]
    sel_ord = selected[:, perm]
    prefix = compensated_cumsum(np.asarray(inst.x)[perm])
    W = np.cumsum(act_ord.astype(np.int64), axis=1) - prefix[None, :]
    S = np.cumsum(sel_ord.astype(np.int64), axis=1) - prefix[None, :]
    return act_ord, sel_ord, W, S


def martingale_tail_estimate(
    inst: Instance, order: Order, d: float, a: float, trials: int, rng
):
    """Monte Carlo estimate of P(max_i Q_i < a and Q_{m-1} <= -(d-1)) at m = n.

    Returns (p_hat, stderr).  The first-passage bound (a + K) / (d - 1) with
    K = 1 should dominate the estimate up to sampling noise.
    """
    if a <= 0:
        raise BadParameters(f"a must be positive, got {a}")
    if d <= 1:
        raise BadParameters(f"need d > 1 for a negative finish level, got d={d}")
    if trials < 1000:
        raise BadParameters(f"trials must be >= 1000, got {trials}")
    perm = order.static_permutation(inst.n)
    x_ord = np.asarray(inst.x)[perm]
    active = (rng.uniform(size=(trials, inst.n)) < x_ord[None, :]).astype(np.int64)
    W = np.cumsum(active, axis=1) - compensated_cumsum(x_ord)[None, :]
    m = inst.n
    # Q values over i=1..m-1 are {W_0, ..., W_{m-2}} - W_{m-1}, with W_0 = 0.
    w_last = W[:, m - 1]
    # Column j of W holds W_{j+1}; the Q values over i=1..m-1 come from
    # W_0..W_{m-2}, i.e. zero plus the first m-2 columns.
    if m >= 3:
        run_max = np.maximum(np.max(W[:, : m - 2], axis=1), 0.0)
    else:
        run_max = np.zeros(trials)
    M = run_max - w_last
    q_final = -w_last
    hit = (M < a) & (q_final <= -(d - 1.0))
    p_hat = float(np.mean(hit))
    stderr = float(np.sqrt(p_hat * (1.0 - p_hat) / trials))
    return p_hat, stderr
