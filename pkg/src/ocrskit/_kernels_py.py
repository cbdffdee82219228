"""Pure-Python (numpy-vectorized) selection kernels.

Same contracts as the compiled versions in ``_kernels_cy``; the fallback
vectorizes across trials instead of compiling the per-trial loop.  Both
backends are bit-identical given the same inputs.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def select_count_policy(active, thr, q, demote_b, accept_coin=None, demote_coin=None):
    """Run a count-state threshold policy over a batch of trials.

    active: uint8 (trials, n); thr: float64 (n,) per-step eligibility threshold
    (select iff count+1 <= thr[i]); q: acceptance-coin probability; demote_b:
    pre-demotion survival probability (active elements are dropped with
    probability 1-demote_b before the policy sees them).  Coin matrices are
    uniforms in [0,1), only consulted when q < 1 / demote_b < 1.

    Returns selected as uint8 (trials, n).
    """
    active = np.asarray(active, dtype=np.uint8)
    trials, n = active.shape
    eff = active.astype(bool)
    if demote_b < 1.0:
        eff = eff & (np.asarray(demote_coin) < demote_b)
    selected = np.zeros((trials, n), dtype=np.uint8)
    count = np.zeros(trials, dtype=np.int64)
    for i in range(n):
        elig = eff[:, i] & (count + 1 <= thr[i])
        if q < 1.0:
            elig = elig & (accept_coin[:, i] < q)
        selected[:, i] = elig
        count += elig
    return selected


def select_partition_policy(active, part_id, quota, demote_b, demote_coin=None):
    """Greedy selection with per-part quotas, batched over trials.

    part_id: int64 (n,) part of each revealed step; quota: int64 (parts,).
    """
    active = np.asarray(active, dtype=np.uint8)
    trials, n = active.shape
    eff = active.astype(bool)
    if demote_b < 1.0:
        eff = eff & (np.asarray(demote_coin) < demote_b)
    selected = np.zeros((trials, n), dtype=np.uint8)
    counts = np.zeros((trials, len(quota)), dtype=np.int64)
    for i in range(n):
        p = int(part_id[i])
        elig = eff[:, i] & (counts[:, p] < quota[p])
        selected[:, i] = elig
        counts[:, p] += elig
    return selected
