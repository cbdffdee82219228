"""Ground-truth conditional selectability.

Three routes to P(selected | active) per element:

  * an exact dynamic program over the selected-count distribution, valid
    because every supported scheme's decision depends on history only through
    that count (per-part counts for the partition scheme);
  * a brute-force oracle that enumerates activation patterns of each
    element's predecessors (exact, n <= 12), integrating acceptance coins by
    propagating a count distribution within each pattern;
  * Monte Carlo with per-element binomial standard errors.

Conditional probabilities are computed as q * P(count eligible) directly, so
no division by a possibly tiny x_i ever happens in the DP or oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .adversary import Order
from .errors import TooLarge, UnsupportedOrder
from .instance import Instance
from .schemes import SchemeSpec, bind, simulate_batch

__all__ = [
    "SelectabilityReport",
    "exact_selectability_dp",
    "brute_force_selectability",
    "mc_selectability",
]

BRUTE_FORCE_MAX_N = 12


@dataclass
class SelectabilityReport:
    per_element: np.ndarray  # conditional selection probability, original index space
    min_value: float
    method: str  # "ExactDP" | "BruteForce" | "MonteCarlo"
    scheme: str
    order: str
    instance_digest: str
    trials: Optional[int] = None
    stderr: Optional[np.ndarray] = None  # MonteCarlo only
    never_active: Optional[np.ndarray] = None  # MonteCarlo only: bool flags
    feasibility_warning: Optional[str] = None

    @staticmethod
    def build(per_element, method, spec, order, inst, **kw) -> "SelectabilityReport":
        # The DP arithmetic can land 1 ulp outside [0, 1]; probabilities are
        # clamped so the reported values honor the range invariant.
        per_element = np.clip(np.asarray(per_element, dtype=np.float64), 0.0, 1.0)
        return SelectabilityReport(
            per_element=per_element,
            min_value=float(np.min(per_element)) if per_element.size else float("nan"),
            method=method,
            scheme=str(spec),
            order=str(order),
            instance_digest=inst.digest(),
            **kw,
        )


def _static_perm(inst: Instance, order: Order) -> np.ndarray:
    if not order.activation_independent:
        raise UnsupportedOrder(
            "exact methods need an activation-independent order (identity or fixed)"
        )
    return order.static_permutation(inst.n)


def _feasibility_warning(prof) -> Optional[str]:
    if prof.shape == "count" and not prof.capped:
        return (
            "instance violates the feasibility precondition for this buffer: "
            "the selected count may exceed k"
        )
    return None


def _count_dp_conditionals(prof) -> np.ndarray:
    """Exact per-step conditionals for a count-state profile (O(n*k))."""
    n = len(prof.x_order)
    cap = prof.k if prof.capped else n
    counts_plus1 = np.arange(cap + 1, dtype=np.float64) + 1.0
    dist = np.zeros(cap + 1)
    dist[0] = 1.0
    x_eff = prof.x_eff
    cond = np.empty(n)
    for i in range(n):
        elig = counts_plus1 <= prof.thr[i]
        p_elig = float(dist @ elig)
        cond[i] = prof.demote_b * prof.q * p_elig
        move = dist * elig * (x_eff[i] * prof.q)
        dist = dist - move
        dist[1:] += move[:-1]
    return cond


def _partition_dp_conditionals(prof) -> np.ndarray:
    """Per-part exact DP: parts evolve independently under per-part quotas."""
    n = len(prof.x_order)
    cond = np.empty(n)
    x_eff = prof.x_eff
    for pid, quota in enumerate(prof.quotas):
        steps = np.where(prof.part_id == pid)[0]
        dist = np.zeros(int(quota) + 1)
        dist[0] = 1.0
        for i in steps:
            p_elig = 1.0 - dist[quota] if quota > 0 else 0.0
            cond[i] = prof.demote_b * p_elig
            move = dist.copy()
            move[quota:] = 0.0
            move *= x_eff[i]
            dist = dist - move
            dist[1:] += move[:-1]
    return cond


def exact_selectability_dp(inst: Instance, spec: SchemeSpec, order: Order) -> SelectabilityReport:
    """Exact DP over the selected-count distribution."""
    perm = _static_perm(inst, order)
    prof = bind(spec, inst, perm).profile
    if prof.shape == "count":
        cond = _count_dp_conditionals(prof)
    else:
        cond = _partition_dp_conditionals(prof)
    per_element = np.empty(inst.n)
    per_element[perm] = cond
    return SelectabilityReport.build(
        per_element,
        "ExactDP",
        spec,
        order,
        inst,
        feasibility_warning=_feasibility_warning(prof),
    )


def _pattern_matrix(j: int) -> np.ndarray:
    """All 2**j activation patterns of j predecessor elements, as (2**j, j)."""
    return ((np.arange(2**j)[:, None] >> np.arange(j)) & 1).astype(np.float64)


def _brute_cond_prefix(x_prev, elig_masks, elig_at, sel_scale, demote_q):
    """Conditional at one position given its relevant predecessors.

    x_prev: activation probs of the predecessors in order; elig_masks[t]:
    boolean eligibility over counts 0..len(x_prev) at predecessor step t;
    elig_at: eligibility mask at the target step; sel_scale: per-arrival
    selection probability past activation (demote * q); demote_q: the same
    factor applied at the target.
    """
    j = len(x_prev)
    pats = _pattern_matrix(j)
    w = np.prod(np.where(pats == 1.0, x_prev, 1.0 - np.asarray(x_prev)), axis=1)
    dist = np.zeros((2**j, j + 1))
    dist[:, 0] = 1.0
    for t in range(j):
        p_sel = pats[:, t] * sel_scale  # 0 when inactive in the pattern
        move = dist * elig_masks[t][None, :] * p_sel[:, None]
        dist = dist - move
        dist[:, 1:] += move[:, :-1]
    p_elig = dist @ elig_at
    return demote_q * float(w @ p_elig)


def brute_force_selectability(
    inst: Instance, spec: SchemeSpec, order: Order
) -> SelectabilityReport:
    """Enumerate predecessor activation patterns; exact for n <= 12."""
    if inst.n > BRUTE_FORCE_MAX_N:
        raise TooLarge(f"brute force supports n <= {BRUTE_FORCE_MAX_N}, got n={inst.n}")
    perm = _static_perm(inst, order)
    prof = bind(spec, inst, perm).profile
    n = inst.n
    cond = np.empty(n)
    if prof.shape == "count":
        sel_scale = prof.demote_b * prof.q
        for pos in range(n):
            counts_plus1 = np.arange(pos + 1, dtype=np.float64) + 1.0
            elig_masks = [counts_plus1 <= prof.thr[t] for t in range(pos)]
            elig_at = counts_plus1 <= prof.thr[pos]
            cond[pos] = _brute_cond_prefix(
                prof.x_order[:pos], elig_masks, elig_at, sel_scale, sel_scale
            )
    else:
        for pos in range(n):
            pid = prof.part_id[pos]
            quota = int(prof.quotas[pid])
            prev = [t for t in range(pos) if prof.part_id[t] == pid]
            counts_plus1 = np.arange(len(prev) + 1, dtype=np.float64) + 1.0
            elig = counts_plus1 <= quota
            cond[pos] = _brute_cond_prefix(
                prof.x_order[prev],
                [elig] * len(prev),
                elig,
                prof.demote_b,
                prof.demote_b,
            )
    per_element = np.empty(n)
    per_element[perm] = cond
    return SelectabilityReport.build(
        per_element,
        "BruteForce",
        spec,
        order,
        inst,
        feasibility_warning=_feasibility_warning(prof),
    )


def mc_selectability(
    inst: Instance, spec: SchemeSpec, order: Order, trials: int, rng
) -> SelectabilityReport:
    """Monte Carlo conditional frequencies with binomial standard errors."""
    active, selected = simulate_batch(spec, inst, order, trials, rng)
    n_active = active.sum(axis=0).astype(np.float64)
    n_sel = selected.sum(axis=0).astype(np.float64)
    never = n_active == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(never, np.nan, n_sel / np.maximum(n_active, 1.0))
        se = np.where(never, np.nan, np.sqrt(p * (1.0 - p) / np.maximum(n_active, 1.0)))
    observed = p[~never]
    report = SelectabilityReport(
        per_element=p,
        min_value=float(np.min(observed)) if observed.size else float("nan"),
        method="MonteCarlo",
        scheme=str(spec),
        order=str(order),
        instance_digest=inst.digest(),
        trials=int(trials),
        stderr=se,
        never_active=never,
    )
    return report
