"""The online selection policies.

Five named schemes share one count-state shape: an element is selected iff it
is active (and survives an optional pre-demotion coin), the running selected
count satisfies ``count + 1 <= thr[i]``, and an optional acceptance coin lands.

  naive greedy          thr[i] = k,                          q = 1
  partition greedy      per-part quotas (separate profile),  q = 1
  buffered rule (d)     thr[i] = prefix[i] + d,              q = 1
  simple scheme         thr[i] = (1-1/sqrt(k))*prefix[i] + sqrt(k),  q = 1-1/sqrt(k)
  scaled wrapper (b)    demote actives w.p. 1-b, then run the inner scheme
                        on the scaled probabilities b*x

``prefix`` is the compensated running sum of the activation probabilities in
revelation order.  The scaled wrapper draws its demotion coin before the inner
scheme is consulted; acceptance coins are drawn only after the eligibility
check passes, so traces record them only on eligible steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .adversary import Order
from .errors import MissingPartition, UnsupportedOrder, UnsupportedScheme
from .instance import ActivationPattern, Instance, Trace, compensated_cumsum

__all__ = [
    "SchemeSpec",
    "simple_ocrs",
    "algorithm_d",
    "naive_greedy",
    "partition_greedy",
    "scaled_greedy",
    "scale_reduction",
    "bind",
    "BoundPolicy",
    "simulate_batch",
    "select_batch",
    "selectability_floor",
    "parse_scheme",
]


@dataclass(frozen=True)
class SchemeSpec:
    kind: str  # "simple" | "algd" | "greedy" | "partition" | "scaled"
    d: Optional[float] = None
    b: Optional[float] = None
    inner: Optional["SchemeSpec"] = None

    def __str__(self):
        if self.kind == "algd":
            return f"algd:d={self.d:g}"
        if self.kind == "scaled":
            if self.inner is not None and self.inner.kind == "greedy":
                return f"scaled:b={self.b:g}"
            return f"scaled[{self.inner}]:b={self.b:g}"
        return self.kind


def simple_ocrs() -> SchemeSpec:
    return SchemeSpec(kind="simple")


def algorithm_d(d: float) -> SchemeSpec:
    if not d > 0:
        raise UnsupportedScheme(f"buffer d must be positive, got {d}")
    return SchemeSpec(kind="algd", d=float(d))


def naive_greedy() -> SchemeSpec:
    return SchemeSpec(kind="greedy")


def partition_greedy() -> SchemeSpec:
    return SchemeSpec(kind="partition")


def scale_reduction(inner: SchemeSpec, b: float) -> SchemeSpec:
    """Wrap ``inner``: demote each arriving active element w.p. 1-b first."""
    if not (0.0 <= b <= 1.0):
        raise UnsupportedScheme(f"scale b must be in [0, 1], got {b}")
    return SchemeSpec(kind="scaled", b=float(b), inner=inner)


def scaled_greedy(b: float) -> SchemeSpec:
    return scale_reduction(naive_greedy(), b)


@dataclass
class Profile:
    """A scheme bound to (instance, revelation order): everything a kernel or
    DP needs to reproduce its decisions."""

    shape: str  # "count" | "partition"
    scheme: str
    k: int
    q: float = 1.0
    demote_b: float = 1.0
    thr: Optional[np.ndarray] = None  # count shape: per-step threshold
    x_order: Optional[np.ndarray] = None  # original x in revelation order
    part_id: Optional[np.ndarray] = None  # partition shape
    quotas: Optional[np.ndarray] = None
    capped: bool = True  # whether count <= k is structurally guaranteed

    @property
    def x_eff(self) -> np.ndarray:
        """Activation probabilities as seen past the demotion coin."""
        return self.demote_b * self.x_order


def _count_threshold(spec: SchemeSpec, k: int, prefix: np.ndarray, scale: float):
    """Threshold array, acceptance prob, and cap flag for a count scheme.

    ``scale`` is the accumulated demotion probability: the inner scheme sees
    prefix sums of the scaled probabilities ``scale * x``.
    """
    n = len(prefix)
    if spec.kind == "greedy":
        return np.full(n, float(k)), 1.0, True
    if spec.kind == "algd":
        thr = scale * prefix + spec.d
        # Feasible (count <= k) only when sum(scale*x) <= k - d.
        capped = bool(n == 0 or scale * prefix[-1] + spec.d <= k + 1e-12)
        return thr, 1.0, capped
    if spec.kind == "simple":
        rt = math.sqrt(k)
        b = 1.0 - 1.0 / rt
        thr = (b * scale) * prefix + rt
        return thr, b, True
    raise UnsupportedScheme(f"{spec.kind} is not a count-state scheme")


def _flatten(spec: SchemeSpec):
    """Peel scaled wrappers: returns (base spec, accumulated demote prob)."""
    demote = 1.0
    while spec.kind == "scaled":
        demote *= spec.b
        spec = spec.inner
    return spec, demote


def bind(spec: SchemeSpec, inst: Instance, perm: np.ndarray) -> "BoundPolicy":
    """Bind a scheme to an instance and a concrete revelation permutation."""
    base, demote = _flatten(spec)
    x_order = np.asarray(inst.x, dtype=np.float64)[perm]
    if base.kind == "partition":
        if inst.partition is None:
            raise MissingPartition("instance has no partition structure")
        part_all = inst.part_of()
        profile = Profile(
            shape="partition",
            scheme=str(spec),
            k=inst.k,
            demote_b=demote,
            x_order=x_order,
            part_id=part_all[perm],
            quotas=inst.quotas(),
        )
    else:
        prefix = compensated_cumsum(x_order)
        thr, q, capped = _count_threshold(base, inst.k, prefix, demote)
        profile = Profile(
            shape="count",
            scheme=str(spec),
            k=inst.k,
            q=q,
            demote_b=demote,
            thr=thr,
            x_order=x_order,
            capped=capped,
        )
    return BoundPolicy(spec=spec, inst=inst, perm=np.asarray(perm, dtype=np.int64), profile=profile)


@dataclass
class BoundPolicy:
    spec: SchemeSpec
    inst: Instance
    perm: np.ndarray
    profile: Profile

    def run_trace(self, pattern: ActivationPattern, rng) -> Trace:
        """Sequential single-trial run with full per-step recording.

        Coins are drawn lazily: the demotion coin only on active arrivals, the
        acceptance coin only once eligibility holds.
        """
        p = self.profile
        n = len(self.perm)
        bits = pattern.bits[self.perm].astype(bool)
        eligible = np.zeros(n, dtype=bool)
        selected = np.zeros(n, dtype=bool)
        coins: list = [None] * n
        count_after = np.zeros(n, dtype=np.int64)
        count = 0
        part_counts = None if p.quotas is None else np.zeros(len(p.quotas), dtype=np.int64)
        for i in range(n):
            take = False
            if bits[i]:
                survives = True
                if p.demote_b < 1.0:
                    survives = rng.coin(p.demote_b)
                if survives:
                    if p.shape == "count":
                        if count + 1 <= p.thr[i]:
                            eligible[i] = True
                            if p.q < 1.0:
                                coins[i] = rng.coin(p.q)
                                take = coins[i]
                            else:
                                take = True
                    else:
                        pid = p.part_id[i]
                        if part_counts[pid] < p.quotas[pid]:
                            eligible[i] = True
                            take = True
                            part_counts[pid] += 1
            if take:
                selected[i] = True
                count += 1
            count_after[i] = count
        return Trace(
            scheme=str(self.spec),
            k=self.inst.k,
            index=self.perm.copy(),
            active=bits,
            eligible=eligible,
            coin=coins,
            selected=selected,
            count_after=count_after,
            capped=p.capped,
        )


def _order_keys(order: Order, active: np.ndarray) -> np.ndarray:
    """Per-trial stable-sort keys realizing an activation-dependent order."""
    trials, n = active.shape
    inactive = (active == 0)
    if order.kind == "actives_first":
        return inactive.astype(np.int8)
    if order.kind == "targeted_actives_first":
        t = order.target
        key = np.where(inactive, 2, 0).astype(np.int8)
        key[:, t] = np.where(inactive[:, t], 3, 1)
        return key
    raise UnsupportedOrder(f"unknown activation-dependent order {order.kind}")


def simulate_batch(spec: SchemeSpec, inst: Instance, order: Order, trials: int, rng):
    """Run ``trials`` independent simulations; returns (active, selected) as
    uint8 matrices in *original element index* space.

    Activation-dependent orders are only supported for schemes whose
    thresholds do not depend on the revelation-order prefix sums (the greedy
    family); anything else raises ``UnsupportedOrder``.
    """
    active = (rng.uniform(size=(trials, inst.n)) < inst.x).astype(np.uint8)
    return active, select_batch(spec, inst, order, active, rng)


def select_batch(spec: SchemeSpec, inst: Instance, order: Order, active: np.ndarray, rng):
    """Batched selection for externally supplied activation matrices."""
    n = inst.n
    base, demote = _flatten(spec)

    if order.activation_independent:
        perm = order.static_permutation(n)
        bound = bind(spec, inst, perm)
        act_ord = np.ascontiguousarray(active[:, perm])
        sel_ord = _run_kernel(bound.profile, act_ord, rng)
        selected = np.zeros_like(active)
        selected[:, perm] = sel_ord
        return selected

    if base.kind not in ("greedy", "partition"):
        raise UnsupportedOrder(
            f"{order.kind} order is only supported for the greedy family, not {base.kind}"
        )
    keys = _order_keys(order, active)
    ordperm = np.argsort(keys, axis=1, kind="stable")
    act_ord = np.take_along_axis(active, ordperm, axis=1)
    # Thresholds/quotas are order-independent for the greedy family, so one
    # profile (bound at identity) serves every per-trial permutation; for the
    # partition shape the per-step part ids are permuted per trial.
    bound = bind(spec, inst, np.arange(n, dtype=np.int64))
    prof = bound.profile
    if prof.shape == "count":
        sel_ord = _run_kernel(prof, np.ascontiguousarray(act_ord), rng)
    else:
        part_all = inst.part_of()
        sel_ord = np.zeros_like(act_ord)
        # Part ids vary per trial under a realized order; fall back to a
        # per-trial kernel call batched by identical permutations is not worth
        # it -- demote coins are drawn inside, so run row by row.
        dc = rng.uniform(size=act_ord.shape) if prof.demote_b < 1.0 else None
        for t in range(act_ord.shape[0]):
            pid = part_all[ordperm[t]]
            sel_ord[t : t + 1] = kernels.select_partition_policy(
                act_ord[t : t + 1],
                pid,
                prof.quotas,
                prof.demote_b,
                None if dc is None else dc[t : t + 1],
            )
    selected = np.zeros_like(active)
    np.put_along_axis(selected, ordperm, sel_ord, axis=1)
    return selected


def _run_kernel(prof: Profile, act_ord: np.ndarray, rng) -> np.ndarray:
    """Dispatch one batched simulation to the kernel backend."""
    trials, n = act_ord.shape
    demote_coin = rng.uniform(size=(trials, n)) if prof.demote_b < 1.0 else None
    if prof.shape == "partition":
        return kernels.select_partition_policy(
            act_ord, prof.part_id, prof.quotas, prof.demote_b, demote_coin
        )
    accept_coin = rng.uniform(size=(trials, n)) if prof.q < 1.0 else None
    return kernels.select_count_policy(
        act_ord, prof.thr, prof.q, prof.demote_b, accept_coin, demote_coin
    )


def selectability_floor(spec: SchemeSpec, k: int) -> float:
    """Proven conditional-selectability floor for a scheme at budget k.

    Returns nan when no finite guarantee applies (greedy family without
    scaling, or a buffer too small for the bound to be meaningful).
    """
    base, demote = _flatten(spec)
    if base.kind == "simple":
        rt = math.sqrt(k)
        if rt <= 1:
            return float("nan")
        return demote * (1.0 - 1.0 / rt) * (1.0 - 2.0 / (rt - 1.0))
    if base.kind == "algd":
        if base.d <= 1:
            return float("nan")
        return demote * (1.0 - 2.0 / (base.d - 1.0))
    return float("nan")


def parse_scheme(text: str) -> SchemeSpec:
    """Parse CLI scheme syntax: simple | algd:d=V | greedy | partition | scaled:b=V."""
    text = text.strip()
    if text == "simple":
        return simple_ocrs()
    if text == "greedy":
        return naive_greedy()
    if text == "partition":
        return partition_greedy()
    if text.startswith("algd"):
        return algorithm_d(_param(text, "d"))
    if text.startswith("scaled"):
        return scaled_greedy(_param(text, "b"))
    raise UnsupportedScheme(f"unknown scheme spec {text!r}")


def _param(text: str, name: str) -> float:
    _, _, rest = text.partition(":")
    for piece in rest.split(","):
        key, _, val = piece.partition("=")
        if key.strip() == name:
            return float(val)
    raise UnsupportedScheme(f"scheme spec {text!r} is missing parameter {name}")
