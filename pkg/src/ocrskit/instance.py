"""Problem instances, activation sampling, and per-run traces.

An :class:`Instance` is an activation-probability vector ``x`` together with a
slot budget ``k`` and an optional partition structure (per-part quotas).  All
policies consume instances; everything downstream (prefix sums included) is
derived here once so every module sees bit-identical values.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BadPartition, BudgetExceeded, LengthMismatch, OutOfRangeProbability

__all__ = [
    "Instance",
    "ActivationPattern",
    "Trace",
    "validate_instance",
    "sample_activation",
    "compensated_cumsum",
]

#: Absolute slack allowed when checking sum(x) <= b*k.
BUDGET_SLACK = 1e-12


def compensated_cumsum(x: np.ndarray) -> np.ndarray:
    """Kahan (compensated) running sum of ``x``.

    Every policy and the walk instrumentation read prefix sums from this one
    routine so their thresholds agree to the last bit.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    total = 0.0
    comp = 0.0
    for i, v in enumerate(x.tolist()):
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i] = total
    return out


@dataclass(frozen=True)
class Instance:
    x: np.ndarray
    k: int
    b: Optional[float] = 1.0  # None: budget deliberately unchecked
    partition: Optional[tuple] = None  # tuple of (quota, frozenset of indices)

    @property
    def n(self) -> int:
        return len(self.x)

    def part_of(self) -> np.ndarray:
        """Part id per element (-1 when no partition)."""
        part = np.full(self.n, -1, dtype=np.int64)
        if self.partition is not None:
            for pid, (_, members) in enumerate(self.partition):
                for m in members:
                    part[m] = pid
        return part

    def quotas(self) -> np.ndarray:
        if self.partition is None:
            return np.array([], dtype=np.int64)
        return np.array([q for q, _ in self.partition], dtype=np.int64)

    def digest(self) -> str:
        payload = {
            "x": [repr(float(v)) for v in self.x],
            "k": int(self.k),
            "b": None if self.b is None else repr(float(self.b)),
            "partition": None
            if self.partition is None
            else [[int(q), sorted(int(m) for m in members)] for q, members in self.partition],
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "k": int(self.k),
            "b": None if self.b is None else float(self.b),
            "x": [float(v) for v in self.x],
        }
        if self.partition is not None:
            d["partition"] = [
                {"quota": int(q), "members": sorted(int(m) for m in members)}
                for q, members in self.partition
            ]
        return d

    @staticmethod
    def from_dict(d: dict) -> "Instance":
        partition = None
        if d.get("partition") is not None:
            partition = [(p["quota"], p["members"]) for p in d["partition"]]
        inst = validate_instance(d["x"], d["k"], d.get("b", 1.0), partition=partition)
        if "n" in d and d["n"] != inst.n:
            raise LengthMismatch(f"declared n={d['n']} but len(x)={inst.n}")
        return inst


def validate_instance(
    x: Sequence[float],
    k: int,
    b: Optional[float] = 1.0,
    partition: Optional[Sequence] = None,
) -> Instance:
    """Validate and build an :class:`Instance`.

    Checks 0 <= x_i <= 1, sum(x) <= b*k (absolute slack 1e-12), and partition
    well-formedness (disjoint parts covering all indices, quotas summing to k).
    Pass ``b=None`` to skip the budget check entirely (for deliberately
    over-budget inputs exercising the uncapped regime).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise LengthMismatch("x must be one-dimensional")
    k = int(k)
    if k < 1:
        raise BudgetExceeded(0.0, float(k))
    if b is not None and not (0.0 < b <= 1.0):
        raise BudgetExceeded(float(np.sum(x)), b * k)
    bad = np.where((x < 0.0) | (x > 1.0))[0]
    if bad.size:
        i = int(bad[0])
        raise OutOfRangeProbability(i, float(x[i]))
    total = float(compensated_cumsum(x)[-1]) if len(x) else 0.0
    if b is not None and total > b * k + BUDGET_SLACK:
        raise BudgetExceeded(total, b * k)

    part_norm = None
    if partition is not None:
        seen = set()
        quota_sum = 0
        parts = []
        for entry in partition:
            q, members = entry
            q = int(q)
            if q < 0:
                raise BadPartition(f"negative quota {q}")
            members = tuple(int(m) for m in members)
            for m in members:
                if m < 0 or m >= len(x):
                    raise BadPartition(f"member index {m} out of range")
                if m in seen:
                    raise BadPartition(f"index {m} appears in two parts")
                seen.add(m)
            quota_sum += q
            parts.append((q, frozenset(members)))
        if len(seen) != len(x):
            raise BadPartition("parts do not cover all indices")
        if quota_sum != k:
            raise BadPartition(f"quotas sum to {quota_sum}, expected k={k}")
        part_norm = tuple(parts)

    x.setflags(write=False)
    return Instance(x=x, k=k, b=None if b is None else float(b), partition=part_norm)


@dataclass(frozen=True)
class ActivationPattern:
    bits: np.ndarray  # uint8, length n

    def __post_init__(self):
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=np.uint8))


def sample_activation(inst: Instance, rng) -> ActivationPattern:
    """Draw one activation pattern; bit i is 1 with probability x_i."""
    u = rng.uniform(size=inst.n)
    return ActivationPattern(bits=(u < inst.x).astype(np.uint8))


@dataclass
class Trace:
    """Per-step record of one policy run (indices are original element ids)."""

    scheme: str
    k: int
    index: np.ndarray  # revealed element index, int64
    active: np.ndarray  # bool
    eligible: np.ndarray  # bool
    coin: list  # per step: True/False when a coin was drawn, else None
    selected: np.ndarray  # bool
    count_after: np.ndarray  # int64
    capped: bool = True  # whether the scheme guarantees count <= k

    def validate(self) -> None:
        count = self.count_after
        n = len(count)
        prev = np.concatenate([[0], count[:-1]])
        if not np.all((count - prev) == self.selected.astype(np.int64)):
            raise AssertionError("count_after must increment by 1 exactly on selected steps")
        if np.any(self.selected & ~self.active):
            raise AssertionError("inactive elements must never be selected")
        if self.capped and n and int(count.max()) > self.k:
            raise AssertionError("selected count exceeded the budget k")
