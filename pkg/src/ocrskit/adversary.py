"""Revelation-order generators.

``identity`` and ``fixed`` orders commit before anything is realized and never
look at the activation pattern.  ``actives_first`` is the executable fragment
of the strongest adversary class we exercise: it sees the realized pattern and
reveals all active elements (ascending index) before all inactive ones.

``targeted_actives_first`` is a sharper member of the same class: it reveals
every *other* active element before the target, which is what actually starves
a greedy policy of budget at the target.  With plain ``actives_first`` the
relative order of active elements is unchanged, so policies that ignore
inactive elements (the greedy family) behave exactly as under ``identity``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import LengthMismatch

__all__ = [
    "Order",
    "identity_order",
    "fixed_order",
    "actives_first_order",
    "targeted_actives_first_order",
    "realize_order",
]


@dataclass(frozen=True)
class Order:
    kind: str  # "identity" | "fixed" | "actives_first" | "targeted_actives_first"
    perm: Optional[tuple] = None
    target: Optional[int] = None

    @property
    def activation_independent(self) -> bool:
        return self.kind in ("identity", "fixed")

    def static_permutation(self, n: int) -> np.ndarray:
        """Permutation for activation-independent orders."""
        if self.kind == "identity":
            return np.arange(n, dtype=np.int64)
        if self.kind == "fixed":
            perm = np.asarray(self.perm, dtype=np.int64)
            if len(perm) != n:
                raise LengthMismatch(f"permutation length {len(perm)} != n={n}")
            return perm
        raise LengthMismatch(f"{self.kind} order depends on the activation pattern")

    def __str__(self):
        if self.kind == "fixed":
            return "fixed"
        if self.kind == "targeted_actives_first":
            return f"targeted-actives-first:{self.target}"
        return self.kind.replace("_", "-")


def identity_order() -> Order:
    return Order(kind="identity")


def fixed_order(perm) -> Order:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(len(perm))):
        raise LengthMismatch("perm is not a permutation of 0..n-1")
    return Order(kind="fixed", perm=perm)


def actives_first_order() -> Order:
    return Order(kind="actives_first")


def targeted_actives_first_order(target: int) -> Order:
    return Order(kind="targeted_actives_first", target=int(target))


def realize_order(order: Order, pattern) -> np.ndarray:
    """Return the revelation permutation (element indices in reveal order).

    ``pattern`` may be None for activation-independent orders.
    """
    if order.activation_independent:
        if pattern is None:
            raise LengthMismatch("pattern required to infer n; use static_permutation")
        return order.static_permutation(len(pattern.bits))

    bits = np.asarray(pattern.bits).astype(bool)
    n = len(bits)
    idx = np.arange(n, dtype=np.int64)
    if order.kind == "actives_first":
        return np.concatenate([idx[bits], idx[~bits]])
    if order.kind == "targeted_actives_first":
        t = order.target
        if t is None or not (0 <= t < n):
            raise LengthMismatch(f"target {t} out of range for n={n}")
        others_active = idx[bits & (idx != t)]
        mid = [t] if bits[t] else []
        inactive = idx[~bits & (idx != t)]
        tail = [] if bits[t] else [t]
        return np.concatenate(
            [others_active, np.array(mid, dtype=np.int64), inactive, np.array(tail, dtype=np.int64)]
        )
    raise LengthMismatch(f"unknown order kind {order.kind}")
