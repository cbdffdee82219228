"""Threshold gambler built on the selection schemes.

Given independent nonnegative value distributions and a budget k, pick the
threshold T where the survival probabilities sum to k; an element is "active"
when its value strictly exceeds T, or equals T and an independent coin with
the fractional acceptance probability rho lands.  Atoms at T are handled by
that coin rather than by perturbing values: the activation law is identical
to smoothing each atom with a vanishing uniform jitter, with no extra
parameter.  The resulting activation probabilities sum to k exactly, so any
selection scheme can run on them unchanged; the collected value is compared
against the expected best offline choice of k values (paired draws, delta
method for the confidence interval).
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .adversary import Order
from .errors import BadParameters, DegenerateProphet, RangeViolation
from .instance import Instance, validate_instance
from .schemes import SchemeSpec, select_batch

__all__ = [
    "ValueDistribution",
    "discrete_dist",
    "exponential_dist",
    "uniform_dist",
    "quantile_dist",
    "dist_from_dict",
    "load_distributions",
    "ProphetInstance",
    "find_threshold",
    "build_prophet_instance",
    "run_gambler",
    "prophet_value",
    "RatioEstimate",
    "competitive_ratio",
]

#: Relative snap width when matching the bisected threshold to a support atom.
_ATOM_SNAP = 1e-9


@dataclass(frozen=True)
class ValueDistribution:
    """A nonnegative value distribution exposing survival, atom mass, and
    quantile (inverse CDF) evaluation.

    Kinds:
      * ``discrete``: finite support ``values`` with ``probs`` summing to 1;
      * ``exponential``: rate parameter;
      * ``uniform``: continuous on [lo, hi];
      * ``quantile``: piecewise-linear inverse CDF through knots (us, vs);
        flat segments encode atoms.
    """

    kind: str
    values: Optional[tuple] = None
    probs: Optional[tuple] = None
    rate: Optional[float] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    us: Optional[tuple] = None
    vs: Optional[tuple] = None

    # -- law queries ---------------------------------------------------------

    def survival(self, t: float) -> float:
        """P(X > t)."""
        if self.kind == "discrete":
            return float(sum(p for v, p in zip(self.values, self.probs) if v > t))
        if self.kind == "exponential":
            return math.exp(-self.rate * t) if t >= 0.0 else 1.0
        if self.kind == "uniform":
            if t < self.lo:
                return 1.0
            if t >= self.hi:
                return 0.0
            return (self.hi - t) / (self.hi - self.lo)
        # quantile: measure of {u : Q(u) > t} = 1 - measure of {u : Q(u) <= t}
        mass = 0.0
        for ua, ub, va, vb in self._segments():
            if vb <= t:
                mass += ub - ua
            elif va < t < vb:
                mass += (t - va) / (vb - va) * (ub - ua)
        return max(0.0, 1.0 - mass)

    def atom(self, t: float) -> float:
        """P(X = t)."""
        if self.kind == "discrete":
            return float(sum(p for v, p in zip(self.values, self.probs) if v == t))
        if self.kind == "quantile":
            return float(
                sum(ub - ua for ua, ub, va, vb in self._segments() if va == vb == t)
            )
        return 0.0

    def quantile(self, u: np.ndarray) -> np.ndarray:
        """Inverse CDF, vectorized over u in [0, 1)."""
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "discrete":
            cum = np.cumsum(self.probs)
            cum[-1] = 1.0
            idx = np.searchsorted(cum, u, side="left")
            return np.asarray(self.values, dtype=np.float64)[np.minimum(idx, len(cum) - 1)]
        if self.kind == "exponential":
            return -np.log1p(-u) / self.rate
        if self.kind == "uniform":
            return self.lo + u * (self.hi - self.lo)
        return np.interp(u, self.us, self.vs)

    def support_points(self):
        """Candidate atom locations (for threshold snapping)."""
        if self.kind == "discrete":
            return self.values
        if self.kind == "quantile":
            return tuple(va for _, _, va, vb in self._segments() if va == vb)
        return ()

    def _segments(self):
        for a in range(len(self.us) - 1):
            yield self.us[a], self.us[a + 1], self.vs[a], self.vs[a + 1]

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for f in ("values", "probs", "rate", "lo", "hi", "us", "vs"):
            v = getattr(self, f)
            if v is not None:
                d[f] = list(v) if isinstance(v, tuple) else v
        return d


def discrete_dist(values: Sequence[float], probs: Sequence[float]) -> ValueDistribution:
    values = tuple(float(v) for v in values)
    probs = tuple(float(p) for p in probs)
    if len(values) != len(probs) or not values:
        raise BadParameters("values and probs must be equal-length and non-empty")
    if any(v < 0 for v in values):
        raise RangeViolation("values must be nonnegative")
    if any(p < 0 for p in probs) or abs(math.fsum(probs) - 1.0) > 1e-12:
        raise RangeViolation("probs must be nonnegative and sum to 1 (1e-12)")
    order = sorted(range(len(values)), key=lambda i: values[i])
    return ValueDistribution(
        kind="discrete",
        values=tuple(values[i] for i in order),
        probs=tuple(probs[i] for i in order),
    )


def exponential_dist(rate: float) -> ValueDistribution:
    if not rate > 0:
        raise BadParameters(f"rate must be positive, got {rate}")
    return ValueDistribution(kind="exponential", rate=float(rate))


def uniform_dist(lo: float, hi: float) -> ValueDistribution:
    if not (0.0 <= lo < hi):
        raise BadParameters(f"need 0 <= lo < hi, got [{lo}, {hi}]")
    return ValueDistribution(kind="uniform", lo=float(lo), hi=float(hi))


def quantile_dist(us: Sequence[float], vs: Sequence[float]) -> ValueDistribution:
    us = tuple(float(u) for u in us)
    vs = tuple(float(v) for v in vs)
    if len(us) != len(vs) or len(us) < 2:
        raise BadParameters("need matching knot arrays of length >= 2")
    if us[0] != 0.0 or us[-1] != 1.0 or any(b < a for a, b in zip(us, us[1:])):
        raise BadParameters("u-knots must be non-decreasing from 0 to 1")
    if any(b < a for a, b in zip(vs, vs[1:])) or vs[0] < 0.0:
        raise RangeViolation("quantile values must be non-decreasing and nonnegative")
    return ValueDistribution(kind="quantile", us=us, vs=vs)


def dist_from_dict(d: dict) -> ValueDistribution:
    kind = d.get("kind")
    if kind == "discrete":
        return discrete_dist(d["values"], d["probs"])
    if kind == "exponential":
        return exponential_dist(d["rate"])
    if kind == "uniform":
        return uniform_dist(d["lo"], d["hi"])
    if kind == "quantile":
        return quantile_dist(d["us"], d["vs"])
    raise BadParameters(f"unknown distribution kind {kind!r}")


def load_distributions(path: str):
    """Read a JSON list of {kind, params, copies?} entries into a flat list."""
    with open(path, "r", encoding="utf-8") as fh:
        entries = json.load(fh)
    if not isinstance(entries, list):
        raise BadParameters("distribution file must hold a JSON list")
    dists = []
    for entry in entries:
        copies = int(entry.get("copies", 1))
        if copies < 1:
            raise BadParameters(f"copies must be >= 1, got {copies}")
        dists.extend([dist_from_dict(entry)] * copies)
    return dists


# -- threshold --------------------------------------------------------------


def find_threshold(dists: Sequence[ValueDistribution], k: int):
    """The level T where the survival probabilities sum to k, plus the
    fractional acceptance probability rho for values exactly at T.

    When the survival sum jumps over k at T (atoms), rho in (0, 1] splits the
    atom mass so that sum_i [P(X_i > T) + rho P(X_i = T)] = k.  When even every
    positive value together carries less than k expected actives, returns
    (0, 0): all positive values are takeable.
    """
    k = int(k)
    if k < 1 or not dists:
        raise BadParameters(f"need k >= 1 and at least one distribution, got k={k}")

    def ssum(t: float) -> float:
        return math.fsum(d.survival(t) for d in dists)

    if ssum(0.0) < k:
        return 0.0, 0.0
    hi = 1.0
    for _ in range(200):
        if ssum(hi) < k:
            break
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if ssum(mid) >= k:
            lo = mid
        else:
            hi = mid
    t = hi
    # Snap to a nearby support atom so atom() queries hit it exactly.
    snapped = sorted({p for d in dists for p in d.support_points()})
    if snapped:
        j = bisect.bisect_left(snapped, t)
        for cand in snapped[max(0, j - 1) : j + 1]:
            if abs(cand - t) <= _ATOM_SNAP * max(1.0, abs(t)):
                t = cand
                break
    st = ssum(t)
    atoms = math.fsum(d.atom(t) for d in dists)
    if atoms > 1e-15 and k - st > 0.0:
        rho = min(1.0, (k - st) / atoms)
    else:
        rho = 0.0
    return t, rho


@dataclass(frozen=True)
class ProphetInstance:
    distributions: tuple
    k: int
    T: float
    rho: float
    instance: Instance  # activation probabilities x_i = P(X_i > T) + rho P(X_i = T)


def build_prophet_instance(dists: Sequence[ValueDistribution], k: int) -> ProphetInstance:
    t, rho = find_threshold(dists, k)
    x = np.array([d.survival(t) + rho * d.atom(t) for d in dists])
    # The split is exact up to rounding; rescale any excess inside the budget.
    total = math.fsum(x.tolist())
    if total > k:
        x = x * (k / total)
    inst = validate_instance(x, k)
    return ProphetInstance(
        distributions=tuple(dists), k=int(k), T=float(t), rho=float(rho), instance=inst
    )


# -- simulation -------------------------------------------------------------


def _sample_values(pinst: ProphetInstance, trials: int, rng) -> np.ndarray:
    """One uniform per element per trial, inverted through each quantile."""
    u = rng.uniform(size=(trials, len(pinst.distributions)))
    v = np.empty_like(u)
    for i, d in enumerate(pinst.distributions):
        v[:, i] = d.quantile(u[:, i])
    return v


def _activation(pinst: ProphetInstance, v: np.ndarray, rng) -> np.ndarray:
    active = v > pinst.T
    if pinst.rho > 0.0:
        at = v == pinst.T
        if at.any():
            active = active | (at & (rng.uniform(size=v.shape) < pinst.rho))
    return active.astype(np.uint8)


def prophet_value(values: np.ndarray, k: int) -> np.ndarray:
    """Sum of the k largest values, per row."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    n = values.shape[1]
    if k >= n:
        return values.sum(axis=1)
    return np.partition(values, n - k, axis=1)[:, n - k :].sum(axis=1)


def run_gambler(pinst: ProphetInstance, spec: SchemeSpec, order: Order, rng) -> float:
    """One trial: sample values, activate against the threshold, run the
    scheme, and return the total value of the selected elements."""
    v = _sample_values(pinst, 1, rng)
    active = _activation(pinst, v, rng)
    selected = select_batch(spec, pinst.instance, order, active, rng)
    return float((v * selected).sum())


@dataclass
class RatioEstimate:
    ratio: float
    stderr: float
    ci_low: float
    ci_high: float
    mean_gambler: float
    mean_prophet: float
    trials: int
    floor: float = float("nan")


def competitive_ratio(
    pinst: ProphetInstance,
    spec: SchemeSpec,
    order: Order,
    trials: int,
    rng,
    z: float = 1.959963984540054,
    prefix_noise: float = 0.0,
) -> RatioEstimate:
    """Paired Monte Carlo estimate of E[gambler] / E[prophet].

    The same value draws feed numerator and denominator, and the delta method
    on the paired means gives the confidence interval.  ``prefix_noise``
    optionally perturbs each eligibility threshold by an independent uniform
    in [-noise, +noise] (a robustness experiment for schemes that only know
    the activation prefix sums approximately); it is off by default.
    """
    if trials < 1000:
        raise BadParameters(f"trials must be >= 1000, got {trials}")
    v = _sample_values(pinst, trials, rng)
    active = _activation(pinst, v, rng)
    if prefix_noise > 0.0:
        selected = _select_with_noise(pinst, spec, order, active, prefix_noise, rng)
    else:
        selected = select_batch(spec, pinst.instance, order, active, rng)
    g = (v * selected).sum(axis=1)
    p = prophet_value(v, pinst.k)
    mean_p = float(np.mean(p))
    if mean_p <= 0.0:
        raise DegenerateProphet("expected offline value is zero")
    mean_g = float(np.mean(g))
    ratio = mean_g / mean_p
    var_g = float(np.var(g, ddof=1))
    var_p = float(np.var(p, ddof=1))
    cov = float(np.cov(g, p, ddof=1)[0, 1])
    var_ratio = (var_g - 2.0 * ratio * cov + ratio * ratio * var_p) / (
        mean_p * mean_p * trials
    )
    se = math.sqrt(max(0.0, var_ratio))
    return RatioEstimate(
        ratio=ratio,
        stderr=se,
        ci_low=ratio - z * se,
        ci_high=ratio + z * se,
        mean_gambler=mean_g,
        mean_prophet=mean_p,
        trials=int(trials),
    )


def _select_with_noise(pinst, spec, order, active, noise, rng):
    from .schemes import _run_kernel, bind

    if not order.activation_independent:
        raise BadParameters("prefix noise requires an activation-independent order")
    perm = order.static_permutation(pinst.instance.n)
    bound = bind(spec, pinst.instance, perm)
    prof = bound.profile
    if prof.thr is None:
        raise BadParameters("prefix noise only applies to count-threshold schemes")
    prof.thr = prof.thr + rng.uniform(size=len(prof.thr)) * (2.0 * noise) - noise
    act_ord = np.ascontiguousarray(active[:, perm])
    sel_ord = _run_kernel(prof, act_ord, rng)
    selected = np.zeros_like(active)
    selected[:, perm] = sel_ord
    return selected
