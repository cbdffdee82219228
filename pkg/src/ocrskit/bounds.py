"""Closed-form numerics: binomial tails, the restricted-adversary LP, tail
envelopes, the scaled-greedy guarantee, and anti-concentration checks.

Binomial quantities go through log-gamma with one exponentiation per term and
are accumulated from the smaller tail, so they are exact to double precision
without big-integer arithmetic.  For p = 1/2 and small n an exact dyadic
integer path is used instead (all terms and sums are representable), which
keeps the hand-checkable values (e.g. symmetric half-tails) exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from .errors import BadK, RangeViolation, TooLarge

__all__ = [
    "BinomialSpec",
    "binom_pmf",
    "binom_cdf",
    "binom_sf",
    "LpSolution",
    "lp_cstar",
    "lp_oracle",
    "lp_probe_max",
    "cstar_upper_envelope",
    "impossibility_curve",
    "impossibility_sweep",
    "hks_guarantee",
    "chernoff_tail",
    "anti_concentration_lower",
    "greedy_bc_frontier",
]

#: Largest n for the exact dyadic p=1/2 path (all partial sums fit in 53 bits).
_EXACT_HALF_N = 30


@dataclass(frozen=True)
class BinomialSpec:
    n: int
    p: float

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise RangeViolation(f"n must be a non-negative integer, got {self.n}")
        if not (0.0 <= self.p <= 1.0):
            raise RangeViolation(f"p must be in [0, 1], got {self.p}")


def _logpmf(n: int, p: float, i: np.ndarray) -> np.ndarray:
    i = np.asarray(i, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
        if p > 0.0:
            lp = lp + i * math.log(p)
        else:
            lp = np.where(i == 0, lp, -np.inf)
        if p < 1.0:
            lp = lp + (n - i) * math.log1p(-p)
        else:
            lp = np.where(i == n, lp, -np.inf)
    return lp


def binom_pmf(spec: BinomialSpec, m: int) -> float:
    n, p = spec.n, spec.p
    if m < 0 or m > n:
        return 0.0
    if p == 0.5 and n <= _EXACT_HALF_N:
        return math.comb(n, m) / 2**n
    return float(np.exp(_logpmf(n, p, np.array([m]))[0]))


def _sum_range(n: int, p: float, lo: int, hi: int, ascending: bool) -> float:
    """Sum pmf over [lo, hi], accumulating smaller terms first."""
    idx = np.arange(lo, hi + 1)
    terms = np.exp(_logpmf(n, p, idx))
    if not ascending:
        terms = terms[::-1]
    return float(np.sum(terms))


def binom_cdf(spec: BinomialSpec, m: int) -> float:
    """P(Bin(n, p) <= m)."""
    n, p = spec.n, spec.p
    if m < 0:
        return 0.0
    if m >= n:
        return 1.0
    if p == 0.5 and n <= _EXACT_HALF_N:
        return sum(math.comb(n, i) for i in range(m + 1)) / 2**n
    mean = n * p
    if m <= mean:
        return min(1.0, _sum_range(n, p, 0, m, ascending=True))
    return max(0.0, 1.0 - _sum_range(n, p, m + 1, n, ascending=False))


def binom_sf(spec: BinomialSpec, m: int) -> float:
    """P(Bin(n, p) >= m)."""
    n, p = spec.n, spec.p
    if m <= 0:
        return 1.0
    if m > n:
        return 0.0
    if p == 0.5 and n <= _EXACT_HALF_N:
        return sum(math.comb(n, i) for i in range(m, n + 1)) / 2**n
    mean = n * p
    if m > mean:
        return min(1.0, _sum_range(n, p, m, n, ascending=False))
    return max(0.0, 1.0 - _sum_range(n, p, 0, m - 1, ascending=True))


def _half_arrays(k: int):
    """pmf and cdf arrays of Bin(2k-1, 1/2) over support 0..2k-1."""
    n = 2 * k - 1
    if n <= _EXACT_HALF_N:
        pmf = np.array([math.comb(n, i) / 2**n for i in range(n + 1)])
    else:
        pmf = np.exp(_logpmf(n, 0.5, np.arange(n + 1)))
    cdf = np.minimum(np.cumsum(pmf), 1.0)
    return pmf, cdf


@dataclass
class LpSolution:
    """Optimal point of the restricted-adversary selection LP, in two-level
    form: value x on positions 1..k+a, y at k+a+1, zero after."""

    k: int
    a: int
    x: float
    y: float
    c_star: float

    @property
    def log_coeffs(self) -> np.ndarray:
        """log of the objective coefficients C(2k-1, i-1)/2^(2k-1), i=1..2k."""
        n = 2 * self.k - 1
        return _logpmf(n, 0.5, np.arange(n + 1))

    @property
    def coeffs(self) -> np.ndarray:
        return np.exp(self.log_coeffs)


def lp_cstar(k: int) -> LpSolution:
    """Solve the LP via its two-level structural characterization.

    Scans the breakpoint a in [0, k] and, for each a, evaluates the vertices
    (0, 0), (k/(k+a+1), k/(k+a+1)), (k/(k+a), 0) of the induced 2-D feasible
    polytope {x >= y >= 0, x*(k+a) + y <= k}.
    """
    if k < 1:
        raise BadK(f"k must be >= 1, got {k}")
    pmf, cdf = _half_arrays(k)
    n = 2 * k - 1
    a = np.arange(0, k + 1, dtype=np.float64)
    # lead = P(N <= k+a-1), atom = P(N = k+a) with out-of-support handling.
    lead = cdf[np.minimum((k + a - 1).astype(np.int64), n)]
    atom_idx = (k + a).astype(np.int64)
    atom = np.where(atom_idx <= n, pmf[np.minimum(atom_idx, n)], 0.0)
    x_flat = k / (k + a + 1.0)
    obj_flat = x_flat * lead + x_flat * atom  # x = y vertex
    x_step = k / (k + a)
    obj_step = x_step * lead  # y = 0 vertex
    obj = np.maximum(obj_flat, obj_step)
    a_best = int(np.argmax(obj))
    if obj_flat[a_best] >= obj_step[a_best]:
        x, y = float(x_flat[a_best]), float(x_flat[a_best])
    else:
        x, y = float(x_step[a_best]), 0.0
    c = float(obj[a_best])
    return LpSolution(k=k, a=a_best, x=x, y=y, c_star=c)


_ORACLE_MAX_K = 200


def lp_oracle(k: int, n_probes: int = 0, rng=None) -> float:
    """Independent LP check: exhaust the two-level family over every prefix
    length j in [1, 2k] (not just j = k + a)."""
    if k > _ORACLE_MAX_K:
        raise TooLarge(f"oracle supports k <= {_ORACLE_MAX_K}, got {k}")
    if k < 1:
        raise BadK(f"k must be >= 1, got {k}")
    pmf, cdf = _half_arrays(k)
    n = 2 * k - 1
    best = 0.0
    for j in range(1, 2 * k + 1):
        lead = cdf[j - 1] if j - 1 <= n else 1.0
        atom = pmf[j] if j <= n else 0.0
        for x, y in ((k / (j + 1.0), k / (j + 1.0)), (k / float(j), 0.0)):
            best = max(best, x * lead + y * atom)
    if n_probes:
        best = max(best, lp_probe_max(k, n_probes, rng))
    return best


def lp_probe_max(k: int, n_probes: int, rng) -> float:
    """Best objective among random feasible decreasing vectors (lower-bound
    probes; must never beat the structured optimum)."""
    pmf, _ = _half_arrays(k)
    g = np.sort(rng.uniform(size=(n_probes, 2 * k)), axis=1)[:, ::-1]
    budget = k * rng.uniform(size=n_probes)
    f = g * (budget / g.sum(axis=1))[:, None]
    return float(np.max(f @ pmf))


def cstar_upper_envelope(k: int, a: int) -> float:
    """Tail envelope k/(k+a) * P(Bin(2k-1, 1/2) <= k+a)."""
    if not (0 <= a <= k):
        raise RangeViolation(f"a must be in [0, k], got a={a}, k={k}")
    _, cdf = _half_arrays(k)
    n = 2 * k - 1
    lead = float(cdf[k + a]) if k + a <= n else 1.0
    return k / (k + a) * lead if k + a > 0 else 1.0


def impossibility_curve(k: int) -> float:
    """1 - (1/100) * sqrt(ln(k)/k); the asymptotic ceiling on selectability
    against the strongest adversary class."""
    if k < 2:
        raise BadK(f"curve defined for k >= 2, got {k}")
    return 1.0 - 0.01 * math.sqrt(math.log(k) / k)


def impossibility_sweep(k_max: int = 10**5, samples: int = 80):
    """Geometric k-sweep comparing the LP optimum against the curve.

    Returns (rows, k0) where rows are (k, c_star, curve) and k0 is the
    smallest sampled k from which the LP optimum stays below the curve for
    every larger sampled k (None if that never happens).  Reported as an
    empirical observation: the curve is only guaranteed asymptotically.
    """
    ks = np.unique(np.geomspace(2, k_max, samples).astype(np.int64))
    rows = []
    for k in ks:
        rows.append((int(k), lp_cstar(int(k)).c_star, impossibility_curve(int(k))))
    k0 = None
    for i in range(len(rows) - 1, -1, -1):
        if rows[i][1] <= rows[i][2]:
            k0 = rows[i][0]
        else:
            break
    return rows, k0


def hks_guarantee(k: int):
    """Scaled-greedy guarantee: b = 1 - sqrt(2 ln(k)/k), c = 1 - 1/k.

    Logs are natural throughout (the derivation runs through exp).
    """
    if k < 3:
        raise BadK(f"guarantee needs k >= 3, got {k}")
    b = 1.0 - math.sqrt(2.0 * math.log(k) / k)
    c = 1.0 - 1.0 / k
    return b, c, b * c


def chernoff_tail(b: float, k: int) -> float:
    """Upper bound e^{-(1-b)^2 k / 2} on P(Bin above k) at mean b*k."""
    return math.exp(-((1.0 - b) ** 2) * k / 2.0)


def anti_concentration_lower(n: int, kprime: int) -> float:
    """(1/15) exp(-16 n (1/2 - k'/n)^2); valid for even n, n/2 <= k' <= 5n/8."""
    if n % 2 != 0:
        raise RangeViolation(f"n must be even, got {n}")
    if not (n / 2 <= kprime <= 5 * n / 8):
        raise RangeViolation(f"k'={kprime} outside [n/2, 5n/8] for n={n}")
    return (1.0 / 15.0) * math.exp(-16.0 * n * (0.5 - kprime / n) ** 2)


def greedy_bc_frontier(k: int, grid: int = 10_000):
    """Maximize b * P(Bin(2k-1, b/2) <= k-1) over b in (0, 1].

    This is the best (scale, guarantee) product plain greedy can extract from
    the tight instance of 2k half-weight elements; a coarse grid is refined
    with a bounded scalar search.
    """
    if k < 1:
        raise BadK(f"k must be >= 1, got {k}")
    n = 2 * k - 1
    i = np.arange(k, dtype=np.float64)  # support 0..k-1
    logcomb = gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)

    def value(b: float) -> float:
        p = b / 2.0
        if p <= 0.0:
            return 0.0
        lp = logcomb + i * math.log(p) + (n - i) * math.log1p(-p)
        return b * float(np.sum(np.exp(lp)))

    bs = np.linspace(1.0 / grid, 1.0, grid)
    vals = np.array([value(b) for b in bs])
    j = int(np.argmax(vals))
    lo = bs[max(0, j - 1)]
    hi = bs[min(grid - 1, j + 1)]
    res = minimize_scalar(lambda b: -value(b), bounds=(lo, hi), method="bounded")
    b_star, v_star = float(res.x), float(-res.fun)
    if vals[j] > v_star:
        b_star, v_star = float(bs[j]), float(vals[j])
    return b_star, v_star
