"""Fixed stress-instance catalog plus fuzz-instance generation.

The four shapes probe tie-breaking and boundary eligibility: flat vectors,
geometric decay (front-loaded mass), a single certain element, and a vector
whose first half is dead weight.
"""

from __future__ import annotations

import numpy as np

from .instance import Instance, validate_instance

__all__ = [
    "uniform_instance",
    "geometric_instance",
    "single_heavy_instance",
    "half_zeros_instance",
    "stress_catalog",
    "random_instance",
]


def _build(x: np.ndarray, k: int, s: float) -> Instance:
    return validate_instance(np.clip(x, 0.0, 1.0), k, b=min(1.0, s))


def uniform_instance(k: int, s: float, n: int | None = None) -> Instance:
    n = 2 * k if n is None else n
    return _build(np.full(n, s * k / n), k, s)


def geometric_instance(k: int, s: float, n: int | None = None, ratio: float = 0.99) -> Instance:
    n = 2 * k if n is None else n
    w = ratio ** np.arange(n)
    x = w * (s * k / w.sum())
    # Rescale mass that the [0,1] cap would clip back onto the uncapped tail.
    for _ in range(100):
        over = x > 1.0
        if not over.any():
            break
        deficit = float((x[over] - 1.0).sum())
        x[over] = 1.0
        free = ~over
        x[free] *= 1.0 + deficit / x[free].sum()
    return _build(x, k, s)


def single_heavy_instance(k: int, s: float, n: int | None = None) -> Instance:
    n = 2 * k if n is None else n
    x = np.full(n, (s * k - 1.0) / (n - 1))
    x[0] = 1.0
    return _build(x, k, s)


def half_zeros_instance(k: int, s: float, n: int | None = None) -> Instance:
    n = 2 * k if n is None else n
    half = n // 2
    x = np.zeros(n)
    x[half:] = s * k / (n - half)
    return _build(x, k, s)


def stress_catalog(k: int, s: float, n: int | None = None):
    """Named stress instances with sum(x) = s*k."""
    return [
        ("uniform", uniform_instance(k, s, n)),
        ("geometric", geometric_instance(k, s, n)),
        ("single_heavy", single_heavy_instance(k, s, n)),
        ("half_zeros", half_zeros_instance(k, s, n)),
    ]


def random_instance(rng, n_max: int = 10, k_max: int = 5, scale_max: float = 1.0) -> Instance:
    """Draw a small random feasible instance (for fuzzing and oracle runs).

    Probabilities are kept away from adversarially near-integral prefix sums
    simply by being generic uniforms rescaled to a random budget fraction.
    """
    n = int(rng.integers(1, n_max + 1))
    k = int(rng.integers(1, k_max + 1))
    s = float(rng.uniform()) * scale_max
    raw = rng.uniform(size=n) + 1e-3
    x = raw * (s * k / raw.sum())
    x = np.minimum(x, 1.0)
    return validate_instance(x, k, b=1.0)
