import numpy as np
import pytest

from ocrskit import (
    RandomSource,
    algorithm_d,
    batch_walks,
    bind,
    build_walks,
    identity_order,
    martingale_tail_estimate,
    new_integral_heights,
    reversed_process,
    sample_activation,
    validate_instance,
)
from ocrskit.catalog import uniform_instance
from ocrskit.errors import BadParameters, IndexOutOfRange, SchemeMismatch
from ocrskit.walk import snap_ceil


def test_build_walks_requires_buffered_rule():
    inst = validate_instance([0.5, 0.5], 1)
    from ocrskit import naive_greedy

    bound = bind(naive_greedy(), inst, np.arange(2))
    tr = bound.run_trace(sample_activation(inst, RandomSource(0)), RandomSource(0))
    with pytest.raises(SchemeMismatch):
        build_walks(tr, inst.x, 2.0)


def test_all_inactive_walks():
    inst = validate_instance([0.3, 0.2, 0.1], 2)
    bound = bind(algorithm_d(2.0), inst, np.arange(3))
    pat = sample_activation(validate_instance([0.0] * 3, 2), RandomSource(0))
    tr = bound.run_trace(pat, RandomSource(0))
    wp = build_walks(tr, inst.x, 2.0)
    assert np.allclose(wp.W, wp.S)
    assert np.allclose(wp.W, -np.cumsum(inst.x))


def test_all_active_zero_x():
    # x=0 elements that happen to be active with d >= n: W = S = 1..n
    inst = validate_instance([0.0] * 4, 3)
    bound = bind(algorithm_d(4.0), inst, np.arange(4))
    pat = sample_activation(validate_instance([1.0] * 4, 4), RandomSource(0))
    tr = bound.run_trace(pat, RandomSource(0))
    wp = build_walks(tr, inst.x, 4.0)
    assert np.allclose(wp.W, np.arange(1, 5))
    assert np.allclose(wp.S, np.arange(1, 5))


def test_new_integral_heights_example():
    idx = new_integral_heights(np.array([0.6, 1.2, 0.9, 2.1]), 1.0)
    assert idx.tolist() == [1, 3]  # ceilings 1,2,1,3: new heights above d=1


def test_new_integral_heights_monotone_decreasing():
    assert new_integral_heights(np.array([3.0, 2.0, 1.0]), 0.0).tolist() == [0]
    assert new_integral_heights(-np.arange(1.0, 5.0), 0.0).size == 0


def test_snap_ceil():
    assert snap_ceil(np.array([1.0 + 2e-10]))[0] == 1.0
    assert snap_ceil(np.array([1.0 - 2e-10]))[0] == 1.0
    assert snap_ceil(np.array([1.5]))[0] == 2.0


def test_reversed_process_examples():
    assert reversed_process(np.array([0.7]), 1).tolist() == [0.0]
    got = reversed_process(np.array([0.5, 1.5]), 2)
    assert np.allclose(got, [0.0, -0.5])
    with pytest.raises(IndexOutOfRange):
        reversed_process(np.array([0.5]), 2)


def test_reversed_increments_bounded():
    inst = uniform_instance(9, 0.6)
    r = RandomSource(4)
    act, sel, W, S = batch_walks(inst, identity_order(), 3.0, 50, r)
    for t in range(50):
        q = reversed_process(W[t], inst.n)
        assert np.max(np.abs(np.diff(q))) <= 1.0 + 1e-12


def test_walk_identities_per_trajectory():
    inst = uniform_instance(16, 0.75)  # sum(x) = 12 = k - d for d = 4
    d = 4.0
    act, sel, W, S = batch_walks(inst, identity_order(), d, 400, RandomSource(11))
    discarded = (act == 1) & (sel == 0)
    assert np.allclose(W - S, np.cumsum(discarded, axis=1), atol=1e-9)
    # gap is integer, non-decreasing, steps of 0/1, and S stays below d
    gap = W - S
    assert np.max(np.abs(gap - np.round(gap))) <= 1e-9
    assert np.all(np.diff(np.round(gap), axis=1) >= 0)
    assert np.all(S <= d + 1e-9)
    for t in range(act.shape[0]):
        got = np.where(discarded[t])[0]
        want = new_integral_heights(W[t], d)
        assert np.array_equal(got, want)


def test_zero_mean_increments():
    inst = uniform_instance(16, 0.75)
    act, sel, W, S = batch_walks(inst, identity_order(), 4.0, 20_000, RandomSource(12))
    x = np.asarray(inst.x)
    xs = act - x[None, :]
    mean = xs.mean(axis=0)
    se = np.sqrt(x * (1 - x) / act.shape[0])
    assert np.all(np.abs(mean) <= 4.0 * se + 1e-12)


def test_martingale_tail_bound():
    inst = validate_instance(np.full(200, 0.45), 100)
    p_hat, se = martingale_tail_estimate(inst, identity_order(), 5.0, 1.0, 20_000, RandomSource(13))
    assert p_hat <= 0.5 + 3.0 * se  # (a + K) / (d - 1) = 2/4
    # d=3 gives the vacuous bound 1
    p_hat, se = martingale_tail_estimate(inst, identity_order(), 3.0, 1.0, 20_000, RandomSource(14))
    assert p_hat <= 1.0


def test_martingale_parameter_validation():
    inst = validate_instance(np.full(10, 0.4), 5)
    with pytest.raises(BadParameters):
        martingale_tail_estimate(inst, identity_order(), 5.0, 0.0, 2_000, RandomSource(0))
    with pytest.raises(BadParameters):
        martingale_tail_estimate(inst, identity_order(), 1.0, 1.0, 2_000, RandomSource(0))
    with pytest.raises(BadParameters):
        martingale_tail_estimate(inst, identity_order(), 5.0, 1.0, 10, RandomSource(0))
