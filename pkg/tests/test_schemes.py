import math

import numpy as np
import pytest

from ocrskit import (
    ActivationPattern,
    RandomSource,
    algorithm_d,
    bind,
    exact_selectability_dp,
    identity_order,
    naive_greedy,
    parse_scheme,
    partition_greedy,
    sample_activation,
    scale_reduction,
    scaled_greedy,
    selectability_floor,
    simple_ocrs,
    simulate_batch,
    validate_instance,
)
from ocrskit.errors import MissingPartition, UnsupportedScheme
from ocrskit.schemes import _flatten


def _ones(n):
    return ActivationPattern(bits=np.ones(n, dtype=np.uint8))


def test_simple_first_element_threshold():
    # k=4, x_1=0.5: eligibility 1 <= 0.5*0.5 + 2 holds; coin probability 0.5.
    inst = validate_instance([0.5], 4)
    prof = bind(simple_ocrs(), inst, np.array([0])).profile
    assert prof.thr[0] == pytest.approx(0.5 * 0.5 + 2.0)
    assert prof.q == pytest.approx(0.5)
    rep = exact_selectability_dp(inst, simple_ocrs(), identity_order())
    assert rep.per_element[0] == pytest.approx(0.5)


def test_simple_k1_never_selects():
    inst = validate_instance([0.8, 0.1], 1)
    _, sel = simulate_batch(simple_ocrs(), inst, identity_order(), 2000, RandomSource(0))
    assert sel.sum() == 0


def test_algd_direct_rule():
    inst = validate_instance([0.5], 4)
    prof = bind(algorithm_d(2.0), inst, np.array([0])).profile
    assert prof.thr[0] == pytest.approx(2.5)
    # single element, d >= 1: always eligible, conditional selectability 1
    rep = exact_selectability_dp(inst, algorithm_d(2.0), identity_order())
    assert rep.per_element[0] == pytest.approx(1.0)


def test_algd_cap_flag():
    # sum(x) = 3 > k - d: the count can exceed k; flagged as uncapped.
    inst = validate_instance([1.0, 1.0, 1.0], 2, b=None)
    prof = bind(algorithm_d(1.0), inst, np.arange(3)).profile
    assert not prof.capped
    rep = exact_selectability_dp(inst, algorithm_d(1.0), identity_order())
    assert rep.feasibility_warning is not None
    assert np.allclose(rep.per_element, 1.0)  # thresholds i+1 always pass


def test_greedy_capacity():
    inst = validate_instance([1.0, 1.0, 1.0], 2, b=None)
    rep = exact_selectability_dp(inst, naive_greedy(), identity_order())
    assert rep.per_element.tolist() == [1.0, 1.0, 0.0]


def test_greedy_all_selected_when_n_le_k():
    inst = validate_instance([0.9, 0.9, 0.9], 3)
    rep = exact_selectability_dp(inst, naive_greedy(), identity_order())
    assert np.allclose(rep.per_element, 1.0)


def test_greedy_k1_takes_first_active():
    inst = validate_instance([0.0, 0.5, 0.0, 0.0, 0.5], 1)
    bound = bind(naive_greedy(), inst, np.arange(5))
    pat = ActivationPattern(bits=np.array([0, 1, 0, 0, 1], dtype=np.uint8))
    tr = bound.run_trace(pat, RandomSource(0))
    assert tr.selected.tolist() == [False, True, False, False, False]
    tr.validate()


def test_greedy_hard_instance_last_element():
    # n=2k, x=1/2: last element's conditional selectability is the lower
    # binomial half-tail of Bin(2k-1, 1/2); exactly 1/2 at k=4.
    k = 4
    inst = validate_instance(np.full(2 * k, 0.5), k)
    rep = exact_selectability_dp(inst, naive_greedy(), identity_order())
    assert rep.per_element[-1] == pytest.approx(0.5, abs=1e-12)


def test_partition_single_part_equals_greedy():
    x = [0.3] * 6
    plain = validate_instance(x, 2)
    withpart = validate_instance(x, 2, partition=[(2, range(6))])
    a = exact_selectability_dp(plain, naive_greedy(), identity_order())
    b = exact_selectability_dp(withpart, partition_greedy(), identity_order())
    assert np.allclose(a.per_element, b.per_element, atol=1e-12)


def test_partition_quota_zero_and_singleton():
    inst = validate_instance([0.9, 0.4, 0.4], 2, partition=[(0, [1]), (2, [0, 2])])
    rep = exact_selectability_dp(inst, partition_greedy(), identity_order())
    assert rep.per_element[1] == 0.0
    assert rep.per_element[0] == pytest.approx(1.0)


def test_partition_requires_partition():
    inst = validate_instance([0.5], 1)
    with pytest.raises(MissingPartition):
        bind(partition_greedy(), inst, np.array([0]))


def test_scale_reduction_b1_identity():
    inst = validate_instance([0.3] * 8, 3)
    a = exact_selectability_dp(inst, naive_greedy(), identity_order())
    b = exact_selectability_dp(inst, scaled_greedy(1.0), identity_order())
    assert np.array_equal(a.per_element, b.per_element)


def test_scale_reduction_b0_never_selects():
    inst = validate_instance([0.9, 0.9], 2)
    _, sel = simulate_batch(scaled_greedy(0.0), inst, identity_order(), 500, RandomSource(1))
    assert sel.sum() == 0


def test_scaled_algd_equals_simple_dp():
    # Demoting actives w.p. 1/sqrt(k) and running the buffered rule with
    # d = sqrt(k) reproduces the simple scheme's law exactly.
    for k, n in ((4, 8), (16, 32), (100, 50)):
        inst = validate_instance(np.full(n, min(1.0, k / n)), k)
        a = exact_selectability_dp(inst, simple_ocrs(), identity_order())
        b = exact_selectability_dp(
            inst, scale_reduction(algorithm_d(math.sqrt(k)), 1.0 - 1.0 / math.sqrt(k)),
            identity_order(),
        )
        assert np.max(np.abs(a.per_element - b.per_element)) == 0.0


def test_nested_scaling_accumulates():
    spec = scale_reduction(scaled_greedy(0.5), 0.5)
    base, demote = _flatten(spec)
    assert base.kind == "greedy"
    assert demote == pytest.approx(0.25)


def test_trace_coin_contract(rng):
    inst = validate_instance([0.6] * 6, 4)
    bound = bind(simple_ocrs(), inst, np.arange(6))
    pat = sample_activation(inst, rng)
    tr = bound.run_trace(pat, rng)
    tr.validate()
    for i in range(6):
        if tr.eligible[i]:
            assert tr.coin[i] in (True, False)  # coin drawn only when eligible
        else:
            assert tr.coin[i] is None


def test_selectability_floor_values():
    assert selectability_floor(simple_ocrs(), 100) == pytest.approx(0.9 * (1 - 2 / 9))
    assert selectability_floor(algorithm_d(10), 100) == pytest.approx(1 - 2 / 9)
    assert math.isnan(selectability_floor(naive_greedy(), 100))
    assert math.isnan(selectability_floor(algorithm_d(1.0), 100))
    assert math.isnan(selectability_floor(scaled_greedy(0.5), 100))


def test_parse_scheme_round_trip():
    assert str(parse_scheme("simple")) == "simple"
    assert str(parse_scheme("greedy")) == "greedy"
    assert str(parse_scheme("partition")) == "partition"
    assert str(parse_scheme("algd:d=5")) == "algd:d=5"
    assert str(parse_scheme("scaled:b=0.9")) == "scaled:b=0.9"
    with pytest.raises(UnsupportedScheme):
        parse_scheme("nope")
    with pytest.raises(UnsupportedScheme):
        parse_scheme("algd:q=5")
