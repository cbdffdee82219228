import numpy as np
import pytest

from ocrskit import RandomSource, bind, simple_ocrs, validate_instance
from ocrskit import kernels
from ocrskit import _kernels_py

cy = pytest.importorskip("ocrskit._kernels_cy")


def _workload(seed, trials=500, n=40):
    rng = RandomSource(seed)
    inst = validate_instance(np.full(n, 0.4), n // 2)
    prof = bind(simple_ocrs(), inst, np.arange(n)).profile
    act = (rng.uniform(size=(trials, n)) < inst.x).astype(np.uint8)
    accept = rng.uniform(size=(trials, n))
    demote = rng.uniform(size=(trials, n))
    return prof, act, accept, demote


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_count_policy_backends_bit_identical(seed):
    prof, act, accept, demote = _workload(seed)
    for d in (None, demote):
        db = prof.demote_b if d is not None else 1.0
        a = _kernels_py.select_count_policy(act, prof.thr, prof.q, db, accept, d)
        b = cy.select_count_policy(act, prof.thr, prof.q, db, accept, d)
        assert np.array_equal(a, b)


def test_partition_policy_backends_bit_identical():
    rng = RandomSource(3)
    n, trials = 30, 400
    part_id = np.asarray(rng.integers(0, 3, size=n), dtype=np.int64)
    quotas = np.array([2, 3, 4], dtype=np.int64)
    act = (rng.uniform(size=(trials, n)) < 0.5).astype(np.uint8)
    demote = rng.uniform(size=(trials, n))
    a = _kernels_py.select_partition_policy(act, part_id, quotas, 0.8, demote)
    b = cy.select_partition_policy(act, part_id, quotas, 0.8, demote)
    assert np.array_equal(a, b)


def test_dispatch_env_var(monkeypatch):
    assert kernels.BACKEND in ("cython", "python")
    import importlib

    monkeypatch.setenv("OCRSKIT_FORCE_PURE", "1")
    mod = importlib.reload(kernels)
    assert mod.BACKEND == "python"
    monkeypatch.delenv("OCRSKIT_FORCE_PURE")
    importlib.reload(kernels)
