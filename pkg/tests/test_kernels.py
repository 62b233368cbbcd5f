import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from simpto import kernels
from simpto.metrics import LabelSet, RateProfile, build_confusion
from simpto.schedule import Job, SchedulingInstance, twct, wspt_order
from simpto.seeding import TAG_SIMULATION, SeedSpec, derive
from simpto.simulate import Diagnostics, simulate_dataset

PROFILES = [
    (("A", "B"), (0.8, 0.7), (0.3, 0.2)),
    (("A", "B"), (1.0, 1.0), (0.0, 0.0)),
    (("A", "B"), (0.0, 0.0), (1.0, 1.0)),
    (("A", "B", "C"), (0.6, 0.5, 0.4), (0.2, 0.3, 0.1)),
    (("A", "B", "C"), (0.2, 0.1, 0.0), (0.0, 0.0, 0.5)),  # exercises the S = 0 fallback
    (("A", "B", "C", "D"), (0.3, 0.9, 0.5, 0.1), (0.25, 0.05, 0.4, 0.15)),
]


def _instance(labels, n_per, seed=3):
    rng = np.random.default_rng(seed)
    actuals = [lab for lab in labels for _ in range(n_per)]
    jobs = tuple(Job(i, float(rng.uniform(1, 10)), t) for i, t in enumerate(actuals))
    weights = {lab: float(rng.uniform(10, 100)) for lab in labels}
    return SchedulingInstance(jobs, weights), actuals


@pytest.mark.parametrize("labels, tpr, fpr", PROFILES)
def test_cell_matches_scalar_reference(backend, labels, tpr, fpr):
    ls = LabelSet(labels, (5,) * len(labels))
    inst, actuals = _instance(labels, 5)
    prof = RateProfile(tpr, fpr)
    seed = SeedSpec(17)
    idx = np.array([ls.index(a) for a in actuals], dtype=np.int64)
    positive = 0 if len(labels) == 2 else -1
    conf, totals, degenerate = backend.simulate_cell(
        idx, np.array(tpr), np.array(fpr), positive, seed.key(TAG_SIMULATION, 4), 12,
        np.array([j.duration for j in inst.jobs]), np.array([inst.type_weights[l] for l in labels]),
    )
    diag = Diagnostics()
    for rep in range(12):
        sims = simulate_dataset(actuals, ls, prof, seed, 4, rep, diag)
        pred = [s.predicted for s in sims]
        assert (build_confusion(actuals, pred, ls).as_array() == conf[rep]).all()
        assert twct(inst, wspt_order(inst, pred)) == totals[rep]
    assert degenerate == diag.degenerate


@pytest.mark.parametrize("labels, tpr, fpr", PROFILES)
def test_backends_bit_identical(labels, tpr, fpr):
    if len(kernels.BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    k = len(labels)
    rng = np.random.default_rng(0)
    actual = rng.integers(0, k, size=57)
    durations = rng.uniform(1, 10, size=57)
    weights = rng.uniform(10, 100, size=k)
    positive = 1 if k == 2 else -1
    outs = [
        b.simulate_cell(actual, np.array(tpr), np.array(fpr), positive, 2**64 - 5, 9, durations, weights)
        for b in kernels.BACKENDS.values()
    ]
    (c1, t1, d1), (c2, t2, d2) = outs
    assert (c1 == c2).all() and t1.tobytes() == t2.tobytes() and d1 == d2
    labs = [
        b.simulate_labels(actual, np.array(tpr), np.array(fpr), positive, 12345)
        for b in kernels.BACKENDS.values()
    ]
    assert (labs[0][0] == labs[1][0]).all() and labs[0][1] == labs[1][1]


def test_simulate_labels_streams(backend):
    seed = SeedSpec(8)
    ls = LabelSet(("A", "B", "C"), (4, 4, 4))
    prof = RateProfile((0.5, 0.4, 0.3), (0.2, 0.3, 0.1))
    actuals = ls.actual_sequence()
    idx = np.array([ls.index(a) for a in actuals])
    pred, _ = backend.simulate_labels(idx, np.array(prof.tpr), np.array(prof.fpr), -1, seed.key(TAG_SIMULATION, 2, 5))
    ref = simulate_dataset(actuals, ls, prof, seed, 2, 5)
    assert [ls.labels[i] for i in pred] == [s.predicted for s in ref]


def test_tie_break_by_job_order(backend):
    # equal ratios everywhere: the schedule must follow job order
    conf, totals, _ = backend.simulate_cell(
        np.zeros(4, dtype=np.int64), np.array([1.0, 1.0]), np.array([0.0, 0.0]), 0, 1, 1,
        np.array([2.0, 2.0, 2.0, 2.0]), np.array([5.0, 5.0]),
    )
    assert totals[0] == 5 * (2 + 4 + 6 + 8)


def test_env_override_selects_python(monkeypatch):
    import importlib

    monkeypatch.setenv("SIMPTO_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("SIMPTO_PURE_PYTHON")
        importlib.reload(kernels)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@settings(max_examples=150, deadline=None)
@given(
    st.integers(2, 4).flatmap(
        lambda k: st.tuples(
            st.just(k),
            st.lists(st.integers(0, k - 1), min_size=1, max_size=30),
            st.lists(st.sampled_from([1.0, 2.0, 4.0]), min_size=30, max_size=30),
            st.lists(st.sampled_from([10.0, 20.0, 40.0]), min_size=k, max_size=k),
            st.lists(st.floats(0, 1), min_size=k, max_size=k),
            st.lists(st.floats(0, 1), min_size=k, max_size=k),
        )
    ),
    st.integers(0, 2**64 - 1),
)
def test_tie_heavy_schedules_agree(case, key):
    k, actual, durs, weights, tpr, fpr = case
    n = len(actual)
    actual = np.array(actual, dtype=np.int64)
    durations = np.array(durs[:n])
    weights = np.array(weights)
    positive = 0 if k == 2 else -1
    results = [
        b.simulate_cell(actual, np.array(tpr), np.array(fpr), positive, key, 3, durations, weights)
        for b in kernels.BACKENDS.values()
    ]
    conf0, tot0, _ = results[0]
    for conf, tot, _ in results[1:]:
        assert (conf == conf0).all() and tot.tobytes() == tot0.tobytes()
    # scalar WSPT on the same predictions
    labels = [f"c{i}" for i in range(k)]
    inst = SchedulingInstance(
        tuple(Job(i, float(durations[i]), labels[a]) for i, a in enumerate(actual)),
        dict(zip(labels, weights.tolist())),
    )
    for rep in range(3):
        pred, _ = kernels.get_backend().simulate_labels(
            actual, np.array(tpr), np.array(fpr), positive, derive(key, rep)
        )
        assert twct(inst, wspt_order(inst, [labels[c] for c in pred])) == tot0[rep]
