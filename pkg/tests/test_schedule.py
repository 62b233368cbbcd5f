import random
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from simpto.schedule import (
    Job,
    SchedulingInstance,
    brute_force_optimal,
    gap,
    optimal_twct,
    twct,
    wspt_order,
)


def inst(*jobs):
    """jobs as (duration, weight); each job gets its own type."""
    return SchedulingInstance(
        tuple(Job(i + 1, p, f"t{i + 1}") for i, (p, _) in enumerate(jobs)),
        {f"t{i + 1}": w for i, (_, w) in enumerate(jobs)},
    )


def random_instance(rng, n, types=("a", "b", "c")):
    weights = {t: rng.uniform(10, 100) for t in types}
    jobs = tuple(Job(i, rng.uniform(1, 10), rng.choice(types)) for i in range(n))
    return SchedulingInstance(jobs, weights)


def permutation_min(instance):
    """Oracle: minimum by exhaustive evaluation through the public twct."""
    return min(twct(instance, p) for p in permutations([j.job_id for j in instance.jobs]))


class TestWspt:
    def test_ratio_order(self):
        i = inst((1, 10), (10, 10))
        assert wspt_order(i, i.actual_types) == (1, 2)

    def test_ties_by_job_id(self):
        i = SchedulingInstance(
            (Job(3, 2.0, "a"), Job(1, 4.0, "b"), Job(2, 2.0, "a")), {"a": 5.0, "b": 10.0}
        )
        assert wspt_order(i, i.actual_types) == (1, 2, 3)

    def test_missing_weight(self):
        i = inst((1, 10), (2, 5))
        with pytest.raises(ValueError, match="no weight"):
            wspt_order(i, ["t1", "zz"])

    def test_optimal_against_permutations(self):
        rng = random.Random(0)
        for _ in range(100):
            i = random_instance(rng, rng.randint(1, 6))
            assert optimal_twct(i) == permutation_min(i)


class TestTwct:
    def test_single_job(self):
        assert twct(inst((3, 5)), (1,)) == 15

    def test_pair(self):
        i = inst((2, 4), (3, 5))
        assert twct(i, (1, 2)) == 33
        assert twct(i, (2, 1)) == 35

    def test_uses_actual_types(self):
        i = inst((2, 4), (3, 10))
        order = wspt_order(i, ["t2", "t1"])  # swapped predictions flip the order
        assert order == (1, 2)
        assert twct(i, order) == 4 * 2 + 10 * 5
        assert optimal_twct(i) == 10 * 3 + 4 * 5

    def test_not_a_permutation(self):
        i = inst((2, 4), (3, 5))
        with pytest.raises(ValueError):
            twct(i, (1, 1))
        with pytest.raises(ValueError):
            twct(i, (1,))

    def test_arithmetic_series(self):
        n, p, w = 6, 2.5, 7.0
        i = SchedulingInstance(tuple(Job(k, p, "a") for k in range(n)), {"a": w})
        assert optimal_twct(i) == pytest.approx(sum(w * (k * p) for k in range(1, n + 1)))


class TestGap:
    def test_zero_for_correct_predictions(self):
        rng = random.Random(1)
        i = random_instance(rng, 20)
        assert gap(i, i.actual_types) == 0.0

    def test_zero_when_all_orders_equivalent(self):
        i = SchedulingInstance(tuple(Job(k, 3.0, "ab"[k % 2]) for k in range(6)), {"a": 20.0, "b": 20.0})
        assert gap(i, ["a"] * 6) == 0.0
        assert gap(i, ["b", "a", "b", "b", "a", "a"]) == 0.0

    def test_against_brute_force_subinstances(self):
        rng = random.Random(2)
        big = random_instance(rng, 20)
        adversarial = [{"a": "c", "b": "a", "c": "b"}[t] for t in big.actual_types]
        full = gap(big, adversarial)
        assert full > 0
        for start in (0, 6, 12):
            sub = SchedulingInstance(big.jobs[start : start + 8], big.type_weights)
            pred = adversarial[start : start + 8]
            _, best = brute_force_optimal(sub)
            value = twct(sub, wspt_order(sub, pred))
            assert gap(sub, pred) == pytest.approx(100 * (value - best) / best, rel=1e-12, abs=1e-12)

    def test_missing_predicted_weight(self):
        i = inst((1, 2), (2, 3))
        with pytest.raises(ValueError):
            gap(i, ["t1", "nope"])


class TestBruteForce:
    def test_small_cases(self):
        assert brute_force_optimal(inst((3, 5))) == ((1,), 15)
        seq, value = brute_force_optimal(inst((2, 4), (3, 5)))
        assert value == 33 and seq == (1, 2)

    def test_n8_matches_wspt(self):
        rng = random.Random(8)
        i = random_instance(rng, 8)
        seq, value = brute_force_optimal(i)
        assert value == optimal_twct(i)
        assert twct(i, seq) == value

    def test_guard(self):
        rng = random.Random(0)
        with pytest.raises(ValueError, match="limited"):
            brute_force_optimal(random_instance(rng, 11))


class TestInstance:
    @pytest.mark.parametrize(
        "jobs, weights",
        [
            ((Job(1, 0.0, "a"),), {"a": 1.0}),
            ((Job(1, 1.0, "a"),), {"a": -1.0}),
            ((Job(1, 1.0, "b"),), {"a": 1.0}),
            ((Job(1, 1.0, "a"), Job(1, 2.0, "a")), {"a": 1.0}),
            ((), {"a": 1.0}),
        ],
    )
    def test_invalid(self, jobs, weights):
        with pytest.raises(ValueError):
            SchedulingInstance(jobs, weights)


instances = st.lists(
    st.tuples(st.floats(1, 10), st.sampled_from("abc")), min_size=1, max_size=12
).map(lambda js: tuple(Job(i, p, t) for i, (p, t) in enumerate(js)))
weight_maps = st.fixed_dictionaries({t: st.floats(10, 100) for t in "abc"})


@settings(max_examples=150)
@given(instances, weight_maps, st.data())
def test_gap_nonnegative(jobs, weights, data):
    i = SchedulingInstance(jobs, weights)
    pred = data.draw(st.lists(st.sampled_from("abc"), min_size=i.n, max_size=i.n))
    assert gap(i, pred) >= 0.0


@settings(max_examples=100)
@given(instances, weight_maps, st.floats(0.01, 100), st.data())
def test_weight_scaling(jobs, weights, factor, data):
    i = SchedulingInstance(jobs, weights)
    scaled = SchedulingInstance(jobs, {t: w * factor for t, w in weights.items()})
    pred = data.draw(st.lists(st.sampled_from("abc"), min_size=i.n, max_size=i.n))
    order = wspt_order(i, pred)
    assert abs(twct(scaled, order) - factor * twct(i, order)) <= 1e-9 * factor * twct(i, order)
    g1, g2 = gap(i, pred), gap(scaled, pred)
    assert abs(g1 - g2) <= 1e-9 * max(1.0, g1)


@settings(max_examples=150)
@given(instances, weight_maps, st.randoms())
def test_adjacent_interchange(jobs, weights, rnd):
    i = SchedulingInstance(jobs, weights)
    if i.n < 2:
        return
    seq = [j.job_id for j in i.jobs]
    rnd.shuffle(seq)
    by_id = {j.job_id: j for j in i.jobs}
    ratio = lambda jid: weights[by_id[jid].actual_type] / by_id[jid].duration
    for k in range(i.n - 1):
        if ratio(seq[k]) < ratio(seq[k + 1]):
            swapped = seq[:k] + [seq[k + 1], seq[k]] + seq[k + 2 :]
            assert twct(i, seq) >= twct(i, swapped) - 1e-9 * twct(i, seq)
