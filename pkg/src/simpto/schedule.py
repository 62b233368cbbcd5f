"""Single-machine total weighted completion time under the WSPT rule."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Hashable, Mapping, Sequence

BRUTE_FORCE_LIMIT = 10


@dataclass(frozen=True)
class Job:
    job_id: int
    duration: float
    actual_type: Hashable


@dataclass(frozen=True)
class SchedulingInstance:
    """Jobs (kept sorted by id) and the completion-time weight of each type."""

    jobs: tuple
    type_weights: Mapping

    def __post_init__(self):
        jobs = tuple(sorted(self.jobs, key=lambda j: j.job_id))
        ids = [j.job_id for j in jobs]
        if len(set(ids)) != len(ids):
            raise ValueError("job ids must be unique")
        if not jobs:
            raise ValueError("an instance needs at least one job")
        for j in jobs:
            if not j.duration > 0:
                raise ValueError(f"job {j.job_id} has non-positive duration {j.duration}")
            if j.actual_type not in self.type_weights:
                raise ValueError(f"job {j.job_id} has type {j.actual_type!r} with no weight")
        for t, w in self.type_weights.items():
            if not w > 0:
                raise ValueError(f"type {t!r} has non-positive weight {w}")
        object.__setattr__(self, "jobs", jobs)
        object.__setattr__(self, "type_weights", dict(self.type_weights))

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def actual_types(self) -> list:
        return [j.actual_type for j in self.jobs]

    def weight(self, t: Hashable) -> float:
        try:
            return self.type_weights[t]
        except KeyError:
            raise ValueError(f"no weight for job type {t!r}") from None


def wspt_order(instance: SchedulingInstance, types: Sequence) -> tuple:
    """Job ids by non-increasing weight/duration, ties by ascending id.

    ``types`` gives one (possibly predicted) type per job, aligned with
    ``instance.jobs``.
    """
    if len(types) != instance.n:
        raise ValueError(f"expected {instance.n} job types, got {len(types)}")
    keyed = [(-(instance.weight(t) / j.duration), j.job_id) for j, t in zip(instance.jobs, types)]
    keyed.sort()
    return tuple(job_id for _, job_id in keyed)


def twct(instance: SchedulingInstance, seq: Sequence) -> float:
    """Total weighted completion time of ``seq``, weighted by ACTUAL types."""
    by_id = {j.job_id: j for j in instance.jobs}
    if len(seq) != len(by_id) or set(seq) != set(by_id):
        raise ValueError("sequence is not a permutation of the instance's jobs")
    t = 0.0
    total = 0.0
    for job_id in seq:
        job = by_id[job_id]
        t += job.duration
        total += instance.type_weights[job.actual_type] * t
    return total


def optimal_twct(instance: SchedulingInstance) -> float:
    return twct(instance, wspt_order(instance, instance.actual_types))


def gap(instance: SchedulingInstance, predicted_types: Sequence) -> float:
    """Percent excess of the predicted-type WSPT schedule over the optimum."""
    best = optimal_twct(instance)
    value = twct(instance, wspt_order(instance, predicted_types))
    return 100.0 * (value - best) / best


def brute_force_optimal(instance: SchedulingInstance) -> tuple:
    """(sequence, value) minimising TWCT over all n! orders."""
    if instance.n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force is limited to {BRUTE_FORCE_LIMIT} jobs, got {instance.n}")
    jobs = [(j.job_id, j.duration, instance.type_weights[j.actual_type]) for j in instance.jobs]
    best_seq, best = None, float("inf")
    for perm in permutations(jobs):
        t = 0.0
        total = 0.0
        for _, p, w in perm:
            t += p
            total += w * t
        if total < best:
            best_seq, best = tuple(job_id for job_id, _, _ in perm), total
    return best_seq, best
