"""Experiment grid: instance generation, simulation cells, model ingestion."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .metrics import (
    ConfusionMatrix,
    LabelSet,
    RateProfile,
    binary_rates,
    build_confusion,
    count_confusion_matrices,
    enumerate_confusion_matrices,
    macro_rates,
    matrix_at,
    matrix_index,
    rates_one_vs_rest,
)
from .schedule import Job, SchedulingInstance, optimal_twct, twct, wspt_order
from .seeding import TAG_DURATION, TAG_SAMPLE, TAG_SIMULATION, TAG_WEIGHT, SeedSpec, uniform_at

DEFAULT_MAX_CELLS = 10**6
MAX_CELLS_ENV = "SIMPTO_MAX_CELLS"


class GridTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    label_set: LabelSet
    test_size: int | None = None
    repetitions: int = 100
    weight_range: tuple = (10.0, 100.0)
    duration_range: tuple = (1.0, 10.0)
    seed: SeedSpec = field(default_factory=SeedSpec)
    stride: int = 1
    sample: int | None = None
    max_cells: int | None = None

    def __post_init__(self):
        if self.test_size is None:
            object.__setattr__(self, "test_size", self.label_set.size)
        if self.test_size != self.label_set.size:
            raise ValueError(f"test_size {self.test_size} != sum of class counts {self.label_set.size}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        for name in ("weight_range", "duration_range"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"{name} must satisfy 0 < low <= high, got ({lo}, {hi})")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if self.stride < 1:
            raise ValueError("stride must be at least 1")
        if self.sample is not None and self.sample < 1:
            raise ValueError("sample must be at least 1")


@dataclass(frozen=True)
class ExperimentRecord:
    """One grid cell.

    ``actual_tpr``/``actual_fpr`` and the ``sim_*`` summary rates are the
    positive-class rates for K = 2 and macro averages for K > 2.
    """

    matrix_id: int
    matrix: ConfusionMatrix
    actual: RateProfile
    actual_tpr: float
    actual_fpr: float
    sim_tpr_mean: float
    sim_tpr_std: float
    sim_fpr_mean: float
    sim_fpr_std: float
    sim_tpr_class: tuple
    sim_fpr_class: tuple
    gap_mean: float
    gap_std: float
    objective_mean: float
    objective_std: float
    optimum: float
    repetitions: int
    degenerate: int = 0


@dataclass(frozen=True)
class IngestedModel:
    name: str
    actual: tuple
    predicted: tuple

    def __post_init__(self):
        object.__setattr__(self, "actual", tuple(self.actual))
        object.__setattr__(self, "predicted", tuple(self.predicted))
        if len(self.actual) != len(self.predicted):
            raise ValueError(f"model {self.name}: {len(self.actual)} actual vs {len(self.predicted)} predicted labels")


@dataclass(frozen=True)
class ModelComparison:
    name: str
    actual_tpr: float
    actual_fpr: float
    actual_objective: float
    actual_gap: float
    simulated: ExperimentRecord


def summary_rates(profile: RateProfile, labels: LabelSet) -> tuple:
    if labels.k == 2:
        return profile.tpr[labels.positive], profile.fpr[labels.positive]
    return macro_rates(profile)


def generate_instance(config: ExperimentConfig) -> SchedulingInstance:
    """Jobs typed in label order; weights per type and durations per job drawn
    uniformly from the configured ranges."""
    seed = config.seed
    wlo, whi = config.weight_range
    dlo, dhi = config.duration_range
    weights = {
        lab: wlo + (whi - wlo) * uniform_at(seed.key(TAG_WEIGHT, i), 0)
        for i, lab in enumerate(config.label_set.labels)
    }
    jobs = [
        Job(i, dlo + (dhi - dlo) * uniform_at(seed.key(TAG_DURATION, i), 0), t)
        for i, t in enumerate(config.label_set.actual_sequence())
    ]
    return SchedulingInstance(tuple(jobs), weights)


def _gap_percent(values, best):
    # WSPT on actual types is optimal; negatives are float residue from tied jobs
    return np.maximum(100.0 * (values - best) / best, 0.0)


class _CellContext:
    """Per-instance arrays shared by every cell of a grid."""

    def __init__(self, labels: LabelSet, instance: SchedulingInstance, actuals: Sequence, config, kernel):
        if list(actuals) != instance.actual_types:
            raise ValueError("actual labels do not match the instance's job types")
        if LabelSet.from_actuals(actuals, labels.labels).counts != labels.counts:
            raise ValueError("confusion matrix class counts do not match the actual labels")
        self.labels = labels
        self.config = config
        self.kernel = kernel or kernels.get_backend()
        lookup = {lab: i for i, lab in enumerate(labels.labels)}
        self.actual_idx = np.array([lookup[a] for a in actuals], dtype=np.int64)
        self.durations = np.array([j.duration for j in instance.jobs], dtype=np.float64)
        self.weights = np.array([instance.weight(lab) for lab in labels.labels], dtype=np.float64)
        self.positive = labels.positive if labels.k == 2 else -1
        self.counts = np.array(labels.counts, dtype=np.float64)
        self.rest = self.counts.sum() - self.counts
        self.present = self.counts > 0
        self.best = optimal_twct(instance)

    def run(self, matrix: ConfusionMatrix, cell: int) -> ExperimentRecord:
        return self.run_many([(cell, matrix)])[0]

    def run_many(self, cells) -> list[ExperimentRecord]:
        """Simulate every (cell id, matrix) pair, then aggregate them together."""
        labels = self.labels
        reps = self.config.repetitions
        k = labels.k
        profiles = []
        conf = np.empty((len(cells), reps, k, k), dtype=np.int64)
        totals = np.empty((len(cells), reps), dtype=np.float64)
        degenerate = []
        for n, (cell, matrix) in enumerate(cells):
            if matrix.label_set.counts != labels.counts or matrix.label_set.labels != labels.labels:
                raise ValueError("confusion matrix label set does not match the experiment's")
            profile = rates_one_vs_rest(matrix)
            profiles.append(profile)
            conf[n], totals[n], d = self.kernel.simulate_cell(
                self.actual_idx,
                np.array(profile.tpr, dtype=np.float64),
                np.array(profile.fpr, dtype=np.float64),
                self.positive,
                self.config.seed.key(TAG_SIMULATION, cell),
                reps,
                self.durations,
                self.weights,
            )
            degenerate.append(int(d))

        diag = np.diagonal(conf, axis1=2, axis2=3).astype(np.float64)
        cols = conf.sum(axis=2).astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            tpr = np.where(self.present, diag / self.counts, 0.0)
            fpr = np.where(self.rest > 0, (cols - diag) / self.rest, 0.0)
        if k == 2:
            tpr_s, fpr_s = tpr[..., labels.positive], fpr[..., labels.positive]
        else:
            tpr_s = tpr[..., self.present].mean(axis=-1)
            fpr_s = fpr[..., self.present].mean(axis=-1)
        gaps = _gap_percent(totals, self.best)

        series = np.stack([tpr_s, fpr_s, gaps, totals], axis=1)
        means = series.mean(axis=2).tolist()
        if reps > 1:
            # constant series: report exactly zero spread, not rounding residue
            stds = np.where(np.ptp(series, axis=2) == 0, 0.0, series.std(axis=2, ddof=1)).tolist()
        else:
            stds = np.zeros(series.shape[:2]).tolist()
        tpr_class = tpr.mean(axis=1).tolist()
        fpr_class = fpr.mean(axis=1).tolist()

        records = []
        for n, (cell, matrix) in enumerate(cells):
            act_tpr, act_fpr = summary_rates(profiles[n], labels)
            m, sd = means[n], stds[n]
            records.append(
                ExperimentRecord(
                    matrix_id=cell,
                    matrix=matrix,
                    actual=profiles[n],
                    actual_tpr=act_tpr,
                    actual_fpr=act_fpr,
                    sim_tpr_mean=m[0],
                    sim_tpr_std=sd[0],
                    sim_fpr_mean=m[1],
                    sim_fpr_std=sd[1],
                    sim_tpr_class=tuple(tpr_class[n]),
                    sim_fpr_class=tuple(fpr_class[n]),
                    gap_mean=m[2],
                    gap_std=sd[2],
                    objective_mean=m[3],
                    objective_std=sd[3],
                    optimum=self.best,
                    repetitions=reps,
                    degenerate=degenerate[n],
                )
            )
        return records


def run_cell(
    matrix: ConfusionMatrix,
    instance: SchedulingInstance,
    actuals: Sequence,
    config: ExperimentConfig,
    cell: int,
    kernel=None,
) -> ExperimentRecord:
    """Simulate ``config.repetitions`` classifiers with the matrix's rates and
    aggregate their simulated rates and scheduling gaps (sample std)."""
    return _CellContext(matrix.label_set, instance, actuals, config, kernel).run(matrix, cell)


def select_cells(config: ExperimentConfig) -> list:
    """Matrix ids kept by the config's stride/sample filter, ascending."""
    total = count_confusion_matrices(config.label_set)
    ids = range(0, total, config.stride)
    if config.sample is not None and config.sample < len(ids):
        rng = np.random.default_rng([config.seed.base_seed, TAG_SAMPLE])
        picked = rng.choice(len(ids), size=config.sample, replace=False)
        return sorted(ids[int(i)] for i in picked)
    return list(ids)


def cell_limit(config: ExperimentConfig) -> int:
    if config.max_cells is not None:
        return config.max_cells
    env = os.environ.get(MAX_CELLS_ENV)
    return int(env) if env else DEFAULT_MAX_CELLS


_BATCH = 256


def _run_chunk(args):
    chunk, instance, config, backend = args
    ctx = _CellContext(config.label_set, instance, instance.actual_types, config, kernels.get_backend(backend))
    out = []
    for i in range(0, len(chunk), _BATCH):
        out += ctx.run_many(chunk[i : i + _BATCH])
    return out


def run_grid(
    config: ExperimentConfig,
    instance: SchedulingInstance | None = None,
    workers: int = 1,
    allow_large: bool = False,
    backend: str | None = None,
) -> list[ExperimentRecord]:
    """One record per selected confusion matrix, in enumeration order.

    Results do not depend on ``workers``: every cell reads its own streams.
    """
    if instance is None:
        instance = generate_instance(config)
    labels = config.label_set
    ids = select_cells(config)
    limit = cell_limit(config)
    if len(ids) > limit and not allow_large:
        raise GridTooLarge(
            f"grid has {len(ids)} cells, above the limit of {limit}; "
            f"raise max_cells, set {MAX_CELLS_ENV}, or pass allow_large"
        )
    if config.stride == 1 and len(ids) == count_confusion_matrices(labels):
        cells = list(enumerate(enumerate_confusion_matrices(labels)))
    else:
        cells = [(i, matrix_at(labels, i)) for i in ids]
    backend = backend or kernels.BACKEND
    if workers <= 1 or len(cells) < 2:
        return _run_chunk((cells, instance, config, backend))
    size = max(1, -(-len(cells) // (workers * 4)))
    chunks = [cells[i : i + size] for i in range(0, len(cells), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_chunk, [(c, instance, config, backend) for c in chunks])
        return [rec for part in parts for rec in part]


def evaluate_model(
    model: IngestedModel, instance: SchedulingInstance, config: ExperimentConfig, kernel=None
) -> ModelComparison:
    """Score a real model's predictions and simulate a classifier with the same
    confusion matrix. The simulation uses the matrix's grid index as its cell,
    so it reproduces the corresponding grid record."""
    labels = config.label_set
    if list(model.actual) != instance.actual_types:
        raise ValueError(f"model {model.name}: actual labels do not match the instance's job types")
    matrix = build_confusion(model.actual, model.predicted, labels)
    if matrix.label_set.counts != labels.counts:
        raise ValueError(
            f"model {model.name}: class counts {matrix.label_set.counts} differ from config {labels.counts}"
        )
    profile = rates_one_vs_rest(matrix)
    if labels.k == 2:
        tpr, fpr = binary_rates(matrix)
    else:
        tpr, fpr = macro_rates(profile)
    value = twct(instance, wspt_order(instance, model.predicted))
    best = optimal_twct(instance)
    sim = run_cell(matrix, instance, list(model.actual), config, matrix_index(matrix), kernel)
    return ModelComparison(
        name=model.name,
        actual_tpr=tpr,
        actual_fpr=fpr,
        actual_objective=value,
        actual_gap=float(_gap_percent(value, best)),
        simulated=sim,
    )


RESULT_COLUMNS = [
    "matrix_id",
    "actual_tpr_macro",
    "actual_fpr_macro",
    "sim_tpr_mean",
    "sim_tpr_std",
    "sim_fpr_mean",
    "sim_fpr_std",
    "gap_mean",
    "gap_std",
]


def aggregate_report(records: Iterable[ExperimentRecord]) -> tuple[list, list]:
    """(columns, rows) for the plot-ready results table, sorted by matrix id."""
    records = sorted(records, key=lambda r: r.matrix_id)
    if not records:
        raise ValueError("no records to aggregate")
    labels = records[0].matrix.label_set.labels
    per_class = []
    for lab in labels:
        per_class += [f"actual_tpr_{lab}", f"actual_fpr_{lab}", f"sim_tpr_{lab}_mean", f"sim_fpr_{lab}_mean"]
    columns = RESULT_COLUMNS + per_class + [
        "objective_mean",
        "objective_std",
        "optimum",
        "repetitions",
        "degenerate",
        "matrix",
    ]
    rows = []
    for r in records:
        row = {
            "matrix_id": r.matrix_id,
            "actual_tpr_macro": r.actual_tpr,
            "actual_fpr_macro": r.actual_fpr,
            "sim_tpr_mean": r.sim_tpr_mean,
            "sim_tpr_std": r.sim_tpr_std,
            "sim_fpr_mean": r.sim_fpr_mean,
            "sim_fpr_std": r.sim_fpr_std,
            "gap_mean": r.gap_mean,
            "gap_std": r.gap_std,
            "objective_mean": r.objective_mean,
            "objective_std": r.objective_std,
            "optimum": r.optimum,
            "repetitions": r.repetitions,
            "degenerate": r.degenerate,
            "matrix": str(r.matrix),
        }
        for i, lab in enumerate(labels):
            row[f"actual_tpr_{lab}"] = r.actual.tpr[i]
            row[f"actual_fpr_{lab}"] = r.actual.fpr[i]
            row[f"sim_tpr_{lab}_mean"] = r.sim_tpr_class[i]
            row[f"sim_fpr_{lab}_mean"] = r.sim_fpr_class[i]
        rows.append(row)
    return columns, rows


MODEL_COLUMNS = [
    "model",
    "matrix_id",
    "actual_tpr",
    "sim_tpr_mean",
    "sim_tpr_std",
    "actual_fpr",
    "sim_fpr_mean",
    "sim_fpr_std",
    "actual_objective",
    "sim_objective_mean",
    "sim_objective_std",
    "actual_gap",
    "sim_gap_mean",
    "sim_gap_std",
    "optimum",
]


def model_report(comparisons: Iterable[ModelComparison]) -> tuple[list, list]:
    rows = []
    for c in comparisons:
        s = c.simulated
        rows.append(
            {
                "model": c.name,
                "matrix_id": s.matrix_id,
                "actual_tpr": c.actual_tpr,
                "sim_tpr_mean": s.sim_tpr_mean,
                "sim_tpr_std": s.sim_tpr_std,
                "actual_fpr": c.actual_fpr,
                "sim_fpr_mean": s.sim_fpr_mean,
                "sim_fpr_std": s.sim_fpr_std,
                "actual_objective": c.actual_objective,
                "sim_objective_mean": s.objective_mean,
                "sim_objective_std": s.objective_std,
                "actual_gap": c.actual_gap,
                "sim_gap_mean": s.gap_mean,
                "sim_gap_std": s.gap_std,
                "optimum": s.optimum,
            }
        )
    return MODEL_COLUMNS, rows


def region_mean_gap(records, tpr_min=0.0, tpr_max=1.0, fpr_min=0.0, fpr_max=1.0) -> float | None:
    """Mean of the cells' gap means over an actual-rate rectangle (None if empty)."""
    gaps = [
        r.gap_mean
        for r in records
        if tpr_min <= r.actual_tpr <= tpr_max and fpr_min <= r.actual_fpr <= fpr_max
    ]
    return float(np.mean(gaps)) if gaps else None


def deviation_summary(records) -> dict:
    records = list(records)
    if not records:
        raise ValueError("no records to summarise")
    return {
        "cells": len(records),
        "max_tpr_deviation": max(abs(r.sim_tpr_mean - r.actual_tpr) for r in records),
        "max_fpr_deviation": max(abs(r.sim_fpr_mean - r.actual_fpr) for r in records),
        "min_gap_mean": min(r.gap_mean for r in records),
        "max_gap_mean": max(r.gap_mean for r in records),
    }


def threshold_frontier(points, max_gap: float) -> list[tuple]:
    """For each TPR level t, the largest FPR level f such that every cell with
    TPR >= t and FPR <= f has mean gap <= ``max_gap``.

    ``points`` are (tpr, fpr, gap) triples. Levels are the distinct observed
    rates; TPR levels with no admissible FPR are omitted.
    """
    points = list(points)
    out = []
    for t in sorted({p[0] for p in points}):
        above = [p for p in points if p[0] >= t]
        best = None
        for f in sorted({p[1] for p in above}):
            if all(g <= max_gap for tp, fp, g in above if fp <= f):
                best = f
            else:
                break
        if best is not None:
            out.append((t, best))
    return out
