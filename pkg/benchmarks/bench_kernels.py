"""Compare the compiled and numpy kernels on a grid workload.

    python benchmarks/bench_kernels.py [--counts 7,7,6] [--reps 100] [--cells 2000]
"""
import argparse
import time

import numpy as np

from simpto import kernels
from simpto.experiment import ExperimentConfig, generate_instance, run_grid
from simpto.metrics import LabelSet, count_confusion_matrices, enumerate_confusion_matrices, rates_one_vs_rest
from simpto.seeding import TAG_SIMULATION


def bench_kernel(backend, labels, inst, reps, cells, seed):
    idx = np.array([labels.index(a) for a in inst.actual_types], dtype=np.int64)
    durations = np.array([j.duration for j in inst.jobs])
    weights = np.array([inst.type_weights[lab] for lab in labels.labels])
    positive = labels.positive if labels.k == 2 else -1
    profiles = []
    for i, m in enumerate(enumerate_confusion_matrices(labels)):
        if i >= cells:
            break
        p = rates_one_vs_rest(m)
        profiles.append((np.array(p.tpr), np.array(p.fpr)))
    t0 = time.perf_counter()
    for i, (tpr, fpr) in enumerate(profiles):
        backend.simulate_cell(idx, tpr, fpr, positive, seed.key(TAG_SIMULATION, i), reps, durations, weights)
    return time.perf_counter() - t0, len(profiles)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--counts", default="7,7,6")
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--cells", type=int, default=2000)
    args = ap.parse_args()
    counts = tuple(int(c) for c in args.counts.split(","))
    labels = LabelSet(tuple(f"T{i}" for i in range(len(counts))), counts)
    cfg = ExperimentConfig(labels, repetitions=args.reps)
    inst = generate_instance(cfg)

    print(f"counts={counts} reps={args.reps} jobs={inst.n}")
    print(f"{'backend':<8} {'kernel s':>9} {'cells/s':>9} {'grid s':>8}")
    stride = max(1, count_confusion_matrices(labels) // args.cells)
    timings = {}
    for name, backend in sorted(kernels.BACKENDS.items()):
        secs, n = bench_kernel(backend, labels, inst, args.reps, args.cells, cfg.seed)
        t0 = time.perf_counter()
        run_grid(ExperimentConfig(labels, repetitions=args.reps, stride=stride), backend=name)
        grid = time.perf_counter() - t0
        timings[name] = secs
        print(f"{name:<8} {secs:>9.3f} {n / secs:>9.0f} {grid:>8.3f}")
    if len(timings) == 2:
        print(f"kernel speedup: {timings['python'] / timings['cython']:.1f}x")


if __name__ == "__main__":
    main()
