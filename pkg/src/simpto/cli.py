"""``simpto`` command-line entry point."""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import kernels
from .experiment import (
    GridTooLarge,
    aggregate_report,
    deviation_summary,
    evaluate_model,
    generate_instance,
    model_report,
    run_grid,
    summary_rates,
    threshold_frontier,
)
from .formats import (
    FormatError,
    read_config,
    read_instance,
    read_predictions,
    read_results,
    write_csv,
    write_instance,
    write_predictions,
)
from .metrics import ConfusionMatrix, LabelSet, RateProfile, count_confusion_matrices, matrix_at, rates_one_vs_rest
from .schedule import gap, optimal_twct, twct, wspt_order
from .seeding import SeedSpec
from .simulate import Diagnostics, simulate_dataset


class CLIError(Exception):
    pass


def _load_config(args):
    if not args.config:
        raise CLIError("--config is required")
    config = read_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=SeedSpec(args.seed))
    return config


def _out(args):
    return sys.stdout if args.output in (None, "-") else args.output


def _floats(text, what):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise CLIError(f"{what} must be a comma-separated list of numbers") from None


def _parse_matrix(text, labels):
    try:
        rows = [tuple(int(v) for v in r.split(",")) for r in text.split(";")]
    except ValueError:
        raise CLIError("--matrix must look like '8,2;3,7'") from None
    return ConfusionMatrix(tuple(rows), labels)


def cmd_enumerate(args):
    if args.config:
        config = _load_config(args)
        labels = config.label_set
        stride = args.stride or config.stride
    else:
        if not (args.labels and args.counts):
            raise CLIError("give --config or both --labels and --counts")
        names = [s.strip() for s in args.labels.split(",")]
        labels = LabelSet(tuple(names), tuple(int(c) for c in args.counts.split(",")))
        stride = args.stride or 1
    names = labels.labels
    columns = ["matrix_id", "matrix", "actual_tpr_macro", "actual_fpr_macro"]
    for lab in names:
        columns += [f"actual_tpr_{lab}", f"actual_fpr_{lab}"]

    def rows():
        for i in range(0, count_confusion_matrices(labels), stride):
            m = matrix_at(labels, i)
            p = rates_one_vs_rest(m)
            t, f = summary_rates(p, labels)
            row = {"matrix_id": i, "matrix": str(m), "actual_tpr_macro": t, "actual_fpr_macro": f}
            for j, lab in enumerate(names):
                row[f"actual_tpr_{lab}"] = p.tpr[j]
                row[f"actual_fpr_{lab}"] = p.fpr[j]
            yield row

    write_csv(columns, rows(), _out(args))


def cmd_simulate(args):
    config = _load_config(args)
    labels = config.label_set
    if args.matrix:
        profile = rates_one_vs_rest(_parse_matrix(args.matrix, labels))
    elif args.tpr and args.fpr:
        profile = RateProfile(_floats(args.tpr, "--tpr"), _floats(args.fpr, "--fpr"))
        if profile.k != labels.k:
            raise CLIError(f"rates given for {profile.k} classes, config has {labels.k}")
    else:
        raise CLIError("give --matrix or both --tpr and --fpr")
    actuals = labels.actual_sequence()
    diag = Diagnostics()
    sims = simulate_dataset(actuals, labels, profile, config.seed, args.cell, args.rep, diag)
    write_predictions([(i, s.actual, s.predicted) for i, s in enumerate(sims)], _out(args))
    if diag.degenerate:
        print(f"simpto: {diag.degenerate} draw(s) used the uniform fallback (all other FPRs zero)", file=sys.stderr)


def _weights_path(args, instance_path):
    if args.weights:
        return args.weights
    p = Path(instance_path)
    return p.with_name(p.stem + ".weights.csv")


def cmd_schedule(args):
    if args.instance is None:
        config = _load_config(args)
        if args.output in (None, "-"):
            raise CLIError("--output is required when generating an instance")
        instance = generate_instance(config)
        write_instance(instance, args.output, _weights_path(args, args.output))
        return
    instance = read_instance(args.instance, _weights_path(args, args.instance))
    if args.predictions:
        model = read_predictions(args.predictions, instance)
        types = list(model.predicted)
    else:
        types = instance.actual_types
    order = wspt_order(instance, types)
    by_id = {j.job_id: (j, t) for j, t in zip(instance.jobs, types)}
    rows, clock = [], 0.0
    for pos, jid in enumerate(order):
        job, t = by_id[jid]
        clock += job.duration
        rows.append(
            {
                "position": pos,
                "job_id": jid,
                "duration": job.duration,
                "actual_type": job.actual_type,
                "predicted_type": t,
                "completion": clock,
            }
        )
    write_csv(list(rows[0]), rows, _out(args))
    value = twct(instance, order)
    best = optimal_twct(instance)
    print(f"objective={value:.6g} optimum={best:.6g} gap={gap(instance, types):.6g}%", file=sys.stderr)


def cmd_grid(args):
    config = _load_config(args)
    if args.stride:
        config = dataclasses.replace(config, stride=args.stride)
    records = run_grid(config, workers=args.workers, allow_large=args.allow_large, backend=args.backend)
    columns, rows = aggregate_report(records)
    write_csv(columns, rows, _out(args))


def cmd_ingest(args):
    config = _load_config(args)
    instance = read_instance(args.instance, _weights_path(args, args.instance))
    comparisons = [evaluate_model(read_predictions(p, instance), instance, config) for p in args.predictions]
    columns, rows = model_report(comparisons)
    write_csv(columns, rows, _out(args))


def cmd_report(args):
    rows = read_results(args.results)
    if not rows:
        raise CLIError(f"{args.results}: no result rows")

    class _R:
        def __init__(self, r):
            self.actual_tpr = r["actual_tpr_macro"]
            self.actual_fpr = r["actual_fpr_macro"]
            self.sim_tpr_mean = r["sim_tpr_mean"]
            self.sim_fpr_mean = r["sim_fpr_mean"]
            self.gap_mean = r["gap_mean"]

    summary = deviation_summary(_R(r) for r in rows)
    out = [{"key": k, "value": v} for k, v in summary.items()]
    if args.max_gap is not None:
        pts = [(r["actual_tpr_macro"], r["actual_fpr_macro"], r["gap_mean"]) for r in rows]
        for t, f in threshold_frontier(pts, args.max_gap):
            out.append({"key": f"frontier_tpr_{t:.6g}", "value": f})
    write_csv(["key", "value"], out, _out(args))


def build_parser():
    parser = argparse.ArgumentParser(prog="simpto", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="experiment config file (key = value lines)")
        p.add_argument("--seed", type=int, help="override the config's base seed")
        p.add_argument("--output", "-o", help="output file (default: stdout)")
        return p

    p = common(sub.add_parser("enumerate", help="list all valid confusion matrices with their rates"))
    p.add_argument("--labels", help="comma-separated class labels (instead of --config)")
    p.add_argument("--counts", help="comma-separated class counts (instead of --config)")
    p.add_argument("--stride", type=int, help="keep every n-th matrix")
    p.set_defaults(func=cmd_enumerate)

    p = common(sub.add_parser("simulate", help="simulate one set of predictions"))
    p.add_argument("--matrix", help="confusion matrix rows, e.g. '8,2;3,7'")
    p.add_argument("--tpr", help="per-class TPR list")
    p.add_argument("--fpr", help="per-class FPR list")
    p.add_argument("--cell", type=int, default=0)
    p.add_argument("--rep", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("schedule", help="generate an instance, or schedule one by WSPT"))
    p.add_argument("--instance", help="instance CSV to schedule (omit to generate from --config)")
    p.add_argument("--weights", help="type,weight sidecar (default: <instance>.weights.csv)")
    p.add_argument("--predictions", help="predictions CSV; schedule by predicted types")
    p.set_defaults(func=cmd_schedule)

    p = common(sub.add_parser("grid", help="run the simulation grid and write the results CSV"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--stride", type=int, help="override the config's stride")
    p.add_argument("--allow-large", action="store_true", help="ignore the grid-size guard")
    p.add_argument("--backend", choices=sorted(kernels.BACKENDS), help="kernel backend")
    p.set_defaults(func=cmd_grid)

    p = common(sub.add_parser("ingest", help="compare real model predictions with simulations"))
    p.add_argument("--instance", required=True)
    p.add_argument("--weights")
    p.add_argument("predictions", nargs="+", help="one predictions CSV per model")
    p.set_defaults(func=cmd_ingest)

    p = common(sub.add_parser("report", help="summarise a results CSV"))
    p.add_argument("results")
    p.add_argument("--max-gap", type=float, help="also list the TPR/FPR frontier for this gap (percent)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (CLIError, FormatError, GridTooLarge, ValueError, OSError, OverflowError) as exc:
        print(f"simpto {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
