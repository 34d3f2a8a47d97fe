"""Command-line entry point: stats, generate, train, classify, curve.

Every subcommand is deterministic given its flags — all randomness is seeded
through ``--seed`` — and echoes its fully resolved configuration (defaults
included) to stderr as one JSON line. Outputs that tolerate metadata (stats,
classify, curve) also carry the resolved configuration as leading ``#``
comment lines; event-log and model files are pure data formats and do not.

Exit status is 0 iff the run emitted no errors; classification failures are
per-row (the run continues) but still force a nonzero exit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench, dataset, model_io
from ._kernels import BACKEND
from .core import WisardModel, WnnConfig
from .encoding import ENCODERS, EncodingError, UnitCatalog
from .errors import InputError, ToolkitError


def _echo_resolved(command: str, resolved: dict) -> None:
    print(f"[wisardflow:{command}] {json.dumps(resolved, sort_keys=True)}",
          file=sys.stderr)


def _comment_lines(resolved: dict) -> str:
    return "".join(f"# {key}={resolved[key]}\n" for key in sorted(resolved))


def _parse_state(value: str) -> tuple[bool, ...]:
    states = {"on": (True,), "off": (False,), "both": (True, False)}
    return states[value]


def _class_traces(log: dataset.EventLog, class_label: str | None):
    labels = log.class_labels()
    if labels:
        if class_label is None:
            raise InputError(
                f"log has classes ({', '.join(labels)}); pick one with --class")
        if class_label not in labels:
            raise InputError(f"class {class_label!r} not in log (have {', '.join(labels)})")
    elif class_label is not None:
        raise InputError("log has no class column; drop --class")
    return class_label


# ---------------------------------------------------------------------------
# Subcommands


def cmd_stats(args) -> int:
    log = dataset.load_event_log(args.input, delimiter=args.delimiter)
    stats = dataset.log_stats(log, encoder=args.encoder)
    resolved = {"command": "stats", "input": str(args.input),
                "encoder": args.encoder, "delimiter": args.delimiter,
                "traces": len(log)}
    _echo_resolved("stats", resolved)

    columns = ("class", "total", "symbols", "entropy", "norm_entropy",
               "max_px", "density", "density_mean")
    d = args.delimiter

    def fmt(value):
        return f"{value:.6f}" if isinstance(value, float) else str(value)

    lines = [_comment_lines(resolved), d.join(columns) + "\n"]
    for s in stats:
        lines.append(d.join(fmt(v) for v in (
            s.label, s.total, s.symbols, s.entropy, s.norm_entropy,
            s.max_px, s.density, s.density_mean)) + "\n")
    numeric = [(s.total, s.symbols, s.entropy, s.norm_entropy, s.max_px,
                s.density, s.density_mean) for s in stats]
    for name, agg in (("min", min), ("max", max),
                      ("avg", lambda col: sum(col) / len(col))):
        row = [agg([r[i] for r in numeric]) for i in range(len(numeric[0]))]
        if name == "avg":
            row = [float(v) for v in row]
        lines.append(d.join([name] + [fmt(v) for v in row]) + "\n")

    text = "".join(lines)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_generate(args) -> int:
    spec = dataset.load_synth_spec(args.spec)
    if args.seed is not None:
        spec.seed = args.seed
        spec.validate()
    log = dataset.generate_synthetic(spec)
    dataset.write_event_log(log, args.output, delimiter=args.delimiter)
    _echo_resolved("generate", {
        "command": "generate", "spec": str(args.spec), "seed": spec.seed,
        "output": str(args.output), "delimiter": args.delimiter,
        "traces": len(log)})
    return 0


def cmd_train(args) -> int:
    log = dataset.load_event_log(args.input, delimiter=args.delimiter)
    class_label = _class_traces(log, args.class_label)
    sp, np_ = log.split_tags(class_label)
    catalog = dataset.build_catalog(log.traces)
    max_seq = dataset.infer_max_seq(log.traces)
    config = WnnConfig(bits_per_tuple=args.ram_bits,
                       bleaching=args.bleaching == "on",
                       ignore_zero=args.ignore_zero == "on",
                       mapping_seed=args.seed)
    model = WisardModel(config, len(catalog) * max_seq)
    for trace in sp + np_:
        retina = dataset.encode_log([trace], catalog, max_seq, args.encoder)[0]
        model.train(retina, trace.tag)
    extras = {"catalog": list(catalog.units), "max_seq": max_seq,
              "encoder": args.encoder, "class": class_label}
    model_io.save_model(model, args.output, extras)
    _echo_resolved("train", {
        "command": "train", "input": str(args.input), "class": class_label,
        "ram_bits": args.ram_bits, "bleaching": args.bleaching,
        "ignore_zero": args.ignore_zero, "seed": args.seed,
        "encoder": args.encoder, "delimiter": args.delimiter,
        "trained": {"SP": len(sp), "NP": len(np_)}, "output": str(args.output)})
    return 0


def cmd_classify(args) -> int:
    model, extras = model_io.load_model(args.model)
    try:
        catalog = UnitCatalog(extras["catalog"])
        max_seq = int(extras["max_seq"])
        encoder = extras.get("encoder", "one_hot")
    except (KeyError, TypeError) as exc:
        raise InputError(f"model file lacks encoding metadata: {exc}") from exc
    log = dataset.load_event_log(args.input, delimiter=args.delimiter)
    resolved = {"command": "classify", "model": str(args.model),
                "input": str(args.input), "encoder": encoder,
                "delimiter": args.delimiter, "traces": len(log)}
    _echo_resolved("classify", resolved)

    d = args.delimiter
    lines = [_comment_lines(resolved),
             d.join(("case_id", "prediction", "score", "bleach", "ambiguous", "error")) + "\n"]
    failures = 0
    for trace in log.traces:
        try:
            retina = dataset.encode_log([trace], catalog, max_seq, encoder)[0]
            result = model.classify(retina)
            lines.append(d.join((trace.case_id, result.label, str(result.score),
                                 str(result.final_bleach), str(int(result.ambiguous)),
                                 "")) + "\n")
        except EncodingError as exc:
            failures += 1
            lines.append(d.join((trace.case_id, "", "", "", "", str(exc))) + "\n")
    Path(args.output).write_text("".join(lines), encoding="utf-8")
    if failures:
        print(f"[wisardflow:classify] {failures} trace(s) failed", file=sys.stderr)
    return 1 if failures else 0


def cmd_curve(args) -> int:
    log = dataset.load_event_log(args.input, delimiter=args.delimiter)
    class_label = _class_traces(log, args.class_label)
    grid = bench.ExperimentGrid(
        ram_sizes=tuple(int(v) for v in args.ram_bits.split(",")),
        bleaching_states=_parse_state(args.bleaching),
        ignore_zero_states=_parse_state(args.ignore_zero),
        reps=args.reps,
        step=args.step,
        train_sizes=tuple(int(v) for v in args.sizes.split(",")) if args.sizes else None,
        max_train_size=args.max_size,
        master_seed=args.seed,
        freeze_mapping=args.freeze_mapping,
    )
    resolved = {
        "command": "curve", "input": str(args.input), "class": class_label,
        "ram_bits": args.ram_bits, "bleaching": args.bleaching,
        "ignore_zero": args.ignore_zero, "reps": args.reps, "step": args.step,
        "sizes": args.sizes, "max_size": args.max_size, "seed": args.seed,
        "freeze_mapping": args.freeze_mapping, "jobs": args.jobs,
        "positive_tag": args.positive_tag, "baseline": args.baseline,
        "threshold": args.threshold, "encoder": args.encoder,
        "delimiter": args.delimiter, "kernel_backend": BACKEND,
    }
    _echo_resolved("curve", resolved)
    points = bench.run_learning_curve(
        log, class_label, grid, encoder=args.encoder,
        positive_tag=args.positive_tag, jobs=args.jobs)
    selection = bench.best_config(points, threshold=args.threshold)
    all_points = list(points)
    if args.baseline:
        all_points += bench.run_baseline_curve(
            log, class_label, grid, encoder=args.encoder,
            positive_tag=args.positive_tag, jobs=args.jobs)
    meta = {k: v for k, v in resolved.items() if v is not None}
    bench.write_curve_points(all_points, args.output, delimiter=args.delimiter,
                             metadata=meta)
    if args.rep_values:
        bench.write_rep_values(all_points, args.rep_values,
                               delimiter=args.delimiter, metadata=meta)
    print(f"[wisardflow:curve] {selection.describe()}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wisardflow",
        description="Weightless-classifier toolkit for business-process flows.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output_required=True):
        p.add_argument("--input", "-i", required=True, help="event-log file")
        if output_required:
            p.add_argument("--output", "-o", required=True, help="output file")
        p.add_argument("--delimiter", default=",", help="field delimiter (default ,)")

    p = sub.add_parser("stats", help="per-class dataset summary")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", default=None, help="default: stdout")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--encoder", choices=ENCODERS, default="one_hot")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("generate", help="emit a synthetic event log from a JSON spec")
    p.add_argument("--spec", required=True, help="generator spec (JSON)")
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the spec's seed")
    p.add_argument("--delimiter", default=",")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train one class's conformance model")
    common(p)
    p.add_argument("--class", dest="class_label", default=None)
    p.add_argument("--ram-bits", type=int, default=8)
    p.add_argument("--bleaching", choices=("on", "off"), default="on")
    p.add_argument("--ignore-zero", choices=("on", "off"), default="off")
    p.add_argument("--seed", type=int, default=0, help="mapping seed")
    p.add_argument("--encoder", choices=ENCODERS, default="one_hot")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify a log with a trained model")
    common(p)
    p.add_argument("--model", required=True, help="model file from `train`")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("curve", help="learning-curve grid for one class")
    common(p)
    p.add_argument("--class", dest="class_label", default=None)
    p.add_argument("--ram-bits", default="2,4,8,16", help="comma list of tuple widths")
    p.add_argument("--bleaching", choices=("on", "off", "both"), default="both")
    p.add_argument("--ignore-zero", choices=("on", "off", "both"), default="both")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--step", type=int, default=2)
    p.add_argument("--sizes", default=None, help="explicit comma list of train sizes")
    p.add_argument("--max-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--freeze-mapping", action="store_true",
                   help="one mapping per configuration instead of one per repetition")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.add_argument("--positive-tag", choices=dataset.TAGS, default=dataset.TAG_STANDARD)
    p.add_argument("--baseline", action="store_true",
                   help="append the 1-NN Hamming comparison curve")
    p.add_argument("--threshold", type=float, default=0.9,
                   help="best-config selection threshold")
    p.add_argument("--rep-values", default=None, help="also write per-repetition F1 rows")
    p.add_argument("--encoder", choices=ENCODERS, default="one_hot")
    p.set_defaults(func=cmd_curve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"wisardflow {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"wisardflow {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
