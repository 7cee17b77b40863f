"""Command-line pipeline: synth, train, explain, compare.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Human output goes
to stdout, diagnostics to stderr, machine output only to files named
``<stem>.{model,train,explain,compare}.json`` in the output directory.

A ``--config`` file may hold ``key=value`` lines (keys are flag names with
dashes as underscores); explicit flags override config values, which
override built-in defaults.
"""

import argparse
import json
import sys
from pathlib import Path

from .data import (
    BinaryDataset,
    FeatureSchema,
    load_csv,
    rank_features,
    save_csv,
    select_features,
    split,
)
from .errors import DnfnetError, TooManyRecords
from .explain import (
    aggregate_powerset,
    aggregate_raw,
    aggregate_standard,
    aggregate_tailored,
    collect_locals,
    dump_explanation_set,
    global_explanation_to_dict,
)
from .formula import format_formula, parse_formula
from .metrics import compute_metrics, confusion
from .model import LenConfig, load_model, save_model, train
from .synth import PlantSpec, generate


class _UsageError(Exception):
    pass


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _fractions(text):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated fractions")
    return tuple(parts)


def _int_list(text):
    return tuple(int(p) for p in text.split(","))


def _read_config(path):
    values = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise _UsageError(f"--config: malformed line {line!r} (expected key=value)")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


_CONVERTERS = {
    "label_column": str,
    "fractions": _fractions,
    "select_features": int,
    "max_depth": int,
    "hidden": _int_list,
    "entropy_weight": float,
    "temperature": float,
    "learning_rate": float,
    "epochs": int,
    "batch_size": int,
    "relevance_keep": int,
    "relevance_floor": float,
    "per_class_gates": lambda s: s.lower() in ("1", "true", "yes"),
    "seed": int,
    "class_id": int,
    "k": int,
    "alpha": float,
    "powerset_limit": int,
    "features": int,
    "samples": int,
    "noise": float,
    "positive_fraction": float,
    "rule": str,
    "stem": str,
}


def _apply_config(args, defaults):
    config_values = _read_config(args.config) if args.config else {}
    for key, default in defaults.items():
        if getattr(args, key, None) is not None:
            continue
        if key in config_values:
            setattr(args, key, _CONVERTERS[key](config_values[key]))
        else:
            setattr(args, key, default)
    return args


def _add_common(parser):
    parser.add_argument("--config", help="key=value manifest file")
    parser.add_argument("--seed", type=int, help="RNG seed (default 0)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--stem", help="output file stem")


def _add_split_flags(parser):
    parser.add_argument("--data", required=True, help="dataset CSV path")
    parser.add_argument("--label-column", dest="label_column")
    parser.add_argument(
        "--fractions",
        type=_fractions,
        help="train,val,test fractions (default 0.75,0.10,0.15)",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dnfnet",
        description="Train a concept-gated classifier on binary features and "
        "extract DNF explanations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a planted-rule dataset")
    p_synth.add_argument("--features", type=_positive_int, required=True)
    p_synth.add_argument("--rule", required=True, help="planted DNF over x0..x{d-1}")
    p_synth.add_argument("--samples", type=_positive_int, required=True)
    p_synth.add_argument("--noise", type=float)
    p_synth.add_argument(
        "--positive-fraction", dest="positive_fraction", type=float
    )
    p_synth.add_argument("--label-column", dest="label_column")
    _add_common(p_synth)

    p_train = sub.add_parser("train", help="train a model on a CSV")
    _add_split_flags(p_train)
    p_train.add_argument(
        "--select-features",
        dest="select_features",
        type=int,
        help="keep the N top-ranked features (0 = all)",
    )
    p_train.add_argument("--max-depth", dest="max_depth", type=int)
    p_train.add_argument("--hidden", type=_int_list, help="e.g. 32,16")
    p_train.add_argument("--entropy-weight", dest="entropy_weight", type=float)
    p_train.add_argument("--temperature", type=float)
    p_train.add_argument("--learning-rate", dest="learning_rate", type=float)
    p_train.add_argument("--epochs", type=int)
    p_train.add_argument("--batch-size", dest="batch_size", type=int)
    p_train.add_argument("--relevance-keep", dest="relevance_keep", type=int)
    p_train.add_argument("--relevance-floor", dest="relevance_floor", type=float)
    p_train.add_argument(
        "--per-class-gates",
        dest="per_class_gates",
        action="store_const",
        const=True,
    )
    _add_common(p_train)

    for name, helptext in (
        ("explain", "extract a global explanation under one strategy"),
        ("compare", "run all four strategies and tabulate them"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_split_flags(p)
        p.add_argument("--model", required=True, help="model JSON path")
        if name == "explain":
            p.add_argument(
                "--strategy",
                required=True,
                choices=("raw", "standard", "powerset", "tailored"),
            )
        p.add_argument("--class", dest="class_id", type=int, choices=(0, 1))
        p.add_argument("--k", type=int, help="record cap for raw/standard")
        p.add_argument("--alpha", type=float, help="tailored threshold step")
        p.add_argument("--powerset-limit", dest="powerset_limit", type=int)
        _add_common(p)

    return parser


_SYNTH_DEFAULTS = {
    "noise": 0.0,
    "positive_fraction": 0.5,
    "label_column": "label",
    "seed": 0,
    "stem": "synth",
}
_TRAIN_DEFAULTS = {
    "label_column": "label",
    "fractions": (0.75, 0.10, 0.15),
    "select_features": 0,
    "max_depth": 12,
    "hidden": (32, 16),
    "entropy_weight": 0.2,
    "temperature": 0.7,
    "learning_rate": 0.05,
    "epochs": 300,
    "batch_size": 128,
    "relevance_keep": 6,
    "relevance_floor": 0.05,
    "per_class_gates": False,
    "seed": 0,
    "stem": None,
}
_EXPLAIN_DEFAULTS = {
    "label_column": "label",
    "fractions": (0.75, 0.10, 0.15),
    "class_id": 1,
    "k": 0,
    "alpha": 0.01,
    "powerset_limit": 15,
    "seed": 0,
    "stem": None,
}


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stem_for(args):
    return args.stem if args.stem else Path(args.data).stem


def _write_json(path, blob):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_synth(args) -> int:
    _apply_config(args, _SYNTH_DEFAULTS)
    if not (0.0 <= args.noise < 0.5):
        raise _UsageError("--noise must lie in [0, 0.5)")
    if not (0.0 < args.positive_fraction < 1.0):
        raise _UsageError("--positive-fraction must lie in (0, 1)")
    schema = FeatureSchema(tuple(f"x{j}" for j in range(args.features)))
    try:
        rule = parse_formula(args.rule, schema)
    except DnfnetError as exc:
        raise _UsageError(f"--rule: {exc}") from exc

    spec = PlantSpec(
        d=args.features,
        planted=rule,
        n=args.samples,
        noise_rate=args.noise,
        positive_fraction_target=args.positive_fraction,
        seed=args.seed,
    )
    dataset = generate(spec)

    out = _outdir(args)
    csv_path = out / f"{args.stem}.csv"
    save_csv(dataset, csv_path, label_column=args.label_column)
    _write_json(
        out / f"{args.stem}.synth.json",
        {
            "formula": format_formula(rule, schema),
            "spec": {
                "features": spec.d,
                "samples": spec.n,
                "noise": spec.noise_rate,
                "positive_fraction": spec.positive_fraction_target,
                "seed": spec.seed,
            },
        },
    )
    print(f"wrote {csv_path}")
    return 0


def _train_config(args) -> LenConfig:
    return LenConfig(
        hidden_sizes=args.hidden,
        entropy_weight=args.entropy_weight,
        temperature=args.temperature,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        relevance_keep=args.relevance_keep,
        relevance_floor=args.relevance_floor,
        per_class_gates=args.per_class_gates,
    )


def cmd_train(args) -> int:
    _apply_config(args, _TRAIN_DEFAULTS)
    dataset = load_csv(args.data, label_column=args.label_column)
    parts = split(dataset, args.fractions, args.seed)

    if args.select_features:
        train_view = BinaryDataset(
            schema=dataset.schema,
            features=dataset.features[parts.train],
            labels=dataset.labels[parts.train],
        )
        ranking = rank_features(train_view, max_depth=args.max_depth)
        top = [j for j, _ in ranking[: args.select_features]]
        dataset = select_features(dataset, top)

    model, report = train(dataset, parts, _train_config(args))

    test_preds = model.predict_batch(dataset.features[parts.test])
    test_metrics = compute_metrics(
        confusion(test_preds, dataset.labels[parts.test])
    )

    out = _outdir(args)
    stem = _stem_for(args)
    save_model(model, out / f"{stem}.model.json")
    blob = report.to_dict()
    blob["test"] = test_metrics.to_dict()
    _write_json(out / f"{stem}.train.json", blob)

    print(f"test: {test_metrics.summary()}")
    print(f"wrote {out / f'{stem}.model.json'}")
    return 0


def _prepare_explain(args):
    dataset = load_csv(args.data, label_column=args.label_column)
    model = load_model(args.model)
    for name in model.schema.names:
        if not dataset.schema.has(name):
            raise DnfnetError(
                f"dataset lacks feature {name!r} required by the model"
            )
    projected = select_features(
        dataset, [dataset.schema.index_of(n) for n in model.schema.names]
    )
    parts = split(projected, args.fractions, args.seed)
    expl_set = collect_locals(model, projected, parts, args.class_id)
    return model, projected, parts, expl_set


def _model_precision(model, dataset, parts, class_id) -> float:
    preds = model.predict_batch(dataset.features[parts.val])
    report = compute_metrics(
        confusion(preds == class_id, dataset.labels[parts.val] == class_id)
    )
    return report.precision


def _run_strategy(strategy, args, model, dataset, parts, expl_set):
    k = args.k if args.k else None
    if strategy == "raw":
        return aggregate_raw(expl_set, dataset, parts, model, k=k)
    if strategy == "standard":
        return aggregate_standard(expl_set, dataset, parts, model, k=k)
    if strategy == "powerset":
        return aggregate_powerset(
            expl_set, dataset, parts, model, limit=args.powerset_limit
        )
    precision = _model_precision(model, dataset, parts, args.class_id)
    return aggregate_tailored(
        expl_set, precision, dataset, parts, model, alpha=args.alpha
    )


def cmd_explain(args) -> int:
    _apply_config(args, _EXPLAIN_DEFAULTS)
    if not (0.0 < args.alpha < 1.0):
        raise _UsageError("--alpha must lie in (0, 1)")
    model, dataset, parts, expl_set = _prepare_explain(args)
    try:
        result = _run_strategy(
            args.strategy, args, model, dataset, parts, expl_set
        )
    except TooManyRecords as exc:
        raise DnfnetError(
            f"{exc}; rerun with --k to shrink the record set or raise "
            "--powerset-limit"
        ) from exc

    out = _outdir(args)
    stem = _stem_for(args)
    _write_json(
        out / f"{stem}.explain.json",
        global_explanation_to_dict(result, dataset.schema),
    )
    dump_explanation_set(expl_set, out / f"{stem}.locals.jsonl")

    print(format_formula(result.dnf, dataset.schema))
    print(
        f"{result.strategy}: {result.metrics.summary()} "
        f"fidelity={result.fidelity:.4f} complexity={result.complexity}"
    )
    return 0


_STRATEGIES = ("raw", "standard", "powerset", "tailored")


def cmd_compare(args) -> int:
    _apply_config(args, _EXPLAIN_DEFAULTS)
    if not (0.0 < args.alpha < 1.0):
        raise _UsageError("--alpha must lie in (0, 1)")
    model, dataset, parts, expl_set = _prepare_explain(args)

    rows = []
    for strategy in _STRATEGIES:
        try:
            result = _run_strategy(
                strategy, args, model, dataset, parts, expl_set
            )
        except TooManyRecords as exc:
            rows.append({"strategy": strategy, "status": "skipped",
                         "reason": str(exc)})
            continue
        rows.append(
            {
                "strategy": strategy,
                "status": "ok",
                "accuracy": result.metrics.accuracy,
                "fpr": result.metrics.fpr,
                "fidelity": result.fidelity,
                "complexity": result.complexity,
                "formula": format_formula(result.dnf, dataset.schema),
            }
        )

    out = _outdir(args)
    stem = _stem_for(args)
    _write_json(out / f"{stem}.compare.json", {"class": args.class_id,
                                               "rows": rows})

    header = f"{'strategy':<10} {'accuracy':>9} {'fpr':>7} {'fidelity':>9} {'complexity':>11}"
    print(header)
    print("-" * len(header))
    for row in rows:
        if row["status"] == "skipped":
            print(f"{row['strategy']:<10} {'skipped':>9}")
        else:
            print(
                f"{row['strategy']:<10} {row['accuracy']:>9.4f} "
                f"{row['fpr']:>7.4f} {row['fidelity']:>9.4f} "
                f"{row['complexity']:>11d}"
            )
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "explain": cmd_explain,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DnfnetError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
