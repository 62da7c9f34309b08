"""Command-line interface.

Subcommands: train, predict, eval, analyze, config-dump.

Exit codes: 0 success, 2 usage error, 3 data/configuration error,
4 numerical failure during inference or training.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

from . import analysis, metrics
from .config import (
    ExperimentConfig,
    dump_config,
    load_config,
    preset,
    with_train_overrides,
)
from .errors import (
    InfeasibleTopologyError,
    MalformedPairError,
    MissingGoldError,
    NumericalFailureError,
    TmcrfError,
)
from .model import CrfModel, load_model, save_model
from .residues import PROPERTY_GROUPS
from .sequence import Dataset, ProteinRecord, load_dataset
from .training import train as run_training

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmcrf",
        description="Transmembrane-helix prediction with a linear-chain CRF.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="experiment configuration file")
        p.add_argument("--preset", choices=[f"exp{i}" for i in range(1, 9)],
                       help="start from a standard feature-combination preset")

    p_train = sub.add_parser("train", help="estimate model weights from labeled data")
    add_config_flags(p_train)
    p_train.add_argument("--sigma2", type=float, help="regularization variance")
    p_train.add_argument("--epsilon", type=float, help="gradient infinity-norm convergence bound")
    p_train.add_argument("--max-iters", type=int, help="iteration cap")
    p_train.add_argument("--exclude-prefix", help="drop training records whose id starts with this")
    p_train.add_argument("--threads", type=int, default=1, help="worker threads for gradients")
    p_train.add_argument("--deterministic", action="store_true",
                         help="fixed-order gradient reduction (bit-reproducible)")
    p_train.add_argument("--out", required=True, help="model file to write")
    p_train.add_argument("--trace", help="write the per-iteration objective trace TSV here")
    p_train.add_argument("train_path", nargs="?", help="training dataset (or data.train in config)")

    p_predict = sub.add_parser("predict", help="decode binary labels for input sequences")
    p_predict.add_argument("--model", required=True)
    p_predict.add_argument("--emit-marginals", action="store_true",
                           help="append per-residue helix probabilities")
    p_predict.add_argument("--threads", type=int, default=1)
    p_predict.add_argument("--out", help="output file (default stdout)")
    p_predict.add_argument("input_path")

    p_eval = sub.add_parser("eval", help="score a predictions file against gold labels")
    p_eval.add_argument("gold_path", help="dataset file with gold labels")
    p_eval.add_argument("predictions_path", help="TSV rows: id<TAB>labels")

    p_analyze = sub.add_parser("analyze", help="residue distributions around predicted helices")
    p_analyze.add_argument("--model", required=True)
    p_analyze.add_argument("--mode", choices=["central", "profile"], required=True)
    p_analyze.add_argument("--set", dest="residue_set", default="Hydrophobic",
                           help="property group name or explicit residue letters (profile mode)")
    p_analyze.add_argument("--radius", type=int, default=analysis.DEFAULT_RADIUS)
    p_analyze.add_argument("--half-width", type=int, default=analysis.DEFAULT_HALF_WIDTH)
    p_analyze.add_argument("--out", help="output file (default stdout)")
    p_analyze.add_argument("input_path")

    p_dump = sub.add_parser("config-dump", help="print the resolved configuration")
    add_config_flags(p_dump)

    return parser


def _resolve_config(args) -> ExperimentConfig:
    cfg = preset(args.preset) if getattr(args, "preset", None) else ExperimentConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, base=cfg)
    return cfg


def _write_text(path: str | None, text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_train(args) -> int:
    cfg = _resolve_config(args)
    cfg = with_train_overrides(cfg, sigma2=args.sigma2, epsilon=args.epsilon,
                               max_iters=args.max_iters)
    train_path = args.train_path or cfg.data_train
    if not train_path:
        print("train: no training dataset (pass a path or set data.train)", file=sys.stderr)
        return EXIT_USAGE
    data = load_dataset(train_path)
    prefix = args.exclude_prefix if args.exclude_prefix is not None else cfg.exclude_prefix
    if prefix:
        data = Dataset(tuple(rec for rec in data if not rec.id.startswith(prefix)))
    model, report = run_training(
        data, cfg, threads=args.threads,
        deterministic=args.deterministic or args.threads <= 1,
    )
    save_model(model, args.out)
    if args.trace:
        _write_text(args.trace, report.render_tsv())
    print(f"features\t{model.index.K}")
    print(f"iterations\t{report.iterations}")
    print(f"objective\t{report.final_objective!r}")
    print(f"grad_inf_norm\t{report.final_grad_norm!r}")
    return EXIT_OK


def _predict_rows(model: CrfModel, data: Dataset, emit_marginals: bool, threads: int) -> list[str]:
    def one(record: ProteinRecord) -> str:
        _, labels = model.decode(record)
        if emit_marginals:
            probs = model.posteriors(record)
            return f"{record.id}\t{labels}\t{','.join(f'{p:.6f}' for p in probs)}"
        return f"{record.id}\t{labels}"

    records = list(data)
    if threads > 1 and len(records) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, records))  # map preserves input order
    return [one(rec) for rec in records]


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    data = load_dataset(args.input_path)
    rows = _predict_rows(model, data, args.emit_marginals, args.threads)
    _write_text(args.out, "".join(row + "\n" for row in rows))
    return EXIT_OK


def _load_predictions(path: str) -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise MalformedPairError(f"{path}:{lineno}: expected id<TAB>labels")
            rows.append((parts[0], parts[1]))
    return rows


def _cmd_eval(args) -> int:
    gold = load_dataset(args.gold_path).by_id()
    predictions = _load_predictions(args.predictions_path)
    pairs: list[tuple[str, str]] = []
    for rec_id, labels in predictions:
        record = gold.get(rec_id)
        if record is None or record.gold is None:
            raise MissingGoldError(rec_id)
        pairs.append((record.gold, labels))
    report = metrics.compute_metrics(pairs)
    sys.stdout.write(metrics.render_table(report))
    sys.stdout.write("\n")
    sys.stdout.write(metrics.render_tsv(report))
    return EXIT_OK


def _resolve_residue_set(spec_text: str) -> frozenset[str]:
    if spec_text in PROPERTY_GROUPS:
        return frozenset(PROPERTY_GROUPS[spec_text])
    letters = spec_text.upper()
    return frozenset(letters)


def _cmd_analyze(args) -> int:
    model = load_model(args.model)
    data = load_dataset(args.input_path)
    predictions = [(rec, model.decode(rec)[1]) for rec in data]
    if args.mode == "central":
        composition = analysis.central_composition(predictions, half_width=args.half_width)
        _write_text(args.out, analysis.render_composition_tsv(composition))
    else:
        profile = analysis.positional_profile(
            predictions, _resolve_residue_set(args.residue_set), radius=args.radius
        )
        _write_text(args.out, profile.render_tsv())
    return EXIT_OK


def _cmd_config_dump(args) -> int:
    sys.stdout.write(dump_config(_resolve_config(args)))
    return EXIT_OK


_COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "analyze": _cmd_analyze,
    "config-dump": _cmd_config_dump,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (NumericalFailureError, InfeasibleTopologyError) as exc:
        print(f"tmcrf {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TmcrfError as exc:
        print(f"tmcrf {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"tmcrf {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


def console_main() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    sys.exit(main())
