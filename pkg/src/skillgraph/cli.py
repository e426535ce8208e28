"""Command-line entry point.

Exit codes: 0 success, 1 domain violation (invalid graph, bad config
value, failed run), 2 I/O or usage errors (missing files, malformed
flags). Every run command writes a config echo next to its outputs so
the run can be reproduced bit-exactly.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .baseline import baseline_cross_validate
from .checkpoint import CheckpointFormatError, load_checkpoint, save_checkpoint
from .config import RunConfigError, load_run_config
from .embeddings import (
    EmbedderKind,
    EmbedderSpec,
    EmbeddingFormatError,
    build_features,
    write_embeddings,
)
from .export import export_embeddings
from .graph import GraphFormatError, parse_graph, validate_schema
from .model import infer_isolated
from .splits import kfold, split_dataset
from .toydata import generate_toy_dataset
from .training import NonFiniteLossError, cross_validate, train

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _read_bytes(path: str) -> bytes:
    return Path(path).read_bytes()


def _load_graph(path: str):
    return parse_graph(_read_bytes(path))


def _features(run_cfg, g):
    spec = run_cfg.embedder_spec()
    file_data = _read_bytes(run_cfg.embeddings) if run_cfg.embeddings else None
    return build_features(g, spec, file_data), spec


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _echo_config(run_cfg, out_dir: Path) -> None:
    _write(out_dir / "config.json", json.dumps(run_cfg.echo(), indent=2, sort_keys=True) + "\n")


def cmd_validate(args) -> int:
    try:
        g = _load_graph(args.graph)
    except GraphFormatError as exc:
        print(f"invalid graph: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    violations = validate_schema(g)
    for line in violations:
        print(line)
    return EXIT_DOMAIN if violations else EXIT_OK


def cmd_gen(args) -> int:
    try:
        data = generate_toy_dataset(args.seed, args.n)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_bytes(data)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_embed(args) -> int:
    g = _load_graph(args.graph)
    spec = EmbedderSpec(dim=args.dim, seed=args.seed)
    table = build_features(g, spec)
    _write(Path(args.out), write_embeddings(table, [n.id for n in g.nodes]))
    print(f"wrote {args.out} ({len(g.nodes)} rows, dim={args.dim})")
    return EXIT_OK


def _overrides(args) -> dict:
    keys = (
        "graph",
        "embeddings",
        "embed_dim",
        "embed_seed",
        "layer",
        "hidden_dim",
        "max_epochs",
        "learning_rate",
        "weight_decay",
        "patience",
        "dropout",
        "k",
        "test_fraction",
        "seed",
        "out_dir",
    )
    found = {key: getattr(args, key, None) for key in keys}
    if getattr(args, "loss_weights", None) is not None:
        found["loss_weights"] = args.loss_weights
    return found


def cmd_train(args) -> int:
    run_cfg = load_run_config(args.config, _overrides(args))
    g = _load_graph(run_cfg.graph)
    violations = validate_schema(g)
    if violations:
        for line in violations:
            print(line, file=sys.stderr)
        return EXIT_DOMAIN
    table, spec = _features(run_cfg, g)
    cfg = run_cfg.train_config()
    plan = split_dataset(g, cfg.test_fraction, cfg.seed)
    # Early stopping needs a validation part: the first fold supplies it.
    fold_train, fold_val = kfold(g, plan.train, cfg.k, cfg.seed)[0]
    model, history = train(g, table, cfg, fold_train, fold_val)

    out_dir = Path(run_cfg.out_dir)
    _echo_config(run_cfg, out_dir)
    _write(out_dir / "checkpoint.json", save_checkpoint(model, cfg, spec))
    _write(
        out_dir / "history.json",
        json.dumps(
            {
                "train_loss": history.train_loss,
                "val_loss": history.val_loss,
                "best_epoch": history.best_epoch,
                "stop_epoch": history.stop_epoch,
                "best_val_loss": history.best_val_loss,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )
    print(
        f"trained {cfg.layer_kind.value}: best epoch {history.best_epoch}, "
        f"stopped at {history.stop_epoch}, best val loss {history.best_val_loss:.6f}"
    )
    print(f"outputs in {out_dir}")
    return EXIT_OK


def cmd_cv(args) -> int:
    run_cfg = load_run_config(args.config, _overrides(args))
    g = _load_graph(run_cfg.graph)
    violations = validate_schema(g)
    if violations:
        for line in violations:
            print(line, file=sys.stderr)
        return EXIT_DOMAIN
    table, _ = _features(run_cfg, g)
    cfg = run_cfg.train_config()
    report = cross_validate(g, table, cfg, config_echo=run_cfg.echo())
    out_dir = Path(run_cfg.out_dir)
    _echo_config(run_cfg, out_dir)
    _write(out_dir / "cv_report.json", report.to_json())
    _write(out_dir / "cv_report.txt", report.to_text())
    print(report.to_text())
    print(f"outputs in {out_dir}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    run_cfg = load_run_config(args.config, _overrides(args))
    g = _load_graph(run_cfg.graph)
    cfg = run_cfg.train_config()
    report = baseline_cross_validate(g, cfg, config_echo=run_cfg.echo())
    out_dir = Path(run_cfg.out_dir)
    _echo_config(run_cfg, out_dir)
    _write(out_dir / "baseline_report.json", report.to_json())
    _write(out_dir / "baseline_report.txt", report.to_text())
    print(report.to_text())
    print(f"outputs in {out_dir}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model, _, spec = load_checkpoint(_read_bytes(args.checkpoint))
    if spec.kind is not EmbedderKind.HASHING:
        print(
            "checkpoint was trained on an external embedding file; "
            "new text cannot be featurized, so predict needs a checkpoint "
            "trained with the built-in hashing embedder",
            file=sys.stderr,
        )
        return EXIT_DOMAIN
    for line in sys.stdin:
        text = line.rstrip("\n")
        if not text.strip():
            continue
        pred, rep = infer_isolated(model, text, spec)
        record = {
            "text": text,
            "labels": pred.labels,
            "probabilities": pred.probabilities,
            "confidences": pred.confidences,
        }
        if args.with_representation:
            record["representation"] = rep.tolist()
        print(json.dumps(record, sort_keys=True))
    return EXIT_OK


def cmd_export(args) -> int:
    model, _, spec = load_checkpoint(_read_bytes(args.checkpoint))
    g = _load_graph(args.graph)
    if tuple(n.id for n in g.nodes) != model.node_ids:
        print("checkpoint was trained on a different graph", file=sys.stderr)
        return EXIT_DOMAIN
    file_data = _read_bytes(args.embeddings) if args.embeddings else None
    table = build_features(g, spec, file_data)
    emb_text, pca_text = export_embeddings(model, g, table)
    out_dir = Path(args.out_dir)
    _write(out_dir / "embeddings.tsv", emb_text)
    _write(out_dir / "pca.tsv", pca_text)
    print(f"outputs in {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skillgraph",
        description="Graph machine learning toolkit for counseling-skill classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a graph file and report violations")
    p.add_argument("graph")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen", help="generate the synthetic corpus")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--n", type=int, default=180)
    p.add_argument("out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("embed", help="write hashing embeddings for a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--dim", type=int, default=768)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("out")
    p.set_defaults(func=cmd_embed)

    def add_run_flags(p):
        p.add_argument("--config", default=None, help="JSON run config path")
        p.add_argument("--graph")
        p.add_argument("--embeddings")
        p.add_argument("--embed-dim", dest="embed_dim", type=int)
        p.add_argument("--embed-seed", dest="embed_seed", type=int)
        p.add_argument("--layer", choices=["sage", "gcn", "gat"])
        p.add_argument("--hidden-dim", dest="hidden_dim", type=int)
        p.add_argument("--max-epochs", dest="max_epochs", type=int)
        p.add_argument("--learning-rate", dest="learning_rate", type=float)
        p.add_argument("--weight-decay", dest="weight_decay", type=float)
        p.add_argument("--patience", type=int)
        p.add_argument("--dropout", type=float)
        p.add_argument("--k", type=int)
        p.add_argument("--test-fraction", dest="test_fraction", type=float)
        p.add_argument(
            "--loss-weights",
            dest="loss_weights",
            type=float,
            nargs=3,
            metavar=("CF", "IC", "SKILL"),
        )
        p.add_argument("--seed", type=int)
        p.add_argument("--out-dir", dest="out_dir")

    p = sub.add_parser("train", help="train one model and write a checkpoint")
    add_run_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", help="k-fold cross-validation report")
    add_run_flags(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("baseline", help="text-only TF-IDF baseline report")
    add_run_flags(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("predict", help="classify utterances from standard input")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--with-representation", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("export", help="write labeled representation and PCA files")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return EXIT_USAGE if exc.code not in (0,) else 0
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        GraphFormatError,
        EmbeddingFormatError,
        CheckpointFormatError,
        RunConfigError,
        NonFiniteLossError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
