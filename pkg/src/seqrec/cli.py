"""Command-line entry point: prepare, train, evaluate, baseline, oracle, sweep.

Every artifact-producing run writes a reproducibility manifest (seeds,
config digest, input digests) next to its outputs. Outputs land in an
explicit --out directory, or under ./runs/<timestamp>-<digest> when none
is given.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import baselines, dataset, harness, metrics, model_io
from .network import NetworkConfig
from .optimize import OptimizerConfig

log = logging.getLogger(__name__)

KNN_NEIGHBOR_GRID = (50, 100, 200, 300, 500)


class CliError(Exception):
    """A user-facing command error; printed without a traceback."""


def _file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def _resolve_data(args) -> tuple[Path, str]:
    root = args.data or os.environ.get("SEQREC_DATA")
    if not root:
        raise CliError("--data is required (or set SEQREC_DATA)")
    root = Path(root)
    if root.is_dir():
        ratings = root / "ratings.dat"
        if not ratings.exists():
            raise CliError(f"--data: no ratings.dat under {root}")
        return ratings, "movielens-1m"
    if not root.exists():
        raise CliError(f"--data: {root} does not exist")
    fmt = args.format or ("generic-csv" if root.suffix == ".csv" else "movielens-1m")
    return root, fmt


def _load_log(args) -> tuple[dataset.InteractionLog, Path, str]:
    ratings_path, fmt = _resolve_data(args)
    if getattr(args, "format", None):
        fmt = args.format
    return dataset.load_ratings(ratings_path, fmt), ratings_path, fmt


def _load_split(args, log_: dataset.InteractionLog) -> dataset.DatasetSplit:
    if getattr(args, "split", None):
        return dataset.load_split_manifest(log_, args.split)
    return dataset.split_users(log_, args.n_test, args.n_validation, args.seed)


def _run_dir(args, digest: str) -> Path:
    if args.out:
        out = Path(args.out)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        out = Path("runs") / f"{stamp}-{digest[:8]}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, args, digest: str,
                    data_digests: dict[str, str]) -> None:
    lines = [f"command={command}", f"config_digest={digest}"]
    for key, value in sorted(vars(args).items()):
        if key in ("func", "out"):
            continue
        lines.append(f"{key}={value}")
    for name, d in sorted(data_digests.items()):
        lines.append(f"digest.{name}={d}")
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


def _features_if_needed(args, log_: dataset.InteractionLog,
                        ratings_path: Path) -> dataset.SideFeatures | None:
    blocks = _parse_blocks(getattr(args, "features", ""))
    if not blocks:
        return None
    root = ratings_path.parent
    users_path, movies_path = root / "users.dat", root / "movies.dat"
    for p in (users_path, movies_path):
        if not p.exists():
            raise CliError(f"--features: {p} not found")
    return dataset.load_side_features(users_path, movies_path, log_)


def _parse_blocks(raw: str) -> tuple[str, ...]:
    if not raw:
        return ()
    blocks = tuple(b.strip() for b in raw.split(",") if b.strip())
    unknown = set(blocks) - set(harness.FEATURE_BLOCKS)
    if unknown:
        raise CliError(f"--features: unknown blocks {sorted(unknown)}")
    return blocks


def _train_config(args) -> harness.TrainConfig:
    if args.bidirectional and args.layers != 1:
        raise CliError("--bidirectional requires --layers 1")
    if args.loss == "xent" and args.delta:
        raise CliError("--delta requires --loss diversity")
    optimizer = OptimizerConfig(kind=args.optimizer, eta=args.lr,
                                epsilon=args.epsilon, mu=args.mu)
    return harness.TrainConfig(
        cell_kind=args.cell,
        hidden_size=args.hidden,
        layers=args.layers,
        bidirectional=args.bidirectional,
        optimizer=optimizer,
        loss=args.loss,
        delta=args.delta,
        feature_blocks=_parse_blocks(args.features),
        epochs=args.epochs,
        validation_every=args.validation_every,
        shuffle_seed=args.shuffle_seed if args.shuffle_seed is not None else args.seed + 1,
        init_seed=args.init_seed if args.init_seed is not None else args.seed + 2,
        max_grad_norm=args.clip_norm,
    )


def _write_reports(out: Path, report: metrics.EvaluationReport) -> None:
    metrics.write_per_user_csv(report, out / "per_user.csv")
    metrics.write_aggregate_csv(report, out / "aggregate.csv")


def _write_popularity(out: Path, pop: dataset.PopularityTable,
                      log_: dataset.InteractionLog) -> None:
    with open(out / "popularity.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "item_id", "original_id", "count", "bin"])
        for rank, item in enumerate(pop.ranking):
            item = int(item)
            w.writerow([rank, item, log_.item_ids[item],
                        int(pop.counts[item]), int(pop.bin_of[item])])


# -- commands ------------------------------------------------------------------

def cmd_prepare(args) -> int:
    log_, ratings_path, fmt = _load_log(args)
    split = _load_split(args, log_)
    pop = dataset.build_popularity(split.train, log_.n_items)
    digest = model_io.config_digest({"command": "prepare", "seed": args.seed,
                                     "n_test": args.n_test, "n_validation": args.n_validation})
    out = _run_dir(args, digest)
    dataset.save_split_manifest(split, log_, out / "split.txt")
    _write_popularity(out, pop, log_)
    _write_manifest(out, "prepare", args, digest, {"ratings": _file_digest(ratings_path)})
    print(f"{log_.n_users} users, {log_.n_items} items, {log_.n_interactions} interactions")
    print(f"split: {len(split.train)} train / {len(split.validation)} validation / {len(split.test)} test")
    print(f"wrote {out}")
    return 0


def cmd_train(args) -> int:
    log_, ratings_path, fmt = _load_log(args)
    split = _load_split(args, log_)
    features = _features_if_needed(args, log_, ratings_path)
    pop = dataset.build_popularity(split.train, log_.n_items)
    config = _train_config(args)
    digest = config.digest()
    out = _run_dir(args, digest)

    model, tlog = harness.train(config, split, features, pop, k=args.k)
    tlog.to_csv(out / "training_log.csv")
    model_io.save_model(
        out / "model.npz", model.net,
        catalog=model_io.catalog_digest(log_.item_ids),
        extra_meta={"feature_blocks": list(config.feature_blocks),
                    "train_config": asdict(config)},
    )
    dataset.save_split_manifest(split, log_, out / "split.txt")
    _write_manifest(out, "train", args, digest, {"ratings": _file_digest(ratings_path)})
    print(f"best validation sps@{args.k}: {tlog.best_val_sps():.2f}%")
    print(f"wrote {out}")
    return 0


def cmd_evaluate(args) -> int:
    log_, ratings_path, fmt = _load_log(args)
    split = _load_split(args, log_)
    net, header, _ = model_io.load_model(args.model)
    if header["catalog_digest"] != model_io.catalog_digest(log_.item_ids):
        raise CliError("--model was trained on a different catalog than --data")
    blocks = tuple(header["meta"].get("feature_blocks", ()))
    features = None
    if blocks:
        features = dataset.load_side_features(
            ratings_path.parent / "users.dat", ratings_path.parent / "movies.dat", log_)
    encoder = harness.InputEncoder(log_.n_items, features, blocks)
    recommender = harness.RnnRecommender(net, encoder)

    digest = model_io.config_digest({"command": "evaluate", "model": str(args.model),
                                     "k": args.k, "seed": args.seed})
    out = _run_dir(args, digest)
    report = harness.evaluate(recommender, split.test, k=args.k, method="rnn",
                              seed=args.seed, config_digest=digest)
    _write_reports(out, report)
    _write_manifest(out, "evaluate", args, digest, {"ratings": _file_digest(ratings_path)})
    print(f"sps@{args.k}: {report.sps:.2f}%  rec: {report.recall:.2f}%  "
          f"user_cov: {report.user_coverage:.2f}%  item_cov: {report.item_coverage}")
    print(f"wrote {out}")
    return 0


def _knn_grid(args, split: dataset.DatasetSplit) -> list[int]:
    if args.n_neighbors is not None:
        return [args.n_neighbors]
    grid = sorted({min(n, len(split.train)) for n in KNN_NEIGHBOR_GRID})
    return [n for n in grid if n >= 1]


def cmd_baseline(args) -> int:
    log_, ratings_path, fmt = _load_log(args)
    split = _load_split(args, log_)
    pop = dataset.build_popularity(split.train, log_.n_items)

    if args.method == "markov":
        recommender = baselines.MarkovRecommender.train(split.train, pop)
        method = "markov"
        chosen_meta = {}
    else:
        grid = _knn_grid(args, split)
        best_n, best_sps = grid[0], float("-inf")
        for n in grid:
            cand = baselines.KnnRecommender(split.train, log_.n_items, n, pop)
            val_sps = harness.evaluate(cand, split.validation, k=args.k).sps \
                if split.validation else float("nan")
            log.info("knn n_neighbors=%d validation sps=%.2f", n, val_sps)
            if split.validation and val_sps > best_sps:
                best_n, best_sps = n, val_sps
        recommender = baselines.KnnRecommender(split.train, log_.n_items, best_n, pop)
        method = "knn"
        chosen_meta = {"n_neighbors": best_n}

    digest = model_io.config_digest({"command": "baseline", "method": args.method,
                                     "seed": args.seed, "k": args.k, **chosen_meta})
    out = _run_dir(args, digest)
    report = harness.evaluate(recommender, split.test, k=args.k, method=method,
                              seed=args.seed, config_digest=digest)
    _write_reports(out, report)
    dataset.save_split_manifest(split, log_, out / "split.txt")
    _write_manifest(out, "baseline", args, digest, {"ratings": _file_digest(ratings_path)})
    print(f"{method} sps@{args.k}: {report.sps:.2f}%  rec: {report.recall:.2f}%  "
          f"user_cov: {report.user_coverage:.2f}%  item_cov: {report.item_coverage}")
    print(f"wrote {out}")
    return 0


def cmd_oracle(args) -> int:
    log_, ratings_path, fmt = _load_log(args)
    split = _load_split(args, log_)
    pop = dataset.build_popularity(split.train, log_.n_items)
    try:
        cutoffs = [int(c) for c in args.cutoffs.split(",") if c.strip()]
    except ValueError as exc:
        raise CliError(f"--cutoffs: {exc}") from exc
    if not cutoffs:
        raise CliError("--cutoffs: need at least one cutoff")
    digest = model_io.config_digest({"command": "oracle", "cutoffs": cutoffs,
                                     "k": args.k, "seed": args.seed})
    out = _run_dir(args, digest)
    points = baselines.oracle_curve(split.test, pop, cutoffs, k=args.k)
    baselines.write_oracle_csv(points, out / "oracle_curve.csv")
    _write_manifest(out, "oracle", args, digest, {"ratings": _file_digest(ratings_path)})
    print(f"wrote {out / 'oracle_curve.csv'} ({len(points)} rows)")
    return 0


def cmd_sweep(args) -> int:
    log_, ratings_path, fmt = _load_log(args)
    split = _load_split(args, log_)
    pop = dataset.build_popularity(split.train, log_.n_items)
    features = _features_if_needed(args, log_, ratings_path)
    try:
        entries = json.loads(Path(args.grid).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"--grid: {exc}") from exc
    if not isinstance(entries, list) or not entries:
        raise CliError("--grid: expected a non-empty JSON list of config objects")

    configs = []
    for i, entry in enumerate(entries):
        opt = OptimizerConfig(
            kind=entry.get("optimizer", "adagrad"),
            eta=entry.get("lr", 0.1),
            epsilon=entry.get("epsilon", 1e-8),
            mu=entry.get("mu", 0.9),
        )
        configs.append(harness.TrainConfig(
            cell_kind=entry.get("cell", "lstm"),
            hidden_size=entry.get("hidden", 20),
            layers=entry.get("layers", 1),
            bidirectional=entry.get("bidirectional", False),
            optimizer=opt,
            loss=entry.get("loss", "xent"),
            delta=entry.get("delta", 0.0),
            feature_blocks=tuple(entry.get("features", ())),
            epochs=entry.get("epochs", args.epochs),
            validation_every=entry.get("validation_every", args.validation_every),
            shuffle_seed=entry.get("shuffle_seed", args.seed + 1),
            init_seed=entry.get("init_seed", args.seed + 2),
        ))
    digest = model_io.config_digest({"command": "sweep",
                                     "configs": [asdict(c) for c in configs]})
    out = _run_dir(args, digest)
    best_cfg, best_model, results = harness.grid_search(configs, split, features, pop,
                                                        catalog_size=log_.n_items)
    with open(out / "sweep_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "config_digest", "val_sps"])
        for i, entry in enumerate(results):
            entry.log.to_csv(out / f"training_log_{i}.csv")
            w.writerow([i, entry.config.digest(), f"{entry.best_val_sps:.4f}"])
    best_index = max(range(len(results)), key=lambda i: (results[i].best_val_sps, -i))
    model_io.save_model(out / "best_model.npz", best_model.net,
                        catalog=model_io.catalog_digest(log_.item_ids),
                        extra_meta={"feature_blocks": list(best_cfg.feature_blocks),
                                    "train_config": asdict(best_cfg)})
    _write_manifest(out, "sweep", args, digest, {"ratings": _file_digest(ratings_path)})
    print(f"best config index {best_index} (val sps {results[best_index].best_val_sps:.2f}%)")
    print(f"wrote {out}")
    return 0


# -- parser --------------------------------------------------------------------

def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="ml-1m directory or ratings file (env: SEQREC_DATA)")
    p.add_argument("--format", choices=["movielens-1m", "generic-csv"],
                   help="ratings file format (inferred when omitted)")
    p.add_argument("--split", help="reuse a split manifest written by prepare")
    p.add_argument("--n-test", type=int, default=500)
    p.add_argument("--n-validation", type=int, default=500)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="output directory (default: runs/<stamp>-<digest>)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqrec",
        description="Sequence-based collaborative filtering: train and evaluate recommenders.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="split users and build the popularity table")
    _add_data_args(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train a gated RNN recommender")
    _add_data_args(p)
    p.add_argument("--cell", choices=["lstm", "gru"], default="lstm")
    p.add_argument("--hidden", type=int, default=20)
    p.add_argument("--layers", type=int, choices=[1, 2], default=1)
    p.add_argument("--bidirectional", action="store_true")
    p.add_argument("--optimizer", choices=["sgd", "momentum", "adagrad"], default="adagrad")
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--mu", type=float, default=0.9)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--loss", choices=["xent", "diversity"], default="xent")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--features", default="", help="comma list of user,item,interaction")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--validation-every", type=int, default=1000)
    p.add_argument("--shuffle-seed", type=int, default=None)
    p.add_argument("--init-seed", type=int, default=None)
    p.add_argument("--clip-norm", type=float, default=None)
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a trained model on the test users")
    _add_data_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="run the Markov chain or user-KNN baseline")
    _add_data_args(p)
    p.add_argument("--method", choices=["markov", "knn"], required=True)
    p.add_argument("--n-neighbors", type=int, default=None,
                   help="KNN neighborhood size (default: tune on validation)")
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("oracle", help="popularity-constrained oracle curve")
    _add_data_args(p)
    p.add_argument("--cutoffs", required=True, help="comma list of popularity cutoffs t")
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="train every config in a JSON grid file")
    _add_data_args(p)
    p.add_argument("--grid", required=True, help="JSON list of train-config objects")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--validation-every", type=int, default=1000)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, dataset.ParseError, dataset.CorpusError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename or exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
