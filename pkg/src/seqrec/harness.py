"""Training loop, the half-split evaluation protocol and grid search.

Training is teacher-forced next-item prediction: a length-L history yields
L-1 steps, each input the one-hot of the consumed item (plus enabled
feature blocks) and each target the following item. One optimizer update
per sequence, on the mean step loss; validation sps@10 is sampled on a
fixed cadence and the best-validation parameter snapshot is returned.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .dataset import DatasetSplit, PopularityTable, SideFeatures, UserSequence, half_split
from .metrics import EvaluationReport, UserMetrics, aggregate, score_user
from .model_io import config_digest
from .network import Network, NetworkConfig, NumericFault
from .optimize import Optimizer, OptimizerConfig, clip_gradients

log = logging.getLogger(__name__)

FEATURE_BLOCKS = ("user", "item", "interaction")
LOSS_KINDS = ("xent", "diversity")


class Recommender(Protocol):
    def recommend(self, history: UserSequence, k: int, exclude: set[int]) -> list[int]: ...


@dataclass(frozen=True)
class TrainConfig:
    cell_kind: str = "lstm"
    hidden_size: int = 20
    layers: int = 1
    bidirectional: bool = False
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    loss: str = "xent"
    delta: float = 0.0
    feature_blocks: tuple[str, ...] = ()
    epochs: int = 10
    validation_every: int = 1000
    shuffle_seed: int = 0
    init_seed: int = 0
    max_grad_norm: float | None = None

    def __post_init__(self):
        if self.loss not in LOSS_KINDS:
            raise ValueError(f"loss must be one of {LOSS_KINDS}, got {self.loss!r}")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.loss == "xent" and self.delta != 0:
            raise ValueError("xent loss does not take a delta; use loss='diversity'")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.validation_every < 1:
            raise ValueError("validation_every must be >= 1")
        unknown = set(self.feature_blocks) - set(FEATURE_BLOCKS)
        if unknown:
            raise ValueError(f"unknown feature blocks: {sorted(unknown)}")

    def digest(self) -> str:
        return config_digest(asdict(self))


class InputEncoder:
    """Maps one consumed event to the active indices of the input vector.

    Layout: catalog one-hot first, then the enabled blocks in the order
    user, item, interaction, each offset past the previous one.
    """

    def __init__(self, catalog_size: int, features: SideFeatures | None,
                 blocks: Sequence[str] = ()):
        blocks = tuple(blocks)
        if blocks and features is None:
            raise ValueError("feature blocks requested but no side features given")
        self.catalog_size = catalog_size
        self.features = features
        self.blocks = blocks
        offset = catalog_size
        self.offsets: dict[str, int] = {}
        widths = features.block_widths() if features else {}
        for name in FEATURE_BLOCKS:
            if name in blocks:
                self.offsets[name] = offset
                offset += widths[name]
        self.input_size = offset

    @property
    def extra_width(self) -> int:
        return self.input_size - self.catalog_size

    def encode(self, user: int, item: int, rating: float) -> np.ndarray:
        active = [item]
        if "user" in self.offsets:
            off = self.offsets["user"]
            active.extend(off + i for i in self.features.user_active[user])
        if "item" in self.offsets:
            off = self.offsets["item"]
            active.extend(off + i for i in self.features.item_active[item])
        if "interaction" in self.offsets:
            active.append(self.offsets["interaction"] + self.features.rating_index[rating])
        return np.array(active, dtype=np.int64)

    def encode_sequence(self, seq: UserSequence) -> list[np.ndarray]:
        return [self.encode(e.user, e.item, e.rating) for e in seq.events]


class RnnRecommender:
    """A trained network plus its input encoding, exposing top-k lists."""

    def __init__(self, net: Network, encoder: InputEncoder):
        self.net = net
        self.encoder = encoder

    def recommend(self, history: UserSequence, k: int, exclude: set[int]) -> list[int]:
        return self.net.predict_topk(self.encoder.encode_sequence(history), k, exclude)


@dataclass(frozen=True)
class LogRow:
    sequences: int
    epoch: float
    seconds: float
    train_loss: float
    val_sps: float


@dataclass
class TrainingLog:
    rows: list[LogRow] = field(default_factory=list)

    def best_val_sps(self) -> float:
        return max((r.val_sps for r in self.rows), default=float("-inf"))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sequences", "epoch", "seconds", "train_loss", "val_sps"])
            for r in self.rows:
                w.writerow([r.sequences, f"{r.epoch:.4f}", f"{r.seconds:.3f}",
                            f"{r.train_loss:.6f}", f"{r.val_sps:.4f}"])


def training_steps(encoder: InputEncoder, seq: UserSequence,
                   popularity: PopularityTable | None = None,
                   ) -> tuple[list[np.ndarray], np.ndarray, np.ndarray | None]:
    """Teacher-forced (inputs, targets, popularity bins) for one sequence."""
    events = seq.events
    inputs = [encoder.encode(e.user, e.item, e.rating) for e in events[:-1]]
    targets = np.array([e.item for e in events[1:]], dtype=np.int64)
    p_bins = popularity.bin_of[targets] if popularity is not None else None
    return inputs, targets, p_bins


def train(config: TrainConfig, split: DatasetSplit,
          features: SideFeatures | None = None,
          popularity: PopularityTable | None = None,
          catalog_size: int | None = None,
          k: int = 10) -> tuple[RnnRecommender, TrainingLog]:
    """Train a gated RNN on the split's train users; return the best snapshot."""
    if not split.train:
        raise ValueError("train set is empty")
    if catalog_size is None:
        if popularity is None:
            raise ValueError("need catalog_size or popularity")
        catalog_size = popularity.catalog_size
    if popularity is None and config.delta > 0:
        raise ValueError("diversity loss needs a popularity table")

    encoder = InputEncoder(catalog_size, features, config.feature_blocks)
    net_config = NetworkConfig(
        catalog_size=catalog_size,
        hidden_size=config.hidden_size,
        cell_kind=config.cell_kind,
        layers=config.layers,
        bidirectional=config.bidirectional,
        extra_input=encoder.extra_width,
        init_seed=config.init_seed,
    )
    net = Network.create(net_config)
    optimizer = Optimizer(config.optimizer, net.params)
    recommender = RnnRecommender(net, encoder)

    usable = [s for s in split.train if len(s) >= 2]
    if len(usable) < len(split.train):
        log.warning("%d train users shorter than 2 events contribute no steps",
                    len(split.train) - len(usable))
    rng = np.random.default_rng(config.shuffle_seed)
    training_log = TrainingLog()
    best_sps = float("-inf")
    best_params: dict[str, np.ndarray] | None = None
    seqs_seen = 0
    loss_sum, loss_n = 0.0, 0
    t0 = time.perf_counter()

    def validate() -> None:
        nonlocal best_sps, best_params, loss_sum, loss_n
        if split.validation:
            report = evaluate(recommender, split.validation, k=k)
            val_sps = report.sps
        else:
            val_sps = float("nan")
        row = LogRow(
            sequences=seqs_seen,
            epoch=seqs_seen / len(usable),
            seconds=time.perf_counter() - t0,
            train_loss=loss_sum / loss_n if loss_n else float("nan"),
            val_sps=val_sps,
        )
        training_log.rows.append(row)
        loss_sum, loss_n = 0.0, 0
        if split.validation and val_sps > best_sps:
            best_sps = val_sps
            best_params = net.clone_params()

    for epoch in range(config.epochs):
        order = rng.permutation(len(usable))
        for seq_index in order:
            seq = usable[seq_index]
            inputs, targets, p_bins = training_steps(encoder, seq, popularity)
            try:
                grads, loss = net.sequence_gradients(inputs, targets, p_bins, config.delta)
            except NumericFault as exc:
                raise NumericFault(f"user {seq.user}: {exc}") from exc
            if config.max_grad_norm is not None:
                clip_gradients(grads, config.max_grad_norm)
            optimizer.apply_update(net.params, grads)
            seqs_seen += 1
            loss_sum += loss
            loss_n += 1
            if seqs_seen % config.validation_every == 0:
                validate()
    if not training_log.rows or training_log.rows[-1].sequences != seqs_seen:
        validate()

    if best_params is not None:
        net.params = best_params
    return recommender, training_log


def evaluate(recommender: Recommender, test: Sequence[UserSequence], k: int = 10,
             method: str = "", seed: int = 0, config_digest: str = "") -> EvaluationReport:
    """Half-split protocol: recommend from the first half, score on the second."""
    rows: list[UserMetrics] = []
    for seq in test:
        if len(seq) < 2:
            log.warning("user %d has fewer than 2 events; excluded from evaluation", seq.user)
            continue
        history, future = half_split(seq)
        exclude = set(history.items())
        recs = recommender.recommend(history, k, exclude)
        if len(recs) != len(set(recs)) or set(recs) & exclude:
            raise ValueError(f"recommender returned seen or duplicate items for user {seq.user}")
        future_items = future.items()
        rows.append(score_user(seq.user, recs, future_items, future_items[0]))
    return aggregate(rows, k, method=method, seed=seed, config_digest=config_digest)


@dataclass(frozen=True)
class GridEntry:
    config: TrainConfig
    best_val_sps: float
    log: TrainingLog


def grid_search(grid: Sequence[TrainConfig], split: DatasetSplit,
                features: SideFeatures | None = None,
                popularity: PopularityTable | None = None,
                catalog_size: int | None = None,
                ) -> tuple[TrainConfig, RnnRecommender, list[GridEntry]]:
    """Train every config; pick the best validation sps (ties: earlier entry)."""
    if not grid:
        raise ValueError("grid is empty")
    entries: list[GridEntry] = []
    best_index = 0
    best_model: RnnRecommender | None = None
    for i, cfg in enumerate(grid):
        model, tlog = train(cfg, split, features, popularity, catalog_size)
        entries.append(GridEntry(config=cfg, best_val_sps=tlog.best_val_sps(), log=tlog))
        if best_model is None or entries[i].best_val_sps > entries[best_index].best_val_sps:
            best_index = i
            best_model = model
    return grid[best_index], best_model, entries
