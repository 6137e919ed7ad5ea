"""Ranking metrics at a fixed cutoff: sps, recall, precision and coverages.

All four are set-based over a single k-item recommendation list per user;
sps is the short-term one (did the single true next item make the list),
the others score the whole future half.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence


@dataclass(frozen=True)
class UserMetrics:
    """Metrics of one evaluated user; hit_items are the correct recommendations."""

    user: int
    sps: int
    recall: float
    precision: float
    hit_items: tuple[int, ...]

    @property
    def hit_count(self) -> int:
        return len(self.hit_items)


@dataclass(frozen=True)
class EvaluationReport:
    """Per-user rows plus their exact aggregates (percent scale)."""

    k: int
    method: str
    seed: int
    config_digest: str
    per_user: tuple[UserMetrics, ...]
    sps: float              # mean sps, percent
    recall: float           # mean recall, percent
    precision: float        # mean precision, percent
    user_coverage: float    # share of users with >= 1 hit, percent
    item_coverage: int      # distinct correctly recommended items


def sps_at_k(recs: Sequence[int], next_item: int) -> int:
    """1 if the true next item is among the recommendations, else 0."""
    return 1 if next_item in set(recs) else 0


def recall_at_k(recs: Sequence[int], future: Iterable[int]) -> float:
    future = set(future)
    if not future:
        raise ValueError("recall undefined for an empty future set")
    return len(set(recs) & future) / len(future)


def precision_at_k(recs: Sequence[int], future: Iterable[int]) -> float:
    recs = set(recs)
    if not recs:
        raise ValueError("precision undefined for an empty recommendation list")
    return len(recs & set(future)) / len(recs)


def score_user(user: int, recs: Sequence[int], future: Iterable[int],
               next_item: int) -> UserMetrics:
    """Score one user's k-list against their future half."""
    future = set(future)
    if not future:
        raise ValueError(f"user {user}: empty future set")
    hits = tuple(sorted(set(recs) & future))
    return UserMetrics(
        user=user,
        sps=sps_at_k(recs, next_item),
        recall=len(hits) / len(future),
        precision=precision_at_k(recs, future),
        hit_items=hits,
    )


def aggregate(rows: Sequence[UserMetrics], k: int, method: str = "",
              seed: int = 0, config_digest: str = "") -> EvaluationReport:
    """Average the per-user rows and count coverages."""
    if not rows:
        raise ValueError("cannot aggregate an empty row set")
    n = len(rows)
    distinct_hits: set[int] = set()
    for r in rows:
        distinct_hits.update(r.hit_items)
    return EvaluationReport(
        k=k,
        method=method,
        seed=seed,
        config_digest=config_digest,
        per_user=tuple(rows),
        sps=100.0 * sum(r.sps for r in rows) / n,
        recall=100.0 * sum(r.recall for r in rows) / n,
        precision=100.0 * sum(r.precision for r in rows) / n,
        user_coverage=100.0 * sum(1 for r in rows if r.hit_count >= 1) / n,
        item_coverage=len(distinct_hits),
    )


def write_per_user_csv(report: EvaluationReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "sps", "recall", "precision", "hits"])
        for r in report.per_user:
            w.writerow([r.user, r.sps, f"{r.recall:.6f}", f"{r.precision:.6f}", r.hit_count])


def write_aggregate_csv(report: EvaluationReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "k", "sps", "recall", "precision",
                    "user_coverage", "item_coverage", "seed"])
        w.writerow([
            report.method, report.k,
            f"{report.sps:.4f}", f"{report.recall:.4f}", f"{report.precision:.4f}",
            f"{report.user_coverage:.4f}", report.item_coverage, report.seed,
        ])
