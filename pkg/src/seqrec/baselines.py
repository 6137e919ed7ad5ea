"""Non-neural recommenders: bigram Markov chain, user-KNN, popularity oracle.

All recommenders share the same contract: ``recommend(history, k, exclude)``
returns exactly k distinct unseen item ids, backfilled from the global
popularity ranking when the method itself yields fewer candidates. Ties are
always broken by ascending id so runs are reproducible.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .dataset import PopularityTable, UserSequence, half_split

log = logging.getLogger(__name__)


def _backfill(chosen: list[int], k: int, exclude: set[int],
              ranking: np.ndarray) -> list[int]:
    """Pad a short list with the most popular unseen, unchosen items."""
    if len(chosen) >= k:
        return chosen[:k]
    taken = set(chosen) | exclude
    for item in ranking:
        item = int(item)
        if item not in taken:
            chosen.append(item)
            taken.add(item)
            if len(chosen) == k:
                break
    return chosen


class MarkovRecommender:
    """Bigram model over consecutive item pairs in the training sequences.

    For each source item the successors are kept sorted by (count desc,
    id asc); recommending is a walk down the last history item's list.
    """

    def __init__(self, successors: dict[int, tuple[np.ndarray, np.ndarray]],
                 popularity: PopularityTable):
        self.successors = successors
        self.popularity = popularity

    @classmethod
    def train(cls, train: Sequence[UserSequence],
              popularity: PopularityTable) -> "MarkovRecommender":
        if not train:
            raise ValueError("train set is empty")
        counts: dict[int, dict[int, int]] = {}
        for seq in train:
            items = seq.items()
            for a, b in zip(items, items[1:]):
                counts.setdefault(a, {}).setdefault(b, 0)
                counts[a][b] += 1
        successors = {}
        for src, succ in counts.items():
            ordered = sorted(succ.items(), key=lambda kv: (-kv[1], kv[0]))
            successors[src] = (
                np.array([i for i, _ in ordered], dtype=np.int64),
                np.array([c for _, c in ordered], dtype=np.int64),
            )
        return cls(successors, popularity)

    def transition_count(self, src: int, dst: int) -> int:
        items, counts = self.successors.get(src, (np.empty(0, np.int64), np.empty(0, np.int64)))
        idx = np.nonzero(items == dst)[0]
        return int(counts[idx[0]]) if len(idx) else 0

    def recommend(self, history: UserSequence | Sequence[int], k: int,
                  exclude: set[int]) -> list[int]:
        items = history.items() if isinstance(history, UserSequence) else list(history)
        if not items:
            raise ValueError("history is empty")
        last = items[-1]
        chosen: list[int] = []
        if last in self.successors:
            for item in self.successors[last][0]:
                item = int(item)
                if item not in exclude:
                    chosen.append(item)
                    if len(chosen) == k:
                        break
        return _backfill(chosen, k, exclude, self.popularity.ranking)


def cosine_similarity(s_i: Iterable[int], s_u: Iterable[int]) -> float:
    """|intersection| / sqrt(|s_i| * |s_u|)."""
    s_i, s_u = set(s_i), set(s_u)
    if not s_i or not s_u:
        raise ValueError("cosine similarity undefined for empty sets")
    return len(s_i & s_u) / math.sqrt(len(s_i) * len(s_u))


class KnnRecommender:
    """User-based nearest neighbors with cosine similarity over item sets.

    An item's score is the similarity-weighted count of neighbors who rated
    it; the neighborhood is the k_neighbors train users most similar to the
    query history.
    """

    def __init__(self, train: Sequence[UserSequence], catalog_size: int,
                 k_neighbors: int, popularity: PopularityTable):
        if k_neighbors < 1 or k_neighbors > len(train):
            raise ValueError(f"k_neighbors must be in 1..{len(train)}")
        self.k_neighbors = k_neighbors
        self.catalog_size = catalog_size
        self.popularity = popularity
        self.item_arrays = [np.array(sorted(seq.item_set()), dtype=np.int64) for seq in train]
        self.set_sizes = np.array([len(a) for a in self.item_arrays], dtype=np.int64)
        rows, cols = [], []
        for u, arr in enumerate(self.item_arrays):
            rows.extend([u] * len(arr))
            cols.extend(arr.tolist())
        data = np.ones(len(rows), dtype=np.int64)
        self.matrix = sparse.csr_matrix(
            (data, (rows, cols)), shape=(len(train), catalog_size)
        )

    def similarities(self, history_items: Iterable[int]) -> np.ndarray:
        """Cosine similarity of the query set against every train user."""
        s_i = sorted(set(history_items))
        if not s_i:
            raise ValueError("history is empty")
        indicator = np.zeros(self.catalog_size, dtype=np.int64)
        indicator[s_i] = 1
        inter = self.matrix @ indicator
        return inter / np.sqrt(self.set_sizes * len(s_i))

    def neighborhood(self, sims: np.ndarray) -> np.ndarray:
        """Indices of the k_neighbors most similar users (ties by id asc)."""
        order = np.lexsort((np.arange(len(sims)), -sims))
        return order[: self.k_neighbors]

    def scores(self, history_items: Iterable[int]) -> np.ndarray:
        """Eq-style item scores: sum of c_iu over neighbors containing the item.

        Accumulation walks neighbors in rank order so float addition order
        is fixed and reproducible.
        """
        sims = self.similarities(history_items)
        scores = np.zeros(self.catalog_size, dtype=np.float64)
        for u in self.neighborhood(sims):
            scores[self.item_arrays[u]] += sims[u]
        return scores

    def recommend(self, history: UserSequence | Sequence[int], k: int,
                  exclude: set[int]) -> list[int]:
        items = history.items() if isinstance(history, UserSequence) else list(history)
        scores = self.scores(items)
        if exclude:
            scores[sorted(exclude)] = 0.0
        positive = np.nonzero(scores > 0.0)[0]
        order = np.lexsort((positive, -scores[positive]))
        chosen = [int(positive[i]) for i in order[:k]]
        return _backfill(chosen, k, exclude, self.popularity.ranking)


@dataclass(frozen=True)
class OracleCurvePoint:
    """Aggregated oracle metrics when recommendations are capped to top-t items."""

    t: int
    sps: float
    precision: float
    recall_normalized: float


def oracle_curve(test: Sequence[UserSequence], popularity: PopularityTable,
                 cutoffs: Sequence[int], k: int = 10) -> list[OracleCurvePoint]:
    """Sweep a perfect recommender constrained to the t most popular items.

    Per user the oracle recommends up to k future items that fall inside the
    top-t ranking prefix (padding never hits); recall is normalized by its
    unconstrained value at t = catalog size.
    """
    catalog = popularity.catalog_size
    for t in cutoffs:
        if not 1 <= t <= catalog:
            raise ValueError(f"cutoff {t} outside 1..{catalog}")

    rank_pos = np.empty(catalog, dtype=np.int64)
    rank_pos[popularity.ranking] = np.arange(catalog)

    futures = []
    for seq in test:
        _, future = half_split(seq)
        items = future.items()
        futures.append((np.sort(rank_pos[items]), rank_pos[items[0]], len(items)))

    def point(t: int) -> tuple[float, float, float]:
        sps_sum = prec_sum = rec_sum = 0.0
        for positions, next_pos, n_future in futures:
            hits = min(int(np.searchsorted(positions, t)), k)
            sps_sum += 1.0 if next_pos < t else 0.0
            prec_sum += hits / k
            rec_sum += hits / n_future
        n = len(futures)
        return sps_sum / n, prec_sum / n, rec_sum / n

    _, _, rec_anchor = point(catalog)
    out = []
    for t in cutoffs:
        sps, prec, rec = point(t)
        out.append(OracleCurvePoint(
            t=t, sps=sps, precision=prec,
            recall_normalized=rec / rec_anchor if rec_anchor > 0 else 0.0,
        ))
    return out


def write_oracle_csv(points: Sequence[OracleCurvePoint], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "sps", "prec", "rec_normalized"])
        for p in points:
            w.writerow([p.t, f"{p.sps:.6f}", f"{p.precision:.6f}", f"{p.recall_normalized:.6f}"])
