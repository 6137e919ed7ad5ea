import os
from pathlib import Path

import numpy as np
import pytest

from seqrec.dataset import Interaction, InteractionLog, UserSequence


def sequence(user, items, ratings=None, start_ts=0):
    """Build a UserSequence from item ids; timestamps follow list order."""
    ratings = ratings or [5.0] * len(items)
    events = tuple(
        Interaction(user=user, item=item, rating=r, timestamp=start_ts + t)
        for t, (item, r) in enumerate(zip(items, ratings))
    )
    return UserSequence(user=user, events=events)


def log_from_items(per_user_items, n_items=None):
    """An InteractionLog over already-dense ids (user index = list position)."""
    interactions = []
    max_item = 0
    for u, items in enumerate(per_user_items):
        for t, item in enumerate(items):
            interactions.append(Interaction(user=u, item=item, rating=5.0, timestamp=t))
            max_item = max(max_item, item)
    n_items = n_items or max_item + 1
    return InteractionLog(
        interactions=tuple(interactions),
        user_ids=tuple(range(len(per_user_items))),
        item_ids=tuple(range(n_items)),
    )


def write_csv_corpus(path: Path, per_user_items):
    """Write a generic-csv corpus from per-user item lists."""
    lines = ["user,item,rating,timestamp"]
    for u, items in enumerate(per_user_items):
        for t, item in enumerate(items):
            lines.append(f"{u},{item},5,{t}")
    path.write_text("\n".join(lines) + "\n")
    return path


def synthetic_walk_corpus(n_users=60, n_items=40, seed=0, min_len=8, max_len=26):
    """Per-user item lists with learnable sequential structure.

    Users walk a ring with a user-specific stride, so the next item is
    highly predictable from the current one; start items are skewed to
    create a popularity gradient.
    """
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(n_users):
        length = min(int(rng.integers(min_len, max_len + 1)), n_items)
        start = int(min(rng.zipf(1.3), n_items) - 1)
        stride = int(rng.choice([1, 2, 3]))
        items, seen = [], set()
        cur = start
        while len(items) < length:
            if cur not in seen:
                items.append(cur)
                seen.add(cur)
                cur = (cur + stride) % n_items
            else:
                cur = int(rng.integers(n_items))
        corpus.append(items)
    return corpus


def ml1m_dir():
    """Path to a real Movielens 1M directory, or None when unavailable."""
    for candidate in (os.environ.get("SEQREC_ML1M"), "data/ml-1m", "/root/pkg/data/ml-1m"):
        if candidate and Path(candidate).joinpath("ratings.dat").exists():
            return Path(candidate)
    return None


requires_ml1m = pytest.mark.skipif(
    ml1m_dir() is None,
    reason="Movielens 1M not available (set SEQREC_ML1M or place data/ml-1m); "
           "this sandbox cannot download it",
)
