"""Shared synthetic corpus builder for the demo scripts.

Sequences follow a noisy ring walk (next item usually current + stride),
with start items drawn from a skewed distribution so the catalog has a
popular head and a long tail, like real rating data.
"""

import numpy as np

from seqrec.dataset import Interaction, InteractionLog, UserSequence


def build_corpus(n_users=200, n_items=60, seed=0, min_len=10, max_len=40,
                 jump_prob=0.25):
    rng = np.random.default_rng(seed)
    sequences = []
    for u in range(n_users):
        length = min(int(rng.integers(min_len, max_len + 1)), n_items)
        cur = int(min(rng.zipf(1.4), n_items) - 1)
        stride = int(rng.choice([1, 2, 3]))
        items, seen = [], set()
        while len(items) < length:
            if cur not in seen:
                items.append(cur)
                seen.add(cur)
                if rng.random() < jump_prob:
                    cur = int(min(rng.zipf(1.4), n_items) - 1)
                else:
                    cur = (cur + stride) % n_items
            else:
                cur = int(rng.integers(n_items))
        events = tuple(Interaction(u, item, 5.0, t) for t, item in enumerate(items))
        sequences.append(UserSequence(u, events))
    return sequences


def as_log(sequences, n_items):
    interactions = tuple(e for s in sequences for e in s.events)
    return InteractionLog(
        interactions=interactions,
        user_ids=tuple(range(len(sequences))),
        item_ids=tuple(range(n_items)),
    )
