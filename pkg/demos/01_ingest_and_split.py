"""Ingestion walkthrough: parse a rating log, split users, inspect popularity.

Writes a small generic-csv corpus to a temp directory, loads it back, draws
a seeded train/validation/test split and prints the popularity bins.
"""

import tempfile
from pathlib import Path

from seqrec import build_popularity, load_ratings, split_users
from seqrec.dataset import save_split_manifest

from _synthetic import build_corpus

tmp = Path(tempfile.mkdtemp(prefix="seqrec-demo-"))
corpus = build_corpus(n_users=80, n_items=40, seed=7)

csv_path = tmp / "corpus.csv"
with open(csv_path, "w") as fh:
    fh.write("user,item,rating,timestamp\n")
    for seq in corpus:
        for e in seq.events:
            fh.write(f"{seq.user},{e.item},{int(e.rating)},{e.timestamp}\n")

log = load_ratings(csv_path, "generic-csv")
print(f"loaded {log.n_users} users, {log.n_items} items, {log.n_interactions} events")

split = split_users(log, n_test=10, n_validation=10, seed=1)
print(f"split: {len(split.train)} train, {len(split.validation)} validation, "
      f"{len(split.test)} test users")
save_split_manifest(split, log, tmp / "split.txt")
print(f"split manifest -> {tmp / 'split.txt'}")

pop = build_popularity(split.train, log.n_items)
print("\npopularity ranking head:", [int(i) for i in pop.ranking[:8]])
print("bin sizes (p=10 most popular ... p=1 least):")
for p in range(10, 0, -1):
    print(f"  p={p:>2}: {pop.bin_sizes()[p]} items")
