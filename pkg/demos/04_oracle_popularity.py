"""The popularity-constrained oracle: why short-term metrics need diversity.

A perfect recommender restricted to the t most popular items saturates
recall@10 quickly, but sps@10 keeps climbing long after: predicting the
exact next item needs far more of the catalog than predicting something
the user will eventually consume.
"""

from seqrec import build_popularity
from seqrec.baselines import oracle_curve

from _synthetic import build_corpus

n_items = 400
corpus = build_corpus(n_users=500, n_items=n_items, seed=5, min_len=20, max_len=60,
                      jump_prob=0.5)
train, test = corpus[100:], corpus[:100]
pop = build_popularity(train, n_items)

cutoffs = [1, 2, 4, 8, 16, 32, 64, 128, 200, 300, n_items]
points = oracle_curve(test, pop, cutoffs, k=10)

print(f"{'t':>4} {'sps@10':>8} {'prec@10':>8} {'rec@10 (norm)':>14}")
for p in points:
    print(f"{p.t:>4} {p.sps:8.3f} {p.precision:8.3f} {p.recall_normalized:14.3f}")

max_sps = max(p.sps for p in points)
t_rec = next(p.t for p in points if p.recall_normalized >= 0.8)
t_sps = next(p.t for p in points if p.sps >= 0.8 * max_sps)
print(f"\nnormalized rec@10 reaches 80% of max at t = {t_rec}")
print(f"sps@10 reaches 80% of its max only at t = {t_sps}")
