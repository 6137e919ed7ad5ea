"""Sweep the diversity bias: trade next-item accuracy for item coverage.

The loss of a correctly-predicted popular item is divided by e^(delta * p),
p being its popularity bin (10 = most popular), so larger deltas push the
network toward the catalog's tail. Small deltas buy coverage cheaply;
large ones hurt accuracy enough that coverage falls back.
"""

from seqrec import build_popularity
from seqrec.dataset import DatasetSplit
from seqrec.harness import TrainConfig, evaluate, train
from seqrec.optimize import OptimizerConfig

from _synthetic import build_corpus

corpus = build_corpus(n_users=350, n_items=150, seed=13, jump_prob=0.5,
                      min_len=15, max_len=45)
split = DatasetSplit(train=tuple(corpus[70:]), validation=tuple(corpus[:35]),
                     test=tuple(corpus[35:70]), seed=0)
pop = build_popularity(split.train, 150)

print(f"{'delta':>6} {'sps@10':>8} {'item cov':>9} {'user cov':>9}")
for delta in (0.0, 0.1, 0.2, 0.4, 1.0):
    config = TrainConfig(
        cell_kind="lstm", hidden_size=8,
        optimizer=OptimizerConfig(kind="adagrad", eta=0.1),
        loss="diversity" if delta else "xent", delta=delta,
        epochs=4, validation_every=10_000, shuffle_seed=1, init_seed=2,
    )
    model, _ = train(config, split, popularity=pop)
    r = evaluate(model, split.test, k=10, method=f"delta={delta}")
    print(f"{delta:>6.1f} {r.sps:7.2f}% {r.item_coverage:9d} {r.user_coverage:8.2f}%")
