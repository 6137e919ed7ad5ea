import math

import numpy as np
import pytest

from seqrec.baselines import (KnnRecommender, MarkovRecommender, cosine_similarity,
                              oracle_curve)
from seqrec.dataset import build_popularity, half_split

from conftest import sequence


def brute_force_markov_topk(train_items, history, k, exclude, ranking):
    """Independent pair counting + sorting, for fixtures."""
    counts = {}
    for items in train_items:
        for a, b in zip(items, items[1:]):
            counts[(a, b)] = counts.get((a, b), 0) + 1
    last = history[-1]
    succ = sorted(
        ((b, c) for (a, b), c in counts.items() if a == last),
        key=lambda bc: (-bc[1], bc[0]),
    )
    out = [b for b, _ in succ if b not in exclude][:k]
    taken = set(out) | set(exclude)
    for item in ranking:
        if len(out) >= k:
            break
        if int(item) not in taken:
            out.append(int(item))
            taken.add(int(item))
    return out


def brute_force_knn_scores(train_items, history, k_neighbors, catalog):
    """Direct evaluation of the neighborhood score for every item."""
    s_i = set(history)
    sims = []
    for u, items in enumerate(train_items):
        s_u = set(items)
        sims.append((len(s_i & s_u) / math.sqrt(len(s_i) * len(s_u)), u))
    ordered = sorted(sims, key=lambda su: (-su[0], su[1]))
    neighbors = ordered[:k_neighbors]
    scores = np.zeros(catalog)
    for c_iu, u in neighbors:
        for j in sorted(set(train_items[u])):
            scores[j] += c_iu
    return scores


class TestMarkov:
    def setup_method(self):
        self.train = [sequence(0, [0, 1, 2]), sequence(1, [0, 1, 3]), sequence(2, [1, 2])]
        self.pop = build_popularity(self.train, 5)
        self.model = MarkovRecommender.train(self.train, self.pop)

    def test_hand_counted_transitions(self):
        # from item 1: item 2 twice, item 3 once
        assert self.model.transition_count(1, 2) == 2
        assert self.model.transition_count(1, 3) == 1
        assert self.model.transition_count(0, 1) == 2

    def test_single_pair(self):
        train = [sequence(0, [4, 2])]
        model = MarkovRecommender.train(train, build_popularity(train, 5))
        assert model.transition_count(4, 2) == 1

    def test_length_one_contributes_nothing(self):
        train = [sequence(0, [3])]
        model = MarkovRecommender.train(train, build_popularity(train, 5))
        assert model.successors == {}

    def test_top1_after_b(self):
        assert self.model.recommend([0, 1], k=1, exclude=set()) == [2]

    def test_exclusion_promotes_runner_up(self):
        recs = self.model.recommend([0, 1], k=1, exclude={2})
        assert recs == [3]

    def test_unseen_last_item_backfills_by_popularity(self):
        recs = self.model.recommend([4], k=2, exclude=set())
        assert recs == [int(self.pop.ranking[0]), int(self.pop.ranking[1])]

    def test_never_returns_seen_or_duplicates(self):
        recs = self.model.recommend([0, 1], k=3, exclude={0, 1})
        assert len(recs) == 3
        assert len(set(recs)) == 3
        assert not ({0, 1} & set(recs))

    def test_exhausted_catalog_returns_short_list(self):
        recs = self.model.recommend([0, 1], k=4, exclude={0, 1})
        assert recs == [2, 3, 4]  # only three unseen items exist

    def test_brute_force_equivalence_randomized(self):
        rng = np.random.default_rng(123)
        for _ in range(100):
            n_users = int(rng.integers(2, 11))
            n_items = int(rng.integers(3, 11))
            train_items = []
            for u in range(n_users):
                length = int(rng.integers(1, n_items + 1))
                train_items.append(list(rng.permutation(n_items)[:length]))
            train = [sequence(u, items) for u, items in enumerate(train_items)]
            pop = build_popularity(train, n_items)
            model = MarkovRecommender.train(train, pop)
            hist_len = int(rng.integers(1, n_items + 1))
            history = list(rng.permutation(n_items)[:hist_len])
            k = int(rng.integers(1, n_items))
            exclude = set(history) if rng.random() < 0.5 else set()
            got = model.recommend(history, k, exclude)
            want = brute_force_markov_topk(train_items, history, k, exclude, pop.ranking)
            assert got == want


class TestCosine:
    def test_hand_example(self):
        assert cosine_similarity({"a", "b"}, {"b", "c"}) == pytest.approx(0.5)

    def test_identity(self):
        assert cosine_similarity({1, 2, 3}, {1, 2, 3}) == pytest.approx(1.0)

    def test_disjoint(self):
        assert cosine_similarity({1}, {2}) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            cosine_similarity(set(), {1})


class TestKnn:
    def test_single_neighbor_degeneracy(self):
        train = [sequence(0, [0, 1, 2, 3]), sequence(1, [7, 8])]
        pop = build_popularity(train, 9)
        knn = KnnRecommender(train, 9, k_neighbors=1, popularity=pop)
        # history close to user 0: recommendations come from user 0's set
        recs = knn.recommend([0, 1], k=2, exclude={0, 1})
        assert set(recs) <= {2, 3}

    def test_scores_match_brute_force_fixture(self):
        train_items = [[0, 1, 2], [1, 2, 3], [2, 3, 4], [0, 4]]
        train = [sequence(u, it) for u, it in enumerate(train_items)]
        pop = build_popularity(train, 5)
        knn = KnnRecommender(train, 5, k_neighbors=2, popularity=pop)
        history = [1, 2]
        got = knn.scores(history)
        want = brute_force_knn_scores(train_items, history, 2, 5)
        np.testing.assert_array_equal(got, want)

    def test_brute_force_equivalence_randomized(self):
        rng = np.random.default_rng(321)
        for _ in range(100):
            n_users = int(rng.integers(2, 11))
            n_items = int(rng.integers(3, 11))
            train_items = []
            for u in range(n_users):
                length = int(rng.integers(1, n_items + 1))
                train_items.append(sorted(rng.permutation(n_items)[:length]))
            train = [sequence(u, items) for u, items in enumerate(train_items)]
            pop = build_popularity(train, n_items)
            k_neighbors = int(rng.integers(1, n_users + 1))
            knn = KnnRecommender(train, n_items, k_neighbors, pop)
            hist_len = int(rng.integers(1, n_items + 1))
            history = list(rng.permutation(n_items)[:hist_len])
            got = knn.scores(history)
            want = brute_force_knn_scores(train_items, history, k_neighbors, n_items)
            np.testing.assert_array_equal(got, want)

    def test_score_bounds(self):
        train_items = [[0, 1], [1, 2], [0, 2, 3]]
        train = [sequence(u, it) for u, it in enumerate(train_items)]
        knn = KnnRecommender(train, 4, 2, build_popularity(train, 4))
        sims = knn.similarities([0, 1, 2])
        scores = knn.scores([0, 1, 2])
        neighbors = knn.neighborhood(sims)
        assert (scores >= 0).all()
        assert scores.max() <= sims[neighbors].sum() + 1e-12

    def test_all_zero_similarity_backfills(self):
        train = [sequence(0, [0, 1])]
        pop = build_popularity(train, 6)
        knn = KnnRecommender(train, 6, 1, pop)
        recs = knn.recommend([5], k=2, exclude={5})
        assert recs == [int(pop.ranking[0]), int(pop.ranking[1])]

    def test_invalid_neighborhood_size(self):
        train = [sequence(0, [0, 1])]
        with pytest.raises(ValueError):
            KnnRecommender(train, 3, 2, build_popularity(train, 3))


class TestOracleCurve:
    def setup_method(self):
        rng = np.random.default_rng(5)
        self.catalog = 30
        self.test = []
        for u in range(20):
            length = int(rng.integers(4, 16))
            items = list(rng.permutation(self.catalog)[:length])
            self.test.append(sequence(u, items))
        train = [sequence(100 + u, list(rng.permutation(self.catalog)[: rng.integers(2, 20)]))
                 for u in range(30)]
        self.pop = build_popularity(train, self.catalog)

    def test_normalization_anchor(self):
        points = oracle_curve(self.test, self.pop, [self.catalog], k=10)
        assert points[0].recall_normalized == pytest.approx(1.0)

    def test_full_catalog_oracle_is_perfect_on_sps(self):
        points = oracle_curve(self.test, self.pop, [self.catalog], k=10)
        assert points[0].sps == pytest.approx(1.0)

    def test_t1_single_admissible_hit_precision(self):
        top_item = int(self.pop.ranking[0])
        test = [sequence(0, [5, 6, top_item, 7])]  # top item in the future half
        points = oracle_curve(test, self.pop, [1], k=10)
        assert points[0].precision == pytest.approx(1 / 10)

    def test_monotone_in_t(self):
        cutoffs = [1, 2, 5, 10, 20, self.catalog]
        points = oracle_curve(self.test, self.pop, cutoffs, k=10)
        for a, b in zip(points, points[1:]):
            assert b.sps >= a.sps
            assert b.precision >= a.precision
            assert b.recall_normalized >= a.recall_normalized

    def test_sps_equivalent_to_membership_definition(self):
        # sps at cutoff t must equal: next item within the t most popular
        cutoffs = [3, 7, 15]
        points = oracle_curve(self.test, self.pop, cutoffs, k=10)
        rank_pos = {int(item): r for r, item in enumerate(self.pop.ranking)}
        for point in points:
            expected = 0.0
            for seq in self.test:
                _, future = half_split(seq)
                expected += 1.0 if rank_pos[future.items()[0]] < point.t else 0.0
            assert point.sps == pytest.approx(expected / len(self.test))

    def test_cutoff_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            oracle_curve(self.test, self.pop, [0], k=10)
        with pytest.raises(ValueError):
            oracle_curve(self.test, self.pop, [self.catalog + 1], k=10)
