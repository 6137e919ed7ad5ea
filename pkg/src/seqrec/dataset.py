"""Rating-log ingestion, per-user sequences, splits and popularity tables.

Every downstream method consumes the same immutable structures built here:
chronologically ordered per-user item sequences over densely re-indexed
user/item ids, a seeded user-level train/validation/test split, and the
item popularity ranking with its ten geometric-size bins.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

N_POPULARITY_BINS = 10


class ParseError(ValueError):
    """A line in an input file did not match the expected format."""


class CorpusError(ValueError):
    """The input corpus is unusable (empty, missing entities, ...)."""


@dataclass(frozen=True)
class Interaction:
    """One (user, item, rating, timestamp) event, with dense ids."""

    user: int
    item: int
    rating: float
    timestamp: int


@dataclass(frozen=True)
class UserSequence:
    """One user's history, ordered by (timestamp, item) ascending."""

    user: int
    events: tuple[Interaction, ...]

    def __len__(self) -> int:
        return len(self.events)

    def items(self) -> list[int]:
        return [e.item for e in self.events]

    def item_set(self) -> frozenset[int]:
        return frozenset(e.item for e in self.events)


@dataclass(frozen=True)
class InteractionLog:
    """The full corpus with dense ids and the original-id mappings."""

    interactions: tuple[Interaction, ...]
    user_ids: tuple[int, ...]  # dense user index -> original id
    item_ids: tuple[int, ...]  # dense item index -> original id

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    @property
    def n_interactions(self) -> int:
        return len(self.interactions)

    def rating_values(self) -> tuple[float, ...]:
        """Distinct rating values observed, ascending."""
        return tuple(sorted({e.rating for e in self.interactions}))

    def sequences(self) -> list[UserSequence]:
        """Per-user chronological sequences, indexed by dense user id."""
        per_user: list[list[Interaction]] = [[] for _ in range(self.n_users)]
        for e in self.interactions:
            per_user[e.user].append(e)
        out = []
        for u, events in enumerate(per_user):
            events.sort(key=lambda e: (e.timestamp, e.item))
            out.append(UserSequence(u, tuple(events)))
        return out


@dataclass(frozen=True)
class DatasetSplit:
    """User-level partition into train / validation / test sequences."""

    train: tuple[UserSequence, ...]
    validation: tuple[UserSequence, ...]
    test: tuple[UserSequence, ...]
    seed: int

    def all_users(self) -> set[int]:
        return {s.user for part in (self.train, self.validation, self.test) for s in part}


def _dense_maps(originals: Iterable[int]) -> dict[int, int]:
    """Original ids -> dense 0..n-1, assigned in ascending original order."""
    return {orig: i for i, orig in enumerate(sorted(set(originals)))}


def _dedupe(raw: list[tuple[int, int, float, int]]) -> list[tuple[int, int, float, int]]:
    """Keep the earliest event per (user, item); later duplicates are dropped."""
    raw.sort(key=lambda r: (r[0], r[3], r[1]))
    seen: set[tuple[int, int]] = set()
    kept = []
    dropped = 0
    for rec in raw:
        key = (rec[0], rec[1])
        if key in seen:
            dropped += 1
            continue
        seen.add(key)
        kept.append(rec)
    if dropped:
        log.warning("dropped %d duplicate (user, item) events, keeping the earliest", dropped)
    return kept


def load_ratings(path: str | Path, fmt: str = "movielens-1m") -> InteractionLog:
    """Parse a rating log into an InteractionLog with dense ids.

    ``movielens-1m`` expects ``UserID::MovieID::Rating::Timestamp`` lines;
    ``generic-csv`` expects a header ``user,item,rating,timestamp``.
    """
    path = Path(path)
    if fmt == "movielens-1m":
        raw = _parse_ml1m_ratings(path)
    elif fmt == "generic-csv":
        raw = _parse_generic_csv(path)
    else:
        raise ValueError(f"unknown ratings format: {fmt!r}")
    if not raw:
        raise CorpusError(f"{path}: empty corpus")
    raw = _dedupe(raw)
    umap = _dense_maps(r[0] for r in raw)
    imap = _dense_maps(r[1] for r in raw)
    interactions = tuple(
        Interaction(umap[u], imap[i], rating, ts) for u, i, rating, ts in raw
    )
    logrec = InteractionLog(
        interactions=interactions,
        user_ids=tuple(sorted(umap)),
        item_ids=tuple(sorted(imap)),
    )
    log.info(
        "%s: %d users, %d items, %d interactions",
        path.name, logrec.n_users, logrec.n_items, logrec.n_interactions,
    )
    return logrec


def _parse_ml1m_ratings(path: Path) -> list[tuple[int, int, float, int]]:
    raw = []
    with open(path, encoding="latin-1") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("::")
            if len(parts) != 4:
                raise ParseError(f"{path}:{lineno}: expected UserID::MovieID::Rating::Timestamp, got {line!r}")
            try:
                u, i = int(parts[0]), int(parts[1])
                rating = float(parts[2])
                ts = int(parts[3])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            if ts < 0:
                raise ParseError(f"{path}:{lineno}: negative timestamp {ts}")
            raw.append((u, i, rating, ts))
    return raw


def _parse_generic_csv(path: Path) -> list[tuple[int, int, float, int]]:
    raw = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return []
        if [h.strip() for h in header] != ["user", "item", "rating", "timestamp"]:
            raise ParseError(f"{path}:1: expected header 'user,item,rating,timestamp', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                u, i = int(row[0]), int(row[1])
                rating = float(row[2])
                ts = int(row[3])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            if ts < 0:
                raise ParseError(f"{path}:{lineno}: negative timestamp {ts}")
            raw.append((u, i, rating, ts))
    return raw


# -- side features ----------------------------------------------------------

_YEAR_RE = re.compile(r"\((\d{4})\)\s*$")


@dataclass(frozen=True)
class SideFeatures:
    """One-hot / multi-hot extra-input blocks for users, items and events.

    Encoded as active indices within each block; block widths are derived
    from the corpus (age ranges, sexes, occupations, decades, genres and
    distinct rating values actually observed).
    """

    user_active: tuple[tuple[int, ...], ...]   # dense user -> active indices in user block
    item_active: tuple[tuple[int, ...], ...]   # dense item -> active indices in item block
    rating_index: dict[float, int]             # rating value -> index in interaction block
    user_width: int
    item_width: int
    age_categories: tuple[int, ...]
    sex_categories: tuple[str, ...]
    occupation_categories: tuple[int, ...]
    decade_categories: tuple[int, ...]
    genre_categories: tuple[str, ...]

    @property
    def interaction_width(self) -> int:
        return len(self.rating_index)

    def block_widths(self) -> dict[str, int]:
        return {
            "user": self.user_width,
            "item": self.item_width,
            "interaction": self.interaction_width,
        }


def load_side_features(users_path: str | Path, movies_path: str | Path,
                       log_: InteractionLog) -> SideFeatures:
    """Parse ML-1M ``users.dat`` / ``movies.dat`` into per-entity feature blocks."""
    users_path, movies_path = Path(users_path), Path(movies_path)

    user_rows: dict[int, tuple[str, int, int]] = {}
    with open(users_path, encoding="latin-1") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("::")
            if len(parts) != 5:
                raise ParseError(f"{users_path}:{lineno}: expected UserID::Gender::Age::Occupation::Zip")
            try:
                user_rows[int(parts[0])] = (parts[1], int(parts[2]), int(parts[3]))
            except ValueError as exc:
                raise ParseError(f"{users_path}:{lineno}: {exc}") from exc

    movie_rows: dict[int, tuple[int, tuple[str, ...]]] = {}
    with open(movies_path, encoding="latin-1") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("::")
            if len(parts) != 3:
                raise ParseError(f"{movies_path}:{lineno}: expected MovieID::Title::Genres")
            m = _YEAR_RE.search(parts[1])
            if m is None:
                raise ParseError(f"{movies_path}:{lineno}: no (YYYY) year in title {parts[1]!r}")
            year = int(m.group(1))
            genres = tuple(g for g in parts[2].split("|") if g)
            if not genres:
                raise ParseError(f"{movies_path}:{lineno}: no genres for movie {parts[0]}")
            movie_rows[int(parts[0])] = (year // 10 * 10, genres)

    missing_u = [orig for orig in log_.user_ids if orig not in user_rows]
    if missing_u:
        raise CorpusError(f"{users_path}: users in log but absent: {missing_u[:10]}")
    missing_i = [orig for orig in log_.item_ids if orig not in movie_rows]
    if missing_i:
        raise CorpusError(f"{movies_path}: items in log but absent: {missing_i[:10]}")

    ages = tuple(sorted({user_rows[o][1] for o in log_.user_ids}))
    sexes = tuple(sorted({user_rows[o][0] for o in log_.user_ids}))
    occs = tuple(sorted({user_rows[o][2] for o in log_.user_ids}))
    decades = tuple(sorted({movie_rows[o][0] for o in log_.item_ids}))
    genres_all = tuple(sorted({g for o in log_.item_ids for g in movie_rows[o][1]}))

    age_at = {v: i for i, v in enumerate(ages)}
    sex_at = {v: i for i, v in enumerate(sexes)}
    occ_at = {v: i for i, v in enumerate(occs)}
    dec_at = {v: i for i, v in enumerate(decades)}
    genre_at = {v: i for i, v in enumerate(genres_all)}

    n_age, n_sex = len(ages), len(sexes)
    user_active = []
    for orig in log_.user_ids:
        sex, age, occ = user_rows[orig]
        user_active.append((age_at[age], n_age + sex_at[sex], n_age + n_sex + occ_at[occ]))

    n_dec = len(decades)
    item_active = []
    for orig in log_.item_ids:
        decade, genres = movie_rows[orig]
        item_active.append(tuple([dec_at[decade]] + sorted(n_dec + genre_at[g] for g in genres)))

    rating_index = {v: i for i, v in enumerate(log_.rating_values())}

    return SideFeatures(
        user_active=tuple(user_active),
        item_active=tuple(item_active),
        rating_index=rating_index,
        user_width=n_age + n_sex + len(occs),
        item_width=n_dec + len(genres_all),
        age_categories=ages,
        sex_categories=sexes,
        occupation_categories=occs,
        decade_categories=decades,
        genre_categories=genres_all,
    )


# -- splitting ---------------------------------------------------------------

def split_users(log_: InteractionLog, n_test: int, n_validation: int,
                seed: int) -> DatasetSplit:
    """Draw disjoint test/validation user sets uniformly at random.

    The draw is driven solely by ``seed``. Users with fewer than 2 events
    are never placed in test/validation (they cannot be half-split) and
    fall through to train.
    """
    if n_test < 0 or n_validation < 0:
        raise ValueError("n_test and n_validation must be non-negative")
    if n_test + n_validation >= log_.n_users:
        raise ValueError(
            f"n_test + n_validation = {n_test + n_validation} must be < {log_.n_users} users"
        )
    sequences = log_.sequences()
    eligible = sum(1 for s in sequences if len(s) >= 2)
    if n_test + n_validation > eligible:
        raise ValueError(
            f"only {eligible} users have >= 2 events; cannot draw {n_test + n_validation}"
        )

    rng = np.random.default_rng(seed)
    order = rng.permutation(log_.n_users)

    test_u: list[int] = []
    val_u: list[int] = []
    train_u: list[int] = []
    skipped = 0
    for u in order:
        u = int(u)
        if len(sequences[u]) < 2 and (len(test_u) < n_test or len(val_u) < n_validation):
            train_u.append(u)
            skipped += 1
            continue
        if len(test_u) < n_test:
            test_u.append(u)
        elif len(val_u) < n_validation:
            val_u.append(u)
        else:
            train_u.append(u)
    if skipped:
        log.warning("%d users shorter than 2 events were excluded from test/validation", skipped)

    return DatasetSplit(
        train=tuple(sequences[u] for u in sorted(train_u)),
        validation=tuple(sequences[u] for u in sorted(val_u)),
        test=tuple(sequences[u] for u in sorted(test_u)),
        seed=seed,
    )


def save_split_manifest(split: DatasetSplit, log_: InteractionLog, path: str | Path) -> None:
    """Persist (role, original_user_id) pairs so a split reloads exactly."""
    with open(path, "w") as fh:
        fh.write(f"# seed={split.seed}\n")
        for role, part in (("train", split.train), ("validation", split.validation),
                           ("test", split.test)):
            for seq in part:
                fh.write(f"{role}\t{log_.user_ids[seq.user]}\n")


def load_split_manifest(log_: InteractionLog, path: str | Path) -> DatasetSplit:
    """Rebuild a DatasetSplit from a manifest written by save_split_manifest."""
    dense_of = {orig: i for i, orig in enumerate(log_.user_ids)}
    roles: dict[str, list[int]] = {"train": [], "validation": [], "test": []}
    seed = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = re.search(r"seed=(-?\d+)", line)
                if m:
                    seed = int(m.group(1))
                continue
            try:
                role, orig = line.split("\t")
                roles[role].append(dense_of[int(orig)])
            except (ValueError, KeyError) as exc:
                raise ParseError(f"{path}:{lineno}: bad manifest line {line!r}") from exc
    sequences = log_.sequences()
    listed = [u for us in roles.values() for u in us]
    if sorted(listed) != list(range(log_.n_users)):
        raise CorpusError(f"{path}: manifest does not partition the {log_.n_users} users")
    return DatasetSplit(
        train=tuple(sequences[u] for u in sorted(roles["train"])),
        validation=tuple(sequences[u] for u in sorted(roles["validation"])),
        test=tuple(sequences[u] for u in sorted(roles["test"])),
        seed=seed,
    )


def half_split(seq: UserSequence) -> tuple[UserSequence, UserSequence]:
    """Split a sequence into (first floor(L/2) events, the remainder)."""
    if len(seq) < 2:
        raise ValueError(f"user {seq.user}: need >= 2 events to half-split, got {len(seq)}")
    cut = len(seq) // 2
    return (UserSequence(seq.user, seq.events[:cut]),
            UserSequence(seq.user, seq.events[cut:]))


# -- popularity --------------------------------------------------------------

@dataclass(frozen=True)
class PopularityTable:
    """Items ranked by train-set rating count, plus geometric popularity bins.

    ``ranking[0]`` is the most rated item; ``bin_of[i]`` is in 1..10 with
    p=10 the smallest, most-popular bin and p=1 the largest, least-popular.
    """

    ranking: np.ndarray        # (catalog,) item ids, most popular first
    bin_of: np.ndarray         # (catalog,) popularity bin per item id
    counts: np.ndarray         # (catalog,) train rating count per item id

    @property
    def catalog_size(self) -> int:
        return len(self.ranking)

    def bin_sizes(self) -> dict[int, int]:
        return {p: int(np.sum(self.bin_of == p)) for p in range(1, N_POPULARITY_BINS + 1)}


def _geometric_bin_sizes(catalog: int) -> dict[int, int]:
    """Bin sizes proportional to 2^(10-p), rounded, remainder to bin 1.

    With at least as many items as bins, every bin is non-empty (so the
    most popular item always sits in bin 10) and sizes stay non-decreasing
    from p=10 down to p=1.
    """
    total_weight = 2 ** N_POPULARITY_BINS - 1
    # s[j] is the size of bin p = 10 - j, for p = 10..2
    s = [int(round(catalog * 2 ** j / total_weight)) for j in range(N_POPULARITY_BINS - 1)]
    if catalog >= N_POPULARITY_BINS:
        s = [max(v, 1) for v in s]
    for j in range(1, len(s)):
        s[j] = max(s[j], s[j - 1])
    # keep the least-popular bin the largest: shrink the first-largest bin
    # (never below 1) until the remainder can absorb it
    while catalog - sum(s) < s[-1]:
        j = s.index(max(s))
        if s[j] <= 1:
            break
        s[j] -= 1
    if catalog < N_POPULARITY_BINS:
        used = 0
        for j in range(len(s)):
            s[j] = min(s[j], catalog - used)
            used += s[j]
    sizes = {N_POPULARITY_BINS - j: v for j, v in enumerate(s)}
    sizes[1] = catalog - sum(s)
    return sizes


def build_popularity(train: Sequence[UserSequence], catalog_size: int) -> PopularityTable:
    """Rank items by descending train rating count and assign the ten bins."""
    if not train:
        raise ValueError("train set is empty")
    counts = np.zeros(catalog_size, dtype=np.int64)
    for seq in train:
        for e in seq.events:
            counts[e.item] += 1
    order = np.lexsort((np.arange(catalog_size), -counts))
    ranking = order.astype(np.int64)

    sizes = _geometric_bin_sizes(catalog_size)
    bin_of = np.zeros(catalog_size, dtype=np.int64)
    pos = 0
    for p in range(N_POPULARITY_BINS, 0, -1):
        for item in ranking[pos:pos + sizes[p]]:
            bin_of[item] = p
        pos += sizes[p]
    return PopularityTable(ranking=ranking, bin_of=bin_of, counts=counts)
