"""Synthetic binary-vector-pair datasets.

Generation protocol for the equality task, vector-coverage variants,
stratified splitting, input encoding and four alternative labelling
tasks. Every generator is a pure function of its parameters and seed.

Datasets are stored column-wise as uint8 arrays (``v1``, ``v2`` of shape
(N, n) and ``labels`` of shape (N,)) rather than as object lists; the
``pairs()`` iterator gives a row-level view when needed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .utils import make_rng, spawn_seeds

# Equality protocol constants: exhaustive equal pairs below this dimension,
# sampled pairs (per class) at or above it.
EXHAUSTIVE_DIM_LIMIT = 10
SAMPLED_PAIRS_PER_CLASS = 5000

_MAX_REJECTION_ROUNDS = 10_000


class TaskKind(str, Enum):
    EQUALITY = "equality"
    COMPARISON = "comparison"
    DIGITSUM3 = "digitsum3"
    REVERSAL = "reversal"
    PARITY = "parity"


class Representation(str, Enum):
    ZERO_ONE = "zero_one"
    SIGN = "sign"


class CoverageMode(str, Enum):
    RANDOM = "random"
    ONE_POSITION = "one_position"
    BOTH_POSITIONS = "both_positions"


@dataclass(frozen=True)
class LabeledPair:
    v1: tuple[int, ...]
    v2: tuple[int, ...]
    label: int


@dataclass
class Dataset:
    """A labelled collection of binary vector pairs."""

    v1: np.ndarray
    v2: np.ndarray
    labels: np.ndarray
    n: int
    task: TaskKind | None = None
    seed: int | None = None
    role: str = "full"

    def __post_init__(self):
        self.v1 = np.ascontiguousarray(self.v1, dtype=np.uint8)
        self.v2 = np.ascontiguousarray(self.v2, dtype=np.uint8)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if self.v1.shape != self.v2.shape or self.v1.ndim != 2:
            raise ConfigurationError("v1 and v2 must be (N, n) arrays of equal shape")
        if self.v1.shape[1] != self.n:
            raise ConfigurationError(f"vector width {self.v1.shape[1]} != declared n={self.n}")
        if self.labels.shape != (self.v1.shape[0],):
            raise ConfigurationError("labels must be one per pair")
        if self.v1.max(initial=0) > 1 or self.v2.max(initial=0) > 1 or self.labels.max(initial=0) > 1:
            raise ConfigurationError("bits and labels must be in {0, 1}")

    def __len__(self) -> int:
        return self.v1.shape[0]

    @property
    def class_counts(self) -> tuple[int, int]:
        pos = int(self.labels.sum())
        return len(self) - pos, pos

    def pairs(self):
        for i in range(len(self)):
            yield LabeledPair(tuple(int(b) for b in self.v1[i]),
                              tuple(int(b) for b in self.v2[i]),
                              int(self.labels[i]))

    def take(self, indices: np.ndarray, role: str | None = None) -> "Dataset":
        return replace(self, v1=self.v1[indices], v2=self.v2[indices],
                       labels=self.labels[indices], role=role or self.role)


def _all_vectors(n: int) -> np.ndarray:
    """All 2^n binary vectors, lexicographic, most-significant bit first."""
    idx = np.arange(2 ** n, dtype=np.uint64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def _random_vectors(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=(count, n), dtype=np.uint8)


def sample_unequal_pair(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Two i.i.d. uniform vectors, resampled until they differ."""
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    while True:
        v1 = _random_vectors(rng, 1, n)[0]
        v2 = _random_vectors(rng, 1, n)[0]
        if not np.array_equal(v1, v2):
            return v1, v2


def _sample_unequal_bulk(n: int, count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised rejection sampling of ``count`` unequal pairs."""
    out1, out2, have = [], [], 0
    while have < count:
        todo = count - have
        c1 = _random_vectors(rng, todo, n)
        c2 = _random_vectors(rng, todo, n)
        keep = (c1 != c2).any(axis=1)
        out1.append(c1[keep])
        out2.append(c2[keep])
        have += int(keep.sum())
    return np.concatenate(out1)[:count], np.concatenate(out2)[:count]


def gen_equality_dataset(n: int, seed: int) -> Dataset:
    """Equality-task dataset.

    For n < 10 the equal class enumerates all 2^n pairs (v, v) and the
    unequal class is 2^n rejection-sampled pairs. For n >= 10 both classes
    hold 5000 sampled pairs (equal-pair vectors drawn with replacement,
    which matters while 2^n < 5000). Exactly class-balanced either way.
    """
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    rng = make_rng(seed, 0xDA7A)
    if n < EXHAUSTIVE_DIM_LIMIT:
        eq = _all_vectors(n)
    else:
        eq = _random_vectors(rng, SAMPLED_PAIRS_PER_CLASS, n)
    uq1, uq2 = _sample_unequal_bulk(n, len(eq), rng)
    v1 = np.concatenate([eq, uq1])
    v2 = np.concatenate([eq.copy(), uq2])
    labels = np.concatenate([np.ones(len(eq), np.uint8), np.zeros(len(eq), np.uint8)])
    return Dataset(v1, v2, labels, n, TaskKind.EQUALITY, seed, "full")


def _split_class_groups(idx: np.ndarray, group_of: np.ndarray, target: int,
                        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Greedy group-level split of one class aiming at ``target`` train items."""
    groups: dict[int, list[int]] = {}
    for i in idx:
        groups.setdefault(int(group_of[i]), []).append(int(i))
    order = rng.permutation(sorted(groups))
    chosen, count = [], 0
    deferred = []
    for g in order:
        size = len(groups[g])
        if count + size <= target:
            chosen.append(g)
            count += size
        else:
            deferred.append(g)
    for g in deferred:  # second pass fills any shortfall with smaller groups
        size = len(groups[g])
        if count + size <= target:
            chosen.append(g)
            count += size
    chosen_set = set(chosen)
    train = [i for g in chosen for i in groups[g]]
    test = [i for g in order if g not in chosen_set for i in groups[g]]
    return np.array(train, dtype=np.int64), np.array(test, dtype=np.int64)


def stratified_split(data: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Class-preserving split into disjoint train/test parts.

    Identical labeled pairs are kept on one side of the split, so the
    parts are disjoint as multisets. Equal pairs drawn with replacement
    (dimension 10..12) therefore never leak their vector into the other
    part; what remains "unseen" in the test set is exactly the equal pairs
    over held-out vectors. Per-class train counts are
    round(train_fraction * class_size), adjusted downward only when a
    duplicate group straddles the boundary; the minority class then
    matches the majority count where class sizes allow, keeping both
    parts balanced. Raises if either part would lose a class entirely.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ConfigurationError("train_fraction must be in (0, 1)")
    rng = make_rng(seed, 0x5B11)
    rows = np.concatenate([data.v1, data.v2, data.labels[:, None]], axis=1)
    _, group_of = np.unique(rows, axis=0, return_inverse=True)

    train_parts, test_parts = [], []
    achieved = None
    for cls in (1, 0):
        idx = np.flatnonzero(data.labels == cls)
        if len(idx) == 0:
            raise ConfigurationError(f"class {cls} missing from dataset")
        target = int(np.floor(train_fraction * len(idx) + 0.5))
        if achieved is not None and len(idx) >= achieved:
            target = achieved
        train_idx, test_idx = _split_class_groups(idx, group_of, target, rng)
        if len(train_idx) == 0 or len(test_idx) == 0:
            raise ConfigurationError(
                f"train_fraction {train_fraction} leaves class {cls} empty in one part"
            )
        if achieved is None:
            achieved = len(train_idx)
        train_parts.append(train_idx)
        test_parts.append(test_idx)
    train_all = rng.permutation(np.concatenate(train_parts))
    test_all = rng.permutation(np.concatenate(test_parts))
    return data.take(train_all, "train"), data.take(test_all, "test")


def balanced_subset(data: Dataset, size: int, seed: int) -> Dataset:
    """Class-balanced subset of ``size`` items.

    Takes per-class prefixes of a seeded permutation, so for a fixed seed
    subsets of growing size are nested.
    """
    if size < 2 or size > len(data):
        raise ConfigurationError(f"subset size {size} out of range")
    rng = make_rng(seed, 0x5AB5)
    per_class = size // 2
    parts = []
    for cls in (1, 0):
        idx = np.flatnonzero(data.labels == cls)
        want = per_class + (size % 2 if cls == 1 else 0)
        if want > len(idx):
            raise ConfigurationError(f"class {cls} has only {len(idx)} items, need {want}")
        parts.append(rng.permutation(idx)[:want])
    return data.take(np.sort(np.concatenate(parts)), data.role)


def _vector_keys(rows: np.ndarray) -> set[bytes]:
    return {row.tobytes() for row in np.ascontiguousarray(rows, dtype=np.uint8)}


def gen_coverage_dataset(n: int, mode: CoverageMode, seed: int) -> tuple[Dataset, Dataset]:
    """Equality datasets where training unequal pairs cover the test vectors.

    The test set is the 25% part of a standard split. The training set is
    then rebuilt: the distinct test vectors are shuffled and paired among
    themselves, adjacent pairs for ``one_position`` (each vector in exactly
    one unequal pair) or a full rotation for ``both_positions`` (each vector
    exactly once as v1 and once as v2). Equal training pairs are drawn from
    vectors that never occur in a test equal pair, matched in count to the
    unequal pairs.
    """
    mode = CoverageMode(mode)
    if mode is CoverageMode.RANDOM:
        raise ConfigurationError("coverage construction requires one_position or both_positions")
    data_seed, split_seed, cov_seed = spawn_seeds(seed, 3)
    full = gen_equality_dataset(n, data_seed)
    _, test = stratified_split(full, 0.75, split_seed)

    rng = make_rng(cov_seed, 0xC0F)
    distinct = np.unique(np.concatenate([test.v1, test.v2]), axis=0)
    if len(distinct) < 2:
        raise ConfigurationError("test set covers fewer than two distinct vectors")
    order = rng.permutation(len(distinct))
    u = distinct[order]

    if mode is CoverageMode.BOTH_POSITIONS:
        uq1 = u
        uq2 = np.roll(u, -1, axis=0)
    else:
        m = len(u) - (len(u) % 2)
        uq1 = u[0:m:2]
        uq2 = u[1:m:2]
        if len(u) % 2:
            # Odd leftover: pair it with a fresh vector, preferring one
            # outside the test set so coverage counts stay exact.
            test_keys = _vector_keys(u)
            leftover = u[-1]
            partner = leftover.copy()
            partner[0] ^= 1
            for _ in range(1000):
                cand = _random_vectors(rng, 1, n)[0]
                if np.array_equal(cand, leftover):
                    continue
                partner = cand
                if cand.tobytes() not in test_keys:
                    break
            uq1 = np.concatenate([uq1, leftover[None]])
            uq2 = np.concatenate([uq2, partner[None]])

    banned = _vector_keys(test.v1[test.labels == 1])
    eq_vectors = _sample_outside(n, len(uq1), banned, rng)

    v1 = np.concatenate([eq_vectors, uq1])
    v2 = np.concatenate([eq_vectors.copy(), uq2])
    labels = np.concatenate([np.ones(len(eq_vectors), np.uint8), np.zeros(len(uq1), np.uint8)])
    perm = rng.permutation(len(labels))
    train = Dataset(v1[perm], v2[perm], labels[perm], n, TaskKind.EQUALITY, seed, "train")
    return train, test


def _sample_outside(n: int, count: int, banned: set[bytes], rng: np.random.Generator) -> np.ndarray:
    """``count`` vectors (with replacement) avoiding the banned key set."""
    if n < EXHAUSTIVE_DIM_LIMIT:
        allowed = np.array([v for v in _all_vectors(n) if v.tobytes() not in banned], dtype=np.uint8)
        if len(allowed) == 0:
            raise ConfigurationError("no vectors left outside the test equal pairs")
        return allowed[rng.integers(0, len(allowed), size=count)]
    rows, have, rounds = [], 0, 0
    while have < count:
        cand = _random_vectors(rng, count - have, n)
        keep = np.array([row.tobytes() not in banned for row in cand])
        rows.append(cand[keep])
        have += int(keep.sum())
        rounds += 1
        if rounds > _MAX_REJECTION_ROUNDS:
            raise ConfigurationError("could not sample vectors outside the test equal pairs")
    return np.concatenate(rows)[:count]


def encode_pair(v1, v2, representation: Representation) -> np.ndarray:
    """Concatenated [v1, v2] as reals; sign representation maps 0 -> -1."""
    representation = Representation(representation)
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    if v1.shape != v2.shape or v1.ndim != 1:
        raise ConfigurationError("pair vectors must be 1-d and of equal length")
    x = np.concatenate([v1, v2])
    if representation is Representation.SIGN:
        x = 2.0 * x - 1.0
    return x


def encode_dataset(data: Dataset, representation: Representation) -> tuple[np.ndarray, np.ndarray]:
    """(X, y) with X of shape (N, 2n); labels are untouched by encoding."""
    representation = Representation(representation)
    x = np.concatenate([data.v1, data.v2], axis=1).astype(np.float64)
    if representation is Representation.SIGN:
        x = 2.0 * x - 1.0
    return np.ascontiguousarray(x), data.labels.astype(np.float64)


def label_task(task: TaskKind, v1, v2) -> int:
    """Label of one pair under a task's rule."""
    task = TaskKind(task)
    v1 = np.asarray(v1, dtype=np.uint8)
    v2 = np.asarray(v2, dtype=np.uint8)
    if v1.shape != v2.shape or v1.ndim != 1:
        raise ConfigurationError("pair vectors must be 1-d and of equal length")
    return int(_label_bulk(task, v1[None], v2[None])[0])


def _label_bulk(task: TaskKind, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    if task is TaskKind.EQUALITY:
        return (v1 == v2).all(axis=1)
    if task is TaskKind.COMPARISON:
        # int(v1) >= int(v2), most significant bit first: lexicographic order.
        diff = v1 != v2
        first = diff.argmax(axis=1)
        rows = np.arange(len(v1))
        ge = v1[rows, first] > v2[rows, first]
        return np.where(diff.any(axis=1), ge, True)
    if task is TaskKind.DIGITSUM3:
        return (v1.sum(axis=1, dtype=np.int64) + v2.sum(axis=1, dtype=np.int64)) >= 3
    if task is TaskKind.REVERSAL:
        return (v1 == v2[:, ::-1]).all(axis=1)
    if task is TaskKind.PARITY:
        return ((v1.sum(axis=1, dtype=np.int64) + v2.sum(axis=1, dtype=np.int64)) % 2) == 1
    raise ConfigurationError(f"unknown task {task}")


def _check_feasible(task: TaskKind, n: int) -> None:
    if task is TaskKind.DIGITSUM3 and 2 * n < 3:
        raise ConfigurationError(f"digitsum3 positives are impossible at n={n}")


def _sample_low_digitsum(n: int, count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform pairs whose 2n concatenated bits sum to at most 2.

    Random pairs almost never land in this class for n >= 10, so sample the
    class directly: pick the bit count k with weight C(2n, k), then k
    distinct positions.
    """
    m = 2 * n
    weights = np.array([1.0, m, m * (m - 1) / 2.0])
    ks = rng.choice(3, size=count, p=weights / weights.sum())
    flat = np.zeros((count, m), dtype=np.uint8)
    for i, k in enumerate(ks):
        if k:
            flat[i, rng.choice(m, size=int(k), replace=False)] = 1
    return flat[:, :n], flat[:, n:]


def gen_task_dataset(task: TaskKind, n: int, size: int, seed: int) -> Dataset:
    """Class-balanced sampled dataset for any task.

    Classes are filled by vectorised rejection sampling against the task's
    label rule, except where a class is exponentially rare and is
    constructed directly instead (reversal positives via v2 = reverse(v1),
    digitsum3 negatives via low-bit-count patterns). The exhaustive
    small-dimension equality protocol lives in :func:`gen_equality_dataset`.
    """
    task = TaskKind(task)
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    if size < 2 or size % 2:
        raise ConfigurationError("size must be an even integer >= 2")
    _check_feasible(task, n)
    rng = make_rng(seed, 0x7A5C)
    half = size // 2

    def constructive(label: int):
        if task is TaskKind.EQUALITY and label == 1:
            v = _random_vectors(rng, half, n)
            return v, v.copy()
        if task is TaskKind.REVERSAL and label == 1:
            v = _random_vectors(rng, half, n)
            return v, v[:, ::-1].copy()
        if task is TaskKind.DIGITSUM3 and label == 0:
            return _sample_low_digitsum(n, half, rng)
        return None

    def rejection(label: int):
        got1, got2, have, rounds = [], [], 0, 0
        while have < half:
            c1 = _random_vectors(rng, max(half - have, 64), n)
            c2 = _random_vectors(rng, len(c1), n)
            keep = _label_bulk(task, c1, c2) == bool(label)
            got1.append(c1[keep])
            got2.append(c2[keep])
            have += int(keep.sum())
            rounds += 1
            if rounds > _MAX_REJECTION_ROUNDS:
                raise ConfigurationError(f"class {label} of task {task.value} looks infeasible at n={n}")
        return np.concatenate(got1)[:half], np.concatenate(got2)[:half]

    blocks = []
    for label in (1, 0):
        part = constructive(label) or rejection(label)
        blocks.append((part[0], part[1], np.full(half, label, np.uint8)))
    v1 = np.concatenate([b[0] for b in blocks])
    v2 = np.concatenate([b[1] for b in blocks])
    labels = np.concatenate([b[2] for b in blocks])
    perm = rng.permutation(size)
    return Dataset(v1[perm], v2[perm], labels[perm], n, task, seed, "full")


def write_dataset_csv(data: Dataset, path) -> None:
    """CSV with columns v1 (bitstring), v2 (bitstring), label."""
    lines = ["v1,v2,label"]
    for i in range(len(data)):
        b1 = "".join(str(int(b)) for b in data.v1[i])
        b2 = "".join(str(int(b)) for b in data.v2[i])
        lines.append(f"{b1},{b2},{int(data.labels[i])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_dataset_csv(path) -> Dataset:
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not text or text[0] != "v1,v2,label":
        raise ConfigurationError(f"{path} is not a dataset CSV (expected header v1,v2,label)")
    v1, v2, labels = [], [], []
    for line in text[1:]:
        b1, b2, lab = line.split(",")
        v1.append([int(c) for c in b1])
        v2.append([int(c) for c in b2])
        labels.append(int(lab))
    arr1 = np.array(v1, dtype=np.uint8)
    return Dataset(arr1, np.array(v2, np.uint8), np.array(labels, np.uint8),
                   arr1.shape[1], None, None, "loaded")
