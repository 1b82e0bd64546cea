"""Perfect correlations as directed graphs.

A perfect correlation in a basis is a one-to-one map i → π(i) between outcomes on A
and B. Its directed graph is a union of loops and circles, summarised by the
cycle-type signature [n₁, …, n_w] (n_k = number of k-cycles).
"""

import functools
import itertools
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from errors import InvalidTolerance, NotBijection, OutOfRange
from services.qudit import JointDistribution

EXHAUSTIVE_MAX_DIM = 8
MAX_ENUMERATE_DIM = 12

PERFECT = "perfect"
IMPERFECT = "imperfect"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class OutcomePermutation:
    mapping: Tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise NotBijection(details={"mapping": list(self.mapping)})

    @classmethod
    def of(cls, mapping: Sequence[int]) -> "OutcomePermutation":
        return cls(tuple(int(j) for j in mapping))

    @classmethod
    def identity(cls, d: int) -> "OutcomePermutation":
        return cls(tuple(range(d)))

    @property
    def d(self) -> int:
        return len(self.mapping)

    def __getitem__(self, i: int) -> int:
        return self.mapping[i]

    def edges(self) -> List[Tuple[int, int]]:
        """Adjacency list of the directed graph, 1-based as in the CLI display."""
        return [(i + 1, j + 1) for i, j in enumerate(self.mapping)]

    def relabeled(self, order: Sequence[int]) -> "OutcomePermutation":
        """The same map after reordering the basis as ``new[k] = old[order[k]]``."""
        position = {old: new for new, old in enumerate(order)}
        return OutcomePermutation(tuple(position[self.mapping[old]] for old in order))


@dataclass(frozen=True)
class CycleTypeSignature:
    counts: Tuple[int, ...]

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "CycleTypeSignature":
        counts = list(counts)
        while counts and counts[-1] == 0:
            counts.pop()
        return cls(tuple(counts))

    @property
    def d(self) -> int:
        return sum((k + 1) * n for k, n in enumerate(self.counts))

    @property
    def all_loops(self) -> bool:
        return len(self.counts) == 1

    def __str__(self):
        return "[" + ",".join(str(n) for n in self.counts) + "]"


def cycle_type(perm: OutcomePermutation) -> CycleTypeSignature:
    counts = [0] * perm.d
    edges = dict(enumerate(perm.mapping))
    while edges:
        length = 1
        i, j = edges.popitem()
        while j != i:
            length += 1
            j = edges.pop(j)
        counts[length - 1] += 1
    return CycleTypeSignature.from_counts(counts)


@dataclass(frozen=True)
class PerfectCorrelationVerdict:
    status: str
    permutation: OutcomePermutation          # best one-to-one map, whatever the status
    leakage: float
    signature: Optional[CycleTypeSignature] = None

    @property
    def perfect(self) -> bool:
        return self.status == PERFECT


@functools.lru_cache(maxsize=None)
def _all_permutations(d: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(d))), dtype=int)


def best_assignment(probs: np.ndarray) -> Tuple[Tuple[int, ...], float]:
    """Maximum-weight one-to-one map and its weight. Ties go to the lexicographically first."""
    d = probs.shape[0]
    if d <= EXHAUSTIVE_MAX_DIM:
        perms = _all_permutations(d)
        weights = probs[np.arange(d), perms].sum(axis=1)
        k = int(np.argmax(weights))
        return tuple(int(j) for j in perms[k]), float(weights[k])
    rows, cols = linear_sum_assignment(probs, maximize=True)
    mapping = tuple(int(c) for _, c in sorted(zip(rows, cols)))
    return mapping, float(probs[rows, cols].sum())


def classify(dist: JointDistribution, tol: float = 1e-9) -> PerfectCorrelationVerdict:
    d = dist.local_dim
    if not 0 < tol < 1 / d:
        raise InvalidTolerance(details={"tol": tol, "upper_bound": 1 / d})
    mapping, weight = best_assignment(dist.probs)
    perm = OutcomePermutation(mapping)
    leakage = max(0.0, 1.0 - weight)
    if leakage > tol:
        return PerfectCorrelationVerdict(IMPERFECT, perm, leakage)
    if np.any(dist.marginal_a() < tol) or np.any(dist.marginal_b() < tol):
        return PerfectCorrelationVerdict(DEGENERATE, perm, leakage)
    return PerfectCorrelationVerdict(PERFECT, perm, leakage, cycle_type(perm))


def _partitions(n: int, largest: int):
    if n == 0:
        yield []
        return
    for part in range(min(n, largest), 0, -1):
        for rest in _partitions(n - part, part):
            yield [part] + rest


def enumerate_signatures(d: int) -> List[CycleTypeSignature]:
    if not 1 <= d <= MAX_ENUMERATE_DIM:
        raise OutOfRange(f"enumerate_signatures supports 1 <= d <= {MAX_ENUMERATE_DIM}", {"d": d})
    sigs = []
    for parts in _partitions(d, d):
        counts = [0] * d
        for p in parts:
            counts[p - 1] += 1
        sigs.append(CycleTypeSignature.from_counts(counts))
    return sorted(sigs, key=lambda s: s.counts)


def synthesize_distribution(perm: OutcomePermutation) -> JointDistribution:
    """Uniform perfect distribution P(i, π(i)) = 1/d."""
    d = perm.d
    probs = np.zeros((d, d))
    probs[np.arange(d), list(perm.mapping)] = 1 / d
    return JointDistribution(d, probs)
