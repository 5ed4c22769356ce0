"""Branching random walk on a Galton-Watson tree."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..disorder import ConfigurationError, DisorderSpec, UnsupportedOperation
from ..rng import RngStream
from .base import Landscape
from .field import DisorderField

# per generation; the whole tree holds about m/(m-1) times as many particles
POPULATION_CAP = 10**6
_GEN_SHIFT = 1 << 40


class PopulationCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class OffspringLaw:
    values: tuple
    probs: tuple

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise ConfigurationError("offspring law needs matching values and probabilities")
        if any(int(v) != v or v < 1 for v in self.values):
            raise ConfigurationError("offspring counts must be integers >= 1 (no extinction)")
        if any(p < 0 for p in self.probs) or not math.isclose(sum(self.probs), 1.0, abs_tol=1e-12):
            raise ConfigurationError("offspring probabilities must be non-negative and sum to 1")
        if self.mean <= 1:
            raise ConfigurationError(f"offspring mean must exceed 1, got {self.mean}")

    @property
    def mean(self) -> float:
        return float(sum(v * p for v, p in zip(self.values, self.probs)))

    @property
    def gamma2(self) -> float:
        """``E[Z(Z-1)]``."""
        return float(sum(v * (v - 1) * p for v, p in zip(self.values, self.probs)))

    @classmethod
    def parse(cls, text: str) -> "OffspringLaw":
        """Parse ``"1:0.5,2:0.5"``."""
        values, probs = [], []
        for item in text.split(","):
            v, p = item.split(":")
            values.append(int(v))
            probs.append(float(p))
        return cls(tuple(values), tuple(probs))

    @classmethod
    def constant(cls, k: int) -> "OffspringLaw":
        return cls((k,), (1.0,))

    def __str__(self):
        return ",".join(f"{v}:{p:g}" for v, p in zip(self.values, self.probs))

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        if len(self.values) == 1:
            return np.full(size, self.values[0], dtype=np.int64)
        return gen.choice(np.array(self.values, dtype=np.int64), size=size, p=np.array(self.probs))


@dataclass(eq=False)
class BrwTree:
    """Generations ``T_0..T_n`` as parent-index arrays, with particle positions.

    ``parents[g][i]`` is the index in generation ``g-1`` of particle ``i`` of
    generation ``g`` (``parents[0]`` is empty).  ``positions[g]`` holds the
    unnormalized sums of displacements along each ancestral line.
    """

    offspring: OffspringLaw
    parents: list
    positions: list

    @property
    def depth(self) -> int:
        return len(self.parents) - 1

    def size(self, g: int) -> int:
        return len(self.positions[g])

    def energies(self, g: int | None = None) -> np.ndarray:
        g = self.depth if g is None else g
        return self.positions[g] / math.sqrt(g)

    def ancestors(self, g: int, i: int) -> list:
        """Indices of the ancestral line ``(gen 1 index, ..., gen g index)``."""
        line = [int(i)]
        for h in range(g, 1, -1):
            line.append(int(self.parents[h][line[-1]]))
        return line[::-1]

    def overlap(self, g: int, i: int, j: int) -> int:
        """Number of common ancestors, excluding the root, of particles ``i`` and ``j``."""
        a, b = self.ancestors(g, i), self.ancestors(g, j)
        r = 0
        while r < g and a[r] == b[r]:
            r += 1
        return r

    def descendant_counts(self, n: int) -> list:
        """``D[j][u]`` = number of generation-``n`` descendants of particle ``u`` in generation ``j``."""
        counts = [None] * (n + 1)
        counts[n] = np.ones(self.size(n))
        for j in range(n - 1, -1, -1):
            counts[j] = np.bincount(self.parents[j + 1], weights=counts[j + 1], minlength=self.size(j))
        return counts

    def limit_w(self, n: int | None = None) -> float:
        """``-sqrt(n) |T_n|^-1 sum_t X_n(t)``."""
        n = self.depth if n is None else n
        return -float(np.mean(self.positions[n]))


def brw_generate(offspring: OffspringLaw, n: int, spec: DisorderSpec, stream: RngStream,
                 cap: int = POPULATION_CAP, constant=None) -> BrwTree:
    gen = stream.child("tree").generator()
    field = DisorderField(spec, stream.child("displacements"), constant)
    parents = [np.zeros(0, dtype=np.int64)]
    positions = [np.zeros(1)]
    for g in range(1, n + 1):
        counts = offspring.sample(gen, len(positions[-1]))
        size = int(counts.sum())
        if size > cap:
            raise PopulationCapExceeded(f"generation {g} has {size} particles, over the cap {cap}")
        par = np.repeat(np.arange(len(counts)), counts)
        keys = np.uint64(g) * np.uint64(_GEN_SHIFT) + np.arange(size, dtype=np.uint64)
        parents.append(par)
        positions.append(positions[-1][par] + field.values(keys))
    return BrwTree(offspring, parents, positions)


def brw_vnk(tree: BrwTree, n: int, k: int) -> float:
    """``m^-2n`` times the sum of ``r^k`` over ordered distinct pairs in generation ``n``."""
    if tree.depth < n:
        raise ValueError(f"tree depth {tree.depth} < {n}")
    counts = tree.descendant_counts(n)
    # pairs_at_least[j]: ordered distinct pairs sharing the generation-j ancestor
    pairs_at_least = np.array([float(np.sum(c * (c - 1))) for c in counts] + [0.0])
    total = 0.0
    for j in range(1, n):
        total += j ** k * (pairs_at_least[j] - pairs_at_least[j + 1])
    return total / tree.offspring.mean ** (2 * n)


class BranchingWalk(Landscape):
    """Normalized positions ``X_n(t)`` of the ``n``-th generation particles."""

    kind = "brw"

    def __init__(self, n: int, offspring: OffspringLaw, cap: int = POPULATION_CAP):
        if n < 1:
            raise ConfigurationError("brw needs n >= 1")
        super().__init__(n)
        self.offspring = offspring
        self.cap = cap

    def describe(self):
        return f"brw(n={self.n}, Z={self.offspring})"

    @property
    def n_terms(self):
        return self.n

    def base_size(self):
        raise UnsupportedOperation("|T_n| is random; use BrwTree.size(n)")

    def expected_size(self) -> float:
        return self.offspring.mean ** self.n

    def scaling_cn(self):
        return math.sqrt(self.n)

    def generate(self, spec, stream, constant=None) -> BrwTree:
        return brw_generate(self.offspring, self.n, spec, stream, self.cap, constant)

    def sample_configs(self, stream, count, tree: BrwTree | None = None):
        if tree is None:
            raise UnsupportedOperation("brw configurations are particles of a given tree")
        return stream.generator().integers(0, tree.size(self.n), size=count)

    def overlap(self, c1, c2, tree: BrwTree | None = None):
        if tree is None:
            raise UnsupportedOperation("brw overlap needs the tree")
        return tree.overlap(self.n, int(c1), int(c2))

    def replicate_energies(self, spec, stream, samples, constant=None, enum_limit=None):
        tree = self.generate(spec, stream, constant)
        e = tree.energies(self.n)
        if samples == 0:
            return e
        return e[self.sample_configs(stream.child("configs"), samples, tree)]
