"""Assignments, Hamiltonian cycles and spanning trees of the complete graph."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .. import _kernels
from ..disorder import ConfigurationError
from ..rng import RngStream
from .base import OverlapSumModel


def edge_key(u, v, n):
    """Key of the unordered edge {u, v} of K_n."""
    u = np.asarray(u)
    v = np.asarray(v)
    return np.minimum(u, v) * n + np.maximum(u, v)


def edge_count(n: int) -> int:
    return n * (n - 1) // 2


class Assignment(OverlapSumModel):
    kind = "assignment"

    def __init__(self, n: int):
        if n < 1:
            raise ConfigurationError("assignment needs n >= 1")
        super().__init__(n)

    @property
    def n_terms(self):
        return self.n

    def base_size(self):
        return math.factorial(self.n)

    def scaling_cn(self):
        return math.sqrt(self.n)

    def s_n_squared(self):
        return math.factorial(self.n) * math.factorial(self.n - 1)

    def _all_configs(self):
        return np.array(list(itertools.permutations(range(self.n))), dtype=np.int64).reshape(-1, self.n)

    def sample_configs(self, stream: RngStream, count):
        return _kernels.random_permutations(self.n, count, np.uint64(stream.key_material))

    def validate(self, config):
        c = np.asarray(config)
        return c.shape == (self.n,) and np.array_equal(np.sort(c), np.arange(self.n))

    def element_keys(self, configs):
        configs = np.asarray(configs)
        return np.arange(self.n) * self.n + configs

    def replicate_energies(self, spec, stream, samples, constant=None, enum_limit=10**6):
        if samples == 0:
            return super().replicate_energies(spec, stream, samples, constant, enum_limit)
        field = self.new_field(spec, stream.child("disorder"), constant)
        xi = field.dense(self.n * self.n).reshape(self.n, self.n)
        return _kernels.assignment_energies(xi, samples, np.uint64(stream.child("configs").key_material))


def canonical_cycle(seq) -> np.ndarray:
    """Lexicographically minimal representative of a cycle under rotation and reflection."""
    seq = np.asarray(seq)
    if seq.ndim == 2:
        return _canonical_batch(seq)
    return _canonical_batch(seq[None])[0]


def _canonical_batch(seqs):
    seqs = np.asarray(seqs, dtype=np.int64)
    count, n = seqs.shape
    start = np.argmin(seqs, axis=1)
    idx = (start[:, None] + np.arange(n)[None, :]) % n
    rot = np.take_along_axis(seqs, idx, axis=1)
    flip = rot[:, 1] > rot[:, -1]
    rot[flip, 1:] = rot[flip, 1:][:, ::-1]
    return rot


class HamiltonianCycles(OverlapSumModel):
    """Undirected Hamiltonian cycles of K_n, stored as canonical vertex sequences."""

    kind = "hamiltonian"

    def __init__(self, n: int):
        if n < 3:
            raise ConfigurationError("Hamiltonian cycles need n >= 3")
        super().__init__(n)

    @property
    def n_terms(self):
        return self.n

    def base_size(self):
        return math.factorial(self.n - 1) // 2

    def scaling_cn(self):
        return math.sqrt(self.n / 2)

    def s_n_squared(self):
        return math.factorial(self.n - 1) * math.factorial(self.n - 2) // 2

    def _all_configs(self):
        rows = [(0,) + p for p in itertools.permutations(range(1, self.n)) if p[0] < p[-1]]
        return np.array(rows, dtype=np.int64).reshape(-1, self.n)

    def sample_configs(self, stream, count):
        perms = _kernels.random_permutations(self.n, count, np.uint64(stream.key_material))
        return _canonical_batch(perms)

    def validate(self, config):
        c = np.asarray(config)
        return (c.shape == (self.n,) and np.array_equal(np.sort(c), np.arange(self.n))
                and np.array_equal(canonical_cycle(c), c))

    def edges(self, configs):
        """Edge endpoints, shape (count, n, 2)."""
        configs = np.asarray(configs)
        nxt = np.roll(configs, -1, axis=1)
        return np.stack([configs, nxt], axis=-1)

    def element_keys(self, configs):
        configs = np.asarray(configs)
        return edge_key(configs, np.roll(configs, -1, axis=1), self.n)


class SpanningTrees(OverlapSumModel):
    """Labeled spanning trees of K_n, stored as sorted edge arrays of shape (n-1, 2)."""

    kind = "spanning_tree"

    def __init__(self, n: int):
        if n < 2:
            raise ConfigurationError("spanning trees need n >= 2")
        super().__init__(n)

    @property
    def n_terms(self):
        return self.n - 1

    def base_size(self):
        return self.n ** (self.n - 2)

    def scaling_cn(self):
        return math.sqrt(self.n / 2)

    def s_n_squared(self):
        n = self.n
        if n < 3:
            # one tree with a single edge; 2 n^(2n-5) is not an integer here
            return 1
        return 2 * n ** (2 * n - 5)

    def decode(self, seqs) -> np.ndarray:
        seqs = np.asarray(seqs, dtype=np.int64).reshape(-1, max(self.n - 2, 0))
        edges = _kernels.prufer_decode_batch(seqs, self.n)
        return _sort_edges(edges)

    def _all_configs(self):
        seqs = np.array(list(itertools.product(range(self.n), repeat=self.n - 2)), dtype=np.int64)
        return self.decode(seqs.reshape(-1, self.n - 2))

    def sample_configs(self, stream, count):
        seqs = stream.generator().integers(0, self.n, size=(count, self.n - 2))
        return self.decode(seqs)

    def validate(self, config):
        e = np.asarray(config)
        if e.shape != (self.n - 1, 2) or np.any(e[:, 0] >= e[:, 1]):
            return False
        parent = list(range(self.n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for u, v in e:
            ru, rv = find(int(u)), find(int(v))
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def element_keys(self, configs):
        configs = np.asarray(configs)
        return edge_key(configs[..., 0], configs[..., 1], self.n)

    def _config_shape(self):
        return (self.n - 1, 2)


def _sort_edges(edges):
    keys = edges[..., 0] * 10**9 + edges[..., 1]
    order = np.argsort(keys, axis=1)
    return np.take_along_axis(edges, order[..., None], axis=1)
