"""Sherrington-Kirkpatrick and Edwards-Anderson spin glasses."""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..disorder import ConfigurationError
from .base import Landscape


def box_edges(shape) -> np.ndarray:
    """Nearest-neighbour edges of a rectangular box with free boundaries."""
    shape = tuple(int(s) for s in shape)
    index = np.arange(math.prod(shape)).reshape(shape)
    edges = []
    for axis in range(len(shape)):
        lo = np.take(index, range(shape[axis] - 1), axis=axis).ravel()
        hi = np.take(index, range(1, shape[axis]), axis=axis).ravel()
        edges.append(np.stack([lo, hi], axis=1))
    return np.concatenate(edges).astype(np.int64) if edges else np.zeros((0, 2), dtype=np.int64)


def complete_edges(n: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), 2)), dtype=np.int64).reshape(-1, 2)


class SpinGlass(Landscape):
    """Energy ``|E|^-1/2 sum_{e={u,v}} w(u) w(v) J(e)`` over ``w in {-1,1}^V``.

    Couplings are keyed by edge index.  For symmetric couplings every energy
    has the law of a normalized sum of ``|E|`` weights, which drives the
    exact centering.
    """

    kind = "spin_glass"

    def __init__(self, edges, vertices: int, graph: str, shape=None):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(edges) == 0:
            raise ConfigurationError("spin glass needs at least one edge")
        super().__init__(vertices)
        self.edges = edges
        self.graph = graph
        self.shape = shape

    @classmethod
    def sk(cls, n: int) -> "SpinGlass":
        if n < 2:
            raise ConfigurationError("SK model needs n >= 2")
        return cls(complete_edges(n), n, "sk")

    @classmethod
    def ea(cls, shape) -> "SpinGlass":
        shape = tuple(int(s) for s in shape)
        if not shape or min(shape) < 1:
            raise ConfigurationError(f"invalid box shape {shape}")
        return cls(box_edges(shape), math.prod(shape), "ea", shape)

    def describe(self):
        if self.graph == "ea":
            return f"spin_glass(ea, box={'x'.join(map(str, self.shape))})"
        return f"spin_glass(sk, n={self.n})"

    @property
    def vertices(self) -> int:
        return self.n

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_terms(self):
        return self.n_edges

    def base_size(self):
        return 2 ** self.n

    def scaling_cn(self):
        return math.sqrt(self.n_edges)

    def new_field(self, spec, stream, constant=None):
        if not spec.symmetric and constant is None:
            raise ConfigurationError("spin glass couplings must be symmetric")
        return super().new_field(spec, stream, constant)

    def couplings(self, field) -> np.ndarray:
        return field.dense(self.n_edges)

    def _all_configs(self):
        bits = (np.arange(2 ** self.n)[:, None] >> np.arange(self.n)[None, :]) & 1
        return (1 - 2 * bits).astype(np.int8)

    def sample_configs(self, stream, count):
        bits = stream.generator().integers(0, 2, size=(count, self.n))
        return (1 - 2 * bits).astype(np.int8)

    def validate(self, config):
        c = np.asarray(config)
        return c.shape == (self.n,) and bool(np.all(np.abs(c) == 1))

    def edge_products(self, configs) -> np.ndarray:
        """``w(u) w(v)`` per edge, shape (count, |E|)."""
        configs = np.asarray(configs, dtype=np.int8)
        return configs[:, self.edges[:, 0]] * configs[:, self.edges[:, 1]]

    def energies_from_couplings(self, configs, couplings) -> np.ndarray:
        out = np.empty(len(configs))
        chunk = max(1, 2**22 // self.n_edges)
        for lo in range(0, len(configs), chunk):
            prod = self.edge_products(configs[lo:lo + chunk]).astype(np.float64)
            out[lo:lo + chunk] = prod @ couplings
        return out / math.sqrt(self.n_edges)

    def energies(self, configs, field):
        return self.energies_from_couplings(np.asarray(configs), self.couplings(field))

    def overlap(self, c1, c2) -> float:
        """Edge overlap ``|E|^-1 sum_e (w1 . e)(w2 . e)`` (real valued)."""
        p1 = self.edge_products(np.asarray(c1)[None])[0].astype(np.int64)
        p2 = self.edge_products(np.asarray(c2)[None])[0].astype(np.int64)
        return float(np.dot(p1, p2)) / self.n_edges

    def self_overlap(self):
        return 1.0

    def replicate_energies(self, spec, stream, samples, constant=None, enum_limit=10**6):
        field = self.new_field(spec, stream.child("disorder"), constant)
        couplings = self.couplings(field)
        if samples == 0:
            return self.energies_from_couplings(self.all_configs(enum_limit), couplings)
        return self.energies_from_couplings(self.sample_configs(stream.child("configs"), samples), couplings)

    def format_config(self, config):
        return f"spin_glass {self.n} " + " ".join(str(int(v)) for v in np.asarray(config))
