from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from ..disorder import ConfigurationError, DisorderSpec, sum_law
from ..rng import RngStream
from .field import DisorderField

DEFAULT_ENUM_LIMIT = 10**6


class EnumerationRefused(ValueError):
    """Raised when a configuration space is larger than the enumeration limit."""


class Landscape:
    """A random field indexed by a finite configuration space.

    Configurations are numpy arrays; batches stack them along axis 0.
    Subclasses set ``kind``, ``n`` and ``n_terms`` (number of weights in one
    energy) and implement the hooks below.
    """

    kind = "abstract"
    gaussian_only = False

    def __init__(self, n: int):
        self.n = int(n)

    # -- sizes and constants -------------------------------------------------
    def base_size(self) -> int:
        raise NotImplementedError

    def scaling_cn(self) -> float:
        raise NotImplementedError

    def s_n_squared(self):
        raise ConfigurationError(f"s_n^2 has no closed form for {self.kind}")

    @property
    def n_terms(self) -> int:
        raise NotImplementedError

    # -- configurations ------------------------------------------------------
    def _all_configs(self) -> np.ndarray:
        raise NotImplementedError

    def all_configs(self, limit: int = DEFAULT_ENUM_LIMIT) -> np.ndarray:
        size = self.base_size()
        if size > limit:
            raise EnumerationRefused(f"{self.describe()} has {size} configurations, over the limit {limit}")
        return self._all_configs()

    def enumerate_configs(self, limit: int = DEFAULT_ENUM_LIMIT) -> Iterator[np.ndarray]:
        yield from self.all_configs(limit)

    def sample_configs(self, stream: RngStream, count: int) -> np.ndarray:
        raise NotImplementedError

    def sample_config(self, stream: RngStream) -> np.ndarray:
        return self.sample_configs(stream, 1)[0]

    def validate(self, config) -> bool:
        raise NotImplementedError

    # -- disorder and energies -----------------------------------------------
    def new_field(self, spec: DisorderSpec, stream: RngStream, constant=None) -> DisorderField:
        if self.gaussian_only and not spec.is_gaussian and constant is None:
            raise ConfigurationError(f"{self.kind} requires standard Gaussian weights")
        return DisorderField(spec, stream, constant)

    def energies(self, configs: np.ndarray, field: DisorderField) -> np.ndarray:
        raise NotImplementedError

    def energy(self, config, field: DisorderField) -> float:
        return float(self.energies(np.asarray(config)[None], field)[0])

    def overlap(self, c1, c2):
        raise NotImplementedError

    def self_overlap(self):
        return self.n_terms

    def centering_law(self, spec: DisorderSpec):
        return sum_law(spec, self.n_terms)

    def replicate_energies(self, spec: DisorderSpec, stream: RngStream, samples: int,
                           constant=None, enum_limit: int = DEFAULT_ENUM_LIMIT) -> np.ndarray:
        """Energies for one disorder replicate: all configurations (samples=0) or a uniform sample."""
        field = self.new_field(spec, stream.child("disorder"), constant)
        if samples == 0:
            return self.energies(self.all_configs(enum_limit), field)
        out = np.empty(samples)
        chunk = self._sample_chunk()
        cstream = stream.child("configs")
        for i, lo in enumerate(range(0, samples, chunk)):
            hi = min(samples, lo + chunk)
            out[lo:hi] = self.energies(self.sample_configs(cstream.child(i), hi - lo), field)
        return out

    def _sample_chunk(self) -> int:
        return max(1, 2**21 // max(1, self.n_terms))

    # -- text format ---------------------------------------------------------
    def describe(self) -> str:
        return f"{self.kind}(n={self.n})"

    def format_config(self, config) -> str:
        flat = " ".join(str(int(v)) for v in np.asarray(config).ravel())
        return f"{self.kind} {self.n} {flat}"

    def parse_config(self, line: str) -> np.ndarray:
        parts = line.split()
        if len(parts) < 2 or parts[0] != self.kind or int(parts[1]) != self.n:
            raise ValueError(f"line does not describe a {self.describe()} configuration: {line!r}")
        arr = np.array([int(v) for v in parts[2:]], dtype=np.int64)
        return arr.reshape(self._config_shape())

    def _config_shape(self):
        return (-1,)


class OverlapSumModel(Landscape):
    """Energy ``sum_{e in config} xi_e / sqrt(n_terms)`` over a set of element keys."""

    def element_keys(self, configs: np.ndarray) -> np.ndarray:
        """Integer keys of the weights used by each configuration, shape (count, n_terms)."""
        raise NotImplementedError

    def energies(self, configs, field):
        configs = np.asarray(configs)
        keys = self.element_keys(configs)
        return field.values(keys).sum(axis=1) / math.sqrt(self.n_terms)

    def overlap(self, c1, c2) -> int:
        k1 = self.element_keys(np.asarray(c1)[None])[0]
        k2 = self.element_keys(np.asarray(c2)[None])[0]
        return len(np.intersect1d(k1, k2))

    def overlap_matrix(self, configs: np.ndarray) -> np.ndarray:
        """Overlaps of all ordered pairs, via the configuration-element incidence matrix."""
        keys = self.element_keys(configs)
        uniq, inv = np.unique(keys, return_inverse=True)
        inc = np.zeros((len(configs), len(uniq)), dtype=np.int64)
        rows = np.repeat(np.arange(len(configs)), keys.shape[1])
        np.add.at(inc, (rows, inv.ravel()), 1)
        return inc @ inc.T
