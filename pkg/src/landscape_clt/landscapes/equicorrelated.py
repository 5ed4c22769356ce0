"""Gaussian landscape with one common factor: a closed-form self-test."""

from __future__ import annotations

import math

import numpy as np

from ..disorder import ConfigurationError, std_normal
from ..rng import RngStream
from .base import Landscape
from .field import DisorderField

DEFAULT_SIZE = 10**5


def equicorrelated_energies(count: int, eps: float, stream: RngStream) -> np.ndarray:
    """``sqrt(1-eps) X'(i) + sqrt(eps) N`` for ``i < count`` with one shared ``N``."""
    if not 0 < eps < 1:
        raise ConfigurationError(f"eps must lie in (0, 1), got {eps}")
    own = DisorderField(std_normal(), stream.child("own")).dense(count)
    common = DisorderField(std_normal(), stream.child("common")).value(0)
    return math.sqrt(1 - eps) * own + math.sqrt(eps) * common


def parse_eps_rule(rule) -> str:
    rule = str(rule).strip().replace(" ", "")
    if rule in ("1/n", "1/sqrt(n)"):
        return rule
    try:
        value = float(rule)
    except ValueError:
        raise ConfigurationError(f"unknown eps rule {rule!r}; use 1/n, 1/sqrt(n) or a number") from None
    if not 0 < value < 1:
        raise ConfigurationError(f"eps must lie in (0, 1), got {value}")
    return rule


class Equicorrelated(Landscape):
    """``size`` configurations whose energies have pairwise correlation ``eps``.

    ``eps_rule`` is ``"1/n"``, ``"1/sqrt(n)"`` or a fixed number; ``c_n`` is
    ``eps^-1/2``, the scale of the common factor.
    """

    kind = "equicorrelated"

    def __init__(self, n: int, eps_rule="1/n", size: int = DEFAULT_SIZE):
        if n < 2:
            raise ConfigurationError("equicorrelated model needs n >= 2")
        super().__init__(n)
        self.eps_rule = parse_eps_rule(eps_rule)
        self.size = int(size)

    @property
    def eps(self) -> float:
        if self.eps_rule == "1/n":
            return 1 / self.n
        if self.eps_rule == "1/sqrt(n)":
            return 1 / math.sqrt(self.n)
        return float(self.eps_rule)

    def describe(self):
        return f"equicorrelated(n={self.n}, eps={self.eps_rule}, size={self.size})"

    @property
    def n_terms(self):
        return 1

    def base_size(self):
        return self.size

    def scaling_cn(self):
        return 1 / math.sqrt(self.eps)

    def centering_law(self, spec):
        return None

    def _all_configs(self):
        return np.arange(self.size, dtype=np.int64)

    def sample_configs(self, stream, count):
        return stream.generator().integers(0, self.size, size=count)

    def validate(self, config):
        return 0 <= int(config) < self.size

    def overlap(self, c1, c2):
        raise ConfigurationError("equicorrelated configurations have no overlap structure")

    def replicate_energies(self, spec, stream, samples, constant=None, enum_limit=None):
        if constant is not None:
            return np.full(samples or self.size, float(constant))
        energies = equicorrelated_energies(self.size, self.eps, stream)
        if samples == 0:
            return energies
        return energies[self.sample_configs(stream.child("configs"), samples)]
