"""Driving noise laws and the distribution of their normalized sums.

A :class:`DisorderSpec` is a centered, unit-variance law for the weights.
:func:`sum_law` gives the law of ``(xi_1 + ... + xi_n) / sqrt(n)``, exactly
on the lattice when the law is lattice, exactly Gaussian for the normal law
and by Monte Carlo otherwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .rng import RngStream, open_uniform

KINDS = ("rademacher", "uniform_sym", "std_normal", "centered_exponential", "two_point_skew")

ATOM_BUDGET = 10**6
MC_FALLBACK_SAMPLES = 10**6

SQRT3 = math.sqrt(3.0)


class ConfigurationError(ValueError):
    """Invalid model or disorder parameters."""


class UnsupportedOperation(ValueError):
    """Operation not defined for this law or model."""


class AtomBudgetWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Lattice:
    """Support ``b + h * offsets`` with maximal span ``h``."""

    b: float
    h: float
    offsets: tuple
    probs: tuple


@dataclass(frozen=True)
class DisorderSpec:
    kind: str
    a: float | None = None  # two_point_skew parameter
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown disorder kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "two_point_skew":
            if self.a is None or not (self.a > 0) or self.a == 1:
                raise ConfigurationError("two_point_skew needs a > 0 with a != 1")
        elif self.a is not None:
            raise ConfigurationError(f"parameter a is only valid for two_point_skew, not {self.kind}")
        if not self.name:
            label = self.kind if self.a is None else f"{self.kind}({self.a:g})"
            object.__setattr__(self, "name", label)

    mean = 0.0
    variance = 1.0

    @property
    def third_moment(self) -> float:
        if self.kind == "centered_exponential":
            return 2.0
        if self.kind == "two_point_skew":
            return self.a - 1.0 / self.a
        return 0.0

    @property
    def symmetric(self) -> bool:
        return self.kind in ("rademacher", "uniform_sym", "std_normal")

    @property
    def lattice(self) -> Lattice | None:
        if self.kind == "rademacher":
            return Lattice(b=-1.0, h=2.0, offsets=(0, 1), probs=(0.5, 0.5))
        if self.kind == "two_point_skew":
            a = self.a
            p_hi = 1.0 / (1.0 + a * a)
            return Lattice(b=-1.0 / a, h=a + 1.0 / a, offsets=(0, 1), probs=(1.0 - p_hi, p_hi))
        return None

    @property
    def is_gaussian(self) -> bool:
        return self.kind == "std_normal"

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        """Inverse-CDF transform of uniforms on (0, 1)."""
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "rademacher":
            return np.where(u < 0.5, -1.0, 1.0)
        if self.kind == "uniform_sym":
            return SQRT3 * (2.0 * u - 1.0)
        if self.kind == "std_normal":
            return special.ndtri(u)
        if self.kind == "centered_exponential":
            return -np.log1p(-u) - 1.0
        a = self.a
        return np.where(u < 1.0 / (1.0 + a * a), a, -1.0 / a)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.a is not None:
            d["a"] = self.a
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DisorderSpec":
        d = dict(d)
        kind = d.pop("kind", None)
        if kind is None:
            raise ConfigurationError("disorder section needs 'kind'")
        a = d.pop("a", None)
        if d:
            raise ConfigurationError(f"unknown disorder keys: {sorted(d)}")
        return cls(kind, None if a is None else float(a))


def rademacher() -> DisorderSpec:
    return DisorderSpec("rademacher")


def std_normal() -> DisorderSpec:
    return DisorderSpec("std_normal")


def sample_xi(spec: DisorderSpec, stream: RngStream, count: int) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be >= 1")
    if not isinstance(spec, DisorderSpec):
        raise ConfigurationError(f"not a disorder spec: {spec!r}")
    return spec.from_uniform(open_uniform(stream.generator(), count))


def sample_sums(spec: DisorderSpec, n: int, count: int, gen: np.random.Generator) -> np.ndarray:
    """Draws of the unnormalized sum ``xi_1 + ... + xi_n``, exact in law."""
    if spec.kind == "rademacher":
        return 2.0 * gen.binomial(n, 0.5, size=count) - n
    if spec.kind == "two_point_skew":
        a = spec.a
        k = gen.binomial(n, 1.0 / (1.0 + a * a), size=count)
        return k * a - (n - k) / a
    if spec.kind == "std_normal":
        return math.sqrt(n) * gen.standard_normal(count)
    if spec.kind == "centered_exponential":
        return gen.gamma(n, size=count) - n
    out = np.zeros(count)
    chunk = max(1, 2**22 // n)
    for lo in range(0, count, chunk):
        hi = min(count, lo + chunk)
        out[lo:hi] = spec.from_uniform(open_uniform(gen, (hi - lo, n))).sum(axis=1)
    return out


@dataclass
class SumLaw:
    """Law of the normalized sum of ``n`` weights.

    ``representation`` is ``"lattice"`` (integer offsets ``j`` with atoms at
    ``(n*b + h*j)/sqrt(n)``), ``"gaussian"`` or ``"mc"`` (sorted sample).
    """

    n: int
    spec: DisorderSpec
    representation: str
    offsets: np.ndarray | None = None
    probs: np.ndarray | None = None
    samples: np.ndarray | None = None
    fallback: bool = False
    _cum: np.ndarray | None = field(default=None, repr=False)

    @property
    def exact(self) -> bool:
        return self.representation != "mc"

    @property
    def atoms(self) -> np.ndarray:
        lat = self.spec.lattice
        return (self.n * lat.b + lat.h * self.offsets) / math.sqrt(self.n)

    def _offset_threshold(self, z):
        lat = self.spec.lattice
        t = (np.asarray(z, dtype=np.float64) * math.sqrt(self.n) - self.n * lat.b) / lat.h
        # treat float-rounded atoms as hits of the closed indicator
        return np.floor(t + 1e-9 * np.maximum(1.0, np.abs(t)))

    def cdf(self, z):
        z = np.asarray(z, dtype=np.float64)
        if self.representation == "gaussian":
            return special.ndtr(z)
        if self.representation == "lattice":
            if self._cum is None:
                self._cum = np.cumsum(self.probs)
            j = self._offset_threshold(z) - self.offsets[0]
            idx = np.clip(j, -1, len(self.probs) - 1).astype(np.int64)
            return np.where(idx < 0, 0.0, self._cum[np.maximum(idx, 0)])
        count = np.searchsorted(self.samples, z * math.sqrt(self.n), side="right")
        return count / len(self.samples)

    def stderr(self, z):
        z = np.asarray(z, dtype=np.float64)
        if self.exact:
            return np.zeros_like(z)
        f = self.cdf(z)
        return np.sqrt(f * (1.0 - f) / len(self.samples))

    def pmf_at(self, total) -> np.ndarray:
        """Probability that the unnormalized sum equals ``total`` (lattice only)."""
        lat = self.spec.lattice
        j = np.rint((np.asarray(total, dtype=np.float64) - self.n * lat.b) / lat.h).astype(np.int64)
        i = j - self.offsets[0]
        ok = (i >= 0) & (i < len(self.probs))
        return np.where(ok, self.probs[np.clip(i, 0, len(self.probs) - 1)], 0.0)


def lattice_table(lat: Lattice, n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-fold convolution of the offset pmf; returns (offsets, probs)."""
    lo, hi = min(lat.offsets), max(lat.offsets)
    kernel = np.zeros(hi - lo + 1)
    for j, p in zip(lat.offsets, lat.probs):
        kernel[j - lo] += p
    result = np.ones(1)
    power = kernel
    k = n
    while k:
        if k & 1:
            result = np.convolve(result, power)
        k >>= 1
        if k:
            power = np.convolve(power, power)
    offsets = np.arange(n * lo, n * lo + len(result))
    return offsets, result


_SUM_LAW_CACHE: dict = {}


def sum_law(spec: DisorderSpec, n: int, stream: RngStream | None = None,
            mc_samples: int = MC_FALLBACK_SAMPLES, atom_budget: int = ATOM_BUDGET) -> SumLaw:
    if n < 1:
        raise ValueError("n must be >= 1")
    lat = spec.lattice
    if spec.is_gaussian:
        return SumLaw(n, spec, "gaussian")
    if lat is not None:
        size = n * (max(lat.offsets) - min(lat.offsets)) + 1
        if size <= atom_budget:
            key = (spec, n)
            if key not in _SUM_LAW_CACHE:
                offsets, probs = lattice_table(lat, n)
                _SUM_LAW_CACHE[key] = (offsets, probs)
            offsets, probs = _SUM_LAW_CACHE[key]
            return SumLaw(n, spec, "lattice", offsets=offsets, probs=probs)
        warnings.warn(f"lattice table of {size} atoms exceeds budget {atom_budget}; "
                      f"using {mc_samples} Monte Carlo samples", AtomBudgetWarning, stacklevel=2)
        fallback = True
    else:
        fallback = False
    stream = stream if stream is not None else RngStream(0x5EED, n).child(("phi_n", spec.name))
    s = np.sort(sample_sums(spec, n, mc_samples, stream.generator()))
    return SumLaw(n, spec, "mc", samples=s, fallback=fallback)


def phi_n(spec: DisorderSpec, n: int, z, stream: RngStream | None = None, **kw):
    """Distribution function of the normalized sum of ``n`` weights at ``z``."""
    return sum_law(spec, n, stream, **kw).cdf(z)


def gaussian_density(z):
    return np.exp(-0.5 * np.square(z)) / math.sqrt(2.0 * math.pi)


def local_limit_check(spec: DisorderSpec, n: int) -> float:
    """Max over atoms of ``|P[S_n = s] - (h/sqrt n) p(s/sqrt n)|``."""
    lat = spec.lattice
    if lat is None:
        raise UnsupportedOperation(f"{spec.name} is not a lattice law")
    law = sum_law(spec, n)
    if law.representation != "lattice":
        raise UnsupportedOperation("lattice table exceeds the atom budget")
    totals = n * lat.b + lat.h * law.offsets
    dens = lat.h / math.sqrt(n) * gaussian_density(totals / math.sqrt(n))
    return float(np.max(np.abs(law.probs - dens)))


def lipschitz_constant(spec: DisorderSpec, n_values, grid) -> float:
    """Smallest C with ``Phi_n(z2) - Phi_n(z1) <= C (z2 - z1) + C n^-1/2`` on the grid."""
    grid = np.sort(np.asarray(grid, dtype=np.float64))
    i, j = np.triu_indices(len(grid), k=1)
    best = 0.0
    for n in n_values:
        f = sum_law(spec, n).cdf(grid)
        ratio = (f[j] - f[i]) / (grid[j] - grid[i] + n ** -0.5)
        best = max(best, float(ratio.max()))
    return best


def edgeworth_q(spec: DisorderSpec, z):
    return spec.third_moment / 6.0 * (1.0 - np.square(z))


def normal_cdf(z):
    return special.ndtr(z)


__all__ = [
    "DisorderSpec", "Lattice", "SumLaw", "ConfigurationError", "UnsupportedOperation",
    "sample_xi", "sample_sums", "sum_law", "phi_n", "local_limit_check", "lipschitz_constant",
    "edgeworth_q", "gaussian_density", "normal_cdf", "rademacher", "std_normal",
]
