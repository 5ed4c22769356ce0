"""Empirical distribution functions of landscapes, scaled processes across disorder
replicates, and the reduction-residual diagnostics behind them."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import combinatorics
from .disorder import (ConfigurationError, DisorderSpec, UnsupportedOperation, edgeworth_q,
                       gaussian_density, normal_cdf, sample_sums, sum_law)
from .landscapes import (Assignment, DirectedPolymer, Equicorrelated, HamiltonianCycles, Landscape,
                         SpanningTrees, SpinGlass)
from .landscapes.base import DEFAULT_ENUM_LIMIT
from .rng import RngStream

DEFAULT_GRID = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
ATOM_NUDGE = 1e-9
MC_CENTERING_SAMPLES = 10**7
SCHEMA_VERSION = 1


class SampleSizeError(ValueError):
    pass


# -- grid and centering --------------------------------------------------------

@dataclass(frozen=True)
class ZGrid:
    points: tuple = DEFAULT_GRID

    def __post_init__(self):
        pts = tuple(float(z) for z in self.points)
        if not pts:
            raise ConfigurationError("grid needs at least one point")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ConfigurationError(f"grid must be strictly increasing: {pts}")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.points)

    def index(self, z: float) -> int:
        for i, p in enumerate(self.points):
            if math.isclose(p, z, abs_tol=1e-6):
                return i
        raise KeyError(f"z={z} not in grid {self.points}")

    def nudged(self, spec: DisorderSpec, n_terms: int) -> np.ndarray:
        """Evaluation points moved ``ATOM_NUDGE`` above any atom of the lattice sum law they hit."""
        z = self.array
        lat = spec.lattice
        if lat is None:
            return z
        root = math.sqrt(n_terms)
        j = np.rint((z * root - n_terms * lat.b) / lat.h)
        atom = (n_terms * lat.b + lat.h * j) / root
        hit = np.abs(z - atom) < ATOM_NUDGE
        return np.where(hit, atom + ATOM_NUDGE, z)


@dataclass(frozen=True)
class CenteringMode:
    kind: str = "phi_n_exact"
    samples: int = MC_CENTERING_SAMPLES

    KINDS = ("phi_n_exact", "phi_n_mc", "gauss_phi", "gauss_phi_edgeworth")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigurationError(f"unknown centering {self.kind!r}; choose from {', '.join(self.KINDS)}")

    @classmethod
    def default_for(cls, spec: DisorderSpec) -> "CenteringMode":
        if spec.lattice is not None or spec.is_gaussian:
            return cls("phi_n_exact")
        return cls("phi_n_mc", MC_CENTERING_SAMPLES)

    def __str__(self):
        return f"phi_n_mc({self.samples})" if self.kind == "phi_n_mc" else self.kind

    @classmethod
    def parse(cls, text: str) -> "CenteringMode":
        text = text.strip()
        if text.startswith("phi_n_mc"):
            inner = text[len("phi_n_mc"):].strip("() ")
            return cls("phi_n_mc", int(float(inner)) if inner else MC_CENTERING_SAMPLES)
        return cls(text)


def centering_values(model: Landscape, spec: DisorderSpec, grid: np.ndarray,
                     mode: CenteringMode, stream: RngStream | None = None) -> np.ndarray:
    """``E F_n(z)`` (or its Gaussian surrogate) on the evaluation points."""
    grid = np.asarray(grid, dtype=float)
    if mode.kind == "gauss_phi":
        return normal_cdf(grid)
    if mode.kind == "gauss_phi_edgeworth":
        return normal_cdf(grid) + edgeworth_q(spec, grid) * gaussian_density(grid) / math.sqrt(model.n_terms)
    if isinstance(model, Equicorrelated):
        return normal_cdf(grid)
    if mode.kind == "phi_n_exact":
        law = model.centering_law(spec)
        if not law.exact:
            raise ConfigurationError(f"{spec.name} has no exact sum law at n={model.n_terms}; use phi_n_mc")
        return law.cdf(grid)
    stream = stream if stream is not None else RngStream(0x5EED, model.n_terms).child(("center", spec.name))
    law = sum_law(spec, model.n_terms, stream=stream, mc_samples=mode.samples)
    return law.cdf(grid)


# -- empirical distribution ------------------------------------------------------

def empirical_cdf(energies, grid) -> np.ndarray:
    """Fraction of energies ``<= z`` for each ``z``."""
    e = np.sort(np.asarray(energies, dtype=float).ravel())
    if e.size == 0:
        raise ValueError("empirical_cdf needs at least one energy")
    return np.searchsorted(e, np.asarray(grid, dtype=float), side="right") / e.size


def minimum_samples(model: Landscape) -> int:
    return math.ceil(100 * model.scaling_cn() ** 2)


def check_sample_count(model: Landscape, samples: int, enum_limit: int = DEFAULT_ENUM_LIMIT):
    if samples < 0:
        raise SampleSizeError("sample count must be >= 0")
    if samples == 0:
        if model.kind == "brw":
            return
        size = model.base_size()
        if size > enum_limit:
            raise SampleSizeError(f"full enumeration of {size} configurations exceeds {enum_limit}; set M > 0")
        return
    need = minimum_samples(model)
    if samples < need:
        raise SampleSizeError(f"M={samples} is below the required minimum {need} = ceil(100 c_n^2)")


def scaled_process(model: Landscape, spec: DisorderSpec, stream: RngStream, grid, center,
                   samples: int = 0, constant=None, enum_limit: int = DEFAULT_ENUM_LIMIT) -> np.ndarray:
    """``c_n (F_n(z) - center(z))`` for one disorder replicate.

    ``grid`` holds the evaluation points (already nudged); ``center`` is the
    array of centering values on them.
    """
    check_sample_count(model, samples, enum_limit)
    energies = model.replicate_energies(spec, stream, samples, constant=constant, enum_limit=enum_limit)
    return model.scaling_cn() * (empirical_cdf(energies, grid) - np.asarray(center))


# -- process matrix ---------------------------------------------------------------

@dataclass
class ProcessMatrix:
    model: str
    n: int
    grid: tuple
    samples: int
    values: np.ndarray
    seed: int
    centering: str = "phi_n_exact"
    disorder: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def replicates(self) -> int:
        return self.values.shape[0]

    def column(self, z: float) -> np.ndarray:
        return self.values[:, ZGrid(self.grid).index(z)]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["z"] + [repr(float(z)) for z in self.grid])
        for i, row in enumerate(self.values):
            w.writerow([f"rep_{i}"] + [repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path, **fields) -> "ProcessMatrix":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][0] != "z":
            raise ValueError(f"{path}: first row must start with 'z'")
        grid = tuple(float(v) for v in rows[0][1:])
        values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
        base = dict(model="", n=0, samples=0, seed=0)
        base.update(fields)
        return cls(grid=grid, values=values.reshape(-1, len(grid)), **base)

    def summary(self, law=None) -> dict:
        """Per-z mean and variance; KS distance to the limit marginal when ``law`` is given."""
        out = {
            "schema": SCHEMA_VERSION,
            "model": self.model,
            "n": self.n,
            "disorder": self.disorder,
            "replicates": self.replicates,
            "samples": self.samples,
            "seed": self.seed,
            "centering": self.centering,
            "z": [float(z) for z in self.grid],
            "mean": [float(v) for v in self.values.mean(axis=0)],
            "variance": [float(v) for v in self.values.var(axis=0, ddof=1)],
        }
        if law is not None:
            from .stats import ks_distance
            ks = []
            for j, z in enumerate(self.grid):
                cdf = law.marginal_cdf(z)
                ks.append(None if cdf is None else float(ks_distance(self.values[:, j], cdf)))
            out["ks"] = ks
            out["limit"] = law.describe()
        out.update(self.meta)
        return out

    def to_json(self, path=None, law=None) -> str:
        text = json.dumps(self.summary(law), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("LANDSCAPE_CLT_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ConfigurationError("thread count must be >= 1")
    return threads


def replicate_engine(model: Landscape, spec: DisorderSpec, replicates: int, samples: int = 0,
                     grid: ZGrid | Sequence[float] | None = None, centering: CenteringMode | None = None,
                     seed: int = 0, threads: int | None = 1, constant=None,
                     enum_limit: int = DEFAULT_ENUM_LIMIT) -> ProcessMatrix:
    """Scaled processes of ``replicates`` independent disorder realizations.

    Replicate ``i`` uses ``RngStream(seed, i)``; rows are stored by replicate
    index, so the result does not depend on ``threads``.
    """
    if replicates < 2:
        raise ConfigurationError("need at least 2 replicates")
    grid = grid if isinstance(grid, ZGrid) else ZGrid(tuple(grid) if grid is not None else DEFAULT_GRID)
    centering = centering if centering is not None else CenteringMode.default_for(spec)
    check_sample_count(model, samples, enum_limit)
    points = grid.nudged(spec, model.n_terms)
    center = centering_values(model, spec, points, centering)

    def run(i):
        return scaled_process(model, spec, RngStream(seed, i), points, center, samples, constant, enum_limit)

    threads = resolve_threads(threads)
    if threads == 1:
        rows = [run(i) for i in range(replicates)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, range(replicates)))
    return ProcessMatrix(model.describe(), model.n, grid.points, samples, np.vstack(rows), seed,
                         str(centering), spec.name)


# -- reduction residuals (overlapping sums) --------------------------------------

def _s_n(model: Landscape) -> float:
    if isinstance(model, DirectedPolymer):
        return math.exp(0.5 * model.log_s_n_squared())
    return math.sqrt(float(model.s_n_squared()))


def residual_sums(model: Landscape, spec: DisorderSpec, z: float, replicates: int, seed: int = 0,
                  enum_limit: int = DEFAULT_ENUM_LIMIT) -> np.ndarray:
    """``(1/s_n) sum_w Y_n(w; z)`` per replicate, ``Y = 1{X<=z} - Phi_n(z) + p(z) X``."""
    if isinstance(model, SpinGlass):
        raise UnsupportedOperation("spin glasses use second_order_residual")
    s_n = _s_n(model)
    zz = float(ZGrid((z,)).nudged(spec, model.n_terms)[0])
    law = model.centering_law(spec)
    if not law.exact:
        raise ConfigurationError(f"{spec.name} has no exact sum law at n={model.n_terms}")
    phi = float(law.cdf(zz))
    dens = float(gaussian_density(z))
    configs = model.all_configs(enum_limit)
    out = np.empty(replicates)
    for i in range(replicates):
        field_ = model.new_field(spec, RngStream(seed, i).child("disorder"))
        x = model.energies(configs, field_)
        out[i] = np.sum((x <= zz) - phi + dens * x) / s_n
    return out


def reduction_residual_variance(model: Landscape, spec: DisorderSpec, z: float, replicates: int,
                                seed: int = 0, enum_limit: int = DEFAULT_ENUM_LIMIT):
    """Monte Carlo ``Var[(1/s_n) sum_w Y_n(w; z)]`` and its standard error."""
    sums = residual_sums(model, spec, z, replicates, seed, enum_limit)
    var = float(sums.var(ddof=1))
    centered = (sums - sums.mean()) ** 2
    return var, float(centered.std(ddof=1) / math.sqrt(replicates))


def overlap_pair_moment(spec: DisorderSpec, n: int, r: int, samples: int, stream: RngStream,
                        z: float = 0.0):
    """Monte Carlo ``E[Y_1 Y_2]`` for two normalized sums of ``n`` weights sharing ``r`` of them.

    Returns ``(estimate, standard error)``.
    """
    if not 0 <= r <= n:
        raise ValueError("need 0 <= r <= n")
    gen = stream.generator()
    shared = sample_sums(spec, r, samples, gen) if r else np.zeros(samples)
    own1 = sample_sums(spec, n - r, samples, gen) if r < n else np.zeros(samples)
    own2 = sample_sums(spec, n - r, samples, gen) if r < n else np.zeros(samples)
    root = math.sqrt(n)
    zz = float(ZGrid((z,)).nudged(spec, n)[0])
    phi = float(sum_law(spec, n).cdf(zz))
    dens = float(gaussian_density(z))
    x1 = (shared + own1) / root
    x2 = (shared + own2) / root
    y1 = (x1 <= zz) - phi + dens * x1
    y2 = (x2 <= zz) - phi + dens * x2
    prod = y1 * y2
    return float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(samples))


# -- spin glasses ---------------------------------------------------------------

def varsigma_squared(model: SpinGlass) -> float:
    """``2 |Omega|^2 / |E|``: the variance of ``sum_w (X^2(w) - 1)``."""
    return 2.0 * float(model.base_size()) ** 2 / model.n_edges


@dataclass
class SpinGlassIdentities:
    sum_energy: float
    sum_square_minus_one: float
    coupling_side: float

    @property
    def square_relative_error(self) -> float:
        scale = max(abs(self.coupling_side), 1e-300)
        return abs(self.sum_square_minus_one - self.coupling_side) / scale


def spin_glass_identities(model: SpinGlass, couplings: np.ndarray,
                          enum_limit: int = DEFAULT_ENUM_LIMIT) -> SpinGlassIdentities:
    """Both sides of the exact sums over all configurations for one coupling realization."""
    x = model.energies_from_couplings(model.all_configs(enum_limit), np.asarray(couplings, dtype=float))
    size = float(model.base_size())
    return SpinGlassIdentities(
        sum_energy=float(x.sum()),
        sum_square_minus_one=float(np.sum(x * x - 1.0)),
        coupling_side=size / model.n_edges * float(np.sum(np.square(couplings) - 1.0)),
    )


def second_order_residual(model: SpinGlass, spec: DisorderSpec, stream: RngStream, grid,
                          enum_limit: int = DEFAULT_ENUM_LIMIT) -> np.ndarray:
    """``(1/varsigma) sum_w Y(w; z)`` per grid point, with the third-order projection residual
    ``Y = 1{X<=z} - Phi(z) + p(z) X + z p(z) (X^2 - 1) / 2``."""
    if not isinstance(model, SpinGlass):
        raise UnsupportedOperation("second_order_residual is defined for spin glasses")
    if not spec.is_gaussian:
        raise ConfigurationError("the second-order reduction assumes standard Gaussian couplings")
    grid = np.asarray(grid, dtype=float)
    field_ = model.new_field(spec, stream.child("disorder"))
    x = model.energies_from_couplings(model.all_configs(enum_limit), model.couplings(field_))
    sigma = math.sqrt(varsigma_squared(model))
    dens = gaussian_density(grid)
    out = np.empty(len(grid))
    sx, sx2 = x.sum(), np.sum(x * x - 1.0)
    e = np.sort(x)
    below = np.searchsorted(e, grid, side="right")
    size = len(x)
    for j, z in enumerate(grid):
        out[j] = (below[j] - size * normal_cdf(z) + dens[j] * sx + 0.5 * z * dens[j] * sx2) / sigma
    return out


# -- proof conditions --------------------------------------------------------------

def pair_overlap_counts(model: Landscape, enum_limit: int = DEFAULT_ENUM_LIMIT) -> dict:
    """Number of ordered configuration pairs at each overlap value (exact integers).

    Assignments use the rencontres numbers, d=1,2 polymers a dynamic program
    over the difference of two walks; other models enumerate.
    """
    if isinstance(model, Assignment):
        n = model.n
        fact = math.factorial(n)
        return {k: fact * math.comb(n, k) * combinatorics.derangements(n - k) for k in range(n + 1)}
    if isinstance(model, DirectedPolymer) and model.d <= 2 and model.base_size() > enum_limit:
        return polymer_overlap_counts(model.n, model.d)
    if isinstance(model, SpinGlass):
        # keyed by the integer m in rho = m / |E|; rho(w1, w2) depends only on
        # w1 * w2, so each value occurs |Omega| times as often as over one row
        configs = model.all_configs(enum_limit)
        agree = model.edge_products(configs).astype(np.int64).sum(axis=1)
        size = model.base_size()
        return {int(k): size * c for k, c in sorted(Counter(agree.tolist()).items())}
    overlaps = model.overlap_matrix(model.all_configs(enum_limit))
    values, counts = np.unique(overlaps, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def polymer_overlap_counts(n: int, d: int = 1) -> dict:
    """Overlap law of two independent polymers, as ordered-pair counts.

    The pair moves as one walk ``w1 - w2`` with ``(2d)^2`` step pairs; the
    overlap counts visits to 0 at times ``1..n``.
    """
    steps = []
    for a in range(2 * d):
        for b in range(2 * d):
            v = [0] * d
            v[a // 2] += 1 - 2 * (a % 2)
            v[b // 2] -= 1 - 2 * (b % 2)
            steps.append(tuple(v))
    step_count = Counter(steps)
    state = {((0,) * d, 0): 1}
    for _ in range(n):
        nxt: dict = {}
        for (pos, visits), c in state.items():
            for s, m in step_count.items():
                p = tuple(x + y for x, y in zip(pos, s))
                key = (p, visits + (not any(p)))
                nxt[key] = nxt.get(key, 0) + c * m
        state = nxt
    out: dict = {}
    for (_, visits), c in state.items():
        out[visits] = out.get(visits, 0) + c
    return dict(sorted(out.items()))


def condition_threshold(model: Landscape) -> float:
    if isinstance(model, DirectedPolymer):
        return model.n ** -0.25
    if isinstance(model, SpinGlass):
        return model.n_edges ** -0.25
    return model.n ** -0.5


def condition_checker(model: Landscape, enum_limit: int = DEFAULT_ENUM_LIMIT) -> dict:
    """Finite-n values of the variance, tail and second-moment conditions from the proofs.

    Overlapping-sum models: ``sum rho / s_n^2``, ``sum rho 1{rho > eps} / s_n^2`` and
    ``sum r^2 / (n s_n^2)``.  Spin glasses: ``sum rho / varsigma^2``,
    ``sum rho^2 1{|rho| > eps} / varsigma^2`` and ``sum rho^4 |E|^2 / |Omega|^2``.
    """
    from fractions import Fraction

    if not isinstance(model, (Assignment, HamiltonianCycles, SpanningTrees, DirectedPolymer, SpinGlass)):
        raise UnsupportedOperation(f"no proof conditions implemented for {model.kind}")
    counts = pair_overlap_counts(model, enum_limit)
    eps = condition_threshold(model)
    if isinstance(model, SpinGlass):
        edges = model.n_edges
        size = model.base_size()
        var = Fraction(2 * size * size, edges)
        s1 = sum(Fraction(k, edges) * c for k, c in counts.items())
        tail = sum(Fraction(k, edges) ** 2 * c for k, c in counts.items() if abs(k) / edges > eps)
        s4 = sum(Fraction(k, edges) ** 4 * c for k, c in counts.items())
        return {
            "model": model.describe(), "eps": eps,
            "cond1_variance_ratio": float(s1 / var),
            "cond2_tail_ratio": float(tail / var),
            "propcond2a_ratio": float(s4 * edges * edges / (size * size)),
        }
    m = model.n_terms
    if isinstance(model, DirectedPolymer):
        # keep this exact: the closed form uses floating return probabilities
        s2 = Fraction(sum(r * c for r, c in counts.items()), m)
        s2_closed = model.s_n_squared()
    else:
        s2 = Fraction(model.s_n_squared())
        s2_closed = float(s2)
    sum_rho = Fraction(sum(r * c for r, c in counts.items()), m)
    tail = Fraction(sum(r * c for r, c in counts.items() if r / m > eps), m)
    r2 = sum(r * r * c for r, c in counts.items())
    return {
        "model": model.describe(), "eps": eps,
        "cond1_variance_ratio": float(sum_rho) / s2_closed,
        "cond2_tail_ratio": float(tail / s2),
        "propcond2a_ratio": float(Fraction(r2) / (model.n * s2)),
    }
