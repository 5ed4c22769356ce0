"""Limit laws of the scaled processes and the distributional checks run against them."""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

from .disorder import ConfigurationError, DisorderSpec, gaussian_density, std_normal
from .empirical import DEFAULT_GRID, ProcessMatrix, ZGrid, replicate_engine
from .landscapes import BranchingWalk, DirectedPolymer, Landscape, OffspringLaw, SpinGlass, brw_generate
from .rng import RngStream
from .walk import WalkTable, build_walk_table, polymer_limit_w, return_sum

MIN_KS_SAMPLES = 20
W_BANK_DRAWS = 10**4
W_BANK_DEPTH = 25
DEFAULT_POLYMER_CUTOFF = 200


@dataclass
class LimitLaw:
    """``multiplier(z) * W`` with ``W`` standard normal, a polymer series, or an empirical bank.

    ``w_kind`` is ``"normal"``, ``"polymer_series"`` or ``"bank"``;
    ``multiplier`` is ``"density"`` (``p(z)``) or ``"spin_glass"`` (``z p(z) / sqrt 2``).
    """

    w_kind: str = "normal"
    multiplier: str = "density"
    walk: WalkTable | None = None
    spec: DisorderSpec | None = None
    cutoff: int = DEFAULT_POLYMER_CUTOFF
    bank: np.ndarray | None = None

    def __post_init__(self):
        if self.w_kind not in ("normal", "polymer_series", "bank"):
            raise ConfigurationError(f"unknown W kind {self.w_kind!r}")
        if self.multiplier not in ("density", "spin_glass"):
            raise ConfigurationError(f"unknown multiplier {self.multiplier!r}")
        if self.w_kind == "bank" and (self.bank is None or len(self.bank) == 0):
            raise ConfigurationError("the BRW limit law needs a pre-computed W bank")
        if self.w_kind == "polymer_series" and self.walk is None:
            raise ConfigurationError("the polymer series needs a walk table")

    @classmethod
    def for_model(cls, model: Landscape, spec: DisorderSpec | None = None, bank=None,
                  cutoff: int = DEFAULT_POLYMER_CUTOFF) -> "LimitLaw":
        if isinstance(model, SpinGlass):
            return cls("normal", "spin_glass")
        if isinstance(model, DirectedPolymer) and model.d >= 3:
            walk = build_walk_table(model.d, 2 * cutoff)
            return cls("polymer_series", walk=walk, spec=spec or std_normal(), cutoff=cutoff)
        if isinstance(model, BranchingWalk):
            if bank is None:
                raise ConfigurationError("the BRW limit law needs a pre-computed W bank")
            return cls("bank", bank=np.asarray(bank, dtype=float))
        return cls()

    def describe(self) -> str:
        mult = "p(z)" if self.multiplier == "density" else "z p(z)/sqrt(2)"
        return f"{mult} * W[{self.w_kind}]"

    def multipliers(self, grid) -> np.ndarray:
        z = np.asarray(grid, dtype=float)
        p = gaussian_density(z)
        return p if self.multiplier == "density" else z * p / math.sqrt(2)

    def w_variance(self) -> float:
        if self.w_kind == "normal":
            return 1.0
        if self.w_kind == "polymer_series":
            return return_sum(self.walk, self.cutoff)
        return float(np.var(self.bank, ddof=1))

    def draw_w(self, stream: RngStream, count: int) -> np.ndarray:
        if self.w_kind == "normal":
            return stream.generator().standard_normal(count)
        if self.w_kind == "polymer_series":
            return polymer_limit_w(self.walk, self.spec, self.cutoff, stream, size=count)
        return stream.generator().choice(self.bank, size=count, replace=True)

    def marginal_cdf(self, z: float):
        """CDF of the limit marginal at ``z``; ``None`` when it has no usable closed form."""
        mult = float(self.multipliers([z])[0])
        if mult == 0.0:
            return lambda x: (np.asarray(x) >= 0).astype(float)
        if self.w_kind == "normal" or (self.w_kind == "polymer_series" and self.spec.is_gaussian):
            sd = abs(mult) * math.sqrt(self.w_variance())
            return lambda x: special.ndtr(np.asarray(x, dtype=float) / sd)
        if self.w_kind == "bank":
            scaled = np.sort(mult * self.bank)
            return lambda x: np.searchsorted(scaled, np.asarray(x, dtype=float), side="right") / len(scaled)
        return None


def limit_sample(law: LimitLaw, grid, stream: RngStream) -> np.ndarray:
    """One draw of the limit process on ``grid``: a single ``W`` times the multiplier profile."""
    return limit_samples(law, grid, 1, stream)[0]


def limit_samples(law: LimitLaw, grid, count: int, stream: RngStream) -> np.ndarray:
    w = law.draw_w(stream, count)
    return np.outer(w, law.multipliers(list(grid)))


def ks_distance(samples, cdf) -> float:
    """Sup distance between the empirical CDF of ``samples`` and ``cdf``.

    Both one-sided limits are compared at every distinct sample, which
    covers continuous CDFs and point masses (the ``z = 0`` spin-glass limit).
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n < MIN_KS_SAMPLES:
        raise ValueError(f"KS distance needs at least {MIN_KS_SAMPLES} samples, got {n}")
    v = np.unique(x)
    right = np.asarray(cdf(v), dtype=float)
    left = np.asarray(cdf(np.nextafter(v, -np.inf)), dtype=float)
    emp_right = np.searchsorted(x, v, side="right") / n
    emp_left = np.searchsorted(x, v, side="left") / n
    return float(max(np.max(np.abs(emp_right - right)), np.max(np.abs(emp_left - left))))


def ks_critical(count: int, alpha: float = 0.01) -> float:
    """Asymptotic Kolmogorov critical value ``K_{1-alpha} / sqrt(count)``."""
    return float(special.kolmogi(alpha)) / math.sqrt(count)


def rank_one_correlation(matrix: ProcessMatrix, z_pair=(0.0, 1.0), absolute: bool = False) -> float:
    """Pearson correlation of two grid columns (``abs`` for sign-changing multipliers)."""
    a = matrix.column(z_pair[0])
    b = matrix.column(z_pair[1])
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        raise ValueError(f"zero-variance column at z={z_pair[0] if sa == 0 else z_pair[1]}")
    r = float(np.corrcoef(a, b)[0, 1])
    return abs(r) if absolute else r


def column_report(matrix: ProcessMatrix, law: LimitLaw) -> dict:
    grid = matrix.grid
    var = matrix.values.var(axis=0, ddof=1)
    ks = []
    for j, z in enumerate(grid):
        cdf = law.marginal_cdf(z)
        ks.append(None if cdf is None else ks_distance(matrix.values[:, j], cdf))
    limit_var = law.multipliers(grid) ** 2 * law.w_variance()
    # the spin-glass multiplier vanishes at 0, so pair the columns on either side of it
    pair = (-1.0, 1.0) if law.multiplier == "spin_glass" else (0.0, 1.0)
    try:
        corr = rank_one_correlation(matrix, pair)
    except (KeyError, ValueError):
        corr = None
    return {
        "n": matrix.n, "z": list(grid),
        "variance": [float(v) for v in var],
        "limit_variance": [float(v) for v in limit_var],
        "ks": ks, "correlation_pair": list(pair), "rank_one_correlation": corr,
    }


def convergence_table(model_for_n, n_list, replicates: int, samples, spec: DisorderSpec,
                      grid=DEFAULT_GRID, seed: int = 0, law_for_model=None, threads: int = 1,
                      centering=None) -> list:
    """One report per ``n``: per-z variances, KS distances against the limit marginal and the
    cross-z correlation of two columns.

    ``samples`` is one sample count or a callable of the model.
    """
    rows = []
    for n in n_list:
        model = model_for_n(n)
        m = samples(model) if callable(samples) else samples
        matrix = replicate_engine(model, spec, replicates, m, ZGrid(tuple(grid)), centering, seed, threads)
        law = law_for_model(model) if law_for_model else LimitLaw.for_model(model, spec)
        rows.append(column_report(matrix, law))
    return rows


# -- BRW W bank -------------------------------------------------------------------

def brw_w_draw(offspring: OffspringLaw, spec: DisorderSpec, depth: int, stream: RngStream) -> float:
    """``-sqrt(n) |T_n|^-1 sum_t X_n(t)`` for one tree of depth ``depth``."""
    return brw_generate(offspring, depth, spec, stream).limit_w(depth)


def _cache_dir() -> Path:
    root = os.environ.get("LANDSCAPE_CLT_CACHE")
    return Path(root) if root else Path.home() / ".cache" / "landscape_clt"


def brw_w_bank(offspring: OffspringLaw, spec: DisorderSpec, draws: int = W_BANK_DRAWS,
               depth: int = W_BANK_DEPTH, seed: int = 0, threads: int = 1,
               cache: bool | str | Path = True) -> np.ndarray:
    """Bank of W draws from independent trees, cached on disk as ``.npy``.

    Draw ``i`` uses ``RngStream(seed, i)``, so the bank does not depend on ``threads``.
    """
    key = f"{offspring}|{spec.kind}|{spec.a}|{depth}|{draws}|{seed}"
    path = None
    if cache:
        folder = Path(cache) if isinstance(cache, (str, Path)) else _cache_dir()
        path = folder / f"wbank_{hashlib.sha256(key.encode()).hexdigest()[:16]}.npy"
        if path.exists():
            return np.load(path)

    def one(i):
        return brw_w_draw(offspring, spec, depth, RngStream(seed, i).child("wbank"))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            bank = np.array(list(pool.map(one, range(draws))))
    else:
        bank = np.array([one(i) for i in range(draws)])
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npy")
        np.save(tmp, bank)
        os.replace(tmp, path)
    return bank


__all__ = [
    "LimitLaw", "limit_sample", "limit_samples", "ks_distance", "ks_critical",
    "rank_one_correlation", "column_report", "convergence_table", "brw_w_bank", "brw_w_draw",
]
