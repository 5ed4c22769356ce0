"""Simple random walk on Z^d: site probabilities, return sums, the d >= 3 series.

Two pieces of data are kept in a :class:`WalkTable`:

``return_probs[k]``
    ``p_k(0)`` for ``k <= horizon``.  Computed by recursion over the
    dimension: the number of steps spent on the last axis is
    Binomial(k, 1/d), the rest is a (d-1)-dimensional walk.  In d = 2 the
    rotation ``(x+y, x-y)`` splits the walk into two independent 1-d walks.
``layers[k]``
    the full site distribution ``p_k(x)`` as a dense array of side
    ``2k+1`` centred at the origin, for ``k <= layer_horizon``.  These are
    built by exact dynamic programming and cost ~ sum_k (2k+1)^d entries,
    so they stop well before ``horizon`` when d = 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .disorder import DisorderSpec
from .rng import RngStream, open_uniform

LAYER_BUDGET = 2 * 10**7
RETURN_HORIZON_MAX = 10**6
TAIL_SAFETY = 1.2


class WalkSizeError(ValueError):
    pass


def _log_central_binomial(m: np.ndarray) -> np.ndarray:
    """log P[1-d walk of m steps is at 0] for even m (−inf for odd)."""
    m = np.asarray(m, dtype=np.float64)
    out = special.gammaln(m + 1) - 2 * special.gammaln(m / 2 + 1) - m * math.log(2.0)
    return np.where(np.mod(m, 2) == 0, out, -np.inf)


def return_probabilities(d: int, horizon: int) -> np.ndarray:
    """``p_k(0)`` for ``k = 0..horizon``."""
    k = np.arange(horizon + 1)
    p1 = np.exp(_log_central_binomial(k))
    if d == 1:
        return p1
    if d == 2:
        return p1 * p1
    lower = return_probabilities(d - 1, horizon)
    out = np.zeros(horizon + 1)
    for total in range(horizon + 1):
        m = np.arange(0, total + 1, 2)  # steps on the last axis (even for a return)
        w = stats.binom.pmf(m, total, 1.0 / d)
        out[total] = np.sum(w * p1[m] * lower[total - m])
    return out


def _next_layer(p: np.ndarray) -> np.ndarray:
    d = p.ndim
    out = np.zeros(tuple(s + 2 for s in p.shape))
    inner = tuple(slice(1, -1) for _ in range(d))
    for axis in range(d):
        for shift in (0, 2):
            sl = list(inner)
            sl[axis] = slice(shift, shift + p.shape[axis])
            out[tuple(sl)] += p
    return out / (2 * d)


@dataclass(frozen=True, eq=False)
class WalkTable:
    d: int
    horizon: int
    return_probs: np.ndarray
    layers: tuple

    @property
    def layer_horizon(self) -> int:
        return len(self.layers) - 1

    def layer(self, k: int) -> np.ndarray:
        if k > self.layer_horizon:
            raise WalkSizeError(f"layer {k} not materialized (layer horizon {self.layer_horizon})")
        return self.layers[k]

    def prob(self, k: int, x) -> float:
        """``p_k(x)``; zero outside the l1 ball or with the wrong parity."""
        x = tuple(int(v) for v in np.atleast_1d(x))
        if len(x) != self.d:
            raise ValueError("site has wrong dimension")
        if sum(abs(v) for v in x) > k:
            return 0.0
        return float(self.layer(k)[tuple(v + k for v in x)])

    def layer_square_sum(self, k: int) -> float:
        lay = self.layer(k)
        return float(np.sum(lay * lay))


def _layer_horizon_for_budget(d: int, horizon: int, budget: int) -> int:
    total, k = 0, 0
    while k <= horizon:
        total += (2 * k + 1) ** d
        if total > budget:
            return k - 1
        k += 1
    return horizon


def build_walk_table(d: int, horizon: int, layer_horizon: int | None = None,
                     budget: int = LAYER_BUDGET) -> WalkTable:
    if d < 1 or horizon < 1:
        raise ValueError("need d >= 1 and horizon >= 1")
    if horizon > RETURN_HORIZON_MAX or (d >= 3 and horizon > 20000):
        raise WalkSizeError(f"horizon {horizon} too large for d={d}")
    fit = _layer_horizon_for_budget(d, horizon, budget)
    if layer_horizon is None:
        layer_horizon = fit
    elif layer_horizon > horizon:
        raise ValueError("layer_horizon cannot exceed horizon")
    elif layer_horizon > fit:
        raise WalkSizeError(f"layers up to k={layer_horizon} in d={d} exceed the budget of "
                            f"{budget} entries (max k={fit})")
    layers = [np.ones((1,) * d)]
    for _ in range(layer_horizon):
        layers.append(_next_layer(layers[-1]))
    return WalkTable(d, horizon, return_probabilities(d, horizon), tuple(layers))


def return_sum(table: WalkTable, n: int) -> float:
    """``sum_{k=1}^n p_{2k}(0)``, i.e. ``sum_k sum_x p_k(x)^2``."""
    if 2 * n > table.horizon:
        raise WalkSizeError(f"return_sum({n}) needs horizon >= {2 * n}, table has {table.horizon}")
    for k in range(1, min(n, table.layer_horizon) + 1):
        sq = table.layer_square_sum(k)
        if not math.isclose(sq, table.return_probs[2 * k], rel_tol=1e-10, abs_tol=1e-14):
            raise ArithmeticError(f"sum_x p_{k}(x)^2 = {sq} != p_{2 * k}(0) = {table.return_probs[2 * k]}")
    return float(np.sum(table.return_probs[2:2 * n + 1:2]))


def local_limit_constant(d: int) -> float:
    """``2^(1-d) (d/pi)^(d/2)``: the limit of ``k^(d/2) p_2k(0)``."""
    return 2.0 ** (1 - d) * (d / math.pi) ** (d / 2)


def s_squared_d3(table: WalkTable, cutoff: int) -> tuple[float, float]:
    """Partial sum of ``sum_k p_2k(0)`` up to ``cutoff`` and a bound on the rest."""
    if table.d < 3:
        raise ValueError("the series converges only for d >= 3")
    partial = return_sum(table, cutoff)
    d = table.d
    tail = TAIL_SAFETY * local_limit_constant(d) * float(special.zeta(d / 2, cutoff + 1))
    return partial, tail


def polymer_limit_w(table: WalkTable, spec: DisorderSpec, cutoff: int, stream: RngStream,
                    size: int | None = None, explicit_layers: int = 10) -> np.ndarray | float:
    """Draws of ``-sum_{k<=cutoff} sum_x p_k(x) xi_k(x)``.

    Layers ``k <= explicit_layers`` use independent weights at every site.
    Deeper layers are replaced by their Gaussian law with variance
    ``p_2k(0)``, which is exact for Gaussian weights and a Lindeberg
    approximation otherwise (each such layer is a sum of thousands of
    terms of size O(k^-d/2)).
    """
    if table.d < 3:
        raise ValueError("the limit variable is defined for d >= 3")
    if 2 * cutoff > table.horizon:
        raise WalkSizeError(f"cutoff {cutoff} needs horizon >= {2 * cutoff}")
    count = 1 if size is None else size
    gen = stream.generator()
    out = np.zeros(count)
    n_exp = min(cutoff, explicit_layers, table.layer_horizon)
    weights = []
    for k in range(1, n_exp + 1):
        lay = table.layer(k).ravel()
        weights.append(lay[lay > 0])
    if weights:
        w = np.concatenate(weights)
        chunk = max(1, 2**22 // len(w))
        for lo in range(0, count, chunk):
            hi = min(count, lo + chunk)
            xi = spec.from_uniform(open_uniform(gen, (hi - lo, len(w))))
            out[lo:hi] = -(xi @ w)
    if cutoff > n_exp:
        var_tail = float(np.sum(table.return_probs[2 * (n_exp + 1):2 * cutoff + 1:2]))
        out -= math.sqrt(var_tail) * gen.standard_normal(count)
    return float(out[0]) if size is None else out


def dump_return_series_csv(table: WalkTable, path, n: int | None = None) -> None:
    n = table.horizon // 2 if n is None else n
    with open(path, "w") as fh:
        fh.write("k,p_2k_0\n")
        for k in range(1, n + 1):
            fh.write(f"{k},{table.return_probs[2 * k]:.17g}\n")
