"""Exact pair counts and overlap second moments for assignments, Hamiltonian cycles
and spanning trees of the complete graph.

Closed forms are big integers (or ``Fraction`` where a power of ``n`` has a
negative exponent at small ``n``).  Every closed form has an ``*_oracle``
companion that counts by brute force over the enumerated configurations.
"""

from __future__ import annotations

import enum
import itertools
import math
from fractions import Fraction

import numpy as np

from .disorder import ConfigurationError
from .landscapes import Assignment, HamiltonianCycles, SpanningTrees, make_model

SUPPORTED = ("assignment", "hamiltonian", "spanning_tree")


class EdgeRelation(enum.Enum):
    EQUAL = "equal"
    SHARE_ONE_VERTEX = "share_one_vertex"
    DISJOINT = "disjoint"

    @classmethod
    def of(cls, e, f) -> "EdgeRelation":
        common = len(set(e) & set(f))
        return {2: cls.EQUAL, 1: cls.SHARE_ONE_VERTEX, 0: cls.DISJOINT}[common]

    def representative(self):
        """Two oriented edges of K_n in this relation."""
        return {
            EdgeRelation.EQUAL: ((0, 1), (0, 1)),
            EdgeRelation.SHARE_ONE_VERTEX: ((0, 1), (0, 2)),
            EdgeRelation.DISJOINT: ((0, 1), (2, 3)),
        }[self]


def _min_n(rel: EdgeRelation, equal_min: int) -> int:
    return 4 if rel is EdgeRelation.DISJOINT else max(equal_min, 3)


def _power(n: int, k: int):
    """``n**k`` as an int, or a Fraction when ``k < 0``."""
    return n ** k if k >= 0 else Fraction(1, n ** -k)


def _as_int(value) -> int:
    value = Fraction(value)
    if value.denominator != 1:
        raise ArithmeticError(f"expected an integer, got {value}")
    return int(value)


# -- permutations ------------------------------------------------------------

def derangements(n: int) -> int:
    d = [1, 0]
    for k in range(2, n + 1):
        d.append((k - 1) * (d[-1] + d[-2]))
    return d[n]


def fixed_point_square_sum(n: int) -> int:
    """Sum over all permutations of ``{1..n}`` of (number of fixed points) squared."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return sum(k * k * math.comb(n, k) * derangements(n - k) for k in range(n + 1))


def fixed_point_square_sum_oracle(n: int) -> int:
    ident = np.arange(n)
    perms = Assignment(n).all_configs(limit=10**7)
    fixed = (perms == ident).sum(axis=1)
    return int((fixed.astype(object) ** 2).sum())


# -- pair counts ---------------------------------------------------------------

def hp_pair_count(n: int, rel: EdgeRelation) -> int:
    """Hamiltonian cycles of K_n containing two given edges."""
    if n < _min_n(rel, 3):
        raise ValueError(f"hp_pair_count needs n >= {_min_n(rel, 3)} for {rel.value}")
    if rel is EdgeRelation.EQUAL:
        return math.factorial(n - 2)
    if rel is EdgeRelation.SHARE_ONE_VERTEX:
        return math.factorial(n - 3)
    return 2 * math.factorial(n - 3)


def st_pair_count(n: int, rel: EdgeRelation) -> int:
    """Spanning trees of K_n containing two given edges."""
    if n < _min_n(rel, 3):
        raise ValueError(f"st_pair_count needs n >= {_min_n(rel, 3)} for {rel.value}")
    if rel is EdgeRelation.EQUAL:
        return _as_int(2 * _power(n, n - 3))
    if rel is EdgeRelation.SHARE_ONE_VERTEX:
        return _as_int(3 * _power(n, n - 4))
    return _as_int(4 * _power(n, n - 4))


def transfer_current(n: int, g, h) -> Fraction:
    """Voltage drop along oriented edge ``h`` for a unit current from ``g[0]`` to ``g[1]`` in K_n.

    With unit conductances the potential is ``(1_{g0} - 1_{g1}) / n``.
    """
    if n < 3:
        raise ValueError("transfer currents need n >= 3")
    for v in (*g, *h):
        if not 0 <= v < n:
            raise ValueError(f"vertex {v} not in K_{n}")

    def potential(v):
        return Fraction(int(v == g[0]) - int(v == g[1]), n)

    return potential(h[0]) - potential(h[1])


def st_pair_prob(n: int, e, f) -> Fraction:
    """Probability that a uniform spanning tree of K_n contains both edges ``e`` and ``f``."""
    if set(e) == set(f):
        # a single edge: the 1x1 transfer-current determinant
        return transfer_current(n, e, e)
    return (transfer_current(n, e, e) * transfer_current(n, f, f)
            - transfer_current(n, e, f) * transfer_current(n, f, e))


def st_pair_count_from_determinant(n: int, rel: EdgeRelation) -> int:
    e, f = rel.representative()
    return _as_int(st_pair_prob(n, e, f) * n ** (n - 2))


def pair_count_oracle(kind: str, n: int, rel: EdgeRelation) -> int:
    """Configurations containing both representative edges, by enumeration."""
    model = make_model(kind, n)
    if kind not in ("hamiltonian", "spanning_tree"):
        raise ConfigurationError(f"pair counts are defined for edge models, not {kind}")
    (a, b), (c, d) = rel.representative()
    keys = model.element_keys(model.all_configs(limit=10**7))
    k1, k2 = min(a, b) * n + max(a, b), min(c, d) * n + max(c, d)
    return int(np.sum(np.any(keys == k1, axis=1) & np.any(keys == k2, axis=1)))


def edge_pair_census(n: int):
    """Ordered pairs of edges of K_n sharing one vertex, and with no vertex in common."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return 6 * math.comb(n, 3), 6 * math.comb(n, 4)


def edge_pair_census_oracle(n: int):
    edges = list(itertools.combinations(range(n), 2))
    share = disjoint = 0
    for e in edges:
        for f in edges:
            rel = EdgeRelation.of(e, f)
            share += rel is EdgeRelation.SHARE_ONE_VERTEX
            disjoint += rel is EdgeRelation.DISJOINT
    return share, disjoint


# -- overlap second moments ------------------------------------------------------

def overlap_square_sum(kind: str, n: int) -> int:
    """Sum of squared overlaps over ordered pairs of configurations."""
    if kind == "assignment":
        if n < 1:
            raise ValueError("n must be >= 1")
        # n = 1: a single pair with overlap 1; the formula below needs n >= 2
        return 1 if n == 1 else 2 * math.factorial(n) ** 2
    if kind == "hamiltonian":
        if n < 3:
            raise ValueError("n must be >= 3")
        f3 = math.factorial(n - 3)
        return (math.comb(n, 2) * math.factorial(n - 2) ** 2
                + 6 * math.comb(n, 3) * f3 ** 2 + 24 * math.comb(n, 4) * f3 ** 2)
    if kind == "spanning_tree":
        if n < 3:
            raise ValueError("n must be >= 3")
        total = (4 * math.comb(n, 2) * _power(n, 2 * (n - 3))
                 + 54 * math.comb(n, 3) * _power(n, 2 * (n - 4))
                 + 96 * math.comb(n, 4) * _power(n, 2 * (n - 4)))
        return _as_int(total)
    raise ConfigurationError(f"overlap_square_sum supports {', '.join(SUPPORTED)}, not {kind}")


def overlap_square_sum_from_pairs(kind: str, n: int) -> int:
    """Same sum via ``sum_{e,f} N(e,f)^2`` with the per-relation pair counts."""
    if kind == "assignment":
        # cells (i,j),(k,l): same cell, or different rows and columns
        same = n * n * math.factorial(n - 1) ** 2
        other = n * n * (n - 1) ** 2 * math.factorial(n - 2) ** 2 if n >= 2 else 0
        return same + other
    count = {"hamiltonian": hp_pair_count, "spanning_tree": st_pair_count}.get(kind)
    if count is None:
        raise ConfigurationError(f"unsupported model {kind}")
    share, disjoint = edge_pair_census(n)
    total = math.comb(n, 2) * count(n, EdgeRelation.EQUAL) ** 2
    total += share * count(n, EdgeRelation.SHARE_ONE_VERTEX) ** 2
    if disjoint:
        total += disjoint * count(n, EdgeRelation.DISJOINT) ** 2
    return total


def overlap_square_sum_oracle(kind: str, n: int, limit: int = 5000) -> int:
    """Brute force over all ordered configuration pairs."""
    if kind not in SUPPORTED:
        raise ConfigurationError(f"unsupported model {kind}")
    model = make_model(kind, n)
    overlaps = model.overlap_matrix(model.all_configs(limit=limit))
    return int((overlaps.astype(object) ** 2).sum())


def condition_ratio(kind: str, n: int) -> float:
    """``overlap_square_sum / (n s_n^2)``."""
    model = {"assignment": Assignment, "hamiltonian": HamiltonianCycles,
             "spanning_tree": SpanningTrees}.get(kind)
    if model is None:
        raise ConfigurationError(f"condition_ratio supports {', '.join(SUPPORTED)}, not {kind}")
    return float(Fraction(overlap_square_sum(kind, n), n * model(n).s_n_squared()))
