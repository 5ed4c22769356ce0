"""Normalized Hermite polynomials in L^2(R, p) and the Hermite expansion of indicators."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from .disorder import gaussian_density, normal_cdf
from .rng import RngStream

DEFAULT_MAX_DEGREE = 200


class HermiteBasis:
    """Orthonormal Hermite polynomials ``h_0..h_max_degree`` for the standard Gaussian weight.

    Evaluation uses the three-term recurrence
    ``h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k+1)``, which keeps values
    O(1) instead of forming ``He_k / sqrt(k!)``.
    """

    def __init__(self, max_degree: int = DEFAULT_MAX_DEGREE):
        if max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        self.max_degree = int(max_degree)
        k = np.arange(max_degree + 2, dtype=float)
        self._sqrt = np.sqrt(k)

    def _check(self, i):
        if not 0 <= i <= self.max_degree:
            raise ValueError(f"degree {i} outside 0..{self.max_degree}")

    def eval_all(self, k: int, x) -> np.ndarray:
        """``h_0(x)..h_{k}(x)`` stacked along axis 0."""
        self._check(k)
        x = np.asarray(x, dtype=float)
        out = np.empty((k + 1,) + x.shape)
        out[0] = 1.0
        if k >= 1:
            out[1] = x
        for j in range(1, k):
            out[j + 1] = (x * out[j] - self._sqrt[j] * out[j - 1]) / self._sqrt[j + 1]
        return out

    def eval(self, i: int, x):
        values = self.eval_all(i, x)[i]
        return float(values) if np.ndim(values) == 0 else values


_DEFAULT = HermiteBasis()


def hermite_eval(i: int, x, basis: HermiteBasis = _DEFAULT):
    return basis.eval(i, x)


def indicator_coeff(z: float, i: int, basis: HermiteBasis = _DEFAULT) -> float:
    """``<1_{x<=z}, h_i>`` in L^2(R, p).

    Since ``(h_{i-1} p)' = -sqrt(i) h_i p``, the coefficient is
    ``-p(z) h_{i-1}(z) / sqrt(i)`` for every ``i >= 1``, and ``Phi(z)`` for ``i = 0``.
    """
    if i < 0:
        raise ValueError("degree must be >= 0")
    if i == 0:
        return float(normal_cdf(z))
    return float(-gaussian_density(z) * basis.eval(i - 1, z) / math.sqrt(i))


def indicator_coeffs(z: float, k: int, basis: HermiteBasis = _DEFAULT) -> np.ndarray:
    """Coefficients of degrees ``0..k``."""
    h = basis.eval_all(max(k - 1, 0), z)
    out = np.empty(k + 1)
    out[0] = normal_cdf(z)
    i = np.arange(1, k + 1)
    out[1:] = -gaussian_density(z) * h[i - 1] / np.sqrt(i)
    return out


def indicator_coeff_quad(z: float, i: int, basis: HermiteBasis = _DEFAULT) -> float:
    """Quadrature for ``int_{-inf}^z h_i p dx`` (oracle for :func:`indicator_coeff`)."""
    value, _ = integrate.quad(lambda x: basis.eval(i, x) * gaussian_density(x), -np.inf, z,
                              epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


def project_residual(k: int, z: float, x, basis: HermiteBasis = _DEFAULT):
    """``(P_k 1_{.<=z})(x)``: the indicator minus its expansion up to degree ``k-1``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    x = np.asarray(x, dtype=float)
    coeffs = indicator_coeffs(z, k - 1, basis)
    h = basis.eval_all(k - 1, x)
    out = (x <= z).astype(float) - np.tensordot(coeffs, h, axes=1)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=16)
def gauss_hermite(nodes: int = 60):
    """Nodes and weights for ``int f p dx`` (weights sum to 1).

    Golub-Welsch: eigenvalues of the Jacobi matrix of the normalized
    recurrence are the nodes; squared first eigenvector components are the weights.
    """
    off = np.sqrt(np.arange(1, nodes, dtype=float))
    jacobi = np.diag(off, 1) + np.diag(off, -1)
    x, vecs = np.linalg.eigh(jacobi)
    w = vecs[0] ** 2
    return x, w / w.sum()


def gram_matrix(k: int, nodes: int = 60, basis: HermiteBasis = _DEFAULT) -> np.ndarray:
    """``int h_i h_j p dx`` for ``i, j <= k`` by Gauss-Hermite quadrature."""
    x, w = gauss_hermite(nodes)
    h = basis.eval_all(k, x)
    return (h * w) @ h.T


def residual_inner(k: int, z: float, j: int, basis: HermiteBasis = _DEFAULT) -> float:
    """``int (P_k 1_{.<=z}) h_j p dx``, split at the jump so quadrature stays accurate."""
    def integrand(x):
        return project_residual(k, z, x, basis) * basis.eval(j, x) * gaussian_density(x)

    left, _ = integrate.quad(integrand, -np.inf, z, epsabs=1e-13, limit=200)
    right, _ = integrate.quad(integrand, z, np.inf, epsabs=1e-13, limit=200)
    return left + right


def indicator_norm(z: float) -> float:
    """``||1_{.<=z}||`` in L^2(R, p), by quadrature of the density."""
    value, _ = integrate.quad(gaussian_density, -np.inf, z, epsabs=1e-14)
    return math.sqrt(value)


def correlated_pairs(rho: float, samples: int, stream: RngStream):
    if not -1 <= rho <= 1:
        raise ValueError("|rho| must be <= 1")
    gen = stream.generator()
    x = gen.standard_normal(samples)
    y = rho * x + math.sqrt(1 - rho * rho) * gen.standard_normal(samples)
    return x, y


def cross_moment(rho: float, i: int, j: int, samples: int, stream: RngStream,
                 basis: HermiteBasis = _DEFAULT):
    """Monte Carlo ``E[h_i(X) h_j(Y)]`` for a unit Gaussian pair with correlation ``rho``.

    Returns ``(estimate, standard error)``.
    """
    x, y = correlated_pairs(rho, samples, stream)
    prod = basis.eval(i, x) * basis.eval(j, y)
    return float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(samples))


def projection_bound_check(rho: float, k: int, z1: float, z2: float, samples: int,
                           stream: RngStream, basis: HermiteBasis = _DEFAULT):
    """``(lhs, rhs, se)`` with ``lhs = |E[P_k f(X) P_k g(Y)]|`` for indicators at ``z1``, ``z2``
    and ``rhs = |rho|^k ||f|| ||g||``.
    """
    x, y = correlated_pairs(rho, samples, stream)
    prod = project_residual(k, z1, x, basis) * project_residual(k, z2, y, basis)
    lhs = abs(float(prod.mean()))
    se = float(prod.std(ddof=1) / math.sqrt(samples))
    rhs = abs(rho) ** k * indicator_norm(z1) * indicator_norm(z2)
    return lhs, rhs, se


def projection_moment_exact(rho: float, k: int, z1: float, z2: float, terms: int = 200,
                            basis: HermiteBasis = _DEFAULT) -> float:
    """``sum_{i>=k} rho^i f_i g_i`` truncated at ``terms`` (series form of the same moment)."""
    f = indicator_coeffs(z1, terms, basis)
    g = indicator_coeffs(z2, terms, basis)
    i = np.arange(k, terms + 1)
    return float(np.sum(rho ** i * f[i] * g[i]))
