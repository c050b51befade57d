"""Quadrature rules, reproducible reductions and the worker pool."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from itertools import product

import numpy as np
from scipy import special, stats

THREADS_ENV = "GSBVP_THREADS"


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(n, 1)


def pmap(fn, items) -> list:
    """Ordered parallel map; output order never depends on the worker count."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def exact_sum(values, weights=None) -> np.ndarray:
    """Correctly rounded sum over the leading axis (``math.fsum`` per entry).

    The result does not depend on term order, so reductions are
    bit-reproducible whatever the worker count.
    """
    v = np.asarray(values)
    if v.shape[0] == 0:
        raise ValueError("empty sum")
    if weights is not None:
        w = np.asarray(weights, dtype=float).reshape((-1,) + (1,) * (v.ndim - 1))
        v = w * v
    flat = v.reshape(v.shape[0], -1)
    if np.iscomplexobj(flat):
        re = [math.fsum(c) for c in flat.real.T]
        im = [math.fsum(c) for c in flat.imag.T]
        out = np.array(re) + 1j * np.array(im)
    else:
        out = np.array([math.fsum(c) for c in flat.T])
    return out.reshape(v.shape[1:])


@lru_cache(maxsize=None)
def gauss_hermite(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = special.roots_hermite(order)
    return x, w


def hermite_product_rule(dim: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Hermite rule for weight exp(-|y|^2) on R^dim.

    Weights are normalized by pi^(dim/2) so they sum to one.
    """
    x, w = gauss_hermite(order)
    w = w / math.sqrt(math.pi)
    nodes = np.array(list(product(x, repeat=dim)), dtype=float).reshape(-1, dim)
    weights = np.array([math.prod(c) for c in product(w, repeat=dim)], dtype=float)
    return nodes, weights


@lru_cache(maxsize=None)
def _jacobi_sym(order: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    return special.roots_jacobi(order, alpha, alpha)


def sphere_rule(dim: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature for the uniform probability measure on the unit sphere in R^dim.

    dim = 1 uses the two points +-1 exactly. dim = 2 is the trapezoid rule with
    ``order`` equispaced angles. For dim >= 3 hyperspherical coordinates are
    used: Gauss-Jacobi in the cosine of every polar angle and the trapezoid
    rule in the azimuth.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
    n_az = max(order, 4)
    phi = 2.0 * np.pi * (np.arange(n_az) + 0.5) / n_az
    if dim == 2:
        return np.column_stack([np.cos(phi), np.sin(phi)]), np.full(n_az, 1.0 / n_az)

    n_pol = max(order // 2, 2)
    polar = []
    for k in range(1, dim - 1):
        power = dim - 1 - k
        x, w = _jacobi_sym(n_pol, 0.5 * (power - 1))
        polar.append((x, w / w.sum()))
    pts = []
    wts = []
    for combo in product(*[range(n_pol)] * (dim - 2), range(n_az)):
        coords = np.empty(dim)
        scale = 1.0
        weight = 1.0
        for k, idx in enumerate(combo[:-1]):
            c = polar[k][0][idx]
            coords[k] = scale * c
            scale *= math.sqrt(max(1.0 - c * c, 0.0))
            weight *= polar[k][1][idx]
        p = phi[combo[-1]]
        coords[dim - 2] = scale * math.cos(p)
        coords[dim - 1] = scale * math.sin(p)
        pts.append(coords)
        wts.append(weight / n_az)
    return np.array(pts), np.array(wts)


def sphere_area(dim: int) -> float:
    """Area of the unit sphere S^(dim-1) in R^dim."""
    return 2.0 * math.pi ** (dim / 2) / math.gamma(dim / 2)


def direction_samples(dim: int, n_samples: int) -> np.ndarray:
    """Deterministic, roughly uniform unit vectors in R^dim.

    Coordinate axes (both signs) are always included. dim = 1 is exhaustive.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    n = max(int(n_samples), 1)
    if dim == 2:
        ang = np.pi * (2 * np.arange(n) + 1) / n
        pts = np.column_stack([np.cos(ang), np.sin(ang)])
    elif dim == 3:
        # Fibonacci lattice
        golden = (1 + 5 ** 0.5) / 2
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        r = np.sqrt(1 - z * z)
        theta = 2 * np.pi * i / golden
        pts = np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    else:
        u = stats.qmc.Halton(d=dim, scramble=True, seed=20240611).random(n)
        g = special.ndtri(np.clip(u, 1e-12, 1 - 1e-12))
        pts = g / np.linalg.norm(g, axis=1, keepdims=True)
    # antipodes keep the sample set symmetric under zeta -> -zeta
    return np.vstack([axes, pts, -pts])
