"""Constructors for the named spaces and counterexample machinery.

Uniform sphere samples (chordal or geodesic), two- and four-point spaces,
the interval-with-sphere glued space and its collapse map, and the bundles
that realize the transformed-metric collapse of non-isotone families.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import FiniteMMSpace, validate_space
from .errors import MMLabError, NotTriangleTriplet, WitnessInvalid
from .mpf import MPF, _golden_argmin_1d, eval_mpf
from .product import ProductSpec, lp_product, metric_transform, product

DIMENSION_CAP = 256


@dataclass(frozen=True)
class SphereSample:
    dimension: int
    radius: float
    count: int
    metric: str
    seed: int
    space: FiniteMMSpace


def _sphere_points(n: int, r: float, N: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(N, n + 1))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return r * g


def sample_sphere(n: int, r: float, N: int, metric: str = "chordal",
                  seed: int = 0, cache: bool = True) -> SphereSample:
    """Uniform i.i.d. sample of the n-sphere of radius r with 1/N weights.

    Gaussian normalization gives uniformity; samples are memoized under
    MML_CACHE_DIR keyed by every parameter.
    """
    if n < 1 or N < 2:
        raise MMLabError("need dimension >= 1 and at least 2 samples")
    if metric not in ("chordal", "geodesic"):
        raise MMLabError(f"unknown sphere metric {metric!r}")
    pts = None
    cache_file = None
    cache_dir = os.environ.get("MML_CACHE_DIR") if cache else None
    if cache_dir:
        cache_file = Path(cache_dir) / f"sphere_n{n}_r{r!r}_N{N}_seed{seed}.npy"
        if cache_file.exists():
            pts = np.load(cache_file)
    if pts is None:
        pts = _sphere_points(n, r, N, seed)
        if cache_file is not None:
            cache_file.parent.mkdir(parents=True, exist_ok=True)
            np.save(cache_file, pts)
    dist = sphere_distances(pts, r, metric)
    space = validate_space({
        "labels": [f"s{i}" for i in range(N)],
        "dist": dist,
        "weight": np.full(N, 1.0 / N),
        "coords": pts,
    })
    return SphereSample(dimension=n, radius=r, count=N, metric=metric,
                        seed=seed, space=space)


def sphere_distances(pts: np.ndarray, r: float, metric: str) -> np.ndarray:
    # gram-matrix form keeps memory at O(n^2) regardless of the dimension
    sq = (pts * pts).sum(axis=1)
    g = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    chord = np.sqrt(np.maximum(g, 0.0))
    if metric == "chordal":
        dist = chord
    else:
        dist = 2.0 * r * np.arcsin(np.clip(chord / (2.0 * r), 0.0, 1.0))
    dist = 0.5 * (dist + dist.T)
    np.fill_diagonal(dist, 0.0)
    return dist


def two_point(s: float, w0: float = 0.5) -> FiniteMMSpace:
    if s <= 0:
        raise MMLabError("two_point needs a positive distance")
    return validate_space({"labels": ["x0", "x1"],
                           "dist": [[0.0, s], [s, 0.0]],
                           "weight": [w0, 1.0 - w0]})


def four_point_Z(alpha: float, beta: float, gamma: float) -> FiniteMMSpace:
    """Four uniform points with the cross-distance pattern (alpha, beta, gamma).

    Opposite-corner pairs sit at gamma, edges at alpha and beta; this is a
    metric exactly when (alpha, beta, gamma) is a triangle triplet with
    positive entries.
    """
    trip = sorted((alpha, beta, gamma))
    if trip[0] <= 0 or trip[2] > trip[0] + trip[1] + 1e-12:
        raise NotTriangleTriplet(f"({alpha}, {beta}, {gamma})")
    labels = ["z00", "z10", "z01", "z11"]
    idx = {(0, 0): 0, (1, 0): 1, (0, 1): 2, (1, 1): 3}
    d = np.zeros((4, 4))
    for (i, j), a in idx.items():
        for (k, l), b in idx.items():
            if a == b:
                continue
            if i != k and j == l:
                d[a, b] = alpha
            elif i == k and j != l:
                d[a, b] = beta
            else:
                d[a, b] = gamma
    return validate_space({"labels": labels, "dist": d, "weight": [0.25] * 4})


# ---------------------------------------------------------------------------
# interval glued to a shrinking-influence sphere

@dataclass(frozen=True)
class GluedSpaceBundle:
    space: FiniteMMSpace
    limit: FiniteMMSpace
    p_map: np.ndarray
    interval_count: int
    sphere_count: int


def example_5_1(n: int, N_sphere: int, seed: int = 0) -> GluedSpaceBundle:
    """Interval [0, pi] glued at pi to a geodesic unit n-sphere, half mass each.

    The sphere influence collapses as n grows: the bundle carries the
    discretized limit (interval atoms plus a point mass at 3*pi/2) and the
    collapse map sending every sphere sample there.
    """
    M = max(1, math.ceil(N_sphere / 4))
    mids = (np.arange(M) + 0.5) * (math.pi / M)
    sph = sample_sphere(n, 1.0, N_sphere, metric="geodesic", seed=seed)
    pole = np.zeros(n + 1)
    pole[0] = 1.0
    chord_to_pole = np.linalg.norm(sph.space.coords - pole[None, :], axis=1)
    geo_to_pole = 2.0 * np.arcsin(np.clip(chord_to_pole / 2.0, 0.0, 1.0))

    total = M + N_sphere
    d = np.zeros((total, total))
    d[:M, :M] = np.abs(mids[:, None] - mids[None, :])
    d[M:, M:] = sph.space.dist
    cross = (math.pi - mids)[:, None] + geo_to_pole[None, :]
    d[:M, M:] = cross
    d[M:, :M] = cross.T
    w = np.concatenate([np.full(M, 0.5 / M), np.full(N_sphere, 0.5 / N_sphere)])
    labels = [f"i{k}" for k in range(M)] + [f"s{k}" for k in range(N_sphere)]
    space = validate_space({"labels": labels, "dist": d, "weight": w})

    limit_pos = np.concatenate([mids, [1.5 * math.pi]])
    dl = np.abs(limit_pos[:, None] - limit_pos[None, :])
    wl = np.concatenate([np.full(M, 0.5 / M), [0.5]])
    limit = validate_space({"labels": [f"i{k}" for k in range(M)] + ["dirac"],
                            "dist": dl, "weight": wl,
                            "coords": limit_pos[:, None]})
    p_map = np.concatenate([np.arange(M), np.full(N_sphere, M)]).astype(int)
    return GluedSpaceBundle(space=space, limit=limit, p_map=p_map,
                            interval_count=M, sphere_count=N_sphere)


# ---------------------------------------------------------------------------
# collapse bundles for non-isotone families

@dataclass(frozen=True)
class CounterexampleBundle:
    """Everything needed to watch a transformed product collapse numerically."""

    s: float
    s_n: float
    eta: float
    n: int
    r_n: float
    k_n: int
    dim_capped: bool
    base_space: FiniteMMSpace
    product_space: FiniteMMSpace
    transformed: FiniteMMSpace
    limit_space: FiniteMMSpace
    p_map: np.ndarray
    sphere_coords: np.ndarray
    fiber_of: np.ndarray
    limit_distance: float
    second: dict = field(default_factory=dict)


def _min_on_interval(F: MPF, lo: float, hi: float, grid: int = 512) -> float:
    xs = np.linspace(lo, hi, grid)
    vals = eval_mpf(F, [xs])
    k = int(np.argmin(vals))
    a = xs[max(0, k - 1)]
    b = xs[min(grid - 1, k + 1)]
    x = _golden_argmin_1d(lambda u: float(eval_mpf(F, [np.array(u)])), a, b)
    return float(min(vals[k], eval_mpf(F, [np.array(x)])))


def _min_on_rect(F: MPF, lo1, hi1, lo2, hi2, grid: int = 128) -> float:
    xs = np.linspace(lo1, hi1, grid)
    ys = np.linspace(lo2, hi2, grid)
    S, T = np.meshgrid(xs, ys, indexing="ij")
    vals = eval_mpf(F, [S, T])
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    x, y = xs[i], ys[j]
    hx = xs[1] - xs[0] if grid > 1 else 0.0
    hy = ys[1] - ys[0] if grid > 1 else 0.0
    for _ in range(3):
        x = _golden_argmin_1d(lambda u: float(eval_mpf(F, [np.array(np.clip(u, lo1, hi1)), np.array(y)])),
                              max(lo1, x - hx), min(hi1, x + hx))
        x = float(np.clip(x, lo1, hi1))
        y = _golden_argmin_1d(lambda u: float(eval_mpf(F, [np.array(x), np.array(np.clip(u, lo2, hi2))])),
                              max(lo2, y - hy), min(hi2, y + hy))
        y = float(np.clip(y, lo2, hi2))
    return float(min(vals[i, j], eval_mpf(F, [np.array(x), np.array(y)])))


def build_counterexample_1dim(F_family, s: float, s_n_rule, n: int, N: int,
                              seed: int = 0) -> CounterexampleBundle:
    """Two-point space times a sphere whose transformed metric collapses.

    The fiber sphere has radius sqrt(s_n^2 - s^2) / 2, so antipodal pairs in
    opposite fibers sit at exactly s_n while every cross-fiber distance lies
    in [s, s_n]; applying the family member then pinches the fibers to the
    minimum of the function on [s, s_n].
    """
    F_n = F_family(n) if callable(F_family) else F_family
    s_n = float(s_n_rule(n)) if callable(s_n_rule) else float(s_n_rule)
    if not s_n > s > 0:
        raise WitnessInvalid(f"need 0 < s < s_n, got s={s}, s_n={s_n}")
    f_s = float(eval_mpf(F_n, [np.array(s)]))
    f_sn = float(eval_mpf(F_n, [np.array(s_n)]))
    eta = f_s - f_sn
    if eta <= 0:
        raise WitnessInvalid(f"family value does not drop: F({s})={f_s} vs F({s_n})={f_sn}")

    r_n = math.sqrt(s_n * s_n - s * s) / 2.0
    k_raw = max(n, math.ceil(r_n ** 4))
    k_n = min(k_raw, DIMENSION_CAP)
    base = two_point(s)
    sph = sample_sphere(k_n, r_n, N, metric="chordal", seed=seed)
    prod = lp_product(base, sph.space, 2.0, check_samples=0)
    transformed = metric_transform(prod, F_n)
    d_y = _min_on_interval(F_n, s, s_n)
    limit = two_point(d_y)
    # product() is row-major in the first factor
    fiber_of = np.repeat(np.arange(2), N)
    p_map = fiber_of.copy()
    return CounterexampleBundle(
        s=s, s_n=s_n, eta=eta, n=n, r_n=r_n, k_n=k_n, dim_capped=k_n < k_raw,
        base_space=base, product_space=prod, transformed=transformed,
        limit_space=limit, p_map=p_map, sphere_coords=sph.space.coords,
        fiber_of=fiber_of, limit_distance=d_y)


def build_counterexample_2dim(F_family, s: float, t: float, s_n_rule, t_n_rule,
                              n: int, N: int, seed: int = 0) -> CounterexampleBundle:
    """Two sphere-fattened two-point factors whose F-product collapses to a
    four-point space with edge lengths (alpha, beta, gamma) minimized over
    the reachable distance rectangles."""
    F_n = F_family(n) if callable(F_family) else F_family
    s_n = float(s_n_rule(n)) if callable(s_n_rule) else float(s_n_rule)
    t_n = float(t_n_rule(n)) if callable(t_n_rule) else float(t_n_rule)
    if not (s_n > s >= 0 and t_n > t >= 0):
        raise WitnessInvalid("need s < s_n and t < t_n")
    f_st = float(eval_mpf(F_n, [np.array(s), np.array(t)]))
    f_nn = float(eval_mpf(F_n, [np.array(s_n), np.array(t_n)]))
    eta = f_st - f_nn
    if eta <= 0:
        raise WitnessInvalid(
            f"family value does not drop: F({s},{t})={f_st} vs F({s_n},{t_n})={f_nn}")

    r_n = math.sqrt(s_n * s_n - s * s) / 2.0
    rho_n = math.sqrt(t_n * t_n - t * t) / 2.0
    k_n = min(2 * max(n, math.ceil(r_n ** 4)) + 1, DIMENSION_CAP)
    l_n = min(2 * max(n, math.ceil(rho_n ** 4)) + 1, DIMENSION_CAP)

    alpha = _min_on_rect(F_n, s, s_n, 0.0, 2 * rho_n)
    beta = _min_on_rect(F_n, 0.0, 2 * r_n, t, t_n)
    gamma = _min_on_rect(F_n, s, s_n, t, t_n)
    limit = four_point_Z(alpha, beta, gamma)

    sphX = sample_sphere(k_n, r_n, N, metric="chordal", seed=seed)
    sphY = sample_sphere(l_n, rho_n, N, metric="chordal", seed=seed + 1)
    Xn = lp_product(two_point(max(s, 1e-9)), sphX.space, 2.0, check_samples=0)
    Yn = lp_product(two_point(max(t, 1e-9)), sphY.space, 2.0, check_samples=0)
    prod = product(ProductSpec((Xn, Yn), F_n, check_samples=0, cap=Xn.n * Yn.n))
    # product() is row-major in the first factor; each factor is row-major
    # in its own two-point part, so fibers decode arithmetically
    fiber_x = np.repeat(np.arange(2), N)
    xi = fiber_x[np.repeat(np.arange(2 * N), 2 * N)]
    yj = fiber_x[np.tile(np.arange(2 * N), 2 * N)]
    p_map = xi + 2 * yj  # target order: z00, z10, z01, z11
    return CounterexampleBundle(
        s=s, s_n=s_n, eta=eta, n=n, r_n=r_n, k_n=k_n,
        dim_capped=k_n >= DIMENSION_CAP or l_n >= DIMENSION_CAP,
        base_space=two_point(max(s, 1e-9)),
        product_space=prod, transformed=prod, limit_space=limit,
        p_map=p_map, sphere_coords=sphX.space.coords, fiber_of=p_map,
        limit_distance=gamma,
        second={"t": t, "t_n": t_n, "rho_n": rho_n, "l_n": l_n,
                "alpha": alpha, "beta": beta, "gamma": gamma})
