"""Finite metric measure spaces, real observables, and pushforward distributions.

A space is a finite set of labelled points carrying a dense symmetric distance
matrix and a strictly positive probability weight vector.  Everything downstream
(products, invariants, coupling distances) consumes the validated form produced
by :func:`validate_space`.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapExceeded,
    HostMismatch,
    MMLabError,
    NegativeWeight,
    NotLipschitz,
    NotNormalized,
    TooLarge,
    TriangleViolation,
)

MASS_TOL = 1e-12
METRIC_TOL = 1e-9
DEFAULT_POINT_CAP = 4096
# full cubic triangle sweep up to this size, sampled triplets beyond
_EXHAUSTIVE_TRIANGLE_N = 512
_SAMPLED_TRIANGLE_COUNT = 2_000_000


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FiniteMMSpace:
    """Validated finite metric measure space."""

    labels: tuple
    dist: np.ndarray
    weight: np.ndarray
    coords: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def diam(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def reweighted(self, weight) -> "FiniteMMSpace":
        """Same carrier with a different measure, re-validated."""
        return validate_space({
            "labels": list(self.labels),
            "dist": self.dist,
            "weight": np.asarray(weight, dtype=float),
            "coords": self.coords,
        })


@dataclass(frozen=True)
class RealDistribution:
    """Weighted real atoms, sorted ascending, masses summing to one."""

    positions: np.ndarray
    masses: np.ndarray

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())


@dataclass(frozen=True)
class LipFunction:
    """Point values on a host space with a claimed Lipschitz constant."""

    values: np.ndarray
    lip_const: float


def _triangle_check(d: np.ndarray, tol: float, rng_seed: int = 0):
    """Return a violating (i, j, k, gap) or None.

    Exhaustive for small matrices; for large ones a fixed random sample of
    triplets is checked, which falsifies but does not certify.
    """
    n = d.shape[0]
    if n <= _EXHAUSTIVE_TRIANGLE_N:
        for j in range(n):
            slack = d - (d[:, j][:, None] + d[j][None, :])
            bad = np.argwhere(slack > tol)
            if bad.size:
                i, k = bad[0]
                return int(i), int(j), int(k), float(slack[i, k])
        return None
    rng = np.random.default_rng(rng_seed)
    m = _SAMPLED_TRIANGLE_COUNT
    i = rng.integers(0, n, m)
    j = rng.integers(0, n, m)
    k = rng.integers(0, n, m)
    slack = d[i, k] - d[i, j] - d[j, k]
    worst = int(np.argmax(slack))
    if slack[worst] > tol:
        return int(i[worst]), int(j[worst]), int(k[worst]), float(slack[worst])
    return None


def validate_space(candidate, cap: int = DEFAULT_POINT_CAP) -> FiniteMMSpace:
    """Validate a raw space record into a FiniteMMSpace.

    Zero-weight points are dropped and the weights renormalized; any broken
    invariant raises the matching error.  Idempotent on validated spaces.
    """
    if isinstance(candidate, FiniteMMSpace):
        labels = list(candidate.labels)
        dist = np.asarray(candidate.dist, dtype=float)
        weight = np.asarray(candidate.weight, dtype=float)
        coords = candidate.coords
    elif isinstance(candidate, dict):
        labels = list(candidate.get("labels", []))
        dist = np.asarray(candidate["dist"], dtype=float)
        weight = np.asarray(candidate["weight"], dtype=float)
        coords = candidate.get("coords")
        if coords is not None:
            coords = np.asarray(coords, dtype=float)
    else:
        labels, dist, weight = candidate[0], np.asarray(candidate[1], float), np.asarray(candidate[2], float)
        labels = list(labels)
        coords = None

    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise MMLabError(f"distance matrix shape {dist.shape} is not square")
    n = dist.shape[0]
    if not labels:
        labels = [str(i) for i in range(n)]
    if len(labels) != n or weight.shape != (n,):
        raise MMLabError("labels / dist / weight sizes disagree")
    if n > cap:
        raise CapExceeded(n, cap)

    if np.abs(np.diagonal(dist)).max(initial=0.0) > METRIC_TOL:
        raise MMLabError("distance matrix has a nonzero diagonal entry")
    if np.abs(dist - dist.T).max(initial=0.0) > METRIC_TOL:
        raise MMLabError("distance matrix is not symmetric")
    if dist.min(initial=0.0) < -METRIC_TOL:
        raise MMLabError("distance matrix has a negative entry")

    bad = _triangle_check(dist, METRIC_TOL)
    if bad is not None:
        raise TriangleViolation(*bad)

    neg = np.nonzero(weight < -1e-15)[0]
    if neg.size:
        raise NegativeWeight(int(neg[0]), float(weight[neg[0]]))
    total = float(weight.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise NotNormalized(total)

    keep = weight > 1e-15
    if not keep.all():
        idx = np.nonzero(keep)[0]
        labels = [labels[i] for i in idx]
        dist = dist[np.ix_(idx, idx)]
        weight = weight[idx]
        if coords is not None:
            coords = coords[idx]
    s = float(weight.sum())
    if abs(s - 1.0) > 5e-16:
        weight = weight / s

    return FiniteMMSpace(
        labels=tuple(labels),
        dist=_readonly(dist),
        weight=_readonly(weight),
        coords=None if coords is None else _readonly(coords),
    )


# ---------------------------------------------------------------------------
# observables

def lip_constant(space: FiniteMMSpace, values) -> float:
    """Smallest L with |v_i - v_j| <= L d(i,j); inf if values split a zero distance."""
    v = np.asarray(values, dtype=float)
    d = space.dist
    dv = np.abs(v[:, None] - v[None, :])
    off = ~np.eye(space.n, dtype=bool)
    zero = off & (d <= 0)
    if np.any(dv[zero] > 1e-15):
        return float("inf")
    pos = off & (d > 0)
    if not pos.any():
        return 0.0
    return float((dv[pos] / d[pos]).max())


def as_lip(space: FiniteMMSpace, values, lip_const: float | None = None) -> LipFunction:
    """Wrap point values as a LipFunction, certifying the claimed constant."""
    v = np.asarray(values, dtype=float)
    if v.shape != (space.n,):
        raise HostMismatch(f"{v.shape} values on a {space.n}-point space")
    actual = lip_constant(space, v)
    if lip_const is None:
        lip_const = actual
    elif actual > lip_const + METRIC_TOL:
        raise NotLipschitz(f"claimed constant {lip_const}, observed {actual}")
    return LipFunction(values=_readonly(v), lip_const=float(lip_const))


def project_to_lip1(space: FiniteMMSpace, values) -> np.ndarray:
    """Rescale values around their mean so the result is 1-Lipschitz."""
    v = np.asarray(values, dtype=float)
    L = lip_constant(space, v)
    if not np.isfinite(L) or L > 1.0:
        c = v.mean()
        scale = 0.0 if not np.isfinite(L) else 1.0 / L
        v = c + (v - c) * scale
    return v


def mcshane_extend(space: FiniteMMSpace, domain_idx, domain_values) -> np.ndarray:
    """Minimal 1-Lipschitz extension f(x) = min_y (v_y + d(x, y)) from a sub-domain."""
    idx = np.asarray(domain_idx, dtype=int)
    vals = np.asarray(domain_values, dtype=float)
    return (vals[None, :] + space.dist[:, idx]).min(axis=1)


def real_distribution(pairs, merge_tol: float = 1e-12) -> RealDistribution:
    """Build a sorted, merged, normalized RealDistribution from (position, mass) pairs."""
    pairs = list(pairs)
    pos = np.asarray([p for p, _ in pairs], dtype=float)
    mass = np.asarray([m for _, m in pairs], dtype=float)
    if (mass < -1e-15).any():
        i = int(np.nonzero(mass < -1e-15)[0][0])
        raise NegativeWeight(i, float(mass[i]))
    total = float(mass.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise NotNormalized(total)
    order = np.argsort(pos, kind="stable")
    pos, mass = pos[order], mass[order]
    out_p, out_m = [], []
    for p, m in zip(pos, mass):
        if out_p and p - out_p[-1] <= merge_tol:
            out_m[-1] += m
        else:
            out_p.append(p)
            out_m.append(m)
    return RealDistribution(_readonly(np.array(out_p)), _readonly(np.array(out_m)))


def pushforward(space: FiniteMMSpace, f: LipFunction) -> RealDistribution:
    """Image distribution of the space's measure under the observable f."""
    if f.values.shape != (space.n,):
        raise HostMismatch(f"{f.values.shape} values on a {space.n}-point space")
    return real_distribution(zip(f.values, space.weight))


# ---------------------------------------------------------------------------
# tiny-instance isomorphism testing

_ISO_BOUND = 10


def mm_isomorphic(a: FiniteMMSpace, b: FiniteMMSpace, tol: float = 1e-9):
    """Exhaustive weight- and distance-preserving bijection search.

    Returns (True, permutation) with b-index per a-index, or (False, None).
    Backtracking over point assignments with multiset pre-pruning; instances
    above 10 points raise TooLarge.
    """
    if a.n > _ISO_BOUND or b.n > _ISO_BOUND:
        raise TooLarge(max(a.n, b.n), _ISO_BOUND)
    if a.n != b.n:
        return False, None
    n = a.n
    if np.abs(np.sort(a.weight) - np.sort(b.weight)).max(initial=0.0) > tol:
        return False, None
    if np.abs(np.sort(a.dist, axis=None) - np.sort(b.dist, axis=None)).max(initial=0.0) > 2 * tol:
        return False, None

    assigned = [-1] * n
    used = [False] * n

    def extend(i):
        if i == n:
            return True
        for j in range(n):
            if used[j] or abs(a.weight[i] - b.weight[j]) > tol:
                continue
            ok = all(abs(a.dist[i, k] - b.dist[j, assigned[k]]) <= tol for k in range(i))
            if ok:
                assigned[i] = j
                used[j] = True
                if extend(i + 1):
                    return True
                used[j] = False
                assigned[i] = -1
        return False

    if extend(0):
        return True, list(assigned)
    return False, None


# ---------------------------------------------------------------------------
# JSON round trip

def space_to_json(space: FiniteMMSpace) -> dict:
    out = {
        "labels": list(space.labels),
        "dist": [list(map(float, row)) for row in space.dist],
        "weight": [float(w) for w in space.weight],
    }
    if space.coords is not None:
        out["coords"] = [list(map(float, row)) for row in space.coords]
    return out


def space_from_json(obj: dict, cap: int = DEFAULT_POINT_CAP) -> FiniteMMSpace:
    """Load a space record; derives the matrix from coords when dist is absent."""
    if "dist" not in obj:
        coords = np.asarray(obj["coords"], dtype=float)
        metric = obj.get("metric", "euclidean")
        diff = coords[:, None, :] - coords[None, :, :]
        chord = np.sqrt((diff * diff).sum(axis=2))
        if metric == "euclidean":
            dist = chord
        elif metric == "geodesic_sphere":
            r = float(obj["radius"])
            dist = 2.0 * r * np.arcsin(np.clip(chord / (2.0 * r), 0.0, 1.0))
        else:
            raise MMLabError(f"unknown derived metric {metric!r}")
        obj = dict(obj, dist=dist)
    return validate_space(obj, cap=cap)


def save_space(space: FiniteMMSpace, path) -> None:
    with open(path, "w") as fh:
        json.dump(space_to_json(space), fh)


def load_space(path, cap: int = DEFAULT_POINT_CAP) -> FiniteMMSpace:
    with open(path) as fh:
        return space_from_json(json.load(fh), cap=cap)


def random_metric_space(n: int, seed, dim: int = 3, weight_floor: float = 0.05) -> FiniteMMSpace:
    """Random Euclidean point cloud with strictly positive random weights."""
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, dim))
    w = weight_floor + rng.random(n)
    w = w / w.sum()
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=2))
    return validate_space({
        "labels": [str(i) for i in range(n)],
        "dist": d,
        "weight": w,
        "coords": pts,
    })
