"""Concentration invariants of finite metric measure spaces.

Partial diameter, observable diameter (exact on tiny instances, certified
lower bounds elsewhere), concentration function, Levy mean and radius,
kappa-distance between subsets, and batteries of inequality checks that hold
as theorems on validated inputs.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    FiniteMMSpace,
    LipFunction,
    RealDistribution,
    as_lip,
    lip_constant,
    mcshane_extend,
    project_to_lip1,
    real_distribution,
)
from .errors import BadAlpha, BadKappa, MMLabError, TooLarge
from .mpf import MPF, eval_mpf

MASS_TOL = 1e-12
EXACT_OD_BOUND = 6
_EXACT_SUBSET_BOUND = 16
_BIG = 1e15


# ---------------------------------------------------------------------------
# partial diameter and Levy mean on real distributions

def partial_diameter(dist: RealDistribution, alpha: float) -> float:
    """Shortest closed interval capturing mass >= alpha, by sliding window.

    On the line any minimal-mass carrier may be replaced by an interval, so
    the window scan over sorted atoms is exact.
    """
    if not (0.0 < alpha <= 1.0 + MASS_TOL):
        raise BadAlpha(f"alpha = {alpha} outside (0, 1]")
    pos, mass = _merge_sorted(dist.positions, dist.masses)
    prefix = np.concatenate([[0.0], np.cumsum(mass)])
    need = alpha - MASS_TOL
    j = np.searchsorted(prefix, prefix[:-1] + need, side="left") - 1
    valid = j < len(pos)
    if not valid.any():
        return float(pos[-1] - pos[0])
    widths = pos[j[valid]] - pos[np.nonzero(valid)[0]]
    return float(widths.min())


def _merge_sorted(pos, mass, tol: float = 1e-12):
    order = np.argsort(pos, kind="stable")
    pos, mass = np.asarray(pos, float)[order], np.asarray(mass, float)[order]
    keep = np.empty(len(pos), dtype=bool)
    keep[0] = True
    np.greater(np.diff(pos), tol, out=keep[1:])
    groups = np.cumsum(keep) - 1
    out_p = pos[keep]
    out_m = np.bincount(groups, weights=mass, minlength=keep.sum())
    return out_p, out_m


@dataclass(frozen=True)
class MedianInterval:
    mean: float
    low: float
    high: float


def levy_mean(dist: RealDistribution) -> MedianInterval:
    """Midpoint of the closed interval of medians (one-sided half-mass conditions)."""
    pos, mass = _merge_sorted(dist.positions, dist.masses)
    cum = np.cumsum(mass)
    mass_le = cum
    mass_ge = 1.0 - cum + mass
    ok = (mass_le >= 0.5 - MASS_TOL) & (mass_ge >= 0.5 - MASS_TOL)
    idx = np.nonzero(ok)[0]
    low, high = float(pos[idx[0]]), float(pos[idx[-1]])
    return MedianInterval(mean=0.5 * (low + high), low=low, high=high)


# ---------------------------------------------------------------------------
# observable diameter

@dataclass(frozen=True)
class ODEstimate:
    """Observable diameter value with its witnessing observable.

    In exact_tiny mode the value is the optimum over all orderings of the
    1-Lipschitz value polytope; in heuristic mode it is a certified lower
    bound (the witness is genuinely 1-Lipschitz either way).
    """

    kappa: float
    value: float
    mode: str
    witness: LipFunction
    meta: dict = field(default_factory=dict)


def _pd_of_values(values, weights, alpha: float) -> float:
    pos, mass = _merge_sorted(values, weights)
    prefix = np.concatenate([[0.0], np.cumsum(mass)])
    j = np.searchsorted(prefix, prefix[:-1] + alpha - MASS_TOL, side="left") - 1
    valid = j < len(pos)
    if not valid.any():
        return float(pos[-1] - pos[0])
    return float((pos[j[valid]] - pos[np.nonzero(valid)[0]]).min())


def _qualifying_runs(wp: np.ndarray, target: float):
    """Minimal index b per start a with run mass >= target, per permutation row."""
    P, n = wp.shape
    prefix = np.concatenate([np.zeros((P, 1)), np.cumsum(wp, axis=1)], axis=1)
    runs = np.full((P, n), -1, dtype=int)
    for a in range(n):
        needed = prefix[:, a] + target - MASS_TOL
        # first b with prefix[:, b + 1] >= needed
        hit = prefix[:, a + 1:] >= needed[:, None]
        has = hit.any(axis=1)
        b = np.argmax(hit, axis=1) + a
        runs[:, a] = np.where(has, b, -1)
    return runs


def _min_plus_closure(A: np.ndarray, rounds: int) -> np.ndarray:
    for _ in range(rounds):
        A = np.minimum(A, (A[:, :, :, None] + A[:, None, :, :]).min(axis=2))
    return A


def _od_exact(space: FiniteMMSpace, kappa: float):
    """Exact observable diameter for n <= EXACT_OD_BOUND points.

    For each value ordering, maximizing the smallest heavy-window span under
    the Lipschitz caps is a parametric difference-constraint system; the
    largest feasible span is found by bisection with vectorized negative-cycle
    detection across all orderings at once.
    """
    n, w, d = space.n, space.weight, space.dist
    target = 1.0 - kappa
    if n == 1 or float(w.max()) >= target - MASS_TOL:
        return 0.0, np.zeros(n), {"surrogate": 0.0}

    perms = np.array([p for p in itertools.permutations(range(n)) if p[0] < p[-1]],
                     dtype=int)
    P = len(perms)
    runs = _qualifying_runs(w[perms], target)

    W = np.full((P, n, n), _BIG)
    idx = np.arange(n)
    W[:, idx, idx] = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            W[:, i, j] = d[perms[:, i], perms[:, j]]
    for i in range(n - 1):
        W[:, i + 1, i] = 0.0
    run_mask = np.zeros((P, n, n), dtype=bool)
    for a in range(n):
        b = runs[:, a]
        rows = np.nonzero(b > a)[0]
        run_mask[rows, b[rows], a] = True

    rounds = max(1, math.ceil(math.log2(n)) + 1)

    def feasible_mask(t: float):
        M = W.copy()
        M[run_mask] = np.minimum(M[run_mask], -t)
        C = _min_plus_closure(M, rounds)
        diag = C[:, idx, idx].min(axis=1)
        return diag >= -1e-11

    lo, hi = 0.0, space.diam
    if not feasible_mask(hi).any():
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if feasible_mask(mid).any():
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-12 * max(1.0, space.diam):
                break
    else:
        lo = hi

    mask = feasible_mask(lo)
    if not mask.any():
        lo = max(0.0, lo - 1e-9)
        mask = feasible_mask(lo)
    sigma = perms[int(np.argmax(mask))]
    values = _potentials_for(space, sigma, runs[int(np.argmax(mask))], lo)
    return lo, values, {"surrogate": lo, "orderings": P}


def _potentials_for(space: FiniteMMSpace, sigma, runs_row, t: float) -> np.ndarray:
    """Bellman-Ford potentials realizing the feasible constraint system."""
    n = space.n
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            edges.append((i, j, float(space.dist[sigma[i], sigma[j]])))
    for i in range(n - 1):
        edges.append((i + 1, i, 0.0))
    for a in range(n):
        b = runs_row[a]
        if b > a:
            edges.append((b, a, -t))
    u = np.zeros(n)
    for _ in range(n + 1):
        changed = False
        for i, j, wt in edges:
            if u[i] + wt < u[j] - 1e-15:
                u[j] = u[i] + wt
                changed = True
        if not changed:
            break
    values = np.empty(n)
    values[np.asarray(sigma)] = u
    return values


def _candidate_observables(space: FiniteMMSpace, count: int, seed) -> list:
    """Deterministic pool of 1-Lipschitz observables (distance cones, coordinates)."""
    n, d = space.n, space.dist
    out = []
    rng = np.random.default_rng([int(seed) & 0x7FFFFFFF, 101])
    anchors = np.arange(n) if n <= 32 else rng.choice(n, 32, replace=False)
    out.extend(d[:, a].copy() for a in anchors)
    k = 0
    while len(out) < count // 2:
        sub = np.random.default_rng([int(seed) & 0x7FFFFFFF, 202, k])
        m = 1 + k % 3
        a = sub.integers(0, n, m)
        c = sub.random(m) * space.diam
        out.append((c[None, :] + d[:, a]).min(axis=1))
        k += 1
    if space.coords is not None:
        dims = space.coords.shape[1]
        dirs = [np.eye(dims)[i] for i in range(min(dims, 16))]
        sub = np.random.default_rng([int(seed) & 0x7FFFFFFF, 303])
        extra = sub.normal(size=(min(32, max(4, count // 8)), dims))
        extra /= np.linalg.norm(extra, axis=1, keepdims=True)
        dirs.extend(extra)
        for u in dirs:
            out.append(project_to_lip1(space, space.coords @ u))
    return out[:count]


_LOCAL_SEARCH_MAX_N = 400


def _od_heuristic(space: FiniteMMSpace, kappa: float, budget: int, seed):
    target = 1.0 - kappa
    w = space.weight
    pool = _candidate_observables(space, max(16, budget // 4), seed)
    best_v, best_pd = None, -1.0
    for v in pool:
        pd = _pd_of_values(v, w, target)
        if pd > best_pd:
            best_v, best_pd = v, pd
    evals = len(pool)
    if space.n <= _LOCAL_SEARCH_MAX_N and best_v is not None:
        rng = np.random.default_rng([int(seed) & 0x7FFFFFFF, 404])
        v = best_v.copy()
        improving = True
        while improving and evals + 3 * space.n <= budget:
            improving = False
            for i in rng.permutation(space.n):
                others = np.delete(np.arange(space.n), i)
                lo = float((v[others] - space.dist[i, others]).max())
                hi = float((v[others] + space.dist[i, others]).min())
                for cand in (lo, hi, 0.5 * (lo + hi)):
                    old = v[i]
                    v[i] = cand
                    pd = _pd_of_values(v, w, target)
                    evals += 1
                    if pd > best_pd + 1e-15:
                        best_pd, best_v = pd, v.copy()
                        improving = True
                    else:
                        v[i] = old
    return best_pd if best_pd >= 0 else 0.0, best_v if best_v is not None else np.zeros(space.n), {
        "evaluations": evals}


def observable_diameter(space: FiniteMMSpace, kappa: float, mode: str = "auto",
                        budget: int = 20_000, seed=0) -> ODEstimate:
    """Largest partial diameter of a 1-Lipschitz image at mass 1 - kappa."""
    if not (0.0 < kappa < 1.0):
        raise BadKappa(f"kappa = {kappa} outside (0, 1)")
    if mode == "auto":
        mode = "exact_tiny" if space.n <= EXACT_OD_BOUND else "heuristic_lb"
    if mode == "exact_tiny":
        if space.n > EXACT_OD_BOUND:
            raise TooLarge(space.n, EXACT_OD_BOUND)
        surrogate, values, meta = _od_exact(space, kappa)
    elif mode == "heuristic_lb":
        surrogate, values, meta = _od_heuristic(space, kappa, budget, seed)
    else:
        raise MMLabError(f"unknown mode {mode!r}")
    witness = as_lip(space, values, lip_const=1.0)
    value = _pd_of_values(values, space.weight, 1.0 - kappa)
    meta = dict(meta, surrogate=surrogate, budget=budget, seed=seed)
    return ODEstimate(kappa=float(kappa), value=value, mode=mode,
                      witness=witness, meta=meta)


# ---------------------------------------------------------------------------
# concentration function

@dataclass(frozen=True)
class ConcentrationValue:
    lower: float
    upper: float
    mode: str

    @property
    def value(self) -> float:
        return self.lower


def _neighbor_masses_exact(space: FiniteMMSpace, r: float, closed: bool):
    """For every point subset: its mass and the mass of its r-neighborhood."""
    n, w, d = space.n, space.weight, space.dist
    M = 1 << n
    dmin = np.empty((M, n))
    dmin[0] = np.inf
    for m in range(1, M):
        low = (m & -m).bit_length() - 1
        dmin[m] = np.minimum(dmin[m & (m - 1)], d[low])
    inside = dmin <= r if closed else dmin < r
    near_mass = inside @ w
    bits = ((np.arange(M)[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    set_mass = bits @ w
    return set_mass, near_mass


def concentration_function(space: FiniteMMSpace, r: float, mode: str = "auto",
                           closed: bool = False) -> ConcentrationValue:
    """Worst missing mass of r-neighborhoods of half-mass sets.

    Exact subset enumeration up to 16 points; beyond that a sandwich of a
    greedy lower bound and a quotient-space upper bound, tagged as heuristic.
    """
    if r <= 0:
        raise MMLabError("radius must be positive")
    if mode == "auto":
        mode = "exact" if space.n <= _EXACT_SUBSET_BOUND else "heuristic"
    if mode == "exact":
        if space.n > _EXACT_SUBSET_BOUND:
            raise TooLarge(space.n, _EXACT_SUBSET_BOUND)
        set_mass, near_mass = _neighbor_masses_exact(space, r, closed)
        ok = set_mass >= 0.5 - MASS_TOL
        val = float((1.0 - near_mass[ok]).max(initial=0.0))
        return ConcentrationValue(lower=val, upper=val, mode="exact")
    lower = _conc_lower_greedy(space, r, closed)
    upper = _conc_upper_quotient(space, r, closed)
    return ConcentrationValue(lower=lower, upper=max(lower, upper), mode="heuristic")


def _conc_lower_greedy(space: FiniteMMSpace, r: float, closed: bool) -> float:
    n, w, d = space.n, space.weight, space.dist
    best = 0.0
    centers = range(n) if n <= 64 else np.random.default_rng(0).choice(n, 64, replace=False)
    for c in centers:
        order = np.argsort(d[c], kind="stable")
        cum = np.cumsum(w[order])
        k = int(np.argmax(cum >= 0.5 - MASS_TOL))
        A = order[: k + 1]
        dmin = d[:, A].min(axis=1)
        inside = dmin <= r if closed else dmin < r
        best = max(best, 1.0 - float(w[inside].sum()))
    return best


def _conc_upper_quotient(space: FiniteMMSpace, r: float, closed: bool,
                         clusters: int = _EXACT_SUBSET_BOUND) -> float:
    n, w, d = space.n, space.weight, space.dist
    reps = [0]
    dist_to_rep = d[0].copy()
    while len(reps) < min(clusters, n):
        nxt = int(np.argmax(dist_to_rep))
        if dist_to_rep[nxt] <= 0:
            break
        reps.append(nxt)
        dist_to_rep = np.minimum(dist_to_rep, d[nxt])
    reps = np.array(reps)
    assign = np.argmin(d[:, reps], axis=1)
    rho = float(np.max(d[np.arange(n), reps[assign]]))
    if r - 2 * rho <= 0:
        return 0.5
    qw = np.bincount(assign, weights=w, minlength=len(reps))
    from .core import validate_space
    quotient = validate_space({"labels": [str(i) for i in range(len(reps))],
                               "dist": d[np.ix_(reps, reps)], "weight": qw})
    return concentration_function(quotient, r - 2 * rho, mode="exact", closed=closed).value


# ---------------------------------------------------------------------------
# Levy radius

def _levy_radius_of_values(values, weights, kappa: float) -> float:
    lm = levy_mean(real_distribution(zip(values, weights / weights.sum()))).mean
    dev = np.abs(np.asarray(values, float) - lm)
    order = np.argsort(dev, kind="stable")
    dev_sorted = dev[order]
    w_sorted = np.asarray(weights, float)[order]
    above = 1.0 - np.cumsum(w_sorted)  # mass strictly above each sorted dev (with ties below)
    # recompute tail mass per candidate threshold, handling ties exactly
    candidates = np.unique(np.concatenate([[0.0], dev_sorted]))
    for eps in candidates:
        tail = float(w_sorted[dev_sorted > eps + 1e-15].sum())
        if tail <= kappa + MASS_TOL:
            return float(eps)
    return float(dev_sorted[-1])


def levy_radius(space: FiniteMMSpace, kappa: float, budget: int = 8000, seed=0,
                mode: str = "heuristic_lb") -> float:
    """Smallest radius around the Levy mean holding all but kappa of the mass,
    maximized over observables.  Heuristic mode is a lower bound; exact_tiny
    enumerates a delta-grid McShane family on up to 6 points (certified 2*delta).
    """
    if not (0.0 < kappa < 1.0):
        raise BadKappa(f"kappa = {kappa} outside (0, 1)")
    w = space.weight
    if mode == "exact_tiny":
        if space.n > EXACT_OD_BOUND:
            raise TooLarge(space.n, EXACT_OD_BOUND)
        best = 0.0
        for vals in mcshane_grid_family(space, delta=space.diam / 16.0):
            best = max(best, _levy_radius_of_values(vals, w, kappa))
        return best
    pool = _candidate_observables(space, max(16, budget // 2), seed)
    if space.n <= EXACT_OD_BOUND:
        pool.append(observable_diameter(space, kappa, mode="exact_tiny").witness.values)
    return max((_levy_radius_of_values(v, w, kappa) for v in pool), default=0.0)


def mcshane_grid_family(space: FiniteMMSpace, delta: float, max_rows: int = 2_000_000):
    """All grid-discretized 1-Lipschitz value vectors with v_0 = 0.

    Candidates per point are the delta-grid points inside the Lipschitz
    interval induced by earlier assignments, plus the interval endpoints, so
    the family covers the Lipschitz polytope within delta per coordinate.
    """
    n, d = space.n, space.dist
    diam = space.diam
    if n == 1:
        yield np.zeros(1)
        return
    K = int(math.ceil(diam / delta)) if delta > 0 else 0
    grid = np.arange(-K, K + 1) * delta
    frontier = np.zeros((1, 1))
    for i in range(1, n):
        lo = (frontier - d[i, :i][None, :]).max(axis=1)
        hi = (frontier + d[i, :i][None, :]).min(axis=1)
        inside = (grid[None, :] >= lo[:, None] - 1e-12) & (grid[None, :] <= hi[:, None] + 1e-12)
        counts = inside.sum(axis=1) + 2
        total = int(counts.sum())
        if total > max_rows:
            raise TooLarge(total, max_rows)
        rows = np.repeat(np.arange(len(frontier)), counts)
        vals = np.empty(total)
        pos = 0
        for row in range(len(frontier)):
            c = int(counts[row])
            vals[pos] = lo[row]
            vals[pos + 1] = hi[row]
            vals[pos + 2: pos + c] = grid[inside[row]]
            pos += c
        frontier = np.concatenate([frontier[rows], vals[:, None]], axis=1)
    yield from frontier


# ---------------------------------------------------------------------------
# kappa-distance

@dataclass(frozen=True)
class KappaDistance:
    kappa: float
    value: float
    witness: tuple
    mode: str


def kappa_distance(space: FiniteMMSpace, A1, A2, kappa: float) -> KappaDistance:
    """Largest separation between mass-kappa chunks of two subsets.

    Exact by subset enumeration when the smaller side has at most 16 points
    (the partner chunk is then chosen farthest-first, which is optimal);
    a greedy seeded heuristic lower bound beyond, tagged in the result.
    """
    A1 = np.asarray(sorted(set(map(int, A1))), dtype=int)
    A2 = np.asarray(sorted(set(map(int, A2))), dtype=int)
    w = space.weight
    if min(float(w[A1].sum()), float(w[A2].sum())) < kappa - MASS_TOL:
        return KappaDistance(kappa, 0.0, ((), ()), "exact")
    if len(A2) < len(A1):
        res = kappa_distance(space, A2, A1, kappa)
        return KappaDistance(kappa, res.value, (res.witness[1], res.witness[0]), res.mode)
    if len(A1) <= _EXACT_SUBSET_BOUND:
        return _kappa_distance_exact(space, A1, A2, kappa)
    return _kappa_distance_greedy(space, A1, A2, kappa)


def _kappa_distance_exact(space, A1, A2, kappa):
    w, d = space.weight, space.dist
    k1 = len(A1)
    M = 1 << k1
    sub = d[np.ix_(A1, A2)]
    dmin = np.empty((M, len(A2)))
    dmin[0] = np.inf
    for m in range(1, M):
        low = (m & -m).bit_length() - 1
        dmin[m] = np.minimum(dmin[m & (m - 1)], sub[low])
    bits = ((np.arange(M)[:, None] >> np.arange(k1)[None, :]) & 1).astype(float)
    mass1 = bits @ w[A1]
    ok = mass1 >= kappa - MASS_TOL
    ok[0] = False
    order = np.argsort(-dmin, axis=1, kind="stable")
    dd = np.take_along_axis(dmin, order, axis=1)
    ww = w[A2][order]
    cum = np.cumsum(ww, axis=1)
    kidx = np.argmax(cum >= kappa - MASS_TOL, axis=1)
    theta = dd[np.arange(M), kidx]
    theta[~ok] = -np.inf
    best = int(np.argmax(theta))
    value = float(theta[best])
    b1 = tuple(int(A1[i]) for i in range(k1) if best >> i & 1)
    cut = kidx[best]
    b2 = tuple(int(A2[j]) for j in order[best, : cut + 1])
    return KappaDistance(kappa, max(value, 0.0), (b1, b2), "exact")


def _kappa_distance_greedy(space, A1, A2, kappa):
    w, d = space.weight, space.dist
    best_val, best_wit = 0.0, ((), ())
    sub = d[np.ix_(A1, A2)]
    seeds = np.unravel_index(np.argsort(sub, axis=None)[::-1][:32], sub.shape)
    for a_i, b_j in zip(*seeds):
        a, b = A1[a_i], A2[b_j]
        o1 = A1[np.argsort(d[a, A1], kind="stable")]
        c1 = np.cumsum(w[o1])
        B1 = o1[: int(np.argmax(c1 >= kappa - MASS_TOL)) + 1]
        o2 = A2[np.argsort(d[b, A2], kind="stable")]
        c2 = np.cumsum(w[o2])
        B2 = o2[: int(np.argmax(c2 >= kappa - MASS_TOL)) + 1]
        val = float(d[np.ix_(B1, B2)].min())
        if val > best_val:
            best_val, best_wit = val, (tuple(map(int, B1)), tuple(map(int, B2)))
    return KappaDistance(kappa, best_val, best_wit, "heuristic_lb")


# ---------------------------------------------------------------------------
# inequality batteries

@dataclass(frozen=True)
class BatteryRow:
    index: int
    lhs: float
    rhs: float
    passed: bool
    meta: dict


@dataclass(frozen=True)
class BatteryReport:
    lemma: str
    rows: tuple
    tol: float

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self):
        return [r for r in self.rows if not r.passed]


def _od_value(space, kappa, budget=4000, seed=0):
    mode = "exact_tiny" if space.n <= EXACT_OD_BOUND else "heuristic_lb"
    return observable_diameter(space, kappa, mode=mode, budget=budget, seed=seed).value


def _tiny_space(rng, n=None, dim=3):
    from .core import random_metric_space
    n = n or int(rng.integers(2, 4))
    return random_metric_space(n, seed=int(rng.integers(0, 2**31 - 1)), dim=dim)


def _rational_weights(rng, n, denom=8):
    parts = rng.multinomial(denom - n, np.ones(n) / n) + 1
    return parts / denom


def _random_lip(rng, space):
    return project_to_lip1(space, rng.normal(size=space.n) * space.diam)


def _trial_key_1dim(rng, tol):
    from .mpf import builtin
    from .product import metric_transform
    X = _tiny_space(rng, n=int(rng.integers(2, 5)))
    token = ("h1", "h2", "clamp:2", "fn1:3")[int(rng.integers(0, 4))]
    F = builtin(token)
    kappa = float(rng.uniform(0.05, 0.45))
    XF = metric_transform(X, F)
    lhs = _od_value(XF, 2 * kappa)
    rhs = 4.0 * float(eval_mpf(F, [np.array(_od_value(X, kappa))]))
    return lhs, rhs, {"fn": token, "kappa": kappa}


def _trial_key_lp(rng, tol):
    from .product import lp_product
    X = _tiny_space(rng, n=int(rng.integers(2, 4)))
    Y = _tiny_space(rng, n=2)
    p = (1.0, 2.0, float("inf"))[int(rng.integers(0, 3))]
    kp = float(rng.uniform(0.05, 0.45))
    k = float(rng.uniform(0.05, min(0.9, 0.95 - kp)))
    prod = lp_product(X, Y, p, check_samples=0)
    lhs = _od_value(prod, k + kp)
    rhs = _od_value(X, k) + 2.0 * _od_value(Y, kp)
    return lhs, rhs, {"p": p, "kappa": k, "kappa2": kp}


def _trial_key_F(rng, tol):
    from .mpf import builtin
    from .product import ProductSpec, product
    token = ("fexp", "fp:2", "falpha:0.5", "mul:quad")[int(rng.integers(0, 4))]
    F = builtin(token)
    X = _tiny_space(rng, n=int(rng.integers(2, 4)))
    Y = _tiny_space(rng, n=int(rng.integers(2, 4)))
    kp = float(rng.uniform(0.05, 0.2))
    k = float(rng.uniform(0.05, 0.45 - kp))
    prod = product(ProductSpec((X, Y), F, check_samples=0))
    lhs = _od_value(prod, 2 * (k + kp), budget=6000, seed=int(rng.integers(0, 1 << 30)))
    odx = _od_value(X, k)
    ody = _od_value(Y, kp)
    rhs = 4.0 * float(F(odx, 0.0)) + 8.0 * float(F(0.0, ody))
    return lhs, rhs, {"fn": token, "kappa": k, "kappa2": kp, "product_points": prod.n}


def _trial_LO(rng, tol):
    from .mpf import lp as lp_desc
    from .product import ProductSpec, product
    X = _tiny_space(rng, n=int(rng.integers(2, 4)))
    Y = _tiny_space(rng, n=2)
    kappa = float(rng.uniform(0.05, 0.9))
    pf = product(ProductSpec((X, Y), lp_desc(2.0), check_samples=0))
    pg = product(ProductSpec((X, Y), lp_desc(1.0), check_samples=0))
    return _od_value(pf, kappa), _od_value(pg, kappa), {"kappa": kappa}


def _trial_conc_fct(rng, tol):
    X = _tiny_space(rng, n=int(rng.integers(2, 6)))
    kappa = float(rng.uniform(0.05, 0.9))
    lhs = _od_value(X, kappa)
    radii = np.unique(X.dist[X.dist > 0])
    rhs_r = X.diam
    for r in radii:
        if concentration_function(X, float(r), mode="exact", closed=True).value <= kappa / 2 + MASS_TOL:
            rhs_r = float(r)
            break
    return lhs, 2.0 * rhs_r, {"kappa": kappa}


def _trial_key_lp_N(rng, tol):
    from .mpf import lp as lp_desc
    from .product import ProductSpec, product
    Xs = [_tiny_space(rng, n=2) for _ in range(3)]
    k1 = float(rng.uniform(0.1, 0.5))
    k2 = float(rng.uniform(0.05, 0.2))
    k3 = float(rng.uniform(0.05, 0.2))
    prod = product(ProductSpec(tuple(Xs), lp_desc(2.0, arity=3), check_samples=0))
    lhs = _od_value(prod, k1 + k2 + k3, budget=4000, seed=int(rng.integers(0, 1 << 30)))
    rhs = _od_value(Xs[0], k1) + 2.0 * (_od_value(Xs[1], k2) + _od_value(Xs[2], k3))
    return lhs, rhs, {"kappas": (k1, k2, k3)}


def _trial_key_F_N(rng, tol):
    from .mpf import cyclic_sum_max, lp as lp_desc
    from .product import ProductSpec, product
    F = cyclic_sum_max() if rng.random() < 0.5 else lp_desc(2.0, arity=3)
    Xs = [_tiny_space(rng, n=2) for _ in range(3)]
    k1 = float(rng.uniform(0.05, 0.2))
    k2 = float(rng.uniform(0.05, 0.12))
    k3 = float(rng.uniform(0.05, 0.12))
    prod = product(ProductSpec(tuple(Xs), F, check_samples=0))
    lhs = _od_value(prod, 2 * (k1 + k2 + k3), budget=4000, seed=int(rng.integers(0, 1 << 30)))
    ods = [_od_value(X, k) for X, k in zip(Xs, (k1, k2, k3))]
    slots = []
    for i in range(3):
        args = [0.0, 0.0, 0.0]
        args[i] = ods[i]
        slots.append(float(F(*args)))
    rhs = 4.0 * slots[0] + 8.0 * (slots[1] + slots[2])
    return lhs, rhs, {"kappas": (k1, k2, k3), "fn": F.kind}


def _trial_lm_lem(rng, tol):
    from .distances import prokhorov
    X = _tiny_space(rng, n=int(rng.integers(2, 6)))
    nu = rng.random(X.n) + 0.1
    nu /= nu.sum()
    eps, plan = prokhorov(X, X.weight, nu, lam=1.0)
    kappa = min(0.45 * (1.0 - plan.deficiency), 0.49)
    if kappa <= 0:
        return 0.0, 0.0, {"degenerate": True}
    f = _random_lip(rng, X)
    lm_mu = levy_mean(real_distribution(zip(f, X.weight))).mean
    lm_nu = levy_mean(real_distribution(zip(f, nu))).mean
    lhs = abs(lm_mu - lm_nu)
    od_mu = _od_value(X, kappa)
    od_nu = _od_value(X.reweighted(nu), kappa)
    rhs = eps + od_mu + od_nu
    return lhs, rhs, {"kappa": kappa, "eps": eps, "deficiency": plan.deficiency}


def _trial_lprok(rng, tol):
    from .distances import lprok_product_check
    from .mpf import builtin
    X = _tiny_space(rng, n=3)
    Y = _tiny_space(rng, n=3)
    mus = []
    for Z in (X, X, Y, Y):
        v = rng.random(Z.n) + 0.1
        mus.append(v / v.sum())
    F = builtin(("fp:2", "fexp")[int(rng.integers(0, 2))])
    lam = (0.5, 1.0, 2.0)[int(rng.integers(0, 3))]
    res = lprok_product_check(X, mus[0], mus[1], Y, mus[2], mus[3], F, lam)
    return res["lhs"], res["rhs"], {"lambda": lam}


def _trial_box1(rng, tol):
    from .distances import box_distance
    from .gallery import two_point
    from .product import lp_product
    spaces = [two_point(float(rng.uniform(0.5, 3.0))) for _ in range(4)]
    X, Y, Z, W = spaces
    lhs = box_distance(lp_product(X, Z, 2.0, check_samples=0),
                       lp_product(Y, W, 2.0, check_samples=0), mode="exact_tiny")
    rhs = box_distance(X, Y, mode="exact_tiny") + box_distance(Z, W, mode="exact_tiny")
    return lhs, rhs, {}


def _trial_box_le_2prok(rng, tol):
    from .distances import box_distance, prokhorov
    X = _tiny_space(rng, n=int(rng.integers(2, 5)))
    denom = (4, 6, 8)[int(rng.integers(0, 3))] if X.n <= 3 else 4
    mu = _rational_weights(rng, X.n, denom=denom)
    nu = _rational_weights(rng, X.n, denom=denom)
    lhs = box_distance(X.reweighted(mu), X.reweighted(nu), mode="exact_tiny")
    prok, _ = prokhorov(X, mu, nu, lam=1.0)
    return lhs, 2.0 * prok, {}


def _trial_lr_le_od(rng, tol):
    X = _tiny_space(rng, n=int(rng.integers(2, 6)))
    kappa = float(rng.uniform(0.05, 0.45))
    lhs = levy_radius(X, kappa, budget=2000, seed=int(rng.integers(0, 1 << 30)))
    rhs = _od_value(X, kappa)
    return lhs, rhs, {"kappa": kappa}


def _trial_prok_le_ky(rng, tol):
    from .distances import ky_fan, prokhorov_real
    X = _tiny_space(rng, n=int(rng.integers(2, 6)))
    f = _random_lip(rng, X)
    g = _random_lip(rng, X)
    push_f = real_distribution(zip(f, X.weight))
    push_g = real_distribution(zip(g, X.weight))
    lhs = prokhorov_real(push_f, push_g, lam=1.0)
    rhs = ky_fan(X, f, g)
    return lhs, rhs, {}


_BATTERIES = {
    "key_1dim": _trial_key_1dim,
    "key_lp": _trial_key_lp,
    "key_F": _trial_key_F,
    "LO": _trial_LO,
    "conc_fct": _trial_conc_fct,
    "key_lp_N": _trial_key_lp_N,
    "key_F_N": _trial_key_F_N,
    "lm_lem": _trial_lm_lem,
    "lprok": _trial_lprok,
    "box1": _trial_box1,
    "box_le_2prok": _trial_box_le_2prok,
    "lr_le_od": _trial_lr_le_od,
    "prok_le_ky": _trial_prok_le_ky,
}

BATTERY_NAMES = tuple(_BATTERIES)


def run_inequality_battery(lemma: str, trials: int = 50, seed=0,
                           tol: float = 1e-6) -> BatteryReport:
    """Run one inequality battery; every row asserts lhs <= rhs + tol.

    A failure on validated inputs is release-blocking since each inequality
    is a theorem; the failing witness travels in the row metadata.
    """
    if lemma not in _BATTERIES:
        raise MMLabError(f"unknown battery {lemma!r}; options: {sorted(_BATTERIES)}")
    trial = _BATTERIES[lemma]
    rows = []
    for i in range(trials):
        rng = np.random.default_rng([hash(lemma) & 0x7FFFFFFF, int(seed) & 0x7FFFFFFF, i])
        lhs, rhs, meta = trial(rng, tol)
        rows.append(BatteryRow(index=i, lhs=float(lhs), rhs=float(rhs),
                               passed=bool(lhs <= rhs + tol), meta=meta))
    return BatteryReport(lemma=lemma, rows=tuple(rows), tol=tol)
