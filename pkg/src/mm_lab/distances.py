"""Coupling distances and closeness certificates between finite mm-spaces.

Prokhorov distances via max-flow feasibility (with a definition-direct
brute force as oracle), the Ky Fan metric, the box distance on equal-mass
chunks, near-isomorphism search, Lipschitz-up-to-additive-error domains, and
concentration certificates for maps onto tiny targets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .core import (
    FiniteMMSpace,
    LipFunction,
    RealDistribution,
    mcshane_extend,
    real_distribution,
    validate_space,
)
from .errors import HostMismatch, MMLabError, NotRational, TargetTooLarge, TooLarge
from .invariants import _candidate_observables, levy_mean, EXACT_OD_BOUND
from .mpf import MPF

MASS_TOL = 1e-12
_FLOW_SCALE = 10 ** 9  # int32 capacities for scipy maximum_flow
_BRUTE_BOUND = 12
_COVER_EXACT_BOUND = 16
_CHUNK_CAP = 8


# ---------------------------------------------------------------------------
# Ky Fan metric

def _values_of(f) -> np.ndarray:
    return f.values if isinstance(f, LipFunction) else np.asarray(f, dtype=float)


def ky_fan(space: FiniteMMSpace, f, g) -> float:
    """Infimum eps with mass{|f - g| > eps} <= eps, exact by threshold scan."""
    fv, gv = _values_of(f), _values_of(g)
    if fv.shape != (space.n,) or gv.shape != (space.n,):
        raise HostMismatch("observables must live on the same space")
    dev = np.abs(fv - gv)
    w = space.weight
    candidates = np.unique(np.concatenate([[0.0], dev]))
    tails = np.array([float(w[dev > c + 1e-15].sum()) for c in candidates])
    candidates = np.unique(np.concatenate([candidates, tails]))
    for c in candidates:
        if float(w[dev > c + 1e-15].sum()) <= c + MASS_TOL:
            return float(c)
    return 1.0


# ---------------------------------------------------------------------------
# Prokhorov distance: Strassen feasibility by max-flow

@dataclass(frozen=True)
class SubtransportPlan:
    """Partial coupling supported within the stated radius."""

    matrix: np.ndarray
    radius: float
    deficiency: float

    def check(self, dist: np.ndarray, mu, nu, tol: float = MASS_TOL) -> bool:
        pi = self.matrix
        ok_rows = (pi.sum(axis=1) <= np.asarray(mu) + tol).all()
        ok_cols = (pi.sum(axis=0) <= np.asarray(nu) + tol).all()
        ok_supp = not (pi[dist > self.radius + 1e-12] > tol).any()
        ok_def = abs(self.deficiency - (1.0 - pi.sum())) <= 1e-9
        return bool(ok_rows and ok_cols and ok_supp and ok_def)


def _check_measure(space, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (space.n,):
        raise HostMismatch(f"measure of length {len(v)} on a {space.n}-point space")
    if v.min(initial=0.0) < -1e-12 or abs(v.sum() - 1.0) > 1e-9:
        raise MMLabError("measure must be a probability vector")
    return np.maximum(v, 0.0)


def _max_flow(mu_int, nu_int, adj: np.ndarray):
    """Integer max-flow on the bipartite graph source -> mu -> nu -> sink."""
    n, m = adj.shape
    src, snk = 0, n + m + 1
    rows, cols, caps = [], [], []
    rows.extend([src] * n)
    cols.extend(range(1, n + 1))
    caps.extend(mu_int.tolist())
    ii, jj = np.nonzero(adj)
    rows.extend((ii + 1).tolist())
    cols.extend((jj + n + 1).tolist())
    caps.extend([_FLOW_SCALE] * len(ii))
    rows.extend(range(n + 1, n + m + 1))
    cols.extend([snk] * m)
    caps.extend(nu_int.tolist())
    graph = csr_matrix((np.asarray(caps, dtype=np.int32), (rows, cols)),
                       shape=(n + m + 2, n + m + 2))
    res = maximum_flow(graph, src, snk)
    return res


def prokhorov(space: FiniteMMSpace, mu, nu, lam: float = 1.0, tol: float = 1e-9):
    """Lambda-Prokhorov distance plus an optimal subtransport plan.

    Feasibility at radius eps is a bipartite max-flow question: mass moved
    only along pairs with d <= eps must reach 1 - lam * eps.  Feasibility is
    monotone in eps, so bisection converges to the infimum; the plan at the
    returned radius is extracted from the final flow.
    """
    if lam <= 0:
        raise MMLabError("lambda must be positive")
    mu = _check_measure(space, mu)
    nu = _check_measure(space, nu)
    d = space.dist
    mu_int = np.round(mu * _FLOW_SCALE).astype(np.int32)
    nu_int = np.round(nu * _FLOW_SCALE).astype(np.int32)
    slack = space.n + 2

    def feasible(eps: float):
        adj = d <= eps + 1e-12
        res = _max_flow(mu_int, nu_int, adj)
        needed = math.ceil((1.0 - lam * eps) * _FLOW_SCALE) - slack
        return res.flow_value >= needed, res

    lo, hi = 0.0, space.diam
    ok, res_hi = feasible(hi)
    if not ok:
        # lam * diam < 1 can force radii past the diameter
        while not ok:
            hi *= 2.0 if hi > 0 else 1.0
            hi = hi if hi > 0 else 1.0
            ok, res_hi = feasible(hi)
    ok0, res0 = feasible(0.0)
    if ok0:
        hi, res_hi = 0.0, res0
    else:
        while hi - lo > max(tol, 1e-15):
            mid = 0.5 * (lo + hi)
            ok, res = feasible(mid)
            if ok:
                hi, res_hi = mid, res
            else:
                lo = mid
    n = space.n
    sub = res_hi.flow[1: n + 1, n + 1: 2 * n + 1].toarray()
    plan = np.maximum(sub, 0).astype(float) / _FLOW_SCALE
    plan[d > hi + 1e-12] = 0.0
    # integer rounding can push marginals past mu/nu by ~1/_FLOW_SCALE; clip
    rs = plan.sum(axis=1)
    plan *= np.where(rs > mu, np.divide(mu, rs, out=np.ones_like(mu), where=rs > 0), 1.0)[:, None]
    cs = plan.sum(axis=0)
    plan *= np.where(cs > nu, np.divide(nu, cs, out=np.ones_like(nu), where=cs > 0), 1.0)[None, :]
    return float(hi), SubtransportPlan(matrix=plan, radius=float(hi),
                                       deficiency=float(1.0 - plan.sum()))


def prokhorov_bruteforce(space: FiniteMMSpace, mu, nu, lam: float = 1.0) -> float:
    """Definition-direct lambda-Prokhorov value by subset enumeration.

    For every subset A the smallest feasible radius solves a piecewise-linear
    inequality in closed form; the distance is the largest of these roots.
    Exact for up to 12 points; serves as the flow oracle.
    """
    if space.n > _BRUTE_BOUND:
        raise TooLarge(space.n, _BRUTE_BOUND)
    mu = _check_measure(space, mu)
    nu = _check_measure(space, nu)
    d = space.dist
    support_nu = np.nonzero(nu > 1e-15)[0]
    worst = 0.0
    for r in range(1, len(support_nu) + 1):
        for A in itertools.combinations(support_nu, r):
            A = list(A)
            nuA = float(nu[A].sum())
            dA = d[:, A].min(axis=1)
            ts = np.unique(np.concatenate([[0.0], dA]))
            levels = np.array([float(mu[dA <= t].sum()) for t in ts])
            root = None
            for k, t in enumerate(ts):
                upper = ts[k + 1] if k + 1 < len(ts) else np.inf
                need = (nuA - levels[k]) / lam
                if need <= t:
                    root = t
                    break
                if need <= upper:
                    root = need
                    break
            worst = max(worst, 0.0 if root is None else float(root))
    return worst


def prokhorov_real(a: RealDistribution, b: RealDistribution, lam: float = 1.0) -> float:
    """Prokhorov distance between two real-atom distributions on their union carrier."""
    pos = np.unique(np.concatenate([a.positions, b.positions]))
    dist = np.abs(pos[:, None] - pos[None, :])
    carrier = validate_space({"labels": [str(i) for i in range(len(pos))],
                              "dist": dist, "weight": np.full(len(pos), 1.0 / len(pos))})

    def spread(rd: RealDistribution):
        v = np.zeros(len(pos))
        idx = np.searchsorted(pos, rd.positions)
        np.add.at(v, idx, rd.masses)
        return v

    mu, nu = spread(a), spread(b)
    if len(pos) <= _BRUTE_BOUND:
        return prokhorov_bruteforce(carrier, mu, nu, lam)
    return prokhorov(carrier, mu, nu, lam)[0]


# ---------------------------------------------------------------------------
# box distance on equal-mass chunks

def _chunk_indices(space: FiniteMMSpace, k: int):
    scaled = space.weight * k
    rounded = np.round(scaled)
    if np.abs(scaled - rounded).max() > 1e-6 * k or (rounded < 1).any():
        return None
    if int(rounded.sum()) != k:
        return None
    return np.repeat(np.arange(space.n), rounded.astype(int))


def _common_chunking(x: FiniteMMSpace, y: FiniteMMSpace, cap: int = _CHUNK_CAP):
    for k in range(1, cap + 1):
        cx = _chunk_indices(x, k)
        cy = _chunk_indices(y, k)
        if cx is not None and cy is not None:
            return k, cx, cy
    raise NotRational(
        f"weights admit no common equal-mass refinement with at most {cap} chunks")


def _pair_masks(k: int):
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    masks = np.arange(1 << k)
    sel = np.zeros((1 << k, len(pairs)), dtype=bool)
    for c, (i, j) in enumerate(pairs):
        sel[:, c] = (((masks >> i) & 1) == 1) & (((masks >> j) & 1) == 1)
    sizes = np.array([bin(m).count("1") for m in range(1 << k)])
    return pairs, sel, sizes


def box_distance(x: FiniteMMSpace, y: FiniteMMSpace, mode: str = "exact_tiny",
                 max_chunks: int = _CHUNK_CAP, budget: int = 600, seed=0):
    """Box distance: exact over equal-mass chunk bijections, or bounds.

    Exact mode splits both spaces into k equal-mass chunks (k <= 8) and
    minimizes, over chunk bijections and retained chunk subsets, the larger
    of the discarded mass and the worst pairwise distance discrepancy.
    Couplings of uniform chunk vectors are convex combinations of bijections
    and the retained-subset objective is extremal at vertices, so the
    enumeration is exact for rational weights.  Bound mode returns
    (lower, upper) with the upper bound 3 * (best near-isomorphism epsilon).
    """
    if mode == "exact_tiny":
        k, cx, cy = _common_chunking(x, y, max_chunks)
        dx = x.dist[np.ix_(cx, cx)]
        dy = y.dist[np.ix_(cy, cy)]
        pairs, sel, sizes = _pair_masks(k)
        deficits = 1.0 - sizes / k
        perms = np.array(list(itertools.permutations(range(k))), dtype=int)
        best = np.inf
        if pairs:
            pi = np.array([p[0] for p in pairs])
            pj = np.array([p[1] for p in pairs])
        batch = max(1, (1 << 22) // max(1, sel.size))
        for lo in range(0, len(perms), batch):
            P = perms[lo: lo + batch]
            dys = dy[P[:, :, None], P[:, None, :]]
            if pairs:
                dflat = np.abs(dx[None, :, :] - dys)[:, pi, pj]
                pairmax = np.where(sel[None, :, :], dflat[:, None, :], 0.0).max(axis=2)
            else:
                pairmax = np.zeros((len(P), 1 << k))
            eps = np.maximum(pairmax, deficits[None, :]).min(axis=1)
            best = min(best, float(eps.min()))
            if best <= 0.0:
                break
        return best
    if mode == "bound":
        cert = epsilon_mm_iso_search(x, y, budget=budget, seed=seed)
        upper = 3.0 * cert.eps
        lower = _box_lower_profile(x, y)
        return (min(lower, upper), upper)
    raise MMLabError(f"unknown mode {mode!r}")


def _subset_mass_diam(space: FiniteMMSpace):
    n, w, d = space.n, space.weight, space.dist
    masses = np.zeros(1 << n)
    diams = np.zeros(1 << n)
    for m in range(1, 1 << n):
        low = (m & -m).bit_length() - 1
        rest = m & (m - 1)
        masses[m] = masses[rest] + w[low]
        if rest:
            worst = 0.0
            mm = rest
            while mm:
                i = (mm & -mm).bit_length() - 1
                worst = max(worst, d[low, i])
                mm &= mm - 1
            diams[m] = max(diams[rest], worst)
    return masses, diams


def _pd_from_table(masses, diams, diam, alpha):
    ok = masses >= alpha - MASS_TOL
    return float(diams[ok].min()) if ok.any() else float(diam)


def _box_lower_profile(x: FiniteMMSpace, y: FiniteMMSpace) -> float:
    if x.n > _BRUTE_BOUND or y.n > _BRUTE_BOUND:
        return 0.0
    alphas = np.linspace(0.15, 1.0, 18)
    mx, dx = _subset_mass_diam(x)
    my, dy = _subset_mass_diam(y)
    pdx = np.array([_pd_from_table(mx, dx, x.diam, a) for a in alphas])
    pdy = np.array([_pd_from_table(my, dy, y.diam, a) for a in alphas])
    lower = 0.0
    for eps in np.linspace(0.0, max(x.diam, y.diam), 64):
        sx = np.array([_pd_from_table(mx, dx, x.diam, max(a - eps, 1e-9)) for a in alphas])
        sy = np.array([_pd_from_table(my, dy, y.diam, max(a - eps, 1e-9)) for a in alphas])
        if (sy > pdx + eps + 1e-9).any() or (sx > pdy + eps + 1e-9).any():
            lower = float(eps)
    return lower


# ---------------------------------------------------------------------------
# near-isomorphism search and Lipschitz-up-to domains

def _min_cover_mass_exact(viol: np.ndarray, w: np.ndarray):
    """Minimum-mass vertex cover of the violation graph, by branch and bound."""
    n = len(w)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if viol[i, j]]
    best = [float(w.sum()), np.zeros(n, dtype=bool)]

    def recurse(removed, mass, edges_left):
        if mass >= best[0] - 1e-15:
            return
        for (i, j) in edges_left:
            if not removed[i] and not removed[j]:
                rest = [e for e in edges_left if e != (i, j)]
                for pick in (i, j):
                    removed[pick] = True
                    recurse(removed, mass + w[pick], rest)
                    removed[pick] = False
                return
        best[0] = mass
        best[1] = removed.copy()

    recurse(np.zeros(n, dtype=bool), 0.0, edges)
    return best[0], best[1]


def _greedy_cover_mass(viol: np.ndarray, w: np.ndarray):
    removed = np.zeros(len(w), dtype=bool)
    V = viol.copy()
    deg = V.sum(axis=1)
    mass = 0.0
    while deg.max(initial=0) > 0:
        pick = int(np.argmax(deg))
        removed[pick] = True
        mass += float(w[pick])
        hit = V[pick].copy()
        deg[hit] -= 1
        deg[pick] = 0
        V[pick, :] = False
        V[:, pick] = False
    return mass, removed


def _domain_for_eps(gap: np.ndarray, w: np.ndarray, eps: float):
    viol = gap > eps + 1e-12
    np.fill_diagonal(viol, False)
    if not viol.any():
        return 0.0, np.zeros(len(w), dtype=bool)
    if len(w) <= _COVER_EXACT_BOUND:
        return _min_cover_mass_exact(viol, w)
    return _greedy_cover_mass(viol, w)


def _eps_candidates(gap: np.ndarray, w: np.ndarray, eps_grid, limit: int = 48):
    vals = gap[np.triu_indices_from(gap, 1)]
    vals = vals[vals > 0]
    cands = {0.0}
    if vals.size:
        qs = np.quantile(vals, np.linspace(0.0, 1.0, min(limit, max(2, vals.size))))
        cands.update(float(v) for v in qs)
        cands.add(float(vals.max()))
    cands.update(float(np.cumsum(np.sort(w))[i]) for i in range(min(len(w), 8)))
    if eps_grid is not None:
        cands.update(float(e) for e in eps_grid)
    return sorted(cands)


def lip_up_to_eps(p_map, source: FiniteMMSpace, target: FiniteMMSpace,
                  eps_grid=None):
    """Smallest grid epsilon admitting a mass >= 1 - eps domain on which
    d_Y(p x, p x') <= d_X(x, x') + eps holds for all pairs.

    The domain is an exact minimum-mass uncovering for up to 16 points and a
    greedy most-violations removal beyond, so large instances carry
    upper-bound semantics.
    """
    p = np.asarray(p_map, dtype=int)
    if p.shape != (source.n,):
        raise MMLabError("map must assign a target index to every source point")
    gap = target.dist[np.ix_(p, p)] - source.dist
    w = source.weight
    if eps_grid is not None:
        candidates = sorted(float(e) for e in eps_grid)
    else:
        candidates = _eps_candidates(gap, w, None)
    for eps in candidates:
        removed_mass, removed = _domain_for_eps(gap, w, eps)
        if removed_mass <= eps + MASS_TOL:
            return float(eps), np.nonzero(~removed)[0]
    # no grid radius admits a heavy enough domain
    return math.inf, np.arange(source.n)


@dataclass(frozen=True)
class IsoCertificate:
    eps: float
    mapping: np.ndarray
    domain: np.ndarray
    eps_distortion: float
    eps_prok: float


def _distortion_eps(x: FiniteMMSpace, y: FiniteMMSpace, p: np.ndarray):
    gap = np.abs(x.dist - y.dist[np.ix_(p, p)])
    w = x.weight
    for eps in _eps_candidates(gap, w, None):
        removed_mass, removed = _domain_for_eps(gap, w, eps)
        if removed_mass <= eps + MASS_TOL:
            return float(eps), np.nonzero(~removed)[0]
    return float(gap.max()), np.arange(x.n)


def epsilon_mm_iso_search(x: FiniteMMSpace, y: FiniteMMSpace, budget: int = 600,
                          seed=0) -> IsoCertificate:
    """Search point maps x -> y approximately preserving distances and measure.

    Exhaustive when the map space is tiny, otherwise greedy weight matching
    plus budgeted single-point reassignment under the combined objective
    max(distortion-with-domain, pushforward Prokhorov).
    """

    def pushed(p):
        v = np.zeros(y.n)
        np.add.at(v, p, x.weight)
        return v

    def objective(p):
        e_dist, dom = _distortion_eps(x, y, p)
        e_prok, _ = prokhorov(y, pushed(p), y.weight, lam=1.0)
        return max(e_dist, e_prok), e_dist, e_prok, dom

    maps = None
    if y.n ** x.n <= 4096:
        maps = itertools.product(range(y.n), repeat=x.n)
    if maps is not None:
        best = None
        for p in maps:
            p = np.array(p, dtype=int)
            tot, e_d, e_p, dom = objective(p)
            if best is None or tot < best[0]:
                best = (tot, p, dom, e_d, e_p)
        tot, p, dom, e_d, e_p = best
        return IsoCertificate(eps=float(tot), mapping=p, domain=dom,
                              eps_distortion=e_d, eps_prok=e_p)

    order = np.argsort(-x.weight, kind="stable")
    capacity = y.weight.copy()
    p = np.zeros(x.n, dtype=int)
    for i in order:
        j = int(np.argmax(capacity))
        p[i] = j
        capacity[j] -= x.weight[i]
    tot, e_d, e_p, dom = objective(p)
    rng = np.random.default_rng([int(seed) & 0x7FFFFFFF, 55])
    spent = 0
    while spent < budget:
        i = int(rng.integers(0, x.n))
        j = int(rng.integers(0, y.n))
        if p[i] == j:
            spent += 1
            continue
        trial = p.copy()
        trial[i] = j
        t_tot, t_d, t_p, t_dom = objective(trial)
        spent += 1
        if t_tot < tot - 1e-15:
            p, tot, e_d, e_p, dom = trial, t_tot, t_d, t_p, t_dom
    return IsoCertificate(eps=float(tot), mapping=p, domain=dom,
                          eps_distortion=e_d, eps_prok=e_p)


# ---------------------------------------------------------------------------
# concentration certificates

@dataclass(frozen=True)
class ConcentrationCertificate:
    """Evidence that a map transports the Lipschitz class of the source
    onto the pullback class of a tiny target, in Ky Fan distance."""

    mapping: np.ndarray
    epsilon_lip: float
    lip_domain: np.ndarray
    epsilon_prok: float
    epsilon_haus: float
    overall: float
    observables: tuple = ()
    meta: dict = field(default_factory=dict)


def _lip1_target_fit(source: FiniteMMSpace, target: FiniteMMSpace, p: np.ndarray,
                     f_vals: np.ndarray, rounds: int = 3, steps: int = 9):
    """Minimize ky_fan(f, g o p) over 1-Lipschitz g on the target."""
    m = target.n
    fibers = [np.nonzero(p == j)[0] for j in range(m)]
    g = np.empty(m)
    overall = float(np.median(f_vals))
    for j in range(m):
        if len(fibers[j]):
            wj = source.weight[fibers[j]]
            g[j] = levy_mean(real_distribution(zip(f_vals[fibers[j]], wj / wj.sum()))).mean
        else:
            g[j] = overall
    candidates = [g]
    lower = (g[None, :] - target.dist).max(axis=1)
    upper = (g[None, :] + target.dist).min(axis=1)
    candidates.append(np.minimum(g, upper))
    candidates.append(np.maximum(g, lower))
    best_g, best = None, np.inf

    def score(gv):
        return ky_fan(source, f_vals, gv[p])

    for gv in candidates:
        gv = _project_target_lip(target, gv)
        s = score(gv)
        if s < best:
            best, best_g = s, gv.copy()
    step = max(best, target.diam / 8, 1e-6)
    for _ in range(rounds):
        improved = True
        while improved:
            improved = False
            for j in range(m):
                lo = (best_g[None, :] - target.dist).max(axis=1)[j] if m > 1 else best_g[j] - step
                hi = (best_g[None, :] + target.dist).min(axis=1)[j] if m > 1 else best_g[j] + step
                for cand in np.linspace(max(lo, best_g[j] - step), min(hi, best_g[j] + step), steps):
                    trial = best_g.copy()
                    trial[j] = cand
                    trial = _project_target_lip(target, trial)
                    s = score(trial)
                    if s < best - 1e-12:
                        best, best_g = s, trial
                        improved = True
        step /= 3.0
    return best, best_g


def _project_target_lip(target: FiniteMMSpace, g: np.ndarray) -> np.ndarray:
    low = (g[None, :] + target.dist).min(axis=1)
    return low


def concentration_certificate(source: FiniteMMSpace, target: FiniteMMSpace,
                              p_map, budget: int = 4000, seed=0,
                              eps_grid=None) -> ConcentrationCertificate:
    """Certify how well a map collapses the source onto a tiny target.

    Components: the Prokhorov gap of the pushforward measure, the additive
    Lipschitz error of the map (which controls how far pulled-back target
    observables sit from the source class), and a sampled sweep of source
    observables matched by 1-Lipschitz target functions in Ky Fan distance.
    The overall epsilon is the worst of the three.
    """
    if target.n > EXACT_OD_BOUND:
        raise TargetTooLarge(f"target has {target.n} > {EXACT_OD_BOUND} points")
    p = np.asarray(p_map, dtype=int)
    if p.shape != (source.n,):
        raise MMLabError("map must assign a target index to every source point")

    pushed = np.zeros(target.n)
    np.add.at(pushed, p, source.weight)
    eps_prok, _ = prokhorov(target, pushed, target.weight, lam=1.0)

    eps_lip, domain = lip_up_to_eps(p, source, target, eps_grid=eps_grid)

    n_obs = max(8, min(40, budget // 100))
    pool = _candidate_observables(source, n_obs, seed)
    evidence = []
    eps_haus = 0.0
    for k, f_vals in enumerate(pool):
        best, _g = _lip1_target_fit(source, target, p, f_vals)
        evidence.append(float(best))
        eps_haus = max(eps_haus, best)
    overall = max(eps_lip, eps_prok, eps_haus)
    return ConcentrationCertificate(
        mapping=p, epsilon_lip=float(eps_lip), lip_domain=domain,
        epsilon_prok=float(eps_prok), epsilon_haus=float(eps_haus),
        overall=float(overall), observables=tuple(evidence),
        meta={"seed": seed, "budget": budget, "samples": len(pool)})


def lipschitz_up_to_extension(space: FiniteMMSpace, values, domain_idx, eps: float):
    """Genuine 1-Lipschitz function within Ky Fan distance eps of the input,
    built by McShane extension from the nonexceptional domain."""
    values = np.asarray(values, dtype=float)
    return mcshane_extend(space, domain_idx, values[np.asarray(domain_idx, int)])


# ---------------------------------------------------------------------------
# product compatibility checks

def lprok_product_check(x: FiniteMMSpace, mu, mu2, y: FiniteMMSpace, nu, nu2,
                        F: MPF, lam: float = 1.0, tol: float = 1e-6) -> dict:
    """Product-measure Prokhorov against the worst of sum and doubled image."""
    from .product import ProductSpec, product
    prod = product(ProductSpec((x, y), F, check_samples=0))
    pm = np.outer(mu, nu).ravel()
    pm2 = np.outer(mu2, nu2).ravel()
    if prod.n <= _BRUTE_BOUND:
        lhs = prokhorov_bruteforce(prod, pm, pm2, lam)
    else:
        lhs = prokhorov(prod, pm, pm2, lam)[0]
    px = prokhorov_bruteforce(x, mu, mu2, lam) if x.n <= _BRUTE_BOUND else prokhorov(x, mu, mu2, lam)[0]
    py = prokhorov_bruteforce(y, nu, nu2, lam) if y.n <= _BRUTE_BOUND else prokhorov(y, nu, nu2, lam)[0]
    rhs = max(px + py, 2.0 * float(F(px, py)))
    return {"lhs": float(lhs), "rhs": float(rhs), "pass": bool(lhs <= rhs + tol),
            "prok_x": px, "prok_y": py}


def box_product_check(x, y, z, w, F_or_p, tol: float = 1e-9) -> dict:
    """Box distance of products against factor box distances."""
    from .mpf import lp as lp_desc
    from .product import ProductSpec, product
    if isinstance(F_or_p, (int, float)):
        F = lp_desc(float(F_or_p))
        lp_form = True
    else:
        F = F_or_p
        lp_form = False
    pxz = product(ProductSpec((x, z), F, check_samples=0))
    pyw = product(ProductSpec((y, w), F, check_samples=0))
    lhs = box_distance(pxz, pyw, mode="exact_tiny")
    bxy = box_distance(x, y, mode="exact_tiny")
    bzw = box_distance(z, w, mode="exact_tiny")
    if lp_form:
        rhs = bxy + bzw
    else:
        rhs = max(bxy + bzw, 2.0 * float(F(0.5 * bxy, 0.5 * bzw)))
    return {"lhs": float(lhs), "rhs": float(rhs), "pass": bool(lhs <= rhs + tol),
            "box_xy": bxy, "box_zw": bzw}
