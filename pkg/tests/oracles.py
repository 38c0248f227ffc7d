"""Independent brute-force oracles used to pin expected values.

These deliberately avoid the library's vectorized code paths: plain Python
recursion and subset loops, so agreement is a two-implementation check.
"""
import itertools
import math


def pd_window_oracle(positions, masses, alpha, tol=1e-12):
    """Partial diameter by exhaustive subset enumeration (<= ~14 atoms)."""
    atoms = sorted(zip(positions, masses))
    n = len(atoms)
    best = atoms[-1][0] - atoms[0][0]
    for r in range(1, n + 1):
        for sub in itertools.combinations(atoms, r):
            mass = sum(m for _, m in sub)
            if mass >= alpha - tol:
                width = max(p for p, _ in sub) - min(p for p, _ in sub)
                best = min(best, width)
    return best


def _pd_of(values, weights, alpha, tol=1e-12):
    pairs = sorted(zip(values, weights))
    merged = []
    for v, w in pairs:
        if merged and v - merged[-1][0] <= 1e-12:
            merged[-1][1] += w
        else:
            merged.append([v, w])
    n = len(merged)
    best = merged[-1][0] - merged[0][0]
    for i in range(n):
        mass = 0.0
        for j in range(i, n):
            mass += merged[j][1]
            if mass >= alpha - tol:
                best = min(best, merged[j][0] - merged[i][0])
                break
    return best


def od_grid_oracle(space, kappa, delta):
    """Observable diameter over the delta-grid McShane family, recursively.

    Candidate values at each point are the grid points inside the Lipschitz
    interval fixed by earlier points, plus the interval endpoints; the family
    covers the 1-Lipschitz polytope within delta per value, so the maximum
    sits within 2 * delta of the true observable diameter.
    """
    n = space.n
    d = space.dist
    w = list(map(float, space.weight))
    alpha = 1.0 - kappa
    if n == 1:
        return 0.0
    K = int(math.ceil(space.diam / delta))
    grid = [k * delta for k in range(-K, K + 1)]
    values = [0.0] * n
    best = [0.0]

    def recurse(i):
        if i == n:
            best[0] = max(best[0], _pd_of(values, w, alpha))
            return
        lo = max(values[j] - d[i][j] for j in range(i))
        hi = min(values[j] + d[i][j] for j in range(i))
        cands = {lo, hi}
        for g in grid:
            if lo - 1e-12 <= g <= hi + 1e-12:
                cands.add(g)
        for c in sorted(cands):
            values[i] = c
            recurse(i + 1)

    recurse(1)
    return best[0]


def kappa_distance_oracle(space, A1, A2, kappa, tol=1e-12):
    """Largest min-cross-distance over explicit subset pairs."""
    w = space.weight
    best = 0.0
    for r1 in range(1, len(A1) + 1):
        for B1 in itertools.combinations(A1, r1):
            if sum(w[i] for i in B1) < kappa - tol:
                continue
            for r2 in range(1, len(A2) + 1):
                for B2 in itertools.combinations(A2, r2):
                    if sum(w[j] for j in B2) < kappa - tol:
                        continue
                    val = min(space.dist[i, j] for i in B1 for j in B2)
                    best = max(best, val)
    return best
