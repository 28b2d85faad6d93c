"""Max-metric ball geometry on exact coordinates.

Balls are axis-aligned cubes: B(x, r) = prod_i [x_i - r, x_i + r].
Disjointness of two closed r-balls is dist > 2r; containment
B(y, r) subset B(c, R) is dist(y, c) + r <= R.  All comparisons are
exact as long as the inputs support exact ordering (Fraction does;
sympy expressions do too).
"""

from __future__ import annotations

from fractions import Fraction

from .core import DomainError

EXACT_PACKING_LIMIT = 20


def dist_inf(x, y) -> Fraction:
    return max(abs(a - b) for a, b in zip(x, y))


def balls_disjoint(x, y, r) -> bool:
    return dist_inf(x, y) > 2 * r


def ball_in_ball(y, r, c, R) -> bool:
    return dist_inf(y, c) + r <= R


def in_ball(y, c, R) -> bool:
    return dist_inf(y, c) <= R


def greedy_packing(points, center, R, r):
    """Maximal packing: scan candidates in lexicographic order, accept a
    point if it lies in B(center, R) and its r-ball is disjoint from all
    accepted balls.  Returns the accepted centers (a valid packing-number
    lower-bound certificate).

    Packings count disjoint r-balls with centers in B(center, R); this
    makes every point of the ball a candidate, which is what the
    cover/packing sandwich argument needs."""
    if not r < R:
        raise DomainError("packing requires r < R")
    accepted = []
    for p in sorted(points):
        if not in_ball(p, center, R):
            continue
        if all(balls_disjoint(p, q, r) for q in accepted):
            accepted.append(p)
    return accepted


def exact_packing_1d(points, center, R, r) -> int:
    """Exact maximum packing for d = 1 via interval scheduling."""
    if not r < R:
        raise DomainError("packing requires r < R")
    cands = sorted(p[0] for p in points if in_ball(p, center, R))
    count = 0
    last = None
    for x in cands:
        if last is None or x - last > 2 * r:
            count += 1
            last = x
    return count


def exact_packing(points, center, R, r,
                  limit: int = EXACT_PACKING_LIMIT) -> int:
    """True maximum packing number N*_r(points  intersect  B(center, R)).

    d = 1 is solved exactly at any size; otherwise branch and bound over
    at most `limit` candidates (hard error above, never a silent
    fallback).
    """
    if not r < R:
        raise DomainError("packing requires r < R")
    pts = sorted(points)
    if pts and len(pts[0]) == 1:
        return exact_packing_1d(pts, center, R, r)
    cands = [p for p in pts if in_ball(p, center, R)]
    if len(cands) > limit:
        raise DomainError(
            f"exact packing limited to {limit} candidates, got {len(cands)}")
    n = len(cands)
    conflict = [[not balls_disjoint(cands[i], cands[j], r)
                 for j in range(n)] for i in range(n)]
    best = 0

    def grow(idx: int, chosen: list):
        nonlocal best
        if len(chosen) + (n - idx) <= best:
            return
        if idx == n:
            best = max(best, len(chosen))
            return
        if all(not conflict[idx][j] for j in chosen):
            chosen.append(idx)
            grow(idx + 1, chosen)
            chosen.pop()
        grow(idx + 1, chosen)

    grow(0, [])
    return best


def exact_cover(points, center, R, rho,
                limit: int = EXACT_PACKING_LIMIT) -> int:
    """Least number of radius-rho balls (arbitrary centers) covering
    points intersect B(center, R); exact set cover over canonical
    candidate groups.

    In the max metric a subset is coverable by one rho-ball iff its
    per-axis spans are all <= 2*rho, so candidate balls can be anchored
    per axis at point coordinates.
    """
    pts = [p for p in sorted(set(points)) if in_ball(p, center, R)]
    if not pts:
        return 0
    if len(pts) > limit:
        raise DomainError(
            f"exact cover limited to {limit} points, got {len(pts)}")
    d = len(pts[0])
    axis_vals = [sorted(set(p[i] for p in pts)) for i in range(d)]

    def anchored_groups():
        groups = set()

        def rec(axis, anchor):
            if axis == d:
                grp = frozenset(
                    i for i, p in enumerate(pts)
                    if all(anchor[k] <= p[k] <= anchor[k] + 2 * rho
                           for k in range(d)))
                if grp:
                    groups.add(grp)
                return
            for v in axis_vals[axis]:
                rec(axis + 1, anchor + (v,))

        rec(0, ())
        # drop groups strictly inside another
        return [g for g in groups
                if not any(g < h for h in groups)]

    groups = anchored_groups()
    full = frozenset(range(len(pts)))
    best = len(pts)
    memo = {}

    def solve(uncovered: frozenset, used: int):
        nonlocal best
        if not uncovered:
            best = min(best, used)
            return
        if used + 1 >= best:
            return
        prev = memo.get(uncovered)
        if prev is not None and prev <= used:
            return
        memo[uncovered] = used
        pivot = min(uncovered)
        for g in groups:
            if pivot in g:
                solve(uncovered - g, used + 1)

    solve(full, 0)
    return best


def badic_cell_cover(points, center, R, r, base: int):
    """Covering count via b-adic cells at the largest b-adic scale <= r.

    Upper bound on the true least ball cover (each cell of side b^-j <= r
    fits in one r-ball); exact up to the fixed 2^d positional factor.
    Returns (count, cell_exponent).
    """
    if not r < R:
        raise DomainError("cover requires r < R")
    if r <= 0:
        raise DomainError("cover requires r > 0")
    j = 0
    while Fraction(1, base**j) > r:
        j += 1
    while j > 0 and Fraction(1, base ** (j - 1)) <= r:
        j -= 1
    scale = base**j
    cells = set()
    for p in points:
        if in_ball(p, center, R):
            cells.add(tuple((x * scale).__floor__() for x in p))
    return len(cells), j
