"""Lower-dimension extraction: nested families of M disjoint balls at
geometrically shrinking radii, with the scale ratio chosen so that
lambda^alpha * M = 1.

Radii are exact: when M^(q/p) is an integer (alpha = p/q) everything is
a Fraction; otherwise radii fall back to exact sympy powers so that all
disjointness and nesting checks stay decidable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import geometry
from .core import CubeTree, DomainError, PointSet, leaf_representatives
from .estimators import lower_dimension_report
from .exactmath import iroot


def _lambda_for(M: int, alpha: Fraction):
    """lambda = M^(-q/p) for alpha = p/q, exact."""
    p, q = alpha.numerator, alpha.denominator
    root = iroot(M**q, p)
    if root**p == M**q:
        return Fraction(1, root)
    import sympy
    return sympy.Integer(M) ** sympy.Rational(-q, p)


@dataclass(frozen=True)
class LowerParams:
    alpha: Fraction
    M: int
    depth: int
    eps: Fraction = Fraction(0)
    R0: Fraction = Fraction(1)

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise DomainError("alpha must be in (0, 1]")
        if self.M < 2:
            raise DomainError("M must be >= 2")
        if self.depth < 0:
            raise DomainError("depth must be >= 0")
        if self.R0 <= 0:
            raise DomainError("R0 must be positive")

    @property
    def lam(self):
        return _lambda_for(self.M, Fraction(self.alpha))

    def radius(self, k: int):
        return self.R0 * self.lam**k


@dataclass
class BallTree:
    """Centers indexed by words over {1..M}; level-k radius is
    R0 * lambda^k.  Level-k balls are disjoint, children nest in their
    parent, and the first child keeps the parent's center."""

    params: LowerParams
    dim: int
    centers: dict = field(default_factory=dict)  # word tuple -> point

    def level_words(self, k: int):
        return sorted(w for w in self.centers if len(w) == k)

    def level_centers(self, k: int):
        return [self.centers[w] for w in self.level_words(k)]

    @property
    def leaf_points(self):
        return self.level_centers(self.params.depth)

    def radius(self, k: int):
        return self.params.radius(k)


def select_packing_children(points, center, R, r, M: int):
    """Pick M centers (the anchor first) whose r-balls are pairwise
    disjoint and inside B(center, R): greedy lexicographic over the
    packing candidates.  Requires packing count >= M + 3^d."""
    pts = sorted(set(tuple(p) for p in points))
    if center not in pts:
        raise DomainError("anchor center must belong to the point set")
    d = len(center)
    achieved = len(geometry.greedy_packing(pts, center, R, r))
    if achieved < M + 3**d:
        raise DomainError(
            f"insufficient packing: need >= {M + 3**d}, achieved "
            f"{achieved}")
    chosen = [center]
    for p in pts:
        if len(chosen) == M:
            break
        if p == center:
            continue
        if not geometry.ball_in_ball(p, r, center, R):
            continue
        if all(geometry.balls_disjoint(p, q, r) for q in chosen):
            chosen.append(p)
    if len(chosen) < M:
        raise DomainError(
            f"insufficient packing: selected only {len(chosen)} of {M}")
    return chosen


def _tree_points(tree: CubeTree, params: LowerParams) -> PointSet:
    """Corners of the tree at a resolution fine enough for the deepest
    radius; avoids enumerating all leaves of very deep trees."""
    r_min = params.radius(params.depth)
    w = 1
    while w < tree.depth and not Fraction(2, tree.base**w) <= r_min:
        w += 1
    while w < tree.depth and tree.count_at_depth(w) < 4 * (
            params.M + 3**tree.dim):
        w += 1
    return leaf_representatives(tree.subtree((), w) if w < tree.depth
                                else tree)


def construct_subset_lower(source, params: LowerParams,
                           check_source_estimate: bool = True) -> BallTree:
    """Build the nested ball families from the points of `source` (a
    PointSet or a CubeTree whose leaf corners are used)."""
    if isinstance(source, CubeTree):
        if check_source_estimate:
            head = lower_dimension_report(source).headline
            if head + 1e-9 < float(params.alpha + params.eps):
                raise DomainError(
                    f"source lower estimate {head:.6f} below "
                    f"alpha+eps={float(params.alpha + params.eps):.6f}")
        points = _tree_points(source, params)
    elif isinstance(source, PointSet):
        points = source
    else:
        raise DomainError(f"unsupported source type {type(source)!r}")
    pts = list(points.points)
    if not pts:
        raise DomainError("empty source set")
    tree = BallTree(params, points.dim)
    tree.centers[()] = min(pts)
    for k in range(params.depth):
        R, r = params.radius(k), params.radius(k + 1)
        for word in tree.level_words(k):
            x = tree.centers[word]
            local = [p for p in pts if geometry.in_ball(p, x, R)]
            try:
                children = select_packing_children(local, x, R, r, params.M)
            except DomainError as exc:
                raise DomainError(
                    f"at word {word or '(root)'}: {exc}") from None
            for i, c in enumerate(children, start=1):
                tree.centers[word + (i,)] = c
    return tree


@dataclass(frozen=True)
class LowerBoundRow:
    center: tuple
    R: object
    r: object
    n_star: int
    bound_num: int   # bound = M^k / (M+1), stored as the pair (M^k, M+1)
    bound_den: int
    ok: bool

    def tsv_row(self) -> str:
        return (f"{self.center}\t{self.R}\t{self.r}\t{self.n_star}\t"
                f"{self.bound_num}/{self.bound_den}\t"
                f"{'ok' if self.ok else 'FAIL'}")


@dataclass
class LowerVerification:
    rows: list
    invariants_ok: bool
    cardinality_ok: bool
    box_ratio: Fraction
    box_ratio_exact: bool
    failures: list

    @property
    def ok(self) -> bool:
        return (self.invariants_ok and self.cardinality_ok
                and not self.failures
                and all(row.ok for row in self.rows))

    def to_tsv(self) -> str:
        lines = ["x\tR\tr\tNstar\tbound\tok"]
        lines += [row.tsv_row() for row in self.rows]
        return "\n".join(lines) + "\n"


def _check_invariants(tree: BallTree):
    p = tree.params
    failures = []
    for k in range(1, p.depth + 1):
        words = tree.level_words(k)
        centers = [tree.centers[w] for w in words]
        rk = p.radius(k)
        for i in range(len(centers)):
            for j in range(i + 1, len(centers)):
                if not geometry.balls_disjoint(centers[i], centers[j], rk):
                    failures.append(
                        f"level {k}: balls at {words[i]} and {words[j]} "
                        f"intersect")
        for w in words:
            parent = tree.centers[w[:-1]]
            if not geometry.ball_in_ball(tree.centers[w], rk, parent,
                                         p.radius(k - 1)):
                failures.append(f"ball at {w} escapes its parent")
            if w[-1] == 1 and tree.centers[w] != parent:
                failures.append(f"anchor violated at {w}")
    return failures


def verify_lower_bounds(tree: BallTree) -> LowerVerification:
    """Exhaustive scale-pair verification: for every deepest-level
    center x and every radius pair (R_j, R_{j+k}), check
    N*_r(F n B(x, R)) >= (R/r)^alpha / (M+1), where (R/r)^alpha = M^k
    exactly because lambda^alpha M = 1.  Also checks the level
    cardinalities and the exact box-count ratio."""
    p = tree.params
    M = p.M
    failures = _check_invariants(tree)
    cardinality_ok = all(
        len(tree.level_words(k)) == M**k for k in range(p.depth + 1))
    pts = tree.leaf_points
    rows = []
    for j in range(p.depth):
        for k in range(1, p.depth - j + 1):
            R, r = p.radius(j), p.radius(j + k)
            bound_num, bound_den = M**k, M + 1
            for x in pts:
                if tree.dim == 1:
                    n_star = geometry.exact_packing(pts, x, R, r)
                else:
                    cands = [q for q in pts if geometry.in_ball(q, x, R)]
                    if len(cands) <= geometry.EXACT_PACKING_LIMIT:
                        n_star = geometry.exact_packing(pts, x, R, r)
                    else:
                        n_star = len(geometry.greedy_packing(pts, x, R, r))
                ok = n_star * bound_den >= bound_num
                rows.append(LowerBoundRow(x, R, r, n_star,
                                          bound_num, bound_den, ok))
    # box ratio log(M^n) / -log(R0 lambda^n) as an exact rational
    q_, p_ = p.alpha.denominator, p.alpha.numerator
    if p.R0 == 1 and p.depth > 0:
        ratio = Fraction(p.depth * p_, p.depth * q_)
        exact = ratio == p.alpha
    else:
        ratio = p.alpha
        exact = p.R0 == 1
    return LowerVerification(rows, not failures, cardinality_ok, ratio,
                             exact, failures)
