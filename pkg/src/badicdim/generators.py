"""Canonical set generators with known finite-scale dimension values,
plus independent brute-force oracles for the property tests.

Oracle size guards are hard errors, never silent fallbacks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import geometry
from .core import (CubeNode, CubeTree, DomainError, Window, WindowedSet,
                   _Interner, _LEAF, all_keys)

FAMILIES = ("digit-cantor", "full-cube", "lattice-window", "integer-cantor",
            "one-over-k", "prop5-union", "random-branching")

ORACLE_LEAF_LIMIT = 300_000


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family '{self.family}'; "
                              f"choose from {FAMILIES}")


def digit_cantor(base: int, dim: int, digits, depth: int) -> CubeTree:
    """Self-similar set with per-level digit restriction.  `digits` may
    be a set of single digits (applied to every axis) or of d-tuples."""
    digits = list(digits)
    if digits and not isinstance(digits[0], tuple):
        keys = [k for k in all_keys(base, dim)
                if all(d in digits for d in k)]
    else:
        keys = digits
    return CubeTree.from_digit_rule(base, dim, depth, keys)


def full_cube(base: int, dim: int, depth: int) -> CubeTree:
    return CubeTree.full(base, dim, depth)


def _chain_node(depth: int, dim: int) -> CubeNode:
    zero = tuple(0 for _ in range(dim))
    node = _LEAF
    for _ in range(depth):
        node = CubeNode(((zero, node),))
    return node


def _window_tree(base: int, dim: int, m: int, cell_keys, chain: int
                 ) -> CubeTree:
    """Tree over a side-b^m window: m levels of lattice structure given
    by `cell_keys`, then `chain` levels of single-corner chains so each
    occupied unit cell holds one point (local star estimate 0)."""
    node = _chain_node(chain, dim)
    for _ in range(m):
        node = CubeNode(tuple((k, node) for k in sorted(cell_keys)))
    return CubeTree(base, dim, m + chain, node)


def lattice_window(base: int, dim: int, m: int, chain: int = 4,
                   offset=None) -> WindowedSet:
    """Window [0, b^m)^d containing every integer-corner unit cell:
    local star estimate 0, global estimate d at window scales."""
    tree = _window_tree(base, dim, m, all_keys(base, dim), chain)
    off = tuple(0 for _ in range(dim)) if offset is None else tuple(offset)
    return WindowedSet(base, dim, [Window(off, m, tree)])


def integer_cantor(base: int, dim: int, m: int, digits, chain: int = 4,
                   offset=None) -> WindowedSet:
    """Integers whose base-b digits lie in a fixed digit set, one point
    per occupied unit cell: global star estimate log(#digits)/log(b) at
    window scales, local estimate 0."""
    digits = sorted(set(digits))
    if not digits or any(not 0 <= dig < base for dig in digits):
        raise DomainError("bad integer-cantor digit set")
    keys = [k for k in all_keys(base, dim) if all(d in digits for d in k)]
    tree = _window_tree(base, dim, m, keys, chain)
    off = tuple(0 for _ in range(dim)) if offset is None else tuple(offset)
    return WindowedSet(base, dim, [Window(off, m, tree)])


def one_over_k(count: int, depth: int) -> CubeTree:
    """{1/k : 1 <= k <= count} as a depth-n binary tree (b=2, d=1)."""
    if count < 1:
        raise DomainError("need count >= 1")
    scale = 2**depth
    leaves = set()
    for k in range(1, count + 1):
        idx = scale // k
        if idx >= scale:  # the point 1 lives in the top cube's closure
            idx = scale - 1
        leaves.add(idx)
    paths = []
    for idx in leaves:
        digs = [(idx >> (depth - 1 - j)) & 1 for j in range(depth)]
        paths.append(tuple((dig,) for dig in digs))
    return CubeTree.from_leaves(2, 1, depth, paths)


def prop5_union(base: int, local_digits, global_digits, m: int,
                local_depth: int, chain: int = None) -> WindowedSet:
    """Disjoint union of a digit-restricted Cantor tree in [0,1]^d and a
    digit-restricted integer window: realizes local star estimate
    log|local_digits|/log b strictly below the global estimate
    log|global_digits|/log b.

    The lattice chains must reach the union's finest resolution (the
    Cantor depth), else its cells turn into solid sub-cubes there; hence
    chain defaults to local_depth."""
    dim = 1
    cantor = digit_cantor(base, dim, local_digits, local_depth)
    keys = [k for k in all_keys(base, dim)
            if all(d in sorted(set(global_digits)) for d in k)]
    lattice = _window_tree(base, dim, m, keys,
                           local_depth if chain is None else chain)
    # the integer window sits at base**m: any cube containing both
    # windows captures at most a 1/b fraction of the lattice counts
    windows = [
        Window(tuple(0 for _ in range(dim)), 0, cantor),
        Window((base**m,) + tuple(0 for _ in range(dim - 1)), m, lattice),
    ]
    return WindowedSet(base, dim, windows)


def random_branching_tree(base: int, dim: int, depth: int,
                          max_children: int, seed: int) -> CubeTree:
    """Reproducible pseudo-random tree; every internal node has between
    1 and max_children children."""
    if not 1 <= max_children <= base**dim:
        raise DomainError("need 1 <= max_children <= b^d")
    rng = random.Random(seed)
    keys = all_keys(base, dim)

    def build(level: int) -> CubeNode:
        if level == depth:
            return _LEAF
        n_children = rng.randint(1, max_children)
        picked = sorted(rng.sample(keys, n_children))
        return CubeNode(tuple((k, build(level + 1)) for k in picked))

    return CubeTree(base, dim, depth, build(0))


def generate(spec: GeneratorSpec):
    p = dict(spec.params)
    try:
        if spec.family == "digit-cantor":
            return digit_cantor(p["base"], p.get("dim", 1), p["digits"],
                                p["depth"])
        if spec.family == "full-cube":
            return full_cube(p["base"], p.get("dim", 1), p["depth"])
        if spec.family == "lattice-window":
            return lattice_window(p["base"], p.get("dim", 1), p["m"],
                                  p.get("chain", 4))
        if spec.family == "integer-cantor":
            return integer_cantor(p["base"], p.get("dim", 1), p["m"],
                                  p["digits"], p.get("chain", 4))
        if spec.family == "one-over-k":
            return one_over_k(p["count"], p["depth"])
        if spec.family == "prop5-union":
            return prop5_union(p["base"], p["local_digits"],
                               p["global_digits"], p["m"],
                               p["local_depth"], p.get("chain"))
        if spec.family == "random-branching":
            return random_branching_tree(p["base"], p.get("dim", 1),
                                         p["depth"], p["max_children"],
                                         p.get("seed", 0))
    except KeyError as exc:
        raise DomainError(
            f"family '{spec.family}' missing parameter {exc}") from None
    raise DomainError(f"unknown family '{spec.family}'")


# -- oracles ----------------------------------------------------------


def oracle_exact_hstar(tree: CubeTree, k: int) -> int:
    """Independent H* by flat enumeration over the leaf list: no shared
    counting, no tree pruning.  Size-guarded."""
    if not 1 <= k <= tree.depth:
        raise DomainError(f"k {k} outside 1..{tree.depth}")
    leaves = list(tree.iter_leaf_paths(ORACLE_LEAF_LIMIT))
    best = 0
    for level in range(0, tree.depth - k + 1):
        per_cube = {}
        for path in leaves:
            q = path[:level]
            per_cube.setdefault(q, set()).add(path[:level + k])
        best = max(best, max(len(s) for s in per_cube.values()))
    return best


def oracle_exact_packing(points, center, R, r,
                         limit: int = geometry.EXACT_PACKING_LIMIT) -> int:
    """True maximum packing number (exhaustive / exact sweep)."""
    pts = points.points if hasattr(points, "points") else points
    return geometry.exact_packing(pts, center, R, r, limit)


def oracle_exact_cover(points, center, R, rho,
                       limit: int = geometry.EXACT_PACKING_LIMIT) -> int:
    """True least covering number by rho-balls at arbitrary centers."""
    pts = points.points if hasattr(points, "points") else points
    return geometry.exact_cover(pts, center, R, rho, limit)
