from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from badicdim.core import (BadicCube, CubeTree, DomainError, PointSet,
                           SetFormatError, Window, WindowedSet,
                           leaf_representatives, read_bdt, read_wdt,
                           subdivide, write_bdt, write_wdt)
from badicdim.generators import random_branching_tree


def test_cube_basics():
    c = BadicCube(3, 2, ((0, 2), (1, 1)))
    assert c.dim == 2
    assert c.side() == Fraction(1, 9)
    assert c.corner() == (Fraction(2, 9), Fraction(4, 9))
    assert c.path == ((0, 1), (2, 1))
    assert BadicCube.from_path(3, 2, c.path) == c


def test_cube_validation():
    with pytest.raises(DomainError):
        BadicCube(3, 2, ((0, 3), (1, 1)))  # digit out of range
    with pytest.raises(DomainError):
        BadicCube(3, 2, ((0,), (1, 1)))  # length mismatch
    with pytest.raises(DomainError):
        BadicCube(1, 0, ())  # base too small


def test_subdivide():
    root = BadicCube(2, 0, ((), ()))
    kids = subdivide(root)
    assert len(kids) == 4
    assert kids[0].corner() == (0, 0)
    assert kids[-1].corner() == (Fraction(1, 2), Fraction(1, 2))


def test_full_tree_counts():
    t = CubeTree.full(2, 1, 30)
    assert t.leaf_count == 2**30  # exact, via shared subtrees
    assert t.count_at_depth(7) == 128


def test_digit_rule_tree():
    t = CubeTree.from_digit_rule(3, 1, 4, [(0,), (2,)])
    assert t.leaf_count == 16
    assert t.node_at(((1,),)) is None
    assert t.node_at(((0,), (2,))) is not None


def test_from_leaves_and_levels():
    paths = [((0,), (0,)), ((0,), (1,)), ((1,), (1,))]
    t = CubeTree.from_leaves(2, 1, 2, paths)
    assert t.leaf_count == 3
    layers = list(t.levels())
    assert len(layers) == 3
    assert list(layers[0].values()) == [()]


def test_contains_and_union():
    a = CubeTree.from_leaves(2, 1, 2, [((0,), (0,))])
    b = CubeTree.from_leaves(2, 1, 2, [((1,), (1,))])
    u = a.union(b)
    assert u.leaf_count == 2
    assert u.contains_tree(a) and u.contains_tree(b)
    assert not a.contains_tree(u)


def test_subtree_truncation():
    t = CubeTree.full(2, 1, 5)
    s = t.subtree(((0,),), 3)
    assert s.depth == 3 and s.leaf_count == 8
    with pytest.raises(DomainError):
        t.subtree(((0,),), 5)


def test_rebase_and_debase_roundtrip():
    t = random_branching_tree(2, 1, 8, 2, seed=5)
    r = t.rebase(2)
    assert r.base == 4 and r.depth == 4
    assert r.leaf_count == t.leaf_count
    back = r.debase(2)
    assert back == t
    with pytest.raises(DomainError):
        r.debase(3)


def test_rebase_counts_match_full():
    t = CubeTree.full(2, 1, 12)
    r = t.rebase(4)
    assert r.base == 16 and r.depth == 3 and r.leaf_count == 2**12


def test_leaf_representatives():
    t = CubeTree.from_digit_rule(3, 1, 2, [(0,), (2,)])
    pts = leaf_representatives(t)
    assert [p[0] for p in pts.points] == [
        Fraction(0), Fraction(2, 9), Fraction(2, 3), Fraction(8, 9)]


def test_windowed_set_disjointness():
    t = CubeTree.full(2, 1, 1)
    with pytest.raises(DomainError):
        WindowedSet(2, 1, [Window((0,), 1, t), Window((1,), 1, t)])
    ws = WindowedSet(2, 1, [Window((0,), 1, t), Window((4,), 1, t)])
    assert len(ws) == 2


def test_bdt_roundtrip_fixed():
    t = CubeTree.from_digit_rule(3, 1, 3, [(0,), (2,)])
    text = write_bdt(t)
    assert text.splitlines()[0] == "bdt b=3 d=1 n=3"
    assert read_bdt(text) == t


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10**6),
       st.integers(min_value=2, max_value=3),
       st.integers(min_value=1, max_value=5))
def test_bdt_roundtrip_random(seed, base, depth):
    t = random_branching_tree(base, 1, depth, base, seed)
    assert read_bdt(write_bdt(t)) == t


def test_bdt_parse_errors_report_lines():
    with pytest.raises(SetFormatError) as e:
        read_bdt("")
    assert e.value.line_no == 1
    with pytest.raises(SetFormatError) as e:
        read_bdt("bdt b=2 d=1 n=2\n01\n0")
    assert e.value.line_no == 3
    with pytest.raises(SetFormatError) as e:
        read_bdt("bdt b=2 d=1 n=2\n02")
    assert e.value.line_no == 2
    with pytest.raises(SetFormatError) as e:
        read_bdt("bdt b=2 d=1 n=1\n0\n0")
    assert e.value.line_no == 3  # duplicate leaf


def test_wdt_roundtrip():
    t1 = CubeTree.full(2, 1, 2)
    t2 = CubeTree.from_leaves(2, 1, 2, [((0,), (1,))])
    ws = WindowedSet(2, 1, [Window((0,), 1, t1), Window((8,), 1, t2)])
    text = write_wdt(ws)
    back = read_wdt(text)
    assert len(back) == 2
    assert back.windows[0].offset == (0,)
    assert back.windows[1].tree == t2
    assert write_wdt(back) == text


def test_wdt_parse_errors():
    with pytest.raises(SetFormatError):
        read_wdt("wdt b=2 d=1 windows=2\nwindow off=0 m=1\n00\n")
    with pytest.raises(SetFormatError):
        read_wdt("not a header\n")


def test_point_set():
    ps = PointSet.of(2, 1, [(Fraction(1, 2),), (0,), (Fraction(1, 2),)])
    assert len(ps) == 2
    with pytest.raises(DomainError):
        PointSet.of(2, 2, [(0,)])


def test_structure_sharing_is_compact():
    # a full depth-30 binary tree must be one node chain via interning
    t = CubeTree.full(2, 1, 30)
    seen = set()
    node = t.root
    while node.children:
        seen.add(id(node))
        assert all(c is node.children[0][1] for _, c in node.children)
        node = node.children[0][1]
    assert len(seen) == 30
