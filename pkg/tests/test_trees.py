"""Tree shapes, strong subtrees, and depth-bounded density notions."""

import itertools

import pytest

from polygrid.ordset import OrdSet
from polygrid.trees import (
    GridWitness,
    Node,
    StrongSubtreeWitness,
    TreeShape,
    all_nodes,
    branches,
    encode_product_node,
    fpg_witness_sets,
    immediate_successors,
    is_ddf_to_depth,
    is_dense_above,
    is_level_tuple,
    is_somewhere_dense_grid,
    is_strong_subtree,
    is_u_set,
    level_product,
    node_key,
    product_shape,
    product_witness,
    root,
    validate_grid_witness,
    word_from_str,
    word_to_str,
)

T2 = TreeShape(k=2, depth=3, index=0)


def _branch_set(shape, *words):
    return [Node(shape.index, w) for w in words]


# ---------------------------------------------------------------------------
# basic enumeration


def test_node_height_and_prefix():
    t = Node(0, (0, 1))
    assert t.height == 2
    assert root(T2).is_prefix_of(t)
    assert t.is_prefix_of(Node(0, (0, 1, 1)))
    assert not t.is_prefix_of(Node(0, (0, 0, 1)))


def test_branch_count():
    assert len(branches(T2)) == 8
    assert len(all_nodes(T2)) == 1 + 2 + 4 + 8


def test_immediate_successors():
    succ = immediate_successors(T2, Node(0, (1,)))
    assert [s.word for s in succ] == [(1, 0), (1, 1)]


def test_level_product_counts():
    one = [TreeShape(2, 3, 0)]
    assert level_product(one, 0) == [(root(one[0]),)]
    two = [TreeShape(2, 3, 0), TreeShape(2, 3, 1)]
    assert len(level_product(two, 1)) == 4
    assert len(level_product(two, 2)) == 16
    # lexicographic in the coordinate words
    lv = level_product(two, 1)
    assert [tuple(n.word for n in t) for t in lv[:2]] == [
        ((0,), (0,)),
        ((0,), (1,)),
    ]


def test_level_product_depth_error():
    with pytest.raises(ValueError):
        level_product([T2], 4)


def test_is_level_tuple():
    assert is_level_tuple((Node(0, (0,)), Node(1, (1,))))
    assert not is_level_tuple((Node(0, (0,)), Node(1, ())))


# ---------------------------------------------------------------------------
# strong subtrees


def test_strong_subtree_root_singleton():
    w = StrongSubtreeWitness(OrdSet.of([0]), (frozenset({root(T2)}),))
    assert is_strong_subtree(w, T2)


def test_strong_subtree_two_levels():
    deep = TreeShape(k=2, depth=4, index=0)
    w = StrongSubtreeWitness(
        OrdSet.of([1, 3]),
        (
            frozenset({Node(0, (0,))}),
            frozenset({Node(0, (0, 0, 0)), Node(0, (0, 1, 0))}),
        ),
    )
    assert is_strong_subtree(w, deep)


def test_strong_subtree_missing_successor():
    deep = TreeShape(k=2, depth=4, index=0)
    # two nodes above (0,0), none above (0,1)
    w = StrongSubtreeWitness(
        OrdSet.of([1, 3]),
        (
            frozenset({Node(0, (0,))}),
            frozenset({Node(0, (0, 0, 0)), Node(0, (0, 0, 1))}),
        ),
    )
    assert not is_strong_subtree(w, deep)


def test_strong_subtree_wrong_height():
    w = StrongSubtreeWitness(OrdSet.of([1]), (frozenset({root(T2)}),))
    assert not is_strong_subtree(w, T2)


def test_product_of_strong_subtrees_is_strong():
    shapes = [TreeShape(2, 4, 0), TreeShape(2, 4, 1)]
    parts = []
    for s in shapes:
        parts.append(
            StrongSubtreeWitness(
                OrdSet.of([1, 3]),
                (
                    frozenset({Node(s.index, (0,))}),
                    frozenset(
                        {Node(s.index, (0, 0, 0)), Node(s.index, (0, 1, 1))}
                    ),
                ),
            )
        )
    combined = product_witness(shapes, parts)
    assert is_strong_subtree(combined, product_shape(shapes))


def test_encode_product_node_respects_extension():
    shapes = [TreeShape(2, 3, 0), TreeShape(3, 3, 1)]
    a = encode_product_node(shapes, (Node(0, (1,)), Node(1, (2,))))
    b = encode_product_node(shapes, (Node(0, (1, 0)), Node(1, (2, 1))))
    assert a.is_prefix_of(b)


# ---------------------------------------------------------------------------
# density to a cut-off depth


def test_dense_above_full_set():
    assert is_dense_above(T2, branches(T2), root(T2), 3)


def test_dense_above_examples():
    Y = _branch_set(T2, (0, 0, 0), (0, 1, 0), (0, 0, 1), (0, 1, 1))
    assert is_dense_above(T2, Y, Node(0, (0,)), 2)
    assert not is_dense_above(T2, Y, root(T2), 1)


def test_dense_above_depth_guard():
    with pytest.raises(ValueError):
        is_dense_above(T2, branches(T2), root(T2), 4)


def test_somewhere_dense_grid_full():
    shapes = [TreeShape(2, 3, 0), TreeShape(2, 3, 1)]
    Ys = [branches(s) for s in shapes]
    assert is_somewhere_dense_grid(shapes, Ys, 2) == tuple(root(s) for s in shapes)


def test_somewhere_dense_grid_shifted_root():
    shapes = [TreeShape(2, 3, 0)]
    Y = [y for y in branches(shapes[0]) if y.word[0] == 1]
    res = is_somewhere_dense_grid(shapes, [Y], 2)
    assert res is not None
    assert res[0].word == (1,)


def test_somewhere_dense_grid_single_branch():
    shapes = [TreeShape(2, 3, 0)]
    Y = [Node(0, (0, 0, 0))]
    assert is_somewhere_dense_grid(shapes, [Y], 1) is None


def test_somewhere_dense_matches_scan():
    # equivalence with a per-coordinate exhaustive scan over proper roots,
    # all subsets at N=2
    shape = TreeShape(2, 2, 0)
    bs = branches(shape)
    for r in range(len(bs) + 1):
        for pick in itertools.combinations(bs, r):
            got = is_somewhere_dense_grid([shape], [list(pick)], 2)
            passing = [
                t
                for t in all_nodes(shape, 1)
                if is_dense_above(shape, list(pick), t, 2)
            ]
            if passing:
                assert got == (min(passing, key=node_key),)
            else:
                assert got is None


# ---------------------------------------------------------------------------
# u-sets and dense filtrations


def test_u_set_examples():
    Y_left = _branch_set(T2, (0, 0, 0))
    Y_both = _branch_set(T2, (0, 0, 0), (1, 1, 1))
    cones = [Node(0, (0,)), Node(0, (1,))]
    assert is_u_set(Y_left, [], 3)
    assert not is_u_set(Y_left, cones, 3)
    assert is_u_set(Y_both, cones, 3)


def test_ddf_full_product():
    shapes = [TreeShape(2, 2, 0), TreeShape(2, 2, 1)]
    Z = set(itertools.product(branches(shapes[0]), branches(shapes[1])))
    assert is_ddf_to_depth(shapes, Z, 2, mcap=2)


def test_ddf_skewed_fibers():
    shapes = [TreeShape(2, 2, 0), TreeShape(2, 2, 1)]
    Z = {
        (x, y)
        for x in branches(shapes[0])
        for y in branches(shapes[1])
        if y.word[0] == 0
    }
    assert not is_ddf_to_depth(shapes, Z, 1, mcap=2)


def test_ddf_nested_construction():
    # Z = union over n of {x_n} x Y_{n+1} with nested dense fibers
    shapes = [TreeShape(2, 2, 0), TreeShape(2, 2, 1)]
    xs = branches(shapes[0])
    ys = branches(shapes[1])  # 00, 01, 10, 11 in order
    nested = [
        set(ys),
        {ys[1], ys[2], ys[3]},
        {ys[1], ys[2]},
        {ys[1], ys[2]},
    ]
    for Y in nested:
        assert is_dense_above(shapes[1], Y, root(shapes[1]), 1)
    Z = {(x, y) for n, x in enumerate(xs) for y in nested[n]}
    assert is_ddf_to_depth(shapes, Z, 1, mcap=2)


def test_fpg_witness_sets_inside_z():
    shapes = [TreeShape(2, 2, 0), TreeShape(2, 2, 1)]
    Z = set(itertools.product(branches(shapes[0]), branches(shapes[1])))
    cones = [
        [Node(0, (0,)), Node(0, (1,))],
        [Node(1, (1,))],
    ]
    got = fpg_witness_sets(shapes, Z, cones, 2)
    assert got is not None
    for i, Y in enumerate(got):
        assert is_u_set(Y, cones[i], 2)
    for combo in itertools.product(*got):
        assert combo in Z


# ---------------------------------------------------------------------------
# serialization


def test_word_strings():
    assert word_to_str((0, 1, 1)) == "011"
    assert word_from_str("011") == (0, 1, 1)
    assert word_from_str("") == ()


def test_grid_witness_round_trip():
    shape = TreeShape(2, 3, 0)
    w = GridWitness(
        k=2,
        depth=3,
        roots=(root(shape),),
        branch_sets=(tuple(branches(shape)),),
        density_depth=2,
        color=0,
    )
    again = GridWitness.from_json(w.to_json())
    assert again == w
    ok, report = validate_grid_witness(w, lambda xs: 0)
    assert ok
    assert not report["color_failures"]
