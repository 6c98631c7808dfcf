"""Fiber colorings, the recursion, finite Ramsey thresholds, product bounds."""

import itertools

import pytest

from polygrid.antiramsey import (
    Arena,
    BudgetError,
    TupleColor,
    c1,
    c_full,
    check_difference_lemma,
    cn,
    find_bad_coloring,
    grid_coloring,
    m_seq,
    ramsey_m_star,
    star,
    verify_product_bound,
)
from polygrid.ordset import OrdSet
from polygrid.trees import Node, TreeShape, branches

ID1 = Arena(size=10, dim=1, mode="identity")
ID2 = Arena(size=10, dim=2, mode="identity")


def _cn_oracle(arena: Arena, elems: tuple[int, ...]) -> int:
    # straight-line re-implementation of the recursion, no shared code paths
    xs = list(elems)
    while len(xs) > 2:
        beta = xs[-1]
        xs = sorted(arena.embed(beta, x) for x in xs[:-1])
    return c1(arena, xs[0], xs[1])


# ---------------------------------------------------------------------------
# fibers and the recursion


def test_c1_identity_values():
    assert c1(ID1, 2, 9) == 2
    assert c1(ID1, 0, 1) == 0


def test_c1_precondition():
    with pytest.raises(ValueError):
        c1(ID1, 9, 2)
    with pytest.raises(ValueError):
        c1(ID1, 3, 3)


def test_c1_injective_per_fiber_seeded():
    arena = Arena(size=8, dim=1, mode="seeded", seed=11)
    for beta in range(1, 8):
        vals = [c1(arena, a, beta) for a in range(beta)]
        assert len(set(vals)) == beta


def test_cn_identity_values():
    assert cn(ID1, OrdSet.of([2, 9])) == 2
    assert cn(ID2, OrdSet.of([2, 5, 9])) == 2


def test_cn_arity_error():
    with pytest.raises(ValueError):
        cn(ID1, OrdSet.of([1, 2, 3]))


def test_cn_matches_independent_recursion():
    # all triples from {0..7}, identity and seeded arenas
    for arena in (
        Arena(size=8, dim=2, mode="identity"),
        Arena(size=8, dim=2, mode="seeded", seed=3),
        Arena(size=8, dim=2, mode="seeded", seed=17),
    ):
        for triple in itertools.combinations(range(8), 3):
            assert cn(arena, OrdSet.of(triple)) == _cn_oracle(arena, triple)


def test_star_values():
    assert star(ID1, OrdSet.of([4, 7])) == 4
    assert star(ID2, OrdSet.of([2, 5, 9])) == 2


def test_star_membership_and_not_max():
    for arena in (ID2, Arena(size=8, dim=2, mode="seeded", seed=5)):
        M = arena.size
        for triple in itertools.combinations(range(min(M, 8)), 3):
            s = star(arena, OrdSet.of(triple))
            assert s in triple
            assert s != max(triple)


# ---------------------------------------------------------------------------
# the compound coloring


def test_c_full_examples():
    assert c_full(ID1, (3, 3)) == TupleColor(2, 0)
    assert c_full(ID1, (3, 7)) == TupleColor(0, 3)
    assert c_full(ID1, (7, 3)) == TupleColor(1, 3)


def test_c_full_diagonal_iff_repeat():
    for vec in itertools.product(range(5), repeat=3):
        col = c_full(Arena(size=5, dim=2, mode="identity"), vec)
        assert (col == TupleColor(3, 0)) == (len(set(vec)) < 3)


def test_c_full_slot_is_star_position():
    arena = Arena(size=8, dim=2, mode="seeded", seed=9)
    for vec in itertools.permutations(range(8), 3):
        col = c_full(arena, vec)
        assert col.slot < 3
        a = OrdSet.of(vec)
        assert vec[col.slot] == star(arena, a)


# ---------------------------------------------------------------------------
# Ramsey thresholds


def test_ramsey_m_star_one_color():
    assert ramsey_m_star(1, 1) == 3


def test_ramsey_m_star_two_colors():
    assert ramsey_m_star(1, 2) == 6


def test_ramsey_budget_error():
    with pytest.raises(BudgetError) as exc:
        ramsey_m_star(2, 2, budget=2_000)
    assert exc.value.nodes_used >= 2_000
    assert exc.value.best_lower_bound is not None


def test_bad_coloring_below_threshold():
    col = find_bad_coloring(1, 5, 2)
    assert col is not None
    # no monochromatic triple, re-checked directly
    for triple in itertools.combinations(range(5), 3):
        seen = {col[pair] for pair in itertools.combinations(triple, 2)}
        assert len(seen) > 1
    assert find_bad_coloring(1, 6, 2) is None


def test_m_seq_values():
    assert m_seq(1, 0) == 1
    assert m_seq(1, 1) == 6
    assert m_seq(1, 2) == 12


# ---------------------------------------------------------------------------
# the product bound


def test_product_bound_singletons():
    ok, census = verify_product_bound(ID1, [OrdSet.of([4]), OrdSet.of([7])], 0)
    assert ok
    assert sum(census.values()) == 1


def test_product_bound_k1():
    sides = [OrdSet.of(range(6)), OrdSet.of(range(6))]
    ok, census = verify_product_bound(ID1, sides, 1)
    assert ok
    assert len(census) >= 2


def test_product_bound_k2_identity():
    arena = Arena(size=24, dim=1, mode="identity")
    sides = [OrdSet.of(range(12)), OrdSet.of(range(12, 24))]
    ok, census = verify_product_bound(arena, sides, 2)
    assert ok
    assert len(census) > 2


def test_product_bound_size_guard():
    with pytest.raises(ValueError):
        verify_product_bound(ID1, [OrdSet.of([1]), OrdSet.of([2])], 1)


# ---------------------------------------------------------------------------
# the difference lemma


def test_difference_lemma_identity_small():
    report = check_difference_lemma(Arena(size=6, dim=1, mode="identity"))
    assert report.ok
    assert report.eligible_pairs > 0


def test_difference_pairs_share_max():
    # eligibility forces max(a) = max(b): the removed element is never max
    arena = Arena(size=6, dim=2, mode="seeded", seed=2)
    count = 0
    for a in itertools.combinations(range(6), 3):
        for b in itertools.combinations(range(6), 3):
            sa, sb = OrdSet.of(a), OrdSet.of(b)
            ra, rb = star(arena, sa), star(arena, sb)
            if ra == rb:
                continue
            if set(a) - {ra} != set(b) - {rb}:
                continue
            count += 1
            assert max(a) == max(b)
            assert cn(arena, sa) != cn(arena, sb)
    assert count > 0


# ---------------------------------------------------------------------------
# the grid coloring


def _enum(shape, offset=0):
    return {y: offset + i for i, y in enumerate(branches(shape))}


def test_grid_coloring_singletons():
    enums = [
        {Node(0, (0,)): 3},
        {Node(1, (1,)): 7},
    ]
    g = grid_coloring(ID1, enums)
    assert len(g.census()) == 1


def test_grid_coloring_rejects_collisions():
    enums = [
        {Node(0, (0,)): 3, Node(0, (1,)): 3},
        {Node(1, (0,)): 0},
    ]
    with pytest.raises(ValueError):
        grid_coloring(ID1, enums)


def test_grid_coloring_census_beats_two():
    arena = Arena(size=24, dim=1, mode="identity")
    shapes = [TreeShape(12, 1, 0), TreeShape(12, 1, 1)]
    enums = [_enum(shapes[0]), _enum(shapes[1], offset=12)]
    g = grid_coloring(arena, enums)
    assert len(g.census()) > 2


# ---------------------------------------------------------------------------
# serialization


def test_arena_round_trip():
    arena = Arena(size=8, dim=2, mode="seeded", seed=21)
    again = Arena.from_json(arena.to_json())
    for triple in itertools.combinations(range(8), 3):
        assert cn(arena, OrdSet.of(triple)) == cn(again, OrdSet.of(triple))
