"""The finite Cohen-style poset, dense-set plumbing, and the pipeline."""

import itertools

import pytest

from polygrid.forcing import (
    ColoringOracle,
    Condition,
    DenseStep,
    collapse,
    compatible,
    decide_color,
    join,
    leq,
    matrix_tags,
    meet_dense,
    predense_check,
    run_pipeline,
)
from polygrid.ordset import OrdSet
from polygrid.trees import is_dense_above


def cond(assign, k=2, d=1):
    return Condition.of(k, d, assign)


# ---------------------------------------------------------------------------
# the order


def test_leq_reflexive():
    p = cond({0: ((0,),)})
    assert leq(p, p)


def test_leq_example():
    p = cond({0: ((),)})
    q = cond({0: ((1,),), 3: ((0,),)})
    assert leq(q, p)
    assert not leq(p, q)


def test_leq_incomparable_nodes():
    p = cond({0: ((0,),)})
    q = cond({0: ((1,),)})
    assert not leq(q, p)


def test_compatible_examples():
    assert compatible(cond({0: ((0,),)}), cond({3: ((1,),)}))
    assert compatible(cond({0: ((0,),)}), cond({0: ((0, 1),)}))
    assert not compatible(cond({0: ((0,),)}), cond({0: ((1,),)}))


def _all_conditions(depth=2, indices=(0, 1)):
    ws = [()]
    for length in range(1, depth + 1):
        ws.extend(itertools.product(range(2), repeat=length))
    opts = [None] + [(w,) for w in ws]
    out = []
    for rows in itertools.product(opts, repeat=len(indices)):
        assign = {a: r for a, r in zip(indices, rows) if r is not None}
        out.append(cond(assign))
    return out


def test_order_axioms_exhaustive():
    conds = _all_conditions(depth=1)
    for p in conds:
        assert leq(p, p)
    for p, q in itertools.product(conds, repeat=2):
        if leq(p, q) and leq(q, p):
            assert p == q
    for p, q, r in itertools.product(conds, repeat=3):
        if leq(p, q) and leq(q, r):
            assert leq(p, r)


def test_compatible_iff_join_exists():
    conds = _all_conditions(depth=2)
    for p, q in itertools.product(conds, repeat=2):
        assert compatible(p, q) == compatible(q, p)
        if compatible(p, q):
            j = join(p, q)
            assert leq(j, p) and leq(j, q)
        else:
            with pytest.raises(ValueError):
                join(p, q)


def test_join_is_least():
    conds = _all_conditions(depth=2)
    for p, q in itertools.product(conds, repeat=2):
        if not compatible(p, q):
            continue
        j = join(p, q)
        for r in conds:
            if leq(r, p) and leq(r, q):
                assert leq(r, j)


# ---------------------------------------------------------------------------
# collapse


def test_collapse_relabels():
    p = cond({5: ((0,),), 9: ((1, 1),)})
    assert collapse(p) == (((0,),), ((1, 1),))


def test_collapse_empty():
    assert collapse(Condition.empty(2, 1)) == ()


def test_collapse_order_isomorphic():
    vals = (((0,),), ((1, 0),))
    p = cond({2: vals[0], 7: vals[1]})
    q = cond({0: vals[0], 3: vals[1]})
    assert collapse(p) == collapse(q)


# ---------------------------------------------------------------------------
# deciding colors


def _first_letter(d=1, depth=2):
    return ColoringOracle(
        k=2, d=d, depth=depth, num_colors=2, kind="first-letter"
    )


def test_decide_color_constant():
    oracle = ColoringOracle(
        k=2, d=1, depth=2, num_colors=3, kind="constant", value=2
    )
    q, j = decide_color(Condition.empty(2, 1), OrdSet.of([4]), oracle)
    assert j == 2
    assert q.row(4) == ((0, 0),)


def test_decide_color_respects_forced_prefix():
    p = cond({4: ((1,),)})
    q, j = decide_color(p, OrdSet.of([4]), _first_letter())
    assert j == 1
    assert q.row(4) == ((1, 0),)
    assert leq(q, p)


def test_decide_color_deep_slot_untouched():
    p = cond({4: ((1, 0, 1),)})
    q, j = decide_color(p, OrdSet.of([4]), _first_letter())
    assert q == p
    assert j == 1


def test_decide_color_theta_guard():
    with pytest.raises(ValueError):
        decide_color(
            Condition.empty(2, 1), OrdSet.of([9]), _first_letter(), theta=8
        )


# ---------------------------------------------------------------------------
# predensity


def test_predense_single_member():
    q = cond({0: ((0,),)})
    report = predense_check([q], q, window=[0], depth_bound=2)
    assert report.verdict == "predense"


def test_predense_depth_one_fan():
    q = Condition.empty(2, 1)
    members = [cond({0: ((0,),)}), cond({0: ((1,),)})]
    report = predense_check(members, q, window=[0], depth_bound=2)
    assert report.verdict == "predense"


def test_predense_counterexample():
    q = Condition.empty(2, 1)
    members = [cond({0: ((0,),)})]
    report = predense_check(members, q, window=[0], depth_bound=1)
    assert report.verdict == "counterexample"
    r = report.counterexample
    assert r is not None
    assert all(not compatible(r, m) for m in members)


def test_predense_budget():
    q = Condition.empty(2, 1)
    members = [cond({0: ((0,),)})]
    report = predense_check(members, q, window=[0, 1], depth_bound=2, budget=2)
    assert report.verdict == "budget"
    assert report.counterexample is None


# ---------------------------------------------------------------------------
# meeting dense sets


def test_meet_dense_empty_schedule():
    start = Condition.empty(2, 1)
    assert meet_dense([], start) == [start]


def test_meet_dense_one_step():
    start = Condition.empty(2, 1)
    step = DenseStep(
        name="index 0 to depth 1",
        extend=lambda p: p.with_slot(0, 0, (0,)),
        member=lambda p: p.row(0) is not None and len(p.row(0)[0]) >= 1,
    )
    chain = meet_dense([step], start)
    assert len(chain) == 2
    assert chain[1].row(0) == ((0,),)


def test_meet_dense_rejects_non_extension():
    start = cond({0: ((0,),)})
    bad = DenseStep(
        name="clobber",
        extend=lambda p: cond({0: ((1,),)}),
        member=lambda p: True,
    )
    with pytest.raises(ValueError):
        meet_dense([bad], start)


# ---------------------------------------------------------------------------
# tags


def test_matrix_tags_prefix_free_completions():
    tags = matrix_tags(2, 8)
    assert tags[0] == ()
    assert all(t[-1] != 0 for t in tags[1:])
    assert len(set(tags)) == 8
    # first k**m tags are exactly the words of length <= m
    assert all(len(t) <= 1 for t in tags[:2])
    assert all(len(t) <= 2 for t in tags[:4])
    assert all(len(t) <= 3 for t in tags)
    # leftmost completions to a common depth stay distinct
    done = {t + (0,) * (3 - len(t)) for t in tags}
    assert len(done) == 8


# ---------------------------------------------------------------------------
# the pipeline


def _external_check(witness, oracle):
    shapes = witness.shapes()
    for i, Y in enumerate(witness.branch_sets):
        assert is_dense_above(
            shapes[i], Y, witness.roots[i], witness.density_depth
        )
    for combo in itertools.product(*witness.branch_sets):
        words = tuple(x.word[: oracle.depth] for x in combo)
        assert oracle.color(words) == witness.color


def test_pipeline_constant_d1():
    oracle = ColoringOracle(
        k=2, d=1, depth=2, num_colors=2, kind="constant", value=1
    )
    res = run_pipeline(oracle, density_depth=3, width=4)
    assert res.ok
    assert res.witness.color == 1
    assert len(res.witness.branch_sets[0]) == 4
    _external_check(res.witness, oracle)


def test_pipeline_first_letter_root():
    oracle = _first_letter()
    res = run_pipeline(oracle, density_depth=3, width=4)
    assert res.ok
    w = res.witness
    assert w.roots[0].word[0] == w.color
    _external_check(w, oracle)


def test_pipeline_seeded_d2():
    oracle = ColoringOracle(
        k=2, d=2, depth=2, num_colors=2, kind="seeded", seed=7
    )
    res = run_pipeline(oracle, density_depth=3, width=8)
    assert res.ok
    w = res.witness
    assert all(len(Y) == 8 for Y in w.branch_sets)
    assert w.density_depth == 3
    _external_check(w, oracle)
    # the monotone recursion assertion ran on every stage
    assert res.transcript["stages"]


def test_pipeline_transcript_deterministic():
    oracle = ColoringOracle(
        k=2, d=1, depth=2, num_colors=2, kind="seeded", seed=3
    )
    a = run_pipeline(oracle, density_depth=3, width=4)
    b = run_pipeline(oracle, density_depth=3, width=4)
    assert a.transcript_json() == b.transcript_json()


# ---------------------------------------------------------------------------
# serialization


def test_condition_round_trip():
    p = cond({3: ((0, 1),), 8: ((1,),)})
    assert Condition.from_json(p.to_json()) == p


def test_oracle_round_trip():
    oracle = ColoringOracle(
        k=2, d=2, depth=2, num_colors=3, kind="seeded", seed=21
    )
    again = ColoringOracle.from_json(oracle.to_json())
    ws = list(itertools.product(range(2), repeat=2))
    for pair in itertools.product(ws, repeat=2):
        assert oracle.color(pair) == again.color(pair)
