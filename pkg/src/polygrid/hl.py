"""Level colorings, the grid search, and the grid-to-strong-subtree step.

A LevelColoring colors same-height node tuples.  Branch tuples get a
surrogate color by majority vote over their level truncations, the search
hunts for a monochromatic somewhere-dense grid under a branch coloring,
and the derivation replays the subtree construction stage by stage against
a validated grid witness, reporting partial progress as a value rather
than an error.  The sideways construction turns a d-dimensional branch
coloring into a (d+1)-dimensional 2-coloring through the clopen family
S_n = {x : x takes the leftmost step at level n}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from random import Random
from typing import Callable, Optional, Sequence

from .ordset import OrdSet
from .trees import (
    GridWitness,
    Node,
    StrongSubtreeWitness,
    TreeShape,
    all_nodes,
    branches,
    is_level_tuple,
    is_strong_subtree,
    node_key,
    validate_grid_witness,
    word_from_str,
    word_to_str,
)

Word = tuple[int, ...]

NAMED_KINDS = ("constant", "level-parity", "seeded", "planted-grid", "adversarial")


def _comparable(a: Word, b: Word) -> bool:
    n = min(len(a), len(b))
    return a[:n] == b[:n]


@dataclass
class LevelColoring:
    """A total coloring of same-height node tuples up to depth.

    d is the number of coordinate trees and r the number of colors.  The
    named kinds: "constant" is the value everywhere; "level-parity" colors
    by (height + value) mod r, so each color's levels are cofinal;
    "seeded" hashes the tuple; "planted-grid" gives color `value` exactly
    on tuples whose coordinates are all comparable with the planted roots
    and seeded noise from the other colors elsewhere; "adversarial" (d=1,
    r=2) gives color 0 on the leftmost branch at even heights and on
    first-letter-1 words at odd heights, so zero-colored levels of the two
    never meet; "table" is an explicit lookup.
    """

    k: int
    d: int
    depth: int
    r: int
    kind: str
    value: int = 0
    seed: int = 0
    roots: tuple[Word, ...] = ()
    table: dict[tuple[Word, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 2 or self.d < 1 or self.depth < 1:
            raise ValueError("need k >= 2, d >= 1, depth >= 1")
        if self.r < 1:
            raise ValueError("need at least one color")
        if self.kind not in NAMED_KINDS + ("table",):
            raise ValueError(f"unknown coloring kind {self.kind!r}")
        if self.kind in ("constant", "planted-grid", "level-parity"):
            if not 0 <= self.value < self.r:
                raise ValueError(f"value {self.value} outside 0..{self.r - 1}")
        if self.kind == "planted-grid":
            if self.r < 2:
                raise ValueError("planted-grid noise needs a second color")
            if len(self.roots) != self.d:
                raise ValueError(f"need {self.d} planted roots")
            for w in self.roots:
                if len(w) > self.depth or any(not 0 <= c < self.k for c in w):
                    raise ValueError(f"bad planted root {w}")
        if self.kind == "adversarial" and (self.d != 1 or self.r != 2):
            raise ValueError("the adversarial instance is d=1, r=2")

    def color(self, nodes: Sequence[Node]) -> int:
        if len(nodes) != self.d:
            raise ValueError(f"expected {self.d} nodes, got {len(nodes)}")
        if not is_level_tuple(nodes):
            raise ValueError("level colorings apply to same-height tuples")
        m = nodes[0].height
        if m > self.depth:
            raise ValueError(f"height {m} exceeds depth {self.depth}")
        words = tuple(t.word for t in nodes)
        for w in words:
            if any(not 0 <= c < self.k for c in w):
                raise ValueError("letters out of range")
        if self.kind == "constant":
            return self.value
        if self.kind == "level-parity":
            return (m + self.value) % self.r
        if self.kind == "seeded":
            return Random(f"levelcoloring:{self.seed}:{words}").randrange(self.r)
        if self.kind == "planted-grid":
            if all(_comparable(r, w) for r, w in zip(self.roots, words)):
                return self.value
            others = [c for c in range(self.r) if c != self.value]
            return Random(f"levelcoloring:{self.seed}:{words}").choice(others)
        if self.kind == "adversarial":
            w = words[0]
            if all(c == 0 for c in w) and m % 2 == 0:
                return 0
            if w and w[0] == 1 and m % 2 == 1:
                return 0
            return 1
        got = self.table.get(words)
        if got is None:
            raise ValueError(f"coloring table has no entry for {words}")
        return got

    def to_json(self) -> dict:
        data = {
            "k": self.k,
            "d": self.d,
            "depth": self.depth,
            "r": self.r,
            "kind": self.kind,
        }
        if self.kind in ("constant", "level-parity", "planted-grid"):
            data["value"] = self.value
        if self.kind in ("seeded", "planted-grid"):
            data["seed"] = self.seed
        if self.kind == "planted-grid":
            data["roots"] = [word_to_str(w) for w in self.roots]
        if self.kind == "table":
            data["table"] = {
                "|".join(word_to_str(w) for w in key): c
                for key, c in sorted(self.table.items())
            }
        return data

    @classmethod
    def from_json(cls, data: dict) -> "LevelColoring":
        table = {}
        for key, c in data.get("table", {}).items():
            table[tuple(word_from_str(s) for s in key.split("|"))] = c
        return cls(
            k=data["k"],
            d=data["d"],
            depth=data["depth"],
            r=data["r"],
            kind=data["kind"],
            value=data.get("value", 0),
            seed=data.get("seed", 0),
            roots=tuple(word_from_str(s) for s in data.get("roots", [])),
            table=table,
        )


def surrogate_color(gamma: LevelColoring, xs: Sequence[Node], L: int) -> int:
    """Most frequent color among the level-m truncations, m < L.

    Ties break to the least color index.  This stands in for membership
    of the level set in an ultrafilter; it keeps none of the filter
    properties, which is why the derivation downstream may go partial.
    """
    if not 1 <= L <= gamma.depth:
        raise ValueError(f"need 1 <= L <= {gamma.depth}, got {L}")
    if any(x.height < L - 1 for x in xs):
        raise ValueError("branches too short for the requested truncations")
    counts: dict[int, int] = {}
    for m in range(L):
        j = gamma.color(tuple(Node(x.tree, x.word[:m]) for x in xs))
        counts[j] = counts.get(j, 0) + 1
    best = max(counts.values())
    return min(j for j, n in counts.items() if n == best)


def surrogate_fn(
    gamma: LevelColoring, L: Optional[int] = None
) -> Callable[[tuple[Node, ...]], int]:
    """The branch coloring induced by majority-to-L (default: full depth)."""
    cut = gamma.depth if L is None else L
    return lambda xs: surrogate_color(gamma, xs, cut)


# ---------------------------------------------------------------------------
# grid search


def _dense_feasible(pool: Sequence[Node], t: Node, D: int, cap: int, k: int) -> bool:
    need = k ** (D - t.height)
    if need > cap:
        return False
    prefixes = {y.word[:D] for y in pool if y.word[: t.height] == t.word}
    return len(prefixes) >= need


def _trim_to_cap(pool: list[Node], t: Node, D: int, cap: int) -> Optional[list[Node]]:
    """Drop lex-largest branches whose depth-D prefix stays covered."""
    kept = list(pool)
    while len(kept) > cap:
        counts: dict[Word, int] = {}
        for y in kept:
            counts[y.word[:D]] = counts.get(y.word[:D], 0) + 1
        victim = None
        for y in reversed(kept):
            if counts[y.word[:D]] > 1:
                victim = y
                break
        if victim is None:
            return None
        kept.remove(victim)
    return kept


def _mono_family(
    gamma_branch: Callable[[tuple[Node, ...]], int],
    pools: tuple[tuple[Node, ...], ...],
    j: int,
    ts: Sequence[Node],
    D: int,
    cap: int,
    k: int,
) -> Optional[list[list[Node]]]:
    """Largest-first backtracking for an all-j family of dense branch sets.

    Any monochromatic family is contained in some leaf of the recursion
    (a bad tuple forces one of its entries out), so failure here is a
    proof of absence, not a search artifact.
    """
    seen: set[tuple[tuple[Node, ...], ...]] = set()

    def bad_tuple(state: tuple[tuple[Node, ...], ...]):
        for combo in itertools.product(*state):
            if gamma_branch(combo) != j:
                return combo
        return None

    def solve(state: tuple[tuple[Node, ...], ...]):
        if state in seen:
            return None
        seen.add(state)
        offender = bad_tuple(state)
        if offender is None:
            out = []
            for pool, t in zip(state, ts):
                trimmed = _trim_to_cap(list(pool), t, D, cap)
                if trimmed is None:
                    return None
                out.append(trimmed)
            return out
        for i in range(len(state)):
            shrunk = tuple(y for y in state[i] if y != offender[i])
            if not _dense_feasible(shrunk, ts[i], D, cap, k):
                continue
            nxt = state[:i] + (shrunk,) + state[i + 1:]
            got = solve(nxt)
            if got is not None:
                return got
        return None

    return solve(pools)


def search_grid(
    gamma_branch: Callable[[tuple[Node, ...]], int],
    shapes: Sequence[TreeShape],
    density_depth: int,
    cap: int,
    pools: Optional[Sequence[Sequence[Node]]] = None,
) -> Optional[GridWitness]:
    """Backtracking search for a monochromatic somewhere-dense grid.

    Root tuples enumerate in shortlex product order, proper roots only
    (height below the density depth, so no vacuous one-branch cones);
    colors ascend; within those the largest monochromatic family wins, so
    a constant coloring yields the full branch sets.  Failure is None.
    """
    d = len(shapes)
    depth = shapes[0].depth
    if any(s.depth != depth for s in shapes):
        raise ValueError("trees must share a depth")
    if not 1 <= density_depth <= depth:
        raise ValueError(f"need 1 <= density depth <= {depth}")
    if pools is None:
        pools = [branches(s) for s in shapes]
    pools = [sorted(p, key=node_key) for p in pools]

    cache: dict[tuple[Node, ...], int] = {}

    def gb(combo: tuple[Node, ...]) -> int:
        got = cache.get(combo)
        if got is None:
            got = gamma_branch(combo)
            cache[combo] = got
        return got

    root_lists = [
        [t for t in all_nodes(s, density_depth - 1)
         if _dense_feasible(pools[i], t, density_depth, cap, s.k)]
        for i, s in enumerate(shapes)
    ]
    for ts in itertools.product(*root_lists):
        through = tuple(
            tuple(y for y in pools[i] if y.word[: ts[i].height] == ts[i].word)
            for i in range(d)
        )
        colors = sorted({gb(c) for c in itertools.product(*through)})
        for j in colors:
            fam = _mono_family(
                gb, through, j, ts, density_depth, cap, shapes[0].k
            )
            if fam is not None:
                return GridWitness(
                    k=shapes[0].k,
                    depth=depth,
                    roots=tuple(ts),
                    branch_sets=tuple(tuple(y) for y in fam),
                    density_depth=density_depth,
                    color=j,
                )
    return None


# ---------------------------------------------------------------------------
# HL witnesses and the derivation


@dataclass(frozen=True)
class HLWitness:
    """A level set and one strong subtree per coordinate, all over it."""

    k: int
    depth: int
    levels: OrdSet
    subtrees: tuple[StrongSubtreeWitness, ...]
    color: int

    def __post_init__(self):
        for sub in self.subtrees:
            if sub.levels != self.levels:
                raise ValueError("subtrees must share the witness level set")

    @property
    def d(self) -> int:
        return len(self.subtrees)

    @property
    def height(self) -> int:
        return self.levels.otp

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "depth": self.depth,
            "levels": list(self.levels.elems),
            "color": self.color,
            "subtrees": [
                [sorted(word_to_str(t.word) for t in level)
                 for level in sub.level_sets]
                for sub in self.subtrees
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "HLWitness":
        levels = OrdSet(tuple(data["levels"]))
        subs = []
        for i, levelsets in enumerate(data["subtrees"]):
            subs.append(
                StrongSubtreeWitness(
                    levels=levels,
                    level_sets=tuple(
                        frozenset(Node(i, word_from_str(s)) for s in level)
                        for level in levelsets
                    ),
                )
            )
        return cls(
            k=data["k"],
            depth=data["depth"],
            levels=levels,
            subtrees=tuple(subs),
            color=data["color"],
        )


def verify_hl_witness(gamma: LevelColoring, w: HLWitness) -> bool:
    """Each subtree is strong and every level-product tuple has w.color."""
    if w.d != gamma.d or w.k != gamma.k:
        return False
    if w.levels.otp and w.levels.at(w.levels.otp - 1) > gamma.depth:
        return False
    for i, sub in enumerate(w.subtrees):
        if not is_strong_subtree(sub, TreeShape(w.k, w.depth, index=i)):
            return False
    for m in range(w.levels.otp):
        for combo in itertools.product(*(s.level_sets[m] for s in w.subtrees)):
            if gamma.color(combo) != w.color:
                return False
    return True


@dataclass
class DeriveResult:
    """Outcome of the stagewise derivation; partial progress is a value."""

    full: bool
    witness: Optional[HLWitness]
    height: int
    failed_stage: Optional[int] = None
    reason: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "full": self.full,
            "height": self.height,
            "failed_stage": self.failed_stage,
            "reason": self.reason,
            "witness": self.witness.to_json() if self.witness else None,
        }


def _least_through(Y: Sequence[Node], prefix: Word) -> Optional[Node]:
    for y in Y:
        if y.word[: len(prefix)] == prefix:
            return y
    return None


def derive_strong_subtrees(
    gamma: LevelColoring, w: GridWitness, h: int
) -> DeriveResult:
    """Replay the subtree construction to height h against a grid witness.

    Stage 0 follows the least branch through each grid root; stage n
    follows the least branch through each immediate successor of the
    previous level's nodes.  Each stage needs a level at which every
    tuple over the current branch families has the witness color; without
    the ultrafilter there is no guarantee one exists below the depth cap,
    so the result records how far the construction got.  Full results are
    re-checked against verify_hl_witness before being returned.
    """
    if h < 1:
        raise ValueError("witness height must be >= 1")
    if (gamma.d, gamma.k) != (w.d, w.k):
        raise ValueError("coloring and grid witness disagree on shape")
    j = w.color
    Ys = [sorted(Y, key=node_key) for Y in w.branch_sets]
    chains: list[list[Node]] = []
    for i in range(w.d):
        pick = _least_through(Ys[i], w.roots[i].word)
        if pick is None:
            return DeriveResult(
                False, None, 0, failed_stage=0,
                reason=f"no branch through the coordinate-{i} root",
            )
        chains.append([pick])

    levels: list[int] = []
    level_sets: list[list[frozenset[Node]]] = [[] for _ in range(w.d)]

    def packaged() -> Optional[HLWitness]:
        if not levels:
            return None
        ls = OrdSet(tuple(levels))
        subs = tuple(
            StrongSubtreeWitness(levels=ls, level_sets=tuple(level_sets[i]))
            for i in range(w.d)
        )
        return HLWitness(
            k=w.k, depth=w.depth, levels=ls, subtrees=subs, color=j
        )

    floor = max(t.height for t in w.roots)
    for n in range(h):
        lo = floor if n == 0 else levels[-1] + 1
        found = None
        for L in range(lo, w.depth + 1):
            if all(
                gamma.color(tuple(Node(z.tree, z.word[:L]) for z in combo)) == j
                for combo in itertools.product(*chains)
            ):
                found = L
                break
        if found is None:
            return DeriveResult(
                False, packaged(), len(levels), failed_stage=n,
                reason=(
                    f"no level in {lo}..{w.depth} colors every tuple {j}"
                ),
            )
        levels.append(found)
        for i in range(w.d):
            level_sets[i].append(
                frozenset(Node(z.tree, z.word[:found]) for z in chains[i])
            )
        if n == h - 1:
            break
        for i in range(w.d):
            grown: list[Node] = []
            for s in sorted(level_sets[i][-1], key=node_key):
                for c in range(w.k):
                    stem = s.word + (c,)
                    pick = _least_through(Ys[i], stem)
                    if pick is None:
                        return DeriveResult(
                            False, packaged(), len(levels),
                            failed_stage=n + 1,
                            reason=(
                                f"coordinate {i} has no branch through "
                                f"{word_to_str(stem)}"
                            ),
                        )
                    grown.append(pick)
            chains[i] = grown

    witness = packaged()
    assert witness is not None and witness.height == h
    assert verify_hl_witness(gamma, witness)
    return DeriveResult(True, witness, h)


def grid_for(
    gamma: LevelColoring, density_depth: int, cap: int
) -> Optional[GridWitness]:
    """Search for a grid under the surrogate branch coloring and validate it.

    Exhaustive, so only sensible for small trees; structured colorings
    whose cone is known should use cone_grid instead.
    """
    shapes = [TreeShape(gamma.k, gamma.depth, index=i) for i in range(gamma.d)]
    fn = surrogate_fn(gamma)
    w = search_grid(fn, shapes, density_depth, cap)
    if w is None:
        return None
    ok, _ = validate_grid_witness(w, fn)
    assert ok
    return w


def cone_grid(
    gamma: LevelColoring, roots: Sequence[Word], density_depth: int
) -> Optional[GridWitness]:
    """Build the leftmost dense grid through the given roots and keep it
    only if the surrogate coloring is constant on it.

    Y_i holds, for every depth-density_depth extension of roots[i], its
    leftmost completion; this is the minimal dense set through the root
    and keeps validation cheap at any depth.
    """
    if len(roots) != gamma.d:
        raise ValueError(f"need {gamma.d} roots")
    if any(len(r) > density_depth for r in roots):
        raise ValueError("roots must not exceed the density depth")
    sets = []
    for i, r in enumerate(roots):
        tails = itertools.product(range(gamma.k), repeat=density_depth - len(r))
        sets.append(
            tuple(
                Node(i, r + e + (0,) * (gamma.depth - density_depth))
                for e in tails
            )
        )
    fn = surrogate_fn(gamma)
    colors = {fn(combo) for combo in itertools.product(*sets)}
    if len(colors) != 1:
        return None
    w = GridWitness(
        k=gamma.k,
        depth=gamma.depth,
        roots=tuple(Node(i, r) for i, r in enumerate(roots)),
        branch_sets=tuple(sets),
        density_depth=density_depth,
        color=colors.pop(),
    )
    ok, _ = validate_grid_witness(w, fn)
    assert ok
    return w


# ---------------------------------------------------------------------------
# the sideways construction


def s_member(n: int, x: Node) -> bool:
    """x is in S_n iff it takes the leftmost step at level n."""
    if n + 1 > x.height:
        raise ValueError(
            f"branch of height {x.height} does not reach level {n + 1}"
        )
    return x.word[n] == 0


def sideways_build(
    jmap: Callable[[tuple[Node, ...]], int], d: int, j_bound: int, depth: int
) -> Callable[[tuple[Node, ...]], int]:
    """Lift a d-dimensional branch coloring into {0..j_bound-1} to a
    2-coloring of (d+1)-tuples: color 0 iff the last coordinate lies in
    S_j for j the jmap value of the first d."""
    if j_bound >= depth:
        raise ValueError(
            f"jmap range {j_bound} needs branch depth above {j_bound}"
        )

    def color(xs: tuple[Node, ...]) -> int:
        if len(xs) != d + 1:
            raise ValueError(f"expected {d + 1} branches, got {len(xs)}")
        j = jmap(tuple(xs[:d]))
        if not 0 <= j < j_bound:
            raise ValueError(f"jmap value {j} outside 0..{j_bound - 1}")
        return 0 if s_member(j, xs[d]) else 1

    return color
