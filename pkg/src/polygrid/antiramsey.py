"""Recursive set colorings with prescribed collision behavior.

A coloring arena fixes, for every beta below the arena size, an injection
of {0..beta-1} into the arena (the embedding family) and an injective pair
coloring with fibers indexed by the larger element.  The dimension-n set
coloring cn recurses through the embeddings; its key property is that two
sets differing only at their distinguished element get different colors.
On top sit the exact Ramsey thresholds used to size product censuses.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from random import Random
from typing import Mapping, NamedTuple, Sequence

from .ordset import OrdSet
from .trees import Node


class TupleColor(NamedTuple):
    """Color of an enumerated tuple: distinguishing slot plus set color.

    Tuples with a repeated entry all get slot n+1 and value 0.
    """

    slot: int
    value: int


class BudgetError(RuntimeError):
    """Search budget exhausted; carries the best bounds found so far."""

    def __init__(self, message: str, *, nodes_used: int, best_lower_bound: int | None,
                 exhausted_at: int | None):
        super().__init__(message)
        self.nodes_used = nodes_used
        self.best_lower_bound = best_lower_bound
        self.exhausted_at = exhausted_at


@dataclass(frozen=True)
class Arena:
    """Finite stand-in {0..size-1} for the ordinal levels of the recursion.

    mode "identity" embeds by the identity and colors pairs by the smaller
    element; mode "seeded" draws the embedding and pair-coloring injections
    from a named deterministic generator.
    """

    size: int
    dim: int
    mode: str = "identity"
    seed: int | None = None

    def __post_init__(self):
        if self.size < 2:
            raise ValueError("arena size must be >= 2")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.mode not in ("identity", "seeded"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "seeded" and self.seed is None:
            raise ValueError("seeded mode needs a seed")

    @cached_property
    def _tables(self) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
        rng = Random(f"arena:{self.seed}:{self.size}")
        embed_tab: list[tuple[int, ...]] = []
        pair_tab: list[tuple[int, ...]] = []
        for beta in range(self.size):
            embed_tab.append(tuple(rng.sample(range(self.size), beta)))
            pair_tab.append(tuple(rng.sample(range(self.size), beta)))
        return embed_tab, pair_tab

    def embed(self, beta: int, alpha: int) -> int:
        """The beta-th injection applied to alpha; requires alpha < beta."""
        if not 0 <= alpha < beta < self.size:
            raise ValueError(f"need 0 <= alpha < beta < size, got {alpha}, {beta}")
        if self.mode == "identity":
            return alpha
        return self._tables[0][beta][alpha]

    def embed_inverse(self, beta: int, value: int) -> int:
        if self.mode == "identity":
            if not 0 <= value < beta:
                raise ValueError(f"{value} not in the image of the embedding at {beta}")
            return value
        row = self._tables[0][beta]
        try:
            return row.index(value)
        except ValueError:
            raise ValueError(f"{value} not in the image of the embedding at {beta}") from None

    def to_json(self) -> dict:
        data = {"size": self.size, "dim": self.dim, "mode": self.mode}
        if self.seed is not None:
            data["seed"] = self.seed
        return data

    @classmethod
    def from_json(cls, data: dict) -> "Arena":
        return cls(data["size"], data["dim"], data.get("mode", "identity"),
                   data.get("seed"))


def c1(arena: Arena, alpha: int, beta: int) -> int:
    """Injective-in-alpha color of the pair {alpha, beta}, alpha < beta."""
    if not 0 <= alpha < beta < arena.size:
        raise ValueError(f"need 0 <= alpha < beta < size, got {alpha}, {beta}")
    if arena.mode == "identity":
        return alpha
    return arena._tables[1][beta][alpha]


def _validate_set(arena: Arena, elems: tuple[int, ...]) -> None:
    if len(elems) != arena.dim + 1:
        raise ValueError(f"need a set of size {arena.dim + 1}, got {len(elems)}")
    if elems[-1] >= arena.size:
        raise ValueError(f"element {elems[-1]} outside arena of size {arena.size}")


def _set_color(arena: Arena, elems: tuple[int, ...], level: int) -> int:
    if level == 1:
        return c1(arena, elems[0], elems[1])
    beta = elems[-1]
    image = tuple(sorted(arena.embed(beta, x) for x in elems[:-1]))
    return _set_color(arena, image, level - 1)


def _distinguished(arena: Arena, elems: tuple[int, ...], level: int) -> int:
    if level == 1:
        return elems[0]
    beta = elems[-1]
    pairs = sorted((arena.embed(beta, x), x) for x in elems[:-1])
    image = tuple(v for v, _ in pairs)
    inner = _distinguished(arena, image, level - 1)
    for v, x in pairs:
        if v == inner:
            return x
    raise AssertionError("inner distinguished element escaped the image")


def cn(arena: Arena, a: OrdSet) -> int:
    """Dimension-n recursive color of an (n+1)-sized set."""
    _validate_set(arena, a.elems)
    return _set_color(arena, a.elems, arena.dim)


def star(arena: Arena, a: OrdSet) -> int:
    """The member whose replacement is guaranteed to change the color.

    Dimension one distinguishes the minimum; higher dimensions pull the
    recursive choice back through the embedding at the maximum.
    """
    _validate_set(arena, a.elems)
    return _distinguished(arena, a.elems, arena.dim)


def c_full(arena: Arena, vec: Sequence[int]) -> TupleColor:
    """Compound color of an enumerated tuple: (slot of the distinguished
    element, set color); tuples with repeats collapse to (n+1, 0)."""
    n = arena.dim
    if len(vec) != n + 1:
        raise ValueError(f"need a tuple of length {n + 1}, got {len(vec)}")
    if len(set(vec)) != len(vec):
        return TupleColor(n + 1, 0)
    elems = tuple(sorted(vec))
    _validate_set(arena, elems)
    s = _distinguished(arena, elems, n)
    return TupleColor(tuple(vec).index(s), _set_color(arena, elems, n))


# ---------------------------------------------------------------------------
# exact Ramsey thresholds


DEFAULT_BUDGET = 2_000_000

_threshold_cache: dict[tuple[int, int], int] = {}


def _search_bad(
    n: int, m: int, k: int, budget: int
) -> tuple[dict[tuple[int, ...], int] | None, int]:
    """Backtracking core; returns (coloring or None, nodes used).

    Hyperedges are assigned in lexicographic order with color-symmetry
    canonization (a fresh color may appear only after all smaller ones);
    a branch dies as soon as some (n+2)-subset goes monochromatic.
    Every assignment costs one budget node.
    """
    edges = list(itertools.combinations(range(m), n + 1))
    index = {e: i for i, e in enumerate(edges)}
    supersets: list[list[tuple[int, ...]]] = [[] for _ in edges]
    for big in itertools.combinations(range(m), n + 2):
        sub = tuple(index[e] for e in itertools.combinations(big, n + 1))
        for e in sub:
            supersets[e].append(sub)
    colors: list[int | None] = [None] * len(edges)
    nodes = 0

    def mono_closes(e: int, c: int) -> bool:
        for group in supersets[e]:
            if all(colors[f] == c for f in group if f != e):
                return True
        return False

    def dfs(pos: int, used: int) -> bool:
        nonlocal nodes
        if pos == len(edges):
            return True
        for c in range(min(k, used + 1)):
            nodes += 1
            if nodes > budget:
                raise BudgetError(
                    f"bad-coloring search exceeded {budget} nodes at m={m}",
                    nodes_used=nodes, best_lower_bound=None, exhausted_at=m)
            if mono_closes(pos, c):
                continue
            colors[pos] = c
            if dfs(pos + 1, max(used, c + 1)):
                return True
            colors[pos] = None
        return False

    if not edges:
        return {}, 0
    if dfs(0, 0):
        return {e: colors[i] for i, e in enumerate(edges)}, nodes
    return None, nodes


def find_bad_coloring(
    n: int, m: int, k: int, budget: int = DEFAULT_BUDGET
) -> dict[tuple[int, ...], int] | None:
    """A k-coloring of the (n+1)-subsets of {0..m-1} with no monochromatic
    (n+2)-subset, or None once the exhaustive search proves none exists."""
    result, _ = _search_bad(n, m, k, budget)
    return result


def ramsey_m_star(n: int, k: int, budget: int = DEFAULT_BUDGET) -> int:
    """Least m such that every k-coloring of the (n+1)-subsets of {0..m-1}
    admits a monochromatic (n+2)-subset.  Verified by exhausting the bad
    colorings of m after exhibiting one at m-1."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    key = (n, k)
    if key in _threshold_cache:
        return _threshold_cache[key]
    spent = 0
    best = n + 1  # below n+2 every coloring is vacuously bad
    m = n + 2
    while True:
        try:
            bad, used = _search_bad(n, m, k, budget - spent)
        except BudgetError as exc:
            raise BudgetError(
                f"threshold search for (n={n}, k={k}) exhausted its budget: "
                f"bad colorings found through m={best}, died at m={m}",
                nodes_used=spent + exc.nodes_used,
                best_lower_bound=best, exhausted_at=m) from None
        spent += used
        if bad is None:
            _threshold_cache[key] = m
            return m
        best = m
        m += 1


def m_seq(n: int, k: int, budget: int = DEFAULT_BUDGET) -> int:
    """Product side length guaranteeing more than k compound colors."""
    if k == 0:
        return 1
    return (n + 1) * ramsey_m_star(n, k, budget)


def verify_product_bound(
    arena: Arena, sets: Sequence[OrdSet], k: int, budget: int = DEFAULT_BUDGET
) -> tuple[bool, Counter]:
    """Census the compound coloring over a full product of (n+1) sets sized
    at the guaranteed side length; true iff more than k colors appear."""
    n = arena.dim
    if len(sets) != n + 1:
        raise ValueError(f"need {n + 1} sets, got {len(sets)}")
    need = m_seq(n, k, budget)
    for a in sets:
        if a.otp != need:
            raise ValueError(f"side sets must have size {need}, got {a.otp}")
    census: Counter = Counter()
    for vec in itertools.product(*(a.elems for a in sets)):
        census[c_full(arena, vec)] += 1
    return len(census) > k, census


# ---------------------------------------------------------------------------
# difference property and branch-product colorings


@dataclass
class DifferenceReport:
    eligible_pairs: int
    violations: list[tuple[tuple[int, ...], tuple[int, ...], int]] = field(
        default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_difference_lemma(arena: Arena) -> DifferenceReport:
    """Scan all eligible pairs: same set after deleting the distinguished
    element, different distinguished elements; colors must differ."""
    n = arena.dim
    groups: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for comb in itertools.combinations(range(arena.size), n + 1):
        s = _distinguished(arena, comb, n)
        rest = tuple(x for x in comb if x != s)
        groups.setdefault(rest, []).append(comb)
    report = DifferenceReport(eligible_pairs=0)
    for members in groups.values():
        for a, b in itertools.combinations(members, 2):
            report.eligible_pairs += 1
            ca = _set_color(arena, a, n)
            cb = _set_color(arena, b, n)
            if ca == cb:
                report.violations.append((a, b, ca))
    return report


class GridColoring:
    """Compound coloring pulled back to a product of enumerated branch sets.

    Each coordinate carries an injective enumeration of its branch set into
    the arena; a branch tuple is colored by c_full of its index tuple.
    """

    def __init__(self, arena: Arena, enums: Sequence[Mapping[Node, int]]):
        if len(enums) != arena.dim + 1:
            raise ValueError(f"need {arena.dim + 1} coordinates")
        self.arena = arena
        self.enums = [dict(e) for e in enums]
        for imap in self.enums:
            vals = list(imap.values())
            if len(set(vals)) != len(vals):
                raise ValueError("enumeration must be injective")
            if any(not 0 <= v < arena.size for v in vals):
                raise ValueError("enumeration value outside the arena")

    def branch_sets(self) -> list[list[Node]]:
        return [list(e.keys()) for e in self.enums]

    def color(self, branch_vec: Sequence[Node]) -> TupleColor:
        vec = tuple(self.enums[i][y] for i, y in enumerate(branch_vec))
        return c_full(self.arena, vec)

    def census(self) -> Counter:
        out: Counter = Counter()
        for combo in itertools.product(*self.branch_sets()):
            out[self.color(combo)] += 1
        return out


def grid_coloring(arena: Arena, enums: Sequence[Mapping[Node, int]]) -> GridColoring:
    """Total coloring of the product of the enumerated branch sets."""
    return GridColoring(arena, enums)
