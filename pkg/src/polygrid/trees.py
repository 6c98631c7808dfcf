"""Finitely branching tree truncations, level products, and density checks.

Trees are perfect k-branching trees truncated at depth N.  A node is a
word over {0..k-1}; a branch is a node of full length N.  Everything is
explicit and finite: density is "to depth D", strong subtrees carry their
level sets, and the distributive-dense-filtration (DDF) check truncates
fiber intersections at a cap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .ordset import OrdSet


@dataclass(frozen=True)
class TreeShape:
    """Branching degree k >= 2, depth N >= 1, and a coordinate index."""

    k: int
    depth: int
    index: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"branching degree must be >= 2, got {self.k}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")


@dataclass(frozen=True)
class Node:
    """A word over {0..k-1} in the tree with the given coordinate index."""

    tree: int
    word: tuple[int, ...] = ()

    @property
    def height(self) -> int:
        return len(self.word)

    def is_prefix_of(self, other: "Node") -> bool:
        return other.word[: len(self.word)] == self.word

    def child(self, letter: int) -> "Node":
        return Node(self.tree, self.word + (letter,))


# A branch is just a node of full length; no separate runtime type.
Branch = Node


def node_key(t: Node) -> tuple[int, tuple[int, ...]]:
    """Shortlex order: by height, then lexicographically."""
    return (len(t.word), t.word)


def root(shape: TreeShape) -> Node:
    return Node(shape.index, ())


def words(k: int, length: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(k), repeat=length))


def nodes_at_level(shape: TreeShape, m: int) -> list[Node]:
    if not 0 <= m <= shape.depth:
        raise ValueError(f"level {m} out of range for depth {shape.depth}")
    return [Node(shape.index, w) for w in words(shape.k, m)]


def all_nodes(shape: TreeShape, max_height: int | None = None) -> list[Node]:
    """All nodes of height <= max_height, in shortlex order."""
    top = shape.depth if max_height is None else max_height
    out: list[Node] = []
    for m in range(top + 1):
        out.extend(nodes_at_level(shape, m))
    return out


def branches(shape: TreeShape) -> list[Node]:
    return nodes_at_level(shape, shape.depth)


def immediate_successors(shape: TreeShape, t: Node) -> list[Node]:
    if t.height >= shape.depth:
        return []
    return [t.child(c) for c in range(shape.k)]


def level_product(shapes: Sequence[TreeShape], m: int) -> list[tuple[Node, ...]]:
    """All tuples of level-m nodes, one per tree, lexicographically."""
    return list(itertools.product(*(nodes_at_level(s, m) for s in shapes)))


def is_level_tuple(nodes: Sequence[Node]) -> bool:
    return len(nodes) > 0 and len({t.height for t in nodes}) == 1


# ---------------------------------------------------------------------------
# strong subtrees


@dataclass(frozen=True)
class StrongSubtreeWitness:
    """Level set data for a strong subtree: levels a and the chosen nodes.

    level_sets[m] holds the nodes of the subtree at tree height levels.at(m).
    """

    levels: OrdSet
    level_sets: tuple[frozenset[Node], ...]

    def __post_init__(self):
        if self.levels.otp != len(self.level_sets):
            raise ValueError("one node set per level required")
        if self.levels.otp == 0:
            raise ValueError("witness needs at least one level")


def is_strong_subtree(w: StrongSubtreeWitness, shape: TreeShape) -> bool:
    """Check the inductive definition clause by clause.

    Level 0 is a singleton at height a(0); each later level set consists of
    exactly one node at the right height above each immediate successor of
    each node on the previous level.
    """
    a = w.levels
    if a.at(a.otp - 1) > shape.depth:
        return False
    first = w.level_sets[0]
    if len(first) != 1:
        return False
    for m in range(a.otp):
        for t in w.level_sets[m]:
            if t.tree != shape.index or t.height != a.at(m):
                return False
            if any(c >= shape.k or c < 0 for c in t.word):
                return False
    for m in range(1, a.otp):
        prev_height = a.at(m - 1)
        needed = {
            p.word + (c,)
            for p in w.level_sets[m - 1]
            for c in range(shape.k)
        }
        got = [t.word[: prev_height + 1] for t in w.level_sets[m]]
        if len(got) != len(needed) or set(got) != needed:
            return False
    return True


def product_shape(shapes: Sequence[TreeShape]) -> TreeShape:
    depths = {s.depth for s in shapes}
    if len(depths) != 1:
        raise ValueError("trees must share a depth to form a level product")
    k = 1
    for s in shapes:
        k *= s.k
    return TreeShape(k=k, depth=depths.pop(), index=0)


def encode_product_node(shapes: Sequence[TreeShape], nodes: Sequence[Node]) -> Node:
    """Encode a same-height node tuple as one node of the product tree.

    Letter j of the encoding packs the j-th letters of all coordinates in
    mixed radix, so coordinatewise extension matches extension of codes.
    """
    if not is_level_tuple(nodes):
        raise ValueError("product encoding needs a same-height tuple")
    strides = [1] * len(shapes)
    for i in range(len(shapes) - 2, -1, -1):
        strides[i] = strides[i + 1] * shapes[i + 1].k
    word = tuple(
        sum(nodes[i].word[j] * strides[i] for i in range(len(shapes)))
        for j in range(nodes[0].height)
    )
    return Node(0, word)


def product_witness(
    shapes: Sequence[TreeShape], parts: Sequence[StrongSubtreeWitness]
) -> StrongSubtreeWitness:
    """Combine per-tree strong subtrees into one over the level product."""
    level_sets = []
    base = parts[0].levels
    if any(p.levels != base for p in parts):
        raise ValueError("witnesses must share their level set")
    for m in range(base.otp):
        combos = itertools.product(*(p.level_sets[m] for p in parts))
        level_sets.append(frozenset(encode_product_node(shapes, c) for c in combos))
    return StrongSubtreeWitness(levels=base, level_sets=tuple(level_sets))


# ---------------------------------------------------------------------------
# density


def _check_branch_set(shape: TreeShape, Y: Iterable[Node]) -> list[Node]:
    ys = list(Y)
    for y in ys:
        if y.tree != shape.index:
            raise ValueError(f"branch from tree {y.tree} in tree {shape.index} set")
        if y.height != shape.depth:
            raise ValueError("branch sets hold full-depth nodes only")
    return ys


def is_dense_above(shape: TreeShape, Y: Iterable[Node], t: Node, D: int) -> bool:
    """Every node extending t with height <= D is a prefix of some branch.

    It suffices to cover the depth-D extensions of t, and those are counted
    by distinct depth-D prefixes of branches through t.
    """
    if D > shape.depth:
        raise ValueError(f"density depth {D} exceeds tree depth {shape.depth}")
    h = t.height
    if h > D:
        raise ValueError(f"root height {h} exceeds density depth {D}")
    ys = _check_branch_set(shape, Y)
    prefixes = {y.word[:D] for y in ys if y.word[:h] == t.word}
    return len(prefixes) == shape.k ** (D - h)


def is_somewhere_dense_grid(
    shapes: Sequence[TreeShape], Ys: Sequence[Iterable[Node]], D: int
) -> Optional[tuple[Node, ...]]:
    """Least root tuple above which every coordinate set is dense to depth D.

    Only proper roots (height below D) count: at height D density is
    vacuous, one branch through the node suffices, and no nonempty set
    could ever fail.  Coordinates are independent, so the lexicographically
    least tuple is the tuple of per-coordinate least roots in shortlex
    order; None if some coordinate has no proper dense root.
    """
    roots = []
    for shape, Y in zip(shapes, Ys):
        ys = list(Y)
        found = None
        for t in all_nodes(shape, max(D - 1, 0)):
            if is_dense_above(shape, ys, t, D):
                found = t
                break
        if found is None:
            return None
        roots.append(found)
    return tuple(roots)


def is_u_set(Y: Iterable[Node], cones: Iterable[Node], D: int) -> bool:
    """Some member passes through every listed clopen cone root."""
    ys = list(Y)
    for u in cones:
        if u.height > D:
            raise ValueError(f"cone root height {u.height} exceeds {D}")
        if not any(u.is_prefix_of(y) for y in ys):
            return False
    return True


# ---------------------------------------------------------------------------
# dense filtrations and the finite FPG bridge


def _fibers(Z: Iterable[tuple[Node, ...]]) -> dict[tuple[Node, ...], set[Node]]:
    out: dict[tuple[Node, ...], set[Node]] = {}
    for z in Z:
        out.setdefault(z[:-1], set()).add(z[-1])
    return out


def is_ddf_to_depth(
    shapes: Sequence[TreeShape],
    Z: Iterable[tuple[Node, ...]],
    D: int,
    mcap: int,
) -> bool:
    """Recursive dense-filtration check with fiber intersections capped.

    Dimension one asks for density to depth D in the whole tree; higher
    dimensions drop the last coordinate, recurse, and require every
    intersection of at most mcap fiber sets to be dense to depth D.
    """
    if mcap < 1:
        raise ValueError("mcap must be >= 1")
    zs = list(Z)
    d = len(shapes)
    for z in zs:
        if len(z) != d:
            raise ValueError("tuple arity does not match the tree list")
    if d == 1:
        return is_dense_above(shapes[0], {z[0] for z in zs}, root(shapes[0]), D)
    fib = _fibers(zs)
    if not is_ddf_to_depth(shapes[:-1], list(fib.keys()), D, mcap):
        return False
    last = shapes[-1]
    keys = sorted(fib.keys(), key=lambda xs: tuple(node_key(x) for x in xs))
    for size in range(1, mcap + 1):
        for combo in itertools.combinations(keys, size):
            meet = set.intersection(*(fib[x] for x in combo))
            if not is_dense_above(last, meet, root(last), D):
                return False
    return True


def fpg_witness_sets(
    shapes: Sequence[TreeShape],
    Z: Iterable[tuple[Node, ...]],
    cone_families: Sequence[Iterable[Node]],
    D: int,
) -> Optional[tuple[frozenset[Node], ...]]:
    """Build finite cone-meeting sets whose product sits inside Z.

    Follows the filtration recursion: solve the projection first, then take
    the intersection of the fibers over its product and pick one branch per
    cone from that intersection.  Returns None when some cone cannot be met,
    which on filtration-checked input does not happen for families of size
    at most the fiber cap.
    """
    zs = list(Z)
    d = len(shapes)

    def pick_per_cone(pool: set[Node], cones: Iterable[Node]) -> Optional[frozenset[Node]]:
        chosen = set()
        for u in sorted(cones, key=node_key):
            hits = [y for y in pool if u.is_prefix_of(y)]
            if not hits:
                return None
            chosen.add(min(hits, key=node_key))
        return frozenset(chosen)

    if d == 1:
        got = pick_per_cone({z[0] for z in zs}, cone_families[0])
        return None if got is None else (got,)

    fib = _fibers(zs)
    head = fpg_witness_sets(shapes[:-1], list(fib.keys()), cone_families[:-1], D)
    if head is None:
        return None
    pool = set(branches(shapes[-1]))
    for x in itertools.product(*head):
        pool &= fib.get(x, set())
    got = pick_per_cone(pool, cone_families[-1])
    return None if got is None else head + (got,)


# ---------------------------------------------------------------------------
# grid witnesses

_WORD_JSON_MAX_K = 10


def word_to_str(w: tuple[int, ...]) -> str:
    if any(c >= _WORD_JSON_MAX_K for c in w):
        raise ValueError("digit-string serialization needs letters < 10")
    return "".join(str(c) for c in w)


def word_from_str(s: str) -> tuple[int, ...]:
    return tuple(int(ch) for ch in s)


@dataclass(frozen=True)
class GridWitness:
    """A monochromatic somewhere-dense grid: roots, branch sets, color.

    branch_sets[i] is sorted; density_depth bounds the depth to which each
    set is dense above its root; color is whatever the producing coloring
    emits (kept JSON compatible).
    """

    k: int
    depth: int
    roots: tuple[Node, ...]
    branch_sets: tuple[tuple[Node, ...], ...]
    density_depth: int
    color: object

    @property
    def d(self) -> int:
        return len(self.roots)

    def shapes(self) -> tuple[TreeShape, ...]:
        return tuple(TreeShape(self.k, self.depth, i) for i in range(self.d))

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "depth": self.depth,
            "density_depth": self.density_depth,
            "color": self.color,
            "roots": [word_to_str(t.word) for t in self.roots],
            "branch_sets": [
                [word_to_str(y.word) for y in ys] for ys in self.branch_sets
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GridWitness":
        roots = tuple(
            Node(i, word_from_str(s)) for i, s in enumerate(data["roots"])
        )
        sets = tuple(
            tuple(sorted((Node(i, word_from_str(s)) for s in ys), key=node_key))
            for i, ys in enumerate(data["branch_sets"])
        )
        color = data["color"]
        if isinstance(color, list):
            color = tuple(color)
        return cls(
            k=data["k"],
            depth=data["depth"],
            roots=roots,
            branch_sets=sets,
            density_depth=data["density_depth"],
            color=color,
        )


def validate_grid_witness(
    w: GridWitness, gamma: Callable[[tuple[Node, ...]], object]
) -> tuple[bool, dict]:
    """Re-check a grid witness from scratch: density plus constant color.

    gamma colors full branch tuples; every tuple over the product of the
    witness sets must agree with the recorded color.
    """
    report: dict = {"density": [], "color_failures": 0, "tuples": 0}
    ok = True
    shapes = w.shapes()
    for i in range(w.d):
        dense = is_dense_above(shapes[i], w.branch_sets[i], w.roots[i], w.density_depth)
        report["density"].append(dense)
        ok = ok and dense
    for combo in itertools.product(*w.branch_sets):
        report["tuples"] += 1
        if gamma(combo) != w.color:
            report["color_failures"] += 1
            ok = False
    return ok, report
