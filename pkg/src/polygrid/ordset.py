"""Finite strictly increasing sets of naturals with positional indexing.

The core value type for everything downstream: a set a is read as the
function eta -> a(eta) listing its elements in increasing order, so
subsets of positions can be pulled back to subsets of elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


@dataclass(frozen=True)
class OrdSet:
    """Immutable strictly increasing tuple of naturals."""

    elems: tuple[int, ...] = ()

    def __post_init__(self):
        for x in self.elems:
            if not isinstance(x, int) or x < 0:
                raise ValueError(f"not a natural: {x!r}")
        if any(a >= b for a, b in zip(self.elems, self.elems[1:])):
            raise ValueError(f"not strictly increasing: {self.elems}")

    @classmethod
    def of(cls, xs: Iterable[int]) -> "OrdSet":
        """Build from any iterable of distinct naturals, sorting first."""
        t = tuple(sorted(xs))
        if len(t) != len(set(t)):
            raise ValueError("duplicate elements")
        return cls(t)

    @property
    def otp(self) -> int:
        return len(self.elems)

    def at(self, eta: int) -> int:
        """The unique element with exactly eta predecessors in the set."""
        if not 0 <= eta < len(self.elems):
            raise IndexError(f"position {eta} out of range for otp {len(self.elems)}")
        return self.elems[eta]

    def select(self, positions: Iterable[int]) -> "OrdSet":
        """Subset sitting at the given positions: {a(eta) : eta in I}."""
        return OrdSet(tuple(self.at(eta) for eta in sorted(set(positions))))

    def position_of(self, x: int) -> int:
        """Inverse of at(): the number of elements below x, for x a member."""
        try:
            return self.elems.index(x)
        except ValueError:
            raise ValueError(f"{x} not a member") from None

    def union(self, other: "OrdSet") -> "OrdSet":
        return OrdSet.of(set(self.elems) | set(other.elems))

    def intersect(self, other: "OrdSet") -> "OrdSet":
        common = set(self.elems) & set(other.elems)
        return OrdSet(tuple(x for x in self.elems if x in common))

    def __contains__(self, x: int) -> bool:
        return x in self.elems

    def __iter__(self) -> Iterator[int]:
        return iter(self.elems)

    def __len__(self) -> int:
        return len(self.elems)

    def to_json(self) -> list[int]:
        return list(self.elems)

    @classmethod
    def from_json(cls, data: list[int]) -> "OrdSet":
        return cls(tuple(data))


def index(a: OrdSet, eta: int) -> int:
    """a(eta): the unique member of a with order type eta below it."""
    return a.at(eta)


def slice(a: OrdSet, I: OrdSet) -> OrdSet:  # noqa: A001 - the operation's name
    """a[I] = {a(eta) : eta in I}."""
    return a.select(I.elems)


def aligned(a: OrdSet, b: OrdSet) -> bool:
    """Same order type, and every common element occupies the same position."""
    if a.otp != b.otp:
        return False
    pos_b = {v: i for i, v in enumerate(b.elems)}
    for i, v in enumerate(a.elems):
        j = pos_b.get(v)
        if j is not None and j != i:
            return False
    return True


def rset(a: OrdSet, b: OrdSet) -> OrdSet:
    """Positions where two aligned sets carry the same element.

    Postcondition (tested): slice(a, rset(a,b)) == slice(b, rset(a,b)) ==
    the intersection of a and b.
    """
    if not aligned(a, b):
        raise ValueError("sets are not aligned")
    return OrdSet(tuple(i for i in range(a.otp) if a.elems[i] == b.elems[i]))
