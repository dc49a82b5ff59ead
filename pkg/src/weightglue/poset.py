"""Finite posets viewed as Alexandrov spaces (open sets = up-sets)."""
from __future__ import annotations

from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

__all__ = ["Poset", "PosetError", "NotDownSet"]


class PosetError(ValueError):
    pass


class NotDownSet(PosetError):
    pass


class Poset:
    """A finite poset on string labels, given by covering (or any) relations.

    Element order is the order of ``elements``; every iteration in the package
    follows it, which keeps outputs deterministic.
    """

    def __init__(self, elements: Sequence[str], relations: Iterable[tuple[str, str]] = ()):
        elements = tuple(str(e) for e in elements)
        if len(set(elements)) != len(elements):
            raise PosetError("duplicate poset elements")
        self.elements = elements
        self.index = {e: k for k, e in enumerate(elements)}
        n = len(elements)
        leq = [[i == j for j in range(n)] for i in range(n)]
        for x, y in relations:
            if x not in self.index or y not in self.index:
                raise PosetError(f"relation ({x}, {y}) mentions an unknown element")
            leq[self.index[x]][self.index[y]] = True
        for k in range(n):
            for i in range(n):
                if leq[i][k]:
                    row_k = leq[k]
                    row_i = leq[i]
                    for j in range(n):
                        if row_k[j]:
                            row_i[j] = True
        for i in range(n):
            for j in range(i + 1, n):
                if leq[i][j] and leq[j][i]:
                    raise PosetError(f"relations are not antisymmetric at {elements[i]}, {elements[j]}")
        self._leq = tuple(tuple(r) for r in leq)

    # comparison -------------------------------------------------------------
    def leq(self, x: str, y: str) -> bool:
        return self._leq[self.index[x]][self.index[y]]

    def less(self, x: str, y: str) -> bool:
        return x != y and self.leq(x, y)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, Poset) and self.elements == other.elements and self._leq == other._leq

    def __hash__(self) -> int:
        return hash((self.elements, self._leq))

    def __repr__(self) -> str:
        return f"Poset({list(self.elements)}, covers={self.covers})"

    # structure --------------------------------------------------------------
    @cached_property
    def strict_pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple((x, y) for x in self.elements for y in self.elements if self.less(x, y))

    @cached_property
    def covers(self) -> tuple[tuple[str, str], ...]:
        out = []
        for x, y in self.strict_pairs:
            if not any(self.less(x, z) and self.less(z, y) for z in self.elements):
                out.append((x, y))
        return tuple(out)

    def up(self, x: str) -> tuple[str, ...]:
        return tuple(y for y in self.elements if self.leq(x, y))

    def down(self, x: str) -> tuple[str, ...]:
        return tuple(y for y in self.elements if self.leq(y, x))

    def down_closure(self, subset: Iterable[str]) -> tuple[str, ...]:
        s = set(subset)
        return tuple(y for y in self.elements if any(self.leq(y, x) for x in s))

    def is_down_set(self, subset: Iterable[str]) -> bool:
        s = set(subset)
        return all(y in s for x in s for y in self.down(x))

    def is_up_set(self, subset: Iterable[str]) -> bool:
        s = set(subset)
        return all(y in s for x in s for y in self.up(x))

    def is_convex(self, subset: Iterable[str]) -> bool:
        s = set(subset)
        return all(z in s for x in s for y in s for z in self.elements
                   if self.leq(x, z) and self.leq(z, y))

    def ordered(self, subset: Iterable[str]) -> tuple[str, ...]:
        s = set(subset)
        missing = s - set(self.elements)
        if missing:
            raise PosetError(f"unknown elements {sorted(missing)}")
        return tuple(e for e in self.elements if e in s)

    def sub(self, subset: Iterable[str]) -> "Poset":
        """Induced subposet, keeping the ambient element order."""
        els = self.ordered(subset)
        return Poset(els, [(x, y) for x, y in self.strict_pairs if x in els and y in els])

    def opposite(self) -> "Poset":
        return Poset(self.elements, [(y, x) for x, y in self.strict_pairs])

    def chains(self, subset: Iterable[str] | None = None) -> tuple[tuple[str, ...], ...]:
        """All nonempty strictly increasing chains, shortest first."""
        els = self.elements if subset is None else self.ordered(subset)
        out: list[tuple[str, ...]] = [(x,) for x in els]
        frontier = list(out)
        while frontier:
            nxt = []
            for c in frontier:
                for y in els:
                    if self.less(c[-1], y):
                        nxt.append(c + (y,))
            out.extend(nxt)
            frontier = nxt
        return tuple(out)

    @cached_property
    def height(self) -> int:
        """Length (number of strict steps) of the longest chain."""
        return max((len(c) - 1 for c in self.chains()), default=0)

    def is_antichain(self, subset: Iterable[str]) -> bool:
        return not any(self.less(x, y) for x, y in combinations(list(subset), 2)) and \
            not any(self.less(y, x) for x, y in combinations(list(subset), 2))


def chain_poset(labels: Sequence[str]) -> Poset:
    return Poset(labels, list(zip(labels, labels[1:])))
