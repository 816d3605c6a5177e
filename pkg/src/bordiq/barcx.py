"""Finite groups by multiplication table, bar-construction skeleta and their chain complexes."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations, product as iproduct
from typing import Sequence

from .chain import BasedChainComplex, cellular_chain_complex, moore_chain_complex
from .kernel import Cell, Facet, SimplicialCellComplex, SimplicialComplex


class GroupAxiomError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteGroup:
    table: tuple[tuple[int, ...], ...]
    name: str = ""

    def __post_init__(self):
        issues = self.check()
        if issues:
            raise GroupAxiomError("; ".join(issues[:3]))

    @property
    def order(self) -> int:
        return len(self.table)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.table[a].index(0)

    def check(self) -> list[str]:
        d = len(self.table)
        T = self.table
        issues = []
        if d == 0 or any(len(r) != d for r in T):
            return ["table is not square"]
        if any(not 0 <= x < d for r in T for x in r):
            return ["entries out of range"]
        if any(T[0][a] != a or T[a][0] != a for a in range(d)):
            issues.append("index 0 is not the identity")
        if any(0 not in T[a] for a in range(d)):
            issues.append("missing inverses")
        for a, b, c in iproduct(range(d), repeat=3):
            if T[T[a][b]][c] != T[a][T[b][c]]:
                issues.append(f"not associative at {(a, b, c)}")
                break
        return issues

    @classmethod
    def cyclic(cls, d: int) -> "FiniteGroup":
        return cls(tuple(tuple((a + b) % d for b in range(d)) for a in range(d)), f"Z{d}")

    @classmethod
    def trivial(cls) -> "FiniteGroup":
        return cls(((0,),), "1")

    @classmethod
    def symmetric3(cls) -> "FiniteGroup":
        elems = sorted(permutations(range(3)))
        idx = {p: i for i, p in enumerate(elems)}
        table = tuple(tuple(idx[tuple(p[q[i]] for i in range(3))] for q in elems) for p in elems)
        return cls(table, "S3")


def collapse(tup: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Drop identity entries; returns the nondegenerate tuple and the vertex-slot merge map."""
    kept = tuple(g for g in tup if g != 0)
    slots = [0]
    for g in tup:
        slots.append(slots[-1] + (1 if g != 0 else 0))
    return kept, tuple(slots)


def bar_face(G: FiniteGroup, tup: Sequence[int], i: int) -> tuple[int, ...]:
    k = len(tup)
    if i == 0:
        return tuple(tup[1:])
    if i == k:
        return tuple(tup[:-1])
    return tuple(tup[: i - 1]) + (G.mul(tup[i - 1], tup[i]),) + tuple(tup[i + 1:])


def bar_degeneracy(tup: Sequence[int], i: int) -> tuple[int, ...]:
    return tuple(tup[:i]) + (0,) + tuple(tup[i:])


class BarSet:
    """The nerve of a finite group as a simplicial set; a k-simplex is a k-tuple of elements."""

    def __init__(self, G: FiniteGroup):
        self.G = G

    def simplices(self, k: int) -> list[tuple[int, ...]]:
        return list(iproduct(range(self.G.order), repeat=k))

    def face(self, x, i: int):
        return bar_face(self.G, x, i)

    def degeneracy(self, x, i: int):
        return bar_degeneracy(x, i)

    def is_degenerate(self, x) -> bool:
        return 0 in x

    def dim(self, x) -> int:
        return len(x)


class NerveSet:
    """An ordered simplicial complex as a simplicial set: weakly increasing vertex sequences."""

    def __init__(self, X: SimplicialComplex, order: Sequence | None = None):
        self.X = X
        self.rank = {v: i for i, v in enumerate(order if order is not None else X.vertices)}

    def simplices(self, k: int) -> list[tuple]:
        out = set()
        for s in self.X.simplices():
            vs = sorted(s, key=self.rank.__getitem__)
            for combo in _multisets(vs, k + 1):
                if set(combo) == set(vs):
                    out.add(combo)
        return sorted(out, key=lambda c: [self.rank[v] for v in c])

    def face(self, x, i: int):
        return x[:i] + x[i + 1:]

    def degeneracy(self, x, i: int):
        return x[: i + 1] + x[i:]

    def is_degenerate(self, x) -> bool:
        return len(set(x)) < len(x)

    def dim(self, x) -> int:
        return len(x) - 1


def _multisets(vs: list, size: int):
    yield from combinations_with_replacement(vs, size)


@dataclass
class BarSkeleton:
    group: FiniteGroup
    cap: int
    complex: SimplicialCellComplex
    index: dict[tuple[int, ...], int]

    def cell(self, tup: Sequence[int]) -> int:
        return self.index[tuple(tup)]

    def check_simplicial_identities(self) -> list[str]:
        bad = []
        for tup in self.index:
            k = len(tup)
            for i in range(k + 1):
                for j in range(i + 1, k + 1):
                    a = bar_face(self.group, bar_face(self.group, tup, j), i)
                    b = bar_face(self.group, bar_face(self.group, tup, i), j - 1)
                    if a != b:
                        bad.append(f"d{i}d{j} != d{j - 1}d{i} on {tup}")
        return bad


def bar_skeleton(G: FiniteGroup, n: int) -> BarSkeleton:
    cx = SimplicialCellComplex()
    index: dict[tuple[int, ...], int] = {}
    elems = range(1, G.order)
    for k in range(n + 1):
        for tup in iproduct(elems, repeat=k):
            facets = []
            for i in range(k + 1 if k else 0):
                face = bar_face(G, tup, i)
                kept, slots = collapse(face)
                facets.append(Facet(index[kept], slots))
            index[tup] = cx.add(Cell(k, tuple(facets), tup))
    return BarSkeleton(G, n, cx, index)


def moore_complex(G: FiniteGroup, n: int) -> BasedChainComplex:
    return moore_chain_complex(BarSet(G), n)


def cellular_boundary(B: BarSkeleton) -> BasedChainComplex:
    return cellular_chain_complex(B.complex)
