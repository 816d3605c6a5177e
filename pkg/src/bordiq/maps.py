"""Simplicial-cellular maps, group cocycles and composition with retractions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable

from .barcx import BarSkeleton, FiniteGroup, bar_skeleton, collapse
from .kernel import SimplicialCellComplex, SimplicialComplex, StructureError


class InvalidCocycleError(ValueError):
    pass


class CompositionError(ValueError):
    pass


@dataclass
class SimplicialCellularMap:
    """Per source simplex (or source cell id): target cell and the slot of each source vertex.

    For a simplicial source the key is the sorted vertex tuple and ``assign[i]`` is the target
    slot of the ``i``-th vertex; for a simplicial-cell source the key is the cell id and
    ``assign[s]`` is the target slot of source slot ``s``."""

    source: SimplicialComplex | SimplicialCellComplex
    target: SimplicialCellComplex
    assignment: dict[Hashable, tuple[int, tuple[int, ...]]] = field(default_factory=dict)

    def __getitem__(self, key) -> tuple[int, tuple[int, ...]]:
        return self.assignment[key]

    def cell_dim(self, key) -> int:
        return self.target.cells[self.assignment[key][0]].dim

    def image_dim(self) -> int:
        return max((self.cell_dim(k) for k in self.assignment), default=-1)

    def vertex_slots(self, simplex: tuple) -> dict:
        cid, a = self.assignment[simplex]
        return dict(zip(simplex, a))

    @classmethod
    def from_top(cls, source: SimplicialComplex, target: SimplicialCellComplex,
                 top: dict[tuple, tuple[int, tuple[int, ...]]]) -> "SimplicialCellularMap":
        """Extend assignments on maximal simplices to all faces through the attaching data."""
        out: dict = {}
        for s, (cid, a) in top.items():
            s = tuple(s)
            slot = dict(zip(s, a))
            for face in _all_faces(s):
                sub, m = target.face_of(cid, {slot[v] for v in face})
                rec = (sub, tuple(m[slot[v]] for v in face))
                prev = out.get(face)
                if prev is not None and prev != rec:
                    raise StructureError(f"incompatible assignments on face {face}")
                out[face] = rec
        return cls(source, target, out)


def _all_faces(s: tuple):
    from itertools import combinations

    for k in range(1, len(s) + 1):
        yield from combinations(s, k)


@dataclass
class MapReport:
    ok: bool
    issues: list[str]


def validate(f: SimplicialCellularMap) -> MapReport:
    issues: list[str] = []
    T = f.target
    if isinstance(f.source, SimplicialComplex):
        keys = f.source.simplices()
        for s in keys:
            if s not in f.assignment:
                issues.append(f"simplex {s} unassigned")
                continue
            cid, a = f.assignment[s]
            tdim = T.cells[cid].dim
            if len(a) != len(s) or set(a) != set(range(tdim + 1)):
                issues.append(f"simplex {s}: vertex map not onto cell {cid}")
                continue
            if tdim > len(s) - 1:
                issues.append(f"simplex {s}: image dimension {tdim} too large")
            if len(s) > 1:
                for i in range(len(s)):
                    face = s[:i] + s[i + 1:]
                    if face not in f.assignment:
                        continue
                    sub, m = T.face_of(cid, {a[j] for j in range(len(s)) if j != i})
                    want = (sub, tuple(m[a[j]] for j in range(len(s)) if j != i))
                    if f.assignment[face] != want:
                        issues.append(f"simplex {s}: face {face} incompatible")
    else:
        S = f.source
        for cid, c in enumerate(S.cells):
            if cid not in f.assignment:
                continue
            tc, a = f.assignment[cid]
            tdim = T.cells[tc].dim
            if len(a) != c.dim + 1 or set(a) != set(range(tdim + 1)):
                issues.append(f"cell {cid}: slot map not onto cell {tc}")
                continue
            for i, fc in enumerate(c.facets):
                if fc.target not in f.assignment:
                    continue
                rest = [s for s in range(c.dim + 1) if s != i]
                sub, m = T.face_of(tc, {a[s] for s in rest})
                ft, fa = f.assignment[fc.target]
                if ft != sub or any(fa[fc.assign[pos]] != m[a[s]] for pos, s in enumerate(rest)):
                    issues.append(f"cell {cid}: facet {i} incompatible")
    return MapReport(not issues, issues)


@dataclass
class Cocycle:
    group: FiniteGroup
    labels: dict[tuple, int]

    def label(self, u, v) -> int:
        if u == v:
            return 0
        if u < v:
            return self.labels[(u, v)]
        return self.group.inv(self.labels[(v, u)])

    def violations(self, M: SimplicialComplex) -> list[tuple]:
        G = self.group
        return [t for t in sorted(M.simplices(2))
                if G.mul(self.label(t[0], t[1]), self.label(t[1], t[2])) != self.label(t[0], t[2])]


def from_cocycle(M: SimplicialComplex, c: Cocycle, n: int | None = None,
                 skeleton: BarSkeleton | None = None) -> tuple[SimplicialCellularMap, BarSkeleton]:
    """Map each simplex v_0 < ... < v_k to the bar cell of (g_{v0v1}, ..., g_{v(k-1)vk}) with identities collapsed.

    Without an explicit cap the skeleton is cut at the dimension of the image."""
    bad = c.violations(M)
    if bad:
        raise InvalidCocycleError(f"cocycle condition fails on triangle {bad[0]}")
    images = {}
    for s in M.simplices():
        images[s] = collapse(tuple(c.label(s[i], s[i + 1]) for i in range(len(s) - 1)))
    top = max((len(k) for k, _ in images.values()), default=0)
    if skeleton is not None:
        n = skeleton.cap
    n = top if n is None else n
    if top > n:
        raise ValueError(f"image reaches dimension {top}, above the skeleton cap {n}")
    B = skeleton or bar_skeleton(c.group, n)
    assignment = {s: (B.index[kept], slots) for s, (kept, slots) in images.items()}
    return SimplicialCellularMap(M, B.complex, assignment), B


def compose_retraction(f: SimplicialCellularMap, r: SimplicialCellularMap) -> SimplicialCellularMap:
    """r after f; ``r`` must be defined on every cell hit by ``f``."""
    out = {}
    for key, (cid, a) in f.assignment.items():
        if cid not in r.assignment:
            raise CompositionError(f"cell {cid} lies outside the domain of the retraction")
        tc, b = r.assignment[cid]
        out[key] = (tc, tuple(b[x] for x in a))
    return SimplicialCellularMap(f.source, r.target, out)


def identity_map(X: SimplicialComplex) -> SimplicialCellularMap:
    T, ids = SimplicialCellComplex.from_simplicial(X)
    return SimplicialCellularMap(X, T, {s: (ids[s], tuple(range(len(s)))) for s in X.simplices()})


def constant_map(X: SimplicialComplex) -> SimplicialCellularMap:
    from .kernel import Cell

    T = SimplicialCellComplex([Cell(0)])
    return SimplicialCellularMap(X, T, {s: (0, (0,) * len(s)) for s in X.simplices()})
