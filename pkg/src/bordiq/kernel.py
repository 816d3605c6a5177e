"""Simplicial, simplicial-cell and convex-cell complexes with their structural operations."""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Callable, Hashable, Iterable, Sequence


class MalformedSimplexError(ValueError):
    pass


class MissingSimplexError(KeyError):
    pass


class StructureError(ValueError):
    pass


Simplex = tuple


def _faces(s: Simplex) -> Iterable[Simplex]:
    for k in range(1, len(s) + 1):
        yield from combinations(s, k)


class SimplicialComplex:
    """Downward-closed abstract complex over hashable, mutually comparable vertex ids.

    Simplices are stored as sorted tuples.  ``orientation`` optionally maps each
    top-dimensional simplex to +1/-1 relative to its sorted vertex order.
    """

    def __init__(self, maximal: Iterable[Sequence[Hashable]] = (), orientation: dict | None = None):
        simp: set[Simplex] = set()
        for raw in maximal:
            s = tuple(sorted(raw))
            if len(set(s)) != len(s):
                raise MalformedSimplexError(f"repeated vertex in simplex {tuple(raw)}")
            if not s or s in simp:
                continue
            simp.update(_faces(s))
        by_dim: dict[int, set[Simplex]] = defaultdict(set)
        for s in simp:
            by_dim[len(s) - 1].add(s)
        self._by_dim = {d: frozenset(v) for d, v in by_dim.items()}
        self._all = frozenset(simp)
        self.dim = max(self._by_dim) if self._by_dim else -1
        self.orientation = None
        if orientation is not None:
            orient = {tuple(sorted(k)): int(v) for k, v in orientation.items()}
            if set(orient) != set(self.simplices(self.dim)):
                raise StructureError("orientation must cover exactly the top simplices")
            self.orientation = orient

    def simplices(self, k: int | None = None) -> frozenset:
        if k is None:
            return self._all
        return self._by_dim.get(k, frozenset())

    @property
    def vertices(self) -> list:
        return sorted(s[0] for s in self.simplices(0))

    def top(self) -> list[Simplex]:
        return sorted(self.simplices(self.dim))

    def maximal(self) -> list[Simplex]:
        out = []
        for s in self._all:
            if not any(len(t) == len(s) + 1 and set(s) <= set(t) for t in self._cofaces_1(s)):
                out.append(s)
        return sorted(out)

    def _maximal_at(self, v) -> list[Simplex]:
        idx = self.__dict__.get("_vidx")
        if idx is None:
            idx = defaultdict(list)
            for m in self.maximal():
                for x in m:
                    idx[x].append(m)
            self.__dict__["_vidx"] = idx
        return idx.get(v, [])

    def _cofaces_1(self, s: Simplex) -> list[Simplex]:
        idx = self._coface_index()
        return idx.get(s, [])

    def _coface_index(self) -> dict:
        cached = getattr(self, "_cof", None)
        if cached is None:
            cached = defaultdict(list)
            for t in self._all:
                if len(t) > 1:
                    for i in range(len(t)):
                        cached[t[:i] + t[i + 1:]].append(t)
            self._cof = cached
        return cached

    def __contains__(self, s) -> bool:
        return tuple(sorted(s)) in self._all

    def __len__(self) -> int:
        return len(self._all)

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplicialComplex) and self._all == other._all

    def __hash__(self) -> int:
        return hash(self._all)

    def __repr__(self) -> str:
        counts = [len(self.simplices(k)) for k in range(self.dim + 1)]
        return f"SimplicialComplex(dim={self.dim}, f={counts})"

    def f_vector(self) -> list[int]:
        return [len(self.simplices(k)) for k in range(self.dim + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.f_vector()))

    def relabel(self, mapping: Callable[[Any], Any] | dict) -> "SimplicialComplex":
        fn = mapping.get if isinstance(mapping, dict) else mapping
        return SimplicialComplex([tuple(fn(v) for v in s) for s in self.maximal()])


def build_simplicial(maximal_simplices: Iterable[Sequence[Hashable]], orientation: dict | None = None) -> SimplicialComplex:
    return SimplicialComplex(maximal_simplices, orientation)


def star_link(X: SimplicialComplex, A: Sequence) -> tuple[SimplicialComplex, SimplicialComplex]:
    a = tuple(sorted(A))
    if a not in X.simplices():
        raise MissingSimplexError(a)
    sa = set(a)
    containing = [s for s in X._maximal_at(a[0]) if sa <= set(s)]
    star = SimplicialComplex(containing)
    link = SimplicialComplex([r for r in (tuple(v for v in s if v not in sa) for s in containing) if r])
    return star, link


def boundary_complex(X: SimplicialComplex) -> SimplicialComplex:
    """Subcomplex spanned by the codimension-one faces lying in exactly one top simplex."""
    if X.dim <= 0:
        return SimplicialComplex()
    count: dict[Simplex, int] = defaultdict(int)
    for s in X.simplices(X.dim):
        for i in range(len(s)):
            count[s[:i] + s[i + 1:]] += 1
    return SimplicialComplex([f for f, c in count.items() if c == 1])


def connected_components(X: SimplicialComplex) -> list[list]:
    parent = {v: v for v in X.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in X.simplices(1):
        ra, rb = find(e[0]), find(e[1])
        if ra != rb:
            parent[ra] = rb
    groups: dict = defaultdict(list)
    for v in X.vertices:
        groups[find(v)].append(v)
    return sorted(groups.values())


def strong_components(X: SimplicialComplex) -> list[list[Simplex]]:
    """Top simplices grouped by adjacency through codimension-one faces."""
    tops = X.top()
    by_face: dict[Simplex, list[int]] = defaultdict(list)
    for idx, s in enumerate(tops):
        for i in range(len(s)):
            by_face[s[:i] + s[i + 1:]].append(idx)
    seen = [False] * len(tops)
    comps = []
    for start in range(len(tops)):
        if seen[start]:
            continue
        seen[start] = True
        queue, comp = deque([start]), []
        while queue:
            cur = queue.popleft()
            comp.append(tops[cur])
            s = tops[cur]
            for i in range(len(s)):
                for nb in by_face[s[:i] + s[i + 1:]]:
                    if not seen[nb]:
                        seen[nb] = True
                        queue.append(nb)
        comps.append(comp)
    return comps


def orient(X: SimplicialComplex) -> dict | None:
    """Coherent orientation of a pseudomanifold, or None when none exists."""
    tops = X.top()
    if not tops:
        return {}
    by_face: dict[Simplex, list[tuple[Simplex, int]]] = defaultdict(list)
    for s in tops:
        for i in range(len(s)):
            by_face[s[:i] + s[i + 1:]].append((s, i))
    signs: dict[Simplex, int] = {}
    for start in tops:
        if start in signs:
            continue
        signs[start] = 1
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                induced = signs[s] * (-1) ** i
                for t, j in by_face[face]:
                    if t == s:
                        continue
                    want = -induced * (-1) ** j
                    if t in signs:
                        if signs[t] != want:
                            return None
                    else:
                        signs[t] = want
                        queue.append(t)
    return signs


@dataclass
class ManifoldReport:
    dim: int
    pseudomanifold: bool
    certified: bool
    partial: bool
    components: int
    euler: int
    issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.pseudomanifold and not self.issues


def _is_circle(X: SimplicialComplex) -> bool:
    if X.dim != 1 or X.maximal() != sorted(X.simplices(1)):
        return False
    deg: dict = defaultdict(int)
    for e in X.simplices(1):
        deg[e[0]] += 1
        deg[e[1]] += 1
    return all(d == 2 for d in deg.values()) and len(connected_components(X)) == 1


def _is_two_sphere(X: SimplicialComplex) -> bool:
    if X.dim != 2 or len(X.maximal()) != len(X.simplices(2)):
        return False
    for e in X.simplices(1):
        if len(X._cofaces_1(e)) != 2:
            return False
    for v in X.vertices:
        _, lk = star_link(X, (v,))
        if not _is_circle(lk):
            return False
    return len(connected_components(X)) == 1 and X.euler_characteristic() == 2


def verify_closed_manifold(X: SimplicialComplex, n: int) -> ManifoldReport:
    issues: list[str] = []
    if len(X) == 0:
        return ManifoldReport(n, True, True, False, 0, 0, [])
    if X.dim != n:
        issues.append(f"dimension {X.dim} differs from {n}")
    maximal = X.maximal()
    impure = [s for s in maximal if len(s) != n + 1]
    if impure:
        issues.append(f"not pure: {len(impure)} maximal simplices below dimension {n}")
    if n >= 1:
        for f in sorted(X.simplices(n - 1)):
            c = len(X._cofaces_1(f))
            if c != 2:
                issues.append(f"face {f} lies in {c} top simplices")
    pseudo = not issues
    comps = len(strong_components(X)) if n >= 0 else 0
    certified = False
    partial = False
    if pseudo:
        if n <= 1:
            certified = True
        elif n == 2:
            for v in X.vertices:
                _, lk = star_link(X, (v,))
                if not _is_circle(lk):
                    issues.append(f"link of vertex {v} is not a circle")
            certified = not issues
        elif n == 3:
            for v in X.vertices:
                _, lk = star_link(X, (v,))
                if not _is_two_sphere(lk):
                    issues.append(f"link of vertex {v} is not a 2-sphere")
            certified = not issues
        else:
            for v in X.vertices:
                _, lk = star_link(X, (v,))
                sub = verify_closed_manifold(lk, n - 1)
                if not sub.pseudomanifold or sub.components != 1:
                    issues.append(f"link of vertex {v} is not a connected pseudomanifold")
            partial = True
    return ManifoldReport(n, pseudo, certified, partial, comps, X.euler_characteristic(), issues)


@dataclass
class ComplexityReport:
    simplex_count: int
    top_count: int
    geometry_type: int
    histogram: list[int]
    bound_applicable: bool
    bound_holds: bool | None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def complexity(X: SimplicialComplex) -> ComplexityReport:
    hist = X.f_vector()
    total = sum(hist)
    top = hist[-1] if hist else 0
    per_vertex: dict = defaultdict(int)
    for s in X.simplices():
        for v in s:
            per_vertex[v] += 1
    geom = max(per_vertex.values(), default=0)
    applicable = X.dim >= 0 and verify_closed_manifold(X, X.dim).pseudomanifold
    holds = (top <= total <= 2 ** X.dim * top) if applicable else None
    return ComplexityReport(total, top, geom, hist, applicable, holds)


# ---------------------------------------------------------------------------
# simplicial-cell complexes


@dataclass(frozen=True)
class Facet:
    target: int
    assign: tuple[int, ...]


@dataclass(frozen=True)
class Cell:
    dim: int
    facets: tuple[Facet, ...] = ()
    name: Any = None


class SimplicialCellComplex:
    """Cells are standard simplices; facet ``i`` (slot ``i`` dropped) attaches to a
    lower cell through a surjection from the remaining slots onto the target's slots."""

    def __init__(self, cells: Sequence[Cell] = ()):
        self.cells: list[Cell] = list(cells)
        self._face_cache: dict = {}

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def dim(self) -> int:
        return max((c.dim for c in self.cells), default=-1)

    def add(self, cell: Cell) -> int:
        self.cells.append(cell)
        return len(self.cells) - 1

    def cells_of_dim(self, k: int) -> list[int]:
        return [i for i, c in enumerate(self.cells) if c.dim == k]

    def count_by_dim(self) -> list[int]:
        return [len(self.cells_of_dim(k)) for k in range(self.dim + 1)]

    def facet_image(self, cid: int, i: int) -> tuple[int, tuple[int, ...]]:
        """Target of facet ``i`` with the assignment written on the parent's slots (slot ``i`` maps to -1)."""
        f = self.cells[cid].facets[i]
        slots = [s for s in range(self.cells[cid].dim + 1) if s != i]
        full = [-1] * (self.cells[cid].dim + 1)
        for pos, s in enumerate(slots):
            full[s] = f.assign[pos]
        return f.target, tuple(full)

    def face_of(self, cid: int, slots: Iterable[int]) -> tuple[int, dict[int, int]]:
        """The cell carrying the face of ``cid`` spanned by ``slots``, with the induced slot map."""
        S = tuple(sorted(set(slots)))
        key = (cid, S)
        hit = self._face_cache.get(key)
        if hit is not None:
            return hit
        cell = self.cells[cid]
        if not S:
            raise StructureError("empty face")
        if len(S) == cell.dim + 1:
            res = (cid, {s: s for s in S})
        else:
            drop = next(s for s in range(cell.dim + 1) if s not in S)
            tgt, full = self.facet_image(cid, drop)
            sub, m = self.face_of(tgt, {full[s] for s in S})
            res = (sub, {s: m[full[s]] for s in S})
        self._face_cache[key] = res
        return res

    def validate(self) -> list[str]:
        issues = []
        for cid, c in enumerate(self.cells):
            if c.dim == 0:
                if c.facets:
                    issues.append(f"cell {cid}: 0-cell with facets")
                continue
            if len(c.facets) != c.dim + 1:
                issues.append(f"cell {cid}: expected {c.dim + 1} facets")
                continue
            for i, f in enumerate(c.facets):
                if not 0 <= f.target < len(self.cells):
                    issues.append(f"cell {cid} facet {i}: unknown target {f.target}")
                    continue
                t = self.cells[f.target]
                if t.dim > c.dim - 1:
                    issues.append(f"cell {cid} facet {i}: target dim {t.dim} too large")
                if len(f.assign) != c.dim or set(f.assign) != set(range(t.dim + 1)):
                    issues.append(f"cell {cid} facet {i}: assignment not a surjection")
        if issues:
            return issues
        for cid, c in enumerate(self.cells):
            if c.dim < 2:
                continue
            for i, j in combinations(range(c.dim + 1), 2):
                keep = [s for s in range(c.dim + 1) if s not in (i, j)]
                results = []
                for first in (i, j):
                    tgt, full = self.facet_image(cid, first)
                    self._face_cache.clear()
                    sub, m = self.face_of(tgt, {full[s] for s in keep})
                    results.append((sub, tuple(m[full[s]] for s in keep)))
                if results[0] != results[1]:
                    issues.append(f"cell {cid}: faces via facets {i},{j} disagree")
        self._face_cache.clear()
        return issues

    def skeleton(self, k: int) -> tuple["SimplicialCellComplex", dict[int, int]]:
        keep = [i for i, c in enumerate(self.cells) if c.dim <= k]
        idmap = {old: new for new, old in enumerate(keep)}
        cells = [
            Cell(self.cells[i].dim, tuple(Facet(idmap[f.target], f.assign) for f in self.cells[i].facets), self.cells[i].name)
            for i in keep
        ]
        return SimplicialCellComplex(cells), idmap

    @classmethod
    def from_simplicial(cls, X: SimplicialComplex) -> tuple["SimplicialCellComplex", dict]:
        order = sorted(X.simplices(), key=lambda s: (len(s), s))
        ids: dict = {}
        cx = cls()
        for s in order:
            facets = []
            if len(s) > 1:
                for i in range(len(s)):
                    facets.append(Facet(ids[s[:i] + s[i + 1:]], tuple(range(len(s) - 1))))
            ids[s] = cx.add(Cell(len(s) - 1, tuple(facets), s))
        return cx, ids


def cone_complex(L: SimplicialCellComplex) -> tuple[SimplicialCellComplex, int, dict[int, int]]:
    """Cone on ``L``: returns the cone complex, the apex id and the cell -> cone-cell table.

    Slot 0 of every cone cell is the apex; slot ``s+1`` is slot ``s`` of the base cell."""
    K = SimplicialCellComplex(list(L.cells))
    apex = K.add(Cell(0, (), ("apex",)))
    cone: dict[int, int] = {}
    for cid in sorted(range(len(L.cells)), key=lambda c: L.cells[c].dim):
        c = L.cells[cid]
        facets = [Facet(cid, tuple(range(c.dim + 1)))]
        if c.dim == 0:
            facets.append(Facet(apex, (0,)))
        else:
            for f in c.facets:
                facets.append(Facet(cone[f.target], (0,) + tuple(1 + a for a in f.assign)))
        cone[cid] = K.add(Cell(c.dim + 1, tuple(facets), ("cone", c.name)))
    return K, apex, cone


# ---------------------------------------------------------------------------
# convex cells


@dataclass(frozen=True)
class ConvexCell:
    """A convex polytope given combinatorially by its vertex ids and a family of
    supporting vertex sets that contains every facet (redundant faces are allowed).

    ``factors`` records the product-of-simplices structure when there is one;
    ``tag`` names the ambient simplex of the host complex; ``label`` is an optional carrier."""

    vertices: frozenset
    supports: tuple[frozenset, ...]
    factors: tuple[tuple, ...] | None = None
    tag: Any = None
    label: Any = None

    @property
    def size(self) -> int:
        return len(self.vertices)


def simplex_cell(vertices: Sequence, tag: Any = None, label: Any = None) -> ConvexCell:
    vs = tuple(vertices)
    if len(set(vs)) != len(vs):
        raise MalformedSimplexError(f"repeated vertex in {vs}")
    full = frozenset(vs)
    sup = tuple(full - {v} for v in vs) if len(vs) > 1 else ()
    return ConvexCell(full, sup, (vs,), tag, label)


def product_cell(a: ConvexCell, b: ConvexCell, combine: Callable[[Any, Any], Any] = lambda x, y: (x, y),
                 tag: Any = None, label: Any = None) -> ConvexCell:
    verts = frozenset(combine(x, y) for x in a.vertices for y in b.vertices)
    sup = [frozenset(combine(x, y) for x in h for y in b.vertices) for h in a.supports]
    sup += [frozenset(combine(x, y) for x in a.vertices for y in h) for h in b.supports]
    factors = None
    if a.factors is not None and b.factors is not None:
        factors = a.factors + b.factors
    return ConvexCell(verts, tuple(s for s in sup if s), factors, tag, label)


def product_of_simplices(factors: Sequence[Sequence], combine: Callable[..., Any] = lambda *xs: xs,
                         tag: Any = None, label: Any = None) -> ConvexCell:
    """Product cell with vertices ``combine(x_0, ..., x_m)`` over all factor choices."""
    from itertools import product as iproduct

    fs = [tuple(f) for f in factors]
    verts = frozenset(combine(*xs) for xs in iproduct(*fs))
    sup = []
    for i, f in enumerate(fs):
        if len(f) < 2:
            continue
        for drop in f:
            rest = [g if j != i else tuple(x for x in g if x != drop) for j, g in enumerate(fs)]
            sup.append(frozenset(combine(*xs) for xs in iproduct(*rest)))
    return ConvexCell(verts, tuple(sup), tuple(fs), tag, label)


class FaceLattice:
    """Faces of a family of convex cells, identified by vertex sets."""

    def __init__(self, cells: Iterable[ConvexCell]):
        self.cells = list(cells)
        self._owner: dict[frozenset, ConvexCell] = {}
        self._facets: dict[frozenset, tuple[frozenset, ...]] = {}
        for c in self.cells:
            self._owner.setdefault(c.vertices, c)

    def facets(self, F: frozenset, owner: ConvexCell | None = None) -> tuple[frozenset, ...]:
        hit = self._facets.get(F)
        if hit is not None:
            return hit
        if owner is None:
            owner = self._owner[F]
        cands = {F & h for h in owner.supports}
        cands = [c for c in cands if c and c != F]
        maximal = tuple(c for c in cands if not any(c < d for d in cands))
        self._facets[F] = maximal
        return maximal

    def dim(self, F: frozenset, owner: ConvexCell) -> int:
        if len(F) == 1:
            return 0
        return 1 + max(self.dim(G, owner) for G in self.facets(F, owner))

    def all_faces(self) -> dict[frozenset, int]:
        out: dict[frozenset, int] = {}
        for c in self.cells:
            stack = [c.vertices]
            while stack:
                F = stack.pop()
                if F in out:
                    continue
                out[F] = self.dim(F, c)
                stack.extend(self.facets(F, c))
        return out


class ConvexCellComplex:
    def __init__(self, cells: Iterable[ConvexCell] = ()):
        self.cells = list(cells)

    def __len__(self) -> int:
        return len(self.cells)

    def faces(self) -> dict[frozenset, int]:
        return FaceLattice(self.cells).all_faces()

    def face_counts(self) -> list[int]:
        faces = self.faces()
        top = max(faces.values(), default=-1)
        return [sum(1 for d in faces.values() if d == k) for k in range(top + 1)]

    def vertices(self) -> set:
        out: set = set()
        for c in self.cells:
            out |= c.vertices
        return out

    def check_intersections(self) -> list[str]:
        """Pairwise intersections of maximal cells must be common faces."""
        faces = self.faces()
        issues = []
        by_vertex: dict = defaultdict(list)
        for idx, c in enumerate(self.cells):
            for v in c.vertices:
                by_vertex[v].append(idx)
        seen = set()
        for idxs in by_vertex.values():
            for a, b in combinations(idxs, 2):
                if (a, b) in seen:
                    continue
                seen.add((a, b))
                common = self.cells[a].vertices & self.cells[b].vertices
                if common and common not in faces:
                    issues.append(f"cells {a} and {b} meet outside a common face")
        return issues


def complex_from_simplicial(X: SimplicialComplex, tag: Callable[[tuple], Any] | None = None) -> ConvexCellComplex:
    return ConvexCellComplex(simplex_cell(s, tag=(tag(s) if tag else s)) for s in X.maximal())


@dataclass
class ProductReport:
    cells: int
    max_vertices: int
    cell_bound: int
    vertex_bound: int


def product_cells(X, Y, combine: Callable[[Any, Any], Any] = lambda x, y: (x, y)) -> tuple[ConvexCellComplex, ProductReport]:
    xs = X if isinstance(X, ConvexCellComplex) else complex_from_simplicial(X)
    ys = Y if isinstance(Y, ConvexCellComplex) else complex_from_simplicial(Y)
    cells = [product_cell(a, b, combine, tag=(a.tag, b.tag)) for a in xs.cells for b in ys.cells]
    k = max(len(xs), len(ys))
    r = max([c.size for c in xs.cells] + [c.size for c in ys.cells], default=0)
    rep = ProductReport(len(cells), max((c.size for c in cells), default=0), k * k, r * r)
    return ConvexCellComplex(cells), rep


class Puller:
    """Pulling triangulation with memoisation shared across cells.

    Each face ``F`` is triangulated as the join of its first vertex ``v`` with the
    triangulations of the facets of ``F`` not containing ``v``.  Faces shared by
    several cells therefore receive the same triangulation."""

    def __init__(self, key: Callable[[Any], Any] | None = None):
        self.key = key or (lambda v: v)
        self.lattice = FaceLattice(())
        self._tri: dict[frozenset, tuple[frozenset, ...]] = {}

    def triangulate(self, F: frozenset, owner: ConvexCell) -> tuple[frozenset, ...]:
        hit = self._tri.get(F)
        if hit is not None:
            return hit
        if len(F) == 1:
            res = (F,)
        else:
            v0 = min(F, key=self.key)
            out = []
            for G in self.lattice.facets(F, owner):
                if v0 in G:
                    continue
                out.extend(s | {v0} for s in self.triangulate(G, owner))
            if not out:
                raise StructureError(f"inconsistent face lattice at a face with {len(F)} vertices")
            res = tuple(out)
        self._tri[F] = res
        return res

    def cell(self, c: ConvexCell) -> list[tuple]:
        return [tuple(sorted(s, key=self.key)) for s in self.triangulate(c.vertices, c)]


def pulling_triangulation(C: ConvexCellComplex | Iterable[ConvexCell], order: Callable[[Any], Any] | dict | None = None,
                          puller: Puller | None = None) -> SimplicialComplex:
    cells = C.cells if isinstance(C, ConvexCellComplex) else list(C)
    if isinstance(order, dict):
        key = order.__getitem__
    else:
        key = order
    pl = puller or Puller(key)
    simplices = []
    for c in cells:
        simplices.extend(pl.cell(c))
    return SimplicialComplex(simplices)
