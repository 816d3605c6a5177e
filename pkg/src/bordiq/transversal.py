"""Inverse images of barycenters under simplicial-cellular maps, and the cobordisms between them.

Points of a source simplex ``A`` are written in barycentric coordinates ``t``; the linear
map onto a target cell sends ``t`` to ``s_j = sum of t_a over the vertices a in slot j``.
Preimages of convex pieces of the target simplex are Cayley polytopes whose vertices are
pairs (vertex of the piece, vertex of the fiber over it).

Vertex ids used throughout:

* ``F`` (a sorted tuple): barycenter of a face of the source that maps onto a top cell;
  these are the vertices of the fiber complexes.
* ``("m", a)``: an original source vertex.
* ``("v", i, F)``: the point of ``F``'s simplex lying over the inner-simplex vertex ``v_i``.
* ``("b", j, F)`` / ``("c", F')``: ends of the radial segments that sweep out the cobordisms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable

from .kernel import (
    Cell,
    ComplexityReport,
    ConvexCell,
    ConvexCellComplex,
    Facet,
    Puller,
    SimplicialCellComplex,
    SimplicialComplex,
    StructureError,
    complexity,
    orient,
    product_of_simplices,
    pulling_triangulation,
    verify_closed_manifold,
)
from .maps import SimplicialCellularMap


class DimensionError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# the fixed pattern on a top simplex


@dataclass(frozen=True)
class Piece:
    """A convex piece of the standard p-simplex, on pattern vertices ("e", i) and ("v", i)."""

    name: tuple
    vertices: tuple
    facets: tuple[frozenset, ...]


def _pattern_cells(p: int) -> list[Piece]:
    inner = tuple(("v", i) for i in range(p + 1))
    pieces = [Piece(("inner",), inner, tuple(frozenset(inner) - {x} for x in inner))]
    for j in range(p + 1):
        rest = [i for i in range(p + 1) if i != j]
        verts = tuple(("e", i) for i in rest) + tuple(("v", i) for i in rest)
        facets = [frozenset(("e", i) for i in rest), frozenset(("v", i) for i in rest)]
        for i in rest:
            side = frozenset(x for x in verts if x[1] != i)
            if side:
                facets.append(side)
        pieces.append(Piece(("ext", j), verts, tuple(facets)))
    return pieces


def pattern_pieces(p: int, triangulated: bool = False) -> list[Piece]:
    """Inner simplex plus the exterior prisms; with ``triangulated`` the prisms are pulled
    into simplices using the order e_0 < ... < e_p < v_0 < ... < v_p."""
    pieces = _pattern_cells(p)
    if not triangulated:
        return pieces
    out = [pieces[0]]
    pl = Puller()
    for pc in pieces[1:]:
        cell = ConvexCell(frozenset(pc.vertices), pc.facets)
        for k, s in enumerate(pl.cell(cell)):
            out.append(Piece(pc.name + (k,), s, tuple(frozenset(s) - {x} for x in s)))
    return out


def pattern_triangulation(p: int) -> SimplicialComplex:
    return SimplicialComplex([pc.vertices for pc in pattern_pieces(p, triangulated=True)])


def pieces_count(p: int) -> int:
    return len(pattern_pieces(p, triangulated=True))


@dataclass
class Subdivision:
    """Top cells of ``P`` cut by the pattern.  ``lower`` maps cells of dimension below ``p``
    into ``Pp``; ``pattern[sigma]`` maps each pattern simplex (as a frozenset) to its cell in
    ``Pp`` and the slot of every pattern vertex; ``origin`` is the reverse table."""

    P: SimplicialCellComplex
    Pp: SimplicialCellComplex
    p: int
    lower: dict[int, int]
    pattern: dict[int, dict[frozenset, tuple[int, dict]]]
    origin: dict[int, tuple[int, tuple]]
    inner: dict[int, int]


def top_dim_subdivision(P: SimplicialCellComplex) -> Subdivision:
    p = P.dim
    Pp = SimplicialCellComplex()
    lower: dict[int, int] = {}
    for cid, c in enumerate(P.cells):
        if c.dim < p or p == 0:
            lower[cid] = Pp.add(Cell(c.dim, tuple(Facet(lower[f.target], f.assign) for f in c.facets), c.name))
    pattern: dict[int, dict] = {}
    origin: dict[int, tuple] = {}
    inner: dict[int, int] = {}
    if p == 0:
        return Subdivision(P, Pp, p, lower, pattern, origin, inner)
    T = pattern_triangulation(p)
    order = sorted(T.simplices(), key=lambda s: (len(s), s))
    for sigma in P.cells_of_dim(p):
        table: dict[frozenset, tuple[int, dict]] = {}
        for S in order:
            if all(x[0] == "e" for x in S):
                c, m = P.face_of(sigma, {x[1] for x in S})
                table[frozenset(S)] = (lower[c], {x: m[x[1]] for x in S})
                continue
            facets = []
            for i in range(len(S) if len(S) > 1 else 0):
                face = S[:i] + S[i + 1:]
                tc, slots = table[frozenset(face)]
                facets.append(Facet(tc, tuple(slots[x] for x in face)))
            cid = Pp.add(Cell(len(S) - 1, tuple(facets), ("piece", P.cells[sigma].name, S)))
            table[frozenset(S)] = (cid, {x: k for k, x in enumerate(S)})
            origin[cid] = (sigma, S)
        pattern[sigma] = table
        inner[sigma] = table[frozenset(("v", i) for i in range(p + 1))][0]
    return Subdivision(P, Pp, p, lower, pattern, origin, inner)


def pseudo_radial(sub: Subdivision) -> SimplicialCellularMap:
    """The vertex map v_j -> e_j, e_j -> e_j, defined off the inner simplices."""
    back = {new: old for old, new in sub.lower.items()}
    out = {}
    for cid, c in enumerate(sub.Pp.cells):
        if cid in back:
            out[cid] = (back[cid], tuple(range(c.dim + 1)))
            continue
        sigma, S = sub.origin[cid]
        if cid == sub.inner[sigma]:
            continue
        tc, m = sub.P.face_of(sigma, {x[1] for x in S})
        out[cid] = (tc, tuple(m[x[1]] for x in S))
    return SimplicialCellularMap(sub.Pp, sub.P, out)


# ---------------------------------------------------------------------------
# Cayley cells over pattern pieces


def slot_parts(f: SimplicialCellularMap, A: tuple) -> tuple[int, tuple[tuple, ...]]:
    cid, a = f[A]
    parts: list[list] = [[] for _ in range(f.target.cells[cid].dim + 1)]
    for v, s in zip(A, a):
        parts[s].append(v)
    return cid, tuple(tuple(x) for x in parts)


def _fiber(parts, q):
    kind, i = q
    if kind == "e":
        return [(("m", a), frozenset((a,))) for a in parts[i]]
    return [(("v", i, tuple(sorted(F))), frozenset(F)) for F in iproduct(*parts)]


def cayley_cell(parts: tuple[tuple, ...], piece: Piece, tag=None, label=None) -> ConvexCell:
    """Preimage of ``piece`` in the simplex whose vertices are grouped into ``parts``."""
    verts = []
    for q in piece.vertices:
        for vid, uses in _fiber(parts, q):
            verts.append((vid, q, uses))
    sup = []
    for a in (x for part in parts for x in part):
        s = frozenset(vid for vid, _, uses in verts if a not in uses)
        if s:
            sup.append(s)
    for phi in piece.facets:
        s = frozenset(vid for vid, q, _ in verts if q in phi)
        if s:
            sup.append(s)
    return ConvexCell(frozenset(v[0] for v in verts), tuple(dict.fromkeys(sup)), None, tag, label)


@dataclass
class SourceCell:
    cell: ConvexCell
    simplex: tuple
    target: int
    piece: tuple | None


def source_cells(f: SimplicialCellularMap, triangulated: bool = False) -> list[SourceCell]:
    """Cells of the source subdivided over the top cells (prisms kept whole unless ``triangulated``)."""
    p = f.target.dim
    pieces = pattern_pieces(p, triangulated) if p > 0 else []
    out = []
    for A in f.source.top():
        cid, parts = slot_parts(f, A)
        if p > 0 and f.target.cells[cid].dim == p:
            for pc in pieces:
                out.append(SourceCell(cayley_cell(parts, pc, tag=(A, pc.name)), A, cid, pc.name))
        else:
            verts = tuple(("m", a) for a in A)
            sup = tuple(frozenset(verts) - {x} for x in verts) if len(verts) > 1 else ()
            out.append(SourceCell(ConvexCell(frozenset(verts), sup, (verts,), (A, None)), A, cid, None))
    return out


def vertex_slot(f: SimplicialCellularMap, A: tuple, vid) -> int:
    """Slot of the target cell of ``A`` hit by a subdivision vertex (inner vertices expand to e_i)."""
    if vid[0] == "m":
        return f[A][1][A.index(vid[1])]
    return vid[1]


# ---------------------------------------------------------------------------
# orientation signs from exact frames


def _det(rows: list[list[int]]) -> Fraction:
    m = [[Fraction(x) for x in r] for r in rows]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            if m[r][c]:
                k = m[r][c] / m[c][c]
                m[r] = [x - k * y for x, y in zip(m[r], m[c])]
    return det


def frame_sign(A: tuple, sign_A: int, vectors: list[dict]) -> int:
    """Orientation of a frame of tangent vectors of simplex ``A`` (coefficients on its vertices)."""
    rows = [[vec.get(v, 0) for v in A[1:]] for vec in vectors]
    d = _det(rows)
    if d == 0:
        raise StructureError(f"degenerate frame in simplex {A}")
    return sign_A * (1 if d > 0 else -1)


def _fiber_frame(parts) -> list[dict]:
    out = []
    for part in parts:
        for a in part[1:]:
            out.append({a: 1, part[0]: -1})
    return out


def fiber_sign(A: tuple, sign_A: int, parts) -> int:
    """Sign of the fiber cell E_A so that (fiber, normal) agrees with the ambient orientation."""
    m = [part[0] for part in parts]
    normal = [{m[i]: 1, m[0]: -1} for i in range(1, len(parts))]
    return frame_sign(A, sign_A, _fiber_frame(parts) + normal)


def collar_sign(A: tuple, sign_A: int, parts, j: int, assign: tuple) -> int:
    """Sign of the boundary copy of E_A at the inner end of the radial segment through facet ``j``.

    ``assign`` is the facet's slot map onto the lower cell, written on the parent's slots.
    The cobordism is oriented by (outward collar, fiber, lower-cell normal) against the
    ambient orientation; the result is multiplied by the uniform factor (-1)^(dim fiber + 1),
    the sign of the 0-end in the boundary of fiber x [0, 1]."""
    p = len(parts) - 1
    m = [part[0] for part in parts]
    out = {m[i]: (p if i == j else -1) for i in range(p + 1)}
    by_low = {assign[i]: i for i in range(p + 1) if i != j}
    normal = [{m[by_low[k]]: 1, m[by_low[0]]: -1} for k in range(1, p)]
    fr = _fiber_frame(parts)
    eps_z = frame_sign(A, sign_A, [out] + fr + normal)
    eps_y = fiber_sign(A, sign_A, parts)
    return eps_z * eps_y * (-1) ** (len(fr) + 1)


# ---------------------------------------------------------------------------
# fiber complexes


@dataclass
class FiberComplex:
    """Preimage of the barycenter of one top cell: a product cell E_A per source simplex onto it."""

    sigma: int
    p: int
    cells: ConvexCellComplex
    sources: list[tuple]
    parts: dict[tuple, tuple]
    framing: dict[tuple, ConvexCell]
    signs: dict[tuple, int] | None = None

    @property
    def empty(self) -> bool:
        return not self.cells.cells


def fiber_cell(parts, tag=None) -> ConvexCell:
    return product_of_simplices(parts, combine=lambda *xs: tuple(sorted(xs)), tag=tag)


def _orientation(f: SimplicialCellularMap) -> dict:
    o = orient(f.source)
    if o is None:
        raise PreconditionError("source is not orientable")
    return o


def preimage(f: SimplicialCellularMap, sigma: int, oriented: bool = False,
             orientation: dict | None = None) -> FiberComplex:
    p = f.target.dim
    if f.target.cells[sigma].dim != p:
        raise DimensionError(f"cell {sigma} has dimension {f.target.cells[sigma].dim}, not {p}")
    o = orientation if orientation is not None else (_orientation(f) if oriented else None)
    cells, sources, parts_by, framing, signs = [], [], {}, {}, {}
    inner = pattern_pieces(p)[0] if p > 0 else None
    for A in f.source.top():
        cid, parts = slot_parts(f, A)
        if cid != sigma:
            continue
        cells.append(fiber_cell(parts, tag=A))
        sources.append(A)
        parts_by[A] = parts
        if inner is not None:
            framing[A] = cayley_cell(parts, inner, tag=(A, inner.name))
        if o is not None:
            signs[A] = fiber_sign(A, o[A], parts)
    return FiberComplex(sigma, p, ConvexCellComplex(cells), sources, parts_by, framing, signs if o is not None else None)


def fibers(f: SimplicialCellularMap, oriented: bool = False) -> dict[int, FiberComplex]:
    o = _orientation(f) if oriented else None
    return {s: preimage(f, s, oriented, o) for s in f.target.cells_of_dim(f.target.dim)}


@dataclass
class FiberReport:
    complexity: ComplexityReport
    source_size: int
    ratio: float
    max_cell_vertices: int
    vertex_bound: int
    cell_simplex_bound_ok: bool


def triangulate_fibers(Y: FiberComplex | Iterable[FiberComplex], source_size: int | None = None
                       ) -> tuple[SimplicialComplex, FiberReport]:
    Ys = [Y] if isinstance(Y, FiberComplex) else list(Y)
    pl = Puller()
    simplices, max_v, ok, n, p = [], 0, True, 0, 0
    for fc in Ys:
        p = fc.p
        for c in fc.cells.cells:
            tri = pl.cell(c)
            simplices.extend(tri)
            max_v = max(max_v, c.size)
            ok = ok and len(tri) <= 2 ** c.size
            n = max(n, len(c.tag) - 1)
    X = SimplicialComplex(simplices)
    rep = complexity(X)
    size = source_size or 0
    ratio = rep.simplex_count / size if size else 0.0
    return X, FiberReport(rep, size, ratio, max_v, (n + 1) ** (p + 1), ok and max_v <= (n + 1) ** (p + 1))


# ---------------------------------------------------------------------------
# source subdivision


@dataclass
class SourceSubdivisionReport:
    pieces: int
    bound: int
    max_per_simplex: int
    unsubdivided: int

    @property
    def ok(self) -> bool:
        return self.max_per_simplex <= self.bound


def subdivide_source(f: SimplicialCellularMap, sub: Subdivision
                     ) -> tuple[SimplicialComplex, SimplicialCellularMap, SourceSubdivisionReport]:
    """Preimages of the pattern simplices, pulled; the induced map lands in the subdivided target."""
    if sub.P is not f.target and len(sub.P) != len(f.target):
        raise StructureError("subdivision does not belong to the target of the map")
    p = sub.p
    cells = source_cells(f, triangulated=True)
    pl = Puller()
    assignment: dict = {}
    per: dict[tuple, int] = {}
    simplices = []
    for sc in cells:
        A = sc.simplex
        tri = pl.cell(sc.cell)
        simplices.extend(tri)
        per[A] = per.get(A, 0) + len(tri)
        for s in tri:
            for face in _faces(s):
                if face in assignment:
                    continue
                if sc.piece is None:
                    c, m = f.target.face_of(sc.target, {vertex_slot(f, A, v) for v in face})
                    assignment[face] = (sub.lower[c], tuple(m[vertex_slot(f, A, v)] for v in face))
                else:
                    qs = [("e", vertex_slot(f, A, v)) if v[0] == "m" else ("v", v[1]) for v in face]
                    cid, slots = sub.pattern[sc.target][frozenset(qs)]
                    assignment[face] = (cid, tuple(slots[q] for q in qs))
    K = SimplicialComplex(simplices)
    n = f.source.dim
    d = pieces_count(p) if p > 0 else 1
    bound = d * 2 ** (2 ** (n + p + 2))
    unsub = sum(1 for sc in cells if sc.piece is None)
    return K, SimplicialCellularMap(K, sub.Pp, assignment), SourceSubdivisionReport(d, bound, max(per.values(), default=0), unsub)


def _faces(s: tuple):
    from itertools import combinations

    for k in range(1, len(s) + 1):
        yield from combinations(s, k)


# ---------------------------------------------------------------------------
# cobordisms over codimension-one cells


def facet_incidences(L: SimplicialCellComplex, sigma: int) -> dict[int, list[tuple[int, int, tuple]]]:
    """Lower cell -> [(facet index j, orientation sign, slot map on the parent's slots)] for the
    facets of ``sigma`` attached bijectively."""
    from .chain import permutation_sign

    c = L.cells[sigma]
    out: dict[int, list] = {}
    for j, fc in enumerate(c.facets):
        if L.cells[fc.target].dim != c.dim - 1:
            continue
        tgt, full = L.facet_image(sigma, j)
        out.setdefault(tgt, []).append((j, (-1) ** j * permutation_sign(fc.assign), full))
    return out


def segment_cell(parts, j: int, tag=None) -> ConvexCell:
    """Preimage of the radial segment from the facet-``j`` barycenter to the inner simplex."""
    verts = [(("b", j, tuple(sorted(F))), frozenset(F)) for F in iproduct(*parts)]
    rest = [part for i, part in enumerate(parts) if i != j]
    verts += [(("c", tuple(sorted(F))), frozenset(F)) for F in iproduct(*rest)]
    sup = []
    for a in (x for part in parts for x in part):
        s = frozenset(v for v, uses in verts if a not in uses)
        if s:
            sup.append(s)
    sup.append(frozenset(v for v, _ in verts if v[0] == "b"))
    sup.append(frozenset(v for v, _ in verts if v[0] == "c"))
    return ConvexCell(frozenset(v for v, _ in verts), tuple(dict.fromkeys(sup)), None, tag)


def lower_fiber_cell(parts, tag=None) -> ConvexCell:
    return product_of_simplices(parts, combine=lambda *xs: ("c", tuple(sorted(xs))), tag=tag)


@dataclass
class BoundaryTerm:
    sigma: int
    k: int
    d: int
    copies: list[int]
    signs: dict[int, int] | None = None

    @property
    def signed(self) -> int | None:
        return sum(self.signs.values()) if self.signs else None

    @property
    def parity_ok(self) -> bool:
        return (self.k - self.d) % 2 == 0


@dataclass
class CobordismComplex:
    tau: int
    cells: ConvexCellComplex
    boundary: dict[int, BoundaryTerm]
    inconsistent: list[str] = field(default_factory=list)

    def copies(self) -> list[tuple[int, int]]:
        return [(s, j) for s, t in sorted(self.boundary.items()) for j in t.copies]


def cobordisms(f: SimplicialCellularMap, oriented: bool = False, check_source: bool = True
               ) -> dict[int, CobordismComplex]:
    """One cobordism per codimension-one cell of the target, swept out by the radial
    segments in the exterior of the inner simplices together with fibers of simplices
    that already map onto the lower cell."""
    M = f.source
    if check_source:
        from .kernel import boundary_complex

        if M.top() and len(boundary_complex(M)):
            raise PreconditionError("source has nonempty boundary")
    L = f.target
    p = L.dim
    if p < 1:
        return {}
    o = _orientation(f) if oriented else None
    inc = {s: facet_incidences(L, s) for s in L.cells_of_dim(p)}
    out = {t: CobordismComplex(t, ConvexCellComplex(), {}) for t in L.cells_of_dim(p - 1)}
    for tau, cb in out.items():
        for s, by in inc.items():
            rows = by.get(tau)
            if rows:
                cb.boundary[s] = BoundaryTerm(s, len(rows), sum(r[1] for r in rows), [r[0] for r in rows],
                                              {} if oriented else None)
    for A in M.top():
        cid, parts = slot_parts(f, A)
        dim = L.cells[cid].dim
        if dim == p - 1:
            out[cid].cells.cells.append(lower_fiber_cell(parts, tag=A))
        elif dim == p:
            for tau, rows in inc[cid].items():
                cb = out[tau]
                for j, _, full in rows:
                    cb.cells.cells.append(segment_cell(parts, j, tag=(A, j)))
                    if o is None:
                        continue
                    e = collar_sign(A, o[A], parts, j, full)
                    prev = cb.boundary[cid].signs.setdefault(j, e)
                    if prev != e:
                        cb.inconsistent.append(f"copy {(cid, j)}: sign differs across source simplices")
    return out


def disjointness_issues(Z: dict[int, CobordismComplex]) -> list[str]:
    owner: dict = {}
    issues = []
    for t, cb in Z.items():
        for v in cb.cells.vertices():
            if owner.setdefault(v, t) != t:
                issues.append(f"cobordisms over {owner[v]} and {t} share a vertex")
    return issues


def triangulate_cobordisms(Z: dict[int, CobordismComplex]) -> SimplicialComplex:
    return pulling_triangulation([c for cb in Z.values() for c in cb.cells.cells])


# ---------------------------------------------------------------------------
# audit


@dataclass
class TransversalityAudit:
    n: int
    p: int
    source_size: int
    fiber_size: int
    cobordism_size: int
    nonempty_law: bool
    parity_law: bool
    bound_law: bool
    signed_law: bool | None
    fibers_certified: bool
    fibers_partial: bool
    disjoint: bool
    per_sigma: dict = field(default_factory=dict)
    per_tau: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (self.nonempty_law and self.parity_law and self.bound_law and self.signed_law is not False
                and self.fibers_certified and self.disjoint)

    @property
    def fiber_ratio(self) -> float:
        return self.fiber_size / self.source_size if self.source_size else 0.0

    @property
    def cobordism_ratio(self) -> float:
        return self.cobordism_size / self.source_size if self.source_size else 0.0


def audit_transversality(f: SimplicialCellularMap, oriented: bool = False) -> TransversalityAudit:
    M = f.source
    n, p = M.dim, f.target.dim
    Ys = fibers(f, oriented)
    onto = {s: any(f[A][0] == s for A in M.simplices()) for s in Ys}
    nonempty = all((not Y.empty) == onto[s] for s, Y in Ys.items())
    Yx, _ = triangulate_fibers(Ys.values(), len(M))
    cert = verify_closed_manifold(Yx, n - p)
    Z = cobordisms(f, oriented)
    Zx = triangulate_cobordisms(Z)
    parity = all(t.parity_ok for cb in Z.values() for t in cb.boundary.values())
    bound = all(t.k <= p + 1 for cb in Z.values() for t in cb.boundary.values())
    signed = None
    if oriented:
        signed = all(not cb.inconsistent for cb in Z.values()) and all(
            t.signed == t.d for cb in Z.values() for t in cb.boundary.values()
            if Ys[t.sigma].cells.cells)
    per_sigma = {s: {"cells": len(Y.cells), "onto": onto[s]} for s, Y in Ys.items()}
    per_tau = {t: {"cells": len(cb.cells), "boundary": {s: {"k": b.k, "d": b.d, "signed": b.signed}
                                                       for s, b in cb.boundary.items()}}
               for t, cb in Z.items()}
    return TransversalityAudit(n, p, len(M), len(Yx), len(Zx), nonempty, parity, bound, signed,
                               cert.ok or (cert.partial and n - p > 2), cert.partial,
                               not disjointness_issues(Z), per_sigma, per_tau)
