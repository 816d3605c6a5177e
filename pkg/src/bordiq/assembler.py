"""Bordisms over the next skeleton built from a chain null-homotopy.

One stage takes a closed triangulated manifold ``M`` with a simplicial-cellular map onto
``L``, a complex ``K`` containing ``L`` and a chain homotopy ``P`` with ``P d + d P = i``.
It assembles

    W = (M x I)  u  (Y x V)  u  U

where ``Y`` are the fibers over top cells, ``V`` the tubes realising the cancellation of
the signed terms of ``d(P sigma) + P(d sigma) - sigma``, and ``U`` the products of the
(modified) cobordisms with the cells of ``P tau`` and of the fibers with the cells of
``P sigma``.  The free end ``N`` of ``W`` carries a simplicial-cellular map into the
codimension-one skeleton of ``K``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .chain import (
    ChainMap,
    add_into,
    cellular_chain_complex,
    cone_null_homotopy,
    inclusion_map,
    norm,
    permutation_sign,
    verify_null_homotopy,
)
from .kernel import (
    ConvexCell,
    ConvexCellComplex,
    Puller,
    SimplicialCellComplex,
    SimplicialComplex,
    boundary_complex,
    cone_complex,
    connected_components,
    orient,
    product_cell,
    product_of_simplices,
    simplex_cell,
    verify_closed_manifold,
)
from .maps import SimplicialCellularMap, validate
from .transversal import (
    CobordismComplex,
    FiberComplex,
    cayley_cell,
    cobordisms,
    fibers,
    pattern_pieces,
    slot_parts,
    source_cells,
    vertex_slot,
)


class InconsistentHomotopyError(ValueError):
    pass


class PairingError(ValueError):
    pass


class VerificationError(RuntimeError):
    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


def _sign(x: int) -> int:
    return 1 if x > 0 else -1


# ---------------------------------------------------------------------------
# coefficients


@dataclass
class HomotopyCoefficients:
    p: int
    d: dict[int, dict[int, int]]
    r: dict[int, dict[int, int]]
    s: dict[int, dict[int, int]]
    include: dict[int, int]
    P_norm: int = 0

    def term_count(self, sigma: int, K: SimplicialCellComplex) -> int:
        n = 1 + sum(abs(dv) * sum(abs(x) for x in self.s.get(t, {}).values()) for t, dv in self.d[sigma].items())
        for mu, rv in self.r[sigma].items():
            n += abs(rv) * sum(1 for f in K.cells[mu].facets if K.cells[f.target].dim == self.p)
        return n


def homotopy_coefficients(P: ChainMap, L: SimplicialCellComplex, K: SimplicialCellComplex, p: int,
                          include: dict[int, int] | None = None) -> HomotopyCoefficients:
    """Read off d, r, s and re-check the chain homotopy equation on every p-cell."""
    include = include if include is not None else {c: c for c in range(len(L))}
    CL, CK = cellular_chain_complex(L), cellular_chain_complex(K)
    dims = [k for k in (p - 1, p) if k >= 0]
    rep = verify_null_homotopy(P, inclusion_map(CL, dims, include), dims, CL, CK)
    if not rep.ok:
        k, x = next(iter(rep.residuals))
        raise InconsistentHomotopyError(f"chain homotopy equation fails on cell {x} in dimension {k}")
    d = {s: dict(CL.d(s, p)) if p > 0 else {} for s in CL.basis.get(p, [])}
    r = {s: dict(P.apply(s, p)) for s in CL.basis.get(p, [])}
    sv = {t: dict(P.apply(t, p - 1)) for t in CL.basis.get(p - 1, [])} if p > 0 else {}
    for s in d:
        lhs: dict = {}
        for t, dv in d[s].items():
            add_into(lhs, sv[t], dv)
        for mu, rv in r[s].items():
            add_into(lhs, CK.d(mu, p + 1), rv)
        add_into(lhs, {include[s]: 1}, -1)
        if lhs:
            raise InconsistentHomotopyError(f"nonzero residual on cell {s}: {lhs}")
    return HomotopyCoefficients(p, d, r, sv, include, norm(P, p) if p in P.dims else 0)


# ---------------------------------------------------------------------------
# signed terms and their pairing


@dataclass(frozen=True)
class Term:
    """A signed p-simplex of K in the boundary of a tube complex.

    ``kind`` is "sigma" (the input cell, sign -1), "eta" (data ``(tau, j, eta, copy)``)
    or "mu" (data ``(mu, copy, facet)``); ``inv`` sends K slots to the slots of the
    simplex the term is a face of (only used for "mu")."""

    kind: str
    sign: int
    cell: int
    data: tuple
    inv: tuple = ()

    def sort_key(self):
        return (self.kind, self.data)

    def key(self, sigma: int, F: tuple, x: int):
        if self.kind == "sigma":
            return ("L1", ("v", x, F))
        if self.kind == "eta":
            tau, j, eta, c = self.data
            return (("b", j, F), ("etaU", tau, eta, c, x))
        mu, c, _ = self.data
        return (F, ("mu", sigma, mu, c, dict(self.inv)[x]))


def surviving_copies(Z: CobordismComplex | None, d: dict, sigma: int, tau: int, oriented: bool
                     ) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """(surviving copies as (j, sign), cancelled pairs (j1, j2)) of ``sigma`` in the boundary of Z_tau."""
    if Z is not None and sigma in Z.boundary:
        bt = Z.boundary[sigma]
        if oriented:
            signs = bt.signs or {}
            pos = sorted(j for j in bt.copies if signs.get(j, 1) > 0)
            neg = sorted(j for j in bt.copies if signs.get(j, 1) < 0)
            pairs = list(zip(pos, neg))
            rest = [(j, 1) for j in pos[len(pairs):]] + [(j, -1) for j in neg[len(pairs):]]
            return rest, pairs
        cs = sorted(bt.copies)
        pairs = [(cs[i], cs[i + 1]) for i in range(0, len(cs) - 1, 2)]
        rest = [(cs[-1], 1)] if len(cs) % 2 else []
        return rest, pairs
    dv = d.get(tau, 0)
    if oriented:
        return [(i, _sign(dv)) for i in range(abs(dv))], []
    return ([(0, 1)] if dv % 2 else []), []


def signed_terms(sigma: int, co: HomotopyCoefficients, K: SimplicialCellComplex, oriented: bool = True,
                 Z: dict[int, CobordismComplex] | None = None) -> list[Term]:
    p = co.p
    terms = [Term("sigma", -1, co.include[sigma], ())]
    for tau, _ in sorted(co.d[sigma].items()):
        rest, _ = surviving_copies(Z.get(tau) if Z else None, co.d[sigma], sigma, tau, oriented)
        for eta, sv in sorted(co.s.get(tau, {}).items()):
            for c in range(abs(sv)):
                for j, e in rest:
                    terms.append(Term("eta", e * _sign(sv), eta, (tau, j, eta, c)))
    for mu, rv in sorted(co.r[sigma].items()):
        for c in range(abs(rv)):
            for k, fc in enumerate(K.cells[mu].facets):
                if K.cells[fc.target].dim != p:
                    continue
                tgt, full = K.facet_image(mu, k)
                inv = tuple(sorted((full[s], s) for s in range(p + 2) if s != k))
                e = _sign(rv) * (-1) ** k * permutation_sign(fc.assign)
                terms.append(Term("mu", e, tgt, (mu, c, k), inv))
    return terms


def pair_terms(terms: list[Term], oriented: bool = True) -> list[tuple[Term, Term]]:
    """Deterministic cancellation: within each K cell, the i-th positive term (in sorted order)
    pairs with the i-th negative one; without orientations consecutive terms pair up."""
    by: dict[int, list[Term]] = {}
    for t in terms:
        by.setdefault(t.cell, []).append(t)
    pairs = []
    for cell in sorted(by):
        ts = sorted(by[cell], key=Term.sort_key)
        if oriented:
            pos = [t for t in ts if t.sign > 0]
            neg = [t for t in ts if t.sign < 0]
            if len(pos) != len(neg):
                raise PairingError(f"unpairable signed terms on cell {cell}: {len(pos)} positive, {len(neg)} negative")
            pairs.extend(zip(pos, neg))
        else:
            if len(ts) % 2:
                raise PairingError(f"odd number of terms on cell {cell}")
            pairs.extend((ts[i], ts[i + 1]) for i in range(0, len(ts), 2))
    return pairs


# ---------------------------------------------------------------------------
# tubes


def tube_cells(parts: tuple, pair: tuple[Term, Term], pair_id, sigma: int, p: int,
               K_cell: int, tag=None) -> list[ConvexCell]:
    """A collar on each term plus a handle joining the collars, over a fiber cell.

    The three prisms are matched through the K slots.  The collar tops are fresh vertices,
    so terms that share a face (two facets of one simplex) never meet inside the tube."""
    t1, t2 = pair
    mid = lambda F, x, side: ("mid", sigma, pair_id, x, F, side)
    levels = [
        (lambda F, x: t1.key(sigma, F, x), lambda F, x: mid(F, x, 0)),
        (lambda F, x: mid(F, x, 0), lambda F, x: mid(F, x, 1)),
        (lambda F, x: mid(F, x, 1), lambda F, x: t2.key(sigma, F, x)),
    ]
    factors = list(parts) + [tuple(range(p + 1)), (0, 1)]
    out = []
    for part, (lo, hi) in enumerate(levels):
        def combine(*xs, lo=lo, hi=hi):
            F = tuple(sorted(xs[:-2]))
            return lo(F, xs[-2]) if xs[-1] == 0 else hi(F, xs[-2])

        c = product_of_simplices(factors, combine)
        slots = {combine(*xs): frozenset((xs[-2],)) for xs in _choices(factors)}
        out.append(ConvexCell(c.vertices, c.supports, None, (tag, part), (K_cell, slots)))
    return out


def _choices(factors):
    from itertools import product as iproduct

    return iproduct(*factors)


@dataclass
class VSigma:
    sigma: int
    terms: list[Term]
    pairs: list[tuple[Term, Term]]
    cells: ConvexCellComplex
    minus: frozenset
    plus: list[frozenset]
    zero: list[frozenset]

    @property
    def handles(self) -> int:
        return len(self.pairs)


def build_V_sigma(sigma: int, co: HomotopyCoefficients, K: SimplicialCellComplex, oriented: bool = True,
                  Z: dict[int, CobordismComplex] | None = None) -> VSigma:
    terms = signed_terms(sigma, co, K, oriented, Z)
    pairs = pair_terms(terms, oriented)
    p = co.p
    cells = []
    for i, pr in enumerate(pairs):
        cells.extend(tube_cells((), pr, i, sigma, p, pr[0].cell, tag=("tube", i)))
    keyset = lambda t: frozenset(t.key(sigma, (), x) for x in range(p + 1))
    minus = keyset(terms[0])
    plus = [keyset(t) for t in terms[1:]]
    zero = []
    for c in cells:
        for x in range(p + 1):
            zero.append(frozenset(v for v in c.vertices if x not in c.label[1][v]))
    return VSigma(sigma, terms, pairs, ConvexCellComplex(cells), minus, plus, zero)


# ---------------------------------------------------------------------------
# the base cylinder over M


def _level_cell(c: ConvexCell, label) -> ConvexCell:
    pc = product_cell(c, simplex_cell(("L0", "L1")), combine=lambda x, y: (y, x))
    return ConvexCell(pc.vertices, pc.supports, None, c.tag, label)


def _cone(apex, c: ConvexCell) -> ConvexCell:
    sup = (c.vertices,) + tuple(h | {apex} for h in c.supports)
    return ConvexCell(c.vertices | {apex}, sup, None, c.tag, c.label)


def product_base(f: SimplicialCellularMap, include: dict[int, int]) -> list[ConvexCell]:
    """(subdivided M) x I; both ends carry the subdivision."""
    out = []
    for sc in source_cells(f):
        A = sc.simplex
        slots = {}
        for v in sc.cell.vertices:
            s = frozenset((vertex_slot(f, A, v),))
            slots[("L0", v)] = s
            slots[("L1", v)] = s
        out.append(_level_cell(sc.cell, (include[sc.target], slots)))
    return out


def cylinder_base(f: SimplicialCellularMap, include: dict[int, int]) -> list[ConvexCell]:
    """A cylinder from M (bottom, unsubdivided) to its subdivision (top).

    Simplices whose image is not a top cell are plain prisms.  Over the others the
    cylinder is coned off from a new vertex ("cyl", B) at mid height, recursively over
    the faces, so that the bottom matches M exactly."""
    p = f.target.dim
    pieces = pattern_pieces(p) if p > 0 else []
    memo: dict[tuple, list[ConvexCell]] = {}

    def cyl(B: tuple) -> list[ConvexCell]:
        hit = memo.get(B)
        if hit is not None:
            return hit
        cid, parts = slot_parts(f, B)
        if p == 0 or f.target.cells[cid].dim < p:
            verts = tuple(("m", a) for a in B)
            sup = tuple(frozenset(verts) - {x} for x in verts) if len(verts) > 1 else ()
            res = [_level_cell(ConvexCell(frozenset(verts), sup, None, (B, None)), None)]
        else:
            apex = ("cyl", B)
            bottom = frozenset(("L0", ("m", a)) for a in B)
            bot = ConvexCell(bottom, tuple(bottom - {("L0", ("m", a))} for a in B), None, (B, "bottom"))
            res = [_cone(apex, bot)]
            for pc in pieces:
                top = cayley_cell(parts, pc)
                lifted = ConvexCell(frozenset(("L1", v) for v in top.vertices),
                                    tuple(frozenset(("L1", v) for v in h) for h in top.supports), None, (B, pc.name))
                res.append(_cone(apex, lifted))
            for i in range(len(B)):
                for c in cyl(B[:i] + B[i + 1:]):
                    res.append(_cone(apex, c))
        memo[B] = res
        return res

    out = []
    for A in f.source.top():
        cid, _ = f[A]
        for c in cyl(A):
            slots = {}
            for v in c.vertices:
                if v[0] == "cyl":
                    slots[v] = frozenset(vertex_slot(f, A, ("m", a)) for a in v[1])
                else:
                    slots[v] = frozenset((vertex_slot(f, A, v[1]),))
            out.append(ConvexCell(c.vertices, c.supports, None, (A, c.tag), (include[cid], slots)))
    return out


# ---------------------------------------------------------------------------
# assembly


def modified_cobordism_cells(cb: CobordismComplex, Ys: dict[int, FiberComplex], oriented: bool) -> list[ConvexCell]:
    """Z_tau together with the cylinders fiber x [b_j1, b_j2] that cancel boundary pairs."""
    cells = list(cb.cells.cells)
    for sigma in sorted(cb.boundary):
        _, pairs = surviving_copies(cb, {}, sigma, cb.tau, oriented)
        Y = Ys[sigma]
        for j1, j2 in pairs:
            for A in Y.sources:
                cells.append(product_of_simplices(list(Y.parts[A]) + [(j1, j2)],
                                                  lambda *xs: ("b", xs[-1], tuple(sorted(xs[:-1]))),
                                                  tag=("cancel", A, j1, j2)))
    return cells


@dataclass
class BordismPackage:
    p: int
    n: int
    W: SimplicialComplex
    keys: list
    M_prime: SimplicialComplex
    N: SimplicialComplex
    carriers: dict[tuple, tuple[int, tuple]]
    K: SimplicialCellComplex
    lower: SimplicialCellComplex
    lower_ids: dict[int, int]
    N_map: SimplicialCellularMap
    coefficients: HomotopyCoefficients | None
    pairs: dict[int, list[tuple[Term, Term]]]
    base: str
    source_size: int
    cells: int
    oriented: bool
    source: SimplicialComplex | None = None

    @property
    def size(self) -> int:
        return len(self.W)

    @property
    def ratio(self) -> float:
        return len(self.W) / self.source_size if self.source_size else 0.0


def assemble_step(M: SimplicialComplex, f: SimplicialCellularMap, K: SimplicialCellComplex, P: ChainMap,
                  include: dict[int, int] | None = None, oriented: bool = False, base: str = "product",
                  check: bool = True) -> BordismPackage:
    L = f.target
    p = L.dim
    n = M.dim
    include = include if include is not None else {c: c for c in range(len(L))}
    if check:
        mr = verify_closed_manifold(M, n)
        if not mr.pseudomanifold:
            raise VerificationError("source is not a closed pseudomanifold", mr)
        vr = validate(f)
        if not vr.ok:
            raise VerificationError("input map is not simplicial-cellular", vr)
    co = homotopy_coefficients(P, L, K, p, include) if p > 0 else None
    cells: list[ConvexCell] = product_base(f, include) if base == "product" else cylinder_base(f, include)
    pairs_by: dict[int, list] = {}
    if p > 0:
        Ys = fibers(f, oriented)
        Z = cobordisms(f, oriented, check_source=check)
        if oriented:
            bad = [s for cb in Z.values() for s in cb.inconsistent]
            if bad:
                raise VerificationError("inconsistent boundary signs", bad)
        for sigma, Y in Ys.items():
            if Y.empty:
                continue
            terms = signed_terms(sigma, co, K, oriented, Z)
            pairs = pair_terms(terms, oriented)
            pairs_by[sigma] = pairs
            for A in Y.sources:
                parts = Y.parts[A]
                for i, pr in enumerate(pairs):
                    cells.extend(tube_cells(parts, pr, i, sigma, p, pr[0].cell, tag=("tube", A, i)))
                for mu, rv in sorted(co.r[sigma].items()):
                    for c in range(abs(rv)):
                        combine = lambda *xs, mu=mu, c=c: (tuple(sorted(xs[:-1])), ("mu", sigma, mu, c, xs[-1]))
                        cell = product_of_simplices(list(parts) + [tuple(range(p + 2))], combine)
                        slots = {v: frozenset((v[1][4],)) for v in cell.vertices}
                        cells.append(ConvexCell(cell.vertices, cell.supports, None, ("mu", A, mu, c), (mu, slots)))
        for tau, cb in Z.items():
            zcells = modified_cobordism_cells(cb, Ys, oriented)
            for eta, sv in sorted(co.s.get(tau, {}).items()):
                for c in range(abs(sv)):
                    simp = simplex_cell([("etaU", tau, eta, c, x) for x in range(p + 1)])
                    for zc in zcells:
                        pc = product_cell(zc, simp)
                        slots = {v: frozenset((v[1][4],)) for v in pc.vertices}
                        cells.append(ConvexCell(pc.vertices, pc.supports, None, ("U", zc.tag, eta, c), (eta, slots)))
    return _finish(M, f, K, co, cells, pairs_by, p, n, base, oriented, check)


def _reduce(K: SimplicialCellComplex, cid: int, slots: tuple[frozenset, ...]) -> tuple[int, tuple[frozenset, ...]]:
    used = frozenset().union(*slots)
    sub, m = K.face_of(cid, used)
    return sub, tuple(frozenset(m[x] for x in s) for s in slots)


def _finish(M, f, K, co, cells, pairs_by, p, n, base, oriented, check) -> BordismPackage:
    keyset = set()
    for c in cells:
        keyset |= c.vertices
    order = sorted(keyset, key=repr)
    rank = {k: i for i, k in enumerate(order)}
    pl = Puller(rank.__getitem__)
    tops: list[tuple] = []
    carriers: dict[tuple, tuple[int, tuple]] = {}
    bottom: list[tuple] = []
    for c in cells:
        kcell, slots = c.label
        for s in pl.cell(c):
            t = tuple(rank[v] for v in s)
            tops.append(t)
            carriers[t] = (kcell, tuple(slots[v] for v in s))
        if base == "product":
            low = frozenset(v for v in c.vertices if v[0] == "L0")
            if low in {h for h in c.supports}:
                bottom.extend(tuple(rank[v] for v in s) for s in
                              (tuple(sorted(x, key=rank.__getitem__)) for x in pl.triangulate(low, c)))
    if base != "product":
        bottom = [tuple(rank[("L0", ("m", a))] for a in A) for A in M.top()]
    W = SimplicialComplex(tops)
    if W.dim != n + 1 or any(len(t) != n + 2 for t in tops):
        raise VerificationError("cells of W do not all have dimension n + 1")
    faces_of: dict[tuple, list[tuple]] = {}
    for t in tops:
        for i in range(len(t)):
            faces_of.setdefault(t[:i] + t[i + 1:], []).append(t)
    bad = [fc for fc, ts in faces_of.items() if len(ts) > 2]
    if bad:
        raise VerificationError("a codimension-one face of W lies in more than two top simplices", bad[:3])
    bd = [fc for fc, ts in faces_of.items() if len(ts) == 1]
    low_ids = {rank[k] for k in order if k[0] == "L0"}
    Mp_tops = {fc for fc in bd if all(v in low_ids for v in fc)}
    N_tops = [fc for fc in bd if fc not in Mp_tops]
    expected = {tuple(sorted(t)) for t in bottom}
    if Mp_tops != expected:
        raise VerificationError("boundary of W does not restrict to the subdivided source on the bottom",
                                {"missing": len(expected - Mp_tops), "extra": len(Mp_tops - expected)})
    if any(v in low_ids for fc in N_tops for v in fc):
        raise VerificationError("free end of W meets the bottom")
    N = SimplicialComplex(N_tops)
    lower, lower_ids = K.skeleton(max(p - 1, 0))
    assign = {}
    for fc in N_tops:
        t = faces_of[fc][0]
        kcell, slots = carriers[t]
        sl = tuple(slots[t.index(v)] for v in fc)
        sub, red = _reduce(K, kcell, sl)
        if K.cells[sub].dim > max(p - 1, 0) or any(len(s) != 1 for s in red):
            raise VerificationError(f"free end simplex {fc} is not carried by the lower skeleton",
                                    {"cell": sub, "slots": red})
        assign[fc] = (lower_ids[sub], tuple(next(iter(s)) for s in red))
    N_map = SimplicialCellularMap.from_top(N, lower, assign)
    if check:
        vr = validate(N_map)
        if not vr.ok:
            raise VerificationError("induced map on the free end is not simplicial-cellular", vr.issues[:5])
    return BordismPackage(p, n, W, order, SimplicialComplex(sorted(expected)), N, carriers, K, lower, lower_ids,
                          N_map, co, pairs_by, base, len(M), len(cells), oriented, M)


# ---------------------------------------------------------------------------
# audit


@dataclass
class BordismAudit:
    boundary_ok: bool
    monotone: bool
    violations: list[str]
    pseudomanifold: bool
    N_manifold: bool
    N_certified: bool
    N_map_valid: bool
    M_prime_subdivides: bool
    euler: dict
    euler_ok: bool
    orientable: bool | None
    size: int
    ratio: float

    @property
    def ok(self) -> bool:
        return (self.boundary_ok and self.monotone and self.pseudomanifold and self.N_manifold
                and self.N_map_valid and self.M_prime_subdivides and self.euler_ok and self.orientable is not False)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d


def carrier_violations(pkg: BordismPackage, limit: int = 20) -> list[str]:
    """Every face must receive the same reduced carrier from all top simplices containing it."""
    seen: dict[tuple, tuple] = {}
    out = []
    for t, (kcell, slots) in pkg.carriers.items():
        if kcell < 0 or kcell >= len(pkg.K) or len(slots) != len(t):
            out.append(f"simplex {t}: malformed carrier")
            continue
        dimc = pkg.K.cells[kcell].dim
        if any(not s or max(s) > dimc for s in slots):
            out.append(f"simplex {t}: slots outside carrier cell {kcell}")
            continue
        for mask in range(1, 1 << len(t)):
            idx = [i for i in range(len(t)) if mask >> i & 1]
            face = tuple(t[i] for i in idx)
            red = _reduce(pkg.K, kcell, tuple(slots[i] for i in idx))
            prev = seen.setdefault(face, red)
            if prev != red:
                out.append(f"face {face}: carriers {prev} and {red} disagree")
                if len(out) >= limit:
                    return out
    return out


def audit_bordism(pkg: BordismPackage, monotonicity: bool = True) -> BordismAudit:
    W = pkg.W
    bd = boundary_complex(W)
    tops_bd = set(bd.top()) if len(bd) else set()
    boundary_ok = tops_bd == set(pkg.M_prime.top()) | set(pkg.N.top()) and not (
        set(pkg.M_prime.vertices) & set(pkg.N.vertices))
    viol = carrier_violations(pkg) if monotonicity else []
    counts: dict[tuple, int] = {}
    for t in W.top():
        for i in range(len(t)):
            fc = t[:i] + t[i + 1:]
            counts[fc] = counts.get(fc, 0) + 1
    pseudo = all(c <= 2 for c in counts.values())
    nr = verify_closed_manifold(pkg.N, pkg.n) if len(pkg.N) else None
    N_manifold = nr is None or nr.ok or nr.partial
    N_cert = nr is None or nr.certified
    nv = validate(pkg.N_map).ok
    keys = pkg.keys
    src = pkg.source.simplices()
    sub_ok = True
    for t in pkg.M_prime.top():
        support = set()
        for v in t:
            x = keys[v][1]
            support |= {x[1]} if x[0] == "m" else set(x[2])
        if tuple(sorted(support)) not in src:
            sub_ok = False
            break
    sub_ok = sub_ok and pkg.M_prime.euler_characteristic() == pkg.source.euler_characteristic()
    chi_W = W.euler_characteristic()
    chi_M = pkg.M_prime.euler_characteristic()
    chi_N = pkg.N.euler_characteristic() if len(pkg.N) else 0
    chi_bd = bd.euler_characteristic() if len(bd) else 0
    euler = {"W": chi_W, "M_prime": chi_M, "N": chi_N, "boundary": chi_bd}
    euler_ok = chi_bd == chi_M + chi_N and (pkg.n % 2 == 1 or chi_bd == 2 * chi_W)
    orientable = None
    if pkg.oriented:
        orientable = orient(W) is not None
    return BordismAudit(boundary_ok, not viol, viol, pseudo, N_manifold, N_cert, nv, sub_ok,
                        euler, euler_ok, orientable, len(W), pkg.ratio)


# ---------------------------------------------------------------------------
# descent over the skeleta


Supplier = Callable[[SimplicialCellComplex], tuple[SimplicialCellComplex, ChainMap, dict[int, int]]]


def cone_supplier(L: SimplicialCellComplex) -> tuple[SimplicialCellComplex, ChainMap, dict[int, int]]:
    """K = cone on L with P(c) = cone(c); L sits in K with unchanged ids."""
    K, _, cone = cone_complex(L)
    return K, cone_null_homotopy(L, K, cone), {c: c for c in range(len(L))}


@dataclass
class StageRecord:
    p: int
    package: BordismPackage
    audit: BordismAudit | None
    seconds: float


@dataclass
class DescentResult:
    W: SimplicialComplex
    M_prime: SimplicialComplex
    N: SimplicialComplex
    N_map: SimplicialCellularMap
    stages: list[StageRecord]
    source_size: int
    vertex_origin: dict[int, tuple[int, object]] = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return len(self.W) / self.source_size if self.source_size else 0.0

    def constant_on_components(self) -> bool:
        """The final map sends each connected component of N to a single vertex."""
        if self.N_map.target.dim > 0:
            return False
        for comp in connected_components(self.N):
            cells = {self.N_map[(v,)][0] for v in comp}
            if len(cells) != 1:
                return False
        return True

    def audit(self) -> dict:
        bd = boundary_complex(self.W)
        exact = set(bd.top()) == set(self.M_prime.top()) | set(self.N.top()) and not (
            set(self.M_prime.vertices) & set(self.N.vertices))
        nr = verify_closed_manifold(self.N, self.M_prime.dim) if len(self.N) else None
        return {
            "boundary_exact": exact,
            "N_constant_per_component": self.constant_on_components(),
            "N_certified": nr is None or nr.certified,
            "N_manifold": nr is None or nr.ok,
            "stages": [{"p": s.p, "size": s.package.size, "ratio": s.package.ratio,
                        "audit_ok": None if s.audit is None else s.audit.ok} for s in self.stages],
            "size": len(self.W),
            "ratio": self.ratio,
        }


def skeleton_descent(M: SimplicialComplex, f: SimplicialCellularMap, supplier: Supplier = cone_supplier,
                     oriented: bool = False, audit: bool = True, monotonicity: bool = True) -> DescentResult:
    """Run one stage per dimension from dim M down to 1 and stack the bordisms.

    The first stage uses the subdivided source as its bottom; later stages start from the
    free end of the previous one unchanged (cylinder base), so the stages glue exactly."""
    import time

    n = M.dim
    L = f.target
    if L.dim > n:
        L, ids = L.skeleton(n)
        f = SimplicialCellularMap(M, L, {s: (ids[c], a) for s, (c, a) in f.assignment.items()})
    cur_M, cur_f = M, f
    stages: list[StageRecord] = []
    tops: list[tuple] = []
    origin: dict[int, tuple[int, object]] = {}
    prev_global: dict[int, int] = {}
    M_prime = None
    for stage, p in enumerate(range(n, 0, -1)):
        L = cur_f.target
        if L.dim < p:
            cells = list(L.cells)
            pad = SimplicialCellComplex(cells)
            L = pad
        K, P, include = supplier(L)
        t0 = time.perf_counter()
        try:
            pkg = assemble_step(cur_M, cur_f, K, P, include, oriented, "product" if stage == 0 else "cylinder",
                                check=audit)
        except VerificationError as exc:
            raise VerificationError(f"stage {stage} (p={p}): {exc}", exc.certificate) from exc
        aud = audit_bordism(pkg, monotonicity) if audit else None
        if aud is not None and not aud.ok:
            raise VerificationError(f"stage {stage} (p={p}) failed its audit", aud)
        stages.append(StageRecord(p, pkg, aud, time.perf_counter() - t0))
        local: dict[int, int] = {}
        for v, key in enumerate(pkg.keys):
            if stage > 0 and key[0] == "L0":
                local[v] = prev_global[key[1][1]]
            else:
                local[v] = len(origin)
                origin[local[v]] = (stage, key)
        tops.extend(tuple(sorted(local[v] for v in t)) for t in pkg.W.top())
        if stage == 0:
            M_prime = pkg.M_prime.relabel(local)
        prev_global = {v: local[v] for v in pkg.N.vertices}
        cur_M, cur_f = pkg.N, pkg.N_map
    if not stages:
        raise VerificationError("nothing to descend: source has dimension 0")
    last = stages[-1].package
    N = last.N.relabel(prev_global)
    N_map = SimplicialCellularMap(N, last.N_map.target,
                                  {tuple(sorted(prev_global[v] for v in s)): last.N_map[s] for s in last.N.simplices()})
    return DescentResult(SimplicialComplex(tops), M_prime, N, N_map, stages, len(M), origin)
