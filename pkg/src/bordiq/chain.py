"""Based chain complexes over the integers, norms, partial null-homotopies and normalization."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Protocol, Sequence

from .kernel import SimplicialCellComplex, StructureError

Chain = dict  # basis id -> nonzero int


class RangeError(ValueError):
    pass


def add_into(acc: dict, u: dict, c: int = 1) -> dict:
    for k, v in u.items():
        w = acc.get(k, 0) + c * v
        if w:
            acc[k] = w
        else:
            acc.pop(k, None)
    return acc


def combine(terms: Iterable[tuple[Hashable, int]]) -> Chain:
    out: dict = {}
    for k, c in terms:
        add_into(out, {k: c})
    return out


def diameter(u: Chain) -> int:
    return sum(abs(c) for c in u.values())


@dataclass
class BasedChainComplex:
    """Per-dimension ordered basis and sparse boundary columns ``boundary[k][x] -> chain in dim k-1``."""

    basis: dict[int, list]
    boundary: dict[int, dict]

    def d(self, x: Hashable, k: int) -> Chain:
        return self.boundary.get(k, {}).get(x, {})

    def d_chain(self, u: Chain, k: int) -> Chain:
        out: dict = {}
        for x, c in u.items():
            add_into(out, self.d(x, k), c)
        return out

    @property
    def top(self) -> int:
        return max(self.basis, default=-1)

    def check_dd(self) -> list[tuple]:
        bad = []
        for k in sorted(self.basis):
            if k < 2:
                continue
            for x in self.basis[k]:
                r = self.d_chain(self.d(x, k), k - 1)
                if r:
                    bad.append((k, x, r))
        return bad

    def matrix(self, k: int) -> list[list[int]]:
        rows = {y: i for i, y in enumerate(self.basis.get(k - 1, []))}
        cols = self.basis.get(k, [])
        M = [[0] * len(cols) for _ in rows]
        for j, x in enumerate(cols):
            for y, c in self.d(x, k).items():
                M[rows[y]][j] = c
        return M


@dataclass
class ChainMap:
    """Sparse map of degree ``degree`` defined on basis elements of dimensions in ``dims``."""

    degree: int
    dims: tuple[int, ...]
    images: dict[int, dict] = field(default_factory=dict)
    source: BasedChainComplex | None = None
    target: BasedChainComplex | None = None

    def apply(self, x: Hashable, k: int) -> Chain:
        if k not in self.dims:
            raise RangeError(f"map not defined in dimension {k}")
        return self.images.get(k, {}).get(x, {})

    def apply_chain(self, u: Chain, k: int) -> Chain:
        out: dict = {}
        for x, c in u.items():
            add_into(out, self.apply(x, k), c)
        return out


def norm(F: ChainMap, n: int | None = None) -> int:
    if n is not None and n not in F.dims:
        raise RangeError(f"map declared only on dimensions {F.dims}")
    best = 0
    for k in F.dims:
        if n is not None and k > n:
            continue
        for img in F.images.get(k, {}).values():
            best = max(best, diameter(img))
    return best


def boundary_norm(C: BasedChainComplex, n: int) -> int:
    return max((diameter(C.d(x, k)) for k in range(1, n + 1) for x in C.basis.get(k, [])), default=0)


def identity_map(C: BasedChainComplex, dims: Iterable[int]) -> ChainMap:
    dims = tuple(dims)
    return ChainMap(0, dims, {k: {x: {x: 1} for x in C.basis.get(k, [])} for k in dims}, C, C)


def compose(G: ChainMap, F: ChainMap) -> ChainMap:
    """G after F."""
    dims = tuple(k for k in F.dims if k + F.degree in G.dims)
    images = {k: {x: G.apply_chain(img, k + F.degree) for x, img in F.images.get(k, {}).items()} for k in dims}
    return ChainMap(F.degree + G.degree, dims, images, F.source, G.target)


@dataclass
class HomotopyReport:
    ok: bool
    residuals: dict = field(default_factory=dict)
    basepoint: Any = None


def verify_null_homotopy(P: ChainMap, i: ChainMap, dims: Iterable[int], L: BasedChainComplex,
                         K: BasedChainComplex) -> HomotopyReport:
    """Check ``P d + d P = i`` on basis elements of ``L`` in ``dims``.

    In dimension 0 the augmented identity ``d P(v) = i(v) - apex`` is required,
    with one common 0-cell ``apex`` for all vertices."""
    residuals: dict = {}
    base = None
    ok = True
    for k in dims:
        for x in L.basis.get(k, []):
            lhs = K.d_chain(P.apply(x, k), k + 1)
            if k >= 1:
                add_into(lhs, P.apply_chain(L.d(x, k), k - 1))
            res = add_into(dict(lhs), i.apply(x, k), -1)
            if k == 0:
                if len(res) == 1 and next(iter(res.values())) == -1:
                    pt = next(iter(res))
                    if base is None:
                        base = pt
                    if pt == base:
                        continue
                elif not res and base is None:
                    continue
            if res:
                ok = False
                residuals[(k, x)] = res
    return HomotopyReport(ok, residuals, base)


# ---------------------------------------------------------------------------
# cellular chains of simplicial-cell complexes


def permutation_sign(seq: Sequence[int]) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def cellular_chain_complex(X: SimplicialCellComplex) -> BasedChainComplex:
    basis: dict[int, list] = {}
    bd: dict[int, dict] = {}
    for cid, c in enumerate(X.cells):
        basis.setdefault(c.dim, []).append(cid)
        if c.dim == 0:
            continue
        col: dict = {}
        for i, f in enumerate(c.facets):
            if X.cells[f.target].dim == c.dim - 1:
                add_into(col, {f.target: (-1) ** i * permutation_sign(f.assign)})
        bd.setdefault(c.dim, {})[cid] = col
    for k in range(X.dim + 1):
        basis.setdefault(k, [])
    return BasedChainComplex(basis, bd)


def inclusion_map(L: BasedChainComplex, dims: Iterable[int], idmap: dict | None = None) -> ChainMap:
    dims = tuple(dims)
    fn = (lambda x: x) if idmap is None else idmap.__getitem__
    return ChainMap(0, dims, {k: {x: {fn(x): 1} for x in L.basis.get(k, [])} for k in dims}, L)


def cone_null_homotopy(L: SimplicialCellComplex, K: SimplicialCellComplex, cone: dict[int, int]) -> ChainMap:
    """P(c) = cone(c); with slot 0 at the apex this satisfies ``P d + d P = i`` with sign +1."""
    if len(K.cells) != len(L.cells) + 1 + len(L.cells) or set(cone) != set(range(len(L.cells))):
        raise StructureError("K is not the cone of L")
    for cid, kid in cone.items():
        f0 = K.cells[kid].facets[0]
        if f0.target != cid or f0.assign != tuple(range(L.cells[cid].dim + 1)):
            raise StructureError(f"cone cell {kid} does not attach to {cid} by the identity")
    dims = tuple(range(L.dim + 1))
    images: dict[int, dict] = {k: {} for k in dims}
    for cid, c in enumerate(L.cells):
        images[c.dim][cid] = {cone[cid]: 1}
    return ChainMap(1, dims, images)


# ---------------------------------------------------------------------------
# simplicial sets, Moore complexes and normalization


class SimplicialSet(Protocol):
    def simplices(self, k: int) -> list: ...

    def face(self, x: Any, i: int) -> Any: ...

    def degeneracy(self, x: Any, i: int) -> Any: ...

    def is_degenerate(self, x: Any) -> bool: ...

    def dim(self, x: Any) -> int: ...


def moore_chain_complex(S: SimplicialSet, n: int) -> BasedChainComplex:
    basis = {k: list(S.simplices(k)) for k in range(n + 1)}
    bd: dict[int, dict] = {}
    for k in range(1, n + 1):
        bd[k] = {x: combine((S.face(x, i), (-1) ** i) for i in range(k + 1)) for x in basis[k]}
    return BasedChainComplex(basis, bd)


def normalized_chain_complex(S: SimplicialSet, n: int) -> BasedChainComplex:
    basis = {k: [x for x in S.simplices(k) if not S.is_degenerate(x)] for k in range(n + 1)}
    bd: dict[int, dict] = {}
    for k in range(1, n + 1):
        col = {}
        for x in basis[k]:
            col[x] = combine((S.face(x, i), (-1) ** i) for i in range(k + 1) if not S.is_degenerate(S.face(x, i)))
        bd[k] = col
    return BasedChainComplex(basis, bd)


class Normalizer:
    """Operators ``t_k = (-1)^k s_k`` and ``h_k = 1 - t_k d - d t_k`` on the Moore complex.

    The alternating sign is the one for which the composite ``h_0 ... h_{n+1}`` annihilates
    degenerate chains through dimension ``n``; the tests pin it."""

    def __init__(self, S: SimplicialSet, n: int):
        self.S, self.n = S, n

    def d(self, x, k: int) -> Chain:
        return combine((self.S.face(x, i), (-1) ** i) for i in range(k + 1)) if k >= 1 else {}

    def d_chain(self, u: Chain, k: int) -> Chain:
        out: dict = {}
        for x, c in u.items():
            add_into(out, self.d(x, k), c)
        return out

    def t(self, j: int, u: Chain, k: int) -> Chain:
        if k < j:
            return {}
        return combine((self.S.degeneracy(x, j), (-1) ** j * c) for x, c in u.items())

    def h(self, j: int, u: Chain, k: int) -> Chain:
        out = dict(u)
        add_into(out, self.t(j, self.d_chain(u, k), k - 1) if k >= 1 else {}, -1)
        add_into(out, self.d_chain(self.t(j, u, k), k + 1), -1)
        return out

    def h_total(self, u: Chain, k: int) -> Chain:
        for j in range(self.n + 1, -1, -1):
            u = self.h(j, u, k)
        return u


@dataclass
class NormalizationReport:
    g_norm: int
    bound: int
    pi_g_identity: bool
    g_chain_map: bool
    h_chain_maps: bool
    h_norms: list[int]


def normalize(G_or_S: Any, n: int, check: bool = True) -> tuple[ChainMap, ChainMap, NormalizationReport]:
    """Returns ``(pi, g, report)``: ``pi`` kills degenerate simplices, ``g = h_0 ... h_{n+1}`` on
    nondegenerate ones, with ``pi g = id`` and ``g`` a chain map up to dimension ``n``."""
    from .barcx import BarSet, FiniteGroup

    S = BarSet(G_or_S) if isinstance(G_or_S, FiniteGroup) else G_or_S
    moore = moore_chain_complex(S, n)
    cell = normalized_chain_complex(S, n)
    dims = tuple(range(n + 1))
    pi = ChainMap(0, dims, {k: {x: ({} if S.is_degenerate(x) else {x: 1}) for x in moore.basis[k]} for k in dims}, moore, cell)
    N = Normalizer(S, n)
    g = ChainMap(0, dims, {k: {x: N.h_total({x: 1}, k) for x in cell.basis[k]} for k in dims}, cell, moore)
    bound = (2 * n + 3) ** (n + 1)
    rep = NormalizationReport(norm(g), bound, True, True, True, [])
    if check:
        pg = compose(pi, g)
        rep.pi_g_identity = all(pg.images[k][x] == {x: 1} for k in dims for x in cell.basis[k])
        rep.g_chain_map = all(
            moore.d_chain(g.apply(x, k), k) == g.apply_chain(cell.d(x, k), k - 1)
            for k in range(1, n + 1) for x in cell.basis[k]
        )
        ok = True
        for j in range(n + 2):
            worst = 0
            for k in dims:
                for x in moore.basis[k]:
                    hx = N.h(j, {x: 1}, k)
                    worst = max(worst, diameter(hx))
                    if k >= 1 and moore.d_chain(hx, k) != N.h(j, moore.d(x, k), k - 1):
                        ok = False
            rep.h_norms.append(worst)
        rep.h_chain_maps = ok
    return pi, g, rep


def induced_null_homotopy(Phi: ChainMap, pi: ChainMap, g: ChainMap) -> tuple[ChainMap, dict]:
    """P = pi o Phi o g, with the norm bookkeeping ``|P| <= |pi| |Phi| |g|``."""
    need = set(g.dims)
    if not need <= set(Phi.dims) or not {k + 1 for k in need} <= set(pi.dims):
        raise RangeError("Phi, pi and g are declared on incompatible ranges")
    P = compose(pi, compose(Phi, g))
    info = {"norm": norm(P), "pi": norm(pi), "Phi": norm(Phi), "g": norm(g)}
    info["bound"] = info["pi"] * info["Phi"] * info["g"]
    return P, info


# ---------------------------------------------------------------------------
# integer homology


def smith_diagonal(M: list[list[int]]) -> list[int]:
    """Nonzero diagonal entries of the Smith normal form of an integer matrix."""
    A = [row[:] for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    diag = []
    r = 0
    while r < min(rows, cols):
        piv = None
        best = None
        for i in range(r, rows):
            for j in range(r, cols):
                if A[i][j] and (best is None or abs(A[i][j]) < best):
                    best, piv = abs(A[i][j]), (i, j)
        if piv is None:
            break
        i, j = piv
        A[r], A[i] = A[i], A[r]
        for row in A:
            row[r], row[j] = row[j], row[r]
        done = False
        while not done:
            done = True
            p = A[r][r]
            for i in range(r + 1, rows):
                q = A[i][r] // p
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[r])]
            for j in range(r + 1, cols):
                q = A[r][j] // p
                if q:
                    for row in A:
                        row[j] -= q * row[r]
            bad = [(i, r) for i in range(r + 1, rows) if A[i][r]] + [(r, j) for j in range(r + 1, cols) if A[r][j]]
            if bad:
                done = False
                i, j = bad[0]
                if i != r:
                    A[r], A[i] = A[i], A[r]
                else:
                    for row in A:
                        row[r], row[j] = row[j], row[r]
                continue
            for i in range(r + 1, rows):
                for j in range(r + 1, cols):
                    if A[i][j] % p:
                        A[r] = [a + b for a, b in zip(A[r], A[i])]
                        done = False
                        break
                if not done:
                    break
        diag.append(abs(A[r][r]))
        r += 1
    return diag


def homology(C: BasedChainComplex, k: int) -> tuple[int, list[int]]:
    """(Betti number, torsion coefficients) of ``H_k``."""
    nk = len(C.basis.get(k, []))
    dk = smith_diagonal(C.matrix(k)) if k >= 1 and C.basis.get(k - 1) and nk else []
    up = C.basis.get(k + 1, [])
    dk1 = smith_diagonal(C.matrix(k + 1)) if up and nk else []
    betti = nk - len(dk) - len(dk1)
    return betti, [e for e in dk1 if e > 1]
