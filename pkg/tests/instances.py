"""Small closed manifolds and random cocycles used across the test suite."""
from __future__ import annotations

import random
from itertools import combinations, permutations

from bordiq.barcx import FiniteGroup
from bordiq.kernel import SimplicialComplex, build_simplicial
from bordiq.maps import Cocycle


def hexagon() -> SimplicialComplex:
    return build_simplicial([(i, (i + 1) % 6) for i in range(6)])


def polygon(k: int) -> SimplicialComplex:
    return build_simplicial([(i, (i + 1) % k) for i in range(k)])


def sphere_boundary(n: int) -> SimplicialComplex:
    """Boundary of the (n+1)-simplex."""
    return build_simplicial(combinations(range(n + 2), n + 1))


def octahedron() -> SimplicialComplex:
    return build_simplicial([(a, b, c) for a in (0, 1) for b in (2, 3) for c in (4, 5)])


def rp2() -> SimplicialComplex:
    return build_simplicial([(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
                             (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3)])


def _grid_triangles(m: int):
    for i in range(m):
        for j in range(m):
            yield ((i, j), (i + 1, j), (i + 1, j + 1))
            yield ((i, j), (i, j + 1), (i + 1, j + 1))


def torus_vertex(m: int, P) -> int:
    return P[0] % m + m * (P[1] % m)


def torus(m: int, relabel: dict | None = None) -> SimplicialComplex:
    """m x m grid torus, vertex (i, j) -> i + m*j (optionally relabelled)."""
    r = relabel or {}
    return build_simplicial([tuple(r.get(torus_vertex(m, P), torus_vertex(m, P)) for P in t)
                             for t in _grid_triangles(m)])


def torus_first_factor(m: int, d: int = 2, relabel: dict | None = None) -> tuple[SimplicialComplex, Cocycle]:
    """Torus with the cocycle counting crossings of the seam i = m - 1 | 0 (first factor)."""
    r = relabel or {}
    lab = lambda P: r.get(torus_vertex(m, P), torus_vertex(m, P))
    M = torus(m, relabel)
    labels = {}
    for t in _grid_triangles(m):
        for P, Q in combinations(t, 2):
            val = (Q[0] // m - P[0] // m) % d
            u, v = lab(P), lab(Q)
            if u > v:
                u, v, val = v, u, (-val) % d
            labels[(u, v)] = val
    return M, Cocycle(FiniteGroup.cyclic(d), labels)


def klein(m: int) -> SimplicialComplex:
    def canon(P):
        i, j = P
        if (j // m) % 2:
            i = -i
        return i % m + m * (j % m)

    return build_simplicial([tuple(canon(P) for P in t) for t in _grid_triangles(m)])


def three_torus(m: int) -> SimplicialComplex:
    tets = []
    for x in range(m):
        for y in range(m):
            for z in range(m):
                for perm in permutations(range(3)):
                    P = [x, y, z]
                    pts = [tuple(P)]
                    for ax in perm:
                        P[ax] += 1
                        pts.append(tuple(P))
                    tets.append(tuple(a % m + m * (b % m) + m * m * (c % m) for a, b, c in pts))
    return build_simplicial(tets)


def _nullspace_mod(rows: list[list[int]], ncols: int, q: int) -> list[list[int]]:
    rows = [r[:] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] % q), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, q)
        rows[r] = [x * inv % q for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] % q:
                k = rows[i][c]
                rows[i] = [(x - k * y) % q for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [0] * ncols
        v[fcol] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-rows[i][fcol]) % q
        basis.append(v)
    return basis


def random_cocycle(M: SimplicialComplex, q: int, rng: random.Random) -> Cocycle:
    """Uniform-ish random Z_q 1-cocycle (q prime) from a nullspace basis of the coboundary."""
    edges = sorted(M.simplices(1))
    idx = {e: i for i, e in enumerate(edges)}
    rows = []
    for a, b, c in sorted(M.simplices(2)):
        row = [0] * len(edges)
        row[idx[(a, b)]] += 1
        row[idx[(b, c)]] += 1
        row[idx[(a, c)]] -= 1
        rows.append(row)
    basis = _nullspace_mod(rows, len(edges), q)
    vec = [0] * len(edges)
    for b in basis:
        k = rng.randrange(q)
        vec = [(x + k * y) % q for x, y in zip(vec, b)]
    return Cocycle(FiniteGroup.cyclic(q), {e: vec[idx[e]] for e in edges})


def surfaces() -> list[tuple[str, SimplicialComplex]]:
    return [("torus3", torus(3)), ("torus4", torus(4)), ("sphere", sphere_boundary(2)),
            ("octahedron", octahedron()), ("rp2", rp2()), ("klein3", klein(3)), ("klein4", klein(4))]


def three_manifolds() -> list[tuple[str, SimplicialComplex]]:
    return [("sphere3", sphere_boundary(3)), ("T3", three_torus(3))]


def monotone_coboundary(M: SimplicialComplex, q: int, rng: random.Random, levels: int | None = None) -> Cocycle:
    """Coboundary of a vertex function that is nondecreasing in the vertex order.

    Along a sorted simplex the labels are the jumps of the function, so the image
    dimension equals the number of distinct values met minus one."""
    vs = M.vertices
    k = min(levels or q, q)
    cuts = sorted(rng.sample(range(1, len(vs)), k - 1))
    phi, lev = {}, 0
    for i, v in enumerate(vs):
        while lev < len(cuts) and i >= cuts[lev]:
            lev += 1
        phi[v] = lev
    return Cocycle(FiniteGroup.cyclic(q), {(u, v): (phi[v] - phi[u]) % q for u, v in M.simplices(1)})


def seam_cocycle(M: SimplicialComplex, m: int, axis: int, q: int, dims: int) -> Cocycle:
    """Cocycle counting crossings of the seam between coordinate m-1 and 0 along ``axis`` on a
    grid manifold with vertex id sum(c_k m^k)."""
    def coord(v):
        return (v // m ** axis) % m

    labels = {}
    for u, v in M.simplices(1):
        cu, cv = coord(u), coord(v)
        val = 0
        if cu == m - 1 and cv == 0:
            val = 1
        elif cu == 0 and cv == m - 1:
            val = -1
        labels[(u, v)] = val % q
    return Cocycle(FiniteGroup.cyclic(q), labels)
