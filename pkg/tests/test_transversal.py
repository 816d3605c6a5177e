import random

import pytest
from hypothesis import given, settings, strategies as st

from bordiq.barcx import FiniteGroup, bar_skeleton
from bordiq.kernel import verify_closed_manifold
from bordiq.maps import Cocycle, from_cocycle, validate
from bordiq.transversal import (DimensionError, audit_transversality, cobordisms, disjointness_issues, fibers,
                                pattern_pieces, pattern_triangulation, pieces_count, preimage, pseudo_radial,
                                subdivide_source, top_dim_subdivision, triangulate_cobordisms, triangulate_fibers)
from instances import hexagon, random_cocycle, torus, torus_first_factor


def hexagon_map():
    H = hexagon()
    return from_cocycle(H, Cocycle(FiniteGroup.cyclic(2), {e: 1 for e in H.simplices(1)}))[0]


@pytest.mark.parametrize("p,count", [(1, 3), (2, 7), (3, 13)])
def test_pattern_piece_counts(p, count):
    assert pieces_count(p) == count
    assert len(pattern_pieces(p, triangulated=True)) == count
    assert len(pattern_pieces(p)) == p + 2


def test_pattern_triangulation_is_a_ball():
    T = pattern_triangulation(2)
    assert len(T.top()) == 7
    assert T.euler_characteristic() == 1


def test_subdivided_z3_skeleton():
    sub = top_dim_subdivision(bar_skeleton(FiniteGroup.cyclic(3), 2).complex)
    assert sub.Pp.count_by_dim() == [13, 38, 28]
    assert not sub.Pp.validate()
    assert validate(pseudo_radial(sub)).ok


def test_hexagon_fibers_are_points():
    f = hexagon_map()
    Y, rep = triangulate_fibers(fibers(f).values(), len(f.source))
    assert Y.f_vector() == [6]
    assert rep.ratio == 0.5


def test_hexagon_source_subdivision():
    f = hexagon_map()
    sub = top_dim_subdivision(f.target)
    K, f2, rep = subdivide_source(f, sub)
    assert K.f_vector() == [18, 18]
    assert validate(f2).ok and rep.ok
    assert verify_closed_manifold(K, 1).certified


def test_preimage_needs_top_cell():
    f = hexagon_map()
    with pytest.raises(DimensionError):
        preimage(f, 0)


def test_torus_first_factor_fibers_are_points():
    M, c = torus_first_factor(3)
    f, _ = from_cocycle(M, c)
    assert f.target.dim == 2
    Y, _ = triangulate_fibers(fibers(f).values(), len(M))
    assert Y.f_vector() == [4]
    assert verify_closed_manifold(Y, 0).certified


def test_cobordisms_disjoint_and_laws():
    M, c = torus_first_factor(3)
    f, _ = from_cocycle(M, c)
    Z = cobordisms(f)
    assert not disjointness_issues(Z)
    for cb in Z.values():
        for t in cb.boundary.values():
            assert t.parity_ok and t.k <= f.target.dim + 1
    assert len(triangulate_cobordisms(Z)) > 0


def test_unmapped_cell_has_empty_fiber():
    # image misses every 2-cell of the Z3 skeleton except those hit by the cocycle
    M = torus(3)
    c = random_cocycle(M, 3, random.Random(7))
    f, _ = from_cocycle(M, c, n=2)
    a = audit_transversality(f)
    hit = {f[t][0] for t in M.simplices()}
    for sigma, row in a.per_sigma.items():
        assert row["onto"] == (sigma in hit)
    assert a.nonempty_law


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([2, 3]), st.booleans())
def test_transversality_laws_on_random_torus_maps(seed, q, oriented):
    M = torus(3)
    f, _ = from_cocycle(M, random_cocycle(M, q, random.Random(seed)))
    a = audit_transversality(f, oriented)
    assert a.nonempty_law and a.parity_law and a.bound_law
    assert a.signed_law is (True if oriented else None)
    assert a.fibers_certified and a.disjoint


def test_signed_count_on_oriented_hexagon():
    H = hexagon()
    H.orientation = {e: 1 for e in H.top()}
    f = from_cocycle(H, Cocycle(FiniteGroup.cyclic(2), {e: 1 for e in H.simplices(1)}))[0]
    a = audit_transversality(f, oriented=True)
    assert a.signed_law is True
