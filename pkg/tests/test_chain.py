import random

import pytest
from hypothesis import given, settings, strategies as st

from bordiq.barcx import FiniteGroup, bar_skeleton
from bordiq.chain import (ChainMap, RangeError, cellular_chain_complex, compose, cone_null_homotopy, homology,
                          inclusion_map, induced_null_homotopy, norm, normalize, permutation_sign, smith_diagonal,
                          verify_null_homotopy)
from bordiq.kernel import SimplicialCellComplex, SimplicialComplex, cone_complex
from instances import torus


def random_complex(rng: random.Random, nverts: int, ntops: int, dim: int) -> SimplicialComplex:
    tops = [tuple(rng.sample(range(nverts), rng.randint(1, min(dim + 1, nverts)))) for _ in range(ntops)]
    return SimplicialComplex(tops)


def cone_check(L: SimplicialCellComplex):
    K, _, cone = cone_complex(L)
    Lc, Kc = cellular_chain_complex(L), cellular_chain_complex(K)
    P = cone_null_homotopy(L, K, cone)
    dims = range(L.dim + 1)
    return verify_null_homotopy(P, inclusion_map(Lc, dims), dims, Lc, Kc), P


def test_dd_zero_on_torus():
    C = cellular_chain_complex(SimplicialCellComplex.from_simplicial(torus(3))[0])
    assert not C.check_dd()


def test_torus_homology():
    C = cellular_chain_complex(SimplicialCellComplex.from_simplicial(torus(3))[0])
    assert [homology(C, k) for k in range(3)] == [(1, []), (2, []), (1, [])]


def test_smith_diagonal_small():
    assert smith_diagonal([[2, 4], [6, 8]]) == [2, 4]
    assert smith_diagonal([[0, 0], [0, 0]]) == []


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=1, max_size=4))
def test_smith_matches_sympy(rows):
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import smith_normal_form

    ours = smith_diagonal(rows)
    snf = smith_normal_form(Matrix(rows), domain=ZZ)
    theirs = [abs(int(snf[i, i])) for i in range(min(snf.shape)) if snf[i, i] != 0]
    assert ours == theirs
    assert all(b % a == 0 for a, b in zip(ours, ours[1:]))


def test_permutation_sign():
    assert permutation_sign([0, 1, 2]) == 1
    assert permutation_sign([1, 0, 2]) == -1
    assert permutation_sign([2, 0, 1]) == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_cone_homotopy_on_random_complexes(seed):
    rng = random.Random(seed)
    X = random_complex(rng, rng.randint(2, 8), rng.randint(1, 8), 3)
    report, P = cone_check(SimplicialCellComplex.from_simplicial(X)[0])
    assert report.ok
    assert norm(P) == 1


@pytest.mark.parametrize("d,n", [(2, 3), (3, 2), (4, 2)])
def test_cone_homotopy_on_bar_skeleta(d, n):
    report, P = cone_check(bar_skeleton(FiniteGroup.cyclic(d), n).complex)
    assert report.ok and norm(P) == 1


def test_wrong_homotopy_is_caught():
    L, _ = SimplicialCellComplex.from_simplicial(SimplicialComplex([(0, 1)]))
    K, _, cone = cone_complex(L)
    P = cone_null_homotopy(L, K, cone)
    P.images[1] = {c: {k: -1 for k in img} for c, img in P.images[1].items()}
    Lc, Kc = cellular_chain_complex(L), cellular_chain_complex(K)
    assert not verify_null_homotopy(P, inclusion_map(Lc, (0, 1)), (0, 1), Lc, Kc).ok


def test_norm_outside_range():
    F = ChainMap(0, (0, 1), {0: {"a": {"a": 1, "b": -2}}})
    assert norm(F) == 3
    with pytest.raises(RangeError):
        norm(F, 2)


def test_compose_degrees():
    F = ChainMap(1, (0,), {0: {"x": {"y": 2}}})
    G = ChainMap(0, (1,), {1: {"y": {"z": 3}}})
    H = compose(G, F)
    assert H.degree == 1 and H.images[0]["x"] == {"z": 6}


@pytest.mark.parametrize("name,n", [("Z2", 3), ("Z3", 2), ("S3", 2)])
def test_normalization_properties(name, n):
    G = {"Z2": FiniteGroup.cyclic(2), "Z3": FiniteGroup.cyclic(3), "S3": FiniteGroup.symmetric3()}[name]
    pi, g, rep = normalize(G, n)
    assert rep.pi_g_identity and rep.g_chain_map and rep.h_chain_maps
    assert rep.g_norm <= rep.bound


def test_normalization_norm_is_power_of_two():
    # frozen from the implementation: |g| = 2^n on the cyclic groups tried
    for d in (2, 3):
        for n in (1, 2, 3):
            assert normalize(FiniteGroup.cyclic(d), n, check=False)[2].g_norm == 2 ** n


def test_induced_homotopy_bookkeeping():
    G = FiniteGroup.cyclic(2)
    _, g, _ = normalize(G, 1)
    pi, _, _ = normalize(G, 2, check=False)
    Phi = ChainMap(1, (0, 1), {0: {x: {x + (0,): 1} for x in g.target.basis[0]},
                               1: {x: {x + (0,): 1} for x in g.target.basis[1]}})
    P, info = induced_null_homotopy(Phi, pi, g)
    assert info["norm"] <= info["bound"]
