"""Rho-invariant values of lens spaces, bounds derived from bordisms, and stable complexity."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .kernel import SimplicialComplex


class DomainError(ValueError):
    pass


_DPS = 40


def lens_rho_mp(N: int, k: int) -> mpmath.mpf:
    if N <= 2:
        raise DomainError("N must exceed 2")
    if k < 1:
        raise DomainError("k must be at least 1")
    with mpmath.workdps(_DPS):
        s = mpmath.fsum(mpmath.cot(j * mpmath.pi / N) ** (2 * k) for j in range(1, N))
        return s / N


def lens_rho(N: int, k: int) -> float:
    """(1/N) * sum over j = 1..N-1 of cot(j pi / N)^(2k)."""
    return float(lens_rho_mp(N, k))


def lens_rho_interval(N: int, k: int) -> mpmath.iv.mpf:
    """Interval enclosure of the same sum, for inequality checks that must not be fragile."""
    if N <= 2:
        raise DomainError("N must exceed 2")
    iv = mpmath.iv
    saved = iv.dps
    iv.dps = _DPS
    try:
        total = iv.mpf(0)
        for j in range(1, N):
            total += iv.cot(j * iv.pi / N) ** (2 * k)
        return total / N
    finally:
        iv.dps = saved


def lens_lower_bound(N: int, k: int) -> Fraction:
    return Fraction(1, 3 ** (3 * k)) * N ** (2 * k - 1)


def lens_bound_holds(N: int, k: int) -> bool:
    lo = lens_lower_bound(N, k)
    iv = mpmath.iv
    saved = iv.dps
    iv.dps = _DPS
    try:
        bound = iv.mpf(lo.numerator) / lo.denominator
        return bool(lens_rho_interval(N, k).a >= bound.b)
    finally:
        iv.dps = saved


def bordism_rho_bound(deltaW: int) -> int:
    """Twice the simplex count of a bounding bordism; handles are counted by simplices."""
    if deltaW < 0:
        raise DomainError("simplex count must be nonnegative")
    return 2 * deltaW


def connected_sum_rho(r: int, rho):
    if r < 1:
        raise DomainError("number of summands must be at least 1")
    return r * rho


def stable_complexity_bounds(rho, deltaM: int, C) -> tuple:
    if C <= 0:
        raise DomainError("the constant must be positive")
    return C * abs(rho), deltaM


def cyclic_form_l2_signature(d: int) -> Fraction:
    if d < 2:
        raise DomainError("d must be at least 2")
    return Fraction(1, d) - 1


def commutator_genus_bound(r: int) -> tuple[int, Fraction]:
    """Commutator length of [a, b]^r and the resulting lower bound for a bounding surface."""
    if r < 1:
        raise DomainError("r must be at least 1")
    cl = r // 2 + 1
    return cl, Fraction(cl, 2)


@dataclass
class RhoBoundReport:
    rho_value: float | None
    upper_bound: float | None
    lower_bound: float | None
    provenance: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        vals = [self.lower_bound, self.rho_value, self.upper_bound]
        present = [v for v in vals if v is not None]
        return all(a <= b for a, b in zip(present, present[1:]))


def lens_report(N: int, k: int, deltaW: int | None = None) -> RhoBoundReport:
    prov = {"rho_value": "cotangent sum", "lower_bound": "(1/3)^(3k) N^(2k-1)"}
    upper = None
    if deltaW is not None:
        upper = float(bordism_rho_bound(deltaW))
        prov["upper_bound"] = "twice the simplex count of a bounding bordism"
    return RhoBoundReport(lens_rho(N, k), upper, float(lens_lower_bound(N, k)), prov)


# ---------------------------------------------------------------------------
# connected sums of triangulated closed manifolds


def connected_sum(X: SimplicialComplex, Y: SimplicialComplex, x_top: tuple | None = None,
                  y_top: tuple | None = None) -> SimplicialComplex:
    """Remove a top simplex from each and identify their boundaries vertex by vertex.

    Vertices of ``Y`` are renamed to integers after those of ``X`` (vertex ids must be integers)."""
    if X.dim != Y.dim:
        raise DomainError("summands must have the same dimension")
    a = x_top or max(X.top())
    b = y_top or min(Y.top())
    if a not in X.simplices() or b not in Y.simplices() or len(a) != X.dim + 1:
        raise DomainError("chosen simplices are not top simplices")
    shift = max(X.vertices) + 1
    ren = {v: shift + i for i, v in enumerate(Y.vertices)}
    ren.update(dict(zip(b, a)))
    tops = [s for s in X.top() if s != a]
    tops += [tuple(sorted(ren[v] for v in s)) for s in Y.top() if s != b]
    return SimplicialComplex(tops)


def iterated_sum(M: SimplicialComplex, r: int) -> SimplicialComplex:
    """#^r M, each new summand glued along a simplex of the most recent copy."""
    if r < 1:
        raise DomainError("r must be at least 1")
    out = M
    for _ in range(r - 1):
        out = connected_sum(out, M)
    return out
