"""Polynomial geometry of the characteristic map.

CharPoint holds the coefficient tuple (a_1, ..., a_n) of a monic
polynomial T^n + a_1 T^{n-1} + ... + a_n over F' with the parity
tau(a_i) = (-1)^i a_i.  This module provides

  * the explicit section of the characteristic-polynomial map: a
    companion-style matrix in b-coordinates (b_1 = a_1/2, b_i
    homogeneous of degree i), solved degree by degree;
  * the multiplication map gluing two characteristic points and the
    coprimality criterion for injectivity of its tangent map;
  * the spectral discriminant D(a) with the reducedness predicate
    (valuation finite), normalized so D(T^2 + c) = -4c;
  * the local intersection profile of the two spectral branches cut
    out by a partition: closed points with residue degree, local
    multiplicity, inertness in the quadratic base change, and the
    resulting sign (-1)^m.

Everything is exact; the intersection profile is linear algebra over
F_q in a finite quotient of F_q[t, u].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import polys
from .chardata import CharacteristicDatum
from .errors import InconsistentInvariants, IndeterminateValuation
from .gf import _irreducibles_upto, _poly_mod, _poly_mul, _poly_trim
from .linalg import char_poly
from .series import LaurentSeries


@dataclass
class CharPoint:
    """Coefficients a_1..a_n over F', with tau(a_i) = (-1)^i a_i."""

    field: object
    a: list

    def __post_init__(self):
        tau = self.field.frobenius_matrix
        for i, ai in enumerate(self.a, start=1):
            want = ai if i % 2 == 0 else -ai
            if not (ai.tau(tau) - want).is_zero:
                raise InconsistentInvariants(f"coefficient a_{i} violates tau-parity")

    @property
    def n(self) -> int:
        return len(self.a)

    def monic_poly(self) -> list[LaurentSeries]:
        n = self.n
        P = [LaurentSeries.zero(self.field) for _ in range(n + 1)]
        P[n] = LaurentSeries.one(self.field)
        for k, ak in enumerate(self.a, start=1):
            P[n - k] = ak
        return P

    @classmethod
    def from_monic_poly(cls, field, P: list[LaurentSeries]) -> "CharPoint":
        n = len(P) - 1
        return cls(field, [P[n - k] for k in range(1, n + 1)])


def char_point_of_subset(datum: CharacteristicDatum, J) -> CharPoint:
    return CharPoint.from_monic_poly(datum.base, datum.poly_product(J))


def _companion_section(field, b: list[LaurentSeries]):
    """First row -b_1 .. -b_{n-1}, -2 b_n; subdiagonal 1; last column
    -2 b_n, -b_{n-1}, ..., -b_1 from top to bottom."""
    n = len(b)
    minus2 = field.neg(2 % field.p)
    if n == 1:
        return [[b[0].scalar_mul(minus2)]]
    M = [[LaurentSeries.zero(field) for _ in range(n)] for _ in range(n)]
    for k in range(n - 1):
        M[0][k] = -b[k]
    M[0][n - 1] = b[n - 1].scalar_mul(minus2)
    for r in range(1, n):
        M[r][r - 1] = LaurentSeries.one(field)
        M[r][n - 1] = -b[n - 1 - r]
    return M


def kostant_coeffs(a: CharPoint) -> list[LaurentSeries]:
    """The b-ladder making the companion-style matrix hit the point a.

    c_i(b) depends only on b_1..b_i and is linear in b_i with a fixed
    integer slope (homogeneity), so a single triangular sweep solves
    for all b_i; the slopes are invertible because p > n.
    """
    field = a.field
    n = a.n
    b = [LaurentSeries.zero(field) for _ in range(n)]
    for i in range(1, n + 1):
        cur = char_poly(_companion_section(field, b))[i - 1]
        probe = list(b)
        probe[i - 1] = LaurentSeries.one(field)
        bumped = char_poly(_companion_section(field, probe))[i - 1]
        alpha = (bumped - cur).coeff(0)
        if alpha == 0:
            raise InconsistentInvariants(f"degenerate linear coefficient for b_{i}")
        b[i - 1] = (a.a[i - 1] - cur).scalar_mul(field.inv(alpha))
    return b


def kostant_matrix(a: CharPoint):
    """Section matrix; its characteristic polynomial is exactly a."""
    M = _companion_section(a.field, kostant_coeffs(a))
    for ck, ak in zip(char_poly(M), a.a):
        if not (ck - ak).is_zero:
            raise InconsistentInvariants("section matrix does not reproduce its point")
    return M


def endo_product(a1: CharPoint, a2: CharPoint) -> CharPoint:
    """Coefficients of the product polynomial; tau-parity is preserved."""
    P = polys.poly_mul(a1.monic_poly(), a2.monic_poly())
    return CharPoint.from_monic_poly(a1.field, P)


def spectral_discriminant(a: CharPoint) -> LaurentSeries:
    """D(a); the spectral curve is reduced iff its valuation is finite."""
    return polys.poly_discriminant(a.monic_poly())


def is_reduced(a: CharPoint) -> bool:
    D = spectral_discriminant(a)
    if D.is_zero:
        if D.is_exact:
            return False
        raise IndeterminateValuation("discriminant vanishes at working precision")
    return True


def tangent_injectivity(a1: CharPoint, a2: CharPoint) -> bool:
    """Injectivity of (P1dot, P2dot) -> P1 P2dot + P2 P1dot, which holds
    exactly when P1 and P2 are coprime at the generic point."""
    res = polys.sylvester_resultant(a1.monic_poly(), a2.monic_poly())
    if res.is_zero:
        if res.is_exact:
            return False
        raise IndeterminateValuation("resultant vanishes at working precision")
    return True


# ---------------------------------------------------------------------------
# intersection profile


@dataclass
class IntersectionPoint:
    degree: int        # residue degree over F_q
    multiplicity: int  # length of the local ring over its residue field
    inert: bool        # stays a single point in the quadratic base change


@dataclass
class IntersectionProfile:
    points: list
    m: int        # sum of multiplicities over inert points
    r_total: int  # sum of multiplicity * degree over all points

    @property
    def sign(self) -> int:
        return -1 if self.m % 2 else 1


def _twist_to_base_poly(datum: CharacteristicDatum, P: list[LaurentSeries]) -> list[list[int]]:
    """Scale the coefficient of T^{n-k} by eps^k, landing in F_q[[t]].

    Returns integer t-coefficient rows indexed by u-degree.
    """
    n = len(P) - 1
    out = []
    for udeg in range(n + 1):
        c = P[udeg].scalar_mul(datum.base.power(datum.eps, n - udeg))
        if c.C.size and c.C[:, 1].any():
            raise InconsistentInvariants("twisted coefficient left the base field")
        if c.val_lower() < 0:
            raise InconsistentInvariants("twisted coefficient is not integral")
        row = [0] * (int(c.off) + c.C.shape[0]) if c.C.size else []
        for j in range(c.C.shape[0]):
            row[c.off + j] = int(c.C[j, 0])
        out.append(row)
    return out


def _fq_poly_gcd(A: list[int], B: list[int], p: int) -> list[int]:
    A, B = _poly_trim(list(A)), _poly_trim(list(B))
    while B:
        A, B = B, _poly_trim(_poly_mod(A, B, p))
    if A:
        inv = pow(A[-1], p - 2, p)
        A = [(x * inv) % p for x in A]
    return A


def _fq_factor(h: list[int], p: int) -> list[tuple[list[int], int]]:
    """Monic irreducible factorization over F_p by exhaustive trial
    division (root search is the degree-1 stage of the same sweep)."""
    h = _poly_trim(list(h))
    out = []
    deg = len(h) - 1
    if deg <= 0:
        return out
    for g in _irreducibles_upto(p, deg):
        mult = 0
        while len(h) > len(g) - 1:
            q, rem = _poly_divmod(h, g, p)
            if rem:
                break
            h = q if q else [1]
            mult += 1
        if mult:
            out.append((g, mult))
        if len(h) <= 1:
            break
    if len(h) > 1:
        out.append((h, 1))
    return out


def _poly_divmod(A: list[int], B: list[int], p: int):
    A = _poly_trim(list(A))
    dB = len(B) - 1
    inv = pow(B[-1], p - 2, p)
    q = [0] * max(len(A) - dB, 1)
    while len(A) - 1 >= dB and A:
        c = (A[-1] * inv) % p
        shift = len(A) - 1 - dB
        q[shift] = c
        for i, bi in enumerate(B):
            A[shift + i] = (A[shift + i] - c * bi) % p
        A = _poly_trim(A)
    return _poly_trim(q), A


def intersection_profile(datum: CharacteristicDatum, partition) -> IntersectionProfile:
    """Closed points of the local intersection of the two spectral
    branches with their lengths; checks the total against the
    inter-part resultant valuation."""
    I1, I2 = (tuple(sorted(part)) for part in partition)
    p = datum.p
    Q1 = _twist_to_base_poly(datum, datum.poly_product(I1))
    Q2 = _twist_to_base_poly(datum, datum.poly_product(I2))
    r_expected = sum(datum.r_matrix[i][j] for i in I1 for j in I2)
    q1bar = _poly_trim([row[0] if row else 0 for row in Q1])
    q2bar = _poly_trim([row[0] if row else 0 for row in Q2])
    gbar = _fq_poly_gcd(q1bar, q2bar, p)
    points = []
    total = 0
    if len(gbar) > 1:
        N0 = K = r_expected + 1
        for h, _mult in _fq_factor(gbar, p):
            ell = _local_component_dim(Q1, Q2, h, K, N0, p)
            d = len(h) - 1
            if ell % d:
                raise InconsistentInvariants(
                    f"component length {ell} not divisible by residue degree {d}")
            if ell:
                points.append(IntersectionPoint(degree=d, multiplicity=ell // d,
                                                inert=bool(d % 2)))
            total += ell
    if total != r_expected:
        raise InconsistentInvariants(
            f"profile degree sum {total} != resultant valuation {r_expected}")
    m = sum(pt.multiplicity for pt in points if pt.inert)
    return IntersectionProfile(points=points, m=m, r_total=total)


def _ureduce(A: np.ndarray, hK: list[int], U: int, p: int) -> np.ndarray:
    """Reduce u-degree below U using the monic relation u^U = -sum h_i u^i."""
    A = A % p
    for top in range(A.shape[0] - 1, U - 1, -1):
        row = A[top].copy()
        if row.any():
            shift = top - U
            for i, hi in enumerate(hK[:-1]):
                if hi:
                    A[shift + i] = (A[shift + i] - hi * row) % p
        A[top] = 0
    return A[:U]


def _local_component_dim(Q1, Q2, h, K: int, N0: int, p: int) -> int:
    """dim_{F_q} of F_q[t, u] / (t^N0, Q1, Q2, h^K)."""
    hK = [1]
    for _ in range(K):
        hK = _poly_mul(hK, h, p)
    U = len(hK) - 1
    if U == 0:
        return 0

    def qmat(Q):
        A = np.zeros((len(Q), N0), dtype=np.int64)
        for udeg, row in enumerate(Q):
            for j, c in enumerate(row[:N0]):
                A[udeg, j] = c % p
        return A

    gens = []
    for QA in (qmat(Q1), qmat(Q2)):
        for alpha in range(U):
            big = np.zeros((max(U, alpha + QA.shape[0]), N0), dtype=np.int64)
            big[alpha : alpha + QA.shape[0]] = QA
            red = _ureduce(big, hK, U, p)
            for beta in range(N0):
                shifted = np.zeros((U, N0), dtype=np.int64)
                shifted[:, beta:] = red[:, : N0 - beta]
                gens.append(shifted.reshape(-1))
    rank = _rank_mod_p(np.array(gens, dtype=np.int64) % p, p)
    return U * N0 - rank


def _rank_mod_p(M: np.ndarray, p: int) -> int:
    M = M.copy() % p
    rank = 0
    rows, cols = M.shape
    for c in range(cols):
        piv = None
        for r in range(rank, rows):
            if M[r, c] % p:
                piv = r
                break
        if piv is None:
            continue
        M[[rank, piv]] = M[[piv, rank]]
        M[rank] = (M[rank] * pow(int(M[rank, c]), p - 2, p)) % p
        for r in range(rows):
            if r != rank and M[r, c]:
                M[r] = (M[r] - M[r, c] * M[rank]) % p
        rank += 1
        if rank == rows:
            break
    return rank
