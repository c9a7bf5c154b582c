"""Dense univariate polynomials over F' with Laurent-series coefficients.

A polynomial is a list of LaurentSeries, index = degree.  These stay
exact when built from exact data, which keeps resultants and
discriminants decidable (a vanishing resultant is exactly zero, never
zero-at-precision).
"""

from __future__ import annotations

from .series import LaurentSeries
from . import linalg
from .tame import TameElement, TameExtension


def poly_trim(P: list[LaurentSeries]) -> list[LaurentSeries]:
    while len(P) > 1 and P[-1].is_zero and P[-1].is_exact:
        P = P[:-1]
    return P


def poly_mul(P: list[LaurentSeries], Q: list[LaurentSeries]) -> list[LaurentSeries]:
    field = P[0].field
    out = [LaurentSeries.zero(field) for _ in range(len(P) + len(Q) - 1)]
    for i, a in enumerate(P):
        if a.is_zero and a.is_exact:
            continue
        for j, b in enumerate(Q):
            out[i + j] = out[i + j] + a * b
    return out


def poly_derivative(P: list[LaurentSeries]) -> list[LaurentSeries]:
    field = P[0].field
    if len(P) == 1:
        return [LaurentSeries.zero(field)]
    return [P[k].scalar_mul(k % field.p) for k in range(1, len(P))]


def poly_neg_var(P: list[LaurentSeries]) -> list[LaurentSeries]:
    """P(-T)."""
    return [c if k % 2 == 0 else -c for k, c in enumerate(P)]


def poly_tau(P: list[LaurentSeries], tau_mat) -> list[LaurentSeries]:
    return [c.tau(tau_mat) for c in P]


def poly_eval_tame(P: list[LaurentSeries], x: TameElement) -> TameElement:
    ext = x.ext
    acc = ext.zero()
    for c in reversed(P):
        acc = acc * x + ext.embed_base_series(c)
    return acc


def poly_eval_series(P: list[LaurentSeries], x: LaurentSeries) -> LaurentSeries:
    acc = LaurentSeries.zero(P[0].field)
    for c in reversed(P):
        acc = acc * x + c
    return acc


def sylvester_resultant(P: list[LaurentSeries], Q: list[LaurentSeries]) -> LaurentSeries:
    """Res(P, Q) as a Sylvester determinant (fraction-free)."""
    P, Q = poly_trim(P), poly_trim(Q)
    m, n = len(P) - 1, len(Q) - 1
    field = P[0].field
    if m == 0:
        return _pow_series(P[0], n)
    if n == 0:
        return _pow_series(Q[0], m)
    size = m + n
    M = [[LaurentSeries.zero(field) for _ in range(size)] for _ in range(size)]
    for r in range(n):
        for k in range(m + 1):
            M[r][r + k] = P[m - k]
    for r in range(m):
        for k in range(n + 1):
            M[n + r][r + k] = Q[n - k]
    return linalg.det_bareiss(M)


def _pow_series(x: LaurentSeries, k: int) -> LaurentSeries:
    acc = LaurentSeries.one(x.field)
    for _ in range(k):
        acc = acc * x
    return acc


def poly_discriminant(P: list[LaurentSeries]) -> LaurentSeries:
    """Discriminant of a monic polynomial; 1 for degree <= 1."""
    P = poly_trim(P)
    n = len(P) - 1
    if n <= 1:
        return LaurentSeries.one(P[0].field)
    res = sylvester_resultant(P, poly_derivative(P))
    if (n * (n - 1) // 2) % 2:
        res = -res
    return res
