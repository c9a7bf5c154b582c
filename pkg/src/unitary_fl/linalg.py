"""Matrix algebra over truncated Laurent series.

Matrices are lists of rows of LaurentSeries over a common residue
field.  Everything here pivots by valuation; a pivot that vanishes to
its known precision raises IndeterminateValuation so the caller can
escalate, while an exactly singular pivot raises RankDeficient.
"""

from __future__ import annotations

from math import inf
from typing import Optional

from .errors import IndeterminateValuation, RankDeficient
from .series import LaurentSeries


def zeros(field, n: int, m: int):
    return [[LaurentSeries.zero(field) for _ in range(m)] for _ in range(n)]


def identity(field, n: int):
    M = zeros(field, n, n)
    for i in range(n):
        M[i][i] = LaurentSeries.one(field)
    return M


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    field = A[0][0].field
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = LaurentSeries.zero(field)
            for l in range(k):
                acc = acc + A[i][l] * B[l][j]
            row.append(acc)
        out.append(row)
    return out


def mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_transpose(A):
    return [list(col) for col in zip(*A)]


def mat_map(A, fn):
    return [[fn(x) for x in row] for row in A]


def mat_scalar(A, s: LaurentSeries):
    return [[x * s for x in row] for row in A]


def det_bareiss(A):
    """Fraction-free determinant; exact on exact input."""
    n = len(A)
    if n == 0:
        return None
    M = [row[:] for row in A]
    field = M[0][0].field
    sign = 1
    prev = LaurentSeries.one(field)
    for k in range(n - 1):
        piv = _select_pivot(M, k, k)
        if piv is None:
            return LaurentSeries.zero(field, _block_prec(M, k))
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[k][k] * M[i][j] - M[i][k] * M[k][j]).divexact(prev)
        prev = M[k][k]
    d = M[n - 1][n - 1]
    return d if sign == 1 else -d


def _select_pivot(M, k: int, col: int) -> Optional[int]:
    """Row >= k with the minimal certified valuation in `col`.

    Returns None when the whole column is exactly zero; raises when the
    minimum cannot be certified at the current precision.
    """
    best, best_v = None, inf
    indeterminate_floor = inf
    for i in range(k, len(M)):
        x = M[i][col]
        if x.is_zero:
            if not x.is_exact:
                indeterminate_floor = min(indeterminate_floor, x.prec)
            continue
        v = x.val()
        if v < best_v:
            best, best_v = i, v
    if best is None:
        if indeterminate_floor < inf:
            raise IndeterminateValuation(
                f"column {col} vanishes to precision {indeterminate_floor}")
        return None
    if indeterminate_floor <= best_v:
        raise IndeterminateValuation(
            f"pivot valuation {best_v} not separable from O(t^{indeterminate_floor})")
    return best


def _block_prec(M, k: int) -> Optional[int]:
    precs = [M[i][j].prec for i in range(k, len(M)) for j in range(k, len(M))]
    finite = [p for p in precs if p is not None]
    return min(finite) if finite else None


def mat_inv(A, work_prec: Optional[int] = None):
    """Inverse by Gauss-Jordan with valuation pivoting."""
    n = len(A)
    field = A[0][0].field
    M = [row[:] + irow for row, irow in zip(A, identity(field, n))]
    for c in range(n):
        piv = _select_pivot_cols(M, c, c, n)
        if piv is None:
            raise RankDeficient(f"matrix singular at column {c}")
        M[c], M[piv] = M[piv], M[c]
        inv_piv = M[c][c].inv(work_prec)
        M[c] = [x * inv_piv for x in M[c]]
        for r in range(n):
            if r != c:
                q = M[r][c]
                if q.is_zero:
                    continue
                M[r] = [x - q * y for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


def _select_pivot_cols(M, k, col, n):
    return _select_pivot([[M[i][col]] for i in range(len(M))], k, 0)


def solve_columns(A, B, work_prec: Optional[int] = None):
    """X with A X = B."""
    return mat_mul(mat_inv(A, work_prec), B)


def char_poly(A, work_prec: Optional[int] = None) -> list[LaurentSeries]:
    """[c1..cn] with char(A) = T^n + c1 T^(n-1) + ... + cn (Faddeev-LeVerrier).

    Divides only by the integers 1..n, invertible since p > n.
    """
    n = len(A)
    field = A[0][0].field
    p = field.p
    M = [row[:] for row in A]
    cs = []
    for k in range(1, n + 1):
        tr = LaurentSeries.zero(field)
        for i in range(n):
            tr = tr + M[i][i]
        ck = tr.scalar_mul(field.neg(field.mul(1 % p, pow(k, p - 2, p))))
        cs.append(ck)
        if k == n:
            break
        for i in range(n):
            M[i][i] = M[i][i] + ck
        M = mat_mul(A, M)
    return cs


def hnf_columns(A, work_prec: Optional[int] = None, assume_full_rank: bool = True):
    """Canonical column Hermite form over O_{F'} = F_{q^2}[[t]].

    Columns span the lattice.  The result is lower triangular with
    pivots normalized to t-powers and entries left of each pivot
    reduced modulo it; two lattices are equal iff their forms agree
    entrywise at the comparison precision.
    """
    n = len(A)
    field = A[0][0].field
    cols = [list(col) for col in zip(*A)]  # work column-major
    ncols = len(cols)
    perm_target = 0
    pivots = []
    for r in range(n):
        best, best_v = None, inf
        floor = inf
        for ci in range(perm_target, ncols):
            x = cols[ci][r]
            if x.is_zero:
                if not x.is_exact:
                    floor = min(floor, x.prec)
                continue
            v = x.val()
            if v < best_v:
                best, best_v = ci, v
        if best is None:
            if floor < inf:
                raise IndeterminateValuation(f"row {r}: entries vanish to O(t^{floor})")
            if assume_full_rank:
                raise RankDeficient(f"no pivot available in row {r}")
            continue
        if floor <= best_v:
            raise IndeterminateValuation(
                f"row {r}: pivot t^{best_v} not separable from O(t^{floor})")
        cols[perm_target], cols[best] = cols[best], cols[perm_target]
        c = perm_target
        unit = cols[c][r].shift(-best_v)
        u_inv = unit.inv(work_prec)
        cols[c] = [x * u_inv for x in cols[c]]
        for ci in range(ncols):
            if ci == c:
                continue
            x = cols[ci][r]
            if x.is_zero:
                continue
            if ci > c:
                q = x.shift(-best_v)  # full elimination (quotient integral)
            else:
                q = _floor_div_tpow(x, best_v)
                if q.is_zero:
                    continue
            cols[ci] = [y - q * z for y, z in zip(cols[ci], cols[c])]
        pivots.append((r, best_v))
        perm_target += 1
    out_cols = cols[:perm_target]
    return mat_transpose(out_cols) if out_cols else [[] for _ in range(n)], pivots


def _floor_div_tpow(x: LaurentSeries, v: int) -> LaurentSeries:
    """Part of x with exponents >= v, shifted down by v."""
    if x.is_zero:
        return x.shift(-v)
    lo = x.off
    drop = max(v - lo, 0)
    C = x.C[drop:]
    off = max(lo, v)
    prec = None if x.prec is None else x.prec
    return LaurentSeries(x.field, off - v, C, None if prec is None else prec - v)


def integrality_lattice(B, work_prec: Optional[int] = None):
    """Basis matrix of {xi : B xi integral}, Smith-style reduction.

    B must have full column rank; row operations stay unimodular over
    the valuation ring, column operations are tracked to pull the
    diagonal constraints back to the original coordinates.
    """
    m, n = len(B), len(B[0])
    field = B[0][0].field
    X = [row[:] for row in B]
    V = identity(field, n)
    placed = []
    used_rows: set[int] = set()
    used_cols: set[int] = set()
    for _ in range(n):
        best, best_v = None, inf
        floor = inf
        for i in range(m):
            if i in used_rows:
                continue
            for j in range(n):
                if j in used_cols:
                    continue
                x = X[i][j]
                if x.is_zero:
                    if not x.is_exact:
                        floor = min(floor, x.prec)
                    continue
                v = x.val()
                if v < best_v:
                    best, best_v = (i, j), v
        if best is None:
            if floor < inf:
                raise IndeterminateValuation("active block vanishes at precision")
            raise RankDeficient("constraint matrix not of full column rank")
        if floor <= best_v:
            raise IndeterminateValuation("pivot not separable at working precision")
        bi, bj = best
        piv = X[bi][bj]
        piv_inv = piv.inv(work_prec)
        # clear the pivot row with column ops (tracked in V)
        for j in range(n):
            if j == bj or j in used_cols:
                continue
            q = X[bi][j] * piv_inv
            if q.is_zero:
                continue
            for i in range(m):
                X[i][j] = X[i][j] - q * X[i][bj]
            for i in range(n):
                V[i][j] = V[i][j] - q * V[i][bj]
        # clear the pivot column with row ops (quotients integral by minimality)
        for i in range(m):
            if i == bi:
                continue
            q = X[i][bj] * piv_inv
            if q.is_zero:
                continue
            for j in range(n):
                X[i][j] = X[i][j] - q * X[bi][j]
        placed.append((bj, best_v))
        used_rows.add(bi)
        used_cols.add(bj)
    gens = zeros(field, n, n)
    for k, (j, v) in enumerate(placed):
        for i in range(n):
            gens[i][k] = V[i][j].shift(-v)
    return gens
