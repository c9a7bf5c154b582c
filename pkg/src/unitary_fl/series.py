"""Truncated Laurent series over a finite residue field.

A series is a digit matrix: row j holds the F_p-coordinates of the
coefficient of t^(off+j).  Coefficients are known for all exponents
below `prec`; `prec is None` means the element is exact (typically a
Laurent polynomial built from input monomials).  Zero-at-precision is
distinct from exact zero: the former has empty storage and finite prec,
the latter empty storage and prec None.

Precision propagates through arithmetic:
  sum:      min of operand precisions
  product:  min(N1 + v2, N2 + v1)
  inverse:  N - 2 v
with v the valuation (lower bound `prec` when the operand is
zero-at-precision).
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import IndeterminateValuation, PrecisionExhausted
from .gf import ResidueField

INF = math.inf


def _min_prec(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class LaurentSeries:
    __slots__ = ("field", "off", "C", "prec")

    def __init__(self, field: ResidueField, off: int, C: np.ndarray, prec: Optional[int]):
        C = np.asarray(C, dtype=np.int64) % field.p
        if C.size:
            nz = np.flatnonzero(C.any(axis=1))
            if nz.size:
                off += int(nz[0])
                C = C[nz[0] : nz[-1] + 1]
            else:
                C = C[:0]
        if prec is not None and C.shape[0] and off + C.shape[0] > prec:
            C = C[: max(prec - off, 0)]
            nz = np.flatnonzero(C.any(axis=1))
            C = C[: nz[-1] + 1] if nz.size else C[:0]
        if not C.shape[0]:
            off = 0
        self.field = field
        self.off = off
        self.C = C
        self.prec = prec

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, field: ResidueField, prec: Optional[int] = None) -> "LaurentSeries":
        return cls(field, 0, np.zeros((0, field.d), dtype=np.int64), prec)

    @classmethod
    def monomial(cls, field: ResidueField, code: int, exp: int = 0,
                 prec: Optional[int] = None) -> "LaurentSeries":
        C = np.array([field.digits(code)], dtype=np.int64)
        return cls(field, exp, C, prec)

    @classmethod
    def one(cls, field: ResidueField) -> "LaurentSeries":
        return cls.monomial(field, 1, 0)

    @classmethod
    def from_pairs(cls, field: ResidueField, pairs, prec: Optional[int] = None) -> "LaurentSeries":
        """pairs: iterable of (exponent, code)."""
        pairs = list(pairs)
        if not pairs:
            return cls.zero(field, prec)
        lo = min(e for e, _ in pairs)
        hi = max(e for e, _ in pairs)
        C = np.zeros((hi - lo + 1, field.d), dtype=np.int64)
        for e, c in pairs:
            C[e - lo] = (C[e - lo] + np.array(field.digits(c))) % field.p
        return cls(field, lo, C, prec)

    # -- inspection -----------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.prec is None

    @property
    def is_zero(self) -> bool:
        return self.C.shape[0] == 0

    def val(self):
        """Valuation; math.inf for the exact zero.

        Raises IndeterminateValuation when every known coefficient
        vanishes but the element is only known to finite precision.
        """
        if self.C.shape[0]:
            return self.off
        if self.prec is None:
            return INF
        raise IndeterminateValuation(f"series vanishes to precision {self.prec}")

    def val_lower(self):
        """Certified lower bound for the valuation (never raises)."""
        if self.C.shape[0]:
            return self.off
        return INF if self.prec is None else self.prec

    def coeff(self, exp: int) -> int:
        if self.prec is not None and exp >= self.prec:
            raise PrecisionExhausted(f"coefficient of t^{exp} beyond precision {self.prec}")
        j = exp - self.off
        if 0 <= j < self.C.shape[0]:
            return self.field.code(self.C[j])
        return 0

    def is_integral(self) -> bool:
        if self.C.shape[0]:
            return self.off >= 0
        if self.prec is None or self.prec >= 0:
            return True
        raise PrecisionExhausted("cannot certify integrality at this precision")

    def key(self, limit: int) -> tuple:
        """Canonical hashable form of the coefficients below `limit`."""
        if self.prec is not None and self.prec < limit:
            raise PrecisionExhausted(f"need precision {limit}, have {self.prec}")
        out = []
        for j in range(self.C.shape[0]):
            e = self.off + j
            if e >= limit:
                break
            if self.C[j].any():
                out.append((e, self.field.code(self.C[j])))
        return tuple(out)

    def eq_at_min_prec(self, other: "LaurentSeries") -> bool:
        m = _min_prec(self.prec, other.prec)
        if m is None:
            top = max(self.off + self.C.shape[0], other.off + other.C.shape[0], 1)
            m = top
        return self.key(m) == other.key(m)

    # -- ring operations ------------------------------------------------------

    def _aligned(self, other: "LaurentSeries"):
        lo = min(self.off, other.off) if (self.C.size or other.C.size) else 0
        hi = max(self.off + self.C.shape[0], other.off + other.C.shape[0])
        L = max(hi - lo, 0)
        A = np.zeros((L, self.field.d), dtype=np.int64)
        B = np.zeros((L, self.field.d), dtype=np.int64)
        if self.C.shape[0]:
            A[self.off - lo : self.off - lo + self.C.shape[0]] = self.C
        if other.C.shape[0]:
            B[other.off - lo : other.off - lo + other.C.shape[0]] = other.C
        return lo, A, B

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        lo, A, B = self._aligned(other)
        return LaurentSeries(self.field, lo, (A + B) % self.field.p,
                             _min_prec(self.prec, other.prec))

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.field, self.off, (-self.C) % self.field.p, self.prec)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        f = self.field
        v1, v2 = self.val_lower(), other.val_lower()
        n1 = INF if self.prec is None else self.prec
        n2 = INF if other.prec is None else other.prec
        rp = min(n1 + v2, n2 + v1)
        rprec = None if rp == INF else (None if rp == -INF else int(rp))
        if self.is_zero or other.is_zero:
            if rp == INF:
                return LaurentSeries.zero(f)
            return LaurentSeries.zero(f, int(rp))
        C = _digit_mul(f, self.C, other.C)
        return LaurentSeries(f, self.off + other.off, C, rprec)

    def scalar_mul(self, code: int) -> "LaurentSeries":
        if code == 0:
            return LaurentSeries.zero(self.field, self.prec)
        if code == 1:
            return self
        row = np.array([self.field.digits(code)], dtype=np.int64)
        C = _digit_mul(self.field, self.C, row) if self.C.size else self.C
        return LaurentSeries(self.field, self.off, C, self.prec)

    def shift(self, k: int) -> "LaurentSeries":
        return LaurentSeries(self.field, self.off + k, self.C,
                             None if self.prec is None else self.prec + k)

    def truncated(self, new_prec: int) -> "LaurentSeries":
        p = new_prec if self.prec is None else min(self.prec, new_prec)
        return LaurentSeries(self.field, self.off, self.C, p)

    def map_digits(self, mat: np.ndarray, new_field: ResidueField) -> "LaurentSeries":
        """Apply an F_p-linear map (digit row -> digit row) to every coefficient."""
        C = (self.C @ mat.T) % new_field.p if self.C.size else np.zeros((0, new_field.d), dtype=np.int64)
        return LaurentSeries(new_field, self.off, C, self.prec)

    def inv(self, prec: Optional[int] = None) -> "LaurentSeries":
        """Multiplicative inverse.

        For an exact monomial the result is exact.  Otherwise a target
        precision is needed when the operand is exact; truncated
        operands default to the standard N - 2v rule.
        """
        f = self.field
        v = self.val()
        if v == INF:
            raise ZeroDivisionError("inverse of exact zero series")
        if self.C.shape[0] == 1 and self.prec is None:
            return LaurentSeries.monomial(f, f.inv(f.code(self.C[0])), -v)
        if self.prec is None:
            if prec is None:
                raise PrecisionExhausted("target precision required to invert an exact series")
            nterms = prec + v
        else:
            nterms = self.prec - v
            if prec is not None:
                nterms = min(nterms, prec + v)
        if nterms <= 0:
            raise PrecisionExhausted("no representable terms in inverse")
        U = self.C  # unit part digits, row 0 = t^v coefficient
        W = np.zeros((1, f.d), dtype=np.int64)
        W[0] = f.digits(f.inv(f.code(U[0])))
        known = 1
        while known < nterms:
            known = min(2 * known, nterms)
            BW = _digit_mul(f, U[:known], W)[:known]
            # W <- W (2 - U W)
            T = (-BW) % f.p
            T[0] = (T[0] + 2 * np.array(f.digits(1))) % f.p
            W = _digit_mul(f, W, T)[:known]
        return LaurentSeries(f, -v, W[:nterms], -v + nterms)

    def div(self, other: "LaurentSeries", prec: Optional[int] = None) -> "LaurentSeries":
        return self * other.inv(prec)

    def divexact(self, other: "LaurentSeries") -> "LaurentSeries":
        """Division known to be exact (used by fraction-free elimination)."""
        if self.is_zero and self.prec is None:
            return self
        if self.prec is None and other.prec is None:
            nterms = self.C.shape[0] - other.C.shape[0] + 1
            if nterms <= 0:
                raise ArithmeticError("divexact: quotient would not be polynomial")
            q = self * other.inv(prec=nterms - other.val())
            q = LaurentSeries(self.field, q.off, q.C[:nterms], None)
            check = q * other
            if not _exact_equal(check, self):
                raise ArithmeticError("divexact: division was not exact")
            return q
        return self.div(other)

    def tau(self, tau_matrix: np.ndarray) -> "LaurentSeries":
        return self.map_digits(tau_matrix, self.field)

    def __repr__(self):
        terms = []
        for j in range(min(self.C.shape[0], 8)):
            if self.C[j].any():
                terms.append(f"{self.field.code(self.C[j])}*t^{self.off + j}")
        body = " + ".join(terms) if terms else "0"
        tail = "" if self.prec is None else f" + O(t^{self.prec})"
        return f"<{body}{tail}>"


def _digit_mul(field: ResidueField, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Convolution in t and residue-generator reduction, digit-matrix valued."""
    d, p = field.d, field.p
    La, Lb = A.shape[0], B.shape[0]
    if La == 0 or Lb == 0:
        return np.zeros((0, d), dtype=np.int64)
    wide = np.zeros((La + Lb - 1, 2 * d - 1), dtype=np.int64)
    for u in range(d):
        a = A[:, u]
        if not a.any():
            continue
        for v in range(d):
            b = B[:, v]
            if not b.any():
                continue
            wide[:, u + v] += np.convolve(a, b)
    out = wide[:, :d] % p
    if d > 1 and wide.shape[1] > d:
        out = (out + wide[:, d:] @ field.reduction) % p
    return out


def _exact_equal(a: LaurentSeries, b: LaurentSeries) -> bool:
    if a.off != b.off or a.C.shape != b.C.shape:
        return a.is_zero and b.is_zero
    return bool((a.C == b.C).all())
