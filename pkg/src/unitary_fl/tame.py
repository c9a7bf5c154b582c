"""Tame extensions E' of F' = F_{q^2}((t)) and their elements.

An extension is presented by (e, f) with e*f = n and gcd(e, p) = 1:
E' = F_{q^{2f}}((pi)) with pi^e = t.  Elements are Laurent series in pi
over the residue field F_{q^{2f}} (exponents below are always measured
in pi-units, the valuation normalized by v(pi) = 1).

The involution tau acts as Frobenius^f on residue coefficients and
fixes pi and t; its fixed field is E = F_{q^f}((pi)).  The base F' sits
inside E' through a deterministic embedding of F_{q^2} into F_{q^{2f}}
(the lex-least root of the canonical degree-2 modulus) and t = pi^e.

Every element has F'-coordinates relative to the integral basis
w^l pi^j (j = 0..e-1 major, l = 0..f-1 minor), which is an O_{F'}-basis
of the maximal order.
"""

from __future__ import annotations

from fractions import Fraction
from math import inf
from typing import Optional

import numpy as np

from .errors import IndeterminateValuation, NotAntiHermitian
from .gf import ResidueField, residue_field
from .series import LaurentSeries


def _mat_inv_mod_p(M: np.ndarray, p: int) -> np.ndarray:
    n = M.shape[0]
    A = np.concatenate([M % p, np.eye(n, dtype=np.int64)], axis=1)
    for c in range(n):
        piv = next(r for r in range(c, n) if A[r, c] % p)
        A[[c, piv]] = A[[piv, c]]
        A[c] = (A[c] * pow(int(A[c, c]), p - 2, p)) % p
        for r in range(n):
            if r != c and A[r, c]:
                A[r] = (A[r] - A[r, c] * A[c]) % p
    return A[:, n:]


class TameExtension:
    def __init__(self, p: int, e: int, f: int):
        if f % 2 == 0:
            raise ValueError("residue degree over F must be odd")
        self.p = p
        self.e = e
        self.f = f
        self.n = e * f
        self.K = residue_field(p, 2 * f)
        self.base = residue_field(p, 2)
        d = self.K.d
        if f == 1:
            self.emb_mat = np.eye(2, dtype=np.int64)
            self.decomp_mat = np.eye(2, dtype=np.int64)
            self._iota_root = self.base.generator
        else:
            roots = self.K.roots_of(self.base.modulus)
            r = roots[0]
            self._iota_root = r
            E = np.zeros((d, 2), dtype=np.int64)
            E[:, 0] = self.K.digits(1)
            E[:, 1] = self.K.digits(r)
            self.emb_mat = E
            # columns (l, m) -> digits of w^l * iota(g)^m, l major
            M = np.zeros((d, d), dtype=np.int64)
            w = self.K.generator
            for l in range(f):
                wl = self.K.power(w, l)
                for m in range(2):
                    M[:, 2 * l + m] = self.K.digits(self.K.mul(wl, self.K.power(r, m)))
            self.decomp_mat = _mat_inv_mod_p(M, p)
        # tau = Frobenius^f; compatible with x -> x^q on the base since f is odd
        self.tau_mat = self.K.frobenius_power_matrix(f)
        assert self.K.power(self._iota_root, p**f) == self.iota(self.base.power(self.base.generator, p))
        frob2 = self.K.frobenius_power_matrix(2)
        T = np.eye(d, dtype=np.int64)
        acc = np.eye(d, dtype=np.int64)
        for _ in range(f - 1):
            acc = (frob2 @ acc) % p
            T = (T + acc) % p
        self.trace_mat = T
        self.trace_to_base_mat = (self.decomp_mat[:2] @ T) % p
        self.base_tau_mat = self.base.frobenius_matrix

    def __repr__(self):
        return f"TameExtension(p={self.p}, e={self.e}, f={self.f})"

    def iota(self, base_code: int) -> int:
        digs = (self.emb_mat @ np.array(self.base.digits(base_code), dtype=np.int64)) % self.p
        return self.K.code(digs)

    # -- element constructors ---------------------------------------------------

    def zero(self, prec: Optional[int] = None) -> "TameElement":
        return TameElement(self, LaurentSeries.zero(self.K, prec))

    def one(self) -> "TameElement":
        return TameElement(self, LaurentSeries.one(self.K))

    def monomial(self, code: int, t_pow: int = 0, pi_pow: int = 0,
                 prec: Optional[int] = None) -> "TameElement":
        return TameElement(self, LaurentSeries.monomial(self.K, code, self.e * t_pow + pi_pow, prec))

    def embed_base_series(self, s: LaurentSeries) -> "TameElement":
        """Image of an F'-series: exponents scale by e, coefficients by iota."""
        C = (s.C @ self.emb_mat.T) % self.p if s.C.size else np.zeros((0, self.K.d), dtype=np.int64)
        L = C.shape[0]
        wide = np.zeros((max(self.e * (L - 1) + 1, 0), self.K.d), dtype=np.int64)
        if L:
            wide[:: self.e] = C
        prec = None if s.prec is None else self.e * s.prec
        return TameElement(self, LaurentSeries(self.K, self.e * s.off, wide, prec))

    def basis_element(self, j: int, l: int) -> "TameElement":
        return self.monomial(self.K.power(self.K.generator, l), 0, j)

    def from_coords(self, cols: list[LaurentSeries]) -> "TameElement":
        acc = self.zero()
        idx = 0
        for j in range(self.e):
            for l in range(self.f):
                acc = acc + self.embed_base_series(cols[idx]) * self.basis_element(j, l)
                idx += 1
        return acc


class TameElement:
    __slots__ = ("ext", "s")

    def __init__(self, ext: TameExtension, s: LaurentSeries):
        self.ext = ext
        self.s = s

    def val(self):
        return self.s.val()

    def val_lower(self):
        return self.s.val_lower()

    @property
    def prec(self):
        return self.s.prec

    def tau(self) -> "TameElement":
        return TameElement(self.ext, self.s.tau(self.ext.tau_mat))

    def __add__(self, o):
        return TameElement(self.ext, self.s + o.s)

    def __sub__(self, o):
        return TameElement(self.ext, self.s - o.s)

    def __neg__(self):
        return TameElement(self.ext, -self.s)

    def __mul__(self, o):
        return TameElement(self.ext, self.s * o.s)

    def inv(self, prec: Optional[int] = None) -> "TameElement":
        return TameElement(self.ext, self.s.inv(prec))

    def shift_pi(self, k: int) -> "TameElement":
        return TameElement(self.ext, self.s.shift(k))

    def truncated(self, pi_prec: int) -> "TameElement":
        return TameElement(self.ext, self.s.truncated(pi_prec))

    def is_zero_known(self) -> bool:
        return self.s.is_zero

    def is_antihermitian(self) -> bool:
        d = self.tau() + self
        if not d.s.is_zero:
            return False
        return True

    def assert_antihermitian(self, what: str = "element"):
        if not self.is_antihermitian():
            raise NotAntiHermitian(f"{what}: tau(x) != -x")

    def is_tau_fixed(self) -> bool:
        return (self.tau() - self).s.is_zero

    def trace_to_Fprime(self) -> LaurentSeries:
        """Tr_{E'/F'}: e times the coefficientwise residue trace of the pi^0 part."""
        ext = self.ext
        s = self.s
        rows = []
        for j in range(s.C.shape[0]):
            pi_exp = s.off + j
            if pi_exp % ext.e == 0 and s.C[j].any():
                rows.append((pi_exp // ext.e, s.C[j]))
        # t-coefficient k is known iff pi-coefficient e*k is, i.e. e*k < s.prec
        prec = None if s.prec is None else _ceil_div(s.prec, ext.e)
        if not rows:
            return LaurentSeries.zero(ext.base, prec)
        lo = min(r[0] for r in rows)
        hi = max(r[0] for r in rows)
        C = np.zeros((hi - lo + 1, ext.K.d), dtype=np.int64)
        for k, row in rows:
            C[k - lo] = row
        out = LaurentSeries(ext.K, lo, C, prec).map_digits(ext.trace_to_base_mat, ext.base)
        return out.scalar_mul(ext.e % ext.p)

    def coords(self) -> list[LaurentSeries]:
        """F'-coordinates along the integral basis w^l pi^j (j major)."""
        ext = self.ext
        s = self.s
        e, f = ext.e, ext.f
        out: list[LaurentSeries] = []
        D = ext.decomp_mat
        for j in range(e):
            # pi exponents congruent to j mod e
            sel = [(idx, s.off + idx) for idx in range(s.C.shape[0]) if (s.off + idx) % e == j % e]
            blocks = None
            lo = 0
            if sel:
                tv = [(pe - j) // e for _, pe in sel]
                lo, hi = min(tv), max(tv)
                blocks = np.zeros((hi - lo + 1, ext.K.d), dtype=np.int64)
                for (idx, pe), k in zip(sel, tv):
                    blocks[k - lo] = s.C[idx]
            if s.prec is None:
                prec = None
            else:
                prec = _ceil_div(s.prec - j, e)
            if blocks is None:
                for l in range(f):
                    out.append(LaurentSeries.zero(ext.base, prec))
                continue
            Y = (blocks @ D.T) % ext.p
            for l in range(f):
                out.append(LaurentSeries(ext.base, lo, Y[:, 2 * l : 2 * l + 2], prec))
        return out

    def __repr__(self):
        return f"Tame({self.s!r}, e={self.ext.e}, f={self.ext.f})"


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def newton_polygon(coeffs: list[LaurentSeries]) -> list[tuple]:
    """Newton polygon of a monic polynomial sum coeffs[k] T^k (coeffs[n] = 1).

    Returns (root valuation, length) pairs, valuations ascending and in
    lowest terms with respect to the t-normalization v(t) = 1; exact
    zero roots appear as a final (inf, multiplicity) pair.
    """
    n = len(coeffs) - 1
    zero_roots = 0
    while zero_roots <= n and coeffs[zero_roots].is_zero and coeffs[zero_roots].is_exact:
        zero_roots += 1
    pts = []
    unknown = []
    for k in range(zero_roots, n + 1):
        c = coeffs[k]
        if c.is_zero:
            if not c.is_exact:
                unknown.append((k, c.prec))
            continue
        pts.append((k, c.val()))
    # lower convex hull, left to right
    hull: list[tuple] = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x2) >= (pt[1] - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    for k, p_known in unknown:
        h = _hull_height(hull, k)
        if p_known < h:
            raise IndeterminateValuation(
                f"coefficient of T^{k} known only to O(t^{p_known}), polygon needs {h}")
    segs = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        segs.append((Fraction(y1 - y2, x2 - x1), x2 - x1))
    segs.sort(key=lambda s: s[0])
    if zero_roots:
        segs.append((inf, zero_roots))
    return segs


def _hull_height(hull, x):
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= x <= x2:
            return y1 + Fraction(y2 - y1, x2 - x1) * (x - x1)
    return inf
