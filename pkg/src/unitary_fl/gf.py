"""Finite residue fields F_{p^d} with a deterministic presentation.

A field is presented as F_p[w]/(modulus) where the modulus is the
lexicographically least monic irreducible of degree d over F_p,
coefficients compared low-degree-first.  Elements are integer codes in
[0, p^d); the base-p digits of a code, little-endian, are the
coordinates in the power basis 1, w, ..., w^{d-1}.

Series coefficients are handled elsewhere as numpy digit matrices; this
module supplies the scalar arithmetic plus the p-linear maps (Frobenius
powers, traces, subfield decompositions) those matrices need.
"""

from __future__ import annotations

import functools
from typing import Iterator

import numpy as np


def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    a = list(a)
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm and a:
        c = (a[-1] * inv_lead) % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        _poly_trim(a)
    return a


def _monic_polys(p: int, deg: int) -> Iterator[list[int]]:
    # low-degree-first lexicographic order over the free coefficients
    from itertools import product

    for tail in product(range(p), repeat=deg):
        yield list(tail) + [1]


def _irreducibles_upto(p: int, maxdeg: int) -> list[list[int]]:
    irr: list[list[int]] = []
    for d in range(1, maxdeg + 1):
        for f in _monic_polys(p, d):
            if all(len(g) - 1 > d // 2 or _poly_mod(f, g, p) for g in irr):
                irr.append(f)
    return irr


def lexleast_irreducible(p: int, d: int) -> list[int]:
    """Lex-least monic irreducible of degree d over F_p (low degree first)."""
    if d == 1:
        return [0, 1]
    small = _irreducibles_upto(p, d // 2)
    for f in _monic_polys(p, d):
        if all(_poly_mod(f, g, p) for g in small):
            return f
    raise AssertionError("no irreducible found")


class ResidueField:
    """F_{p^d} with integer-code elements and cached linear maps."""

    _TABLE_LIMIT = 4096

    def __init__(self, p: int, d: int):
        self.p = p
        self.d = d
        self.order = p**d
        self.modulus = lexleast_irreducible(p, d)
        # rows k = digits of w^{d+k}, k = 0..d-2, used to fold products back
        red = []
        cur = [(-c) % p for c in self.modulus[:-1]]  # w^d
        red.append(list(cur))
        for _ in range(d - 2):
            cur = self._shift_reduce(cur)
            red.append(list(cur))
        self.reduction = np.array(red, dtype=np.int64).reshape(max(d - 1, 0), d)
        self._mul_table = None
        if self.order <= self._TABLE_LIMIT:
            self._build_tables()

    # -- code <-> digit vector ------------------------------------------------

    def digits(self, code: int) -> list[int]:
        p = self.p
        return [(code // p**k) % p for k in range(self.d)]

    def code(self, digits) -> int:
        c = 0
        for k in reversed(range(self.d)):
            c = c * self.p + (int(digits[k]) % self.p)
        return c

    def _shift_reduce(self, digs: list[int]) -> list[int]:
        # multiply digit vector by w, reduce mod modulus
        p, d = self.p, self.d
        out = [0] + digs[: d - 1]
        top = digs[d - 1]
        if top:
            for k in range(d):
                out[k] = (out[k] + top * (-self.modulus[k])) % p
        return [x % p for x in out]

    # -- scalar arithmetic ----------------------------------------------------

    def _build_tables(self):
        n = self.order
        digs = np.array([self.digits(c) for c in range(n)], dtype=np.int64)
        add = np.zeros((n, n), dtype=np.int64)
        mul = np.zeros((n, n), dtype=np.int64)
        codes_of = {}
        for c in range(n):
            codes_of[tuple(self.digits(c))] = c
        for a in range(n):
            for b in range(a, n):
                s = tuple((digs[a] + digs[b]) % self.p)
                add[a, b] = add[b, a] = codes_of[s]
                prod = _poly_mod(
                    _poly_mul(_poly_trim(list(digs[a])), _poly_trim(list(digs[b])), self.p),
                    self.modulus,
                    self.p,
                )
                prod = prod + [0] * (self.d - len(prod))
                mul[a, b] = mul[b, a] = codes_of[tuple(prod)]
        self._add_table = add
        self._mul_table = mul
        self._neg_table = np.array(
            [codes_of[tuple((-digs[a]) % self.p)] for a in range(n)], dtype=np.int64
        )
        inv = np.zeros(n, dtype=np.int64)
        for a in range(1, n):
            inv[a] = self.power(a, n - 2)
        self._inv_table = inv

    def add(self, a: int, b: int) -> int:
        if self._mul_table is not None:
            return int(self._add_table[a, b])
        da, db = self.digits(a), self.digits(b)
        return self.code([(x + y) % self.p for x, y in zip(da, db)])

    def neg(self, a: int) -> int:
        if self._mul_table is not None:
            return int(self._neg_table[a])
        return self.code([(-x) % self.p for x in self.digits(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self._mul_table is not None:
            return int(self._mul_table[a, b])
        prod = _poly_mul(_poly_trim(self.digits(a)), _poly_trim(self.digits(b)), self.p)
        prod = _poly_mod(prod, self.modulus, self.p)
        prod = prod + [0] * (self.d - len(prod))
        return self.code(prod)

    def power(self, a: int, e: int) -> int:
        r, base = 1, a
        e = int(e)
        while e:
            if e & 1:
                r = self.mul(r, base)
            base = self.mul(base, base)
            e >>= 1
        return r

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in residue field")
        if self._mul_table is not None:
            return int(self._inv_table[a])
        return self.power(a, self.order - 2)

    @property
    def generator(self) -> int:
        """Code of the power-basis generator w (the class of the variable)."""
        return self.p if self.d > 1 else 1

    # -- p-linear maps as digit matrices --------------------------------------

    def linear_map_matrix(self, fn) -> np.ndarray:
        """d x d matrix over F_p of the p-linear map fn on codes (column = image of w^k)."""
        cols = []
        for k in range(self.d):
            cols.append(self.digits(fn(self.code([1 if j == k else 0 for j in range(self.d)]))))
        return np.array(cols, dtype=np.int64).T % self.p

    @functools.cached_property
    def frobenius_matrix(self) -> np.ndarray:
        return self.linear_map_matrix(lambda c: self.power(c, self.p))

    def frobenius_power_matrix(self, k: int) -> np.ndarray:
        m = np.eye(self.d, dtype=np.int64)
        f = self.frobenius_matrix
        for _ in range(k):
            m = (f @ m) % self.p
        return m

    def apply_matrix(self, mat: np.ndarray, code: int) -> int:
        return self.code((mat @ np.array(self.digits(code), dtype=np.int64)) % self.p)

    # -- roots, used for subfield embeddings ----------------------------------

    def poly_eval(self, coeffs: list[int], x: int) -> int:
        """Evaluate a polynomial with F_p coefficients (ints) at code x."""
        acc = 0
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, x), c % self.p)
        return acc

    def roots_of(self, coeffs: list[int]) -> list[int]:
        """Roots in lex order of digit tuples (low degree first)."""
        from itertools import product

        found = []
        for tup in product(range(self.p), repeat=self.d):
            x = self.code(list(tup))
            if self.poly_eval(coeffs, x) == 0:
                found.append(x)
        return found


@functools.lru_cache(maxsize=None)
def residue_field(p: int, d: int) -> ResidueField:
    return ResidueField(p, d)


def canonical_epsilon(p: int) -> int:
    """First element of F_{p^2}, in lex order of digit vectors, with x^p = -x, x != 0."""
    k = residue_field(p, 2)
    from itertools import product

    for tup in product(range(p), repeat=2):
        x = k.code(list(tup))
        if x and k.power(x, p) == k.neg(x):
            return x
    raise AssertionError("no anti-fixed element found")
