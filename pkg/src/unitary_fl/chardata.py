"""Input data validation and the numerical invariants of a datum.

A datum is a family of anti-hermitian generators gamma_i, each living
in an explicitly presented tame extension E'_i of F' = F_{q^2}((t)).
From it we derive, exactly:

  * the minimal polynomials P_i (= characteristic polynomials of the
    multiplication action, coefficients in O_{F'});
  * the pairwise resultant valuations r_ij, by Sylvester determinant
    and again by evaluating P_j at gamma_i (the two must agree);
  * the co-length delta_i of the monogenic order O_{F'}[gamma_i] in
    the maximal order, by the derivative valuation and cross-checked
    against the discriminant valuation;
  * conductor exponents a_i, the subset co-lengths delta_J, the
    duality exponents b_i, the canonical self-dualizing form c0 with
    its discriminant classes lambda0;
  * the isomorphism-stability threshold m_J and the working precision.

All inputs are exact Laurent polynomials, so every valuation used by a
validity check is decidable: a vanishing resultant really is zero.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import inf
from typing import Optional, Sequence

from . import linalg, polys
from .errors import (
    CharacteristicTooSmall,
    FactorsNotCoprime,
    InconsistentInvariants,
    NotAGenerator,
    NotAntiHermitian,
    NotInFixedField,
)
from .gf import canonical_epsilon, residue_field
from .series import LaurentSeries
from .tame import TameElement, TameExtension, newton_polygon

MAX_TOTAL_DEGREE = 8
DEFAULT_ENUM_CAP = 10


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass
class Factor:
    fid: str
    ext: TameExtension
    gamma: TameElement

    @property
    def e(self) -> int:
        return self.ext.e

    @property
    def f(self) -> int:
        return self.ext.f

    @property
    def n(self) -> int:
        return self.ext.n


def mult_matrix(elem: TameElement) -> list[list[LaurentSeries]]:
    """Matrix of multiplication by elem on the integral basis, over F'."""
    ext = elem.ext
    cols = []
    for j in range(ext.e):
        for l in range(ext.f):
            cols.append((elem * ext.basis_element(j, l)).coords())
    return linalg.mat_transpose(cols)


def element_char_poly(elem: TameElement) -> list[LaurentSeries]:
    """Monic characteristic polynomial, index = degree."""
    n = elem.ext.n
    cs = linalg.char_poly(mult_matrix(elem))
    base = elem.ext.base
    out = [LaurentSeries.zero(base) for _ in range(n + 1)]
    out[n] = LaurentSeries.one(base)
    for k, c in enumerate(cs, start=1):
        out[n - k] = c
    return out


class CharacteristicDatum:
    """Validated datum (gamma_i)_{i in I} plus derived invariant cache."""

    def __init__(self, q: int, factors: Sequence[Factor],
                 precision_override: Optional[int] = None,
                 enum_cap: int = DEFAULT_ENUM_CAP):
        self.q = q
        self.p = q
        self.base = residue_field(q, 2)
        self.eps = canonical_epsilon(q)
        self.factors = list(factors)
        self.enum_cap = enum_cap
        self.n_total = sum(fac.n for fac in self.factors)
        self._lock = threading.Lock()
        self._memo: dict = {}
        self._validate_basics()
        self.P = [self._factor_charpoly(i) for i in range(len(self.factors))]
        self.Pderiv = [polys.poly_derivative(P) for P in self.P]
        self._check_polys()
        self.r_matrix = self._resultant_matrix()
        self.delta = [self._delta_invariant(i) for i in range(len(self.factors))]
        full = tuple(range(len(self.factors)))
        self.m_full = self.stability_exponent(full)
        a_full = self.conductor_exponents(full)[0]
        b_full = self.duality_exponents(full)
        pad = max(
            -(-(a + abs(b)) // fac.e)
            for a, b, fac in zip(a_full, b_full, self.factors)
        ) if self.factors else 0
        self.working_precision = (
            precision_override
            if precision_override is not None
            else self.m_full + 2 * pad + 8
        )

    # -- construction-time checks ----------------------------------------------

    def _validate_basics(self):
        if not _is_prime(self.q) or self.q == 2:
            raise CharacteristicTooSmall(f"q = {self.q} must be an odd prime")
        if self.n_total > MAX_TOTAL_DEGREE:
            raise CharacteristicTooSmall(f"total degree {self.n_total} exceeds supported bound")
        if self.p <= self.n_total:
            raise CharacteristicTooSmall(
                f"residue characteristic {self.p} must exceed total degree {self.n_total}")
        seen = set()
        for fac in self.factors:
            if fac.fid in seen:
                raise InconsistentInvariants(f"duplicate factor id {fac.fid!r}")
            seen.add(fac.fid)
            if fac.gamma.val_lower() < 0:
                raise NotAGenerator(f"factor {fac.fid}: gamma is not integral")
            fac.gamma.assert_antihermitian(f"factor {fac.fid}")

    def _factor_charpoly(self, i: int) -> list[LaurentSeries]:
        fac = self.factors[i]
        n = fac.n
        # powers 1, gamma, ..., gamma^{n-1} must be F'-independent
        pw = fac.ext.one()
        cols = []
        for _ in range(n):
            cols.append(pw.coords())
            pw = pw * fac.gamma
        d = linalg.det_bareiss(linalg.mat_transpose(cols))
        if d.is_zero and d.is_exact:
            raise NotAGenerator(f"factor {fac.fid}: gamma does not generate its extension")
        P = element_char_poly(fac.gamma)
        ev = polys.poly_eval_tame(P, fac.gamma)
        if not ev.s.is_zero:
            raise InconsistentInvariants(f"factor {fac.fid}: P(gamma) != 0")
        return P

    def _check_polys(self):
        for i, fac in enumerate(self.factors):
            P = self.P[i]
            n = fac.n
            # tau-parity P^tau(T) = (-1)^n P(-T), coefficientwise
            for k in range(n + 1):
                lhs = P[k].tau(self.base.frobenius_matrix)
                rhs = P[k] if (n + k) % 2 == 0 else -P[k]
                if not (lhs - rhs).is_zero:
                    raise NotAntiHermitian(f"factor {fac.fid}: minimal polynomial lacks tau-parity")
            for c in P[:-1]:
                if not c.is_integral():
                    raise NotAGenerator(f"factor {fac.fid}: non-integral minimal polynomial")
            self._check_ramification(fac, P)

    def _check_ramification(self, fac: Factor, P: list[LaurentSeries]):
        gv = fac.gamma.val_lower()
        segs = newton_polygon(P)
        if gv == inf:
            if fac.n != 1:
                raise NotAGenerator(f"factor {fac.fid}: gamma = 0 only generates a line")
            return
        expected = [(Fraction(int(gv), fac.e), fac.n)]
        if segs != expected:
            raise InconsistentInvariants(
                f"factor {fac.fid}: Newton polygon {segs} does not match declared (e, f)")

    def _resultant_matrix(self) -> list[list[int]]:
        k = len(self.factors)
        R = [[0] * k for _ in range(k)]
        for i in range(k):
            for j in range(i + 1, k):
                res = polys.sylvester_resultant(self.P[i], self.P[j])
                if res.is_zero and res.is_exact:
                    raise FactorsNotCoprime(
                        f"factors {self.factors[i].fid} and {self.factors[j].fid} share a root")
                rij = int(res.val())
                alt = self._resultant_by_evaluation(i, j)
                alt2 = self._resultant_by_evaluation(j, i)
                if rij != alt or rij != alt2:
                    raise InconsistentInvariants(
                        f"r[{i}][{j}]: resultant valuation {rij} vs evaluation {alt}/{alt2}")
                R[i][j] = R[j][i] = rij
        return R

    def _resultant_by_evaluation(self, i: int, j: int) -> int:
        fac = self.factors[i]
        v = polys.poly_eval_tame(self.P[j], fac.gamma).val()
        r = Fraction(fac.n * int(v), fac.e)
        if r.denominator != 1:
            raise InconsistentInvariants(f"r[{i}][{j}] = {r} is not an integer")
        return int(r)

    def _delta_invariant(self, i: int) -> int:
        fac = self.factors[i]
        vd = polys.poly_eval_tame(self.Pderiv[i], fac.gamma).val() if fac.n > 1 else 0
        num = Fraction((int(vd) - fac.e + 1) * fac.n, 2 * fac.e)
        if num.denominator != 1 or num < 0:
            raise InconsistentInvariants(f"factor {fac.fid}: delta = {num} is not a nonneg integer")
        delta = int(num)
        disc_v = polys.poly_discriminant(self.P[i]).val()
        if disc_v != 2 * delta + fac.n - fac.n // fac.e or fac.n % fac.e:
            raise InconsistentInvariants(
                f"factor {fac.fid}: v(Disc) = {disc_v} != 2*{delta} + {fac.n} - {fac.n // fac.e}")
        return delta

    # -- public invariant operations -------------------------------------------

    def resultant_valuation(self, i: int, j: int) -> int:
        if i == j:
            raise InconsistentInvariants("r_ij needs i != j")
        return self.r_matrix[i][j]

    def delta_invariant(self, i: int) -> int:
        return self.delta[i]

    def subset(self, J) -> tuple:
        J = tuple(sorted(J))
        if not J:
            raise InconsistentInvariants("empty subset")
        return J

    def delta_J(self, J) -> int:
        J = self.subset(J)
        tot = sum(self.delta[i] for i in J)
        tot += sum(self.r_matrix[i][j] for i in J for j in J if i < j)
        return tot

    def conductor_exponents(self, J) -> tuple[list[int], int]:
        """(a_i)_{i in J} plus delta_J, with integrality asserted."""
        J = self.subset(J)
        a = []
        for i in J:
            fac = self.factors[i]
            num = Fraction((2 * self.delta[i] + sum(self.r_matrix[i][j] for j in J if j != i))
                           * fac.e, fac.n)
            if num.denominator != 1:
                raise InconsistentInvariants(f"a_{fac.fid} = {num} is not an integer")
            a.append(int(num))
        return a, self.delta_J(J)

    def disc_class(self, i: int, c: TameElement) -> int:
        """Discriminant class in Z/2 of the form Tr(c tau(x) y) on factor i."""
        fac = self.factors[i]
        if not c.is_tau_fixed():
            raise NotInFixedField(f"factor {fac.fid}: c is not tau-fixed")
        v = c.val()
        if v == inf:
            raise NotInFixedField("c must be nonzero")
        return (fac.f * int(v) + fac.n - fac.f) % 2

    def poly_product(self, J, exclude: Optional[int] = None) -> list[LaurentSeries]:
        J = self.subset(J)
        out = [LaurentSeries.one(self.base)]
        for i in J:
            if i == exclude:
                continue
            out = polys.poly_mul(out, self.P[i])
        return out

    def _memoized(self, key, fn):
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        val = fn()
        with self._lock:
            self._memo.setdefault(key, val)
            return self._memo[key]

    def base_form_denominators(self, J) -> list[TameElement]:
        """D_i = P_i'(gamma_i) P_{J-i}(gamma_i), exact, one per i in J."""
        J = self.subset(J)

        def compute():
            out = []
            for i in J:
                fac = self.factors[i]
                d = polys.poly_eval_tame(self.poly_product(J, exclude=i), fac.gamma)
                if fac.n > 1:
                    d = d * polys.poly_eval_tame(self.Pderiv[i], fac.gamma)
                out.append(d)
            return out

        return self._memoized(("denoms", J), compute)

    def duality_exponents(self, J, c: Optional[list[TameElement]] = None) -> list[int]:
        """b_i with c_i^{-1} D^{-1} = pi^{-b_i} O, i.e. b_i = v(c_i) + e_i - 1."""
        J = self.subset(J)
        if c is None:
            vals = [-int(d.val()) for d in self.base_form_denominators(J)]
        else:
            vals = [int(ci.val()) for ci in c]
        return [v + self.factors[i].e - 1 for v, i in zip(vals, J)]

    def base_form(self, J, check_selfdual: bool = True):
        """Canonical form c0 on E'_J with its class vector lambda0.

        lambda0 is computed both from the closed congruence (sum of
        r_ji over J - {i}) and through disc_class on the constructed
        c0; a mismatch raises.
        """
        J = self.subset(J)

        def compute():
            nJ = sum(self.factors[i].n for i in J)
            eps_pow = self.base.power(self.eps, nJ - 1)
            c0 = []
            lam0 = []
            for idx, i in enumerate(J):
                fac = self.factors[i]
                den = self.base_form_denominators(J)[idx]
                ci = fac.ext.monomial(fac.ext.iota(eps_pow)) * den.inv(
                    prec=fac.e * self.working_precision)
                if not (ci.tau() - ci).s.is_zero:
                    raise InconsistentInvariants(f"c0 component {fac.fid} is not tau-fixed")
                lam = self.disc_class(i, ci)
                closed = sum(self.r_matrix[j][i] for j in J if j != i) % 2
                if lam != closed:
                    raise InconsistentInvariants(
                        f"lambda0[{fac.fid}]: disc_class {lam} != closed congruence {closed}")
                c0.append(ci)
                lam0.append(lam)
            return tuple(c0), tuple(lam0)

        c0, lam0 = self._memoized(("base_form", J), compute)
        if check_selfdual:
            self._memoized(("base_form_selfdual", J), lambda: self._assert_selfdual(J, c0))
        return c0, lam0

    def _assert_selfdual(self, J, c0) -> bool:
        from .lattices import HermitianForm, order_lattice, is_selfdual

        form = HermitianForm(self, J, list(c0))
        if not is_selfdual(order_lattice(self, J), form):
            raise InconsistentInvariants("monogenic order is not self-dual for c0")
        return True

    def stability_exponent(self, J) -> int:
        """Smallest exponent past which coefficient perturbations cannot
        change the isomorphism class: n_J * v(Disc P_J) + 1."""
        J = self.subset(J)

        def compute():
            PJ = self.poly_product(J)
            v = int(polys.poly_discriminant(PJ).val()) if len(PJ) > 2 else 0
            cross = sum(
                int(polys.poly_discriminant(self.P[i]).val()) for i in J
            ) + 2 * sum(self.r_matrix[i][j] for i in J for j in J if i < j)
            if len(PJ) > 2 and v != cross:
                raise InconsistentInvariants(f"v(Disc P_J) = {v} != additive form {cross}")
            nJ = sum(self.factors[i].n for i in J)
            return nJ * cross + 1

        return self._memoized(("m_J", J), compute)

    def precision_budget(self, J) -> tuple[int, int]:
        """(m_J, working precision N)."""
        J = self.subset(J)
        mJ = self.stability_exponent(J)
        a, _ = self.conductor_exponents(J)
        b = self.duality_exponents(J)
        pad = max(-(-(ai + abs(bi)) // self.factors[i].e) for ai, bi, i in zip(a, b, J))
        return mJ, mJ + 2 * pad + 8

    def gamma_tuple(self, J) -> list[TameElement]:
        J = self.subset(J)
        return [self.factors[i].gamma for i in J]

    def compare_precision(self) -> int:
        """Exponent bound used when serializing canonical lattice forms."""
        return max(self.m_full, 4) + 4


def translate_datum(datum: CharacteristicDatum, v: LaurentSeries) -> CharacteristicDatum:
    """New datum with every gamma_i replaced by gamma_i + v.

    v must be anti-fixed (tau(v) = -v, e.g. an eps multiple of an F
    element) so the translated data stay anti-hermitian.
    """
    factors = []
    for fac in datum.factors:
        gam = fac.gamma + fac.ext.embed_base_series(v)
        factors.append(Factor(fac.fid, fac.ext, gam))
    return CharacteristicDatum(datum.q, factors,
                               precision_override=datum.working_precision,
                               enum_cap=datum.enum_cap)


def scale_datum(datum: CharacteristicDatum, u: LaurentSeries) -> CharacteristicDatum:
    """New datum with every gamma_i replaced by u gamma_i, u a tau-fixed unit."""
    factors = []
    for fac in datum.factors:
        gam = fac.gamma * fac.ext.embed_base_series(u)
        factors.append(Factor(fac.fid, fac.ext, gam))
    return CharacteristicDatum(datum.q, factors,
                               precision_override=datum.working_precision,
                               enum_cap=datum.enum_cap)


def refit_from_polys(datum: CharacteristicDatum, new_polys: list,
                     precision: Optional[int] = None) -> CharacteristicDatum:
    """Rebuild the datum from perturbed factor polynomials.

    Each new polynomial must be monic of the factor's degree and close
    enough to the original that its unique nearby root can be recovered
    by iterating x <- x - P(x)/P'(x) from the original gamma.
    """
    N = precision if precision is not None else datum.working_precision
    factors = []
    for fac, P in zip(datum.factors, new_polys):
        Pd = polys.poly_derivative(P)
        x = fac.gamma
        for _ in range(40):
            fx = polys.poly_eval_tame(P, x)
            if fx.s.is_zero:
                break
            step = fx * polys.poly_eval_tame(Pd, x).inv(prec=fac.e * N)
            x = (x - step).truncated(fac.e * N)
        else:
            raise InconsistentInvariants(
                f"factor {fac.fid}: root refinement did not converge")
        factors.append(Factor(fac.fid, fac.ext, x))
    return CharacteristicDatum(datum.q, factors, precision_override=N,
                               enum_cap=datum.enum_cap)
