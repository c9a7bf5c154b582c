"""Self-dual gamma-stable lattice machinery on E'_J.

Lattices are full O_{F'}-lattices in the n_J-dimensional F'-space E'_J,
held as canonical column-Hermite generator matrices over the
concatenated integral bases of the factors.  The enumeration of
self-dual gamma-stable lattices runs window by window: for each
admissible multiplier vector m (the exponents with O_{E'} M =
pi^{-m} O_{E'}), every candidate is pinched between

    conductor * pi^{-m} O_{E'}   and   pi^{-m} O_{E'},

so candidates correspond to subspaces of a finite F_{q^2}-quotient
that are stable under the induced action of t and gamma.  Candidates
are lifted and kept when the multiplier is exact (which prevents
double counting across windows) and the lifted lattice is self-dual
(Gram matrix integral with unit determinant).

A deliberately unpruned twin enumerator walks all subspaces of the
quotient instead of only the invariant ones and filters afterwards;
it is the independent oracle for the pruned path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import inf
from typing import Optional

import numpy as np

from . import linalg
from .chardata import CharacteristicDatum, mult_matrix
from .errors import (
    InconsistentInvariants,
    NotStable,
    PrecisionExhausted,
    SearchTooLarge,
)
from .series import LaurentSeries
from .tame import TameElement


# ---------------------------------------------------------------------------
# hermitian forms


class HermitianForm:
    """Phi(x, y) = sum_i Tr(c_i tau(x_i) y_i), semilinear in the first slot."""

    def __init__(self, datum: CharacteristicDatum, J, c: list[TameElement]):
        self.datum = datum
        self.J = datum.subset(J)
        self.c = list(c)
        self.lam = tuple(datum.disc_class(i, ci) for i, ci in zip(self.J, self.c))
        self.b = datum.duality_exponents(self.J, self.c)
        self._gram0 = None

    @property
    def gram0(self):
        """Phi on the ambient integral basis (block diagonal over factors)."""
        if self._gram0 is None:
            datum = self.datum
            n = sum(datum.factors[i].n for i in self.J)
            G = linalg.zeros(datum.base, n, n)
            off = 0
            for i, ci in zip(self.J, self.c):
                ext = datum.factors[i].ext
                basis = [ext.basis_element(j, l) for j in range(ext.e) for l in range(ext.f)]
                for a, ba in enumerate(basis):
                    ca = ci * ba.tau()
                    for b, bb in enumerate(basis):
                        G[off + a][off + b] = (ca * bb).trace_to_Fprime()
                off += ext.n
            self._gram0 = G
        return self._gram0

    def value(self, x: list[TameElement], y: list[TameElement]) -> LaurentSeries:
        acc = LaurentSeries.zero(self.datum.base)
        for ci, xi, yi in zip(self.c, x, y):
            acc = acc + (ci * xi.tau() * yi).trace_to_Fprime()
        return acc

    def twisted(self, pi_shifts: list[int]) -> "HermitianForm":
        c = [ci.shift_pi(s) for ci, s in zip(self.c, pi_shifts)]
        return HermitianForm(self.datum, self.J, c)


def base_hermitian_form(datum: CharacteristicDatum, J) -> HermitianForm:
    c0, _ = datum.base_form(J, check_selfdual=False)
    return HermitianForm(datum, J, list(c0))


def class_form(datum: CharacteristicDatum, J, lam) -> HermitianForm:
    """Canonical representative form of discriminant class vector lam."""
    J = datum.subset(J)
    c0, lam0 = datum.base_form(J, check_selfdual=False)
    shifts = [(li - l0) % 2 for li, l0 in zip(lam, lam0)]
    return HermitianForm(datum, J, [ci.shift_pi(s) for ci, s in zip(c0, shifts)])


# ---------------------------------------------------------------------------
# lattices


@dataclass
class Lattice:
    datum: CharacteristicDatum
    J: tuple
    mat: list  # canonical column Hermite form, rows over F'
    pivots: list

    def key(self) -> tuple:
        limit = self.datum.compare_precision()
        return tuple(tuple(x.key(limit) for x in row) for row in self.mat)

    def __eq__(self, other):
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    @property
    def n(self) -> int:
        return len(self.mat)

    def scaled_by_t(self, k: int) -> "Lattice":
        return canonicalize(self.datum, self.J, [[x.shift(k) for x in row] for row in self.mat])


def canonicalize(datum: CharacteristicDatum, J, gens) -> Lattice:
    H, piv = linalg.hnf_columns(gens, work_prec=datum.working_precision)
    return Lattice(datum, datum.subset(J), H, piv)


def _block_mult_matrix(datum: CharacteristicDatum, J, elems: list[TameElement]):
    J = datum.subset(J)
    n = sum(datum.factors[i].n for i in J)
    M = linalg.zeros(datum.base, n, n)
    off = 0
    for i, el in zip(J, elems):
        B = mult_matrix(el)
        ni = datum.factors[i].n
        for r in range(ni):
            for c in range(ni):
                M[off + r][off + c] = B[r][c]
        off += ni
    return M


def maximal_order_lattice(datum: CharacteristicDatum, J) -> Lattice:
    J = datum.subset(J)
    n = sum(datum.factors[i].n for i in J)
    return Lattice(datum, J, linalg.identity(datum.base, n), [(r, 0) for r in range(n)])


def order_lattice(datum: CharacteristicDatum, J) -> Lattice:
    """A_J = O_{F'}[gamma_J] as a lattice (columns = gamma powers)."""
    J = datum.subset(J)
    pw = [datum.factors[i].ext.one() for i in J]
    cols = []
    n = sum(datum.factors[i].n for i in J)
    for _ in range(n):
        cols.append([x for i, el in zip(J, pw) for x in el.coords()])
        pw = [el * datum.factors[i].gamma for i, el in zip(J, pw)]
    return canonicalize(datum, J, linalg.mat_transpose(cols))


def conductor_lattice(datum: CharacteristicDatum, J) -> Lattice:
    J = datum.subset(J)
    a, _ = datum.conductor_exponents(J)
    return pi_shift_lattice(datum, J, a)


def pi_shift_lattice(datum: CharacteristicDatum, J, exps) -> Lattice:
    """pi^{exps} O_{E'_J} as a lattice."""
    J = datum.subset(J)
    cols = []
    for i, k in zip(J, exps):
        ext = datum.factors[i].ext
        for j in range(ext.e):
            for l in range(ext.f):
                el = ext.basis_element(j, l).shift_pi(k)
                cols.append((i, el))
    full = []
    for idx, (i, el) in enumerate(cols):
        coord = []
        for i2 in J:
            if i2 == i:
                coord.extend(el.coords())
            else:
                coord.extend([LaurentSeries.zero(datum.base)] * datum.factors[i2].n)
        full.append(coord)
    return canonicalize(datum, J, linalg.mat_transpose(full))


def gram(M: Lattice, form: HermitianForm):
    H = M.mat
    Ht = linalg.mat_transpose([[x.tau(M.datum.base.frobenius_matrix) for x in row] for row in H])
    return linalg.mat_mul(Ht, linalg.mat_mul(form.gram0, H))


def is_selfdual(M: Lattice, form: HermitianForm) -> bool:
    G = gram(M, form)
    for row in G:
        for x in row:
            if not x.is_integral():
                return False
    d = linalg.det_bareiss(G)
    if d.is_zero:
        if d.is_exact:
            return False
        raise PrecisionExhausted("Gram determinant vanishes at working precision")
    return d.val() == 0


def dual(M: Lattice, form: HermitianForm) -> Lattice:
    """Orthogonal lattice M-perp via the Gram matrix."""
    G = gram(M, form)
    Ginv = linalg.mat_inv(G, work_prec=M.datum.working_precision)
    return canonicalize(M.datum, M.J, linalg.mat_mul(M.mat, Ginv))


def is_stable(M: Lattice, datum: CharacteristicDatum, J=None) -> bool:
    J = datum.subset(J if J is not None else M.J)
    T = _block_mult_matrix(datum, J, datum.gamma_tuple(J))
    Minv = linalg.mat_inv(M.mat, work_prec=datum.working_precision)
    X = linalg.mat_mul(Minv, linalg.mat_mul(T, M.mat))
    return all(x.is_integral() for row in X for x in row)


def scale_lattice(M: Lattice, elems: list[TameElement]) -> Lattice:
    T = _block_mult_matrix(M.datum, M.J, elems)
    return canonicalize(M.datum, M.J, linalg.mat_mul(T, M.mat))


def ideal_inverse(M: Lattice, datum: CharacteristicDatum) -> Lattice:
    """M^{-1} = {x : x M inside A_J}, by a Smith-style integrality lattice."""
    if not is_stable(M, datum):
        raise NotStable("ideal_inverse needs a gamma-stable lattice")
    J = M.J
    A = order_lattice(datum, J)
    Ainv = linalg.mat_inv(A.mat, work_prec=datum.working_precision)
    n = M.n
    rows = []
    cols = linalg.mat_transpose(M.mat)
    for col in cols:
        elems = _coords_to_elements(datum, J, col)
        T = _block_mult_matrix(datum, J, elems)
        rows.extend(linalg.mat_mul(Ainv, T))
    G = linalg.integrality_lattice(rows, work_prec=datum.working_precision)
    return canonicalize(datum, J, G)


def _coords_to_elements(datum: CharacteristicDatum, J, coord) -> list[TameElement]:
    out = []
    off = 0
    for i in J:
        ext = datum.factors[i].ext
        out.append(ext.from_coords(coord[off : off + ext.n]))
        off += ext.n
    return out


# ---------------------------------------------------------------------------
# window quotient space


class _QuadOps:
    """Vectorized F_{q^2} arithmetic on digit pairs."""

    _cache: dict = {}

    def __new__(cls, base):
        if base.order in cls._cache:
            return cls._cache[base.order]
        self = super().__new__(cls)
        self.base = base
        self.p = base.p
        Q = base.order
        mats = np.zeros((Q, 2, 2), dtype=np.int64)
        for c in range(Q):
            mats[c] = base.linear_map_matrix(lambda x, c=c: base.mul(c, x))
        self.mul_mats = mats
        self.inv_codes = np.array([0] + [base.inv(c) for c in range(1, Q)], dtype=np.int64)
        cls._cache[base.order] = self
        return self

    def code(self, pair) -> int:
        return self.base.code(list(pair))

    def pair(self, code: int):
        return np.array(self.base.digits(code), dtype=np.int64)


class WindowSpace:
    """Quotient pi^{-m} O / conductor pi^{-m} O as an F_{q^2}-space.

    Vectors are digit arrays of shape (D, 2); the operators below act
    as integer matrices mod p on the flattened digits.
    """

    def __init__(self, datum: CharacteristicDatum, J, m: list[int], widen: int = 0):
        self.datum = datum
        self.J = datum.subset(J)
        self.m = list(m)
        self.widen = widen
        a, _ = datum.conductor_exponents(self.J)
        # widening pads the bottom only: the top is pinned by the exact
        # multiplier, the conductor containment is what gets stress-tested
        self.depth = [ai + widen for ai in a]
        self.top = [-mi for mi in self.m]  # lowest pi exponent per factor
        self.index = []  # (factor position, j, l)
        for pos, i in enumerate(self.J):
            ext = datum.factors[i].ext
            for j in range(self.depth[pos]):
                for l in range(ext.f):
                    self.index.append((pos, j, l))
        self.D = len(self.index)
        self.ops = _QuadOps(datum.base)
        self.t_op = self._operator_matrix(t_action=True)
        self.g_op = self._operator_matrix(t_action=False)
        self._bottom_cols = None

    @property
    def bottom_cols(self):
        if self._bottom_cols is None:
            bottom = pi_shift_lattice(
                self.datum, self.J,
                [t + d for t, d in zip(self.top, self.depth)])
            self._bottom_cols = linalg.mat_transpose(bottom.mat)
        return self._bottom_cols

    def _operator_matrix(self, t_action: bool) -> np.ndarray:
        """F_p matrix (2D x 2D) of multiplication by t or by gamma."""
        datum = self.datum
        p = datum.p
        T = np.zeros((2 * self.D, 2 * self.D), dtype=np.int64)
        for col, (pos, j, l) in enumerate(self.index):
            i = self.J[pos]
            ext = datum.factors[i].ext
            mult = (ext.monomial(1, 1, 0) if t_action else datum.factors[i].gamma)
            for digit in range(2):
                coeff = ext.iota(datum.base.code([1 if k == digit else 0 for k in range(2)]))
                el = mult * ext.monomial(
                    ext.K.mul(coeff, ext.K.power(ext.K.generator, l)), 0, j + self.top[pos])
                s = el.s
                for r in range(s.C.shape[0]):
                    pe = s.off + r
                    jj = pe - self.top[pos]
                    if not (0 <= jj < self.depth[pos]) or not s.C[r].any():
                        continue
                    y = (ext.decomp_mat @ s.C[r]) % p
                    for ll in range(ext.f):
                        row = self._flat(pos, jj, ll)
                        T[2 * row : 2 * row + 2, 2 * col + digit] = y[2 * ll : 2 * ll + 2]
        return T % p

    def _flat(self, pos: int, j: int, l: int) -> int:
        f = self.datum.factors[self.J[pos]].f
        base = sum(self.depth[k] * self.datum.factors[self.J[k]].f for k in range(pos))
        return base + j * f + l

    # -- subspaces as rref digit arrays ---------------------------------------

    def rref(self, rows: np.ndarray) -> np.ndarray:
        """Reduced row echelon form over F_{q^2}; rows shape (k, D, 2)."""
        p = self.ops.p
        R = [r.copy() for r in rows]
        out = []
        lead = 0
        for col in range(self.D):
            piv = None
            for ri, r in enumerate(R):
                if r[col].any():
                    piv = ri
                    break
            if piv is None:
                continue
            row = R.pop(piv)
            c = self.ops.code(row[col])
            inv = int(self.ops.inv_codes[c])
            row = (row.reshape(self.D, 2) @ self.ops.mul_mats[inv].T) % p
            new_R = []
            for r in R:
                if r[col].any():
                    s = self.ops.code(r[col])
                    r = (r - (row.reshape(self.D, 2) @ self.ops.mul_mats[s].T)) % p
                new_R.append(r)
            for oi, o in enumerate(out):
                if o[col].any():
                    s = self.ops.code(o[col])
                    out[oi] = (o - (row.reshape(self.D, 2) @ self.ops.mul_mats[s].T)) % p
            R = new_R
            out.append(row)
        return np.array(out, dtype=np.int64).reshape(len(out), self.D, 2)

    def skey(self, rows: np.ndarray) -> bytes:
        return rows.astype(np.int8).tobytes() + bytes([rows.shape[0]])

    def in_span(self, rows: np.ndarray, v: np.ndarray) -> bool:
        return not self.reduce_batch(rows, v[None])[0].any()

    def reduce_batch(self, rows: np.ndarray, V: np.ndarray) -> np.ndarray:
        """Residues of a batch of vectors (V, D, 2) modulo the RREF rows."""
        p = self.ops.p
        W = V.copy()
        for r in rows:
            lead_cols = np.flatnonzero(r.any(axis=1))
            if not lead_cols.size:
                continue
            c = lead_cols[0]
            codes = W[:, c, 0] + self.ops.base.p * W[:, c, 1]
            hit = codes != 0
            if not hit.any():
                continue
            Ms = self.ops.mul_mats[codes[hit]]
            W[hit] = (W[hit] - np.einsum("vij,dj->vdi", Ms, r)) % p
        return W

    def normalize_projective(self, V: np.ndarray) -> np.ndarray:
        """Scale each nonzero vector so its first nonzero coordinate is 1."""
        p = self.ops.p
        W = V.copy()
        for k in range(W.shape[0]):
            w = W[k]
            nz = np.flatnonzero(w.any(axis=1))
            if not nz.size:
                continue
            c = int(w[nz[0], 0] + p * w[nz[0], 1])
            inv = int(self.ops.inv_codes[c])
            W[k] = (w @ self.ops.mul_mats[inv].T) % p
        return W

    def apply(self, op: np.ndarray, v: np.ndarray) -> np.ndarray:
        return ((op @ v.reshape(-1)) % self.ops.p).reshape(self.D, 2)

    def closure(self, rows: np.ndarray) -> np.ndarray:
        cur = self.rref(rows)
        while True:
            extra = []
            for r in cur:
                for op in (self.t_op, self.g_op):
                    img = self.apply(op, r)
                    if img.any() and not self.in_span(cur, img):
                        extra.append(img)
            if not extra:
                return cur
            cur = self.rref(np.concatenate([cur, np.array(extra)], axis=0))

    def is_invariant(self, rows: np.ndarray) -> bool:
        for r in rows:
            for op in (self.t_op, self.g_op):
                img = self.apply(op, r)
                if img.any() and not self.in_span(rows, img):
                    return False
        return True

    def exact_multiplier(self, rows: np.ndarray) -> bool:
        """True iff the lifted lattice has O_{E'} M = pi^{-m} O exactly."""
        for pos, i in enumerate(self.J):
            if self.depth[pos] == 0:
                continue
            f = self.datum.factors[i].f
            base = self._flat(pos, 0, 0)
            if not rows.size or not rows[:, base : base + f, :].any():
                return False
        return True

    def nonzero_vectors_normalized(self):
        """One representative per projective line of W (first nonzero coord = 1)."""
        Q = self.ops.base.order
        D = self.D
        for lead in range(D):
            for tail in itertools.product(range(Q), repeat=D - lead - 1):
                v = np.zeros((D, 2), dtype=np.int64)
                v[lead] = self.ops.pair(1)
                for k, c in enumerate(tail):
                    v[lead + 1 + k] = self.ops.pair(c)
                yield v

    def all_subspaces(self):
        """Every subspace of W, via RREF pivot patterns (oracle path)."""
        Q = self.ops.base.order
        D = self.D
        yield np.zeros((0, D, 2), dtype=np.int64)
        for k in range(1, D + 1):
            for pivots in itertools.combinations(range(D), k):
                free_pos = [
                    (r, c)
                    for r in range(k)
                    for c in range(pivots[r] + 1, D)
                    if c not in pivots
                ]
                for assign in itertools.product(range(Q), repeat=len(free_pos)):
                    rows = np.zeros((k, D, 2), dtype=np.int64)
                    for r, pc in enumerate(pivots):
                        rows[r, pc] = self.ops.pair(1)
                    for (r, c), code in zip(free_pos, assign):
                        rows[r, c] = self.ops.pair(code)
                    yield rows

    def lift_rows(self, rows: np.ndarray):
        """Ambient coordinate columns of the lifted basis vectors."""
        datum = self.datum
        cols = []
        for r in rows:
            per_factor = []
            for pos, i in enumerate(self.J):
                ext = datum.factors[i].ext
                el = ext.zero()
                for j in range(self.depth[pos]):
                    for l in range(ext.f):
                        pair = r[self._flat(pos, j, l)]
                        if pair.any():
                            code = ext.iota(self.ops.code(pair))
                            el = el + ext.monomial(
                                ext.K.mul(code, ext.K.power(ext.K.generator, l)),
                                0, j + self.top[pos])
                per_factor.append(el)
            cols.append([x for el in per_factor for x in el.coords()])
        return cols


# ---------------------------------------------------------------------------
# window search and enumeration


def search_window(form: HermitianForm, datum: CharacteristicDatum, J):
    """Admissible multiplier vectors with the quotient dimension of each."""
    J = datum.subset(J)
    a, _ = datum.conductor_exponents(J)
    b = form.b
    ranges = []
    for ai, bi in zip(a, b):
        lo = -(-bi // 2)  # ceil(b/2) <= m
        hi = (2 * ai + bi) // 2
        if lo > hi:
            return []
        ranges.append(range(lo, hi + 1))
    dim = sum(ai * datum.factors[i].f for ai, i in zip(a, J))
    return [(list(m), dim) for m in itertools.product(*ranges)]


def _window_candidates(space: WindowSpace, max_dim: Optional[int] = None):
    """Invariant subspaces of the window quotient, smallest first.

    Subspaces are grown by closing one new vector at a time; residues
    modulo the current subspace are deduped (projectively) before any
    closure is taken, and growth stops at max_dim since larger spaces
    cannot lift to self-dual lattices of the forced colength.
    """
    if max_dim is None:
        max_dim = space.D
    zero = np.zeros((0, space.D, 2), dtype=np.int64)
    seen = {space.skey(zero)}
    frontier = [zero]
    order = [zero]
    if space.D == 0 or max_dim <= 0:
        return order
    cand = np.array(list(space.nonzero_vectors_normalized()), dtype=np.int64)
    while frontier:
        nxt = []
        for S in frontier:
            if S.shape[0] >= max_dim:
                continue
            residues = space.normalize_projective(space.reduce_batch(S, cand))
            fresh = {}
            for v in residues:
                if v.any():
                    fresh.setdefault(v.astype(np.int8).tobytes(), v)
            for v in fresh.values():
                S2 = space.closure(np.concatenate([S, v[None]], axis=0))
                if S2.shape[0] > max_dim:
                    continue
                key = space.skey(S2)
                if key not in seen:
                    seen.add(key)
                    nxt.append(S2)
                    order.append(S2)
        frontier = nxt
    return order


def _expected_subspace_dim(space: WindowSpace, form: HermitianForm) -> Optional[int]:
    """Forced V-dimension: a self-dual lattice M in the window satisfies
    dim(L/M) = dim(L/L-perp)/2 for the window top L, so dim V is pinned.
    Returns None when no dimension is consistent (odd colength or out of
    range), in which case the window holds no self-dual lattice."""
    tot = 0
    for pos, i in enumerate(space.J):
        tot += (-2 * space.top[pos] - form.b[pos]) * space.datum.factors[i].f
    if tot % 2:
        return None
    k = space.D - tot // 2
    if k < 0 or k > space.D:
        return None
    return k


def _test_and_collect(space: WindowSpace, rows: np.ndarray, form: HermitianForm,
                      out: dict, require_exact: bool = True,
                      expected_dim: Optional[int] = None):
    datum = space.datum
    if expected_dim is not None and rows.shape[0] != expected_dim:
        return
    if require_exact and not space.exact_multiplier(rows):
        return
    cols = space.bottom_cols + space.lift_rows(rows)
    M = canonicalize(datum, space.J, linalg.mat_transpose(cols))
    if not is_selfdual(M, form):
        return
    out.setdefault(M.key(), M)


def enumerate_selfdual(form: HermitianForm, datum: CharacteristicDatum, J,
                       widen: int = 0):
    """(count, lattices) of self-dual gamma-stable lattices for the form.

    With widen > 0 the admissible multiplier box is extended by a shell
    of that thickness and every window bottom is padded by as many
    extra pi steps; by design this must find exactly the same lattices
    (used as a property check on the window bounds).
    """
    J = datum.subset(J)
    windows = search_window(form, datum, J)
    if widen:
        extended = set()
        for m, dim in windows:
            for delta in itertools.product(range(-widen, widen + 1), repeat=len(m)):
                extended.add(tuple(mi + di for mi, di in zip(m, delta)))
        windows = [(list(m), None) for m in sorted(extended)]
    found: dict = {}
    for m, dim in windows:
        space = WindowSpace(datum, J, m, widen=widen)
        if space.D > datum.enum_cap + 2 * widen * len(space.J):
            raise SearchTooLarge(
                f"window quotient dimension {space.D} exceeds cap {datum.enum_cap} "
                f"(J={J}, m={m})")
        k_exp = _expected_subspace_dim(space, form)
        if k_exp is None:
            continue
        for rows in _window_candidates(space, max_dim=k_exp):
            _test_and_collect(space, rows, form, found, expected_dim=k_exp)
    lats = sorted(found.values(), key=lambda M: M.key())
    return len(lats), lats


def enumerate_selfdual_naive(form: HermitianForm, datum: CharacteristicDatum, J) -> int:
    """Oracle twin: all subspaces, filter stability then self-duality."""
    J = datum.subset(J)
    windows = search_window(form, datum, J)
    found: dict = {}
    for m, dim in windows:
        space = WindowSpace(datum, J, m)
        if space.D > 4:
            raise SearchTooLarge(f"naive enumeration refuses dimension {space.D} > 4")
        for rows in space.all_subspaces():
            if not space.is_invariant(rows):
                continue
            _test_and_collect(space, rows, form, found)
    return len(found)
