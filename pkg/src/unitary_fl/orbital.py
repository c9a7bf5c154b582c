"""Orbital counts, their signed endoscopic combinations, and the verdict.

For a subset J and an admissible class vector lambda (entries in Z/2,
even total weight), the count O^lambda is the number of self-dual
gamma-stable lattices for the canonical representative form of that
class.  A nontrivial split I = I1 | I2 of the factor set yields

  O^kappa  = sum over lambda of kappa(lambda - shift) O^lambda,
  SO^H     = (sum over classes of part 1) * (sum over part 2),

where the shift is the pair of per-part base classes and kappa is
either order-2 character cutting out the split.  The expected identity
O^kappa = (-1)^r q^r SO^H, with r the total resultant valuation across
the parts, is re-checked on every run: a FAIL verdict means the
implementation is wrong, and the report says so loudly.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .chardata import CharacteristicDatum
from .errors import ClassNotAdmissible, InconsistentInvariants
from . import lattices


def admissible_classes(size: int) -> list[tuple]:
    """All vectors in (Z/2)^size with even weight, lexicographic."""
    return [lam for lam in itertools.product((0, 1), repeat=size) if sum(lam) % 2 == 0]


def orbital(datum: CharacteristicDatum, J, lam) -> int:
    """Count for class lam on subset J (canonical representative form)."""
    J = datum.subset(J)
    lam = tuple(int(x) % 2 for x in lam)
    if sum(lam) % 2:
        raise ClassNotAdmissible(f"class {lam} has odd total parity")
    form = lattices.class_form(datum, J, lam)
    if form.lam != lam:
        raise InconsistentInvariants(f"representative form has class {form.lam}, wanted {lam}")
    count, _ = lattices.enumerate_selfdual(form, datum, J)
    return count


def part_shift(datum: CharacteristicDatum, partition) -> tuple:
    """Base class vector (lambda0_{I1}, lambda0_{I2}) in J order."""
    I1, I2 = partition
    shift = {}
    for part in (tuple(I1), tuple(I2)):
        _, lam0 = datum.base_form(part, check_selfdual=False)
        for i, l0 in zip(sorted(part), lam0):
            shift[i] = l0
    J = datum.subset(tuple(I1) + tuple(I2))
    return tuple(shift[i] for i in J)


def transfer_exponent(datum: CharacteristicDatum, partition) -> int:
    I1, I2 = partition
    return sum(datum.r_matrix[i][j] for i in I1 for j in I2)


def transfer_factor(datum: CharacteristicDatum, partition) -> int:
    r = transfer_exponent(datum, partition)
    return (-datum.q) ** r


def _check_partition(datum: CharacteristicDatum, partition):
    I1, I2 = (tuple(sorted(part)) for part in partition)
    if not I1 or not I2:
        raise ClassNotAdmissible("partition parts must be nonempty")
    if set(I1) & set(I2):
        raise ClassNotAdmissible("partition parts overlap")
    return I1, I2


def fl_tasks(datum: CharacteristicDatum, partition) -> list[tuple]:
    """Independent (J, lambda) enumeration tasks for a verdict run."""
    I1, I2 = _check_partition(datum, partition)
    J = datum.subset(I1 + I2)
    tasks = [(J, lam) for lam in admissible_classes(len(J))]
    tasks += [(I1, lam) for lam in admissible_classes(len(I1))]
    tasks += [(I2, lam) for lam in admissible_classes(len(I2))]
    return tasks


@dataclass
class OrbitalReport:
    q: int
    factor_ids: list[str]
    partition_ids: tuple
    classes: dict            # lambda tuple -> count, subset J = union
    per_part: tuple          # two dicts, lambda tuple -> count
    shift: tuple
    kappa_values: dict       # "kappa1"/"kappa2" -> signed sum
    O_kappa: int
    SO_H: int
    r: int
    transfer: int
    verdict: bool
    enumerator: str = "pruned"
    datum_hash: Optional[str] = None
    timings: dict = field(default_factory=dict)


def assemble_report(datum: CharacteristicDatum, partition, counts: dict,
                    enumerator: str = "pruned", timings: Optional[dict] = None) -> OrbitalReport:
    """Fold per-task counts (a dict keyed by fl_tasks entries) into a report."""
    I1, I2 = _check_partition(datum, partition)
    J = datum.subset(I1 + I2)
    shift = part_shift(datum, (I1, I2))
    classes = {lam: counts[(J, lam)] for lam in admissible_classes(len(J))}
    kappa_values = {}
    pos1 = [k for k, i in enumerate(J) if i in I1]
    pos2 = [k for k, i in enumerate(J) if i in I2]
    for name, positions in (("kappa1", pos1), ("kappa2", pos2)):
        total = 0
        for lam, cnt in classes.items():
            w = sum((lam[k] - shift[k]) % 2 for k in positions) % 2
            total += (-1) ** w * cnt
        kappa_values[name] = total
    if kappa_values["kappa1"] != kappa_values["kappa2"]:
        raise InconsistentInvariants(
            f"endoscopic characters disagree: {kappa_values} (they must agree on even classes)")
    part_counts = []
    for part in (I1, I2):
        part_counts.append({lam: counts[(part, lam)] for lam in admissible_classes(len(part))})
    so = sum(part_counts[0].values()) * sum(part_counts[1].values())
    r = transfer_exponent(datum, (I1, I2))
    transfer = (-datum.q) ** r
    o_kappa = kappa_values["kappa1"]
    return OrbitalReport(
        q=datum.q,
        factor_ids=[f.fid for f in datum.factors],
        partition_ids=(tuple(datum.factors[i].fid for i in I1),
                       tuple(datum.factors[i].fid for i in I2)),
        classes=classes,
        per_part=tuple(part_counts),
        shift=shift,
        kappa_values=kappa_values,
        O_kappa=o_kappa,
        SO_H=so,
        r=r,
        transfer=transfer,
        verdict=(o_kappa == transfer * so),
        enumerator=enumerator,
        timings=timings or {},
    )


def kappa_orbital(datum: CharacteristicDatum, partition) -> int:
    rep = verify_fl(datum, partition)
    return rep.O_kappa


def stable_orbital(datum: CharacteristicDatum, partition) -> int:
    rep = verify_fl(datum, partition)
    return rep.SO_H


def verify_fl(datum: CharacteristicDatum, partition,
              count_fn: Optional[Callable] = None,
              enumerator: str = "pruned") -> OrbitalReport:
    """Run every class enumeration and assemble the verdict report."""
    tasks = fl_tasks(datum, partition)
    counts = {}
    timings = {}
    use_naive = enumerator == "naive"
    for J, lam in tasks:
        t0 = time.perf_counter()
        if count_fn is not None:
            counts[(J, lam)] = count_fn(datum, J, lam)
        elif use_naive:
            form = lattices.class_form(datum, J, lam)
            counts[(J, lam)] = lattices.enumerate_selfdual_naive(form, datum, J)
        else:
            counts[(J, lam)] = orbital(datum, J, lam)
        timings[(J, lam)] = time.perf_counter() - t0
    return assemble_report(datum, partition, counts, enumerator=enumerator, timings=timings)


def class_invariance_check(datum: CharacteristicDatum, J, lam, trials: int, rng) -> bool:
    """Counts must agree for the canonical form, tau-fixed unit twists
    of it, and even uniformizer twists (class representatives vary,
    the class does not)."""
    J = datum.subset(J)
    base_count = orbital(datum, J, lam)
    form0 = lattices.class_form(datum, J, lam)
    for _ in range(trials):
        c = []
        for i, ci in zip(J, form0.c):
            ext = datum.factors[i].ext
            u = _random_tau_fixed_unit(ext, rng)
            c.append((ci * u).shift_pi(2 * rng.randrange(-1, 2)))
        form = lattices.HermitianForm(datum, J, c)
        if form.lam != form0.lam:
            raise InconsistentInvariants("twist changed the discriminant class")
        count, _ = lattices.enumerate_selfdual(form, datum, J)
        if count != base_count:
            return False
    return True


def _random_tau_fixed_unit(ext, rng):
    """Unit s0 + s1 pi + s2 pi^2 with tau-fixed coefficients, s0 != 0."""
    codes = _tau_fixed_codes(ext)
    el = ext.monomial(codes[rng.randrange(1, len(codes))])
    for k in (1, 2):
        sk = codes[rng.randrange(len(codes))]
        if sk:
            el = el + ext.monomial(sk, 0, k)
    return el


def _tau_fixed_codes(ext) -> list[int]:
    """Codes of the subfield fixed by tau, zero first, deterministic order."""
    import numpy as np

    p, d = ext.p, ext.K.d
    M = (ext.tau_mat - np.eye(d, dtype=np.int64)) % p
    basis = _nullspace_mod_p(M, p)
    out = []
    for coeffs in itertools.product(range(p), repeat=len(basis)):
        v = np.zeros(d, dtype=np.int64)
        for c, b in zip(coeffs, basis):
            v = (v + c * b) % p
        out.append(ext.K.code(v))
    return sorted(set(out))


def _nullspace_mod_p(M, p):
    import numpy as np

    M = M % p
    n = M.shape[1]
    A = M.copy()
    pivots = []
    row = 0
    for col in range(n):
        piv = None
        for r in range(row, A.shape[0]):
            if A[r, col] % p:
                piv = r
                break
        if piv is None:
            continue
        A[[row, piv]] = A[[piv, row]]
        A[row] = (A[row] * pow(int(A[row, col]), p - 2, p)) % p
        for r in range(A.shape[0]):
            if r != row and A[r, col]:
                A[r] = (A[r] - A[r, col] * A[row]) % p
        pivots.append(col)
        row += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fcol in free:
        v = np.zeros(n, dtype=np.int64)
        v[fcol] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-A[r, fcol]) % p
        basis.append(v % p)
    return basis
