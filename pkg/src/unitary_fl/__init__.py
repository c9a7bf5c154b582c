"""Exact lattice-counting orbital integrals for unitary groups over
F_q((t)), with the endoscopic transfer identity as a built-in oracle."""

from .chardata import CharacteristicDatum, Factor, refit_from_polys, scale_datum, translate_datum
from .instances import InstanceFile, corpus, load_instance, parse_instance
from .lattices import (
    HermitianForm,
    Lattice,
    base_hermitian_form,
    class_form,
    dual,
    enumerate_selfdual,
    enumerate_selfdual_naive,
    ideal_inverse,
    is_selfdual,
    is_stable,
    order_lattice,
    search_window,
)
from .orbital import (
    OrbitalReport,
    class_invariance_check,
    kappa_orbital,
    orbital,
    stable_orbital,
    transfer_factor,
    verify_fl,
)

__version__ = "0.1.0"

__all__ = [
    "CharacteristicDatum", "Factor", "HermitianForm", "InstanceFile", "Lattice",
    "OrbitalReport", "base_hermitian_form", "class_form", "class_invariance_check",
    "corpus", "dual", "enumerate_selfdual", "enumerate_selfdual_naive",
    "ideal_inverse", "is_selfdual", "is_stable", "kappa_orbital", "load_instance",
    "orbital", "order_lattice", "parse_instance", "refit_from_polys", "scale_datum",
    "search_window", "stable_orbital", "transfer_factor", "translate_datum",
    "verify_fl",
]
