"""Instance files: schema-checked parsing and the bundled corpus.

An instance is a JSON object

    {"q": 3,
     "factors": [{"id": "1", "e": 1, "f": 1, "gamma": [[1, 0, "eps"]]}],
     "partition": [["1"], ["2"]],
     "options": {"precision_override": 40, "enum_cap": 10, "jobs": 1}}

gamma is a list of monomials [t_pow, pi_pow, coeff]; coeff is either
the string "eps" (the canonical anti-fixed element of F_{q^2}) or an
array of base-p digits giving the coefficient in the power basis of
the residue field F_{p^{2f}}, low degree first.  Unknown keys are
rejected; every schema error carries a JSON-pointer path.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .chardata import CharacteristicDatum, Factor
from .errors import SchemaError, UnknownFieldError
from .gf import canonical_epsilon
from .tame import TameExtension

_ROOT_KEYS = {"q", "factors", "partition", "options"}
_FACTOR_KEYS = {"id", "e", "f", "gamma"}
_OPTION_KEYS = {"precision_override", "enum_cap", "jobs"}


@dataclass
class FactorSpec:
    fid: str
    e: int
    f: int
    gamma: list  # [(t_pow, pi_pow, coeff)] with coeff "eps" or digit list


@dataclass
class InstanceFile:
    q: int
    factors: list
    partition: Optional[tuple]
    options: dict = field(default_factory=dict)

    def canonical_dict(self) -> dict:
        out = {
            "q": self.q,
            "factors": [
                {"id": f.fid, "e": f.e, "f": f.f,
                 "gamma": [[t, pi, c] for (t, pi, c) in f.gamma]}
                for f in self.factors
            ],
        }
        if self.partition is not None:
            out["partition"] = [list(part) for part in self.partition]
        if self.options:
            out["options"] = dict(sorted(self.options.items()))
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def to_datum(self, precision_override: Optional[int] = None,
                 enum_cap: Optional[int] = None) -> CharacteristicDatum:
        opts = self.options
        prec = precision_override if precision_override is not None else opts.get(
            "precision_override")
        cap = enum_cap if enum_cap is not None else opts.get("enum_cap", 10)
        factors = []
        for fs in self.factors:
            ext = TameExtension(self.q, fs.e, fs.f)
            eps = canonical_epsilon(self.q)
            gam = ext.zero()
            for (tp, pp, coeff) in fs.gamma:
                code = ext.iota(eps) if coeff == "eps" else ext.K.code(list(coeff))
                gam = gam + ext.monomial(code, tp, pp)
            factors.append(Factor(fs.fid, ext, gam))
        return CharacteristicDatum(self.q, factors,
                                   precision_override=prec, enum_cap=cap)

    def partition_indices(self) -> Optional[tuple]:
        if self.partition is None:
            return None
        idx = {f.fid: k for k, f in enumerate(self.factors)}
        return tuple(tuple(idx[i] for i in part) for part in self.partition)


def _require(cond: bool, message: str, path: str):
    if not cond:
        raise SchemaError(message, path)


def parse_instance(text: str) -> InstanceFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", "") from exc
    return parse_instance_dict(doc)


def parse_instance_dict(doc: dict) -> InstanceFile:
    _require(isinstance(doc, dict), "instance must be a JSON object", "")
    for key in doc:
        if key not in _ROOT_KEYS:
            raise UnknownFieldError(f"unknown key {key!r}", f"/{key}")
    _require("q" in doc, "missing key 'q'", "/q")
    _require(isinstance(doc["q"], int) and not isinstance(doc["q"], bool),
             "'q' must be an integer", "/q")
    _require("factors" in doc, "missing key 'factors'", "/factors")
    raw_factors = doc["factors"]
    _require(isinstance(raw_factors, list) and raw_factors,
             "'factors' must be a nonempty array", "/factors")
    p = doc["q"]
    factors = []
    seen_ids = set()
    for k, rf in enumerate(raw_factors):
        base = f"/factors/{k}"
        _require(isinstance(rf, dict), "factor must be an object", base)
        for key in rf:
            if key not in _FACTOR_KEYS:
                raise UnknownFieldError(f"unknown key {key!r}", f"{base}/{key}")
        for key in _FACTOR_KEYS:
            _require(key in rf, f"missing key {key!r}", f"{base}/{key}")
        fid = rf["id"]
        _require(isinstance(fid, str) and fid, "'id' must be a nonempty string", f"{base}/id")
        _require(fid not in seen_ids, f"duplicate id {fid!r}", f"{base}/id")
        seen_ids.add(fid)
        e, f = rf["e"], rf["f"]
        for name, v in (("e", e), ("f", f)):
            _require(isinstance(v, int) and not isinstance(v, bool) and v >= 1,
                     f"'{name}' must be a positive integer", f"{base}/{name}")
        _require(f % 2 == 1, "'f' must be odd", f"{base}/f")
        gamma = rf["gamma"]
        _require(isinstance(gamma, list), "'gamma' must be an array of monomials",
                 f"{base}/gamma")
        monos = []
        for mi, mono in enumerate(gamma):
            mp = f"{base}/gamma/{mi}"
            _require(isinstance(mono, list) and len(mono) == 3,
                     "monomial must be [t_pow, pi_pow, coeff]", mp)
            tp, pp, coeff = mono
            _require(isinstance(tp, int) and not isinstance(tp, bool), "t_pow must be an integer", f"{mp}/0")
            _require(isinstance(pp, int) and not isinstance(pp, bool) and 0 <= pp < e,
                     "pi_pow must be an integer in [0, e)", f"{mp}/1")
            if coeff == "eps":
                monos.append((tp, pp, "eps"))
                continue
            _require(isinstance(coeff, list) and len(coeff) == 2 * f,
                     "coeff must be \"eps\" or a digit array of length 2f", f"{mp}/2")
            _require(all(isinstance(d, int) and not isinstance(d, bool) and 0 <= d < p
                         for d in coeff),
                     f"digits must be integers in [0, {p})", f"{mp}/2")
            monos.append((tp, pp, tuple(coeff)))
        factors.append(FactorSpec(fid, e, f, monos))
    partition = None
    if "partition" in doc and doc["partition"] is not None:
        rp = doc["partition"]
        _require(isinstance(rp, list) and len(rp) == 2,
                 "partition must be a pair of id arrays", "/partition")
        parts = []
        used = set()
        for pi, part in enumerate(rp):
            _require(isinstance(part, list) and part,
                     "partition part must be a nonempty array", f"/partition/{pi}")
            for fid in part:
                _require(fid in seen_ids, f"unknown id {fid!r}", "/partition")
                _require(fid not in used, f"id {fid!r} used twice", "/partition")
                used.add(fid)
            parts.append(tuple(part))
        partition = tuple(parts)
    options = {}
    if "options" in doc and doc["options"] is not None:
        ro = doc["options"]
        _require(isinstance(ro, dict), "'options' must be an object", "/options")
        for key, val in ro.items():
            if key not in _OPTION_KEYS:
                raise UnknownFieldError(f"unknown key {key!r}", f"/options/{key}")
            _require(isinstance(val, int) and not isinstance(val, bool) and val >= 1,
                     f"'{key}' must be a positive integer", f"/options/{key}")
            options[key] = val
    return InstanceFile(q=p, factors=factors, partition=partition, options=options)


def load_instance(path: str) -> InstanceFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())


CORPUS_NAMES = [
    "node3", "node5", "tac3", "splitmax", "ramu2", "cusp3", "triple52", "unram53",
]


def corpus() -> list[tuple[str, InstanceFile]]:
    """The bundled regression instances, in a fixed order."""
    out = []
    for name in CORPUS_NAMES:
        text = resources.files("unitary_fl.data").joinpath(f"{name}.json").read_text()
        out.append((name, parse_instance(text)))
    return out
