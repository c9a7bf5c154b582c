"""ufl: command-line front end.

Subcommands: invariants, orbital, flverify, spectral, corpus.  Every
command prints one canonical JSON document on stdout (sorted keys,
compact separators, counts as decimal strings) and keeps diagnostics
on stderr, so reports are byte-identical across runs and worker
counts.  Exit codes: 0 success/PASS, 2 FAIL verdict, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import geometry, lattices
from .orbital import assemble_report, fl_tasks
from .orbital import orbital as orbital_count
from .errors import EngineError, SchemaError
from .instances import InstanceFile, corpus, load_instance, parse_instance


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def _error_payload(exc: EngineError) -> dict:
    return {"error": {
        "code": type(exc).__name__,
        "message": getattr(exc, "message", None) or str(exc),
        "path": getattr(exc, "path", ""),
    }}


def _lam_key(lam) -> str:
    return ",".join(str(x) for x in lam)


def _invariants_payload(inst: InstanceFile, datum) -> dict:
    J = tuple(range(len(datum.factors)))
    a, dJ = datum.conductor_exponents(J)
    _, lam0 = datum.base_form(J)
    mJ, budget = datum.precision_budget(J)
    return {
        "datum_hash": inst.digest(),
        "q": datum.q,
        "n": datum.n_total,
        "factors": [f.fid for f in datum.factors],
        "e": [f.e for f in datum.factors],
        "f": [f.f for f in datum.factors],
        "r_ij": [row[:] for row in datum.r_matrix],
        "delta": list(datum.delta),
        "delta_J": dJ,
        "a_J": a,
        "b": datum.duality_exponents(J),
        "lambda0": list(lam0),
        "m_J": mJ,
        "precision": datum.working_precision,
    }


def _count_task(arg):
    inst_json, J, lam, prec, cap = arg
    inst = parse_instance(inst_json)
    datum = inst.to_datum(precision_override=prec, enum_cap=cap)
    return orbital_count(datum, tuple(J), tuple(lam))


def _run_counts(inst: InstanceFile, datum, tasks, jobs: int) -> dict:
    if jobs <= 1:
        return {(J, lam): orbital_count(datum, J, lam) for (J, lam) in tasks}
    payload = inst.canonical_json()
    args = [(payload, list(J), list(lam), datum.working_precision, datum.enum_cap)
            for (J, lam) in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(_count_task, args))
    return {task: cnt for task, cnt in zip(tasks, results)}


def _oracle_check(datum, tasks) -> dict:
    checked = skipped = 0
    for J, lam in tasks:
        form = lattices.class_form(datum, J, lam)
        windows = lattices.search_window(form, datum, J)
        dim = windows[0][1] if windows else 0
        if dim > 4:
            skipped += 1
            continue
        pruned, _ = lattices.enumerate_selfdual(form, datum, J)
        naive = lattices.enumerate_selfdual_naive(form, datum, J)
        if pruned != naive:
            raise EngineError(
                f"enumerator mismatch on J={J} lambda={lam}: pruned {pruned} naive {naive}")
        checked += 1
    return {"checked": checked, "skipped": skipped, "agree": True}


def _flverify_payload(inst: InstanceFile, jobs: int = 1, precision=None,
                      enum_cap=None, oracle: bool = False) -> tuple[dict, float]:
    if inst.partition is None:
        raise SchemaError("flverify needs a partition", "/partition")
    t0 = time.perf_counter()
    datum = inst.to_datum(precision_override=precision, enum_cap=enum_cap)
    partition = inst.partition_indices()
    tasks = fl_tasks(datum, partition)
    jobs = jobs if jobs else int(inst.options.get("jobs", 1))
    counts = _run_counts(inst, datum, tasks, jobs)
    rep = assemble_report(datum, partition, counts)
    payload = {
        "O_kappa": str(rep.O_kappa),
        "SO_H": str(rep.SO_H),
        "transfer": str(rep.transfer),
        "verdict": "PASS" if rep.verdict else "FAIL",
        "r": rep.r,
        "q": rep.q,
        "n": datum.n_total,
        "factors": rep.factor_ids,
        "partition": [list(part) for part in rep.partition_ids],
        "classes": {_lam_key(lam): str(cnt) for lam, cnt in rep.classes.items()},
        "per_part": [{_lam_key(lam): str(cnt) for lam, cnt in part.items()}
                     for part in rep.per_part],
        "kappa": {k: str(v) for k, v in rep.kappa_values.items()},
        "shift": list(rep.shift),
        "enumerator": rep.enumerator,
        "datum_hash": inst.digest(),
        "invariants": _invariants_payload(inst, datum),
    }
    if oracle:
        payload["oracle"] = _oracle_check(datum, tasks)
    return payload, time.perf_counter() - t0


def _spectral_payload(inst: InstanceFile) -> dict:
    datum = inst.to_datum()
    J = tuple(range(len(datum.factors)))
    point = geometry.char_point_of_subset(datum, J)
    geometry.kostant_matrix(point)
    D = geometry.spectral_discriminant(point)
    payload = {
        "datum_hash": inst.digest(),
        "q": datum.q,
        "n": datum.n_total,
        "discriminant_valuation": int(D.val()) if datum.n_total > 1 else 0,
        "reduced": geometry.is_reduced(point),
        "kostant_roundtrip": "ok",
    }
    if inst.partition is not None:
        parts = inst.partition_indices()
        a1 = geometry.char_point_of_subset(datum, parts[0])
        a2 = geometry.char_point_of_subset(datum, parts[1])
        payload["tangent_injective"] = geometry.tangent_injectivity(a1, a2)
        prof = geometry.intersection_profile(datum, parts)
        payload["profile"] = {
            "points": [{"degree": pt.degree, "multiplicity": pt.multiplicity,
                        "inert": pt.inert} for pt in prof.points],
            "m": prof.m,
            "r_total": prof.r_total,
            "sign": prof.sign,
        }
    return payload


def _cmd_invariants(args) -> int:
    inst = load_instance(args.file)
    _emit(_invariants_payload(inst, inst.to_datum(precision_override=args.precision)))
    return 0


def _cmd_orbital(args) -> int:
    inst = load_instance(args.file)
    datum = inst.to_datum(precision_override=args.precision)
    lam = tuple(int(x) for x in args.lam.split(","))
    J = tuple(range(len(datum.factors)))
    if len(lam) != len(J):
        raise SchemaError(f"--lambda needs {len(J)} entries", "/lambda")
    count = orbital_count(datum, J, lam)
    _emit({
        "datum_hash": inst.digest(),
        "q": datum.q,
        "lambda": list(lam),
        "count": str(count),
    })
    return 0


def _cmd_flverify(args) -> int:
    inst = load_instance(args.file)
    payload, seconds = _flverify_payload(
        inst, jobs=args.jobs, precision=args.precision, oracle=args.oracle)
    _emit(payload)
    print(f"[ufl] flverify {args.file}: {payload['verdict']} in {seconds:.2f}s",
          file=sys.stderr)
    if args.out:
        from . import figures
        figures.write_flverify_outputs(args.out, inst, payload)
    return 0 if payload["verdict"] == "PASS" else 2


def _cmd_spectral(args) -> int:
    inst = load_instance(args.file)
    _emit(_spectral_payload(inst))
    return 0


def _cmd_corpus(args) -> int:
    if args.action != "run":
        raise SchemaError(f"unknown corpus action {args.action!r}", "")
    results = []
    all_pass = True
    for name, inst in corpus():
        payload, seconds = _flverify_payload(inst, jobs=args.jobs, oracle=args.oracle)
        results.append((name, payload, seconds))
        all_pass &= payload["verdict"] == "PASS"
        print(f"[ufl] {name}: {payload['verdict']} "
              f"(O^k={payload['O_kappa']} = {payload['transfer']} * {payload['SO_H']}) "
              f"in {seconds:.2f}s", file=sys.stderr)
    summary = {
        "command": "corpus",
        "count": len(results),
        "all_pass": all_pass,
        "instances": {name: payload for name, payload, _ in results},
    }
    _emit(summary)
    if args.out:
        from . import figures
        figures.write_corpus_outputs(args.out, results)
    return 0 if all_pass else 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ufl",
        description="exact lattice-counting orbital integrals over F_q((t)) "
                    "and endoscopic transfer checks")
    sub = ap.add_subparsers(dest="command", required=True)

    p_inv = sub.add_parser("invariants", help="numerical invariants of an instance")
    p_inv.add_argument("file")
    p_inv.add_argument("--precision", type=int, default=None)
    p_inv.set_defaults(fn=_cmd_invariants)

    p_orb = sub.add_parser("orbital", help="one class count")
    p_orb.add_argument("file")
    p_orb.add_argument("--lambda", dest="lam", required=True,
                       help="comma-separated class vector, e.g. 1,1")
    p_orb.add_argument("--precision", type=int, default=None)
    p_orb.set_defaults(fn=_cmd_orbital)

    p_fl = sub.add_parser("flverify", help="full transfer-identity verdict")
    p_fl.add_argument("file")
    p_fl.add_argument("--oracle", action="store_true",
                      help="cross-check counts against the unpruned enumerator")
    p_fl.add_argument("--jobs", type=int, default=1)
    p_fl.add_argument("--precision", type=int, default=None)
    p_fl.add_argument("--out", default=None, help="write CSV and figures here")
    p_fl.set_defaults(fn=_cmd_flverify)

    p_sp = sub.add_parser("spectral", help="spectral discriminant and profile")
    p_sp.add_argument("file")
    p_sp.set_defaults(fn=_cmd_spectral)

    p_co = sub.add_parser("corpus", help="bundled regression instances")
    p_co.add_argument("action", choices=["run"])
    p_co.add_argument("--oracle", action="store_true")
    p_co.add_argument("--jobs", type=int, default=1)
    p_co.add_argument("--out", default=None, help="write CSV and figures here")
    p_co.set_defaults(fn=_cmd_corpus)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except EngineError as exc:
        _emit(_error_payload(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
