"""Batch command-line front end.

Every command writes one report (JSON by default) and exits with 0 on
success, 2 when the check it performs fails, and 1 on bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .clothespin import all_pinnings, count_pinnings, n_of
from .errors import DegenerateSample, InvalidArgument, PreconditionViolation, RequiresIrreducible
from .factor import Minimality, classify_factor, find_diamond, mpw_forbidden
from .markov import MarkovMeasure, markov_entropy
from .perturb import SwapMap, dbar_marker_vs_bernoulli, kac_abramov_check, tradeoff_experiment
from .shift import is_irreducible
from .systems import System, load_system
from .thermo import (
    Potential,
    compensation_check,
    dini_potential,
    equilibrium_markov,
    integrate,
    p_dini_report,
    parse_grid,
    phi_family,
    pressure_sft,
    select_t,
    variation_sequence,
)

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


class CommandError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _csv(rows: list[dict]) -> str:
    import csv
    import io

    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _system(args) -> System:
    if not args.system:
        raise CommandError("this command needs --system FILE")
    return load_system(args.system)


def _potential(system: System, path: str) -> Potential:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CommandError(f"{path}: cannot read file ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise CommandError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return Potential.from_json(system.space, data)


def _weights(spec: str) -> dict[str, float]:
    out = {}
    for part in spec.split(","):
        sym, _, val = part.partition("=")
        if not _:
            raise CommandError(f"weight {part!r} is not of the form symbol=value")
        out[sym.strip()] = float(val)
    return out


def _t_value(system: System, args) -> tuple[float, dict]:
    if args.t is not None:
        return args.t, {"t": args.t, "t_source": "given"}
    sel = select_t(system.space, system.code, args.epsilon)
    return sel.t, {"t": sel.t, "t_source": "select_t", "epsilon": args.epsilon,
                   "t_bound": sel.bound, "t_certified": sel.certified}


# -- commands ----------------------------------------------------------------------

def cmd_validate(args):
    system = _system(args)
    return {"ok": True, "alphabet": list(system.space.alphabet),
            "labels": list(system.code.labels), "warnings": list(system.warnings)}, [], True


def cmd_analyze(args):
    system = _system(args)
    irreducible = is_irreducible(system.space)
    report = {"irreducible": irreducible}
    if irreducible:
        report["classification"] = classify_factor(system.space, system.code).value
        d = find_diamond(system.space, system.code, system.space.size ** 2 + 1)
        report["diamond"] = None if d is None else [str(d.u), str(d.v)]
    rows = [{"field": k, "value": json.dumps(v)} for k, v in report.items()]
    return report, rows, True


def cmd_mpw(args):
    system = _system(args)
    words = mpw_forbidden(system.space, system.code, system.order, args.max_len)
    report = {"max_len": args.max_len, "order": list(system.order.symbols),
              "forbidden": [str(w) for w in words]}
    return report, [{"word": str(w), "length": len(w)} for w in words], True


def cmd_pressure(args):
    system = _system(args)
    f = _potential(system, args.potential)
    value = pressure_sft(system.space, f)
    return {"pressure": value, "range": f.k}, [{"pressure": value}], True


def cmd_equilibrium(args):
    system = _system(args)
    f = _potential(system, args.potential)
    m = equilibrium_markov(system.space, f)
    h = markov_entropy(m)
    integral = integrate(m, f)
    names = list(m.space.alphabet)
    report = {
        "states": names,
        "transition": m.transition.tolist(),
        "stationary": m.stationary.tolist(),
        "entropy": h,
        "integral": integral,
        "pressure": pressure_sft(system.space, f),
    }
    rows = [{"from": names[i], "to": names[j], "probability": float(m.transition[i, j])}
            for i in range(len(names)) for j in range(len(names)) if m.transition[i, j] > 0]
    return report, rows, True


def cmd_check_compensation(args):
    system = _system(args)
    params = {"tol": args.tol, "phi_grid": args.phi_grid, "phi_random": args.phi_random,
              "phi_seed": args.seed}
    if args.potential:
        f = _potential(system, args.potential)
        params["potential"] = args.potential
    else:
        t, extra = _t_value(system, args)
        params.update(extra, radius=args.radius)
        f = dini_potential(system.space, system.code, system.order, t, args.radius)
    family = phi_family(system.code, parse_grid(args.phi_grid), n_random=args.phi_random,
                        seed=args.seed)
    rep = compensation_check(system.space, system.code, f, family, args.tol)
    report = rep.to_json(include_gaps=True)
    report["parameters"] = params
    rows = [{"phi": g["phi"], "gap": g["gap"]} for g in report["gaps"]]
    return report, rows, rep.passed


def cmd_dini(args):
    system = _system(args)
    t, extra = _t_value(system, args)
    f = dini_potential(system.space, system.code, system.order, t, args.radius)
    v = variation_sequence(f, args.radius)
    reports = [p_dini_report(v, p).to_json() for p in args.p]
    report = {"variations": list(v.values), "tail_model": v.tail_t is not None,
              "minorant": v.lower_t is not None, "reports": reports, "radius": args.radius, **extra}
    return report, reports, True


def cmd_clothespin(args):
    system = _system(args)
    oracle = Minimality(system.space, system.code, system.order)
    word = args.word
    report = {"word": word}
    pinnings = all_pinnings(system.space, system.code, system.order, word, oracle=oracle)
    report["pinnings"] = [{"start": p.pins[0], "pins": list(p.pins), "truncated": p.truncated}
                          for p in pinnings]
    report["count_pinnings"] = count_pinnings(system.space, system.code, system.order, word,
                                              oracle=oracle)
    if args.center is not None:
        nv = n_of(system.space, system.code, system.order, word, args.center, oracle=oracle)
        report["n"] = {"center": args.center, "value": nv.value, "exact": nv.exact}
    rows = [{"start": p["start"], "pins": " ".join(map(str, p["pins"])), "truncated": p["truncated"]}
            for p in report["pinnings"]]
    return report, rows, True


def cmd_simulate_tradeoff(args):
    system = _system(args)
    space, code = system.space, system.code
    base = MarkovMeasure.from_weights(space, _weights(args.base_weights))
    sm = SwapMap.build(space, code, args.u, args.v)
    t, extra = _t_value(system, args)
    f = dini_potential(space, code, system.order, t, args.radius)
    seeds = [args.seed + i for i in range(args.seeds)]
    rep = tradeoff_experiment(space, code, base, sm, f, [float(p) for p in args.p_grid.split(",")],
                              args.length, seeds)
    report = rep.to_json()
    report["parameters"] = {"u": args.u, "v": args.v, "base_weights": args.base_weights,
                            "radius": args.radius, "z": args.z, **extra}
    mono = rep.monotone_ratio(args.z)
    positive = rep.gains_positive(args.z)
    report["gains_positive"] = positive
    passed = all(positive) and all(m["ok"] for m in mono)
    return report, rep.rows(), passed


def cmd_check_kac_abramov(args):
    system = _system(args)
    space = system.space
    if args.weights:
        m = MarkovMeasure.from_weights(space, _weights(args.weights))
    else:
        m = equilibrium_markov(space, Potential.constant(space))
    rep = kac_abramov_check(m, args.cylinder, args.length, args.seed)
    report = rep.to_json()
    report["parameters"] = {"z": args.z, "length": args.length,
                            "measure": args.weights or "maximal entropy"}
    passed = rep.kac_ok(args.z) and rep.abramov_ok(args.z)
    return report, [report], passed


def cmd_dbar(args):
    results = []
    for p in args.p:
        for n in args.n:
            r = dbar_marker_vs_bernoulli(p, n, args.samples, args.seed)
            row = r.to_json()
            row["within_bound"] = r.exact <= r.bound + 1e-15
            row["within_stderr"] = r.within(args.z)
            results.append(row)
    passed = all(r["within_bound"] and r["within_stderr"] for r in results)
    return {"results": results, "parameters": {"z": args.z}}, results, passed


# -- wiring ------------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="compensation", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, needs_seed: bool = False, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--system", help="JSON system description")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", "-o", help="report path (default: stdout)")
        p.add_argument("--seed", type=int, required=needs_seed, default=None if needs_seed else 0)
        p.set_defaults(fn=fn)
        return p

    add("validate", cmd_validate, help="validate a system description")
    add("analyze", cmd_analyze, help="irreducibility, diamond and classification")
    p = add("mpw", cmd_mpw, help="minimal forbidden list of the MPW approximation")
    p.add_argument("--max-len", type=int, required=True)
    p = add("pressure", cmd_pressure, help="pressure of a locally constant potential")
    p.add_argument("--potential", required=True)
    p = add("equilibrium", cmd_equilibrium, help="equilibrium Markov measure of a potential")
    p.add_argument("--potential", required=True)

    p = add("check-compensation", cmd_check_compensation, help="compensation identity on a phi family")
    p.add_argument("--potential", help="potential JSON; default is the Dini-type candidate")
    p.add_argument("--t", type=float)
    p.add_argument("--epsilon", type=float, default=0.1, help="used to pick t when --t is absent")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--phi-grid", default="-2:2:5")
    p.add_argument("--phi-random", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("dini", cmd_dini, help="variations and p-Dini verdicts of the candidate")
    p.add_argument("--p", type=_floats, default=[1.0, 1.1, 1.5, 2.0])
    p.add_argument("--radius", type=int, default=4)
    p.add_argument("--t", type=float)
    p.add_argument("--epsilon", type=float, default=0.1)

    p = add("clothespin", cmd_clothespin, help="pinnings of a word")
    p.add_argument("--word", required=True)
    p.add_argument("--center", type=int)

    p = add("simulate-tradeoff", cmd_simulate_tradeoff, needs_seed=True,
            help="entropy gain against integral change under marked swaps")
    p.add_argument("--p-grid", default="0.01,0.02,0.05,0.1")
    p.add_argument("--length", type=int, default=10**6)
    p.add_argument("--seeds", type=int, default=20, help="number of replicates")
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--base-weights", required=True, help="e.g. a=0.5,c=0.5")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--t", type=float)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--z", type=float, default=3.0)

    p = add("check-kac-abramov", cmd_check_kac_abramov, needs_seed=True,
            help="Kac and Abramov identities by simulation")
    p.add_argument("--cylinder", required=True)
    p.add_argument("--length", type=int, default=10**6)
    p.add_argument("--weights", help="symbol weights; default is the maximal entropy measure")
    p.add_argument("--z", type=float, default=3.0)

    p = add("dbar", cmd_dbar, needs_seed=True, help="d-bar mismatch of the marker joining")
    p.add_argument("--p", type=_floats, required=True)
    p.add_argument("--n", type=_ints, required=True)
    p.add_argument("--samples", type=int, default=10**5)
    p.add_argument("--z", type=float, default=3.0)
    return parser


def _envelope(args, system_digest: str | None, report: dict) -> dict:
    return {
        "command": args.command,
        "tool_version": __version__,
        "system_sha256": system_digest,
        "seed": args.seed,
        "report": report,
    }


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        report, rows, passed = args.fn(args)
        digest = load_system(args.system).digest if args.system else None
    except (CommandError, InvalidArgument, RequiresIrreducible, PreconditionViolation,
            DegenerateSample, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_ERROR
    report = dict(report, passed=passed)
    if args.format == "json":
        text = json.dumps(_jsonable(_envelope(args, digest, report)), sort_keys=True, indent=2) + "\n"
    else:
        text = _csv([_jsonable(r) for r in rows])
    if args.output:
        Path(args.output).write_text(text)
    else:
        stdout.write(text)
    return EXIT_OK if passed else EXIT_FAILED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
