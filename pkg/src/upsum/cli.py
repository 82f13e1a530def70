"""Command line entry point.

Every subcommand except ``trace`` prints one JSON document with sorted keys
and a ``version`` field. Exit codes: 0 success, 1 failed verdict, 2 bad
usage or unusable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .bitcore import BitString, DyadicRational
from .circuits import oracle_amplitude, parse_circuit, pathsum_amplitude, realpart_construction
from .enumerator import (
    CacheMismatchError,
    ExplorationReport,
    ExploreBudget,
    explore,
    load_report,
    report_to_dict,
    resume,
    save_report,
)
from .events import CoarseGrain, PathEnsemble, consistency, grain_amplitude, probabilities
from .machine import Dialect, trace
from .pathsum import sigma_enclosure, sigma_paper
from .translate import subintegral_check

OUTPUT_VERSION = 1
ORACLE_TOL = 1e-9


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _epsilon(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"epsilon must be in (0, 1], got {text}")
    return v


def _bits(text: str) -> BitString:
    try:
        return BitString("" if text == "-" else text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dyadic(d: DyadicRational) -> dict:
    return {"exact": str(d), "float": float(d)}


def _emit(doc: dict) -> None:
    doc = dict(doc, version=OUTPUT_VERSION)
    sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="upsum", description="Truncated universal path sums over a toy prefix-free machine.")
    p.add_argument("--version", action="version", version=f"upsum {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def budget_args(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--max-len", type=_positive, required=True)
        sp.add_argument("--max-steps", type=_positive, required=True)
        sp.add_argument("--dialect", choices=["A", "B"], default="A")
        sp.add_argument("--cache", type=Path, help="exploration cache file (read, resumed and rewritten)")

    sp = sub.add_parser("enumerate", help="enumerate halting programs within a budget")
    budget_args(sp)

    sp = sub.add_parser("sigma", help="truncated universal path sum")
    budget_args(sp)
    sp.add_argument("--mode", choices=["paper", "enclosure"], default="paper")

    sp = sub.add_parser("event", help="coarse-grained event amplitudes for a two-part program")
    sp.add_argument("--header", type=_bits, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--grain", action="append", required=True, help="pattern like 0**1, or comma-separated paths")
    sp.add_argument("--epsilon", type=_epsilon, required=True)
    sp.add_argument("--max-steps", type=_positive, default=1000)
    sp.add_argument("--dialect", choices=["A", "B"], default="A")
    sp.add_argument("--strict", action="store_true", help="exit 1 when any pair is inconsistent")

    sp = sub.add_parser("circuit", help="{CNOT, H, T} circuit path sums")
    csub = sp.add_subparsers(dest="circuit_command", required=True)
    amp = csub.add_parser("amp", help="<out|C|in> by path sum")
    amp.add_argument("--file", type=Path, required=True)
    amp.add_argument("--in", dest="in_state", type=_bits, required=True)
    amp.add_argument("--out", dest="out_state", type=_bits, required=True)
    amp.add_argument("--check-oracle", action="store_true")
    rp = csub.add_parser("realpart", help="ancilla construction for Re <Psi|V|Psi> of a T-only circuit")
    rp.add_argument("--file", type=Path, required=True)
    rp.add_argument("--check-oracle", action="store_true")

    sp = sub.add_parser("xlate-check", help="verify the 1110 sub-integral against dialect B")
    sp.add_argument("--max-len", type=_positive, required=True)
    sp.add_argument("--max-steps", type=_positive, required=True)

    sp = sub.add_parser("trace", help="step-by-step execution trace")
    sp.add_argument("--program", type=_bits, required=True)
    sp.add_argument("--max-steps", type=_positive, default=100)
    sp.add_argument("--dialect", choices=["A", "B"], default="A")
    return p


def _report(args) -> ExplorationReport:
    budget = ExploreBudget(args.max_len, args.max_steps)
    dialect = Dialect(args.dialect)
    cache: Path | None = args.cache
    if cache is None or not cache.exists():
        report = explore(budget, dialect)
    else:
        cached = load_report(cache)
        if cached.dialect != dialect or cached.region.bits:
            raise UsageError(f"cache {cache} holds a different exploration (dialect {cached.dialect.value})")
        if cached.budget == budget:
            return cached
        if not budget.covers(cached.budget):
            raise UsageError(f"cache {cache} was built with a larger budget; refusing to overwrite it")
        report = resume(cached, budget)
    if cache is not None:
        save_report(report, cache)
    return report


def cmd_enumerate(args) -> int:
    report = _report(args)
    doc = report_to_dict(report)
    doc["command"] = "enumerate"
    doc["halted_mass"] = _dyadic(report.halted_mass)
    doc["unresolved_mass"] = _dyadic(report.unresolved_mass)
    doc["halted"] = [
        {"program": r.program.bits, "output": r.output.bits, "steps": r.steps, "measure": str(r.measure), "phase": str(r.phase)}
        for r in report.halted
    ]
    doc["unresolved"] = [{"prefix": u.prefix.bits, "reason": u.reason} for u in report.unresolved]
    _emit(doc)
    return 0


def cmd_sigma(args) -> int:
    report = _report(args)
    doc = {
        "command": "sigma",
        "mode": args.mode,
        "budget": {"max_len": args.max_len, "max_steps": args.max_steps},
        "dialect": args.dialect,
        "halted": len(report.halted),
        "halted_mass": _dyadic(report.halted_mass),
        "unresolved_mass": _dyadic(report.unresolved_mass),
    }
    if args.mode == "paper":
        s = sigma_paper(report)
        doc["sigma"] = s.to_dict()
        doc["canonical"] = s.canonical().to_dict()
    else:
        enc = sigma_enclosure(report)
        doc["enclosure"] = enc.to_dict()
        doc["canonical_center"] = enc.center.canonical().to_dict()
    _emit(doc)
    return 0


def cmd_event(args) -> int:
    if not 0 <= args.k <= 20:
        raise UsageError("--k must be between 0 and 20")
    ensemble = PathEnsemble.from_machine(args.header, args.k, args.max_steps, Dialect(args.dialect))
    grains = [CoarseGrain.parse(g, args.k) for g in args.grain]
    doc: dict = {
        "command": "event",
        "header": args.header.bits,
        "k": args.k,
        "paths": [
            {"path": BitString.from_int(w, args.k).bits, "output": o.bits, "steps": s}
            for w, (o, s) in enumerate(zip(ensemble.outputs, ensemble.steps))
        ],
    }
    covered = [m for g in grains for m in g.members]
    if len(covered) == len(set(covered)) == 1 << args.k:
        rep = probabilities(ensemble, grains, args.epsilon)
        doc["partition"] = True
        doc.update(rep.to_dict())
        consistent = rep.consistent
    else:
        doc["partition"] = False
        amps = [grain_amplitude(ensemble, g) for g in grains]
        doc["grains"] = [
            {"paths": [p.bits for p in g.paths()], "amplitude": a.to_dict(), "unnormalized": abs(a.to_complex()) ** 2}
            for g, a in zip(grains, amps)
        ]
        pairs = []
        consistent = True
        for i in range(len(amps)):
            for j in range(i + 1, len(amps)):
                v = None if amps[i].is_zero() or amps[j].is_zero() else consistency(amps[i], amps[j], args.epsilon)
                consistent = consistent and (v is None or v.consistent)
                pairs.append({"i": i, "j": j, "verdict": None if v is None else v.to_dict()})
        doc["pairs"] = pairs
        doc["epsilon"] = args.epsilon
        doc["consistent"] = consistent
    _emit(doc)
    return 1 if args.strict and not consistent else 0


def cmd_circuit(args) -> int:
    circuit = parse_circuit(args.file)
    if args.circuit_command == "realpart":
        rp = realpart_construction(circuit)
        amp = rp.return_amplitude()
        doc = {
            "command": "circuit realpart",
            "qubits": rp.circuit.n,
            "ancilla": rp.ancilla,
            "outcome": rp.outcome.bits,
            "recipe": rp.recipe,
            "circuit": rp.circuit.to_text().splitlines(),
            "real_part": amp.to_dict(),
            "real_part_canonical": amp.canonical().to_dict(),
            "probability": rp.probability(),
        }
        ok = True
        if args.check_oracle:
            p = rp.probability_oracle()
            ok = abs(p - doc["probability"]) <= ORACLE_TOL
            doc["oracle"] = {"probability": p, "agrees": ok, "tolerance": ORACLE_TOL}
        _emit(doc)
        return 0 if ok else 1

    for name, s in (("--in", args.in_state), ("--out", args.out_state)):
        if len(s) != circuit.n:
            raise UsageError(f"{name} has {len(s)} bits, circuit has {circuit.n} qubits")
    res = pathsum_amplitude(circuit, args.in_state, args.out_state)
    doc = {
        "command": "circuit amp",
        "qubits": circuit.n,
        "gates": len(circuit.gates),
        "hadamards": circuit.h,
        "in": args.in_state.bits,
        "out": args.out_state.bits,
        "amplitude": res.amplitude.to_dict(),
        "canonical": res.amplitude.canonical().to_dict(),
        "paths": res.path_count,
        "leaves_visited": res.leaves_visited,
    }
    ok = True
    if args.check_oracle:
        z = oracle_amplitude(circuit, args.in_state, args.out_state)
        err = abs(z - res.amplitude.to_complex())
        ok = err <= ORACLE_TOL
        doc["oracle"] = {"amplitude": [z.real, z.imag], "abs_error": err, "agrees": ok, "tolerance": ORACLE_TOL}
    _emit(doc)
    return 0 if ok else 1


def cmd_xlate(args) -> int:
    verdict = subintegral_check(ExploreBudget(args.max_len, args.max_steps))
    doc = verdict.to_dict()
    doc["command"] = "xlate-check"
    _emit(doc)
    return 0 if verdict.passed else 1


def cmd_trace(args) -> int:
    for line in trace(args.program, args.max_steps, Dialect(args.dialect)):
        print(line)
    return 0


COMMANDS = {
    "enumerate": cmd_enumerate,
    "sigma": cmd_sigma,
    "event": cmd_event,
    "circuit": cmd_circuit,
    "xlate-check": cmd_xlate,
    "trace": cmd_trace,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, CacheMismatchError, ValueError, OSError) as exc:
        print(f"upsum: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
