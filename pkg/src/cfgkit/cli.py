"""Command-line front end.

Exit codes: 0 accepted / true, 1 rejected / false (the certificate goes to
stdout), 2 invalid input, 3 internal consistency failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

from .corpus import random_simple_game
from .engine import GameError, format_config, generate_space, load_game
from .feasibility import build_E, build_Omega
from .lattice import (
    InternalError,
    Lattice,
    NotALatticeError,
    NotULDError,
    PosetError,
    analyze,
    check_uld,
    format_poset,
    is_distributive,
    parse_lattice,
)
from .recognize import MODELS, GameWitness, build_script_g, recognize, simple_only_sufficient
from .verify import canonical_encoding, verify_witness

EXIT_OK, EXIT_REJECT, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("cfgkit")


class InputError(Exception):
    pass


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_lattice(args) -> Lattice:
    return parse_lattice(_read(args.input))


def _load_game(args):
    if not args.graph or not args.config:
        raise InputError("--graph and --config are both required")
    return load_game(_read(args.graph), _read(args.config))


def _witness_dict(w: GameWitness) -> dict:
    return {
        "graph": [[u, v, k] for (u, v), k in w.graph.mult.items()],
        "initial": [[v, n] for v, n in sorted(w.initial.items())],
        "solutions": {m: sol.as_dict() for m, sol in sorted(w.solutions.items())},
    }


def _witness_text(w: GameWitness) -> str:
    return "# graph\n" + w.graph.to_text() + "# configuration\n" + format_config(w.initial)


def cmd_check_uld(args) -> tuple[int, dict, str]:
    lat = _load_lattice(args)
    cert = check_uld(lat)
    labels = sorted(cert.label.items())
    data = {
        "uld": True,
        "elements": len(lat),
        "height": cert.height,
        "meet_irreducibles": list(lat.M),
        "labels": [[x, y, m] for (x, y), m in labels],
    }
    text = f"ULD lattice: {len(lat)} elements, height {cert.height}, |M| = {len(lat.M)}\n"
    text += "".join(f"{x} {y} # {m}\n" for (x, y), m in labels)
    return EXIT_OK, data, text


def cmd_irreducibles(args) -> tuple[int, dict, str]:
    lat = _load_lattice(args)
    cert, ctx = analyze(lat)
    enc = canonical_encoding(lat, cert)
    data = {
        "bottom": lat.bottom,
        "top": lat.top,
        "M": list(lat.M),
        "J": list(lat.J),
        "M_x": {x: sorted(lat.M_of[x]) for x in lat.elements},
        "encoding": {x: sorted(enc[x]) for x in lat.elements},
        "U": {m: list(ctx.U[m]) for m in ctx.M},
        "L": {m: list(ctx.L[m]) for m in ctx.M},
        "distributive": is_distributive(lat),
        "simple_only_sufficient": simple_only_sufficient(lat, cert),
        "script_g": sorted(build_script_g(ctx).edges),
    }
    lines = [f"M: {' '.join(lat.M)}", f"J: {' '.join(lat.J)}"]
    for m in ctx.M:
        lines.append(f"U[{m}]: {' '.join(ctx.U[m])}")
        lines.append(f"L[{m}]: {' '.join(ctx.L[m]) or '-'}")
    lines.append(f"distributive: {data['distributive']}")
    lines.append(f"H complete (only simple games): {data['simple_only_sufficient']}")
    return EXIT_OK, data, "\n".join(lines) + "\n"


def cmd_systems(args) -> tuple[int, dict, str]:
    lat = _load_lattice(args)
    _, ctx = analyze(lat)
    systems = {m: build_E(ctx, m) for m in ctx.M}
    omega = build_Omega(ctx)
    data = {
        "E": {m: s.dump().splitlines() for m, s in systems.items()},
        "Omega": omega.dump().splitlines(),
    }
    parts = [f"# E({m})\n{s.dump()}" for m, s in systems.items()]
    parts.append(f"# Omega\n{omega.dump()}")
    return EXIT_OK, data, "".join(parts)


def _recognize_one(lat, cert, ctx, model, cap):
    rec = recognize(lat, model, cert, ctx)
    entry: dict = {"model": model, "accepted": rec.accepted}
    if not rec.accepted:
        entry["certificate"] = str(rec.rejection)
        return rec, entry, f"[{model}] rejected: {rec.rejection}\n"
    report = verify_witness(rec.witness, lat, cert, cap=cap)
    if not report.passed:
        raise InternalError(f"{model} witness failed verification at stage {report.failed_stage}: {report.messages}")
    entry["witness"] = _witness_dict(rec.witness)
    entry["verification"] = report.to_dict()
    return rec, entry, f"[{model}] accepted; witness verified\n" + _witness_text(rec.witness)


def cmd_recognize(args) -> tuple[int, dict, str]:
    lat = _load_lattice(args)
    cert, ctx = analyze(lat)
    models = MODELS if args.model == "all" else (args.model,)
    results, entries, text = {}, [], ""
    for model in models:
        rec, entry, chunk = _recognize_one(lat, cert, ctx, model, args.cap)
        results[model] = rec.accepted
        entries.append(entry)
        text += chunk
    # acfg => asm => cfg must hold on every lattice
    order = [m for m in ("acfg", "asm", "cfg") if m in results]
    for a, b in zip(order, order[1:]):
        if results[a] and not results[b]:
            raise InternalError(f"{a} accepted but {b} rejected")
    code = EXIT_OK if all(results.values()) else EXIT_REJECT
    return code, {"results": entries}, text


def cmd_simulate(args) -> tuple[int, dict, str]:
    g, o = _load_game(args)
    space = generate_space(g, o, cap=args.cap)
    names = space.names()
    labels = space.cover_labels()
    data = {
        "vertices": list(g.vertices),
        "configurations": [[names[i], list(c)] for i, c in enumerate(space.configs)],
        "shot_vectors": [[names[i], list(s)] for i, s in enumerate(space.shots)],
        "covers": [[x, y, labels[x, y]] for x, y in sorted(labels)],
        "simple": all(n <= 1 for n in space.shots[space.top]),
    }
    return EXIT_OK, data, format_poset(space.to_dag(), labels)


def cmd_verify(args) -> tuple[int, dict, str]:
    lat = _load_lattice(args)
    cert = check_uld(lat)
    g, o = _load_game(args)
    report = verify_witness(GameWitness(g, o, args.model), lat, cert, cap=args.cap)
    lines = [f"{s}: {'pass' if v else 'fail' if v is False else 'skipped'}" for s, v in report.stages.items()]
    lines += [f"  {s}: {msg}" for s, msg in sorted(report.messages.items())]
    lines += [f"c{i} -> {x}" for i, x in sorted(report.mapping.items())]
    return (EXIT_OK if report.passed else EXIT_REJECT), report.to_dict(), "\n".join(lines) + "\n"


def cmd_gen_random(args) -> tuple[int, dict, str]:
    rng = random.Random(args.seed)
    out_dir = Path(args.output) if args.count > 1 else None
    if out_dir is None and args.count != 1:
        raise InputError("--count must be positive")
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    games, text = [], ""
    for i in range(args.count):
        g, o, space = random_simple_game(rng, args.max_vertices, args.max_mult, loops=False)
        lattice_text = format_poset(space.to_dag(), space.cover_labels())
        header = "".join(f"# edge {u} {v} {k}\n" for (u, v), k in g.mult.items())
        header += "".join(f"# chips {v} {n}\n" for v, n in sorted(o.items()))
        if out_dir is not None:
            (out_dir / f"lattice_{i:03d}.txt").write_text(header + lattice_text, encoding="utf-8")
            (out_dir / f"game_{i:03d}.graph").write_text(g.to_text(), encoding="utf-8")
            (out_dir / f"game_{i:03d}.config").write_text(format_config(o), encoding="utf-8")
        else:
            text = header + lattice_text
        games.append({"elements": len(space), "graph": [[u, v, k] for (u, v), k in g.mult.items()],
                      "initial": [[v, n] for v, n in sorted(o.items())], "lattice": lattice_text.splitlines()})
    if out_dir is not None:
        text = f"wrote {args.count} lattices to {out_dir}\n"
    return EXIT_OK, {"seed": args.seed, "games": games}, text


def cmd_dot(args) -> tuple[int, dict, str]:
    if args.graph:
        g, _ = load_game(_read(args.graph), _read(args.config) if args.config else "")
        dot = g.to_dot()
    else:
        lat = _load_lattice(args)
        try:
            labels = check_uld(lat).label
        except NotULDError:
            labels = {}
        lines = ["digraph L {"]
        lines += [f'  "{x}";' for x in lat.elements]
        for x, y in sorted(lat.covers):
            attr = f' [label="{labels[x, y]}"]' if (x, y) in labels else ""
            lines.append(f'  "{x}" -> "{y}"{attr};')
        dot = "\n".join(lines + ["}"]) + "\n"
    return EXIT_OK, {"dot": dot.splitlines()}, dot


COMMANDS = {
    "check-uld": (cmd_check_uld, "check that the input lattice is upper locally distributive"),
    "irreducibles": (cmd_irreducibles, "list meet/join-irreducibles and the U/L sets"),
    "systems": (cmd_systems, "dump the per-element inequality systems and Omega"),
    "recognize": (cmd_recognize, "decide membership and print a verified witness game"),
    "simulate": (cmd_simulate, "generate the configuration space of a game"),
    "verify": (cmd_verify, "check a game against a lattice"),
    "gen-random": (cmd_gen_random, "emit lattices of random simple games"),
    "dot": (cmd_dot, "DOT dump of a lattice or a game graph"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="lattice cover-list file (default: stdin)")
    common.add_argument("--output", "-o", help="output file (directory for gen-random with --count > 1)")
    common.add_argument("--format", choices=("text", "machine"), default="text")
    common.add_argument("--cap", type=int, default=None, help="configuration cap (default: $CFGKIT_CAP or 10^6)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--graph", help="game graph file, lines 'U V K'")
    common.add_argument("--config", help="configuration file, lines 'V N'")

    parser = argparse.ArgumentParser(prog="cfgkit", description="Chip-firing lattice recognition.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "recognize":
            p.add_argument("--model", choices=MODELS + ("all",), default="cfg")
        if name == "verify":
            p.add_argument("--model", choices=MODELS, default="cfg", help="structural rules to check")
        if name == "gen-random":
            p.add_argument("--count", type=int, default=1)
            p.add_argument("--max-vertices", type=int, default=5)
            p.add_argument("--max-mult", type=int, default=3)
    return parser


def _emit(args, data: dict, text: str) -> None:
    if args.format == "machine":
        text = json.dumps(data, sort_keys=True, indent=2) + "\n"
    if args.output and args.command != "gen-random":
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        code, data, text = fn(args)
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except NotULDError as exc:
        print(f"not ULD: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotALatticeError as exc:
        print(f"not a lattice: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PosetError, GameError, InputError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(args, data, text)
    return code


if __name__ == "__main__":
    sys.exit(main())
