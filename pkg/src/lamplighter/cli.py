"""Command-line front end: every analysis as a reproducible batch command.

Commands: wordlen, hamdiff, verdict, depth-profile, qh, export-graph.
Group specs are JSON files (see groups.parse_group_spec); lamplighter specs
are {"lamps": <group spec>, "base": <group spec>}.  Outputs are deterministic
functions of the spec.  Exit codes: 0 success, 2 usage error, 3 resource cap,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Dict, List, Optional, Sequence

from . import graphs, groups, hamiltonian, wreath
from .errors import ResourceCapError


class UsageError(Exception):
    pass


class VerificationError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON spec {path}: {exc}")


def _group_from_file(path: str) -> groups.GroupModel:
    try:
        return groups.parse_group_spec(_load_json(path))
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad group spec {path}: {exc}")


def _lamplighter_from_file(path: str) -> wreath.LamplighterModel:
    spec = _load_json(path)
    try:
        lamps = groups.parse_group_spec(spec["lamps"])
        base = groups.parse_group_spec(spec["base"])
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad lamplighter spec {path}: {exc}")
    return wreath.LamplighterModel(lamps, base)


def parse_payload_json(model: groups.GroupModel, obj) -> groups.Payload:
    """Element from JSON: int (finite index), list (abelian vector or
    free-product letter pairs), or string (payload_str syntax)."""
    if isinstance(obj, str):
        return model.parse_payload(obj)
    if isinstance(obj, int):
        return model.normalize_payload(obj)
    if isinstance(obj, list):
        if obj and isinstance(obj[0], list):
            return model.normalize_payload(tuple((f, x) for f, x in obj))
        return model.normalize_payload(tuple(obj))
    raise UsageError(f"cannot parse element {obj!r}")


def _element_from_spec(model: wreath.LamplighterModel, spec: dict) -> wreath.WreathState:
    try:
        lamps = {}
        for key, val in spec.get("lamps", []):
            lamps[parse_payload_json(model.base, key)] = parse_payload_json(model.lamps, val)
        pos = parse_payload_json(model.base, spec.get("position", model.base.payload_str(model.base.identity_payload())))
        return model.state(lamps, pos)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"malformed element spec: {exc}")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_wordlen(args) -> int:
    model = _lamplighter_from_file(args.group)
    element_spec = _load_json(args.element)
    g = _element_from_spec(model, element_spec)
    backend = wreath.backend_by_name(model, args.backend)
    wl = wreath.word_length(model, g, backend)
    lamps, pos = g
    support = sorted(k for k, _ in lamps)
    walk = wreath.ts_walk(model, pos, support, backend)
    lines = []
    if wl.exact:
        lines.append(f"{wl.value} exact")
    else:
        lines.append(f"<= {wl.value} upper-bound")
    names = " ".join(model.base.payload_str(p) for p in walk)
    lines.append(f"ts-walk: {names}")
    if args.verify:
        _verify_base_walk(model.base, walk, set(support), pos)
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _verify_base_walk(base, walk, support, pos) -> None:
    gens = set(base.gens.elements)
    for a, b in zip(walk, walk[1:]):
        if base.mul_payload(base.inv_payload(a), b) not in gens:
            raise VerificationError("walk step is not a generator")
    if walk[0] != base.identity_payload() or walk[-1] != base.normalize_payload(pos):
        raise VerificationError("walk endpoints wrong")
    if not support <= set(walk):
        raise VerificationError("walk misses support")


def cmd_hamdiff(args) -> int:
    specs: List[groups.FiniteModel] = []
    for path in args.group or []:
        model = _group_from_file(path)
        if not isinstance(model, groups.FiniteModel):
            raise UsageError(f"hamdiff needs finite group specs ({path})")
        specs.append(model)
    if args.cyclic_range:
        lo, hi = (int(x) for x in args.cyclic_range.split(":"))
        for n in range(lo, hi + 1):
            specs.append(groups.make_cyclic(n, [1]))
    if not specs:
        raise UsageError("no groups given (use --group or --cyclic-range)")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["group", "gens", "hamiltonian_difference", "ts_closed", "argmax"])
    for model in specs:
        h, closed, argmax, _ = hamiltonian.hamiltonian_difference_detail(model)
        gens = "+".join(model.payload_str(s) for s in model.gens.elements)
        writer.writerow([model.table.name, gens, h, closed, model.payload_str(argmax)])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_verdict(args) -> int:
    H = _group_from_file(args.H)
    K = _group_from_file(args.K)
    for path, model in ((args.H, H), (args.K, K)):
        if not isinstance(model, groups.FiniteModel):
            raise UsageError(f"verdict needs finite group specs ({path})")
    rep = wreath.theorem_b_verdict(H, K)
    case = None
    if H.table.is_abelian() and K.table.is_abelian():
        case, bounded = wreath.classify_abelian_free_product(H, K)
        if args.verify and bounded != rep.uniformly_bounded:
            raise VerificationError("classification disagrees with Theorem-B verdict")
    record = {
        "H": H.table.name,
        "K": K.table.name,
        "h_H": rep.h_first,
        "h_K": rep.h_second,
        "sum": rep.total,
        "verdict": "uniformly_bounded" if rep.uniformly_bounded else "unbounded",
        "case": case,
    }
    _emit(json.dumps(record, indent=1, sort_keys=True) + "\n", args.out)
    return 0


def cmd_depth_profile(args) -> int:
    model = _lamplighter_from_file(args.group)
    backend = wreath.backend_by_name(model, args.backend)
    profile = wreath.depth_profile(
        model, args.radius, args.kmax, backend=backend, cap=args.cap, partial_ok=True
    )
    dead_rows = [r for r in profile.rows if r.depth >= 1]
    retreat: Dict[str, str] = {}
    for row in dead_rows:
        g = _state_from_id(model, row.element_id)
        try:
            k, exact = wreath.retreat_depth(model, g, row.depth, backend)
            retreat[row.element_id] = str(k) if exact else f">{k - 1}"
        except ResourceCapError:
            retreat[row.element_id] = "cap"
    if args.format == "json":
        payload = {
            "radius": profile.radius,
            "k_max": profile.k_max,
            "complete": profile.complete,
            "rows": [
                {
                    "element": r.element_id,
                    "word_length": r.word_length,
                    "depth": r.depth,
                    "depth_exact": r.depth_exact,
                    "retreat_depth": retreat.get(r.element_id),
                }
                for r in profile.rows
            ],
            "max_depth_per_shell": profile.max_depth_per_shell(),
        }
        _emit(json.dumps(payload, indent=1, sort_keys=True) + "\n", args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["element_id", "word_length", "depth", "retreat_depth", "flags"])
        for r in profile.rows:
            flags = "exact" if r.depth_exact else "depth_lower_bound"
            if not profile.complete:
                flags += ",partial_enumeration"
            writer.writerow(
                [r.element_id, r.word_length, r.depth, retreat.get(r.element_id, ""), flags]
            )
        for shell, depth in profile.max_depth_per_shell().items():
            buf.write(f"# shell {shell} max_depth {depth}\n")
        _emit(buf.getvalue(), args.out)
    if args.verify:
        for row in dead_rows:
            g = _state_from_id(model, row.element_id)
            if not wreath.is_dead_end(model, g, backend):
                raise VerificationError(f"row {row.element_id} is not a dead end")
    return 0 if profile.complete else 3


def _state_from_id(model: wreath.LamplighterModel, element_id: str) -> wreath.WreathState:
    body, pos = element_id.rsplit(";", 1)
    lamps = {}
    if body != "-":
        for part in body.split("+"):
            val, key = part.split("@", 1)
            lamps[model.base.parse_payload(key)] = model.lamps.parse_payload(val)
    return model.state(lamps, model.base.parse_payload(pos))


def cmd_qh(args) -> int:
    model = _group_from_file(args.group)
    result = hamiltonian.qh_certificate(model, args.nmax, M=args.M, strategy=args.strategy)
    text = result.to_json() + "\n"
    if args.verify and isinstance(result, hamiltonian.QhCertificate):
        hamiltonian.verify_qh_certificate(model, result)
    _emit(text, args.out)
    return 0


def cmd_export_graph(args) -> int:
    if args.cube:
        dims = [int(x) for x in args.cube.split(",")]
        graph = graphs.cube_graph(dims)
        graph = graphs.FiniteGraph(
            graph.n, graph.adj, tuple(",".join(map(str, l)) for l in graph.labels)
        )
    else:
        model = _group_from_file(args.group)
        if args.radius is not None:
            graph = graphs.cayley_ball(model, args.radius).graph
        elif isinstance(model, groups.FiniteModel):
            graph = graphs.finite_cayley_graph(model)
        else:
            raise UsageError("infinite groups need --radius for export")
    if args.format == "adj":
        _emit(graph.to_adjacency_text(), args.out)
    else:
        _emit(graph.to_dot(), args.out)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lamplighter", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="write output to this path instead of stdout")
        sp.add_argument("--seed", type=int, default=0, help="seed for sampled scans")
        sp.add_argument("--verify", action="store_true", help="re-check emitted claims")

    sp = sub.add_parser("wordlen", help="word length of a lamplighter element")
    sp.add_argument("--group", required=True, help="lamplighter spec JSON")
    sp.add_argument("--element", required=True, help="element JSON (lamps, position)")
    sp.add_argument("--backend", default="auto",
                    choices=["auto", "finite", "tree", "petal", "box", "generic"])
    common(sp)
    sp.set_defaults(func=cmd_wordlen)

    sp = sub.add_parser("hamdiff", help="Hamiltonian difference table")
    sp.add_argument("--group", action="append", help="finite group spec JSON (repeatable)")
    sp.add_argument("--cyclic-range", help="A:B adds cyclic groups Z/nZ, n in [A,B]")
    sp.add_argument("--format", default="csv", choices=["csv"])
    common(sp)
    sp.set_defaults(func=cmd_hamdiff)

    sp = sub.add_parser("verdict", help="free-product depth dichotomy verdict")
    sp.add_argument("--H", required=True)
    sp.add_argument("--K", required=True)
    sp.add_argument("--format", default="json", choices=["json"])
    common(sp)
    sp.set_defaults(func=cmd_verdict)

    sp = sub.add_parser("depth-profile", help="depth of every element in a ball")
    sp.add_argument("--group", required=True, help="lamplighter spec JSON")
    sp.add_argument("--radius", type=int, required=True)
    sp.add_argument("--kmax", type=int, default=8)
    sp.add_argument("--backend", default="auto",
                    choices=["auto", "finite", "tree", "petal", "box", "generic"])
    sp.add_argument("--cap", type=int, help="state cap (default 2e6)")
    sp.add_argument("--format", default="csv", choices=["csv", "json"])
    common(sp)
    sp.set_defaults(func=cmd_depth_profile)

    sp = sub.add_parser("qh", help="quasi-Hamiltonian certificate or refutation")
    sp.add_argument("--group", required=True)
    sp.add_argument("--nmax", type=int, required=True)
    sp.add_argument("--M", type=int, default=2)
    sp.add_argument("--strategy", default="auto",
                    choices=["auto", "abelian-box", "ball-exact", "cube", "refute"])
    common(sp)
    sp.set_defaults(func=cmd_qh)

    sp = sub.add_parser("export-graph", help="DOT/adjacency export of a graph")
    sp.add_argument("--group")
    sp.add_argument("--radius", type=int)
    sp.add_argument("--cube", help="comma-separated dims, e.g. 4,3")
    sp.add_argument("--format", default="dot", choices=["dot", "adj"])
    common(sp)
    sp.set_defaults(func=cmd_export_graph)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 3
    except (VerificationError, AssertionError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
