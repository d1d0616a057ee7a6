"""Command-line interface: solver, verification and figure-data commands.

Every command prints human-readable text by default and a machine-readable
JSON envelope with ``--json``. Envelopes carry ``schema_version``, the
command name, a full parameter echo and provenance (tool version plus seed
and grid sizes where applicable), so outputs are reproducible byte for byte
given the same flags. Numbers are printed with 12 significant digits.

Exit codes: 0 success, 1 verification-tolerance failure, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    BudgetProblem,
    influence_ratio,
    required_ratio,
    sweep,
    value_partial_B,
    value_partial_u,
    weapons_mix,
)
from .multistage import Field, MultistageInstance, bounds, phi, phi_dagger, psi, psi_dagger
from .single_field import (
    Atom,
    BlueStrategy,
    GameParams,
    MixedAllocation,
    Solution,
    game_value,
    solve,
)
from .verification import SimConfig, blue_best_response, monte_carlo_value, red_best_response

SCHEMA_VERSION = "1"
BLUE_RED_GAP_TOL = 0.01

FIGURE_COLUMNS = {
    1: ("u", "ratio", "value"),
    2: ("ratio", "u", "value"),
    3: ("ratio", "u", "value"),
    4: ("x", "psi", "psi_dagger"),
    5: ("x", "phi", "phi_dagger"),
    6: ("ratio", "lower", "upper"),
    7: ("B", "u", "ir"),
    8: ("ratio", "u", "value"),
    9: ("D", "c", "value", "u_star", "B_star", "unused"),
}


def _fmt(x) -> str:
    return f"{x:.12g}" if isinstance(x, float) else str(x)


def _round12(obj):
    """Round floats to 12 significant digits recursively, for stable JSON."""
    if isinstance(obj, float):
        return obj if math.isinf(obj) or math.isnan(obj) else float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def envelope(command: str, params: dict, result: dict, provenance: dict | None = None) -> dict:
    prov = {"version": __version__}
    prov.update(provenance or {})
    return _round12(
        {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "params": params,
            "result": result,
            "provenance": prov,
        }
    )


def validate_envelope(obj: dict) -> dict:
    """Check the documented envelope schema; raises ValueError on violations."""
    if not isinstance(obj, dict):
        raise ValueError("envelope must be a JSON object")
    for key, typ in (
        ("schema_version", str),
        ("command", str),
        ("params", dict),
        ("result", dict),
        ("provenance", dict),
    ):
        if not isinstance(obj.get(key), typ):
            raise ValueError(f"envelope field {key!r} missing or of wrong type")
    if obj["schema_version"] != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {obj['schema_version']!r}")
    if "version" not in obj["provenance"]:
        raise ValueError("envelope provenance must carry the tool version")
    return obj


def _emit(out, obj: dict) -> None:
    print(json.dumps(obj, indent=2), file=out)


def _alloc_json(alloc: MixedAllocation) -> list[dict]:
    parts = []
    for w, comp in alloc.components:
        if isinstance(comp, Atom):
            parts.append({"weight": w, "atom": comp.point})
        else:
            parts.append({"weight": w, "uniform": [comp.lo, comp.hi]})
    return parts


def _alloc_text(alloc: MixedAllocation) -> str:
    def one(comp):
        if isinstance(comp, Atom):
            return f"atom {_fmt(comp.point)}"
        return f"U[{_fmt(comp.lo)}, {_fmt(comp.hi)}]"

    if len(alloc.components) == 1:
        return one(alloc.components[0][1])
    return "{" + ", ".join(f"{_fmt(w)}: {one(c)}" for w, c in alloc.components) + "}"


def _blue_json(blue: BlueStrategy) -> dict:
    return {
        "call": {"breakpoints": list(blue.call.breakpoints), "values": list(blue.call.values)},
        "fallback": _alloc_json(blue.fallback),
    }


def _solution_result(sol: Solution) -> dict:
    result = {
        "case": sol.case.value,
        "value": sol.value,
        "red": _alloc_json(sol.red),
        "blue": _blue_json(sol.blue),
    }
    for name, val in (("p", sol.p), ("q", sol.q), ("C", sol.big_c)):
        if val is not None:
            result[name] = val
    return result


def _params_dict(params: GameParams) -> dict:
    return {
        "blue": params.blue_budget,
        "red": params.red_budget,
        "u": params.detect_prob,
    }


def _threads_default(args) -> int:
    env = os.environ.get("LOTTO_SCOUTS_THREADS")
    if env is not None:
        return max(1, int(env))
    if args.threads is not None:
        return max(1, args.threads)
    return os.cpu_count() or 1


def cmd_solve(args, out) -> int:
    params = GameParams(args.blue, args.red, args.u)
    sol = solve(params)
    if args.json:
        _emit(out, envelope("solve", _params_dict(params), _solution_result(sol)))
        return 0
    print(f"case   {sol.case.value}", file=out)
    print(f"value  {_fmt(sol.value)}", file=out)
    print(f"red    X* ~ {_alloc_text(sol.red)}", file=out)
    call = sol.blue.call
    call_txt = (
        f"t = {_fmt(call.values[0])}"
        if not call.breakpoints
        else f"piecewise t with {len(call.values)} pieces"
    )
    print(f"blue   call {call_txt}; fallback Z* ~ {_alloc_text(sol.blue.fallback)}", file=out)
    for name, val in (("p", sol.p), ("q", sol.q), ("C", sol.big_c)):
        if val is not None:
            print(f"{name}      {_fmt(val)}", file=out)
    return 0


def cmd_value(args, out) -> int:
    params = GameParams(args.blue, args.red, args.u)
    value = game_value(params)
    if args.json:
        _emit(out, envelope("value", _params_dict(params), {"value": value}))
        return 0
    print(_fmt(value), file=out)
    return 0


def cmd_verify(args, out) -> int:
    params = GameParams(args.blue, args.red, args.u)
    if args.plays < 1:
        raise ValueError(f"--plays must be >= 1, got {args.plays}")
    threads = _threads_default(args)
    sol = solve(params)
    value = game_value(params)
    mc = monte_carlo_value(
        sol.blue, sol.red, params.detect_prob, SimConfig(args.plays, args.seed), threads=threads
    )
    sigma3 = 3.0 * math.sqrt(0.25 / args.plays)
    _, blue_rep = blue_best_response(
        sol.red, params.detect_prob, params.blue_budget, args.grid, reference_value=value
    )
    _, red_rep = red_best_response(
        sol.blue, params.detect_prob, params.red_budget, args.grid, reference_value=value
    )
    ok = abs(mc - value) <= sigma3 and blue_rep.gap <= BLUE_RED_GAP_TOL and red_rep.gap <= BLUE_RED_GAP_TOL
    if args.json:
        result = {
            "value": value,
            "monte_carlo": mc,
            "monte_carlo_tolerance": sigma3,
            "blue_gap": blue_rep.gap,
            "red_gap": red_rep.gap,
            "gap_tolerance": BLUE_RED_GAP_TOL,
            "pass": ok,
        }
        prov = {"seed": args.seed, "plays": args.plays, "grid": args.grid, "threads": threads}
        _emit(out, envelope("verify", _params_dict(params), result, prov))
    else:
        print(f"closed-form value  {_fmt(value)}", file=out)
        print(
            f"monte-carlo value  {_fmt(mc)} (n={args.plays}, seed={args.seed}, "
            f"3-sigma {_fmt(sigma3)})",
            file=out,
        )
        print(f"blue oracle gap    {_fmt(blue_rep.gap)} (grid={args.grid})", file=out)
        print(f"red oracle gap     {_fmt(red_rep.gap)} (grid={args.grid})", file=out)
        print("PASS" if ok else "FAIL", file=out)
    return 0 if ok else 1


def _read_fields_csv(path: str) -> tuple[Field, ...]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"w", "u"} <= set(reader.fieldnames):
                raise ValueError(f"fields file {path!r} needs a header with columns w,u")
            fields = tuple(Field(float(row["w"]), float(row["u"])) for row in reader)
    except OSError as exc:
        raise ValueError(f"cannot read fields file {path!r}: {exc}") from exc
    except (TypeError, KeyError) as exc:
        raise ValueError(f"malformed fields file {path!r}: {exc}") from exc
    if not fields:
        raise ValueError(f"fields file {path!r} contains no rows")
    return fields


def cmd_multistage(args, out) -> int:
    fields = _read_fields_csv(args.fields)
    try:
        inst = MultistageInstance(args.blue, args.red, fields)
    except ValueError as exc:
        if "sum to 1" in str(exc):
            raise ValueError(f"{exc}; the game requires the field worths to sum to 1") from exc
        raise
    res = bounds(inst)
    if args.json:
        result = {
            "lower": res.lower,
            "upper": res.upper,
            "coincide": res.coincide,
            "coincide_reasons": list(res.coincide_reasons),
            "red_upper_allocation": list(res.red_upper_allocation),
            "dagger_allocation": [list(pair) for pair in res.dagger_allocation],
        }
        params = {
            "blue": args.blue,
            "red": args.red,
            "fields": [{"w": f.worth, "u": f.detect_prob} for f in fields],
        }
        _emit(out, envelope("multistage", params, result))
        return 0
    print(f"lower     {_fmt(res.lower)}", file=out)
    print(f"upper     {_fmt(res.upper)}", file=out)
    print(f"coincide  {res.coincide} ({', '.join(res.coincide_reasons)})", file=out)
    print(
        "red upper-bound split   " + ", ".join(_fmt(x) for x in res.red_upper_allocation),
        file=out,
    )
    print(
        "surrogate split (B, R)  "
        + ", ".join(f"({_fmt(b)}, {_fmt(r)})" for b, r in res.dagger_allocation),
        file=out,
    )
    return 0


def cmd_influence(args, out) -> int:
    params = GameParams(args.blue, args.red, args.u)
    ir = influence_ratio(args.blue, args.red, args.u)
    vu = value_partial_u(args.blue, args.red, args.u)
    vb = value_partial_B(args.blue, args.red, args.u)
    if args.json:
        result = {"influence_ratio": ir, "value_partial_u": vu, "value_partial_B": vb}
        _emit(out, envelope("influence", _params_dict(params), result))
        return 0
    print(f"influence ratio  {_fmt(ir)}", file=out)
    print(f"dV/du            {_fmt(vu)}", file=out)
    print(f"dV/dB            {_fmt(vb)}", file=out)
    return 0


def cmd_contour(args, out) -> int:
    ratio = required_ratio(args.value, args.u)
    if args.json:
        params = {"value": args.value, "u": args.u}
        _emit(out, envelope("contour", params, {"required_ratio": ratio}))
        return 0
    print(_fmt(ratio), file=out)
    return 0


def cmd_budget(args, out) -> int:
    mix = weapons_mix(BudgetProblem(args.budget, args.cost))
    if args.json:
        params = {"budget": args.budget, "cost": args.cost}
        result = {
            "value": mix.value,
            "blue_budget": mix.blue_budget,
            "info": mix.info,
            "unused": mix.unused,
        }
        _emit(out, envelope("budget", params, result))
        return 0
    print(f"value   {_fmt(mix.value)}", file=out)
    print(f"B*      {_fmt(mix.blue_budget)}", file=out)
    print(f"u*      {_fmt(mix.info)}", file=out)
    print(f"unused  {_fmt(mix.unused)}", file=out)
    return 0


def _write_csv(path: Path, columns: tuple[str, ...], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(float(v)) for v in row])


def _figure_files(fig: int, outdir: Path, points: int | None) -> list[Path]:
    """Compute and write the data files for one figure; returns the paths."""
    written: list[Path] = []

    def emit(name: str, columns, rows) -> None:
        path = outdir / name
        _write_csv(path, columns, rows)
        written.append(path)

    if fig == 1:  # value against the resource ratio, one family per u
        n = points or 301
        table = sweep("value_vs_ratio", us=[0.0, 0.25, 0.5, 0.75, 1.0], ratios=np.linspace(0.0, 3.0, n))
        emit("fig1.csv", table.columns, table.rows)
    elif fig == 2:  # value against information, one family per ratio
        n = points or 201
        table = sweep("value_vs_u", ratios=[0.25, 0.5, 0.75, 1.0, 1.5, 2.0], us=np.linspace(0.0, 1.0, n))
        emit("fig2.csv", table.columns, table.rows)
    elif fig == 3:  # value heatmap
        n = points or 151
        table = sweep("value_heatmap", ratios=np.linspace(0.0, 3.0, n), us=np.linspace(0.0, 1.0, (2 * n) // 3))
        emit("fig3.csv", table.columns, table.rows)
    elif fig in (4, 5):  # reciprocal payoff curve / payoff curve and their envelopes
        n = points or 300
        for u in (0.4, 0.7):
            f = Field(1.0, u)
            if fig == 4:
                xs = np.linspace(0.02, 6.0, n)
                rows = [(x, psi(x, f), psi_dagger(x, f)) for x in xs]
            else:
                xs = np.linspace(0.0, 3.0, n)
                rows = [(x, phi(x, f), phi_dagger(x, f)) for x in xs]
            emit(f"fig{fig}_u{u}.csv", FIGURE_COLUMNS[fig], rows)
    elif fig == 6:  # multistage bounds for the two three-field families
        n = points or 599
        families = {"a": (0.3, 0.4, 0.5), "b": (0.31, 0.33, 0.35)}
        for tag, us in families.items():
            fields = tuple(Field(1.0 / 3.0, u) for u in us)
            rows = []
            for ratio in np.linspace(0.005, 3.0, n):
                res = bounds(MultistageInstance(float(ratio), 1.0, fields))
                rows.append((float(ratio), res.lower, res.upper))
            emit(f"fig6_{tag}.csv", FIGURE_COLUMNS[6], rows)
    elif fig == 7:  # influence-ratio heatmap (u < 1 keeps the ratio finite)
        n = points or 201
        table = sweep("ir_heatmap", bs=np.linspace(0.0, 3.0, n), us=np.linspace(0.0, 0.99, n // 2))
        emit("fig7.csv", table.columns, table.rows)
    elif fig == 8:  # value surface for the contour plot
        n = points or 201
        table = sweep("contours", ratios=np.linspace(0.0, 2.0, n), us=np.linspace(0.0, 1.0, n // 2))
        emit("fig8.csv", table.columns, table.rows)
    elif fig == 9:  # weapons-mix curves per information cost
        n = points or 150
        table = sweep("budget_curves", cs=[0.5, 0.9, 2.0, 5.0, 100.0], ds=np.linspace(0.02, 3.0, n))
        emit("fig9.csv", table.columns, table.rows)
    else:
        raise ValueError(f"figure id must be in 1..9, got {fig}")
    return written


def cmd_figure_data(args, out) -> int:
    outdir = Path(args.out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        probe = outdir / ".write_probe"
        probe.touch()
        probe.unlink()
    except OSError as exc:
        raise ValueError(f"output directory {args.out!r} is not writable: {exc}") from exc
    if args.figure == "all":
        figures = list(range(1, 10))
    else:
        try:
            figures = [int(args.figure)]
        except ValueError as exc:
            raise ValueError(f"--figure must be 1..9 or 'all', got {args.figure!r}") from exc
    written: list[Path] = []
    for fig in figures:
        written.extend(_figure_files(fig, outdir, args.points))
    if args.json:
        result = {"files": [str(p) for p in written]}
        prov = {"points": args.points}
        _emit(out, envelope("figure-data", {"figure": args.figure, "out": args.out}, result, prov))
        return 0
    for p in written:
        print(p, file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lotto-scouts",
        description="General Lotto games with scouts: exact values, certified strategies, analyses.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_game_params(p):
        p.add_argument("--blue", type=float, required=True, help="Blue's budget B")
        p.add_argument("--red", type=float, required=True, help="Red's budget R")
        p.add_argument("--u", type=float, required=True, help="detection probability u")

    p = sub.add_parser("solve", help="optimal strategies and value for one instance")
    add_game_params(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("value", help="game value only")
    add_game_params(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("verify", help="Monte Carlo and best-response certification")
    add_game_params(p)
    p.add_argument("--grid", type=int, default=2000, help="oracle grid size (>= 100)")
    p.add_argument("--plays", type=int, default=1_000_000, help="Monte Carlo play-outs")
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")
    p.add_argument("--threads", type=int, default=None, help="Monte Carlo worker threads")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("multistage", help="value bounds for a multi-field instance")
    p.add_argument("--blue", type=float, required=True)
    p.add_argument("--red", type=float, required=True)
    p.add_argument("--fields", required=True, help="CSV file with columns w,u")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_multistage)

    p = sub.add_parser("influence", help="influence ratio and value derivatives")
    add_game_params(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_influence)

    p = sub.add_parser("contour", help="resource ratio required to reach a target value")
    p.add_argument("--value", type=float, required=True)
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_contour)

    p = sub.add_parser("budget", help="optimal split of a budget between resources and information")
    p.add_argument("--budget", type=float, required=True, help="total budget D")
    p.add_argument("--cost", type=float, required=True, help="cost c per unit of information")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("figure-data", help="write the CSV data behind the standard figures")
    p.add_argument("--figure", required=True, help="figure id 1..9, or 'all'")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--points", type=int, default=None, help="override the per-axis resolution")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_figure_data)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
