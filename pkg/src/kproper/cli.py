"""Batch command line interface.

Subcommands mirror the library: fan validation and symmetries, divisor
positivity, moment polytope data, alpha invariants, intersection numbers,
properness checks and certified parameter sweeps.  All rational values are
read and written in canonical "p/q" form; verdicts are data, so the exit
code is 0 for any completed analysis and nonzero only for input or
processing errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import alpha as alpha_mod
from . import picard as picard_mod
from . import polytope as polytope_mod
from . import properness as prop_mod
from . import toric as toric_mod
from .rationals import InputError, KProperError, format_rational, parse_rational


def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(
            f"invalid JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        )


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def load_fan(source: str) -> toric_mod.Fan:
    if source in toric_mod.BUILTIN_FANS:
        return toric_mod.BUILTIN_FANS[source]()
    if os.path.exists(source):
        return toric_mod.fan_from_json(_read_json(source))
    raise InputError(f'unknown fan "{source}": not a builtin (p2, dp6) and not a file')


def load_coeffs(fan: toric_mod.Fan, source: str) -> toric_mod.ToricDivisor:
    if os.path.exists(source):
        return toric_mod.divisor_from_json(fan, _read_json(source))
    parts = [s.strip() for s in source.split(",")]
    coeffs = tuple(parse_rational(p, where=f"coeffs[{i}]") for i, p in enumerate(parts))
    return toric_mod.ToricDivisor(fan, coeffs)


def load_picard_class(source: str) -> picard_mod.PicardClass:
    if os.path.exists(source):
        return picard_mod.picard_class_from_json(_read_json(source))
    parts = [s.strip() for s in source.split(",")]
    coords = tuple(parse_rational(p, where=f"coords[{i}]") for i, p in enumerate(parts))
    return picard_mod.PicardClass(picard_mod.BlowupSurface(len(coords) - 1), coords)


def load_slice(path: str) -> prop_mod.AbstractSlice:
    data = _read_json(path)
    try:
        curves = tuple(
            prop_mod.SliceCurve(
                name=str(c.get("name", f"test curve {i}")),
                l_pairing=parse_rational(c["L"], where=f"test_curves[{i}].L"),
                k_pairing=parse_rational(c["K"], where=f"test_curves[{i}].K"),
            )
            for i, c in enumerate(data["test_curves"])
        )
        return prop_mod.AbstractSlice(
            n=int(data["n"]),
            l_pow_n=parse_rational(data["l_pow_n"], where="l_pow_n"),
            k_dot_l_nm1=parse_rational(data["k_dot_l_nm1"], where="k_dot_l_nm1"),
            k_pow_n=parse_rational(data["k_pow_n"], where="k_pow_n"),
            test_curves=curves,
        )
    except KeyError as exc:
        raise InputError(f"slice JSON is missing field {exc}")


def _approx(value: Fraction) -> str:
    return f"{float(value):.6g}"


def _fmt_value(text: str, approx: bool) -> str:
    if not approx:
        return text
    try:
        q = parse_rational(text)
    except KProperError:
        return text
    return f"{text} (~{_approx(q)})"


def render_report(report, fmt: str = "json", approx: bool = False) -> str:
    """Render a properness or feasibility report; JSON output round-trips."""
    if isinstance(report, prop_mod.PropernessReport):
        if fmt == "json":
            return _dump_json(prop_mod.report_to_json(report))
        lines = [f"mode: {report.mode}", f"backend: {report.backend}"]
        if report.alpha is not None:
            lines.append(
                f"alpha: {_fmt_value(format_rational(report.alpha), approx)}"
                f" [{report.alpha_provenance}]"
            )
        if report.mu is not None:
            lines.append(f"mu: {_fmt_value(format_rational(report.mu), approx)}")
        for cond in report.conditions:
            status = "PASS" if cond.holds else "FAIL"
            detail = ", ".join(f"{k}={_fmt_value(v, approx)}" for k, v in sorted(cond.values.items()))
            line = f"{cond.name}: {status}  {cond.description}"
            if detail:
                line += f"  [{detail}]"
            if cond.binding and not cond.holds:
                line += f"  binding: {cond.binding}"
            lines.append(line)
        for note in report.notes:
            lines.append(f"note: {note}")
        lines.append(f"verdict: {report.verdict}")
        lines.append(f"scope: {report.scope}")
        return "\n".join(lines) + "\n"
    if isinstance(report, prop_mod.FeasibilityReport):
        if fmt == "json":
            return _dump_json(prop_mod.feasibility_report_to_json(report))
        lines = [
            f"family: {report.family}  epsilon: {format_rational(report.epsilon)}",
            f"grid: [{format_rational(report.lambda_min)}, {format_rational(report.lambda_max)}]"
            f" step {format_rational(report.step)}"
            f" refine_tol {format_rational(report.refine_tol)}",
        ]
        if not report.windows:
            lines.append("no feasible lambda window found")
        for w in report.windows:
            lines.append(
                "feasible window: lo in "
                f"[{format_rational(w.lo_bracket[0])}, {format_rational(w.lo_bracket[1])}],"
                " hi in "
                f"[{format_rational(w.hi_bracket[0])}, {format_rational(w.hi_bracket[1])}],"
                f" witness (lambda={format_rational(w.witness_lambda)},"
                f" a={format_rational(w.witness_a)})"
            )
        for c in report.endpoint_checks:
            status = "confirmed" if c.confirmed else "NOT confirmed"
            lines.append(
                f"conjectured {c.side} endpoint {format_rational(c.endpoint)}: {status}"
            )
        for key, value in sorted(report.diagnostics.items()):
            lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"
    raise InputError(f"cannot render {type(report).__name__}")


def parse_report(text: str):
    """Inverse of render_report for JSON output."""
    data = json.loads(text)
    if data.get("kind") == "properness-report":
        return prop_mod.report_from_json(data)
    if data.get("kind") == "feasibility-report":
        return prop_mod.feasibility_report_from_json(data)
    raise InputError("unrecognized report JSON")


def _emit(args, data: dict, text_lines) -> None:
    if args.format == "json":
        sys.stdout.write(_dump_json(data))
    else:
        sys.stdout.write("\n".join(text_lines) + "\n")


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_fan_validate(args) -> int:
    fan = load_fan(args.fan)
    check = toric_mod.validate_fan(fan)
    _emit(
        args,
        {"smooth": check.smooth, "complete": check.complete},
        [f"smooth: {check.smooth}", f"complete: {check.complete}"],
    )
    return 0


def _cmd_fan_autos(args) -> int:
    fan = load_fan(args.fan)
    autos = toric_mod.fan_automorphisms(fan)
    data = {"order": len(autos), "matrices": [[list(row) for row in g] for g in autos]}
    _emit(args, data, [f"order: {len(autos)}"] + [str([list(r) for r in g]) for g in autos])
    return 0


def _cmd_divisor_ample(args) -> int:
    fan = load_fan(args.fan)
    d = load_coeffs(fan, args.coeffs)
    data = {"ample": toric_mod.is_ample(d), "nef": toric_mod.is_nef(d)}
    _emit(args, data, [f"ample: {data['ample']}", f"nef: {data['nef']}"])
    return 0


def _cmd_polytope_info(args) -> int:
    if args.coeffs is not None:
        fan = load_fan(args.source)
        p = toric_mod.moment_polytope(load_coeffs(fan, args.coeffs))
    else:
        p = polytope_mod.polytope_from_json(_read_json(args.source))
    verts = polytope_mod.vertices(p)
    vol = polytope_mod.volume(p)
    data = {
        "vertices": [[format_rational(x) for x in v] for v in verts],
        "volume": format_rational(vol),
        "affine_dim": polytope_mod.affine_dimension(p),
        "boundary_measure": None,
        "barycenter": None,
    }
    if p.dim == 2 and vol > 0:
        data["boundary_measure"] = format_rational(polytope_mod.boundary_measure(p))
    if vol > 0:
        data["barycenter"] = [format_rational(x) for x in polytope_mod.barycenter(p)]
    lines = [
        f"vertices: {data['vertices']}",
        f"volume: {_fmt_value(data['volume'], args.approx)}",
        f"affine_dim: {data['affine_dim']}",
        f"boundary_measure: {data['boundary_measure']}",
        f"barycenter: {data['barycenter']}",
    ]
    _emit(args, data, lines)
    return 0


def load_group_matrices(path: str):
    data = _read_json(path)
    if not isinstance(data, dict) or "matrices" not in data:
        raise InputError('group JSON must be an object with a "matrices" list')
    try:
        return tuple(
            tuple(tuple(int(x) for x in row) for row in g) for g in data["matrices"]
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed group matrices: {exc}") from exc


def _cmd_alpha(args) -> int:
    fan = load_fan(args.fan)
    d = load_coeffs(fan, args.coeffs)
    explicit = None
    if args.group == "explicit":
        if args.group_file is None:
            raise InputError("--group explicit needs --group-file with the matrix list")
        explicit = load_group_matrices(args.group_file)
    ctx = alpha_mod.symmetry_context(d, args.group, explicit_group=explicit)
    value = alpha_mod.alpha_invariant(ctx)
    data = {
        "alpha": format_rational(value),
        "group_mode": args.group,
        "stabilizer_order": len(ctx.stabilizer) if ctx.stabilizer else 1,
        "scope": prop_mod.SCOPE_G,
        "oracle": None,
        "oracle_depth": None,
    }
    if args.oracle_depth is not None:
        data["oracle"] = format_rational(alpha_mod.alpha_oracle(ctx, args.oracle_depth))
        data["oracle_depth"] = args.oracle_depth
    lines = [
        f"alpha: {_fmt_value(data['alpha'], args.approx)}",
        f"group_mode: {args.group} (stabilizer order {data['stabilizer_order']})",
    ]
    if data["oracle"] is not None:
        lines.append(
            f"oracle (depth {args.oracle_depth}): {_fmt_value(data['oracle'], args.approx)}"
        )
    _emit(args, data, lines)
    return 0


def _cmd_intersect(args) -> int:
    fan = load_fan(args.fan)
    d = load_coeffs(fan, args.coeffs)
    minus_k = toric_mod.anticanonical_divisor(fan)
    d_sq = toric_mod.intersection_number(d, d)
    kd = toric_mod.intersection_number(minus_k, d)
    data = {
        "self_intersection": format_rational(d_sq),
        "anticanonical_pairing": format_rational(kd),
        "mu": None,
        "rbar": None,
    }
    if toric_mod.is_ample(d):
        slopes = toric_mod.slope_quantities(d)
        data["mu"] = format_rational(slopes.mu)
        data["rbar"] = None if slopes.rbar is None else format_rational(slopes.rbar)
    lines = [
        f"D.D: {_fmt_value(data['self_intersection'], args.approx)}",
        f"-K.D: {_fmt_value(data['anticanonical_pairing'], args.approx)}",
        f"mu: {data['mu']}",
        f"rbar: {data['rbar']}",
    ]
    _emit(args, data, lines)
    return 0


def _make_backend(args):
    source = args.builtin or args.fan
    if source is None:
        raise InputError("check needs --builtin or --fan")
    if source == "dp1" or (args.builtin is None and args.picard):
        if args.coeffs is None:
            raise InputError("check on a Picard backend needs --coeffs (d, m_1, ..., m_r)")
        return load_picard_class(args.coeffs)
    fan = load_fan(source)
    if args.coeffs is None:
        raise InputError("check on a toric backend needs --coeffs")
    return load_coeffs(fan, args.coeffs)


def _alpha_source(args):
    if args.alpha is not None:
        return prop_mod.SuppliedAlpha(
            parse_rational(args.alpha, where="--alpha"), label="supplied value (CLI)"
        )
    return prop_mod.StabilizerAlpha(group_mode=args.group)


def _cmd_check(args) -> int:
    if args.mode == "negative-c1":
        if args.slice is None:
            backend = _make_backend(args)
        else:
            backend = load_slice(args.slice)
        report = prop_mod.check_negative_c1(backend)
    elif args.mode == "fano":
        backend = _make_backend(args)
        report = prop_mod.check_fano(backend, _alpha_source(args))
    else:
        backend = _make_backend(args)
        setup = prop_mod.KClassSetup(
            backend=backend,
            epsilon=parse_rational(args.epsilon, where="--epsilon"),
            alpha_source=_alpha_source(args),
        )
        report = prop_mod.check_properness(setup)
    sys.stdout.write(render_report(report, args.format, args.approx))
    return 0


def _cmd_sweep(args) -> int:
    config = _read_json(args.config)
    name = config.get("family")
    if name not in prop_mod.BUILTIN_FAMILIES:
        raise InputError(f'unknown family "{name}"; expected one of {sorted(prop_mod.BUILTIN_FAMILIES)}')
    family = prop_mod.BUILTIN_FAMILIES[name]()
    parallel = args.parallel
    env = os.environ.get("KPROPER_PARALLEL")
    if env is not None:
        parallel = env.strip().lower() in {"1", "true", "yes", "on"}
    report = prop_mod.sweep_lambda(
        family,
        lambda_min=parse_rational(config.get("lambda_min"), where="lambda_min"),
        lambda_max=parse_rational(config.get("lambda_max"), where="lambda_max"),
        step=parse_rational(config.get("step"), where="step"),
        refine_tol=parse_rational(config.get("refine_tol"), where="refine_tol"),
        epsilon=parse_rational(config.get("epsilon", "1"), where="epsilon"),
        conjectured_endpoints=tuple(
            parse_rational(e, where=f"conjectured_endpoints[{i}]")
            for i, e in enumerate(config.get("conjectured_endpoints", []))
        ),
        parallel=parallel,
    )
    sys.stdout.write(render_report(report, args.format, args.approx))
    return 0


def _cmd_picard_curves(args) -> int:
    curves = picard_mod.exceptional_curves(args.r)
    census = picard_mod.curve_census(args.r)
    data = {
        "r": args.r,
        "count": len(curves),
        "census": {str(d): census[d] for d in sorted(census)},
        "classes": [[format_rational(x) for x in c.coords] for c in curves],
    }
    lines = [f"r: {args.r}", f"count: {len(curves)}", f"census by degree: {data['census']}"]
    _emit(args, data, lines)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kproper",
        description="Exact properness checks for the K-energy on toric surfaces "
        "and blowups of the projective plane.",
    )
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument(
        "--approx",
        action="store_true",
        help="add non-authoritative decimal approximations to text output",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fan = sub.add_parser("fan", help="fan validation and symmetries")
    fan_sub = fan.add_subparsers(dest="fan_command", required=True)
    fv = fan_sub.add_parser("validate")
    fv.add_argument("fan", help="builtin name (p2, dp6) or fan JSON file")
    fv.set_defaults(handler=_cmd_fan_validate)
    fa = fan_sub.add_parser("autos")
    fa.add_argument("fan")
    fa.set_defaults(handler=_cmd_fan_autos)

    da = sub.add_parser("divisor", help="divisor positivity")
    da_sub = da.add_subparsers(dest="divisor_command", required=True)
    amp = da_sub.add_parser("ample")
    amp.add_argument("fan")
    amp.add_argument("--coeffs", required=True, help="inline list or divisor JSON file")
    amp.set_defaults(handler=_cmd_divisor_ample)

    pi = sub.add_parser("polytope", help="moment polytope data")
    pi_sub = pi.add_subparsers(dest="polytope_command", required=True)
    info = pi_sub.add_parser("info")
    info.add_argument("source", help="fan (with --coeffs) or polytope JSON file")
    info.add_argument("--coeffs")
    info.set_defaults(handler=_cmd_polytope_info)

    al = sub.add_parser("alpha", help="alpha invariant of an ample toric class")
    al.add_argument("fan")
    al.add_argument("--coeffs", required=True)
    al.add_argument("--group", choices=("full", "torus", "explicit"), default="full")
    al.add_argument("--group-file", dest="group_file", help="matrix list for --group explicit")
    al.add_argument("--oracle-depth", type=int, dest="oracle_depth")
    al.set_defaults(handler=_cmd_alpha)

    it = sub.add_parser("intersect", help="intersection numbers and slopes")
    it.add_argument("fan")
    it.add_argument("--coeffs", required=True)
    it.set_defaults(handler=_cmd_intersect)

    ck = sub.add_parser("check", help="properness criteria")
    ck.add_argument("--builtin", choices=("p2", "dp6", "dp1"))
    ck.add_argument("--fan", help="fan JSON file (toric backend)")
    ck.add_argument("--picard", action="store_true", help="treat --coeffs as Picard coords")
    ck.add_argument("--coeffs")
    ck.add_argument("--slice", help="abstract slice JSON file (negative-c1 mode)")
    ck.add_argument("--epsilon", default="1")
    ck.add_argument("--alpha", help="supplied alpha value for the class")
    ck.add_argument("--group", choices=("full", "torus"), default="full")
    ck.add_argument(
        "--mode", choices=("epsilon-criterion", "fano", "negative-c1"),
        default="epsilon-criterion",
    )
    ck.set_defaults(handler=_cmd_check)

    sw = sub.add_parser("sweep", help="certified lambda sweep from a JSON config")
    sw.add_argument("--config", required=True)
    sw.add_argument("--parallel", action="store_true")
    sw.set_defaults(handler=_cmd_sweep)

    pc = sub.add_parser("picard", help="Picard lattice data")
    pc_sub = pc.add_subparsers(dest="picard_command", required=True)
    curves = pc_sub.add_parser("curves")
    curves.add_argument("--r", type=int, required=True)
    curves.set_defaults(handler=_cmd_picard_curves)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except KProperError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
