"""Command-line front end: ``verify``, ``eval``, ``disk-experiment``, ``report-schema``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error,
3 numeric failure (the report is still written, failing case marked).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cohomology import NotSymplecticError, Translation, cocycle_integral
from .geometry import DomainError, QuadratureError
from .models import DiskTwist, Moebius, gamma_cochain, gw_cocycle, parse_model
from .suites import DEFAULT_TOLERANCES, REPORT_SCHEMA, Scenario, run_disk_experiment, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_vector(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse vector {text!r}") from exc
    if not vals:
        raise UsageError("empty vector")
    return np.array(vals)


def parse_tolerance(text: str):
    name, sep, value = text.partition("=")
    if not sep:
        raise UsageError(f"tolerance must be <suite>=<value>, got {text!r}")
    name = name.strip()
    if name not in DEFAULT_TOLERANCES:
        raise UsageError(f"unknown tolerance suite {name!r}")
    try:
        return name, float(value)
    except ValueError as exc:
        raise UsageError(f"bad tolerance value {value!r}") from exc


def load_config(path) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment; ``tol.<suite>`` sets a tolerance."""
    out = {"tolerances": {}}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = key.strip(), value.strip()
        if key.startswith("tol."):
            name, tol = parse_tolerance(f"{key[4:]}={value}")
            out["tolerances"][name] = tol
        elif key in ("model", "csv"):
            out[key] = value
        elif key in ("seed", "samples", "words", "depth"):
            try:
                out[key] = int(value)
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: {key} must be an integer") from exc
        elif key == "basepoint":
            out[key] = tuple(parse_vector(value))
        elif key == "out":
            out[key] = value
        else:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
    return out


def build_scenario(args) -> Scenario:
    cfg = load_config(args.config) if args.config else {"tolerances": {}}
    tolerances = dict(cfg["tolerances"])
    for t in args.tol or []:
        name, value = parse_tolerance(t)
        tolerances[name] = value
    model = args.model or cfg.get("model")
    if model is None:
        raise UsageError("--model is required")
    basepoint = tuple(parse_vector(args.basepoint)) if args.basepoint else cfg.get("basepoint")
    try:
        return Scenario(
            model=model,
            seed=args.seed if args.seed is not None else cfg.get("seed", 0),
            samples=args.samples if args.samples is not None else cfg.get("samples", 20),
            basepoint=basepoint,
            tolerances=tolerances,
            words=getattr(args, "words", None) or cfg.get("words", 4),
            depth=getattr(args, "depth", None) or cfg.get("depth", 3),
        )
    except (ValueError, DomainError) as exc:
        raise UsageError(str(exc)) from exc


def emit(report, args) -> None:
    text = report.dumps()
    if args.out:
        Path(args.out).write_text(text)
        if args.csv:
            Path(args.out).with_suffix(".csv").write_text(report.to_csv())
    else:
        sys.stdout.write(report.to_csv() if args.csv else text)
    s = report.summary
    print(f"{report.suite}: {s['pass']} pass, {s['fail']} fail, {s['info']} info, {s['error']} error",
          file=sys.stderr)
    for c in report.cases:
        if c.status in ("fail", "error"):
            print(f"  {c.status.upper()} {c.id}: value={c.value!r} tol={c.tolerance!r} {c.message}",
                  file=sys.stderr)


def cmd_verify(args) -> int:
    report = run_suite(build_scenario(args))
    emit(report, args)
    return report.exit_code


def cmd_disk_experiment(args) -> int:
    try:
        report = run_disk_experiment(args.seed or 0, args.words, args.depth)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    emit(report, args)
    return report.exit_code


def cmd_report_schema(args) -> int:
    text = json.dumps(REPORT_SCHEMA, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def parse_element(model, text: str):
    """Element specs: comma vectors for translations, four reals for Moebius
    maps, ``poly:c0,c1,..`` or ``bump:px,py,rho,amp`` for disk twists."""
    if model.name == "h2":
        v = parse_vector(text)
        if v.size != 4:
            raise UsageError("Moebius maps need four reals a,b,c,d")
        try:
            return Moebius.from_matrix(v.reshape(2, 2))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    if model.name == "disk":
        kind, _, rest = text.partition(":")
        v = parse_vector(rest)
        try:
            if kind == "poly":
                return DiskTwist.polynomial(v)
            if kind == "bump" and v.size == 4:
                return DiskTwist.bump(v[:2], v[2], v[3])
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        raise UsageError("disk twists are poly:c0,c1,... or bump:px,py,rho,amp")
    if model.name.startswith("r2n"):
        v = parse_vector(text)
        if v.size != model.dim:
            raise UsageError(f"translation needs {model.dim} components")
        return Translation(v)
    raise UsageError(f"eval does not support model {model.name!r}")


def cmd_eval(args) -> int:
    g1_text = args.g1 or args.x
    g2_text = args.g2 or args.y
    if g1_text is None or g2_text is None:
        raise UsageError("eval needs two elements (--x/--y or --g1/--g2)")
    name = args.model_name
    if name == "heisenberg":
        dim = parse_vector(g1_text).size
        if dim % 2:
            raise UsageError("Heisenberg translations need an even number of components")
        name = f"r2n:{dim // 2}"
    try:
        model = parse_model(name, tuple(parse_vector(args.basepoint)) if args.basepoint else None)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    g1, g2 = parse_element(model, g1_text), parse_element(model, g2_text)
    try:
        result = cocycle_integral(model, g1, g2)
    except NotSymplecticError as exc:
        raise UsageError(f"not a symplectomorphism: {exc}") from exc
    print(f"C = {result.value:.15g}")
    print(f"quadrature error estimate = {result.error:.3g} ({result.panels} panels)")
    if model.name == "h2":
        gw = gw_cocycle(g1, g2, model)
        dgamma = gamma_cochain(g2, model) - gamma_cochain(g1 * g2, model) + gamma_cochain(g1, model)
        print(f"gw = {gw:.15g}")
        print(f"D gamma = {dgamma:.15g}")
        print(f"gw - D gamma = {gw - dgamma:.15g}")
        print(f"difference = {abs(result.value - (gw - dgamma)):.3g}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symcocycle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        if model:
            p.add_argument("--model", help="r2n:N | h2 | disk | product:A,B | torus")
            p.add_argument("--samples", type=int, help="random samples per case")
            p.add_argument("--basepoint", help="basepoint override, comma separated")
            p.add_argument("--tol", action="append", metavar="SUITE=VALUE",
                           help="tolerance override; may be repeated")
            p.add_argument("--config", help="key = value scenario file; flags override it")
        p.add_argument("--seed", type=int, help="64-bit seed (default 0)")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--csv", action="store_true", help="also emit a flat CSV table")

    p = sub.add_parser("verify", help="run the verification suite for a model")
    common(p)
    p.add_argument("--words", type=int, help=argparse.SUPPRESS)
    p.add_argument("--depth", type=int, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("disk-experiment", help="exploratory coboundary fits for disk twists")
    common(p, model=False)
    p.add_argument("--words", type=int, default=4, help="number of twist generators (>= 4)")
    p.add_argument("--depth", type=int, default=3, help="maximum word length")
    p.set_defaults(func=cmd_disk_experiment)

    p = sub.add_parser("eval", help="evaluate the group cocycle on two elements")
    p.add_argument("model_name", metavar="MODEL", help="heisenberg | r2n:N | h2 | disk")
    p.add_argument("--x", "--g1", dest="x", help="first element")
    p.add_argument("--y", "--g2", dest="y", help="second element")
    p.add_argument("--basepoint", help="basepoint override, comma separated")
    p.set_defaults(func=cmd_eval, g1=None, g2=None)

    p = sub.add_parser("report-schema", help="print the JSON schema of reports")
    p.add_argument("--out", help="write the schema here instead of stdout")
    p.set_defaults(func=cmd_report_schema)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
