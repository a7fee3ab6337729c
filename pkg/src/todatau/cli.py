"""Command-line front end: evolve grids, audit them, verify identities.

Exit codes are total and fixed: 0 success / all checks pass, 1 a required
theorem check failed (or an evolution division refused to stay polynomial),
2 singular or degenerate input data, 3 configuration errors of any kind.
"""

from __future__ import annotations

import argparse
import inspect
import json
import re
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import identities
from .audit import (
    AuditReport,
    Region,
    audit_laurent,
    audit_laurent_raw_periodic,
    audit_pairwise_coprime,
    stamp_config,
)
from .evolve import (
    BoundaryError,
    CellDivisionError,
    DegenerateError,
    Molecule,
    Periodic,
    SemiInfinite,
    SingularityError,
    TauGrid,
    evolve,
    iv_state_from_values,
    iv_state_symbolic,
    molecule_from_values,
    molecule_symbolic,
    periodic_from_iv_values,
    periodic_special_x,
    periodic_symbolic,
    semi_from_values,
    semi_symbolic,
    step_iv_open,
    step_iv_periodic,
)
from .gcdtools import RationalFunction
from .laurent import DivisionError as PolyDivisionError
from .laurent import LaurentPoly

EXIT_PASS = 0
EXIT_THEOREM = 1
EXIT_SINGULAR = 2
EXIT_CONFIG = 3


class ConfigError(Exception):
    """Invalid flags, files, or names; always maps to exit code 3."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs; serialized into every report."""

    command: str
    boundary: Optional[str] = None
    N: Optional[int] = None
    t_max: Optional[int] = None
    init: Optional[str] = None
    form: Optional[str] = None
    region: Optional[str] = None
    rule: str = "standard"
    tilde: bool = False
    names: Optional[tuple[str, ...]] = None
    samples: int = 3
    trials: int = 4
    seed: int = 0
    workers: Optional[int] = None
    scan_n_max: Optional[int] = None
    fmt: str = "text"

    def stamped(self) -> dict:
        body = {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in asdict(self).items() if v is not None}
        return stamp_config(body)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _pretty_poly(p: LaurentPoly) -> str:
    """'(y1^2 + x2) x1^-1': signs spaced out, unit coefficients hidden."""
    if p.is_zero():
        return "0"
    content = p.monomial_content()
    core = p.shift({v: -e for v, e in content.items()}) if content else p
    parts = []
    n_terms = 0
    for coeff, exps in core.items():
        n_terms += 1
        names = []
        for vid in sorted(exps):
            e = exps[vid]
            nm = p.reg.name(vid)
            names.append(nm if e == 1 else "%s^%d" % (nm, e))
        mag = abs(coeff)
        body = " ".join(names) if names else str(mag)
        if names and mag != 1:
            body = "%d %s" % (mag, body)
        if not parts:
            parts.append(body if coeff > 0 else "-" + body)
        else:
            parts.append(("+ " if coeff > 0 else "- ") + body)
    inner = " ".join(parts)
    if not content:
        return inner
    mono_bits = []
    for vid in sorted(content):
        e = content[vid]
        nm = p.reg.name(vid)
        mono_bits.append(nm if e == 1 else "%s^%d" % (nm, e))
    mono = " ".join(mono_bits)
    if inner == "1":
        return mono
    if n_terms == 1:
        return "%s %s" % (inner, mono)
    return "(%s) %s" % (inner, mono)


def _render_value(v) -> str:
    if isinstance(v, LaurentPoly):
        return _pretty_poly(v)
    if isinstance(v, RationalFunction):
        num = _pretty_poly(v.num)
        if v.den == 1:
            return num
        den = _pretty_poly(v.den)
        if " " in den and not den.startswith("("):
            den = "(%s)" % den
        if " + " in num or " - " in num:
            num = "(%s)" % num
        return "%s / %s" % (num, den)
    return str(v)


def _emit(text: str, args) -> None:
    sys.stdout.write(text)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)


def _emit_report(report: AuditReport, args, prefix: str = "") -> int:
    if args.fmt == "json":
        _emit(report.to_json(), args)
    else:
        _emit(prefix + report.to_text(), args)
    return report.exit_code


# ---------------------------------------------------------------------------
# grid construction
# ---------------------------------------------------------------------------

_INIT_NAMES = ("symbolic", "ones", "periodic-x", "fibonacci-check")


def _load_init_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read init file: %s" % exc)
    except json.JSONDecodeError as exc:
        raise ConfigError("init file is not valid JSON: %s" % exc)
    if not isinstance(data, dict):
        raise ConfigError("init file must hold a JSON object")
    return data


def _fraction_row(values, what: str) -> list[Fraction]:
    try:
        return [Fraction(str(v)) for v in values]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError("bad rational in %s: %s" % (what, exc))


def _reconcile(flag, filed, what: str):
    if filed is None:
        return flag
    if flag is not None and flag != filed:
        raise ConfigError("%s from flags (%s) contradicts init file (%s)"
                          % (what, flag, filed))
    return filed


def _boundary_of(kind: str, N: int):
    if kind == "semi":
        return SemiInfinite()
    if kind == "molecule":
        return Molecule(N)
    return Periodic(N)


def _resolve_evolve_inputs(args) -> tuple[str, int, dict]:
    """Returns (boundary kind, N, init payload) after file reconciliation."""
    init = args.init
    payload: dict = {}
    if init.startswith("file:"):
        payload = _load_init_file(init[len("file:"):])
        args_boundary = _reconcile(args.boundary, payload.get("boundary"),
                                   "boundary")
        args_N = _reconcile(args.N, payload.get("N"), "N")
    else:
        if init not in _INIT_NAMES:
            raise ConfigError("unknown init %r; pick one of %s or file:PATH"
                              % (init, ", ".join(_INIT_NAMES)))
        args_boundary, args_N = args.boundary, args.N
        if init == "fibonacci-check":
            args_boundary = _reconcile(args_boundary, "molecule", "boundary")
            args_N = _reconcile(args_N, 1, "N")
        if init == "periodic-x":
            args_boundary = _reconcile(args_boundary, "periodic", "boundary")
    if args_boundary is None:
        raise ConfigError("--boundary is required")
    if args_N is None:
        raise ConfigError("--N is required")
    if args_N < 1 or (args_boundary == "periodic" and args_N < 2):
        raise ConfigError("--N too small for boundary %r" % args_boundary)
    return args_boundary, args_N, payload


def _build_tau_grid(kind: str, N: int, init: str, payload: dict) -> TauGrid:
    if init == "symbolic":
        if kind == "semi":
            return semi_symbolic(N, x1_is_one=False)
        if kind == "molecule":
            return molecule_symbolic(N)
        return periodic_symbolic(N)
    if init == "periodic-x":
        return periodic_special_x(N)
    if init in ("ones", "fibonacci-check"):
        one = Fraction(1)
        if kind == "semi":
            return semi_from_values([one] * N, [one] * N)
        if kind == "molecule":
            return molecule_from_values(N, [one] * (N + 1), [one] * (N + 1))
        return periodic_from_iv_values([one] * N, [one] * N)
    # file-backed
    if "I" in payload or "V" in payload:
        if kind != "periodic":
            raise ConfigError("tau form from I/V data is periodic-only; "
                              "give row0/row1 instead")
        I0 = _fraction_row(payload.get("I", ()), "I")
        V0 = _fraction_row(payload.get("V", ()), "V")
        if len(I0) != N or len(V0) != N:
            raise ConfigError("periodic init needs N entries in I and V")
        return periodic_from_iv_values(I0, V0)
    if "row0" in payload and "row1" in payload:
        row0 = _fraction_row(payload["row0"], "row0")
        row1 = _fraction_row(payload["row1"], "row1")
        if kind == "semi":
            return semi_from_values(row0, row1)
        if kind == "molecule":
            return molecule_from_values(N, row0, row1)
        raise ConfigError("periodic grids are seeded from I/V data, "
                          "not raw rows")
    raise ConfigError("init file needs either I and V or row0 and row1")


def _sites(grid: TauGrid, t: int) -> range:
    b = grid.boundary
    if isinstance(b, Periodic):
        return range(0, b.size)
    if isinstance(b, Molecule):
        return range(1, b.size + 2)
    return range(1, grid.width(t) + 1)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_evolve(args) -> int:
    kind, N, payload = _resolve_evolve_inputs(args)
    if args.t_max is None or args.t_max < 0:
        raise ConfigError("--tmax is required and must be nonnegative")
    if args.rule != "standard" and kind == "periodic":
        raise ConfigError("variant rules are open-boundary only")
    cfg = RunConfig(command="evolve", boundary=kind, N=N, t_max=args.t_max,
                    init=args.init, form=args.form, rule=args.rule,
                    fmt=args.fmt).stamped()

    if args.form == "iv" and "I" in payload and "V" in payload:
        I0 = _fraction_row(payload["I"], "I")
        V0 = _fraction_row(payload["V"], "V")
        try:
            state = iv_state_from_values(_boundary_of(kind, N), I0, V0)
        except ValueError as exc:
            raise ConfigError(str(exc))
        for _ in range(args.t_max):
            if kind == "periodic":
                step_iv_periodic(state)
            else:
                step_iv_open(state)
        return _dump_iv_levels(cfg, state, args)

    grid = _build_tau_grid(kind, N, args.init, payload)
    if args.form == "iv":
        evolve(grid, args.t_max, rule=args.rule)
        if grid.symbolic:
            state = iv_state_symbolic(grid, args.t_max)
        else:
            state = IVStateView(grid, args.t_max)
        return _dump_iv_levels(cfg, state, args)
    steps = max(0, args.t_max - 1)
    evolve(grid, steps, rule=args.rule)
    return _dump_tau_rows(cfg, grid, args)


class IVStateView:
    """Adapter: dictionary levels read off an evolved numeric grid."""

    def __init__(self, grid: TauGrid, t_max: int) -> None:
        from .evolve import tau_to_iv
        self.boundary = grid.boundary
        self.levels = [tau_to_iv(grid, t) for t in range(t_max + 1)]


def _dump_tau_rows(cfg: dict, grid: TauGrid, args) -> int:
    rows = {}
    for t in range(0, grid.top_time + 1):
        rows[str(t)] = [_render_value(grid.value(n, t))
                        for n in _sites(grid, t)]
    if args.fmt == "json":
        _emit(json.dumps({"config": cfg, "rows": rows},
                         sort_keys=True, indent=2) + "\n", args)
    else:
        lines = []
        for t in range(0, grid.top_time + 1):
            start = 0 if isinstance(grid.boundary, Periodic) else 1
            for i, cell in enumerate(rows[str(t)]):
                lines.append("t=%d n=%d: %s" % (t, start + i, cell))
        _emit("\n".join(lines) + "\n", args)
    return EXIT_PASS


def _dump_iv_levels(cfg: dict, state, args) -> int:
    periodic = isinstance(state.boundary, Periodic)
    levels = []
    for t, level in enumerate(state.levels):
        levels.append({"t": t,
                       "I": [_render_value(v) for v in level.I],
                       "V": [_render_value(v) for v in level.V]})
    if args.fmt == "json":
        _emit(json.dumps({"config": cfg, "iv": levels},
                         sort_keys=True, indent=2) + "\n", args)
    else:
        lines = []
        for level in levels:
            if periodic:
                # site-major row: I and V alternating, n = 1..N
                cells = [v for pair in zip(level["I"], level["V"])
                         for v in pair]
                lines.append("t=%d: %s" % (level["t"], ", ".join(cells)))
            else:
                lines.append("t=%d  I: %s  V: %s"
                             % (level["t"], ", ".join(level["I"]),
                                ", ".join(level["V"])))
        _emit("\n".join(lines) + "\n", args)
    return EXIT_PASS


_REGION_RE = re.compile(r"^[Dd](\d+)$")


def _parse_region(text: Optional[str], boundary: str, N: Optional[int],
                  t_max: Optional[int]) -> Region:
    if text:
        m = _REGION_RE.match(text)
        if not m:
            raise ConfigError("region must look like D4")
        return Region.triangle(int(m.group(1)))
    if boundary == "semi":
        raise ConfigError("semi-infinite audits need --region D<k>")
    if t_max is None:
        raise ConfigError("--tmax is required for %s audits" % boundary)
    if boundary == "molecule":
        assert N is not None
        return Region.rect((1, N + 1), (0, t_max))
    assert N is not None
    return Region.rect((0, N - 1), (0, t_max))


def cmd_audit(args) -> int:
    if args.boundary is None:
        raise ConfigError("--boundary is required")
    if args.boundary != "semi" and args.N is None:
        raise ConfigError("--N is required for %s audits" % args.boundary)
    if args.boundary == "periodic" and args.N < 2:
        raise ConfigError("periodic audits need --N of at least 2")
    if args.boundary != "semi" and args.rule != "standard":
        raise ConfigError("variant rules audit the semi-infinite grid")
    if args.tilde and args.boundary != "periodic":
        raise ConfigError("--tilde applies to periodic audits")
    region = _parse_region(args.region, args.boundary, args.N, args.t_max)

    def fresh() -> TauGrid:
        if args.boundary == "semi":
            m = _REGION_RE.match(args.region)
            assert m is not None
            k = args.N if args.N is not None else 2 * int(m.group(1)) + 2
            return semi_symbolic(k)
        if args.boundary == "molecule":
            return molecule_symbolic(args.N)
        return periodic_symbolic(args.N)

    cfg = RunConfig(command="audit", boundary=args.boundary, N=args.N,
                    t_max=args.t_max, region=args.region, rule=args.rule,
                    tilde=args.tilde, trials=args.trials, seed=args.seed,
                    workers=args.workers, fmt=args.fmt).stamped()
    report = AuditReport(config=cfg)
    grid = fresh()
    report.extend(audit_laurent(grid, region, rule=args.rule))
    laurent_clean = not report.failures
    # the same grid carries the evolved rows into the later stages
    if args.tilde and args.boundary == "periodic":
        report.extend(audit_laurent_raw_periodic(grid, region))
    if laurent_clean and not args.laurent_only:
        report.extend(audit_pairwise_coprime(
            grid, region, trials=args.trials, seed=args.seed,
            workers=args.workers, rule=args.rule))
    return _emit_report(report, args)


def cmd_verify(args) -> int:
    if not args.all and not args.name:
        raise ConfigError("pick --name IDENTITY or --all")
    try:
        names = (identities.catalog_names() if args.all
                 else [identities.resolve_name(n) for n in args.name])
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]))
    params = {}
    if args.N is not None:
        if args.N < 2:
            raise ConfigError("--N must be at least 2")
        params["size"] = args.N
    cfg = RunConfig(command="verify", N=args.N, names=tuple(names),
                    samples=args.samples, seed=args.seed,
                    fmt=args.fmt).stamped()
    report = AuditReport(config=cfg)
    lines = []
    for name in names:
        case = identities._BY_NAME[name]
        accepted = inspect.signature(case.build).parameters
        use = {k: v for k, v in params.items() if k in accepted}
        rec = identities.verify_identity(name, samples=args.samples,
                                         seed=args.seed, **use)
        report.extend([rec])
        lines.append("%s %s (%s)" % ("PASS" if rec["ok"] else "FAIL",
                                     rec["name"], rec["shape"]))
    passed = sum(1 for r in report.identities if r["ok"])
    lines.append("PASS %d/%d" % (passed, len(names)))
    prefix = "\n".join(lines) + "\n"
    return _emit_report(report, args, prefix=prefix)


def cmd_scan_F(args) -> int:
    if args.n_max < 3:
        raise ConfigError("--Nmax must be at least 3")
    cfg = RunConfig(command="scan-F", scan_n_max=args.n_max,
                    workers=args.workers, fmt=args.fmt).stamped()
    report = AuditReport(config=cfg)
    report.extend(identities.scan_records(args.n_max))
    detail = report.identities[0]["detail"]
    prefix = "%s\n" % detail
    return _emit_report(report, args, prefix=prefix)


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(
        prog="todatau",
        description="Exact lattice evolutions, divisibility and coprimeness "
                    "audits, identity verification, and the quartic "
                    "positivity scan.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p: _Parser, tmax_default=None) -> None:
        p.add_argument("--boundary", choices=("semi", "molecule", "periodic"))
        p.add_argument("--N", type=int,
                       help="sites on the ring / chain length / number of "
                            "seed columns")
        p.add_argument("--tmax", dest="t_max", type=int, default=tmax_default)
        p.add_argument("--json", dest="fmt", action="store_const",
                       const="json", default="text")
        p.add_argument("--out", help="also write the output to this file")

    pe = sub.add_parser("evolve", help="run an evolution and dump rows")
    common(pe)
    pe.add_argument("--init", required=True,
                    help="symbolic | ones | periodic-x | fibonacci-check | "
                         "file:PATH (JSON: boundary, N, I/V or row0/row1 as "
                         "exact rational strings)")
    pe.add_argument("--form", choices=("tau", "iv"), default="tau")
    pe.add_argument("--rule", choices=("standard", "cubed", "shifted"),
                    default="standard",
                    help="open-boundary update variant; 'shifted' is the "
                         "negative control that loses polynomial division")
    pe.set_defaults(func=cmd_evolve)

    pa = sub.add_parser("audit", help="Laurentness and coprimeness audit")
    common(pa)
    pa.add_argument("--region", help="triangle window like D4 (semi only)")
    pa.add_argument("--rule", choices=("standard", "cubed", "shifted"),
                    default="standard")
    pa.add_argument("--tilde", action="store_true",
                    help="periodic only: add the raw-cell divisibility "
                         "control records")
    pa.add_argument("--laurent-only", action="store_true",
                    help="skip the pairwise GCD stage")
    pa.add_argument("--trials", type=int, default=4)
    pa.add_argument("--seed", type=int, default=0)
    pa.add_argument("--workers", type=int, default=None)
    pa.set_defaults(func=cmd_audit)

    pv = sub.add_parser("verify", help="check identity catalog entries")
    pv.add_argument("--name", action="append", default=[],
                    help="catalog name or single-letter alias; repeatable")
    pv.add_argument("--all", action="store_true")
    pv.add_argument("--N", type=int,
                    help="override ring period / chain length where the "
                         "entry is size-parameterized")
    pv.add_argument("--samples", type=int, default=3)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--json", dest="fmt", action="store_const", const="json",
                    default="text")
    pv.add_argument("--out")
    pv.set_defaults(func=cmd_verify)

    ps = sub.add_parser("scan-F", help="positivity scan of the boundary "
                                       "quartic")
    ps.add_argument("--Nmax", dest="n_max", type=int, default=200)
    ps.add_argument("--workers", type=int, default=None)
    ps.add_argument("--json", dest="fmt", action="store_const", const="json",
                    default="text")
    ps.add_argument("--out")
    ps.set_defaults(func=cmd_scan_F)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except (SingularityError, DegenerateError) as exc:
        print("degenerate data: %s" % exc, file=sys.stderr)
        return EXIT_SINGULAR
    except (CellDivisionError, PolyDivisionError) as exc:
        print("laurent failure: %s" % exc, file=sys.stderr)
        return EXIT_THEOREM
    except (BoundaryError, ValueError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
