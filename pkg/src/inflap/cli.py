"""Command-line front end.

Every subcommand writes a ``key=value`` report (stdout, and ``--report``
when given); ``solve`` can also write the field with ``--out``.  Options
may come from a JSON file via ``--config``; command-line flags override it.

Exit codes: 0 success, 1 a check failed, 2 bad configuration, 3 the solver
did not converge, 4 a comparison hypothesis failed, 5 unreadable input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from . import coneops, fieldio, lattice, solver, verify
from .errors import (BadValue, ConfigError, FormatError, HypothesisFailed, MissingRequired,
                     UnknownKey)

logger = logging.getLogger(__name__)

COMMANDS = ("stencil", "solve", "check-lemma1", "check-lemma2", "check-cones",
            "check-convexity", "jensen", "converge")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_HYPOTHESIS, EXIT_INPUT = range(6)


@dataclass
class RunConfig:
    command: str
    bounds: tuple | None = None
    h: float | None = None
    d: int | None = None
    eps: float | None = None
    norm: str = "euclidean"
    boundary: str | None = None
    sample: str | None = None
    u: str | None = None
    v: str | None = None
    exact: str | None = None
    solve: solver.SolveConfig = field(default_factory=solver.SolveConfig)
    hyp_tol: float | None = None
    concl_tol: float | None = None
    delta: float | None = None
    form: str = "sub"
    direction: str = "above"
    sides: tuple = (4, 8)
    reach: int = 8
    n_slopes: int = 33
    check_tol: float | None = None
    node: tuple | None = None
    radii: tuple | None = None
    levels: tuple | None = None
    coupling: tuple = (2.0, 2 / 3)
    out: str | None = None
    report: str | None = None
    timing: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "unrecognized arguments" in message:
            raise UnknownKey(message.split(":", 1)[1].strip(), "unknown option")
        if "required" in message:
            raise MissingRequired(message.split(":", 1)[-1].strip(), "missing required option")
        if message.startswith("argument "):
            key, _, rest = message[len("argument "):].partition(": ")
            raise BadValue(key.split("/")[-1].lstrip("-"), rest)
        raise BadValue("arguments", message)


def _floats(text):
    try:
        return tuple(float(Fraction(t.strip())) for t in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _number(text):
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")


def _build_parser():
    p = _Parser(prog="inflap", description="Discrete infinity Laplace toolkit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, domain=True, eps=True):
        if domain:
            sp.add_argument("--bounds", type=_floats, help="lo0,hi0[,lo1,hi1]")
            sp.add_argument("--h", type=_number)
        if eps:
            sp.add_argument("--eps", type=_number)
        sp.add_argument("--norm", choices=lattice.NORMS, default="euclidean")
        sp.add_argument("--report")
        sp.add_argument("--timing", action="store_true",
                        help="include wall-clock time in reports (breaks byte-stability)")
        sp.add_argument("--config", help="JSON file of option values")

    def solver_opts(sp):
        sp.add_argument("--scheme", choices=solver.SCHEMES, default="gauss_seidel")
        sp.add_argument("--tol", type=_number, default=1e-10)
        sp.add_argument("--max-iter", type=int, default=100_000)
        sp.add_argument("--init", choices=solver.INITS, default="band_min_constant")
        sp.add_argument("--stop", choices=solver.STOPS, default="estimate")

    def field_source(sp):
        sp.add_argument("--u", help="field CSV file")
        sp.add_argument("--field", help="analytic sample, e.g. aronsson or cone:0,1,3,3")

    sp = sub.add_parser("stencil", help="list the lattice ball offsets")
    common(sp, domain=False)
    sp.add_argument("--h", type=_number)
    sp.add_argument("--dim", type=int, default=2, choices=(1, 2))
    sp.add_argument("--out")

    sp = sub.add_parser("solve", help="solve S+ u = S- u with band data")
    common(sp)
    solver_opts(sp)
    sp.add_argument("--boundary", help="analytic spec or file:<field.csv>")
    sp.add_argument("--out")

    sp = sub.add_parser("check-lemma1", help="discrete comparison of two fields")
    common(sp, domain=False)
    sp.add_argument("--u")
    sp.add_argument("--v")
    sp.add_argument("--tol", type=_number, default=1e-10)
    sp.add_argument("--hyp-tol", type=_number)
    sp.add_argument("--concl-tol", type=_number)

    sp = sub.add_parser("check-lemma2", help="dilated/eroded field residual sign")
    common(sp)
    field_source(sp)
    sp.add_argument("--delta", type=_number)
    sp.add_argument("--form", choices=("sub", "super"), default="sub")

    sp = sub.add_parser("check-cones", help="comparison with cones battery")
    common(sp, eps=False)
    field_source(sp)
    sp.add_argument("--direction", choices=("above", "below"), default="above")
    sp.add_argument("--sides", type=_ints, default=(4, 8))
    sp.add_argument("--reach", type=int, default=8)
    sp.add_argument("--slopes", type=int, default=33)
    sp.add_argument("--tol", type=_number)

    sp = sub.add_parser("check-convexity", help="convexity of the ball maximum in the radius")
    common(sp, eps=False)
    field_source(sp)
    sp.add_argument("--node", type=_ints)
    sp.add_argument("--radii", type=_floats)
    sp.add_argument("--tol", type=_number)

    sp = sub.add_parser("jensen", help="interior-minus-band maximum of u - v")
    common(sp, domain=False)
    sp.add_argument("--u")
    sp.add_argument("--v")
    sp.add_argument("--tol", type=_number, default=1e-10)

    sp = sub.add_parser("converge", help="error ladder against an exact solution")
    common(sp, eps=False)
    solver_opts(sp)
    sp.add_argument("--exact", help="linear:..., cone:... or aronsson")
    sp.add_argument("--levels", type=_floats, help="comma-separated h values, e.g. 1/16,1/32")
    sp.add_argument("--coupling", type=_floats, default=(2.0, 2 / 3), help="c,alpha for eps=c*h^alpha")
    return p


def _option_names(parser, command):
    sp = parser._subparsers._group_actions[0].choices[command]
    return {a.option_strings[0][2:]: a for a in sp._actions if a.option_strings
            and a.option_strings[0].startswith("--")}


def _config_argv(path, names):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise BadValue("config", f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise BadValue("config", f"{path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise BadValue("config", "top level must be an object")
    argv = []
    for key, value in data.items():
        flag = key.replace("_", "-")
        if flag not in names or flag in ("config", "help"):
            raise UnknownKey(key, f"unknown key; expected one of {sorted(set(names) - {'config', 'help'})}")
        action = names[flag]
        if isinstance(action, argparse._StoreTrueAction):
            if value:
                argv.append(f"--{flag}")
            continue
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        argv += [f"--{flag}", str(value)]
    return argv


def _peek_h(path, key):
    if not os.path.exists(path):
        raise BadValue(key, f"file {path} does not exist")
    with open(path) as fh:
        head = [fh.readline().strip() for _ in range(2)]
    try:
        return float(head[1].split("=", 1)[1])
    except (IndexError, ValueError):
        raise BadValue(key, f"{path} lacks a '# h=' header")


def _require(ns, key):
    value = getattr(ns, key.replace("-", "_"), None)
    if value is None:
        raise MissingRequired(key, "required for this command")
    return value


def _check_eps(eps, h):
    if eps is None:
        return
    if not eps > 0:
        raise BadValue("eps", f"must be positive, got {eps}")
    if lattice.lattice_multiple(eps, h) is None:
        raise BadValue("eps", f"{eps} is not a positive integer multiple of h={h}")


def _check_domain(ns):
    bounds, h = _require(ns, "bounds"), _require(ns, "h")
    if len(bounds) not in (2, 4):
        raise BadValue("bounds", "expected lo0,hi0 or lo0,hi0,lo1,hi1")
    try:
        lattice.build_domain(bounds, h)
    except lattice.LatticeError as exc:
        raise BadValue("h" if "multiple" in str(exc) or "spacing" in str(exc) else "bounds", str(exc))
    return len(bounds) // 2


def _field_source(ns):
    if (ns.u is None) == (ns.field is None):
        raise MissingRequired("u", "give exactly one of --u (file) or --field (analytic)")
    if ns.u is not None:
        return _peek_h(ns.u, "u"), None
    d = _check_domain(ns)
    try:
        coneops.parse_analytic(ns.field, d)
    except ValueError as exc:
        raise BadValue("field", str(exc))
    return ns.h, d


_NEGATIVE = re.compile(r"^-\.?\d")


def _glue_negative_values(argv):
    # argparse takes "-1,1" for an option; "--bounds=-1,1" is unambiguous.
    out = []
    for tok in argv:
        if out and _NEGATIVE.match(tok) and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def parse_config(argv):
    """Parse and validate ``argv`` (without the program name) into a :class:`RunConfig`."""
    parser = _build_parser()
    argv = list(argv)
    if not argv or argv[0] not in COMMANDS:
        raise BadValue("command", f"expected one of {', '.join(COMMANDS)}")
    names = _option_names(parser, argv[0])
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv[1:])
    if known.config:
        argv = [argv[0]] + _config_argv(known.config, names) + argv[1:]
    argv = _glue_negative_values(argv)
    try:
        ns = parser.parse_args(argv)
    except argparse.ArgumentError as exc:
        raise BadValue(exc.argument_name or "arguments", exc.message)

    cfg = RunConfig(command=ns.command, norm=ns.norm, report=ns.report, timing=ns.timing)
    if hasattr(ns, "scheme"):
        try:
            cfg.solve = solver.SolveConfig(scheme=ns.scheme, tol=ns.tol, max_iter=ns.max_iter,
                                           init=ns.init, stop=ns.stop)
        except ValueError as exc:
            raise BadValue("tol" if "tol" in str(exc) else "max-iter", str(exc))

    cmd = ns.command
    if cmd == "stencil":
        cfg.h, cfg.eps, cfg.d, cfg.out = _require(ns, "h"), _require(ns, "eps"), ns.dim, ns.out
        if not cfg.h > 0:
            raise BadValue("h", f"must be positive, got {cfg.h}")
        if not cfg.eps >= cfg.h:
            raise BadValue("eps", f"must be at least h={cfg.h} for a nonempty stencil")
    elif cmd == "solve":
        cfg.boundary = _require(ns, "boundary")
        cfg.eps, cfg.out = _require(ns, "eps"), ns.out
        if cfg.boundary.startswith("file:"):
            cfg.h = _peek_h(cfg.boundary[5:], "boundary")
        else:
            cfg.d = _check_domain(ns)
            cfg.bounds, cfg.h = ns.bounds, ns.h
            try:
                coneops.parse_analytic(cfg.boundary, cfg.d)
            except ValueError as exc:
                raise BadValue("boundary", str(exc))
        _check_eps(cfg.eps, cfg.h)
    elif cmd in ("check-lemma1", "jensen"):
        cfg.u, cfg.v = _require(ns, "u"), _require(ns, "v")
        cfg.eps = _require(ns, "eps")
        cfg.h = _peek_h(cfg.u, "u")
        _peek_h(cfg.v, "v")
        _check_eps(cfg.eps, cfg.h)
        tol = ns.tol
        if not tol > 0:
            raise BadValue("tol", f"must be positive, got {tol}")
        if cmd == "check-lemma1":
            cfg.hyp_tol = ns.hyp_tol if ns.hyp_tol is not None else 2 * tol / cfg.eps
            cfg.concl_tol = ns.concl_tol if ns.concl_tol is not None else 10 * tol
        else:
            cfg.check_tol = 10 * tol
    elif cmd in ("check-lemma2", "check-cones", "check-convexity"):
        cfg.h, cfg.d = _field_source(ns)
        cfg.u, cfg.sample = ns.u, ns.field
        if ns.field is not None:
            cfg.bounds = ns.bounds
        if cmd == "check-lemma2":
            cfg.eps = _require(ns, "eps")
            _check_eps(cfg.eps, cfg.h)
            cfg.delta = ns.delta if ns.delta is not None else 2 * cfg.h / cfg.eps
            cfg.form = ns.form
        elif cmd == "check-cones":
            cfg.direction, cfg.sides, cfg.reach = ns.direction, ns.sides, ns.reach
            cfg.n_slopes, cfg.check_tol = ns.slopes, ns.tol
            if any(s < 2 for s in cfg.sides):
                raise BadValue("sides", "box sides must be at least 2 nodes")
        else:
            cfg.node, cfg.radii, cfg.check_tol = _require(ns, "node"), _require(ns, "radii"), ns.tol
            for r in cfg.radii:
                if lattice.lattice_multiple(r, cfg.h) is None:
                    raise BadValue("radii", f"{r} is not a positive integer multiple of h={cfg.h}")
    elif cmd == "converge":
        cfg.bounds = _require(ns, "bounds")
        if len(cfg.bounds) not in (2, 4):
            raise BadValue("bounds", "expected lo0,hi0 or lo0,hi0,lo1,hi1")
        cfg.d = len(cfg.bounds) // 2
        cfg.exact = _require(ns, "exact")
        try:
            coneops.parse_analytic(cfg.exact, cfg.d)
        except ValueError as exc:
            raise BadValue("exact", str(exc))
        cfg.levels = _require(ns, "levels")
        if len(ns.coupling) != 2 or not ns.coupling[0] > 0:
            raise BadValue("coupling", "expected c,alpha with c > 0")
        cfg.coupling = ns.coupling
        for h in cfg.levels:
            try:
                lattice.build_domain(cfg.bounds, h)
            except lattice.LatticeError as exc:
                raise BadValue("levels", str(exc))
    return cfg


def _load_field(cfg):
    if cfg.u is not None:
        return fieldio.read_field(cfg.u)
    dom = lattice.build_domain(cfg.bounds, cfg.h)
    name, params = coneops.parse_analytic(cfg.sample, dom.d)
    return coneops.analytic_eval(name, dom, **params)


def _emit(cfg, sections, out=sys.stdout):
    text = fieldio.format_report(sections, cfg.timing)
    out.write(text)
    if cfg.report:
        with open(cfg.report, "w", newline="\n") as fh:
            fh.write(text)


def _run_config(cfg):
    sections = [("run", {"command": cfg.command})]
    code = EXIT_OK
    if cfg.command == "stencil":
        st = lattice.make_stencil(cfg.h, cfg.eps, cfg.norm, cfg.d)
        sections.append(("stencil", {"h": cfg.h, "eps": cfg.eps, "norm": cfg.norm,
                                     "count": len(st), "reach": st.reach}))
        if cfg.out:
            with open(cfg.out, "w", newline="\n") as fh:
                fh.write("".join(",".join(str(int(c)) for c in o) + "\n" for o in st.offsets))
    elif cfg.command == "solve":
        if cfg.boundary.startswith("file:"):
            data = fieldio.read_field(cfg.boundary[5:])
            dom = data.domain
            st, _, regions = lattice.setup(dom, cfg.eps, cfg.norm)
            g = solver.BoundaryData.from_field(data, regions)
        else:
            dom = lattice.build_domain(cfg.bounds, cfg.h)
            st, _, regions = lattice.setup(dom, cfg.eps, cfg.norm)
            name, params = coneops.parse_analytic(cfg.boundary, dom.d)
            g = solver.BoundaryData.from_function(dom, regions, coneops.analytic_function(name, **params))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", solver.NotConverged)
            u, rep = solver.solve(dom, st, regions, g, cfg.solve)
        sections.append(("solve", rep))
        if cfg.out:
            fieldio.write_field(u, cfg.out)
        if not rep.converged:
            code = EXIT_NOT_CONVERGED
    elif cfg.command in ("check-lemma1", "jensen"):
        u, v = fieldio.read_field(cfg.u), fieldio.read_field(cfg.v)
        if u.domain.shape != v.domain.shape or u.domain.bounds != v.domain.bounds:
            raise BadValue("v", "u and v live on different lattices")
        st, _, regions = lattice.setup(u.domain, cfg.eps, cfg.norm)
        if cfg.command == "check-lemma1":
            try:
                res = verify.lemma1_check(u, v, st, regions, cfg.hyp_tol, cfg.concl_tol)
            except HypothesisFailed as exc:
                sections.append(("hypothesis", exc.result))
                _emit(cfg, sections)
                return EXIT_HYPOTHESIS
        else:
            gap, at = verify.jensen_gap(u, v, regions)
            res = verify.CheckResult.from_slack("jensen_gap", gap, cfg.check_tol, {"node": at})
        sections.append(("check", res))
        code = EXIT_OK if res.passed else EXIT_CHECK
    elif cfg.command in ("check-lemma2", "check-cones", "check-convexity"):
        u = _load_field(cfg)
        if cfg.command == "check-lemma2":
            st, _, regions = lattice.setup(u.domain, cfg.eps, cfg.norm)
            res = verify.lemma2_check(u, st, regions, cfg.delta, cfg.form)
        elif cfg.command == "check-cones":
            res = coneops.cone_comparison_check(u, coneops.ConeCheckConfig(
                direction=cfg.direction, norm=cfg.norm, sides=cfg.sides, reach=cfg.reach,
                n_slopes=cfg.n_slopes, tol=cfg.check_tol))
        else:
            res = coneops.epsilon_convexity_check(u, cfg.node, cfg.radii, cfg.norm, cfg.check_tol)
        sections.append(("check", res))
        code = EXIT_OK if res.passed else EXIT_CHECK
    elif cfg.command == "converge":
        name, params = coneops.parse_analytic(cfg.exact, cfg.d)
        rows = verify.convergence_study(name, cfg.levels, cfg.coupling, cfg.solve,
                                        cfg.bounds, cfg.norm, params)
        sections += [(f"row {k}", row) for k, row in enumerate(rows)]
        errs = [r.sup_error for r in rows]
        decreasing = all(b < a for a, b in zip(errs, errs[1:]))
        sections.append(("summary", {"levels": len(rows), "strictly_decreasing": decreasing,
                                     "all_converged": all(r.converged for r in rows)}))
        if not all(r.converged for r in rows):
            code = EXIT_NOT_CONVERGED
    _emit(cfg, sections)
    return code


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    if argv and argv[0] in ("-h", "--help"):
        _build_parser().print_help()
        return EXIT_OK
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _run_config(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
