"""Command-line front end: ``rdw``, ``singular``, ``sweep`` and ``contour``.

Exit status is 0 on success, 1 for invalid input (flags, geometry, files)
and 2 when a computation fails.  Diagnostics go to stderr; data goes to the
``--out`` file or stdout.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path
from typing import IO, Iterator, Sequence

from . import io as fmt
from .kinematics import GeometryError, ManipulatorType
from .rdw import DEFAULT_K_MIN_INV, SWEEP_CONFIG, RdwConfig, compute_rdw
from .singularity import max_reach, singular_set
from .sweep import GridSpec, extract_contours, sweep_eta

log = logging.getLogger("rdw3r")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _add_geometry(p: argparse.ArgumentParser) -> None:
    p.add_argument("--type", required=True, help="manipulator type: B1, C, E, G, H or Generic")
    for name in ("d2", "d3", "d4", "r2", "r3"):
        p.add_argument(f"--{name}", type=float, default=None, help=f"DH length {name} (default 0)")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--config", default=None, help="key=value file; command-line flags win")
    p.add_argument("--verbose", action="store_true", help="debug logging to stderr")


def _add_resolution(p: argparse.ArgumentParser, defaults: RdwConfig) -> None:
    p.add_argument("--kmin", type=float, default=DEFAULT_K_MIN_INV,
                   help="minimal conditioning index k^-1 inside the RDW (default 0.25)")
    p.add_argument("--grid-n", type=int, default=defaults.grid_n,
                   help=f"singular-set grid size per joint axis (default {defaults.grid_n})")
    p.add_argument("--spacing", type=float, default=None,
                   help="singular sample spacing bound (default rho_max/500)")
    p.add_argument("--n-scan", type=int, default=defaults.n_scan,
                   help=f"RDW lattice pitch = free edge / n_scan (default {defaults.n_scan})")
    p.add_argument("--aggregate", choices=("min", "max", "first"), default="min",
                   help="k^-1 aggregation over IK branches (default min)")
    p.add_argument("--hj-min-step", type=float, default=None,
                   help="Hooke-Jeeves minimal step (default 1e-5 * sum of lengths)")
    p.add_argument("--hj-max-evals", type=int, default=defaults.max_evals,
                   help=f"Hooke-Jeeves evaluation budget (default {defaults.max_evals})")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="rdw3r", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_rdw = sub.add_parser("rdw", help="free square, RDW square and eta of one manipulator (JSON)")
    _add_geometry(p_rdw)
    _add_resolution(p_rdw, RdwConfig())
    _add_common(p_rdw)

    p_sing = sub.add_parser("singular", help="singular-locus samples in the (rho, z) section (CSV)")
    _add_geometry(p_sing)
    p_sing.add_argument("--grid-n", type=int, default=1024, help="grid size per joint axis (default 1024)")
    p_sing.add_argument("--spacing", type=float, default=None,
                        help="sample spacing bound (default rho_max/500)")
    _add_common(p_sing)

    p_sweep = sub.add_parser("sweep", help="eta over a type's 2-D parameter space (CSV)")
    p_sweep.add_argument("--type", required=True, help="manipulator type: B1, C, E, G or H")
    p_sweep.add_argument("--min", type=float, default=0.25, help="axis minimum (default 0.25)")
    p_sweep.add_argument("--max", type=float, default=4.0, help="axis maximum (default 4)")
    p_sweep.add_argument("--step", type=float, default=0.25, help="axis step (default 0.25)")
    _add_resolution(p_sweep, SWEEP_CONFIG)
    p_sweep.add_argument("--jobs", type=int, default=None,
                         help="worker processes (default: all cores); results do not depend on it")
    p_sweep.add_argument("--quiet", action="store_true", help="no progress counter on stderr")
    _add_common(p_sweep)

    p_cont = sub.add_parser("contour", help="isocontours of a sweep CSV (SVG or CSV)")
    p_cont.add_argument("--in", dest="input", required=True, help="sweep CSV written by `sweep`")
    p_cont.add_argument("--levels", default="0.3,0.4,0.5,0.55",
                        help="comma-separated eta levels (default 0.3,0.4,0.5,0.55)")
    p_cont.add_argument("--format", choices=("svg", "csv"), default=None,
                        help="output format (default: from --out extension, else csv)")
    _add_common(p_cont)

    return parser, {"rdw": p_rdw, "singular": p_sing, "sweep": p_sweep, "contour": p_cont}


def read_config(path: str) -> dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _truthy(value: str, key: str) -> bool:
    low = value.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"config key {key} expects true/false, got {value!r}")


def _parse(argv: Sequence[str] | None) -> argparse.Namespace:
    parser, subs = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config and argv and argv[0] in subs:
        cfg = read_config(known.config)
        sub = subs[argv[0]]
        unknown = sorted(set(cfg) - {a.dest for a in sub._actions} - {"config", "help"})
        if unknown:
            raise UsageError(f"unknown key(s) in {known.config}: {', '.join(unknown)}")
        # config values become defaults so explicit flags still win
        for action in sub._actions:
            if action.dest in cfg:
                action.required = False
                if isinstance(action, argparse._StoreTrueAction):
                    cfg[action.dest] = _truthy(cfg[action.dest], action.dest)
        sub.set_defaults(**cfg)
    return parser.parse_args(argv)


@contextlib.contextmanager
def _output(path: str | None) -> Iterator[IO[str]]:
    if path in (None, "-"):
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None
    with fh:
        yield fh


def _geometry(args: argparse.Namespace):
    mtype = ManipulatorType.from_tag(args.type)
    lengths = {k: getattr(args, k) for k in ("d2", "d3", "d4", "r2", "r3")}
    return mtype, mtype.geometry(**{k: v for k, v in lengths.items() if v is not None})


def _config(args: argparse.Namespace, base: RdwConfig) -> RdwConfig:
    if not 0.0 < args.kmin < 1.0:
        raise UsageError(f"--kmin must lie in (0, 1), got {args.kmin:g}")
    if args.grid_n < 64:
        raise UsageError(f"--grid-n must be >= 64, got {args.grid_n}")
    if args.n_scan < 1:
        raise UsageError(f"--n-scan must be >= 1, got {args.n_scan}")
    return RdwConfig(
        grid_n=args.grid_n,
        spacing=args.spacing,
        n_scan=args.n_scan,
        aggregate=args.aggregate,
        reach_grid_n=base.reach_grid_n,
        shrink_factor=base.shrink_factor,
        min_step=args.hj_min_step,
        max_evals=args.hj_max_evals,
    )


def _cmd_rdw(args: argparse.Namespace) -> None:
    mtype, geom = _geometry(args)
    result = compute_rdw(geom, args.kmin, _config(args, RdwConfig()))
    with _output(args.out) as out:
        fmt.write_rdw_json(result, mtype, out)


def _cmd_singular(args: argparse.Namespace) -> None:
    _, geom = _geometry(args)
    if args.grid_n < 64:
        raise UsageError(f"--grid-n must be >= 64, got {args.grid_n}")
    spacing = args.spacing if args.spacing is not None else max_reach(geom) / 500.0
    s = singular_set(geom, args.grid_n, spacing)
    with _output(args.out) as out:
        fmt.write_singular_csv(s, out)


def _cmd_sweep(args: argparse.Namespace) -> None:
    mtype = ManipulatorType.from_tag(args.type)
    try:
        grid = GridSpec.for_type(mtype, args.min, args.max, args.step)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    config = _config(args, SWEEP_CONFIG)

    def progress(done: int, total: int) -> None:
        sys.stderr.write(f"\rsweep {mtype.tag}: {100 * done // total:3d}%")
        if done == total:
            sys.stderr.write("\n")
        sys.stderr.flush()

    field = sweep_eta(mtype, grid, args.kmin, config, jobs=args.jobs,
                      progress=None if args.quiet else progress)
    with _output(args.out) as out:
        fmt.write_sweep_csv(field, out)


def _cmd_contour(args: argparse.Namespace) -> None:
    try:
        levels = [float(v) for v in args.levels.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--levels must be comma-separated numbers, got {args.levels!r}") from None
    try:
        with open(args.input, encoding="utf-8", newline="") as fh:
            field = fmt.read_sweep_csv(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(f"{args.input}: {exc}") from None
    contours = extract_contours(field, levels)
    kind = args.format or ("svg" if (args.out or "").lower().endswith(".svg") else "csv")
    with _output(args.out) as out:
        if kind == "svg":
            out.write(fmt.contour_svg(contours, field.grid))
        else:
            fmt.write_contour_csv(contours, out)


_COMMANDS = {"rdw": _cmd_rdw, "singular": _cmd_singular, "sweep": _cmd_sweep, "contour": _cmd_contour}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = _parse(argv)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.WARNING,
            stream=sys.stderr,
            format="%(levelname)s %(name)s: %(message)s",
        )
        _COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, ValueError, ArithmeticError) as exc:
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
