"""Command line entry point: ``expandolab <command> [options]``.

Commands
--------
entropy      JSON entropy report for one map
sweep        CSV table over a parameter grid
quasimarkov  CSV series of image measures along one orbit
render       SVG drawing of the smoothness domains of an iterate
verify       run the acceptance or property suite
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from contextlib import contextmanager

from . import __version__, diagnostics, entropy, verify
from .errors import ExpandolabError, InvalidConfig
from .maps import FAMILIES, iterate, make_family, typical_point
from .partition import refine

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _threads_default() -> int:
    try:
        return max(1, int(os.environ.get("EXPANDOLAB_THREADS", "1")))
    except ValueError:
        return 1


def _map_args(p: argparse.ArgumentParser, single: bool = True) -> None:
    p.add_argument("--family", choices=FAMILIES, default="tent1d")
    if single:
        p.add_argument("--t", type=float, default=None, help="family parameter")
        p.add_argument("--p", type=float, default=None, help="skew tent turning point")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="-", help="output file ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="expandolab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="entropy report (JSON)")
    _map_args(p)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--n", type=int, default=None, help="SMB refinement depth")
    p.add_argument("--block-n", type=int, default=None)
    p.add_argument("--orbit", type=int, default=entropy.DEFAULT_ORBIT)
    p.add_argument("--samples", type=int, default=entropy.DEFAULT_SAMPLES)

    p = sub.add_parser("sweep", help="parameter sweep (CSV)")
    _map_args(p, single=False)
    p.add_argument("--t-min", type=float, required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--t-step", type=float, required=True)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--block-n", type=int, default=None)
    p.add_argument("--orbit", type=int, default=entropy.DEFAULT_ORBIT)
    p.add_argument("--samples", type=int, default=entropy.DEFAULT_SAMPLES)
    p.add_argument("--power", type=int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("quasimarkov", help="image-measure series (CSV)")
    _map_args(p)
    p.add_argument("--orbit", type=int, default=200, help="number of steps N")
    p.add_argument("--window", type=int, default=50)
    p.add_argument("--x0", type=float, nargs="+", default=None)

    p = sub.add_parser("render", help="smoothness domains of an iterate (SVG)")
    _map_args(p)
    p.add_argument("--power", type=int, default=1)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", default="acceptance")
    p.add_argument("--tol-scale", type=float, default=1.0)
    p.add_argument("--only", action="append", default=None, help="criterion name prefix (repeatable)")
    return parser


def _parameter(args) -> float:
    if args.family == "skew_tent" and args.p is not None:
        return args.p
    if args.t is not None:
        return args.t
    return {"tent1d": 2.0, "tent2d": 1.0, "skew_tent": 1.0 / 3.0}[args.family]


@contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def cmd_entropy(args) -> int:
    t = _parameter(args)
    m = make_family(args.family, t)
    report, _rho = entropy.entropy_report(
        m, grid_k=args.grid, n=args.n, block_n=args.block_n, orbit_length=args.orbit,
        samples=args.samples, seed=args.seed, family=args.family, parameter=t)
    with _output(args.out) as fh:
        fh.write(report.to_json())
    return EXIT_OK


def cmd_sweep(args) -> int:
    ts = diagnostics.parameter_grid(args.t_min, args.t_max, args.t_step)
    cfg = diagnostics.SweepConfig(
        grid_k=args.grid, n=args.n, block_n=args.block_n, orbit=args.orbit, samples=args.samples,
        seed=args.seed, power=args.power, beta=args.beta,
        threads=args.threads if args.threads is not None else _threads_default())
    table = diagnostics.entropy_sweep(args.family, ts, cfg)
    if args.out == "-":
        table.to_csv("/dev/stdout")
    else:
        table.to_csv(args.out)
    return EXIT_OK if any(r.status == "ok" for r in table.rows) else EXIT_FAIL


def cmd_quasimarkov(args) -> int:
    m = make_family(args.family, _parameter(args))
    if args.x0 is None:
        x0 = typical_point(m, args.seed)
    elif len(args.x0) != m.dim:
        raise InvalidConfig(f"--x0 needs {m.dim} coordinate(s)")
    else:
        x0 = args.x0[0] if m.dim == 1 else tuple(args.x0)
    scan = diagnostics.quasi_markov_scan(m, x0, args.orbit, args.window)
    scan.to_csv("/dev/stdout" if args.out == "-" else args.out)
    return EXIT_OK


def render_svg(m, power: int, size: int = 600) -> str:
    """SVG of the ambient outline and the domains of ``m`` iterated ``power`` times."""
    cells = refine(iterate(m, power), 1)
    margin = 10.0
    if m.dim == 1:
        lo, hi = m.bbox
        sx = (size - 2 * margin) / (hi - lo)
        height = 60
        body = [f'<rect x="{margin:.6f}" y="20" width="{(hi - lo) * sx:.6f}" height="20" '
                f'fill="none" stroke="black" stroke-width="1"/>']
        for c in cells:
            x = margin + (c.cell.lo - lo) * sx
            body.append(f'<path d="M{x:.6f},20 L{x:.6f},40" stroke="#1f77b4" stroke-width="0.5"/>')
    else:
        x0, x1, y0, y1 = m.bbox
        s = (size - 2 * margin) / max(x1 - x0, y1 - y0)
        height = int(math.ceil((y1 - y0) * s + 2 * margin))

        def path(poly):
            pts = [(margin + (x - x0) * s, height - margin - (y - y0) * s) for x, y in poly.vertices]
            return "M" + " L".join(f"{px:.6f},{py:.6f}" for px, py in pts) + " Z"

        body = [f'<path d="{path(c.cell)}" fill="none" stroke="#1f77b4" stroke-width="0.4"/>'
                for c in cells]
        body += [f'<path d="{path(a)}" fill="none" stroke="black" stroke-width="1.2"/>' for a in m.ambient]
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- expandolab {__version__} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{height}" '
        f'viewBox="0 0 {size} {height}">',
        f"<title>{m.name} power {power}: {len(cells)} domains</title>",
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def cmd_render(args) -> int:
    if args.power < 1:
        raise InvalidConfig("--power must be >= 1")
    svg = render_svg(make_family(args.family, _parameter(args)), args.power)
    with _output(args.out) as fh:
        fh.write(svg)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in verify.SUITES:
        raise InvalidConfig(f"unknown suite {args.suite!r}; choose from {sorted(verify.SUITES)}")
    only = None
    if args.only:
        only = [n for n in verify.SUITES[args.suite] if any(n.startswith(o) for o in args.only)]
    results = verify.run_suite(args.suite, args.tol_scale, only=only, echo=print)
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_FAIL if failed else EXIT_OK


COMMANDS = {
    "entropy": cmd_entropy,
    "sweep": cmd_sweep,
    "quasimarkov": cmd_quasimarkov,
    "render": cmd_render,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ExpandolabError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}, sort_keys=True))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
