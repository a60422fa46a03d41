"""Command-line front end: spectrum lattices, relation verification, the
light-cone obstruction probe, tensor and operator dumps.

All delimited outputs are byte-deterministic for a fixed configuration: rows
are emitted in a fixed order and floats are printed with repr-style shortest
round-trip formatting.  When ``--plot`` is given, the report path additionally
renders a matplotlib figure next to the delimited output.
"""

import argparse
import json
import sys
from dataclasses import dataclass

from .qnum import DeformationParams
from .hilbert import (
    SECTOR_BY_NAME,
    Sector,
    SectorKind,
    TruncationWindow,
    default_window,
    spectrum_points,
)
from .operators import build_operators
from .verify import lightcone_obstruction, run_suite
from . import tensors

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    """Validated bundle of everything a command run depends on."""

    q: float
    sectors: list
    scale: float
    window: TruncationWindow | None
    tol: float
    fmt: str
    out: str | None
    plot: str | None = None
    phases: dict | None = None

    @property
    def params(self) -> DeformationParams:
        return DeformationParams(self.q)

    def sector(self, kind: SectorKind) -> Sector:
        sec = Sector(kind, self.scale)
        sec.check_scale(self.params)
        return sec

    def window_for(self, kind: SectorKind, margin: int = 0) -> TruncationWindow:
        if self.window is not None:
            return self.window
        return default_window(kind, margin)


def _parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a range like -4:4, got {text!r}")
    if a > b:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return a, b


def _parse_sectors(text: str) -> list:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if names == ["all"]:
        return [SectorKind.TIME_FORWARD, SectorKind.TIME_BACKWARD, SectorKind.SPACE]
    out = []
    for nm in names:
        if nm not in SECTOR_BY_NAME:
            raise ValueError(
                f"unknown sector {nm!r}; choose from space, time+, time-, light, all"
            )
        out.append(SECTOR_BY_NAME[nm])
    if not out:
        raise ValueError("no sector given")
    return out


def _parse_phases(text: str) -> dict:
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        n, _, val = item.partition("=")
        out[int(n)] = float(val)
    return out


def _common_flags(sp):
    sp.add_argument("--q", type=float, default=1.1, help="deformation parameter (> 1)")
    sp.add_argument("--sector", type=str, default="space",
                    help="space | time+ | time- | light (comma list or 'all' "
                         "where sensible)")
    sp.add_argument("--scale", type=float, default=1.0,
                    help="sector scale l0 / |t0| / tau0, in [1, q)")
    sp.add_argument("--jmax", type=int, default=None)
    sp.add_argument("--nrange", type=_parse_range, default=None, metavar="A:B")
    sp.add_argument("--Mrange", type=_parse_range, default=None, metavar="A:B")
    sp.add_argument("--margin", type=int, default=0,
                    help="extra interior margin added to every relation budget")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--format", dest="fmt", type=str, default=None)
    sp.add_argument("--out", type=str, default=None)
    sp.add_argument("--plot", type=str, default=None,
                    help="also render a matplotlib figure to this file")
    sp.add_argument("--phases", type=_parse_phases, default=None, metavar="N=A,...",
                    help="light-like scaling phases alpha_n (radians)")


def _config(args, default_fmt: str) -> RunConfig:
    sectors = _parse_sectors(args.sector)
    window = None
    if args.jmax is not None or args.nrange is not None or args.Mrange is not None:
        base = default_window(sectors[0])
        jmax = args.jmax if args.jmax is not None else base.j_max
        n_lo, n_hi = args.nrange if args.nrange is not None else (base.n_lo, base.n_hi)
        M_lo, M_hi = args.Mrange if args.Mrange is not None else (base.M_lo, base.M_hi)
        if sectors[0] is SectorKind.LIGHT:
            M_lo = M_hi = 0
        window = TruncationWindow(jmax, n_lo, n_hi, M_lo, M_hi, args.margin)
    elif args.margin:
        window = default_window(sectors[0], args.margin)
    return RunConfig(
        q=args.q, sectors=sectors, scale=args.scale, window=window,
        tol=args.tol, fmt=args.fmt or default_fmt, out=args.out,
        plot=args.plot, phases=args.phases,
    )


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# spectrum


def _spectrum_svg(points, width=640, height=640) -> str:
    rmax = max((pt.r for pt in points), default=1.0)
    tmax = max((abs(pt.t) for pt in points), default=1.0)
    lim = 1.05 * max(rmax, tmax, 1e-9)
    pad = 40.0

    def sx(r):
        return pad + (width - 2 * pad) * r / lim

    def sy(t):
        return height / 2 - (height / 2 - pad) * t / lim

    rows = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<line x1="{sx(0):.3f}" y1="{sy(0):.3f}" x2="{sx(lim):.3f}" '
        f'y2="{sy(lim):.3f}" stroke="#999" stroke-width="1"/>',
        f'<line x1="{sx(0):.3f}" y1="{sy(0):.3f}" x2="{sx(lim):.3f}" '
        f'y2="{sy(-lim):.3f}" stroke="#999" stroke-width="1"/>',
        f'<text x="{width - pad:.3f}" y="{height / 2 + 14:.3f}" '
        f'font-size="12">r</text>',
        f'<text x="{pad + 4:.3f}" y="{pad - 8:.3f}" font-size="12">t</text>',
    ]
    color = {"time+": "#d62728", "time-": "#ff7f0e",
             "space": "#1f77b4", "light": "#2ca02c"}
    for pt in points:
        rows.append(
            f'<circle cx="{sx(pt.r):.3f}" cy="{sy(pt.t):.3f}" r="1.6" '
            f'fill="{color.get(pt.sector.value, "#000")}"/>'
        )
    rows.append("</svg>")
    return "\n".join(rows) + "\n"


def cmd_spectrum(args) -> int:
    cfg = _config(args, default_fmt="csv")
    p = cfg.params
    points = []
    for kind in cfg.sectors:
        sec = cfg.sector(kind)
        win = cfg.window_for(kind)
        if args.nmax is not None:
            n_lo = 0 if kind.is_time else -args.nmax
            n_range = (n_lo, args.nmax)
        else:
            n_lo = max(win.n_lo, 0) if kind.is_time else win.n_lo
            n_range = (n_lo, win.n_hi)
        M_range = (0, 0) if kind is SectorKind.LIGHT else (win.M_lo, win.M_hi)
        points.extend(spectrum_points(p, sec, n_range, M_range))
    points.sort(key=lambda pt: (pt.sector.value, pt.M, pt.n))

    if cfg.fmt == "csv":
        lines = ["sector,M,n,t,r"]
        lines += [f"{pt.sector.value},{pt.M},{pt.n},{pt.t!r},{pt.r!r}"
                  for pt in points]
        _emit("\n".join(lines) + "\n", cfg.out)
    elif cfg.fmt == "json":
        doc = {
            "schema": SCHEMA_VERSION,
            "q": cfg.q,
            "scale": cfg.scale,
            "points": [
                {"sector": pt.sector.value, "M": pt.M, "n": pt.n,
                 "t": pt.t, "r": pt.r}
                for pt in points
            ],
        }
        _emit(json.dumps(doc, indent=1) + "\n", cfg.out)
    elif cfg.fmt == "svg":
        _emit(_spectrum_svg(points), cfg.out)
    else:
        print(f"unknown spectrum format {cfg.fmt!r}", file=sys.stderr)
        return 2
    if cfg.plot:
        from .plotting import spectrum_figure

        spectrum_figure(points, cfg.plot,
                        title=f"admissible (r, t), q={cfg.q}, scale={cfg.scale}")
    return 0


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    cfg = _config(args, default_fmt="table")
    p = cfg.params
    all_reports = []
    for kind in cfg.sectors:
        sec = cfg.sector(kind)
        win = cfg.window_for(kind)
        ops = build_operators(p, sec, win, phases=cfg.phases)
        all_reports.extend(run_suite(ops, tol=cfg.tol))
    ok = all(r.status in ("pass", "not-representable") for r in all_reports)

    if cfg.fmt == "json":
        doc = {
            "schema": SCHEMA_VERSION,
            "q": cfg.q,
            "tol": cfg.tol,
            "all_pass": ok,
            "relations": [
                {
                    "relation": r.relation, "group": r.group, "sector": r.sector,
                    "status": r.status, "interior_dim": r.interior_dim,
                    "max_residual": None if r.max_residual != r.max_residual
                    else r.max_residual,
                    "fro_residual": None if r.fro_residual != r.fro_residual
                    else r.fro_residual,
                    "normalization": None if r.normalization != r.normalization
                    else r.normalization,
                }
                for r in all_reports
            ],
        }
        _emit(json.dumps(doc, indent=1) + "\n", cfg.out)
    else:
        lines = [f"{'relation':32s} {'sector':7s} {'status':18s} "
                 f"{'max resid':>11s} {'norm':>11s} {'interior':>8s}"]
        for r in all_reports:
            status = r.status
            if status == "not-representable":
                status = "not representable"
            resid = f"{r.max_residual:.3e}" if r.max_residual == r.max_residual else "-"
            norm = f"{r.normalization:.3e}" if r.normalization == r.normalization else "-"
            lines.append(f"{r.relation:32s} {r.sector:7s} {status:18s} "
                         f"{resid:>11s} {norm:>11s} {r.interior_dim:8d}")
        applicable = [r for r in all_reports if r.status != "not-representable"]
        lines.append(f"overall: {'PASS' if ok else 'FAIL'} "
                     f"({sum(r.passed for r in applicable)}/{len(applicable)} "
                     f"applicable pass, "
                     f"{len(all_reports) - len(applicable)} not representable)")
        _emit("\n".join(lines) + "\n", cfg.out)
    if cfg.plot:
        from .plotting import residual_figure

        residual_figure(all_reports, cfg.plot,
                        title=f"relation residuals, q={cfg.q}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# obstruction


def cmd_obstruction(args) -> int:
    cfg = _config(args, default_fmt="table")
    if cfg.sectors != [SectorKind.LIGHT]:
        print("the obstruction probe runs on the light-like sector only "
              "(--sector light)", file=sys.stderr)
        return 2
    p = cfg.params
    sec = Sector(SectorKind.LIGHT, args.tau0)
    win = cfg.window_for(SectorKind.LIGHT)
    ops = build_operators(p, sec, win, phases=cfg.phases)
    rep = lightcone_obstruction(ops)
    doc = {
        "schema": SCHEMA_VERSION,
        "q": rep.q,
        "tau0": rep.tau0,
        "verdict": rep.verdict,
        "rows": [
            {"n": r.n, "t": r.t, "sv_ratio": r.sv_ratio, "det": r.det,
             "u_element": r.u_element, "inhomogeneity": r.inhomogeneity,
             "inhomogeneity_over_u": r.inhomogeneity_over_u,
             "inconsistency": r.inconsistency, "solvable": r.solvable}
            for r in rep.rows
        ],
    }
    if cfg.fmt == "json":
        _emit(json.dumps(doc, indent=1) + "\n", cfg.out)
    else:
        lines = [f"light-cone momentum system, q={rep.q}, tau0={rep.tau0}",
                 f"{'n':>4s} {'t':>12s} {'det':>10s} {'sv ratio':>10s} "
                 f"{'u elem':>9s} {'inhom/u':>9s} {'inconsist':>10s}"]
        for r in rep.rows:
            lines.append(f"{r.n:4d} {r.t:12.6g} {r.det:10.2e} {r.sv_ratio:10.2e} "
                         f"{r.u_element:9.5f} {r.inhomogeneity_over_u:9.4f} "
                         f"{r.inconsistency:10.4f}")
        lines.append(f"verdict: {rep.verdict}")
        _emit("\n".join(lines) + "\n", cfg.out)
    return 0


# ---------------------------------------------------------------------------
# tensors and operator dumps


def cmd_tensors(args) -> int:
    cfg = _config(args, default_fmt="json")
    p = cfg.params
    try:
        arr = tensors.named_tensor(p, args.tensor)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return 2
    dims = 3 if arr.shape[0] == 3 else 4
    doc = {
        "schema": SCHEMA_VERSION,
        "tensor": args.tensor,
        "q": cfg.q,
        "component_order": list(tensors.IDX3 if dims == 3 else tensors.IDX4),
        "layout": "nested arrays indexed [a][b] or [a][b][c](,[d]); "
                  "pair indices flatten row-major in the component order",
        "data": arr.tolist(),
    }
    _emit(json.dumps(doc, indent=1) + "\n", cfg.out)
    return 0


def cmd_dump_op(args) -> int:
    cfg = _config(args, default_fmt="json")
    p = cfg.params
    kind = cfg.sectors[0]
    sec = cfg.sector(kind)
    win = cfg.window_for(kind)
    name = {"Lambda": "Lam", "LambdaInv": "LamInv"}.get(args.op, args.op)
    ops = build_operators(p, sec, win, phases=cfg.phases)
    if name not in ops:
        print(f"unknown operator {args.op!r}; available: "
              f"{', '.join(sorted(ops))}", file=sys.stderr)
        return 2
    op = ops[name]
    entries = sorted(
        ([list((rl.j, rl.m, rl.n, rl.M)), list((cl.j, cl.m, cl.n, cl.M)),
          v.real, v.imag]
         for rl, cl, v in op.entries()),
        key=lambda e: (e[1], e[0]),
    )
    doc = {
        "schema": SCHEMA_VERSION,
        "operator": args.op,
        "sector": kind.value,
        "q": cfg.q,
        "scale": cfg.scale,
        "dim": op.dim,
        "labels": "[j, m, n, M]",
        "entries": entries,
    }
    _emit(json.dumps(doc, indent=1) + "\n", cfg.out)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qmink",
        description="finite matrix representations of a q-deformed Minkowski "
                    "space algebra: spectra, relation verification, the "
                    "light-cone obstruction",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="emit the admissible (t, r) lattice")
    _common_flags(sp)
    sp.add_argument("--nmax", type=int, default=None,
                    help="largest |n| to emit (overrides --nrange)")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("verify", help="run the relation catalog")
    _common_flags(sp)
    sp.add_argument("--report", dest="fmt_alias", type=str, default=None,
                    choices=["table", "json"], help="alias for --format")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("obstruction",
                        help="probe the light-cone momentum obstruction")
    _common_flags(sp)
    sp.add_argument("--tau0", type=float, default=1.0)
    sp.set_defaults(func=cmd_obstruction, sector="light")

    sp = sub.add_parser("tensors", help="dump a constant tensor as JSON")
    _common_flags(sp)
    sp.add_argument("--tensor", type=str, required=True,
                    help="g3 | eta | epsilon3 | rhat3 | R_I | R_II | R_II_inv "
                         "| epsilon4 | P_plus | P_minus | P_T | P_S | P_A")
    sp.set_defaults(func=cmd_tensors)

    sp = sub.add_parser("dump-op", help="dump one operator's matrix elements")
    _common_flags(sp)
    sp.add_argument("--op", type=str, required=True,
                    help="X0, X+, X-, X3, XcircX, R+, ..., S-, U, P0, P+, "
                         "Lambda, LambdaInv, L+, W, T+, tau3, ...")
    sp.set_defaults(func=cmd_dump_op)
    return ap


_RANGE_FLAGS = ("--nrange", "--Mrange")


def _fuse_range_args(argv):
    """Join '--nrange -4:4' into '--nrange=-4:4' so argparse accepts the
    leading minus sign."""
    import re

    out, skip = [], False
    rng = re.compile(r"^-?\d+:-?\d+$")
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok in _RANGE_FLAGS and i + 1 < len(argv) and rng.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            skip = True
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    ap = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = ap.parse_args(_fuse_range_args(list(argv)))
    if getattr(args, "fmt_alias", None):
        args.fmt = args.fmt_alias
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
