"""Command line interface.

Angles are degrees on the command line and radians everywhere else.  Any
option can also come from a ``--config`` file of ``key = value`` lines
(keys are the long option names with ``-`` or ``_``); command line flags win.

Exit status: 0 success, 1 a verification check failed, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from . import io as hio

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MIX_CHECKPOINTS = "1,20,200,2000,20000"


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# config files
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Subcommand plus option values, exactly as typed (strings)."""

    command: str
    options: dict = field(default_factory=dict)

    def to_text(self):
        lines = [f"command = {self.command}"]
        for k in sorted(self.options):
            lines.append(f"{k} = {self.options[k]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        command = None
        opts = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"config line {n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            k = k.replace("-", "_")
            if k == "command":
                command = v
            else:
                opts[k] = v
        return cls(command or "", opts)


def _config_defaults(sub, cfg: RunConfig):
    """Convert config strings using each option's own type and choices."""
    out = {}
    known = {a.dest: a for a in sub._actions}
    for k, v in cfg.options.items():
        if k not in known or k in ("help", "config"):
            raise UsageError(f"unknown config key {k!r}")
        act = known[k]
        if act.nargs == 0:
            out[k] = v.lower() in ("1", "true", "yes", "on")
            continue
        conv = act.type or str
        try:
            val = conv(v)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"config key {k}: {exc}") from None
        if act.choices is not None and val not in act.choices:
            raise UsageError(f"config key {k}: {v!r} not in {sorted(act.choices)}")
        out[k] = val
    return out


# --------------------------------------------------------------------------
# argument types
# --------------------------------------------------------------------------

def angle(text):
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"angle must be finite, got {text!r}")
    return v


def positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return v


def span(text):
    """``START:STOP`` in degrees."""
    try:
        a, b = (float(s) for s in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP, got {text!r}") from None
    return (a, b)


def int_list(text):
    """``1,2,5`` or ``1..7``."""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(s) for s in text.split(",") if s.strip()]


def float_list(text):
    return [float(s) for s in text.split(",") if s.strip()]


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _protocol_args(p, required=True):
    p.add_argument("--alpha", type=angle, required=required, help="first rotation angle (deg)")
    p.add_argument("--beta", type=angle, required=required, help="second rotation angle (deg)")
    p.add_argument("--gamma", type=angle, required=required, help="angle between the axes (deg)")


def _fat_args(p, eps, iters, res):
    p.add_argument("--eps", type=positive_float, default=eps, help=f"fat-line half-width, radians (default {eps:g})")
    p.add_argument("--iters", type=nonneg_int, default=iters, help=f"iterations N (default {iters})")
    p.add_argument("--res", type=int, default=res, help=f"grid resolution (default {res})")


def build_parser():
    ap = argparse.ArgumentParser(prog="hemishuffle", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version="hemishuffle 0.1.0")
    sp = ap.add_subparsers(dest="command", required=True)

    def sub(name, help_):
        p = sp.add_parser(name, help=help_)
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--threads", type=int, default=None,
                       help="worker cap (default $HEMISHUFFLE_THREADS or the CPU count)")
        return p

    p = sub("eset", "render the fat-line exceptional set")
    _protocol_args(p, required=False)
    _fat_args(p, 1e-4, 20000, 2000)
    p.add_argument("--out", default="eset.pgm", help="raster path (.pgm or .png)")
    p.add_argument("--first-hit", default=None, help="optional 16-bit PGM of first-hit iterations")
    p.add_argument("--csv", default=None, help="optional per-point CSV (X, Z, hit, first_hit)")

    p = sub("mix", "advect a coloured initial condition")
    _protocol_args(p, required=False)
    p.add_argument("--field", choices=["vertical", "horizontal", "both", "image"], default="horizontal")
    p.add_argument("--image", default=None, help="input image for --field image")
    p.add_argument("--checkpoints", type=int_list, default=int_list(MIX_CHECKPOINTS))
    p.add_argument("--res", type=int, default=1000)
    p.add_argument("--out-prefix", default="mix", help="files are written as PREFIX_N.ppm")
    p.add_argument("--format", choices=["ppm", "png"], default="ppm")

    p = sub("sweep", "coverage over an alpha-beta lattice at fixed gamma")
    p.add_argument("--gamma", type=angle, required=False)
    p.add_argument("--step", type=positive_float, default=2.0, help="alpha and beta step (deg)")
    p.add_argument("--alpha-step", type=positive_float, default=None)
    p.add_argument("--beta-step", type=positive_float, default=None)
    p.add_argument("--alpha-range", type=span, default=(0.0, 180.0))
    p.add_argument("--beta-range", type=span, default=(0.0, 180.0))
    _fat_args(p, 0.01, 500, 300)
    p.add_argument("--fold", action="store_true", help="reuse fundamental-domain representatives")
    p.add_argument("--csv", default="sweep.csv")
    p.add_argument("--image", default=None, help="heatmap path (.pgm or .png)")

    p = sub("flame", "coverage along alpha = beta against gamma")
    p.add_argument("--alpha-step", type=positive_float, default=1.0)
    p.add_argument("--gamma-step", type=positive_float, default=1.0)
    p.add_argument("--alpha-range", type=span, default=(0.0, 180.0))
    p.add_argument("--gamma-range", type=span, default=(0.0, 180.0))
    _fat_args(p, 0.01, 500, 300)
    p.add_argument("--fold", action="store_true")
    p.add_argument("--csv", default="flame.csv")
    p.add_argument("--image", default=None, help="heatmap path; .ppm/.png gets branch overlays")
    p.add_argument("--overlay-j", type=int, default=3, help="draw branches j = 1..J (0: none)")

    p = sub("avg", "lattice-averaged coverage against gamma")
    p.add_argument("--gammas", type=float_list, default=float_list("60,75,90,105,120"))
    p.add_argument("--step", type=positive_float, default=10.0)
    _fat_args(p, 0.01, 500, 300)
    p.add_argument("--fold", action="store_true")
    p.add_argument("--csv", default="avg.csv", help="summary CSV (per-protocol rows go to CSV.rows.csv)")

    p = sub("branches", "resonance branch curves, intersections and equal-area curves")
    p.add_argument("--kind", choices=["branches", "intersections", "equal-area"], default="branches")
    p.add_argument("--j-max", type=int, default=7)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--pair", default="1,4", help="atoms for --kind equal-area")
    p.add_argument("--gamma", type=angle, default=120.0, help="gamma for --kind equal-area (deg)")
    p.add_argument("--csv", default="-")

    p = sub("theta", "rotation angle of an itinerary")
    _protocol_args(p, required=False)
    p.add_argument("--itinerary", default="41")
    p.add_argument("--j", type=int, default=None, help="also evaluate the 41^j closed form")

    p = sub("atoms", "atom areas and the smallest atom")
    _protocol_args(p, required=False)
    p.add_argument("--mc", type=int, default=0, help="Monte Carlo samples for a cross-check")
    p.add_argument("--seed", type=int, default=0)

    p = sub("verify", "run the invariant battery")
    p.add_argument("--check", action="append", default=None,
                   choices=["all", "symmetry", "prop1", "areas", "area-mc", "branches", "period15"])
    p.add_argument("--j", type=int_list, default=int_list("1..7"))
    p.add_argument("--samples", type=int, default=200_000, help="Monte Carlo samples for area-mc")
    p.add_argument("--csv", default=None, help="symmetry residual report")
    return ap, sp


def parse(argv=None):
    ap, sp = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = RunConfig.from_text(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        if cfg.command and cfg.command != args.command:
            raise UsageError(f"config is for {cfg.command!r}, not {args.command!r}")
        sub = sp.choices[args.command]
        sub.set_defaults(**_config_defaults(sub, cfg))
        args = ap.parse_args(argv)
    return args


def to_config(args):
    """:class:`RunConfig` echoing every option of a parsed namespace."""
    opts = {}
    for k, v in sorted(vars(args).items()):
        if k in ("command", "config") or v is None:
            continue
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, tuple):
            v = ":".join(repr(float(x)) for x in v)
        elif isinstance(v, list):
            v = ",".join(repr(x) for x in v)
        elif isinstance(v, float):
            v = repr(v)
        opts[k] = str(v)
    return RunConfig(args.command, opts)


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

def _protocol(args):
    from .pwi import Protocol

    missing = [k for k in ("alpha", "beta", "gamma") if getattr(args, k, None) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + m for m in missing))
    return Protocol.from_degrees(args.alpha, args.beta, args.gamma)


def _fat(args):
    from .fatline import FatParams

    if args.res < 2:
        raise UsageError("--res must be >= 2")
    try:
        return FatParams(args.eps, args.iters)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_writable(path):
    d = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(d) or not os.access(d, os.W_OK):
        raise UsageError(f"cannot write to {path!r}")


def _say(msg):
    print(msg, flush=True)


def run_resumable(csv_path, triples, fp, res, threads, fold=False, chunk=None):
    """Append one CSV row per ``(alpha, beta, gamma)`` triple, skipping rows already present.

    Returns the phi values in lattice order.  Existing rows must match the
    requested lattice and settings, otherwise :class:`UsageError` is raised.
    """
    from .pwi import Protocol
    from .sweep import phi_many

    _check_writable(csv_path)
    expected = [hio.sweep_row(a, b, g, 0.0, fp.epsilon, fp.iters, res).split(",") for a, b, g in triples]
    done = []
    if os.path.exists(csv_path) and os.path.getsize(csv_path) > 0:
        try:
            done = hio.read_sweep_csv(csv_path)
        except hio.PartialFileError as exc:
            raise UsageError(str(exc)) from None
        if len(done) > len(triples):
            raise UsageError(f"{csv_path}: has more rows than the requested lattice")
        for row, exp in zip(done, expected):
            same = row[:3] == tuple(exp[:3]) and row[4:6] == tuple(exp[4:6]) and row[6] == exp[6].strip()
            if not same:
                raise UsageError(f"{csv_path}: existing row {','.join(row)} does not match this run")
        mode = "a"
    else:
        mode = "w"
    phis = [float(r[3]) for r in done]
    threads = _backend.resolve_threads(threads)
    if chunk is None:
        chunk = max(threads, 8)
    with open(csv_path, mode) as fh:
        if mode == "w":
            hio.append_line(fh, ",".join(hio.SWEEP_HEADER) + "\n")
        start = len(done)
        for lo in range(start, len(triples), chunk):
            part = triples[lo:lo + chunk]
            prs = [Protocol.from_degrees(*t) for t in part]
            vals = phi_many(prs, fp, res, threads, fold)
            for (a, b, g), v in zip(part, vals):
                line = hio.sweep_row(a, b, g, v, fp.epsilon, fp.iters, res)
                hio.append_line(fh, line)
                # parse back so resumed and fresh runs feed identical values downstream
                phis.append(float(line.split(",")[3]))
    return phis


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_eset(args):
    from .fatline import render_eset

    pr, fp = _protocol(args), _fat(args)
    for p in (args.out, args.first_hit, args.csv):
        if p:
            _check_writable(p)
    cg = render_eset(pr, fp, args.res, args.threads)
    comment = f"eset {pr} eps={fp.epsilon:g} iters={fp.iters} res={args.res} phi={cg.phi:.6f}"
    hio.write_image(args.out, cg.raster(), comment)
    if args.first_hit:
        hio.write_image(args.first_hit, cg.first_hit_raster(), comment + " (first_hit + 1)")
    if args.csv:
        hio.write_grid_csv(args.csv, cg)
    _say(f"phi = {cg.phi:.6f}  last hit = {cg.last_hit}  -> {args.out}")
    return EXIT_OK


def cmd_mix(args):
    from .fatline import advect_field, initial_field
    from .geometry import equal_area_grid

    pr = _protocol(args)
    if args.res < 2:
        raise UsageError("--res must be >= 2")
    image = None
    if args.field == "image":
        if not args.image:
            raise UsageError("--field image needs --image PATH")
        if not os.path.exists(args.image):
            raise UsageError(f"input image {args.image!r} not found")
        image = hio.read_image(args.image)
    if any(n < 0 for n in args.checkpoints):
        raise UsageError("checkpoints must be >= 0")
    _check_writable(args.out_prefix + "_0." + args.format)
    grid = equal_area_grid(args.res)
    f0 = initial_field(args.field, grid, image)
    for n in sorted(args.checkpoints):
        f = advect_field(pr, f0, n, args.threads)
        path = f"{args.out_prefix}_{n}.{args.format}"
        hio.write_image(path, f.raster(fill=255), f"mix {pr} field={args.field} N={n}")
        _say(f"N = {n} -> {path}")
    return EXIT_OK


def _sweep_spec(args, **ranges):
    from .sweep import SweepSpec

    try:
        return SweepSpec(params=_fat(args), res=args.res, fold=args.fold, **ranges)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_sweep(args):
    from .sweep import CoverageMap, heatmap

    if args.gamma is None:
        raise UsageError("missing --gamma")
    sa = args.alpha_step or args.step
    sb = args.beta_step or args.step
    spec = _sweep_spec(args, alpha=(*args.alpha_range, sa), beta=(*args.beta_range, sb))
    al, be = spec.alphas(), spec.betas()
    triples = [(a, b, args.gamma) for a in al for b in be]
    phis = run_resumable(args.csv, triples, spec.params, spec.res, args.threads, spec.fold)
    cmap = CoverageMap(np.array(phis).reshape(len(al), len(be)), al, be, "alpha", "beta", spec,
                       {"gamma": args.gamma})
    if args.image:
        _check_writable(args.image)
        hio.write_image(args.image, heatmap(cmap), hio.HEATMAP_COMMENT + "; rows alpha (bottom up), cols beta")
    _say(f"{len(triples)} protocols, mean phi {cmap.phi.mean():.6f} -> {args.csv}")
    return EXIT_OK


def _branch_overlays(jmax):
    from .resonance import BranchSpec, branch_curve, branch_intersection

    curves = []
    for j in range(1, jmax + 1):
        for side in ("left", "right"):
            curves.append([(math.degrees(g), math.degrees(a)) for a, g in branch_curve(BranchSpec(j, side))])
    for jl in range(1, jmax + 1):
        for jr in range(1, jmax + 1):
            a, g = branch_intersection(jl, jr)
            curves.append([(math.degrees(g), math.degrees(a))])
    return curves


def cmd_flame(args):
    from .sweep import CoverageMap, heatmap, overlay_curves

    spec = _sweep_spec(args, alpha=(*args.alpha_range, args.alpha_step), gamma=(*args.gamma_range, args.gamma_step))
    ga, al = spec.gammas(), spec.alphas()
    triples = [(a, a, g) for g in ga for a in al]
    phis = run_resumable(args.csv, triples, spec.params, spec.res, args.threads, spec.fold)
    cmap = CoverageMap(np.array(phis).reshape(len(ga), len(al)), ga, al, "gamma", "alpha", spec)
    if args.image:
        _check_writable(args.image)
        comment = hio.HEATMAP_COMMENT + "; rows gamma (bottom up), cols alpha = beta"
        if args.image.lower().endswith(".pgm") or args.overlay_j <= 0:
            hio.write_image(args.image, heatmap(cmap, 1 if args.image.lower().endswith(".pgm") else 4), comment)
        else:
            hio.write_image(args.image, overlay_curves(cmap, _branch_overlays(args.overlay_j)), comment)
    _say(f"{len(triples)} protocols, mean phi {cmap.phi.mean():.6f} -> {args.csv}")
    return EXIT_OK


def cmd_avg(args):
    from .sweep import lattice

    fp = _fat(args)
    _check_writable(args.csv)
    ab = lattice(0.0, 180.0 - args.step, args.step)
    rows_path = os.path.splitext(args.csv)[0] + ".rows.csv"
    triples = [(a, b, g) for g in args.gammas for a in ab for b in ab]
    phis = np.array(run_resumable(rows_path, triples, fp, args.res, args.threads, args.fold))
    per = phis.reshape(len(args.gammas), -1)
    out = []
    for g, vals in zip(args.gammas, per):
        out.append((g, float(vals.mean()), len(vals), fp.epsilon, fp.iters, args.res))
    hio.write_rows(args.csv, ["gamma_deg", "mean_phi", "n_protocols", "epsilon", "iters", "res"],
                   [(float(g), m, n, float(e), i, r) for g, m, n, e, i, r in out])
    best = min(out, key=lambda r: r[1])
    for g, m, *_ in out:
        _say(f"gamma {g:g}: mean phi {m:.6f}")
    _say(f"minimum at gamma = {best[0]:g}")
    return EXIT_OK


def cmd_branches(args):
    from .resonance import BranchSpec, branch_curve, branch_intersection, equal_area_curve_points

    rows = []
    if args.kind == "branches":
        # value: +j on the left branch, -j on the right branch
        for j in range(1, args.j_max + 1):
            for side, sgn in (("left", 1), ("right", -1)):
                for a, g in branch_curve(BranchSpec(j, side), args.points):
                    rows.append((math.degrees(a), math.degrees(a), math.degrees(g), float(sgn * j)))
    elif args.kind == "intersections":
        # value: j_left + j_right, the period of the smallest cells
        for jl in range(1, args.j_max + 1):
            for jr in range(1, args.j_max + 1):
                a, g = branch_intersection(jl, jr)
                rows.append((math.degrees(a), math.degrees(a), math.degrees(g), float(jl + jr)))
    else:
        try:
            pair = tuple(int(s) for s in args.pair.split(","))
            pts = equal_area_curve_points(pair, math.radians(args.gamma), args.points)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rows = [(math.degrees(a), math.degrees(b), args.gamma, 0.0) for a, b in pts]
    if args.csv == "-":
        sys.stdout.write(",".join(hio.CURVE_HEADER) + "\n")
        for r in rows:
            sys.stdout.write(",".join(hio.fmt(v) for v in r) + "\n")
    else:
        _check_writable(args.csv)
        hio.write_rows(args.csv, hio.CURVE_HEADER, rows)
        _say(f"{len(rows)} rows -> {args.csv}")
    return EXIT_OK


def cmd_theta(args):
    from .resonance import itinerary_angle, theta_41j_closed_form

    pr = _protocol(args)
    try:
        th = itinerary_angle(pr, args.itinerary)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _say(f"theta({args.itinerary}) at {pr} = {math.degrees(th):.10f} deg")
    if args.j is not None:
        if args.j < 1:
            raise UsageError("--j must be >= 1")
        cf = theta_41j_closed_form(pr.alpha, pr.gamma, args.j)
        _say(f"closed form 41^{args.j} (alpha = beta = {math.degrees(pr.alpha):g}) = {math.degrees(cf):.10f} deg")
    return EXIT_OK


def cmd_atoms(args):
    from .pwi import atom_areas, gamma_prime, monte_carlo_areas
    from .resonance import smallest_atom

    pr = _protocol(args)
    areas = atom_areas(pr)
    _say(f"protocol {pr}")
    _say(f"gamma' = {math.degrees(gamma_prime(pr)):.6f} deg")
    for i, a in enumerate(areas.as_array(), 1):
        _say(f"A{i} = {a:.6f} sr")
    _say(f"sum = {areas.total:.15f} (2 pi = {2 * math.pi:.15f})")
    _say("smallest atom: " + ", ".join(f"P{i}" for i in smallest_atom(pr)))
    if args.mc:
        est = monte_carlo_areas(pr, args.mc, np.random.default_rng(args.seed))
        _say("monte carlo: " + " ".join(f"{v:.6f}" for v in est))
    return EXIT_OK


def cmd_verify(args):
    from . import checks

    names = args.check or ["all"]
    if "all" in names:
        names = ["symmetry", "prop1", "areas", "area-mc", "branches", "period15"]
    failed = False
    for name in names:
        if name == "symmetry":
            res, rows = checks.check_symmetries()
            if args.csv:
                _check_writable(args.csv)
                hio.write_rows(args.csv, hio.SYMMETRY_HEADER, [
                    (sid.value, *(float(v) for v in pr.degrees), float(r)) for sid, pr, r in rows
                ])
        elif name == "prop1":
            res = checks.check_prop1(js=args.j)
        elif name == "area-mc":
            res = checks.check_area_monte_carlo(samples=args.samples)
        else:
            res = checks.CHECKS[name]()
        _say(res.line())
        failed |= not res.ok
    return EXIT_FAIL if failed else EXIT_OK


COMMANDS = {
    "eset": cmd_eset,
    "mix": cmd_mix,
    "sweep": cmd_sweep,
    "flame": cmd_flame,
    "avg": cmd_avg,
    "branches": cmd_branches,
    "theta": cmd_theta,
    "atoms": cmd_atoms,
    "verify": cmd_verify,
}


def main(argv=None):
    try:
        args = parse(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"hemishuffle: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.threads is not None and args.threads < 1:
        print("hemishuffle: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hemishuffle: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hemishuffle: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
