"""Command-line interface for batch experiments and plotting.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 sampler mixing / effective-sample-size diagnostic failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, MixingError, NumericalError
from .expconfig import load_config, parse_config_text
from .experiments import run_experiment
from .svgplot import PlotSpec, plot_csv


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument("--out", type=str, default="out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker threads for grid fan-out")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")
    return common


def _add_lattice(sp, d=3, L=8, h=None):
    sp.add_argument("--d", type=int, default=d)
    sp.add_argument("--L", type=int, default=L)
    sp.add_argument("--h", type=float, default=h)


def _add_gibbs(sp, beta=None):
    if beta is not None:
        sp.add_argument("--beta", type=float, default=beta)
    sp.add_argument("--B", type=float, default=1.0)
    sp.add_argument("--sweeps", type=int, default=4000)
    sp.add_argument("--burn-in", type=int, default=1000)


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    ap = argparse.ArgumentParser(
        prog="dnlslab",
        description="Discrete NLS lattice simulation and Gibbs sampling laboratory",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    sp = add_parser("run", help="run an experiment from an INI config")
    sp.add_argument("config", type=str)

    sp = add_parser("theory", help="closed-form phase table (CSV)")
    sp.add_argument("--beta-min", type=float, default=0.0)
    sp.add_argument("--beta-max", type=float, default=6.0)
    sp.add_argument("--steps", type=int, default=61)
    sp.add_argument("--B", type=float, default=1.0)

    sp = add_parser("sweep", help="sampled phase diagram over beta")
    _add_lattice(sp)
    _add_gibbs(sp)
    sp.add_argument("--beta-min", type=float, default=0.5)
    sp.add_argument("--beta-max", type=float, default=6.0)
    sp.add_argument("--beta-steps", type=int, default=12)

    sp = add_parser("breather", help="localized-mode persistence under the flow")
    _add_lattice(sp)
    _add_gibbs(sp, beta=4.0)
    sp.add_argument("--T", type=float, default=100.0)
    sp.add_argument("--n-samples", type=int, default=50)
    sp.add_argument("--dt", type=float, default=5e-4)

    sp = add_parser("marginals", help="Gaussian coordinate-marginal checks")
    _add_lattice(sp)
    _add_gibbs(sp, beta=1.0)
    sp.add_argument("--m", type=int, default=8)
    sp.add_argument("--n-samples", type=int, default=400)

    sp = add_parser("continuum", help="lattice-to-continuum convergence table")
    sp.add_argument("--s", type=float, default=2.0)
    sp.add_argument("--T", type=float, default=None)
    sp.add_argument("--L-grid", type=str, default="32,64,128")

    sp = add_parser("decay", help="free-evolution decay exponent fit")
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--L", type=int, default=4096)
    sp.add_argument("--t1", type=float, default=20.0)
    sp.add_argument("--t2", type=float, default=400.0)

    sp = add_parser("groundstate", help="constrained ground states over a power grid")
    _add_lattice(sp, d=3, L=16)
    sp.add_argument("--nu-grid", type=str, default="0.5,1,2,4")
    sp.add_argument("--p", type=float, default=3.0)
    sp.add_argument("--bracket-lo", type=float, default=None)
    sp.add_argument("--bracket-hi", type=float, default=None)

    sp = add_parser("jjt", help="saturable mixed-ensemble concentration")
    sp.add_argument("--n-modes-grid", type=str, default="8,16,32")
    sp.add_argument("--B", type=float, default=2.0)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=20000)
    sp.add_argument("--box-length", type=float, default=16.0)

    sp = add_parser("plot", help="chart CSV columns as a standalone SVG")
    sp.add_argument("csv", type=str)
    sp.add_argument("--x", type=str, required=True)
    sp.add_argument("--y", type=str, required=True, help="comma-separated y columns")
    sp.add_argument("--out-file", type=str, default="plot.svg")
    sp.add_argument("--title", type=str, default="")
    sp.add_argument("--xlabel", type=str, default="")
    sp.add_argument("--ylabel", type=str, default="")
    sp.add_argument("--kind", type=str, default="line", choices=["line", "scatter"])
    return ap


def _config_from_args(args) -> str:
    c = args.command
    head = f"[experiment]\nname = {{name}}\nseed = {args.seed}\n"
    if c == "theory":
        return head.format(name="theory_table") + (
            f"[theory_table]\nbeta_min = {args.beta_min}\nbeta_max = {args.beta_max}\n"
            f"steps = {args.steps}\nB = {args.B}\n"
        )
    if c == "sweep":
        return head.format(name="sweep") + _lattice_block(args) + (
            f"[gibbs]\nB = {args.B}\nbeta_min = {args.beta_min}\nbeta_max = {args.beta_max}\n"
            f"beta_steps = {args.beta_steps}\nsweeps = {args.sweeps}\nburn_in = {args.burn_in}\n"
        )
    if c == "breather":
        return head.format(name="breather") + _lattice_block(args) + (
            f"[gibbs]\nB = {args.B}\nbeta = {args.beta}\nsweeps = {args.sweeps}\n"
            f"burn_in = {args.burn_in}\n"
            f"[breather]\nT = {args.T}\nn_samples = {args.n_samples}\ndt = {args.dt}\n"
        )
    if c == "marginals":
        return head.format(name="marginals") + _lattice_block(args) + (
            f"[gibbs]\nB = {args.B}\nbeta = {args.beta}\nsweeps = {args.sweeps}\n"
            f"burn_in = {args.burn_in}\n"
            f"[marginals]\nm = {args.m}\nn_samples = {args.n_samples}\n"
        )
    if c == "continuum":
        t = args.T if args.T is not None else (0.5 if args.s >= 1 else 0.1)
        return head.format(name="continuum") + (
            f"[continuum]\ns = {args.s}\nT = {t}\nL_grid = {args.L_grid}\n"
        )
    if c == "decay":
        return head.format(name="decay") + (
            f"[decay]\nd = {args.d}\nL = {args.L}\nt1 = {args.t1}\nt2 = {args.t2}\n"
        )
    if c == "groundstate":
        extra = ""
        if args.bracket_lo is not None and args.bracket_hi is not None:
            extra = f"bracket_lo = {args.bracket_lo}\nbracket_hi = {args.bracket_hi}\n"
        return head.format(name="groundstate") + _lattice_block(args) + (
            f"[groundstate]\nnu_grid = {args.nu_grid}\np = {args.p}\n" + extra
        )
    if c == "jjt":
        return head.format(name="jjt_concentration") + (
            f"[jjt_concentration]\nn_modes_grid = {args.n_modes_grid}\nB = {args.B}\n"
            f"C = {args.C}\nsamples = {args.samples}\nbox_length = {args.box_length}\n"
        )
    raise ConfigError(f"no config template for command {c!r}")


def _lattice_block(args) -> str:
    block = f"[lattice]\nd = {args.d}\nL = {args.L}\n"
    if args.h is not None:
        block += f"h = {args.h}\n"
    return block


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plot":
            spec = PlotSpec(
                title=args.title, xlabel=args.xlabel, ylabel=args.ylabel,
                x_column=args.x, y_columns=[c.strip() for c in args.y.split(",") if c.strip()],
                kind=args.kind,
            )
            had_data = plot_csv(args.csv, spec, args.out_file)
            if not had_data and not args.quiet:
                print(f"warning: {args.csv} has no data rows; wrote empty axes", file=sys.stderr)
            if not args.quiet:
                print(f"wrote {args.out_file}")
            return 0
        if args.command == "run":
            cfg = load_config(args.config)
        else:
            cfg = parse_config_text(_config_from_args(args))
        writer = run_experiment(cfg, args.out, threads=args.threads)
        if not args.quiet:
            for name in sorted(writer.hashes):
                print(f"wrote {writer.dir / name}")
            print(f"wrote {writer.dir / 'manifest.json'}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except MixingError as exc:
        print(f"mixing diagnostic failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
