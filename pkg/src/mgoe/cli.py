"""Command-line front end.

Exit status: 0 success, 2 usage error, 3 invalid configuration,
4 contract violation, 5 numerical failure, 6 output error. Failures also
print one JSON line ``{"error": <category>, "message": ...}`` on stderr.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .config import load_config_dict, parse_mu_grid, plan_from_dict
from .exceptions import USAGE_EXIT_CODE, ConfigurationError, MGOEError
from .experiment import poisson_baseline, run_fixed_mu, run_sweep
from .io import FORMATS, ResultBundle, default_output_dir, write_results

log = logging.getLogger("mgoe")

SUBCOMMANDS = {
    "sample": "draw the mixed ensemble and record member sizes (optionally spectra)",
    "density": "empirical spectral density with bootstrap CIs",
    "nnsd": "nearest-neighbour spacing distribution of unfolded spectra",
    "gapratio": "adjacent gap ratios, their mean and density",
    "sweep": "mean gap ratio across a grid of mixture values",
    "baseline": "gap ratios of synthetic Poisson (independent exponential) spectra",
}
_ANALYSIS = {"density": ("density",), "nnsd": ("nnsd",), "gapratio": ("gap_ratio",),
             "sample": (), "sweep": ("gap_ratio",), "baseline": ()}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(json.dumps({"error": "usage", "message": message}), file=sys.stderr)
        sys.exit(USAGE_EXIT_CODE)


def _fence(text):
    value = float(text)
    return None if math.isinf(value) else value


def _degrees(text):
    return tuple(int(part) for part in text.split(",") if part)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("experiment (flags override --config values)")
    g.add_argument("--config", type=Path, help="JSON configuration file")
    g.add_argument("--n", type=int, dest="N", help="base matrix order N (levels for baseline)")
    g.add_argument("--m", type=int, dest="M", help="ensemble size M")
    g.add_argument("--mu", type=float, help="single mixture value in (0, 1]")
    g.add_argument("--mu-grid", help="mixture grid start:stop:step (stop inclusive)")
    g.add_argument("--sigma", type=float, help="Gaussian scale of the sampled entries")
    g.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    g.add_argument("--bins", type=int, help="number of histogram bins for this analysis")
    g.add_argument("--range", nargs=2, type=float, metavar=("LOW", "HIGH"),
                   help="histogram range for this analysis")
    g.add_argument("--bootstrap", type=int, help="bootstrap resamples")
    g.add_argument("--level", type=float, help="confidence level, e.g. 0.95")
    g.add_argument("--fence-k", type=_fence, default=argparse.SUPPRESS,
                   help="Tukey fence multiplier; 'inf' disables truncation")
    g.add_argument("--degrees", type=_degrees, help="candidate unfolding degrees, e.g. 3,5,7")
    g.add_argument("--zero-convention", choices=("keep", "drop"),
                   help="gap-ratio handling of zero spacings")
    g.add_argument("--extension", choices=("centered", "cyclic"),
                   help="periodic extension scheme")
    g.add_argument("--pooled", action="store_true", help="pool gap ratios before histogramming")
    o = common.add_argument_group("output")
    o.add_argument("--format", choices=FORMATS, default="both")
    o.add_argument("--out", type=Path, help="output directory (default $MGOE_OUTPUT_DIR or ./results)")
    o.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")
    o.add_argument("--dump-spectra", action="store_true", help="also write raw eigenvalues")
    o.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="mgoe", description="Mixed Gaussian Orthogonal Ensemble spectral statistics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in SUBCOMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if name == "baseline":
            p.add_argument("--spacing", choices=("exponential", "equal"), default="exponential",
                           help="synthetic spacing law")
    return parser


def effective_plan(args):
    """Merge the config file (if any) with flag overrides."""
    data = {}
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc.strerror}") from exc
        data = load_config_dict(text)
    for flag, key in (("N", "N"), ("M", "M"), ("sigma", "sigma"), ("seed", "seed")):
        if getattr(args, flag) is not None:
            data[key] = getattr(args, flag)
    if args.mu is not None and args.mu_grid is not None:
        raise ConfigurationError("give either --mu or --mu-grid, not both")
    if args.mu is not None:
        data.pop("mu_grid", None)
        data["mu"] = args.mu
    elif args.mu_grid is not None:
        data.pop("mu", None)
        data["mu_grid"] = list(parse_mu_grid(args.mu_grid))
    if args.bootstrap is not None or args.level is not None:
        boot = data.setdefault("bootstrap", {})
        if args.bootstrap is not None:
            boot["resamples"] = args.bootstrap
        if args.level is not None:
            boot["level"] = args.level
    hist_name = {"density": "density", "nnsd": "nnsd", "gapratio": "gap_ratio"}.get(args.command)
    if hist_name and (args.bins is not None or args.range is not None or args.pooled):
        section = data.setdefault("histogram", {}).setdefault(hist_name, {})
        if args.bins is not None:
            section["bins"] = args.bins
        if args.range is not None:
            section["range"] = list(args.range)
        if args.pooled and hist_name == "gap_ratio":
            section["pooled"] = True
    if hasattr(args, "fence_k"):
        data["truncation"] = {"fence_k": args.fence_k}
    if args.degrees is not None:
        data["degrees"] = list(args.degrees)
    if args.zero_convention is not None:
        data["gap_zero_convention"] = args.zero_convention
    if args.extension is not None:
        data["extension"] = args.extension
    if "N" not in data:
        raise ConfigurationError("required key 'N' is missing (use --n or a config file)")
    data["analyses"] = list(_ANALYSIS[args.command])
    if "mu" not in data and "mu_grid" not in data and args.command != "sweep":
        data["mu"] = 1.0
    return plan_from_dict(data)


def run(args):
    plan = effective_plan(args)
    out = args.out if args.out is not None else Path(default_output_dir())
    bundle = ResultBundle(plan=plan, command=args.command, dump_spectra=args.dump_spectra)
    if args.command == "sweep":
        bundle.sweep = run_sweep(plan, n_jobs=args.workers)
        for mu, msg in bundle.sweep.errors.items():
            log.warning("mu=%s failed: %s", mu, msg)
    elif args.command == "baseline":
        settings = {"n_levels": plan.N, "M": plan.M, "seed": plan.seed, "spacing": args.spacing}
        bundle.baseline_settings = settings
        bundle.baseline = poisson_baseline(
            plan.N, plan.M, plan.seed, args.spacing, plan.gap_zero_convention,
            plan.n_resamples, plan.level,
        )
    else:
        for mu in plan.mu_grid:
            log.info("running %s at mu=%s", args.command, mu)
            bundle.fixed.append(run_fixed_mu(plan, mu, n_jobs=args.workers,
                                             keep_spectra=args.dump_spectra))
    return write_results(bundle, args.format, out)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        written = run(args)
    except MGOEError as exc:
        print(json.dumps({"error": exc.category, "message": str(exc)}), file=sys.stderr)
        return exc.exit_code
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
