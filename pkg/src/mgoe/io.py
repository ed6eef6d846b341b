"""Serialization of experiment results to CSV and JSON.

CSV floats are written with 17 significant digits (``%.17g``), enough to
round-trip every IEEE double. JSON uses Python's shortest round-trip float
repr, which parses back to the identical double. Outputs carry no
timestamps or host details, so identical runs produce identical bytes.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import plan_to_dict
from .exceptions import ConfigurationError, OutputError

FORMATS = ("csv", "json", "both")
CONFIG_FILE = "config.json"
JSON_FILE = "results.json"

HIST_HEADER = ("mu", "bin_left", "bin_right", "density", "ci_low", "ci_high")
SWEEP_HEADER = ("mu", "mean_r", "ci_low", "ci_high")
GAP_HEADER = ("mu", "member_index", "r")


@dataclass
class ResultBundle:
    """Everything one CLI invocation produces."""

    plan: object
    command: str = ""
    fixed: list = field(default_factory=list)  # FixedMuResult per mu
    sweep: object = None  # SweepResult
    baseline: object = None  # GapRatioResult
    baseline_settings: dict = None
    dump_spectra: bool = False


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def _num(value):
    """JSON-safe scalar: NaN/inf become null."""
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _list(values):
    return [_num(v) for v in np.asarray(values).tolist()]


def _hist_rows(mu, hist):
    edges = hist.bin_edges
    for b in range(hist.density.size):
        yield (mu, edges[b], edges[b + 1], hist.density[b], hist.ci_low[b], hist.ci_high[b])


def _hist_json(hist):
    return {
        "bin_edges": _list(hist.bin_edges),
        "density": _list(hist.density),
        "ci_low": _list(hist.ci_low),
        "ci_high": _list(hist.ci_high),
        "n_excluded": int(hist.n_excluded),
    }


def _gap_json(gap):
    return {
        "per_member_r": _list(gap.per_member_r),
        "mean_r": _num(gap.mean_r),
        "ci": [_num(gap.ci[0]), _num(gap.ci[1])],
        "n_pairs_used": int(gap.n_pairs_used),
    }


def _tables(bundle):
    """Map file name -> (header, rows) for every CSV the bundle yields."""
    tables = {}

    def add(name, header, rows):
        entry = tables.setdefault(name, (header, []))
        entry[1].extend(rows)

    for res in bundle.fixed:
        mu = res.mu
        if bundle.command == "sample" or res.density is res.nnsd is res.gap is None:
            add("sizes.csv", ("mu", "member_index", "size"),
                [(mu, i, n) for i, n in enumerate(res.sizes)])
        if bundle.dump_spectra and res.spectra is not None:
            add("spectra.csv", ("mu", "member_index", "level_index", "eigenvalue"),
                [(mu, i, k, v) for i, s in enumerate(res.spectra) for k, v in enumerate(s)])
        if res.density is not None:
            add("density.csv", HIST_HEADER, _hist_rows(mu, res.density))
            gap, lo, hi, unimodal = res.bimodality
            add("bimodality.csv", ("mu", "gap", "ci_low", "ci_high", "unimodal"),
                [(mu, gap, lo, hi, unimodal)])
        if res.nnsd is not None:
            add("nnsd.csv", HIST_HEADER, _hist_rows(mu, res.nnsd))
            add("unfolding.csv", ("mu", "member_index", "degree", "mean_spacing", "kept_fraction"),
                [(mu, i, d, s, k) for i, (d, s, k) in
                 enumerate(zip(res.degrees_used, res.mean_spacings, res.kept_fraction))])
        if res.gap is not None:
            add("gapratio.csv", GAP_HEADER,
                [(mu, i, r) for i, r in enumerate(res.gap.per_member_r)])
            add("gapratio_summary.csv", ("mu", "mean_r", "ci_low", "ci_high", "n_pairs"),
                [(mu, res.gap.mean_r, res.gap.ci[0], res.gap.ci[1], res.gap.n_pairs_used)])
            add("gapratio_density.csv", HIST_HEADER, _hist_rows(mu, res.gap_density))
    if bundle.sweep is not None:
        sw = bundle.sweep
        add("sweep.csv", SWEEP_HEADER, zip(sw.mu, sw.mean_r, sw.ci_low, sw.ci_high))
    if bundle.baseline is not None:
        add("baseline.csv", ("member_index", "r"),
            list(enumerate(bundle.baseline.per_member_r)))
    return tables


def _fixed_json(res, dump_spectra):
    out = {"mu": res.mu, "sizes": [int(n) for n in res.sizes],
           "mean_size": _num(float(np.mean(res.sizes)))}
    if res.density is not None:
        gap, lo, hi, unimodal = res.bimodality
        out["density"] = _hist_json(res.density)
        out["bimodality"] = {"gap": _num(gap), "ci": [_num(lo), _num(hi)], "unimodal": bool(unimodal)}
    if res.nnsd is not None:
        out["nnsd"] = _hist_json(res.nnsd)
        out["unfolding"] = {
            "degrees": [int(d) for d in res.degrees_used],
            "mean_spacing": _list(res.mean_spacings),
            "kept_fraction": _list(res.kept_fraction),
        }
    if res.gap is not None:
        out["gap_ratio"] = _gap_json(res.gap)
        out["gap_ratio_density"] = _hist_json(res.gap_density)
    if dump_spectra and res.spectra is not None:
        out["spectra"] = [_list(s) for s in res.spectra]
    return out


def results_json(bundle):
    results = {}
    if bundle.fixed:
        results["fixed"] = [_fixed_json(r, bundle.dump_spectra) for r in bundle.fixed]
    if bundle.sweep is not None:
        sw = bundle.sweep
        results["sweep"] = {
            "mu": _list(sw.mu),
            "mean_r": _list(sw.mean_r),
            "ci_low": _list(sw.ci_low),
            "ci_high": _list(sw.ci_high),
            "reference": {"r_poisson": sw.r_poisson, "r_goe": sw.r_goe},
            "slope": _num(sw.slope),
            "errors": {repr(mu): msg for mu, msg in sw.errors.items()},
        }
    if bundle.baseline is not None:
        results["baseline"] = dict(_gap_json(bundle.baseline), settings=bundle.baseline_settings)
    return results


def _software():
    return {"name": "mgoe", "version": __version__}


def write_results(bundle, format="both", output_dir="."):
    """Write the bundle's files and return the list of paths written.

    ``config.json`` (the effective configuration) is always written; CSV
    tables and/or ``results.json`` follow ``format``.
    """
    if format not in FORMATS:
        raise ConfigurationError(f"format must be one of {FORMATS}, got {format!r}")
    out = Path(output_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        echo = {"software": _software(), "command": bundle.command,
                "config": plan_to_dict(bundle.plan)}
        if bundle.baseline_settings is not None:
            echo["baseline"] = bundle.baseline_settings
        path = out / CONFIG_FILE
        path.write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)
        if format in ("csv", "both"):
            for name, (header, rows) in _tables(bundle).items():
                path = out / name
                with open(path, "w", newline="", encoding="utf-8") as fh:
                    writer = csv.writer(fh, lineterminator="\n")
                    writer.writerow(header)
                    writer.writerows([_fmt(v) for v in row] for row in rows)
                written.append(path)
        results = results_json(bundle)
        if format in ("json", "both") and results:
            doc = {"software": _software(), "command": bundle.command,
                   "config": plan_to_dict(bundle.plan), "results": results}
            path = out / JSON_FILE
            path.write_text(json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n",
                            encoding="utf-8")
            written.append(path)
    except OSError as exc:
        raise OutputError(f"cannot write results to {exc.filename or out}: {exc.strerror}") from exc
    return written


def default_output_dir():
    return os.environ.get("MGOE_OUTPUT_DIR", "results")
