"""JSON experiment configuration.

Recognized keys (only ``N`` is required)::

    {
      "N": 500, "M": 100, "sigma": 1.0, "seed": 7,
      "mu": 0.8,                      # or "mu_grid": [..] / "0.5:1.0:0.02"
      "analyses": ["density", "nnsd", "gap_ratio"],
      "bootstrap": {"resamples": 1000, "level": 0.95},
      "histogram": {
        "density": {"bins": 50, "range": null},
        "nnsd": {"bins": 40, "range": [0, 4]},
        "gap_ratio": {"bins": 40, "range": [0, 1], "pooled": false}
      },
      "truncation": {"fence_k": 1.5},  # null disables truncation
      "degrees": [3, 5, 7, 9, 11],
      "gap_zero_convention": "keep",  # or "drop"
      "extension": "centered"         # or "cyclic"
    }
"""

import json
import math

from .exceptions import ConfigurationError
from .experiment import ExperimentPlan

_TOP_KEYS = {
    "N", "M", "mu", "mu_grid", "sigma", "seed", "analyses", "bootstrap",
    "histogram", "truncation", "degrees", "gap_zero_convention", "extension",
}
_HIST_KEYS = {"density": ("density", {"bins", "range"}),
              "nnsd": ("nnsd", {"bins", "range"}),
              "gap_ratio": ("gap", {"bins", "range", "pooled"})}


def parse_mu_grid(text):
    """Parse ``start:stop:step``; ``stop`` is included when reachable within 1e-9."""
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise ConfigurationError(f"mu grid must look like start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise ConfigurationError(f"mu grid {text!r} needs step > 0 and stop >= start")
    count = math.floor((stop - start) / step + 1e-9) + 1
    return tuple(round(start + k * step, 12) for k in range(count))


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigurationError(f"{where or 'config'} must be a JSON object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        prefix = f"{where}." if where else ""
        raise ConfigurationError(f"unknown configuration key {prefix}{unknown[0]!r}")


def plan_from_dict(data):
    """Build a validated :class:`ExperimentPlan` from a decoded config object."""
    _check_keys(data, _TOP_KEYS, "")
    if "N" not in data:
        raise ConfigurationError("required key 'N' is missing")
    kwargs = {"N": data["N"]}
    for key in ("M", "sigma", "seed"):
        if key in data:
            kwargs[key] = data[key]
    if "mu" in data and "mu_grid" in data:
        raise ConfigurationError("give either 'mu' or 'mu_grid', not both")
    if "mu" in data:
        kwargs["mu_grid"] = (data["mu"],)
    elif "mu_grid" in data:
        grid = data["mu_grid"]
        kwargs["mu_grid"] = parse_mu_grid(grid) if isinstance(grid, str) else tuple(grid)
    if "analyses" in data:
        kwargs["analyses"] = tuple(data["analyses"])
    if "bootstrap" in data:
        boot = data["bootstrap"]
        _check_keys(boot, {"resamples", "level"}, "bootstrap")
        if "resamples" in boot:
            kwargs["n_resamples"] = boot["resamples"]
        if "level" in boot:
            kwargs["level"] = boot["level"]
    if "histogram" in data:
        hist = data["histogram"]
        _check_keys(hist, set(_HIST_KEYS), "histogram")
        for name, section in hist.items():
            prefix, allowed = _HIST_KEYS[name]
            _check_keys(section, allowed, f"histogram.{name}")
            if "bins" in section:
                kwargs[f"{prefix}_bins"] = section["bins"]
            if "range" in section:
                rng = section["range"]
                kwargs[f"{prefix}_range"] = None if rng is None else tuple(rng)
            if "pooled" in section:
                kwargs["gap_density_pooled"] = bool(section["pooled"])
    if "truncation" in data:
        trunc = data["truncation"]
        _check_keys(trunc, {"fence_k"}, "truncation")
        if "fence_k" in trunc:
            kwargs["fence_k"] = None if trunc["fence_k"] is None else float(trunc["fence_k"])
    if "degrees" in data:
        kwargs["degrees"] = tuple(data["degrees"])
    for key in ("gap_zero_convention", "extension"):
        if key in data:
            kwargs[key] = data[key]
    try:
        return ExperimentPlan(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid configuration: {exc}") from exc


def load_config_dict(text):
    """Decode config text, reporting syntax errors with line and column."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    _check_keys(data, _TOP_KEYS, "")
    return data


def parse_config(text):
    """Parse UTF-8 JSON config text into an :class:`ExperimentPlan`."""
    return plan_from_dict(load_config_dict(text))


def plan_to_dict(plan):
    """Inverse of :func:`plan_from_dict`; the result is JSON-serializable."""
    fence_k = plan.fence_k
    if fence_k is not None and math.isinf(fence_k):
        fence_k = None
    return {
        "N": plan.N,
        "M": plan.M,
        "sigma": plan.sigma,
        "seed": plan.seed,
        "mu_grid": list(plan.mu_grid),
        "analyses": list(plan.analyses),
        "bootstrap": {"resamples": plan.n_resamples, "level": plan.level},
        "histogram": {
            "density": {
                "bins": plan.density_bins,
                "range": None if plan.density_range is None else list(plan.density_range),
            },
            "nnsd": {"bins": plan.nnsd_bins, "range": list(plan.nnsd_range)},
            "gap_ratio": {
                "bins": plan.gap_bins,
                "range": list(plan.gap_range),
                "pooled": plan.gap_density_pooled,
            },
        },
        "truncation": {"fence_k": fence_k},
        "degrees": list(plan.degrees),
        "gap_zero_convention": plan.gap_zero_convention,
        "extension": plan.extension,
    }


def dump_config(plan):
    return json.dumps(plan_to_dict(plan), indent=2, sort_keys=True)
