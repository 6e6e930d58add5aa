"""JSON experiment configuration: defaults, overrides, validation, builders."""

import copy
import json
import numbers

from . import __version__
from ._validation import check_option, check_scalar
from .exceptions import ConfigError
from .history import HiGSGuidance
from .oracles import DctFieldOracle, GaussianOracle, MixtureOracle
from .solvers import SOLVER_KINDS, DiffusionSampler

ORACLE_DEFAULTS = {
    "gaussian": {"kind": "gaussian", "mean": [0.0], "scale": 1.0},
    "mixture": {"kind": "mixture", "weights": [0.3, 0.7], "means": [[-2.0], [1.0]],
                "scales": [0.5, 0.5]},
    "dctfield": {"kind": "dctfield", "shape": [1, 16, 16], "gamma": 1.5},
}

ABLATION_AXES = {
    "schedule": "schedule",
    "alpha": "alpha",
    "rc": "rc",
    "g_kind": "g_kind",
    "buffer_input": "buffer_input",
    "w_higs": "w_higs",
}


def default_config():
    return {
        "oracle": copy.deepcopy(ORACLE_DEFAULTS["gaussian"]),
        "solver": {"kind": "euler", "grid": "uniform", "steps": 32, "t_floor": 0.002,
                   "rho": 7.0, "sigma_max": 1.0},
        "cfg": {"w": 1.0, "label": None},
        "higs": HiGSGuidance().get_params(),
        "batch_size": 64,
        "seed": 0,
        "out": "out",
        "converge": {"solvers": ["euler", "euler_history_theory"],
                     "steps": [10, 20, 40, 80, 160]},
        "ablate": {"axis": "w_higs", "values": [0.0, 0.5, 1.0, 2.0, 3.0]},
    }


# keys allowed at the top level besides the defaults; echoed by run_meta.json
_META_KEYS = {"version"}


def _merge(base, update, path=""):
    for key, value in update.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and key != "oracle":
            if not isinstance(value, dict):
                raise ConfigError(f"{where!r} must be an object")
            _merge(base[key], value, where + ".")
        else:
            base[key] = copy.deepcopy(value)


def _resolve_oracle(section):
    if not isinstance(section, dict):
        raise ConfigError("'oracle' must be an object")
    kind = section.get("kind", "gaussian")
    check_option(kind, "oracle.kind", ORACLE_DEFAULTS)
    resolved = copy.deepcopy(ORACLE_DEFAULTS[kind])
    for key, value in section.items():
        if key not in resolved:
            raise ConfigError(f"unknown config key 'oracle.{key}' for oracle kind {kind!r}")
        resolved[key] = value
    return resolved


def parse_value(text):
    """Parse an override value as JSON, falling back to a bare string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(raw, dotted, value):
    keys = dotted.split(".")
    node = raw
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set {dotted!r}: {key!r} is not an object")
    node[keys[-1]] = value


def resolve_config(raw=None, overrides=()):
    """Merge ``raw`` and ``(dotted_key, value)`` overrides over the defaults and validate."""
    raw = copy.deepcopy(raw or {})
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for dotted, value in overrides:
        apply_override(raw, dotted, value)
    for key in _META_KEYS:
        raw.pop(key, None)
    config = default_config()
    oracle = raw.pop("oracle", None)
    _merge(config, raw)
    if oracle is not None:
        config["oracle"] = oracle
    config["oracle"] = _resolve_oracle(config["oracle"])
    validate_config(config)
    return config


def load_config(path, overrides=()):
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return resolve_config(raw, overrides)


def validate_config(config):
    build_oracle(config)
    build_sampler(config).validate()
    check_scalar(config["batch_size"], "batch_size", numbers.Integral, min_val=1)
    check_scalar(config["seed"], "seed", numbers.Integral, min_val=0)
    if not isinstance(config["out"], str):
        raise ConfigError("'out' must be a string path")
    conv = config["converge"]
    if not isinstance(conv["solvers"], list) or not conv["solvers"]:
        raise ConfigError("converge.solvers must be a non-empty list")
    for s in conv["solvers"]:
        check_option(s, "converge.solvers[]", SOLVER_KINDS)
    if not isinstance(conv["steps"], list):
        raise ConfigError("converge.steps must be a list")
    for m in conv["steps"]:
        check_scalar(m, "converge.steps[]", numbers.Integral, min_val=1)
    check_option(config["ablate"]["axis"], "ablate.axis", ABLATION_AXES)
    if not isinstance(config["ablate"]["values"], list):
        raise ConfigError("ablate.values must be a list")


def build_oracle(config):
    params = config["oracle"]
    try:
        if params["kind"] == "gaussian":
            return GaussianOracle(params["mean"], params["scale"])
        if params["kind"] == "mixture":
            return MixtureOracle(params["weights"], params["means"], params["scales"])
        return DctFieldOracle(params["shape"], params["gamma"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"oracle: {exc}") from None


def build_higs(config):
    try:
        return HiGSGuidance(**config["higs"]).validate()
    except TypeError as exc:
        raise ConfigError(f"higs: {exc}") from None


def build_sampler(config, solver=None, n_steps=None):
    s = config["solver"]
    label = config["cfg"]["label"]
    if label is not None:
        oracle = build_oracle(config)
        if not isinstance(oracle, MixtureOracle):
            raise ConfigError("cfg.label requires a mixture oracle")
        oracle._check_label(label)
    if config["cfg"]["w"] != 1 and label is None:
        raise ConfigError("cfg.w != 1 requires cfg.label")
    return DiffusionSampler(
        solver=solver or s["kind"],
        n_steps=n_steps or s["steps"],
        grid=s["grid"],
        t_floor=s["t_floor"],
        rho=s["rho"],
        sigma_max=s["sigma_max"],
        w_cfg=config["cfg"]["w"],
        label=label,
        higs=build_higs(config),
        batch_size=config["batch_size"],
        seed=config["seed"],
    )


def run_meta(config):
    meta = copy.deepcopy(config)
    meta["version"] = __version__
    return meta
