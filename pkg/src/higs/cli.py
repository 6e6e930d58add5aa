"""Command-line experiment driver.

    higs sample   --config run.json [--out DIR] [--seed N] [--set KEY=VALUE ...]
    higs converge --config run.json ...
    higs ablate   --config run.json [--axis AXIS] ...

Exit codes: 0 success, 2 configuration error, 3 numerical divergence, 4 I/O.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .exceptions import ConfigError, DivergenceError, DomainError, FitError, ShapeError
from .metrics import fit_order, moment_error, trajectory_error, w1_1d
from .oracles import GaussianOracle

log = logging.getLogger("higs")

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 2, 3, 4


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x):
    return "" if x is None else repr(float(x))


def write_pgm(path, image):
    """16-bit binary PGM, min-max normalized; channels stacked vertically."""
    img = np.asarray(image, dtype=np.float64)
    img = img.reshape(-1, img.shape[-1])
    lo, hi = img.min(), img.max()
    scaled = np.zeros_like(img) if hi == lo else (img - lo) / (hi - lo)
    data = np.round(scaled * 65535).astype(">u2")
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    data = np.frombuffer(parts[4], dtype=">u2" if maxval > 255 else "u1")
    return data.reshape(h, w)


def evaluate(oracle, samples, label=None):
    """W1 against the data distribution (1D oracles) plus moment errors."""
    if isinstance(oracle, GaussianOracle):
        mean, var = oracle.data_moments()
        quant = oracle.data_quantiles if oracle.shape == (1,) else None
    elif hasattr(oracle, "n_components"):
        mean, var = oracle.data_moments(label)
        quant = ((lambda n: oracle.data_quantiles(n, label))
                 if oracle.shape == (1,) else None)
    else:
        mean, var = oracle.data_moments()
        quant = None
    w1 = w1_1d(samples, quant(len(samples))) if quant is not None else None
    mean_err, var_err = moment_error(samples, mean, var)
    return {"w1": w1, "mean_error": mean_err, "var_error": var_err}


def cmd_sample(config, out):
    oracle = cfgmod.build_oracle(config)
    result = cfgmod.build_sampler(config).sample(oracle)
    samples = result.samples
    flat = samples.reshape(len(samples), -1)
    rows = [[i] + [_fmt(v) for v in row] for i, row in enumerate(flat)]
    pgms = []
    if len(oracle.shape) == 3:
        pgms = [(out / f"sample_{i:04d}.pgm", img) for i, img in enumerate(samples)]

    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "samples.csv", ["index"] + [f"x{j}" for j in range(flat.shape[1])], rows)
    for path, img in pgms:
        write_pgm(path, img)
    _write_meta(out, config)
    log.info("wrote %d samples to %s", len(samples), out)


def cmd_converge(config, out):
    oracle = cfgmod.build_oracle(config)
    if not isinstance(oracle, GaussianOracle):
        raise ConfigError("converge needs the gaussian oracle: errors are measured "
                          "against its exact ODE trajectory")
    steps = config["converge"]["steps"]
    rows, fits = [], []
    for solver in config["converge"]["solvers"]:
        pairs = []
        for m in steps:
            sampler = cfgmod.build_sampler(config, solver=solver, n_steps=m)
            grid = sampler.time_grid()
            z0 = sampler.initial_noise(oracle.shape)
            state = sampler.sample(oracle, z0=z0).state
            s_max = sampler.sigma_max
            exact = oracle.exact_trajectory(z0, s_max * grid[0], s_max * grid[-1])
            err = trajectory_error(state, exact)
            rows.append([solver, m, _fmt(grid.h_max), _fmt(err)])
            pairs.append((grid.h_max, err))
        fit = fit_order(pairs)
        fits.append([solver, _fmt(fit.slope), _fmt(fit.intercept), _fmt(fit.residual)])
        log.info("%s: fitted order %.3f", solver, fit.slope)

    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "converge.csv", ["solver", "M", "h_max", "mean_error"], rows)
    _write_csv(out / "order_fit.csv", ["solver", "slope", "intercept", "residual"], fits)
    _write_meta(out, config)


def ablation_rows(config, axis=None, values=None):
    """One ``euler_higs`` run per axis value; returns CSV rows."""
    axis = axis or config["ablate"]["axis"]
    values = config["ablate"]["values"] if values is None else values
    if axis not in cfgmod.ABLATION_AXES:
        raise ConfigError(f"unknown ablation axis {axis!r}; "
                          f"expected one of {sorted(cfgmod.ABLATION_AXES)}")
    oracle = cfgmod.build_oracle(config)
    base = cfgmod.build_sampler(config, solver="euler_higs")
    z0 = base.initial_noise(oracle.shape)
    rows = []
    for value in values:
        sampler = base.set_params(**{f"higs__{cfgmod.ABLATION_AXES[axis]}": value})
        samples = sampler.sample(oracle, z0=z0).samples
        m = evaluate(oracle, samples, config["cfg"]["label"])
        rows.append([axis, value if isinstance(value, str) else _fmt(value),
                     _fmt(m["w1"]), _fmt(m["mean_error"]), _fmt(m["var_error"])])
    return rows


def cmd_ablate(config, out, axis=None):
    rows = ablation_rows(config, axis)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "ablate.csv", ["axis", "value", "w1", "mean_error", "var_error"], rows)
    _write_meta(out, config)


def _write_meta(out, config):
    with open(out / "run_meta.json", "w") as fh:
        json.dump(cfgmod.run_meta(config), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_set(items):
    overrides = []
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides.append((key.strip(), cfgmod.parse_value(value)))
    return overrides


def build_parser():
    parser = argparse.ArgumentParser(prog="higs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sample", "converge", "ablate"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON experiment config")
        p.add_argument("--out", type=Path, help="output directory (overrides config 'out')")
        p.add_argument("--seed", type=int, help="base RNG seed (overrides config)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted-path override, value parsed as JSON, e.g. higs.w_higs=2")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "ablate":
            p.add_argument("--axis", choices=sorted(cfgmod.ABLATION_AXES))
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        overrides = _parse_set(args.set)
        if args.seed is not None:
            overrides.append(("seed", args.seed))
        if args.out is not None:
            overrides.append(("out", str(args.out)))
        if args.config is not None:
            config = cfgmod.load_config(args.config, overrides)
        else:
            config = cfgmod.resolve_config({}, overrides)
        out = Path(config["out"])
        if args.command == "sample":
            cmd_sample(config, out)
        elif args.command == "converge":
            cmd_converge(config, out)
        else:
            cmd_ablate(config, out, args.axis)
    except (ConfigError, FitError, ShapeError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
