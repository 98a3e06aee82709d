"""Batch front door: flat key=value config, subcommand dispatch, reports.

Every run writes its delimited/JSON reports plus rendered figures into the
configured output directory.  Identical configuration and input files yield
byte-identical reports; enumeration order and merges are deterministic and
worker-count independent.

Exit codes: 0 success, 2 config error, 3 computation error, 4 verification
failure.  Errors print a machine-readable JSON record to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from typing import Optional, Tuple

import numpy as np

from . import cocycles, counting, plots, reps, thermo, verify
from .errors import (ConfigError, DimensionMismatch, OrbitCountError,
                     ParseError, SingularGenerator, UnknownBuiltin,
                     UnknownLabel)

_COMMANDS = ("count", "primes", "phi", "equidist", "limitcone", "entropy",
             "verify")
_NORMS = ("euclidean", "l1", "linf")
_PROJECTIONS = ("cartan", "jordan_primitive")
_DEPTH_DEFAULT = {"entropy": 6, "equidist": 1}
_FMT = "%.12g"


@dataclass
class RunConfig:
    """Validated run parameters shared by all commands."""

    rep: str = "schottky_reference"
    L: int = 10
    norm: str = "euclidean"
    phi: Optional[Tuple[float, ...]] = None
    depth: Optional[int] = None
    percentile: float = counting.DEFAULT_PERCENTILE
    out: str = "reports"
    workers: int = 0
    threshold: Optional[float] = None
    projection: str = "cartan"

    def validate(self):
        if self.L < 1:
            raise ConfigError("L must be >= 1, got %d" % self.L)
        if not 0.0 < self.percentile < 1.0:
            raise ConfigError("percentile must lie in (0, 1)")
        if self.depth is not None and self.depth < 1:
            raise ConfigError("depth must be >= 1")
        if self.norm not in _NORMS:
            raise ConfigError("unknown norm %r" % (self.norm,))
        if self.projection not in _PROJECTIONS:
            raise ConfigError("unknown projection %r" % (self.projection,))
        if self.workers < 0:
            raise ConfigError("workers must be positive")


_KEYS = {f.name for f in fields(RunConfig)}
_INT_KEYS = {"L", "depth", "workers"}
_FLOAT_KEYS = {"percentile", "threshold"}


def _coerce(key, raw):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "phi":
            return tuple(float(p) for p in str(raw).split(","))
    except ValueError:
        raise ConfigError("bad value for %s: %r" % (key, raw))
    return raw


def parse_config_file(path):
    """Flat key=value lines; blank lines and # comments are ignored."""
    values = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise ConfigError("cannot read config file: %s" % exc)
    for ln, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError("%s:%d: expected key=value" % (path, ln))
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in _KEYS:
            raise ConfigError("%s:%d: unknown key %r" % (path, ln, key))
        values[key] = _coerce(key, raw)
    return values


def build_config(file_values, flag_values) -> RunConfig:
    """Merge config file and flags (flags win) into a validated RunConfig."""
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    cfg = RunConfig(**merged)
    cfg.validate()
    if cfg.workers == 0:
        cfg.workers = os.cpu_count() or 1
    return cfg


def builtin_representation(name):
    """Certified builtin representations addressable by name.

    `schottky_reference` is the standard certified pair; `sym_power:<m>` is
    its m-th symmetric power with the certificate inherited from the base.
    """
    if name == "schottky_reference":
        return reps.schottky_reference()
    if name.startswith("sym_power:"):
        tail = name.split(":", 1)[1]
        if tail.isdigit() and int(tail) >= 1:
            return reps.symmetric_power(reps.schottky_reference(), int(tail))
    raise UnknownBuiltin("no builtin representation named %r" % (name,))


def _load_rep(cfg: RunConfig):
    if os.path.exists(cfg.rep):
        return reps.load_representation(cfg.rep)
    return builtin_representation(cfg.rep)


def _write_json(path, payload):
    def jsonable(x):
        if isinstance(x, np.generic):
            return x.item()
        if isinstance(x, np.ndarray):
            return x.tolist()
        raise TypeError("cannot serialize %r" % type(x))
    with open(path, "w") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2,
                            default=jsonable) + "\n")


def _num(x):
    # round-trip through the report precision so JSON bytes are stable
    return float(_FMT % x)


# --- commands ---------------------------------------------------------------

def _series_reports(series, out, extra_figures=()):
    fit = counting.fit_exponent(series)
    counting.write_series_csv(series, os.path.join(out, "series.csv"))
    _write_json(os.path.join(out, "fit.json"), counting.fit_payload(fit, series))
    plots.save_series_figure(series, fit, os.path.join(out, "series.png"))
    for fn in extra_figures:
        fn(fit)
    print("%s series: L=%d, %d elements, h_hat=%s"
          % (series.kind, series.L, len(series.values), _FMT % fit.h_hat))
    return fit


def _cmd_count(cfg: RunConfig):
    rep = _load_rep(cfg)
    series = counting.norm_series(rep, cfg.L, cfg.norm, cfg.percentile,
                                  workers=cfg.workers)
    _series_reports(series, cfg.out)
    return 0


def _cmd_primes(cfg: RunConfig):
    rep = _load_rep(cfg)
    series = counting.primitive_spectral_series(rep, cfg.L, cfg.percentile,
                                                workers=cfg.workers)

    def ratio_outputs(fit):
        curve = counting.prime_orbit_ratio_curve(series, fit.h_hat)
        with open(os.path.join(cfg.out, "ratio.csv"), "w") as fh:
            fh.write("t,ratio\n")
            for t, r in curve:
                fh.write("%s,%s\n" % (_FMT % t, _FMT % r))
        plots.save_ratio_figure(curve, fit.h_hat,
                                os.path.join(cfg.out, "ratio.png"))

    _series_reports(series, cfg.out, extra_figures=(ratio_outputs,))
    return 0


def _cmd_phi(cfg: RunConfig):
    if cfg.phi is None:
        raise ConfigError("phi command needs phi=c1,...,cd")
    rep = _load_rep(cfg)
    series = counting.phi_series(rep, cfg.L, np.array(cfg.phi),
                                 projection=cfg.projection,
                                 percentile=cfg.percentile,
                                 workers=cfg.workers)
    _series_reports(series, cfg.out)
    return 0


def _cmd_equidist(cfg: RunConfig):
    rep = _load_rep(cfg)
    t = cfg.threshold
    if t is None:
        t = counting.norm_series(rep, cfg.L, cfg.norm, cfg.percentile,
                                 workers=cfg.workers).t_max
    depth = cfg.depth or _DEPTH_DEFAULT["equidist"]
    measure = counting.pair_empirical_measure(rep, cfg.L, t, depth,
                                              workers=cfg.workers)
    deficit = counting.factorization_deficit(measure)
    counting.write_pairs_csv(measure, rep.gen_set,
                             os.path.join(cfg.out, "pairs.csv"))
    plots.save_pairs_figure(measure, rep.gen_set,
                            os.path.join(cfg.out, "pairs.png"),
                            deficit=deficit)
    print("pair measure: depth=%d, t=%s, %d elements, deficit=%s"
          % (measure.depth, _FMT % t, measure.total, _FMT % deficit))
    return 0


def _cmd_limitcone(cfg: RunConfig):
    rep = _load_rep(cfg)
    sample = cocycles.limit_cone_sample(rep, cfg.L)
    with open(os.path.join(cfg.out, "cone.csv"), "w") as fh:
        fh.write("length," + ",".join("r%d" % (i + 1)
                                      for i in range(rep.dim)) + "\n")
        for length, ray in zip(sample.lengths, sample.rays):
            fh.write("%d,%s\n"
                     % (length, ",".join(_FMT % x for x in ray)))
    plots.save_cone_figure(sample, os.path.join(cfg.out, "cone.png"))
    print("limit cone: %d rays from classes of length <= %d"
          % (len(sample), cfg.L))
    return 0


def _cmd_entropy(cfg: RunConfig):
    rep = _load_rep(cfg)
    depth = cfg.depth or _DEPTH_DEFAULT["entropy"]
    shift = thermo.schottky_shift(rep.gen_set)
    pot = thermo.norm_potential(rep, shift, depth, cfg.norm)
    root = thermo.entropy_root(shift, pot)
    variation = thermo.potential_variation(pot)
    _write_json(os.path.join(cfg.out, "entropy.json"),
                {"h_pressure": _num(root), "variation_k": _num(variation),
                 "depth": depth})
    plots.save_pressure_figure(shift, pot, root,
                               os.path.join(cfg.out, "entropy.png"),
                               thermo.pressure)
    print("entropy: depth=%d, h_pressure=%s, variation_k=%s"
          % (depth, _FMT % root, _FMT % variation))
    return 0


def _cmd_verify(cfg: RunConfig):
    results = verify.run_all(workers=cfg.workers)
    for r in results:
        print("[%s] %2d %s (%.1fs)"
              % ("PASS" if r.passed else "FAIL", r.index, r.name, r.runtime))
    payload = {
        "passed": all(r.passed for r in results),
        "criteria": [
            {"index": r.index, "name": r.name, "passed": r.passed,
             "details": r.details}
            for r in results
        ],
    }
    # runtimes stay out of the report so identical runs match byte for byte
    _write_json(os.path.join(cfg.out, "verify.json"), payload)
    n_fail = sum(not r.passed for r in results)
    print("verify: %d/%d criteria passed" % (len(results) - n_fail, len(results)))
    return 0 if n_fail == 0 else 4


_DISPATCH = {
    "count": _cmd_count,
    "primes": _cmd_primes,
    "phi": _cmd_phi,
    "equidist": _cmd_equidist,
    "limitcone": _cmd_limitcone,
    "entropy": _cmd_entropy,
    "verify": _cmd_verify,
}

# malformed input files (bad rows, truncated generators, non-invertible
# matrices) count as configuration problems, not computation failures
_CONFIG_SIDE_ERRORS = (ConfigError, UnknownBuiltin, ParseError, UnknownLabel,
                       DimensionMismatch, SingularGenerator)


def _emit_error(exc):
    record = {"error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")


def _make_parser():
    p = argparse.ArgumentParser(
        prog="orbitcount",
        description="counting experiments for finitely generated matrix groups",
    )
    p.add_argument("command", choices=_COMMANDS)
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--rep", help="representation file or builtin name")
    p.add_argument("--L", type=int, help="word-length ceiling")
    p.add_argument("--norm", choices=_NORMS)
    p.add_argument("--phi", help="functional coefficients c1,...,cd")
    p.add_argument("--depth", type=int, help="cylinder/potential depth")
    p.add_argument("--percentile", type=float,
                   help="truncation percentile in (0,1)")
    p.add_argument("--out", help="output directory (default: reports)")
    p.add_argument("--workers", type=int,
                   help="parallel workers (default: all cores)")
    p.add_argument("--threshold", type=float,
                   help="pair-measure threshold t (default: series t_max)")
    p.add_argument("--projection", choices=_PROJECTIONS,
                   help="projection for the phi series")
    return p


def main(argv=None) -> int:
    args = _make_parser().parse_args(argv)
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        flag_values = {k: getattr(args, k) for k in _KEYS}
        if flag_values.get("phi") is not None:
            flag_values["phi"] = _coerce("phi", flag_values["phi"])
        cfg = build_config(file_values, flag_values)
        os.makedirs(cfg.out, exist_ok=True)
    except _CONFIG_SIDE_ERRORS as exc:
        _emit_error(exc)
        return 2
    try:
        return _DISPATCH[args.command](cfg)
    except _CONFIG_SIDE_ERRORS as exc:
        _emit_error(exc)
        return 2
    except (OrbitCountError, np.linalg.LinAlgError) as exc:
        _emit_error(exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
