"""Command-line entry point.

    sphdefect constants [--m 200]
    sphdefect moments --j 3 --l 50,100,200
    sphdefect variance --l 50,100,200,400
    sphdefect mc --l 16 --samples 2000 --seed 7
    sphdefect cg-check [--l-max 40]
    sphdefect hilb-check [--l 50,100,200]
    sphdefect report

Every command accepts ``--format {json,csv}``, ``--output PATH`` and
``--threads N`` (default from $SPHDEFECT_THREADS).  JSON documents carry a
``schemaVersion``; CSV files are the ``results`` rows with frozen headers.
Exit status is 0 when every embedded check passes, 1 when one fails and 2
on a configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from . import constants, moments, quad, randfield, specfun

SCHEMA_VERSION = 1
DEFAULT_SEED = 7
DEFAULT_L_GRID = (50, 100, 200, 400)

COLUMNS = {
    "constants": ["quantity", "value", "error"],
    "moments": ["l", "j", "value", "error", "scaled", "scaled_error", "limit", "limit_error"],
    "variance": [
        "l", "il", "il_error", "variance", "variance_error", "scaled", "scaled_error", "deviation",
    ],
    "mc": [
        "l", "n_samples", "seed", "resolution", "mean", "mean_stderr", "variance",
        "var_stderr", "exact_variance", "exact_error",
    ],
    "cg-check": ["l", "moment", "moment_error", "cg_value", "abs_diff"],
    "hilb-check": ["l", "near_ratio", "far_ratio", "k_fit", "holds"],
    "report": ["l", "variance", "variance_error", "scaled", "scaled_error", "deviation"],
}
COMMANDS = tuple(COLUMNS)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    l_list: list = field(default_factory=list)
    j: int = 3
    m: int = 200
    l_max: int = 40
    calibrate_l: int = 50
    samples: int = 2000
    seed: int = DEFAULT_SEED
    resolution: float = randfield.DEFAULT_RESOLUTION
    fmt: str = "json"
    output: str | None = None
    threads: int | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command in ("variance", "mc", "moments") and not self.l_list:
            raise ConfigError("--l is required")
        if self.command in ("variance", "mc", "report") and any(l < 2 or l % 2 for l in self.l_list):
            raise ConfigError("the defect is nontrivial only for even l >= 2")
        if self.command == "moments":
            if self.j < 1 or any(l < 0 for l in self.l_list):
                raise ConfigError("moments need j >= 1 and l >= 0")
        if self.command == "mc":
            if self.samples < 2:
                raise ConfigError("--samples must be >= 2")
            if self.resolution < 4:
                raise ConfigError("--resolution must be >= 4")
        if self.command == "constants" and self.m < 1:
            raise ConfigError("--m must be >= 1")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("--threads must be >= 1")


def _constants(cfg):
    rep = constants.report(cfg.m)
    rows = [
        {"quantity": "c1_direct", "value": rep.c1_direct, "error": rep.c1_direct_error},
        {"quantity": "c1_series", "value": rep.c1_series, "error": rep.c1_series_error},
        {"quantity": "C", "value": rep.C, "error": rep.C_error},
        {"quantity": "C_per_area", "value": rep.C_per_area, "error": rep.C_error / (16 * math.pi**2)},
        {"quantity": "lower_bound", "value": rep.lower_bound, "error": 0.0},
        {"quantity": "per_area_lower_bound", "value": rep.per_area_lower_bound, "error": 0.0},
        {"quantity": "bgs_reference", "value": rep.bgs_reference, "error": 0.0},
    ]
    summary = {
        k: v for k, v in rep.to_dict().items() if k != "checks"
    }
    return rows, dict(rep.checks), summary


def _moments(cfg):
    limit = limit_err = None
    if cfg.j >= 3 and cfg.j % 2:
        bm = quad.bessel_moment(cfg.j)
        limit, limit_err = bm.value, bm.error_estimate
    records = moments._map_ordered(lambda l: moments.legendre_moment(l, cfg.j), cfg.l_list, cfg.threads)
    rows = [
        {
            "l": r.l, "j": r.j, "value": r.value, "error": r.error,
            "scaled": r.scaled, "scaled_error": r.l * r.l * r.error,
            "limit": limit, "limit_error": limit_err,
        }
        for r in records
    ]
    checks = {}
    if limit is not None:
        even = [r for r in records if r.l % 2 == 0]
        checks["odd_moments_positive"] = all(r.value > 0 for r in even)
    if cfg.j == 1:
        checks["first_moment_vanishes"] = all(
            abs(r.value) <= 1e-13 for r in records if r.l % 2 == 0 and r.l > 0
        )
    return rows, checks, {}


def _variance(cfg):
    c1 = quad.c1_direct()
    big_c = 32 * math.pi * c1.value
    rows = []
    for l, var, err, scaled, dev in constants.convergence_table(cfg.l_list, c1.value):
        rows.append({
            "l": l, "il": var / (32 * math.pi), "il_error": err / (32 * math.pi),
            "variance": var, "variance_error": err,
            "scaled": scaled, "scaled_error": l * l * err, "deviation": dev,
        })
    checks = {
        "variance_positive": all(r["variance"] > 0 for r in rows),
        "variance_bounded": all(r["variance"] < 16 * math.pi**2 for r in rows),
    }
    return rows, checks, {"C": big_c, "C_error": 32 * math.pi * c1.error_estimate}


def _mc(cfg):
    rows = []
    checks = {}
    for l in cfg.l_list:
        est = randfield.mc_variance(l, cfg.samples, cfg.seed, cfg.resolution, workers=cfg.threads)
        exact, exact_err = constants.variance_exact(l, return_error=True)
        rows.append({
            "l": l, "n_samples": est.n_samples, "seed": est.seed, "resolution": est.resolution,
            "mean": est.mean, "mean_stderr": est.mean_stderr,
            "variance": est.variance, "var_stderr": est.var_stderr,
            "exact_variance": exact, "exact_error": exact_err,
        })
        checks[f"l{l}_mean_zero"] = abs(est.mean) <= 3 * est.mean_stderr
        tol = max(0.15 * exact, 3 * est.var_stderr)
        checks[f"l{l}_variance_matches_exact"] = abs(est.variance - exact) <= tol
    return rows, checks, {}


def _cg_check(cfg):
    rows = []
    for l, mom, cg, diff in moments.cg_identity_check(cfg.l_max):
        err = moments.legendre_moment(l, 3).error
        rows.append({"l": l, "moment": mom, "moment_error": err, "cg_value": cg, "abs_diff": diff})
    return rows, {"cg_identity": all(r["abs_diff"] <= 1e-12 for r in rows)}, {}


def _hilb_check(cfg):
    k_fit, table = specfun.hilb_check(cfg.l_list or (50, 100, 200), cfg.calibrate_l)
    rows = [
        {"l": l, "near_ratio": near, "far_ratio": far, "k_fit": k_fit, "holds": holds}
        for l, near, far, holds in table
    ]
    return rows, {"hilb_envelope": all(r["holds"] for r in rows)}, {"k_fit": k_fit}


def _report(cfg):
    const_rows, checks, summary = _constants(cfg)
    l_list = cfg.l_list or list(DEFAULT_L_GRID)
    rows = []
    for l, var, err, scaled, dev in constants.convergence_table(l_list, summary["c1_direct"]):
        rows.append({
            "l": l, "variance": var, "variance_error": err,
            "scaled": scaled, "scaled_error": l * l * err, "deviation": dev,
        })
    devs = [r["deviation"] for r in rows]
    checks["variance_deviation_decreasing"] = all(b < a for a, b in zip(devs, devs[1:]))
    moment_tables = {}
    for j in (3, 5):
        recs = moments.scaled_moment_table(j, [l for l in l_list if l % 2 == 0], cfg.threads)
        moment_tables[str(j)] = [
            {"l": r.l, "scaled": r.scaled, "scaled_error": r.l * r.l * r.error, "limit": r.limit}
            for r in recs
        ]
        d = [abs(r.scaled - r.limit) for r in recs]
        checks[f"moment{j}_deviation_decreasing"] = all(b < a for a, b in zip(d, d[1:]))
    cg_rows, cg_checks, _ = _cg_check(cfg)
    checks.update(cg_checks)
    summary = {"constants": summary, "moments": moment_tables}
    return rows, checks, summary


_DISPATCH = {
    "constants": _constants,
    "moments": _moments,
    "variance": _variance,
    "mc": _mc,
    "cg-check": _cg_check,
    "hilb-check": _hilb_check,
    "report": _report,
}


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _config_dict(cfg):
    return {
        "l": cfg.l_list, "j": cfg.j, "m": cfg.m, "l_max": cfg.l_max,
        "samples": cfg.samples, "seed": cfg.seed, "resolution": cfg.resolution,
    }


def render(cfg, rows, checks, summary):
    """Serialize a command result as JSON or CSV text."""
    if cfg.fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COLUMNS[cfg.command], lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v)
                             for k, v in _plain(row).items()})
        return buf.getvalue()
    doc = {
        "schemaVersion": SCHEMA_VERSION,
        "command": cfg.command,
        "config": _config_dict(cfg),
        "results": rows,
        "summary": summary,
        "checks": checks,
        "ok": all(checks.values()),
    }
    # float repr is the shortest string that round-trips exactly
    return json.dumps(_plain(doc), indent=2, allow_nan=False) + "\n"


def run(cfg):
    """Execute one command; returns the exit status."""
    try:
        cfg.validate()
        rows, checks, summary = _DISPATCH[cfg.command](cfg)
    except (ConfigError, randfield.ResolutionError) as exc:
        print(f"sphdefect: configuration error: {exc}", file=sys.stderr)
        return 2
    text = render(cfg, rows, checks, summary)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failed = [k for k, v in checks.items() if not v]
    if failed:
        print(f"sphdefect: failed checks: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", default=None, help="write here instead of stdout")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${randfield.THREADS_ENV} or 1)")

    parser = argparse.ArgumentParser(
        prog="sphdefect",
        description="Signed-area (defect) statistics of Gaussian spherical eigenfunctions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="C1 by both routes, C and bounds")
    p.add_argument("--m", type=int, default=200, help="terms of the arcsine series")

    p = sub.add_parser("moments", parents=[common], help="Legendre moment table")
    p.add_argument("--j", type=int, default=3)
    p.add_argument("--l", dest="l_list", type=_int_list, default=list(DEFAULT_L_GRID))

    p = sub.add_parser("variance", parents=[common], help="exact defect variance")
    p.add_argument("--l", dest="l_list", type=_int_list, default=list(DEFAULT_L_GRID))

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo defect variance")
    p.add_argument("--l", dest="l_list", type=_int_list, default=[16])
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--resolution", type=float, default=randfield.DEFAULT_RESOLUTION)

    p = sub.add_parser("cg-check", parents=[common], help="third-moment Clebsch-Gordan identity")
    p.add_argument("--l-max", dest="l_max", type=int, default=40)

    p = sub.add_parser("hilb-check", parents=[common], help="Hilb error envelope")
    p.add_argument("--l", dest="l_list", type=_int_list, default=[50, 100, 200])
    p.add_argument("--calibrate-l", dest="calibrate_l", type=int, default=50)

    p = sub.add_parser("report", parents=[common], help="constants plus convergence tables")
    p.add_argument("--l", dest="l_list", type=_int_list, default=list(DEFAULT_L_GRID))
    p.add_argument("--m", type=int, default=200)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = RunConfig(command=args.command, fmt=args.fmt, output=args.output)
    for name in ("l_list", "j", "m", "l_max", "calibrate_l", "samples", "seed", "resolution"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    cfg.threads = args.threads if args.threads is not None else randfield.default_workers()
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
