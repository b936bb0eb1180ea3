"""Command-line batch runner: lambda-grid sweeps with JSON or CSV reports.

Configuration is ``key=value`` text (one or more pairs per line, ``#`` starts
a comment); command-line flags override file values.  The exit status is 0
iff every record passes its certified bound, 1 otherwise, 2 on a bad config.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import os
import shlex
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from typing import Any

import numpy as np

from . import discsplit, halfline, ratsemigroup, scalars
from .cochain import random_cochain
from .errors import ConfigError, HochsplitError
from .seriesalg import DiscPoint, blaschke_cutoff

MODES = ("disc-split", "norm-audit", "stabilize", "peak", "rational", "halfline", "appendix")
SUBCOMMAND_MODES = {
    "audit": "norm-audit",
    "stabilize": "stabilize",
    "rational": "rational",
    "halfline": "halfline",
    "appendix": "appendix",
}
CSV_COLUMNS = ("lambda_re", "lambda_im", "n", "N", "M_b", "residual", "certified", "opnorm", "pass")


@dataclass
class SweepConfig:
    mode: str = "disc-split"
    radii: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 0.9, 0.99)
    phases: int = 8
    lambdas: tuple[str, ...] = ()
    N: int = 12
    degrees: tuple[int, ...] = (1, 2)
    M_b: int | None = None
    seeds: int = 1
    seed: int = 0
    m: int = 1000
    chain: tuple[str, ...] = ("1", "1/2", "1/6", "1/30")
    t: float = 1.0
    s: float = 0.7
    window: tuple[str, ...] = ("0", "1/6", "1/3", "1/2", "2/3", "5/6", "1")
    step: float = 1 / 64
    L: float | None = None
    tol: float = 1e-10
    out: str | None = None
    format: str = "json"
    jobs: int = 1
    exact: bool = False

    def to_dict(self) -> dict:
        return {f.name: _dump_value(getattr(self, f.name)) for f in fields(self)}

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name}={shlex.quote(_format_value(f.name, v))}")
        return "\n".join(lines) + "\n"


def _dump_value(v):
    if isinstance(v, tuple):
        return list(v)
    return v


def _format_value(key: str, v) -> str:
    if v is None:
        return "" if key == "out" else "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        sep = ";" if key == "lambdas" else ","
        return sep.join(str(x) if not isinstance(x, float) else repr(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_list(text: str, sep: str = ",") -> list[str]:
    return [x.strip() for x in text.split(sep) if x.strip()]


def _optional_int(text: str):
    return None if text.strip().lower() in ("auto", "none", "") else int(text)


def _optional_float(text: str):
    return None if text.strip().lower() in ("auto", "none", "") else float(Fraction(text))


def _check_rationals(items):
    for x in items:
        Fraction(x)
    return tuple(items)


def _check_lambdas(items):
    for x in items:
        scalars.parse_scalar(x)
    return tuple(items)


def _parse_mode(text: str) -> str:
    if text not in MODES:
        raise ValueError(f"unknown mode {text!r}; expected one of {', '.join(MODES)}")
    return text


def _parse_format(text: str) -> str:
    if text not in ("json", "csv"):
        raise ValueError("format must be json or csv")
    return text


def _positive(conv):
    def inner(text):
        v = conv(text)
        if v < 1:
            raise ValueError("must be >= 1")
        return v
    return inner


PARSERS = {
    "mode": _parse_mode,
    "radii": lambda s: tuple(float(Fraction(x)) for x in _parse_list(s)),
    "phases": _positive(int),
    "lambdas": lambda s: _check_lambdas(_parse_list(s, ";")),
    "N": _positive(int),
    "degrees": lambda s: tuple(int(x) for x in _parse_list(s)),
    "M_b": _optional_int,
    "seeds": _positive(int),
    "seed": int,
    "m": _positive(int),
    "chain": lambda s: _check_rationals(_parse_list(s)),
    "t": lambda s: float(Fraction(s)),
    "s": lambda s: float(Fraction(s)),
    "window": lambda s: _check_rationals(_parse_list(s)),
    "step": lambda s: float(Fraction(s)),
    "L": _optional_float,
    "tol": float,
    "out": lambda s: s or None,
    "format": _parse_format,
    "jobs": _positive(int),
    "exact": _parse_bool,
}


def parse_config(text: str = "", overrides: dict[str, Any] | None = None) -> SweepConfig:
    """Parse key=value text, then apply ``overrides`` (already typed, or strings)."""
    values: dict[str, Any] = {}
    for line in text.splitlines():
        for token in shlex.split(line, comments=True):
            if "=" not in token:
                raise ConfigError(token, "expected key=value")
            key, raw = token.split("=", 1)
            key = key.strip()
            if key not in PARSERS:
                raise ConfigError(key, "unknown configuration key")
            try:
                values[key] = PARSERS[key](raw)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(key, str(exc)) from None
    for key, raw in (overrides or {}).items():
        if key not in PARSERS:
            raise ConfigError(key, "unknown configuration key")
        if isinstance(raw, str):
            try:
                raw = PARSERS[key](raw)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(key, str(exc)) from None
        values[key] = raw
    cfg = SweepConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: SweepConfig):
    if any(d not in (1, 2) for d in cfg.degrees):
        raise ConfigError("degrees", "only degrees 1 and 2 are supported")
    if any(r < 0 or r > 1 for r in cfg.radii):
        raise ConfigError("radii", "radii must lie in [0, 1]")
    if cfg.exact and not cfg.lambdas and cfg.mode in ("disc-split", "norm-audit", "stabilize"):
        raise ConfigError("exact", "exact mode needs an explicit rational lambdas list")
    if cfg.mode == "rational" or cfg.mode == "appendix":
        try:
            ratsemigroup.check_chain(cfg.chain)
        except HochsplitError as exc:
            raise ConfigError("chain", str(exc)) from None
        if cfg.t <= 0:
            raise ConfigError("t", "t must be positive")


# -- the grid -----------------------------------------------------------------


def lambda_grid(cfg: SweepConfig) -> list:
    """Points of the sweep: explicit lambdas, else radii x phases."""
    if cfg.lambdas:
        return [scalars.parse_scalar(x, exact=cfg.exact) for x in cfg.lambdas]
    pts = []
    for r in cfg.radii:
        for k in range(cfg.phases):
            pts.append(r * cmath.exp(2j * math.pi * k / cfg.phases))
    return pts


def _num(x):
    if isinstance(x, (Fraction, scalars.Gaussian)):
        return float(abs(x)) if isinstance(x, scalars.Gaussian) else float(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _lam_fields(lam) -> dict:
    z = complex(lam)
    return {"lambda_re": z.real, "lambda_im": z.imag}


def _report_record(rep: discsplit.SplitReport, **extra) -> dict:
    rec = {
        **_lam_fields(rep.lam),
        "n": rep.degree,
        "N": rep.window,
        "M_b": rep.blaschke_cutoff,
        "residual": _num(rep.residual_sup),
        "certified": _num(rep.certified_error),
        "opnorm": _num(rep.operator_norm_s_n),
        "pass": bool(rep.bound_check),
    }
    if isinstance(rep.residual_sup, Fraction):
        rec["residual_exact"] = str(rep.residual_sup)
    rec.update(extra)
    return rec


def _case_disc_split(cfg: SweepConfig, lam, n: int, seed: int) -> dict:
    p = DiscPoint(lam)
    rep = discsplit.splitting_identity_check(n, p, cfg.N, cfg.M_b, seed=seed, exact=cfg.exact)
    return _report_record(rep, seed=seed)


def _case_norm_audit(cfg: SweepConfig, lam, n: int, seed: int) -> dict:
    rep = discsplit.norm_audit(DiscPoint(lam), n, cfg.N, cfg.M_b)
    return _report_record(rep, division_sup=_num(rep.division_sup), norm_bound=_num(rep.norm_bound),
                          certified=_num(rep.norm_bound))


def _case_stabilize(cfg: SweepConfig, lam, n: int, seed: int) -> dict:
    p = DiscPoint(lam)
    if cfg.exact and not p.exact:
        p = p.exactly()
    M_b = cfg.M_b if cfg.M_b is not None else blaschke_cutoff(p)
    N = cfg.N
    T = random_cochain(n, N, p, seed, shape=discsplit.identity_box(n - 1, N, M_b) if n >= 2
                       else (M_b + N + 1,), exact=cfg.exact)
    res = discsplit.stabilize(T, M_b, window=N)
    opnorm, _ = discsplit.truncated_split_norm(p, N, M_b)
    ok = (res.distance <= opnorm * res.defect + res.certified_error
          and res.distance <= discsplit.UNIFORM_CONSTANT * res.defect + res.certified_error
          and res.cocycle_defect <= res.certified_error)
    return {
        **_lam_fields(p.lam), "n": n, "N": N, "M_b": M_b,
        "residual": _num(res.cocycle_defect), "certified": _num(res.certified_error),
        "opnorm": _num(opnorm), "pass": bool(ok), "seed": seed,
        "distance": _num(res.distance), "defect": _num(res.defect),
    }


def _case_peak(cfg: SweepConfig, lam, n: int, seed: int) -> dict:
    theta = cmath.phase(complex(lam)) if lam != 0 else 0.0
    unit = cmath.exp(1j * theta)
    p = DiscPoint(unit)
    N = cfg.N
    shape = (cfg.m + N,) if n == 1 else (cfg.m + N, 2 * N + 1)
    T = random_cochain(n, N, p, seed, shape=shape)
    rep = discsplit.peak_split(T, theta, cfg.m, window=N)
    rec = _report_record(rep, seed=seed)
    rec["M_b"] = cfg.m
    return rec


def _case_rational(cfg: SweepConfig, lam, n: int, seed: int) -> list[dict]:
    c = ratsemigroup.RatChar(cfg.t, cfg.s)
    cvec, b = standard_rational_pair(seed, c)
    out = []
    for alpha in ratsemigroup.check_chain(cfg.chain):
        w = ratsemigroup.flat_witness_residuals(cvec, b, alpha, c, cfg.M_b)
        out.append({
            "alpha": str(alpha), "seed": seed, "r1": w.r1, "r2": w.r2,
            "norm_bound": w.norm_bound, "ratio": w.ratio,
            "pass": bool(w.norm_bound <= 9 and w.ratio <= w.norm_bound + 1e-9),
        })
    return out


def standard_rational_pair(seed: int, c: "ratsemigroup.RatChar", k: int = 4):
    """c in the ideal and b, with supports drawn from {n/30 : 1 <= n <= 60}."""
    rng = np.random.default_rng(seed)

    def draw(size):
        pts = rng.choice(np.arange(1, 61), size=size, replace=False)
        vals = rng.normal(size=size) + 1j * rng.normal(size=size)
        return ratsemigroup.RationalSeries({Fraction(int(q), 30): complex(v) for q, v in zip(pts, vals)})

    f = draw(k)
    cvec = f - ratsemigroup.RationalSeries.delta(0, f.evaluate(c))
    return cvec, draw(k - 1)


def _case_halfline(cfg: SweepConfig, lam, n: int, seed: int) -> dict:
    p = halfline.HalfPlanePoint(lam)
    h = cfg.step
    L = cfg.L if cfg.L is not None else halfline.default_length(p)
    norm_h = halfline.h_measure(p, h, L).norm()
    budget = halfline.kernel_budget(p, h, L)
    f = halfline.ideal_test_function(p, h)
    support = halfline.ideal_support_check(f, p, L)
    inverse = halfline.inverse_identity_residual(f, p, L)
    w = halfline.flat_witness(f, p, min(cfg.m, int(round(1 / h))), L)
    slack = 4 * budget
    ok = abs(norm_h - 3) <= budget and w.norm_bound <= 9 + slack
    return {
        **_lam_fields(p.lam), "step": h, "L": L, "norm_h": norm_h, "budget": budget,
        "support_mass": support, "inverse_residual": inverse,
        "flat_norm": w.norm_bound, "flat_r": w.r, "pass": bool(ok),
    }


def _case_appendix(cfg: SweepConfig, lam, n: int, seed: int) -> list[dict]:
    c = ratsemigroup.RatChar(cfg.t, cfg.s)
    chain = ratsemigroup.check_chain(cfg.chain)
    window = [Fraction(x) for x in cfg.window]
    gamma = ratsemigroup.join_all([*chain, *window])
    cutoffs = {a: cfg.M_b if cfg.M_b is not None else blaschke_cutoff(DiscPoint(c.point(a))) for a in chain}
    rows = cols = 0
    for a in chain:
        r, k = ratsemigroup.prelimit_shape(gamma, a, window, cutoffs[a])
        rows, cols = max(rows, r), max(cols, k)
    F = ratsemigroup.random_lattice_cochain(gamma, (rows, cols), seed)
    norm_F = float(np.abs(F.values).max())
    out = []
    for a in chain:
        res = ratsemigroup.prelimit_flat_split(F, c, a, window, cutoffs[a])
        refined = all(ratsemigroup.refines(x, a) or x == 0 for x in window)
        certified = None
        ok = True
        if refined:
            r = abs(c.point(a))
            certified = (7 * norm_F * (1 + 2 * r) * (1 + r) * r ** cutoffs[a]
                         + discsplit.rounding_allowance(7 * (cutoffs[a] + 4 * len(window)), 9 * norm_F, False))
            ok = res <= certified
        out.append({"alpha": str(a), "seed": seed, "M_b": cutoffs[a], "residual": res,
                    "certified": certified, "refined": refined, "pass": bool(ok)})
    return out


CASES = {
    "disc-split": _case_disc_split,
    "norm-audit": _case_norm_audit,
    "stabilize": _case_stabilize,
    "peak": _case_peak,
    "rational": _case_rational,
    "halfline": _case_halfline,
    "appendix": _case_appendix,
}


def build_cases(cfg: SweepConfig) -> list[tuple]:
    seeds = [cfg.seed + k for k in range(cfg.seeds)]
    if cfg.mode in ("rational", "appendix"):
        return [(cfg.mode, None, 0, s) for s in seeds]
    if cfg.mode == "halfline":
        pts = ([scalars.parse_scalar(x) for x in cfg.lambdas] if cfg.lambdas
               else [1j, 1 + 1j, 3j, 0.1j])
        return [(cfg.mode, lam, 0, cfg.seed) for lam in pts]
    grid = lambda_grid(cfg)
    if cfg.mode == "norm-audit":
        return [(cfg.mode, lam, n, cfg.seed) for lam in grid for n in cfg.degrees]
    return [(cfg.mode, lam, n, s) for lam in grid for n in cfg.degrees for s in seeds]


def run_case(args) -> list[dict]:
    cfg, (mode, lam, n, seed) = args
    try:
        out = CASES[mode](cfg, lam, n, seed)
    except (HochsplitError, ValueError, ArithmeticError) as exc:
        out = {"error": f"{type(exc).__name__}: {exc}", "pass": False, "seed": seed}
        if lam is not None:
            out.update(_lam_fields(lam))
    return out if isinstance(out, list) else [out]


def summarize(records: list[dict]) -> dict:
    def fmax(key):
        vals = [r[key] for r in records if isinstance(r.get(key), (int, float)) and not isinstance(r.get(key), bool)]
        return max(vals) if vals else 0.0
    passed = sum(1 for r in records if r.get("pass"))
    return {
        "count": len(records),
        "passed": passed,
        "failed": len(records) - passed,
        "max_residual": fmax("residual"),
        "max_opnorm": fmax("opnorm"),
    }


def run(cfg: SweepConfig) -> dict:
    start = time.perf_counter()
    cases = build_cases(cfg)
    payload = [(cfg, case) for case in cases]
    if cfg.jobs > 1 and len(payload) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(run_case, payload))
    else:
        chunks = [run_case(x) for x in payload]
    records = [r for chunk in chunks for r in chunk]
    return {
        "config": cfg.to_dict(),
        "records": records,
        "summary": summarize(records),
        "wall_clock": time.perf_counter() - start,
    }


def render(envelope: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(envelope, sort_keys=True, indent=2, default=str) + "\n"
    records = envelope["records"]
    mode = envelope["config"]["mode"]
    if mode in ("disc-split", "norm-audit", "stabilize", "peak"):
        columns = list(CSV_COLUMNS)
    else:
        columns = sorted({k for r in records for k in r})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({k: r.get(k, "") for k in columns})
    return buf.getvalue()


def exit_status(envelope: dict) -> int:
    return 0 if envelope["summary"]["failed"] == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value configuration file")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--seed", type=int, metavar="U64")
    common.add_argument("--jobs", type=int, metavar="N", help="worker processes (env HOCHSPLIT_JOBS)")
    common.add_argument("--exact", action="store_true", default=None, help="exact rational arithmetic")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration key (repeatable)")
    parser = argparse.ArgumentParser(prog="hochsplit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="run the configured mode (default disc-split)")
    for name, mode in SUBCOMMAND_MODES.items():
        sub.add_parser(name, parents=[common], help=f"run mode {mode}")
    return parser


def config_from_args(args: argparse.Namespace) -> SweepConfig:
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    overrides: dict[str, Any] = {}
    jobs = args.jobs
    if jobs is None and os.environ.get("HOCHSPLIT_JOBS"):
        jobs = os.environ["HOCHSPLIT_JOBS"]
    for key, val in (("out", args.out), ("format", args.format), ("seed", args.seed),
                     ("jobs", jobs), ("exact", args.exact)):
        if val is not None:
            overrides[key] = val
    for item in args.set:
        if "=" not in item:
            raise ConfigError(item, "expected KEY=VALUE")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v
    cfg = parse_config(text, overrides)
    if args.command in SUBCOMMAND_MODES:
        # a subcommand fixes the mode even if the file says otherwise
        cfg = replace(cfg, mode=SUBCOMMAND_MODES[args.command])
        _validate(cfg)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"hochsplit: config error: {exc}", file=sys.stderr)
        return 2
    envelope = run(cfg)
    text = render(envelope, cfg.format)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    s = envelope["summary"]
    print(f"hochsplit: {s['passed']}/{s['count']} records passed", file=sys.stderr)
    return exit_status(envelope)


if __name__ == "__main__":
    raise SystemExit(main())
