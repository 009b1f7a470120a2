"""Command-line runner for the verification experiments.

Every subcommand writes a header row, one data row per parameter value and a
trailing metadata record.  Data rows depend only on the configuration and
the seed; the metadata carries the timestamp.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .analytic import (
    chapman_kolmogorov_gap,
    default_x_grid,
    gaussian_bump,
    generator_A,
    generator_B_t,
    generator_gaps,
    generator_limit_gap,
    negative_side_bound,
    semigroup_derivative_identity_gap,
)
from .errors import DomainError, ModelInvalidError, QuadratureError
from .levy import (
    assess_profile,
    condition_S5_profile,
    condition_S6_profile,
    condition_S7_profile,
    make_model,
)
from .rng import THREADS_ENV, RngSpec, stream_tag
from .simulate import extremal_markov_batch, log_scale_path, truncated_subordinator_batch
from .skorohod import j1_distance, sup_distance
from .stats import extremal_process_checks, fidi_sweep, marginal_limit_sweep

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2

SUBCOMMANDS = ("marginal", "fidi", "generator", "semigroup", "extremal-check",
               "conditions", "paths")

DEFAULT_T = {
    "marginal": "0.5,0.2,0.1,0.05,0.02",
    "fidi": "0.1,0.05,0.02,0.01",
    "generator": "0.2,0.1,0.05,0.025,0.0125",
    "paths": "0.1",
}
CK_TRIPLES = ((0.3, 0.7, 1.5), (0.1, 0.2, 0.5), (1.0, 2.0, 2.5))
DERIVATIVE_POINTS = ((1.0, 0.5), (2.0, 1.0), (0.5, 0.2))
GENERATOR_LIMIT_POINTS = (0.5, 1.0, 2.0)


class ValidationError(ValueError):
    pass


def parse_grid(text: str) -> list[float]:
    """``"a,b,c"``; ``"a..b"`` (one point per decade); ``"a..b:k"`` (k points).

    Ranges are geometric when both ends are positive, linear otherwise.
    """
    text = text.strip()
    if ".." not in text:
        try:
            return [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise ValidationError(f"cannot parse number list {text!r}") from None
    body, _, count = text.partition(":")
    lo_s, _, hi_s = body.partition("..")
    try:
        lo, hi = float(lo_s), float(hi_s)
        k = int(count) if count else None
    except ValueError:
        raise ValidationError(f"cannot parse range {text!r}") from None
    if lo > 0 and hi > 0:
        if k is None:
            k = int(round(abs(np.log10(hi / lo)))) + 1
        return [float(v) for v in np.geomspace(lo, hi, max(k, 2))]
    if k is None:
        raise ValidationError("a linear range needs a point count, e.g. -1..1:11")
    return [float(v) for v in np.linspace(lo, hi, k)]


@dataclass
class ExperimentConfig:
    subcommand: str
    model: str = "gamma"
    gamma: float = 1.0
    lam: float = 1.0
    alpha: float = 0.5
    c: float = 1.0
    t: list = field(default_factory=list)
    s_grid: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    x_grid: list | None = None
    z: float = 10.0
    eps: float | None = None
    n: int = 200_000
    seed: int = 42
    output: str = "-"
    fmt: str = "csv"
    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    center: float = 1.0
    width: float = 0.5
    s: float = 1.0
    horizon: float = 5.0

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ValidationError(f"unknown subcommand {self.subcommand!r}")
        for name in ("gamma", "alpha", "c", "z", "abs_tol", "rel_tol", "width", "s",
                     "horizon"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if not self.lam >= 0:
            raise ValidationError("lambda must be nonnegative")
        if any(not v > 0 for v in self.t):
            raise ValidationError("t must be positive")
        if any(b >= a for a, b in zip(self.t, self.t[1:])):
            raise ValidationError("t list must be strictly decreasing")
        if any(not v > 0 for v in self.s_grid) or \
                any(b <= a for a, b in zip(self.s_grid, self.s_grid[1:])):
            raise ValidationError("s grid must be positive and strictly increasing")
        if self.eps is not None and not 0 < self.eps < 1:
            raise ValidationError("eps must lie in (0, 1)")
        if self.n < 1:
            raise ValidationError("n must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.fmt not in ("csv", "json"):
            raise ValidationError("format must be csv or json")
        if self.model not in ("gamma", "logtail", "stable"):
            raise ValidationError("model must be one of gamma, logtail, stable")
        return self

    def build_model(self):
        if self.model == "gamma":
            return make_model("gamma", gamma=self.gamma, lam=self.lam)
        if self.model == "logtail":
            return make_model("logtail", gamma=self.gamma)
        return make_model("stable", alpha=self.alpha, c=self.c)


@dataclass
class Table:
    columns: list
    rows: list
    details: dict = field(default_factory=dict)


# ----------------------------------------------------------- experiments

def run_marginal(cfg):
    if cfg.model != "gamma" or not cfg.lam > 0:
        raise ValidationError("marginal needs the gamma model with lambda > 0")
    sweep = marginal_limit_sweep(cfg.gamma, cfg.lam, cfg.t, cfg.n, cfg.seed)
    return Table(sweep.columns, list(sweep.rows()))


def run_fidi(cfg):
    if cfg.model == "gamma":
        if not cfg.lam > 0:
            raise ValidationError("fidi with the gamma model needs lambda > 0")
        sweep = fidi_sweep(cfg.t, cfg.s_grid, cfg.n, cfg.z, cfg.seed,
                           gamma=cfg.gamma, lam=cfg.lam)
    else:
        model = cfg.build_model()
        if model.gamma_theoretical is None:
            raise ValidationError(f"model {cfg.model} has no limit rate; fidi needs one")
        sweep = fidi_sweep(cfg.t, cfg.s_grid, cfg.n, cfg.z, cfg.seed, model=model,
                           eps=cfg.eps)
    details = {"lattice": [
        {"t": r.t, "thresholds": r.thresholds.tolist(), "empirical": r.empirical.tolist(),
         "theoretical": r.theoretical.tolist()} for r in sweep.details]}
    return Table(sweep.columns, list(sweep.rows()), details)


def run_generator(cfg):
    model = cfg.build_model()
    gamma = model.gamma_theoretical or cfg.gamma
    f = gaussian_bump(cfg.center, cfg.width)
    x = np.asarray(cfg.x_grid if cfg.x_grid is not None else default_x_grid(cfg.z))
    if np.any(x > cfg.z):
        raise ValidationError("x grid must not exceed z")
    a_vals = generator_A(f, x, gamma)
    neg = x <= 0
    rows = []
    for t in cfg.t:
        gaps = generator_gaps(f, t, model, gamma, x, a_vals)
        ratio = float("nan")
        if neg.any():
            b_neg = np.abs(np.asarray(generator_B_t(f, x[neg], t, model)))
            ratio = float(np.max(b_neg / negative_side_bound(f, x[neg], t, model)))
        rows.append([t, float(gaps.max()), ratio, int(x.size)])
    return Table(["t", "uniform_gap", "negative_bound_ratio", "n_points"], rows)


def run_semigroup(cfg):
    f = gaussian_bump(cfg.center, cfg.width)
    rows = []
    for s, t, x in CK_TRIPLES:
        rows.append(["chapman_kolmogorov", s, t, x, chapman_kolmogorov_gap(f, s, t, x, cfg.gamma)])
    for x, t in DERIVATIVE_POINTS:
        rows.append(["derivative_identity", 0.0, t, x,
                     semigroup_derivative_identity_gap(f, x, t, cfg.gamma)])
    for x in GENERATOR_LIMIT_POINTS:
        rows.append(["generator_limit", 0.0, 1e-4, x, generator_limit_gap(f, x, 1e-4, cfg.gamma)])
    return Table(["check", "s", "t", "x", "gap"], rows)


def run_extremal(cfg):
    res = extremal_process_checks(cfg.gamma, cfg.z, cfg.s, cfg.n, cfg.seed)
    rows = [[name, getattr(res, name), res.n] for name in
            ("holding_ks", "jump_ratio_ks", "two_sampler_ks", "law_ks",
             "transition_max_discrepancy")]
    return Table(["statistic", "value", "n"], rows)


def run_conditions(cfg):
    model = cfg.build_model()
    x = np.sort(np.asarray(cfg.x_grid if cfg.x_grid is not None
                           else parse_grid("1e-2..1e-8")))[::-1]
    s7 = condition_S7_profile(model, x)
    s5 = condition_S5_profile(model, 1.0 / x)
    try:
        s6 = condition_S6_profile(model, x)
    except DomainError:
        s6 = [None] * x.size
    rows = [[float(xi), float(1.0 / xi), float(a), None if b is None else float(b), float(c)]
            for xi, a, b, c in zip(x, s5, s6, s7)]
    verdict = assess_profile(s7)
    details = {"s7_verdict": {"holds": verdict.holds, "estimate": verdict.estimate,
                              "reason": verdict.reason}}
    return Table(["x", "s", "s5", "s6", "s7"], rows, details)


def run_paths(cfg):
    model = cfg.build_model()
    gamma = model.gamma_theoretical or cfg.gamma
    n = cfg.n
    rows = []
    for t in cfg.t:
        eps = cfg.eps if cfg.eps is not None else float(np.exp(-cfg.z / t - 10.0))
        if eps <= 0:
            raise ValidationError("z/t too large: the truncation level underflows")
        stream = (stream_tag("paths"), stream_tag(repr(t)))
        pre = truncated_subordinator_batch(model, eps, t * cfg.horizon, n, cfg.seed, stream,
                                           compensate_drift=False)
        lim = extremal_markov_batch(gamma, cfg.z, cfg.horizon, n, cfg.seed,
                                    stream + (stream_tag("limit"),))
        for i in range(n):
            p = log_scale_path(pre.path(i), t, cfg.z)
            q = lim.path(i)
            rows.append([t, i, p.n_jumps, q.n_jumps, sup_distance(p, q),
                         j1_distance(p, q, 1e-9)])
    return Table(["t", "replicate", "jumps_prelimit", "jumps_limit", "sup_distance",
                  "j1_distance"], rows)


RUNNERS = {
    "marginal": run_marginal,
    "fidi": run_fidi,
    "generator": run_generator,
    "semigroup": run_semigroup,
    "extremal-check": run_extremal,
    "conditions": run_conditions,
    "paths": run_paths,
}


def run(cfg: ExperimentConfig) -> Table:
    cfg.validate()
    return RUNNERS[cfg.subcommand](cfg)


# --------------------------------------------------------------- output

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render(table: Table, cfg: ExperimentConfig, fmt: str) -> str:
    metadata = {
        "seed": cfg.seed,
        "version": __version__,
        "config": asdict(cfg),
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if fmt == "json":
        # nested results (fidi lattices, verdicts) only travel in JSON
        payload = {"columns": table.columns,
                   "rows": [[_json_value(v) for v in r] for r in table.rows],
                   "details": table.details,
                   "metadata": metadata}
        return json.dumps(payload, indent=1, default=_json_value) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    buf.write("# metadata: " + json.dumps(metadata, sort_keys=True, default=_json_value) + "\n")
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model and sampling")
    g.add_argument("--model", default="gamma", help="gamma | logtail | stable (default gamma)")
    g.add_argument("--gamma", type=float, default=1.0, help="limit rate gamma (default 1)")
    g.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="gamma-model rate lambda (default 1)")
    g.add_argument("--alpha", type=float, default=0.5, help="stable index (default 0.5)")
    g.add_argument("--c", type=float, default=1.0, help="stable scale (default 1)")
    g.add_argument("--t", default=None,
                   help="decreasing list of scaling times; comma list or a..b[:k] range")
    g.add_argument("--s-grid", default="0.5,1,2", help="increasing s grid (default 0.5,1,2)")
    g.add_argument("--x-grid", default=None, help="x grid; comma list or a..b[:k] range")
    g.add_argument("--z", type=float, default=None,
                   help="truncation level z (default 10; generator: 2)")
    g.add_argument("--eps", type=float, default=None,
                   help="small-jump cutoff; default exp(-z/t-10) where a run needs it")
    g.add_argument("--n", type=int, default=None,
                   help="sample count (default 200000; paths: 200)")
    g.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    g.add_argument("--s", type=float, default=1.0, help="observation time for extremal-check")
    g.add_argument("--horizon", type=float, default=5.0, help="path horizon for paths")
    g.add_argument("--center", type=float, default=1.0, help="test-function centre")
    g.add_argument("--width", type=float, default=0.5, help="test-function width")
    g.add_argument("--abs-tol", type=float, default=1e-9, help="quadrature abs tolerance")
    g.add_argument("--rel-tol", type=float, default=1e-8, help="quadrature rel tolerance")
    o = common.add_argument_group("output")
    o.add_argument("-o", "--output", default="-", help="output path, '-' for stdout")
    o.add_argument("--format", dest="fmt", default="csv", choices=("csv", "json"))

    parser = _Parser(
        prog="extremal-limit",
        description="Verification experiments for log-scaled subordinators "
                    "and truncated extremal processes.",
        epilog=f"Set {THREADS_ENV} to fix the number of worker threads "
               "(results do not depend on it). Exit codes: 0 success, "
               "1 invalid input, 2 numerical failure.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    helps = {
        "marginal": "KS and exact gap of -t log X_t against Exp(gamma)",
        "fidi": "joint-survival discrepancy against the truncated extremal law",
        "generator": "uniform gap between prelimit and limit generators",
        "semigroup": "Chapman-Kolmogorov, derivative identity and generator limit",
        "extremal-check": "holding times, jump ratios and transition law of the limit",
        "conditions": "S5/S6/S7 limit-condition profiles",
        "paths": "sample path pairs with sup and J1 distances",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
    return parser


def config_from_args(ns) -> ExperimentConfig:
    t_text = ns.t if ns.t is not None else DEFAULT_T.get(ns.subcommand, "0.1")
    n = ns.n if ns.n is not None else (200 if ns.subcommand == "paths" else 200_000)
    z = ns.z if ns.z is not None else (2.0 if ns.subcommand == "generator" else 10.0)
    return ExperimentConfig(
        subcommand=ns.subcommand, model=ns.model, gamma=ns.gamma, lam=ns.lam,
        alpha=ns.alpha, c=ns.c, t=parse_grid(t_text), s_grid=parse_grid(ns.s_grid),
        x_grid=parse_grid(ns.x_grid) if ns.x_grid else None, z=z, eps=ns.eps, n=n,
        seed=ns.seed, output=ns.output, fmt=ns.fmt, abs_tol=ns.abs_tol,
        rel_tol=ns.rel_tol, center=ns.center, width=ns.width, s=ns.s, horizon=ns.horizon,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        cfg.validate()
        table = run(cfg)
        text = render(table, cfg, cfg.fmt)
    except (ValidationError, DomainError, ModelInvalidError) as exc:
        print(f"extremal-limit: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (QuadratureError, FloatingPointError, ArithmeticError) as exc:
        print(f"extremal-limit: numerical failure in {ns.subcommand}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    try:
        if cfg.output == "-":
            sys.stdout.write(text)
        else:
            with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"extremal-limit: error: cannot write {cfg.output}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
