"""Command-line entry point: simulate, evaluate bounds, verify, and check mgf constants.

Experiments are described by a small ``key = value`` text file::

    problem = leadingones
    n = 200
    trials = 10000
    budget = 5000
    checkpoints = 1000, 5000
    master_seed = 42
    output_dir = runs/lo200
    simulator = fast
    constant.lo_slack = 2.0

Exit codes: 0 all checks pass, 1 a bound is violated, 2 configuration
error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

from .concentration import (
    bracket_window,
    calibrate_bracket_constant,
    default_lambda_grid,
    expected_opt_time_lo,
    fitness_bracket,
    mgf_log_ratios,
)
from .drift import BoundPrediction, DEFAULT_CONSTANTS, lo_log_window, predict_lo_fitness, predict_onemax_fitness
from .drift import predict_onemax_iterated
from .montecarlo import PROBLEMS, ComparisonReport, EnsembleStats, compare_bounds, default_workers, run_ensemble
from .potential import SurvivalCurve, lo_additive_window, lo_potential, predict_lo_additive, survival_from_djwz

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

STATS_HEADER = ["checkpoint", "mean", "variance", "q05", "q25", "q50", "q75", "q95", "inside_bracket", "trials"]
HITTING_HEADER = ["trial", "hitting_time", "censored"]
BOUNDS_HEADER = [
    "t", "thm35_sqrt_e", "thm35_exp", "thm36_linear", "thm36_log",
    "thm43_additive", "thm51_lower", "thm51_point", "thm51_upper",
]

# calibration knobs that live next to the slack constants
EXTRA_CONSTANTS = {
    "confidence": 0.99,
    "min_inside": 0.98,
    "r_constant": 0.0,
}
# optional: bracket_c (otherwise calibrated), mgf_c (otherwise computed)
OPTIONAL_CONSTANTS = ("bracket_c", "mgf_c")
KNOWN_CONSTANTS = tuple(DEFAULT_CONSTANTS) + tuple(EXTRA_CONSTANTS) + OPTIONAL_CONSTANTS


class ConfigError(ValueError):
    pass


def fmt(v) -> str:
    """Cell formatting shared by every CSV: 12 significant digits, NA for missing."""
    if v is None:
        return "NA"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "NA"
    return f"{v:.12g}"


# --- config ----------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    n: int
    trials: int
    budget: Optional[int]
    checkpoints: tuple
    master_seed: int
    output_dir: str = "out"
    simulator: str = "bit"
    bracket_form: str = "printed"
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {sorted(PROBLEMS)}, got {self.problem!r}")
        for name in ("n", "trials"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.budget is not None and self.budget < 1:
            raise ConfigError("budget must be positive (or 'none')")
        if not self.checkpoints:
            raise ConfigError("at least one checkpoint is required")
        cps = list(self.checkpoints)
        if any(c < 1 for c in cps) or cps != sorted(set(cps)):
            raise ConfigError("checkpoints must be positive, strictly increasing")
        if self.budget is not None and cps[-1] > self.budget:
            raise ConfigError(f"checkpoint {cps[-1]} exceeds budget {self.budget}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.simulator not in ("bit", "fast"):
            raise ConfigError("simulator must be 'bit' or 'fast'")
        if self.simulator == "fast" and self.problem != "leadingones":
            raise ConfigError("the fast simulator covers leadingones only")
        if self.bracket_form not in ("printed", "corrected"):
            raise ConfigError("bracket_form must be 'printed' or 'corrected'")
        for k in self.constants:
            if k not in KNOWN_CONSTANTS:
                raise ConfigError(f"unknown constant {k!r}")

    def constant_map(self) -> dict:
        """Every constant in effect: defaults overlaid with the configured values."""
        c = dict(DEFAULT_CONSTANTS)
        c.update(EXTRA_CONSTANTS)
        c.update(self.constants)
        return c


_SCALAR_KEYS = ("problem", "n", "trials", "budget", "checkpoints", "master_seed", "output_dir", "simulator",
                "bracket_form")
_REQUIRED = ("problem", "n", "trials", "budget", "checkpoints", "master_seed")


def _int(text: str) -> int:
    # accept 2e5-style literals as long as they are integral
    try:
        return int(text)
    except ValueError:
        v = float(text)
        if not v.is_integer():
            raise ValueError(f"{text!r} is not an integer")
        return int(v)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse the ``key = value`` format; errors name the offending line."""
    values: dict = {}
    constants: dict = {}
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"{where}: duplicate key {key!r} (first set on line {seen[key]})")
        seen[key] = lineno
        try:
            if key.startswith("constant."):
                name = key[len("constant."):]
                if name not in KNOWN_CONSTANTS:
                    raise ConfigError(f"unknown constant {name!r}; known: {', '.join(KNOWN_CONSTANTS)}")
                constants[name] = float(value)
            elif key in ("n", "trials", "master_seed"):
                values[key] = _int(value)
            elif key == "budget":
                values[key] = None if value.lower() == "none" else _int(value)
            elif key == "checkpoints":
                values[key] = tuple(_int(v) for v in value.replace(",", " ").split())
            elif key in _SCALAR_KEYS:
                values[key] = value
            else:
                raise ConfigError(f"unknown key {key!r}")
        except ConfigError as e:
            raise ConfigError(f"{where}: {e}") from None
        except ValueError as e:
            raise ConfigError(f"{where}: bad value for {key!r}: {e}") from None
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing required key(s): {', '.join(missing)}")
    try:
        return ExperimentConfig(constants=constants, **values)
    except ConfigError as e:
        raise ConfigError(f"{source}: {e}") from None


def serialize_config(cfg: ExperimentConfig) -> str:
    budget = "none" if cfg.budget is None else str(cfg.budget)
    lines = [
        f"problem = {cfg.problem}",
        f"n = {cfg.n}",
        f"trials = {cfg.trials}",
        f"budget = {budget}",
        "checkpoints = " + ", ".join(str(c) for c in cfg.checkpoints),
        f"master_seed = {cfg.master_seed}",
        f"output_dir = {cfg.output_dir}",
        f"simulator = {cfg.simulator}",
        f"bracket_form = {cfg.bracket_form}",
    ]
    lines += [f"constant.{k} = {cfg.constants[k]!r}" for k in sorted(cfg.constants)]
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    # unreadable files surface as OSError (exit code 3)
    return parse_config(Path(path).read_text(), str(path))


# --- bound tables ----------------------------------------------------------


def onemax_sqrt_e_window(n: int) -> float:
    # stand-in for "t = o(n)"
    return n / 10.0


def lo_linear_window(n: int) -> float:
    # stand-in for "t = O(n^1.5)"
    return 2.0 * n**1.5


@lru_cache(maxsize=None)
def _mgf_constant(n: int, r_constant: float) -> float:
    ratios = mgf_log_ratios(n, default_lambda_grid(n), r=r_constant / n, route="linearized")
    return float(max(ratios.max(), 0.0))


def bracket_constant(n: int, t: int, constants: dict) -> float:
    """Configured ``bracket_c``, or the value calibrated from the mgf constant."""
    if "bracket_c" in constants:
        return float(constants["bracket_c"])
    c_mgf = constants.get("mgf_c")
    if c_mgf is None:
        c_mgf = _mgf_constant(n, constants.get("r_constant", 0.0))
    return calibrate_bracket_constant(n, t, c_mgf, r_const=constants.get("r_constant", 0.0))


def lo_bracket(n: int, t: int, constants: dict, form: str = "printed"):
    """Fitness bracket at ``t`` or None outside its window."""
    lo, hi = bracket_window(n)
    if not lo <= t <= hi:
        return None
    try:
        return fitness_bracket(n, t, bracket_constant(n, t, constants), form=form)
    except ValueError:
        # the printed form has no value once 1 - 2t/n^2 - eps <= 0
        return None


def bound_row(problem: str, n: int, t: int, constants: dict, form: str = "printed") -> dict:
    """All applicable predictions at one budget; inapplicable cells are None."""
    row = dict.fromkeys(BOUNDS_HEADER)
    row["t"] = t
    if problem == "onemax":
        if t <= onemax_sqrt_e_window(n):
            row["thm35_sqrt_e"] = predict_onemax_fitness(n, t, "sqrt_e", constants).value
        row["thm35_exp"] = predict_onemax_fitness(n, t, "exp", constants).value
        return row
    if t <= lo_linear_window(n):
        row["thm36_linear"] = predict_lo_fitness(n, t, "linear", constants).value
    if t <= lo_log_window(n):
        row["thm36_log"] = predict_lo_fitness(n, t, "log", constants).value
    if t <= lo_additive_window(n):
        row["thm43_additive"] = predict_lo_additive(n, t, constants).value
    br = lo_bracket(n, t, constants, form)
    if br is not None:
        row["thm51_lower"], row["thm51_point"], row["thm51_upper"] = br.lower, br.point, br.upper
    return row


def cmd_bounds(problem: str, n: int, ts: Sequence[int], constants: Optional[dict] = None,
               form: str = "printed") -> str:
    """CSV text with one row of predictions per budget."""
    c = dict(DEFAULT_CONSTANTS)
    c.update(EXTRA_CONSTANTS)
    c.update(constants or {})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BOUNDS_HEADER)
    for t in ts:
        row = bound_row(problem, n, int(t), c, form)
        w.writerow([fmt(row[k]) for k in BOUNDS_HEADER])
    return buf.getvalue()


# --- simulate --------------------------------------------------------------


def _ensemble(cfg: ExperimentConfig, workers: int) -> tuple[EnsembleStats, list]:
    consts = cfg.constant_map()
    brackets = []
    for t in cfg.checkpoints:
        br = lo_bracket(cfg.n, t, consts, cfg.bracket_form) if cfg.problem == "leadingones" else None
        brackets.append(br)
    stats = run_ensemble(
        cfg.problem, cfg.n, cfg.trials, cfg.checkpoints, cfg.master_seed, budget=cfg.budget,
        simulator=cfg.simulator, workers=workers,
        brackets=[None if b is None else (b.lower, b.upper) for b in brackets],
    )
    return stats, brackets


def stats_csv(stats: EnsembleStats) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_HEADER)
    for k, t in enumerate(stats.checkpoints):
        inside = None
        if stats.inside_bracket is not None and stats.inside_bracket[k] >= 0:
            inside = stats.inside_bracket[k] / stats.trials
        var = stats.variance[k] if stats.trials > 1 else None
        w.writerow([fmt(int(t)), fmt(stats.mean[k]), fmt(var), *map(fmt, stats.quantiles[k]), fmt(inside),
                    fmt(stats.trials)])
    return buf.getvalue()


def hitting_csv(stats: EnsembleStats) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HITTING_HEADER)
    for i, h in enumerate(stats.hitting_times):
        w.writerow([i, "NA" if h < 0 else int(h), int(h < 0)])
    return buf.getvalue()


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def cmd_simulate(cfg: ExperimentConfig, workers: int = 1, out=None) -> EnsembleStats:
    """Run the ensemble and write ``stats.csv`` and ``hitting_times.csv`` to the output directory."""
    out = out or sys.stdout
    stats, _ = _ensemble(cfg, workers)
    outdir = Path(cfg.output_dir)
    _write(outdir / "stats.csv", stats_csv(stats))
    _write(outdir / "hitting_times.csv", hitting_csv(stats))
    ht = stats.hitting
    print(f"simulated {cfg.trials} trials of {cfg.problem} n={cfg.n} seed={cfg.master_seed} "
          f"simulator={cfg.simulator}", file=out)
    for k, t in enumerate(stats.checkpoints):
        print(f"  t={int(t)} mean={fmt(stats.mean[k])} var={fmt(stats.variance[k])}", file=out)
    if ht.values.size:
        print(f"  hitting time mean={fmt(ht.mean())} censored={ht.censored_count}", file=out)
    else:
        print(f"  no trial hit the optimum (censored={ht.censored_count})", file=out)
    print(f"  wrote {outdir / 'stats.csv'} and {outdir / 'hitting_times.csv'}", file=out)
    return stats


# --- verify ----------------------------------------------------------------


@dataclass
class PotentialCheck:
    name: str
    t: int
    status: str
    mean: float
    limit: float
    bound: float
    provenance: str


def _initial_lo_law(n: int) -> np.ndarray:
    # P(LO = k) for a uniform random string
    p = 0.5 ** np.arange(1, n + 2)
    p[n] = 0.5**n
    return p


def potential_checks(stats: EnsembleStats, confidence: float) -> list:
    """``E[g(X_t)] <= E[g(X_0)] - sum_s P(s < T)`` for the LeadingOnes potential.

    ``E[g(X_0)]`` is exact under uniform initialisation.  Two survival
    curves are tried: the ensemble's own (when the budget covers ``t``) and
    the analytic lower bound (when ``t`` is below the expected optimisation
    time).  A check fails only if the sample mean of ``g(X_t)`` exceeds the
    bound by more than the one-sided confidence half-width.
    """
    n = stats.n
    g = lo_potential(n)
    eg0 = float(np.dot(_initial_lo_law(n), g.values[n - np.arange(n + 1)]))
    z = float(sps.norm.ppf(confidence))
    ET = expected_opt_time_lo(n)
    out = []
    for k, t in enumerate(int(c) for c in stats.checkpoints):
        gx = g.values[n - stats.fitness[:, k]]
        mean = float(gx.mean())
        se = float(gx.std(ddof=1) / math.sqrt(gx.size)) if gx.size > 1 else math.nan
        curves: list[SurvivalCurve] = []
        if stats.budget is None or t <= stats.budget:
            curves.append(SurvivalCurve(stats.survival.probs[:t], stats.survival.provenance))
        if t < ET:
            curves.append(survival_from_djwz(n, t))
        for sc in curves:
            bound = eg0 - sc.total()
            limit = mean - z * se
            status = "INSUFFICIENT" if math.isnan(se) else ("PASS" if limit <= bound else "FAIL")
            out.append(PotentialCheck("thm41_potential", t, status, mean, limit, bound, sc.provenance))
    return out


def predictions_for(cfg: ExperimentConfig) -> tuple[list, list]:
    """Strict lower bounds and non-strict ones (data must not contradict) for the config."""
    c = cfg.constant_map()
    strict, loose = [], []
    for t in cfg.checkpoints:
        if cfg.problem == "onemax":
            if t <= onemax_sqrt_e_window(cfg.n):
                strict.append(predict_onemax_fitness(cfg.n, t, "sqrt_e", c))
            strict.append(predict_onemax_fitness(cfg.n, t, "exp", c))
            loose.append(predict_onemax_iterated(cfg.n, t))
            continue
        if t <= lo_linear_window(cfg.n):
            strict.append(predict_lo_fitness(cfg.n, t, "linear", c))
        if t <= lo_log_window(cfg.n):
            strict.append(predict_lo_fitness(cfg.n, t, "log", c))
        if t <= lo_additive_window(cfg.n):
            strict.append(predict_lo_additive(cfg.n, t, c))
        br = lo_bracket(cfg.n, t, c, cfg.bracket_form)
        if br is not None:
            strict.append(BoundPrediction("thm51_bracket", t, lower=br.lower, upper=br.upper,
                                          constants={"bracket_c": br.c}))
    return strict, loose


def cmd_verify(cfg: ExperimentConfig, workers: int = 1, out=None) -> int:
    """Run the ensemble, print a PASS/FAIL line per check, return the exit code."""
    out = out or sys.stdout
    c = cfg.constant_map()
    stats, _ = _ensemble(cfg, workers)
    strict, loose = predictions_for(cfg)
    conf = c["confidence"]
    rows = []
    if strict:
        rows += compare_bounds(stats, strict, conf, c["min_inside"], strict=True).rows
    if loose:
        rows += compare_bounds(stats, loose, conf, c["min_inside"], strict=False).rows
    rows.sort(key=lambda r: (r.t, r.theorem_id))
    pot = potential_checks(stats, conf) if cfg.problem == "leadingones" else []

    print(f"verify problem={cfg.problem} n={cfg.n} trials={cfg.trials} budget={cfg.budget} "
          f"seed={cfg.master_seed} simulator={cfg.simulator} confidence={conf}", file=out)
    print("constants: " + ", ".join(f"{k}={c[k]!r}" for k in sorted(c)), file=out)
    provenances = sorted({p.provenance for p in pot})
    print("survival curves: " + (", ".join(provenances) if provenances else "not used"), file=out)
    for line in ComparisonReport(conf, cfg.master_seed, cfg.trials, rows).lines():
        print(line, file=out)
    for p in pot:
        print(f"{p.status:<12} {p.name:<18} t={p.t:<9d} mean_g={p.mean:.6g} limit={p.limit:.6g} "
              f"bound={p.bound:.6g} survival={p.provenance}", file=out)
    ok = all(r.status == "PASS" for r in rows) and all(p.status == "PASS" for p in pot)
    print("ALL PASS" if ok else "SOME CHECKS FAILED", file=out)
    return EXIT_OK if ok else EXIT_VIOLATION


# --- mgf check -------------------------------------------------------------


@dataclass(frozen=True)
class MgfResult:
    n: int
    c: float
    lambda_min: float
    lambda_max: float
    argmax_lambda: float
    argmax_state: int


def cmd_mgf_check(ns: Sequence[int] = (100, 200, 400), r_constant: float = 0.0, route: str = "linearized",
                  num: int = 41, tolerance: float = 0.2) -> tuple[list, bool]:
    """Smallest ``c`` with ``log E[exp(lam D)] <= c lam^2 n`` per ``n``, and whether they agree.

    ``r = r_constant / n``.  The values agree when ``max/min - 1 <= tolerance``.
    """
    results = []
    for n in ns:
        if n < 10:
            raise ValueError("mgf-check needs n >= 10")
        lams = default_lambda_grid(n, num)
        ratios = mgf_log_ratios(n, lams, r=r_constant / n, route=route)
        i, j = np.unravel_index(int(np.argmax(ratios)), ratios.shape)
        results.append(MgfResult(n, float(max(ratios.max(), 0.0)), float(lams[0]), float(lams[-1]),
                                 float(lams[i]), int(j) + 1))
    cs = np.array([r.c for r in results])
    stable = bool(np.all(np.isfinite(cs)) and cs.min() > 0 and cs.max() / cs.min() - 1.0 <= tolerance)
    return results, stable


def mgf_report(results, stable: bool, r_constant: float, route: str, tolerance: float) -> str:
    lines = [f"mgf check route={route} r_constant={r_constant!r} (r = r_constant/n)",
             f"{'n':>6} {'c':>12} {'lambda_min':>12} {'lambda_max':>12} {'at_lambda':>12} {'at_X':>6}"]
    for r in results:
        lines.append(f"{r.n:>6d} {r.c:>12.6g} {r.lambda_min:>12.6g} {r.lambda_max:>12.6g} "
                     f"{r.argmax_lambda:>12.6g} {r.argmax_state:>6d}")
    cs = [r.c for r in results]
    spread = max(cs) / min(cs) - 1.0 if min(cs) > 0 else math.inf
    lines.append(f"spread max/min - 1 = {spread:.4f} (tolerance {tolerance}) -> {'STABLE' if stable else 'UNSTABLE'}")
    return "\n".join(lines) + "\n"


# --- argument handling -----------------------------------------------------


def _budgets(tokens: Sequence[str]) -> list[int]:
    """Budgets from tokens: plain integers or inclusive ``start:stop:step`` ranges."""
    ts = []
    for tok in tokens:
        for part in tok.split(","):
            part = part.strip()
            if not part:
                continue
            if ":" in part:
                bits = [_int(b) for b in part.split(":")]
                if len(bits) != 3 or bits[2] <= 0:
                    raise ConfigError(f"range {part!r} must be start:stop:step with step > 0")
                ts.extend(range(bits[0], bits[1] + 1, bits[2]))
            else:
                ts.append(_int(part))
    if any(t < 0 for t in ts):
        raise ConfigError("budgets must be non-negative")
    return ts


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fixedbudget", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def run_flags(sp):
        sp.add_argument("--config", required=True, help="experiment config (key = value)")
        sp.add_argument("--seed", type=_seed, help="override master_seed")
        sp.add_argument("--workers", type=int, help="worker processes (default: $FIXEDBUDGET_WORKERS or 1)")
        sp.add_argument("--out", help="override output_dir")

    run_flags(sub.add_parser("simulate", help="run an ensemble and write CSV statistics"))
    run_flags(sub.add_parser("verify", help="run an ensemble and check every applicable bound"))

    b = sub.add_parser("bounds", help="tabulate predicted bounds over a range of budgets")
    b.add_argument("--problem", choices=sorted(PROBLEMS), help="defaults to the config's problem")
    b.add_argument("--n", type=int, help="defaults to the config's n")
    b.add_argument("--t", nargs="+", required=True, help="budgets: integers or start:stop:step")
    b.add_argument("--config", help="take problem, n, and constants from this config")
    b.add_argument("--constant", action="append", default=[], metavar="NAME=VALUE")
    b.add_argument("--out", help="write CSV here (a directory gets bounds.csv); default stdout")

    m = sub.add_parser("mgf-check", help="calibrate the mgf constant across problem sizes")
    m.add_argument("--n", type=int, nargs="+", default=[100, 200, 400])
    m.add_argument("--r-constant", type=float, default=0.0, help="compensator r = value / n")
    m.add_argument("--route", choices=("linearized", "exact"), default="linearized")
    m.add_argument("--lambdas", type=int, default=41, help="grid points on [1/n^2, 1/(2en)]")
    m.add_argument("--tolerance", type=float, default=0.2)
    m.add_argument("--out", help="also write the table as CSV (a directory gets mgf_check.csv)")
    return p


def _resolve_run(args) -> tuple[ExperimentConfig, int]:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise ConfigError("--workers must be positive")
    return cfg, workers


def _target(out: str, default_name: str) -> Path:
    p = Path(out)
    return p / default_name if p.is_dir() or out.endswith(os.sep) else p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cfg, workers = _resolve_run(args)
            cmd_simulate(cfg, workers)
            return EXIT_OK
        if args.command == "verify":
            cfg, workers = _resolve_run(args)
            return cmd_verify(cfg, workers)
        if args.command == "bounds":
            constants = {}
            problem, n, form = args.problem, args.n, "printed"
            if args.config:
                cfg = load_config(args.config)
                constants.update(cfg.constants)
                problem, n, form = problem or cfg.problem, n or cfg.n, cfg.bracket_form
            for item in args.constant:
                name, _, value = item.partition("=")
                if name not in KNOWN_CONSTANTS or not value:
                    raise ConfigError(f"--constant {item!r}: expected NAME=VALUE with NAME in {KNOWN_CONSTANTS}")
                constants[name] = float(value)
            if problem is None or n is None:
                raise ConfigError("bounds needs --problem and --n (or --config)")
            text = cmd_bounds(problem, n, _budgets(args.t), constants, form)
            if args.out:
                _write(_target(args.out, "bounds.csv"), text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        if args.command == "mgf-check":
            results, stable = cmd_mgf_check(args.n, args.r_constant, args.route, args.lambdas, args.tolerance)
            sys.stdout.write(mgf_report(results, stable, args.r_constant, args.route, args.tolerance))
            if args.out:
                buf = io.StringIO()
                w = csv.writer(buf, lineterminator="\n")
                w.writerow(["n", "c", "lambda_min", "lambda_max", "argmax_lambda", "argmax_state"])
                for r in results:
                    w.writerow([r.n, fmt(r.c), fmt(r.lambda_min), fmt(r.lambda_max), fmt(r.argmax_lambda),
                                r.argmax_state])
                _write(_target(args.out, "mgf_check.csv"), buf.getvalue())
            return EXIT_OK if stable else EXIT_VIOLATION
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
