"""Ensembles of independent EA runs and their comparison with predicted bounds."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba
import numpy as np
from scipy import stats as sps

from .bench import RngStream, Trajectory, _checkpoint_array, leading_ones, one_max, run_trial
from .drift import BoundPrediction
from .potential import SurvivalCurve

__all__ = [
    "QUANTILES",
    "HittingTimeSample",
    "EnsembleStats",
    "fast_lo_trial",
    "run_ensemble",
    "empirical_survival",
    "ComparisonRow",
    "ComparisonReport",
    "compare_bounds",
    "ks_two_sample",
    "chi_square_two_sample",
]

QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
PROBLEMS = {"onemax": one_max, "leadingones": leading_ones}


@numba.njit(cache=True)
def _fast_lo_kernel(gen, n, budget, checkpoints, fit_out):
    ncp = checkpoints.shape[0]
    lo = gen.geometric(0.5) - 1
    if lo > n:
        lo = n
    X = n - lo
    q = 1.0 - 1.0 / n
    now = 0
    ci = 0
    while X > 0:
        p = q ** (n - X) / n
        wait = gen.geometric(p)
        if budget >= 0 and now + wait > budget:
            break
        now += wait
        while ci < ncp and checkpoints[ci] < now:
            fit_out[ci] = n - X
            ci += 1
        g = gen.geometric(0.5)
        X -= g if g < X else X
    while ci < ncp:
        fit_out[ci] = n - X
        ci += 1
    return now if X == 0 else -1


def fast_lo_trial(n: int, budget: Optional[int], checkpoints: Sequence[int], rng: RngStream) -> Trajectory:
    """LeadingOnes run simulated level by level.

    From distance ``X`` the wait for the next improvement is geometric with
    the exact improvement probability and the jump is drawn from the gain
    law; the initial value is that of a uniform random string.  Same law
    as the bit-level run for the fitness trajectory and hitting time.
    """
    cp = _checkpoint_array(checkpoints, budget)
    out = np.zeros(cp.size, dtype=np.int64)
    hit = _fast_lo_kernel(rng.generator, n, -1 if budget is None else budget, cp, out)
    return Trajectory(cp, out, None if hit < 0 else int(hit), budget)


@dataclass(frozen=True)
class HittingTimeSample:
    values: np.ndarray
    censored_count: int

    def mean(self) -> float:
        return float(self.values.mean())

    def standard_error(self) -> float:
        return float(self.values.std(ddof=1) / math.sqrt(self.values.size))


@dataclass(frozen=True)
class EnsembleStats:
    """Per-checkpoint statistics of an ensemble plus the raw samples behind them.

    ``hitting_times`` holds -1 for censored trials.  ``inside_bracket`` is
    filled when brackets were supplied to :func:`run_ensemble`.
    """

    problem: str
    n: int
    trials: int
    master_seed: int
    budget: Optional[int]
    checkpoints: np.ndarray
    fitness: np.ndarray
    hitting_times: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    quantiles: np.ndarray
    inside_bracket: Optional[np.ndarray] = None
    simulator: str = "bit"
    survival: Optional[SurvivalCurve] = field(default=None, repr=False)

    @property
    def hitting(self) -> HittingTimeSample:
        ht = self.hitting_times
        return HittingTimeSample(ht[ht >= 0], int(np.count_nonzero(ht < 0)))

    def standard_error(self) -> np.ndarray:
        if self.trials < 2:
            return np.full(self.checkpoints.size, np.nan)
        return np.sqrt(self.variance / self.trials)


def _run_chunk(args):
    problem, n, budget, cp, master_seed, lo, hi, simulator = args
    f = PROBLEMS[problem]
    fit = np.empty((hi - lo, cp.size), dtype=np.int64)
    ht = np.empty(hi - lo, dtype=np.int64)
    for k, i in enumerate(range(lo, hi)):
        rng = RngStream(master_seed, i)
        if simulator == "fast":
            tr = fast_lo_trial(n, budget, cp, rng)
        else:
            tr = run_trial(n, f, budget, cp, rng)
        fit[k] = tr.fitness_at
        ht[k] = -1 if tr.hitting_time is None else tr.hitting_time
    return fit, ht


def _chunks(trials: int, workers: int):
    size = max(1, math.ceil(trials / (4 * workers)))
    return [(lo, min(trials, lo + size)) for lo in range(0, trials, size)]


def run_ensemble(
    problem: str,
    n: int,
    trials: int,
    checkpoints: Sequence[int],
    master_seed: int,
    budget: Optional[int] = None,
    simulator: str = "bit",
    workers: int = 1,
    brackets: Optional[Sequence[Optional[tuple]]] = None,
) -> EnsembleStats:
    """Run ``trials`` independent trials and aggregate them in trial order.

    Trial ``i`` draws from ``RngStream(master_seed, i)``, so the result does
    not depend on ``workers``.  ``budget=None`` runs every trial to the
    optimum; otherwise checkpoints default-fill up to the budget.
    ``simulator="fast"`` uses :func:`fast_lo_trial` (LeadingOnes only).
    ``brackets`` gives an optional ``(lower, upper)`` per checkpoint.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if simulator not in ("bit", "fast"):
        raise ValueError(f"unknown simulator {simulator!r}")
    if simulator == "fast" and problem != "leadingones":
        raise ValueError("the fast simulator covers LeadingOnes only")
    cp = _checkpoint_array(checkpoints, budget)
    jobs = [(problem, n, budget, cp, master_seed, lo, hi, simulator) for lo, hi in _chunks(trials, workers)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    fitness = np.concatenate([p[0] for p in parts])
    hitting = np.concatenate([p[1] for p in parts])

    fl = fitness.astype(float)
    mean = fl.mean(axis=0) if cp.size else np.empty(0)
    var = fl.var(axis=0, ddof=1) if trials > 1 else np.zeros(cp.size)
    quant = np.quantile(fl, QUANTILES, axis=0).T if cp.size else np.empty((0, len(QUANTILES)))
    inside = None
    if brackets is not None:
        if len(brackets) != cp.size:
            raise ValueError("one bracket (or None) per checkpoint")
        inside = np.array(
            [-1 if b is None else int(np.count_nonzero((fl[:, k] >= b[0]) & (fl[:, k] <= b[1])))
             for k, b in enumerate(brackets)]
        )
    stats = EnsembleStats(
        problem, n, trials, master_seed, budget, cp, fitness, hitting, mean, var, quant, inside, simulator
    )
    object.__setattr__(stats, "survival", empirical_survival(stats))
    return stats


def empirical_survival(stats: EnsembleStats, length: Optional[int] = None) -> SurvivalCurve:
    """Fraction of trials with ``T > s`` for ``s = 0..length-1``.

    Censored trials count as surviving every ``s`` below the budget.  The
    default length is the budget, or ``max T + 1`` for unbounded runs.
    """
    ht = stats.hitting_times
    if length is None:
        if stats.budget is not None:
            length = stats.budget
        else:
            length = int(ht.max()) + 1 if ht.size else 0
    if stats.budget is not None and length > stats.budget and np.any(ht < 0):
        raise ValueError("survival beyond the budget is unknown for censored trials")
    # T > s  <=>  s < T; censored behave like T = infinity
    eff = np.where(ht < 0, np.iinfo(np.int64).max, ht)
    counts = np.bincount(np.minimum(eff, length), minlength=length + 1)
    surv = 1.0 - np.cumsum(counts[:length]) / ht.size
    return SurvivalCurve(np.clip(surv, 0.0, 1.0), "empirical")


@dataclass(frozen=True)
class ComparisonRow:
    theorem_id: str
    t: int
    status: str
    mean: float
    standard_error: float
    limit: float
    prediction: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    inside_fraction: Optional[float] = None
    constants: dict = field(default_factory=dict)


@dataclass
class ComparisonReport:
    confidence: float
    master_seed: int
    trials: int
    rows: list

    @property
    def all_pass(self) -> bool:
        return all(r.status == "PASS" for r in self.rows)

    def lines(self):
        for r in self.rows:
            target = (
                f"[{r.lower:.6g}, {r.upper:.6g}] inside={r.inside_fraction:.4f}"
                if r.prediction is None
                else f"bound={r.prediction:.6g}"
            )
            yield (
                f"{r.status:<12} {r.theorem_id:<18} t={r.t:<9d} mean={r.mean:.6g} "
                f"se={r.standard_error:.3g} limit={r.limit:.6g} {target}"
            )


def compare_bounds(
    stats: EnsembleStats,
    predictions: Sequence[BoundPrediction],
    confidence: float = 0.99,
    min_inside: float = 0.98,
    strict: bool = True,
) -> ComparisonReport:
    """Check fitness lower bounds and brackets against an ensemble.

    A point bound passes when the one-sided confidence limit of the sample
    mean stays at or above it: the lower limit when ``strict`` (the mean
    significantly clears the bound), otherwise the upper limit (the data do
    not significantly contradict the bound).  A bracket passes when at
    least ``min_inside`` of the trials and the sample mean lie inside.
    Ensembles with fewer than two trials are flagged INSUFFICIENT.
    """
    cps = {int(c): k for k, c in enumerate(stats.checkpoints)}
    z = float(sps.norm.ppf(confidence))
    se = stats.standard_error()
    rows = []
    for pred in predictions:
        if pred.t not in cps:
            raise ValueError(f"no checkpoint at t={pred.t} for {pred.theorem_id}")
        k = cps[pred.t]
        mean = float(stats.mean[k])
        s = float(se[k])
        if stats.trials < 2:
            rows.append(ComparisonRow(pred.theorem_id, pred.t, "INSUFFICIENT", mean, s, math.nan,
                                      pred.value, pred.lower, pred.upper, constants=pred.constants))
            continue
        if pred.is_bracket:
            col = stats.fitness[:, k]
            frac = float(np.mean((col >= pred.lower) & (col <= pred.upper)))
            ok = frac >= min_inside and pred.lower <= mean <= pred.upper
            rows.append(ComparisonRow(pred.theorem_id, pred.t, "PASS" if ok else "FAIL", mean, s, mean,
                                      None, pred.lower, pred.upper, frac, pred.constants))
        else:
            limit = mean - z * s if strict else mean + z * s
            ok = limit >= pred.value
            rows.append(ComparisonRow(pred.theorem_id, pred.t, "PASS" if ok else "FAIL", mean, s, limit,
                                      pred.value, constants=pred.constants))
    return ComparisonReport(confidence, stats.master_seed, stats.trials, rows)


def ks_two_sample(a, b):
    """Two-sample Kolmogorov-Smirnov test; returns ``(statistic, p_value)``."""
    res = sps.ks_2samp(np.asarray(a), np.asarray(b))
    return float(res.statistic), float(res.pvalue)


def chi_square_two_sample(a, b, min_expected: float = 5.0):
    """Chi-square homogeneity test of two integer samples.

    Sparse categories are merged from the tails inwards until every
    expected count reaches ``min_expected``.  Returns ``(statistic, p_value, dof)``.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    ca = np.bincount(a - lo, minlength=hi - lo + 1).astype(float)
    cb = np.bincount(b - lo, minlength=hi - lo + 1).astype(float)
    fa = a.size / (a.size + b.size)

    def merged(counts_a, counts_b):
        ta, tb, bins = [], [], []
        acc_a = acc_b = 0.0
        for x, y in zip(counts_a, counts_b):
            acc_a += x
            acc_b += y
            if min((acc_a + acc_b) * fa, (acc_a + acc_b) * (1 - fa)) >= min_expected:
                ta.append(acc_a)
                tb.append(acc_b)
                acc_a = acc_b = 0.0
        if acc_a + acc_b > 0:
            if ta:
                ta[-1] += acc_a
                tb[-1] += acc_b
            else:
                ta.append(acc_a)
                tb.append(acc_b)
        return np.array([ta, tb])

    table = merged(ca, cb)
    if table.shape[1] < 2:
        return 0.0, 1.0, 0
    stat, p, dof, _ = sps.chi2_contingency(table, correction=False)
    return float(stat), float(p), int(dof)


def default_workers() -> int:
    """Worker count from ``FIXEDBUDGET_WORKERS``, else 1."""
    try:
        return max(1, int(os.environ.get("FIXEDBUDGET_WORKERS", "1")))
    except ValueError:
        return 1
