"""LeadingOnes process facts and the concentration machinery built on them.

Fitness distance ``X = n - LO(x)``.  An improving step from distance ``X``
happens with probability ``(1 - 1/n)**(n - X) / n`` and then removes ``G``
levels, where ``G - 1`` counts the free riders behind the flipped bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .drift import exact_lo_drift

__all__ = [
    "GainPmf",
    "gain_pmf",
    "gain_mgf",
    "improvement_probability",
    "expected_opt_time_lo",
    "djwz_tail",
    "TailBoundParams",
    "martingale_tail",
    "mgf_log_ratios",
    "verify_mgf_drift_bound",
    "default_lambda_grid",
    "FitnessBracket",
    "fitness_bracket",
    "bracket_window",
    "calibrate_bracket_constant",
]

_EXACT_LIMIT = 63


@dataclass(frozen=True)
class GainPmf:
    """Law of the distance decrease given that a step improves.

    ``probs[i - 1] = P(G = i)`` for ``i = 1..X``.  Entries are ``Fraction``
    for ``X <= 63`` and floats beyond.
    """

    X: int
    probs: tuple

    @property
    def exact(self) -> bool:
        return isinstance(self.probs[0], Fraction)

    def support(self) -> np.ndarray:
        return np.arange(1, self.X + 1)

    def as_array(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])

    def total(self):
        return sum(self.probs) if self.exact else math.fsum(self.probs)

    def mean(self):
        if self.exact:
            return sum(i * p for i, p in enumerate(self.probs, start=1))
        return math.fsum(i * p for i, p in enumerate(self.probs, start=1))


def gain_pmf(X: int) -> GainPmf:
    """P(G = i) = 2**-i for i < X and P(G = X) = 2**-(X - 1)."""
    X = int(X)
    if X < 1:
        raise ValueError("the gain law is defined for distances X >= 1")
    if X <= _EXACT_LIMIT:
        half = Fraction(1, 2)
        probs = [half**i for i in range(1, X)] + [half ** (X - 1)]
    else:
        probs = [0.5**i for i in range(1, X)] + [0.5 ** (X - 1)]
    return GainPmf(X, tuple(probs))


def gain_mgf(X: int, eta: float) -> float:
    """Closed form of E[exp(eta * G)] for the gain law at distance ``X``."""
    X = int(X)
    if X < 1:
        raise ValueError("the gain law is defined for distances X >= 1")
    q = math.exp(eta) / 2.0
    denom = 1.0 - q
    if abs(denom) < 1e-12:
        raise ValueError("eta = ln 2 is a pole of the closed form")
    if abs(denom) < 1e-2:
        # the closed form cancels near the pole; sum the pmf directly there
        return math.fsum([q**i for i in range(1, X)] + [2.0 * q**X])
    return (q**X * -math.expm1(eta) + q) / denom


def improvement_probability(n: int, X):
    """Probability that the EA leaves distance ``X`` (0 at the optimum)."""
    X = np.asarray(X, dtype=float)
    p = (1.0 - 1.0 / n) ** (n - X) / n
    out = np.where(X > 0, p, 0.0)
    return float(out) if out.ndim == 0 else out


def expected_opt_time_lo(n: int) -> float:
    """Exact expected optimization time of the (1+1) EA on LeadingOnes."""
    if n < 2:
        raise ValueError("closed form needs n >= 2")
    return (n * n - n) / 2.0 * ((1.0 + 1.0 / (n - 1)) ** n - 1.0)


def djwz_tail(n: int, d: float) -> float:
    """Bound on P(|T - E[T]| >= d), valid for 0 <= d <= 2 n^2, capped at 1."""
    if not 0 <= d <= 2.0 * n * n:
        raise ValueError(f"deviation d={d} outside [0, 2n^2] for n={n}")
    return min(1.0, 4.0 * math.exp(-d * d / (20.0 * math.e**2 * n**3)))


@dataclass(frozen=True)
class TailBoundParams:
    b1: float
    b2: float
    nu_sq_sum: float

    def __post_init__(self):
        if not 0 < self.b2 < self.b1:
            raise ValueError("need 0 < b2 < b1 (b1 may be inf)")
        if self.nu_sq_sum < 0:
            raise ValueError("nu_sq_sum must be non-negative")


def martingale_tail(d: float, params: TailBoundParams) -> float:
    """Tail bound for a sum of differences whose mgf is controlled on [1/b1, 1/b2].

    Returns ``exp(-d / (2 b2))`` when ``d >= V / b2`` and
    ``exp(-d**2 / (2 V))`` when ``V / b1 <= d < V / b2``, with
    ``V = nu_sq_sum``.  Below ``V / b1`` nothing is claimed and a
    ``ValueError`` is raised.
    """
    V = params.nu_sq_sum
    if d < 0 or d < V / params.b1:
        raise ValueError(f"d={d} is below the validity threshold V/b1={V / params.b1}")
    if d >= V / params.b2:
        bound = math.exp(-d / (2.0 * params.b2))
    else:
        bound = math.exp(-d * d / (2.0 * V))
    return min(1.0, bound)


def default_lambda_grid(n: int, num: int = 41) -> np.ndarray:
    """Geometric grid spanning [1/n^2, 1/(2en)]."""
    return np.geomspace(1.0 / n**2, 1.0 / (2.0 * math.e * n), num)


def _lo_exact_potential(n: int) -> np.ndarray:
    from .potential import lo_potential

    return lo_potential(n).values


def mgf_log_ratios(n: int, lambdas: Sequence[float], r: float = 0.0, route: str = "exact") -> np.ndarray:
    """``log E[exp(lam * D)] / (lam**2 n)`` for every state ``X = 1..n``.

    ``D = g(X') - g(X) + 1 + r`` is the one-step difference of the
    compensated potential, with ``g`` the discrete potential of the exact
    drift.  ``route="exact"`` uses the true potential differences;
    ``route="linearized"`` replaces them by ``-G / h(X)`` and evaluates the
    gain mgf in closed form, which dominates the exact value for ``lam > 0``.
    Rows are lambdas, columns are states.  ``lam = 0`` rows are 0.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    g = _lo_exact_potential(n)
    states = np.arange(1, n + 1)
    p = improvement_probability(n, states)
    out = np.zeros((lambdas.size, n))
    if route == "exact":
        # dg[X-1, j-1] = g(X) - g(X - j) for j <= X
        j = np.arange(1, n + 1)
        tgt = states[:, None] - j[None, :]
        valid = tgt >= 0
        dg = np.where(valid, g[states][:, None] - g[np.clip(tgt, 0, None)], 0.0)
        w = np.where(j[None, :] < states[:, None], 0.5 ** j[None, :], 0.0)
        w[states - 1, states - 1] = 0.5 ** (states - 1.0)
        for k, lam in enumerate(lambdas):
            if lam == 0:
                continue
            # log of p * sum_j w_j exp(-lam dg_j) + (1 - p), then shift by lam (1 + r)
            a = np.where(valid, -lam * dg, -np.inf)
            jumps = logsumexp(a, b=w, axis=1)
            logm = np.logaddexp(np.log(p) + jumps, np.log1p(-p)) + lam * (1.0 + r)
            out[k] = logm / (lam * lam * n)
    elif route == "linearized":
        h = exact_lo_drift(n, states)
        for k, lam in enumerate(lambdas):
            if lam == 0:
                continue
            m = np.array([gain_mgf(X, -lam / h[X - 1]) for X in states])
            logm = np.log(p * m + (1.0 - p)) + lam * (1.0 + r)
            out[k] = logm / (lam * lam * n)
    else:
        raise ValueError(f"unknown route {route!r}")
    return out


def verify_mgf_drift_bound(n: int, lambda_grid=None, r: float = 0.0, route: str = "exact") -> float:
    """Smallest ``c`` with ``log E[exp(lam D)] <= c lam^2 n`` over all states and lambdas.

    Stopped states (the optimum) contribute ``D = 0`` and never bind.
    """
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(n)
    ratios = mgf_log_ratios(n, lambda_grid, r=r, route=route)
    return float(max(ratios.max(), 0.0))


@dataclass(frozen=True)
class FitnessBracket:
    n: int
    t: int
    c: float
    lower: float
    upper: float
    raw_lower: float
    raw_upper: float
    form: str

    @property
    def confidence(self) -> float:
        return 1.0 - 1.0 / self.n**3

    @property
    def point(self) -> float:
        return _bracket_value(self.n, self.t, 0.0, self.form)

    def contains(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return (v >= self.lower) & (v <= self.upper)


def bracket_window(n: int, c_window: float = 1.0) -> tuple[float, float]:
    """Budgets for which the concentration bracket is stated."""
    lo = 10.0 * n * math.log(n)
    hi = (math.e - 1.0) * n * n / 2.0 - c_window * n**1.5 * math.sqrt(math.log(n))
    return lo, hi


def _bracket_value(n, t, eps, form):
    # signed eps: positive eps moves the printed form down and the corrected form up
    if form == "printed":
        arg = 1.0 - 2.0 * t / n**2 + eps
        sign = -1.0
    elif form == "corrected":
        arg = 1.0 + 2.0 * t / n**2 + eps
        sign = 1.0
    else:
        raise ValueError(f"unknown bracket form {form!r}")
    if arg <= 0:
        raise ValueError(f"log argument {arg} <= 0 (n={n}, t={t})")
    return sign * n * math.log(arg)


def fitness_bracket(
    n: int,
    t: int,
    c: float,
    form: str = "printed",
    c_window: float = 1.0,
    check_window: bool = True,
) -> FitnessBracket:
    """High-probability bracket for the LeadingOnes fitness after ``t`` steps.

    ``eps = c * sqrt(t ln n) / n**1.5``.  The ``"printed"`` form is
    ``[-n ln(1 - 2t/n^2 + eps), -n ln(1 - 2t/n^2 - eps)]``.  The
    ``"corrected"`` form is ``[n ln(1 + 2t/n^2 - eps), n ln(1 + 2t/n^2 + eps)]``;
    it follows from inverting the potential and matches both the drift
    ODE and simulation, while the printed form overshoots the observed
    mean by roughly half.  Both ends are clamped to ``[0, n]``.
    """
    if check_window:
        lo, hi = bracket_window(n, c_window)
        if not lo <= t <= hi:
            raise ValueError(f"t={t} outside the bracket window [{lo:.6g}, {hi:.6g}]")
    if c < 0:
        raise ValueError("c must be non-negative")
    eps = c * math.sqrt(t * math.log(n)) / n**1.5
    if form == "printed":
        raw_lower = _bracket_value(n, t, eps, form)
        raw_upper = _bracket_value(n, t, -eps, form)
    else:
        raw_lower = _bracket_value(n, t, -eps, form)
        raw_upper = _bracket_value(n, t, eps, form)
    lower = min(max(raw_lower, 0.0), n)
    upper = min(max(raw_upper, 0.0), n)
    return FitnessBracket(n, t, c, lower, upper, raw_lower, raw_upper, form)


def _deviation_for(target: float, params: TailBoundParams) -> float:
    V = params.nu_sq_sum
    d_lo = V / params.b1 if math.isfinite(params.b1) else 0.0
    if martingale_tail(d_lo, params) <= target:
        return d_lo
    # both branches are decreasing in d; invert whichever applies
    d = math.sqrt(2.0 * V * math.log(1.0 / target))
    if d < V / params.b2:
        return max(d, d_lo)
    return max(2.0 * params.b2 * math.log(1.0 / target), V / params.b2)


def calibrate_bracket_constant(n: int, t: int, c_mgf: float, r_const: float = 0.0) -> float:
    """Bracket constant ``c`` implied by an mgf constant.

    The per-step variance proxy is ``nu^2 = 2 c_mgf n`` (so that
    ``exp(c lam^2 n) = exp(lam^2 nu^2 / 2)``), and the martingale tail with
    ``b2 = 2en`` (``b1 = n^2`` for the lower tail) gives the deviation ``d``
    of the potential at probability ``1/n^3``.  A potential deviation ``d``
    moves the logarithm's argument by ``2d/n^2``; the lower-tail side also
    carries the accumulated error ``t * r_const / n``.
    """
    target = 1.0 / n**3
    V = 2.0 * c_mgf * n * t
    b2 = 2.0 * math.e * n
    d_up = _deviation_for(target, TailBoundParams(math.inf, b2, V))
    d_low = _deviation_for(target, TailBoundParams(float(n * n), b2, V)) + t * r_const / n
    d = max(d_up, d_low)
    return 2.0 * d / n**2 / (math.sqrt(t * math.log(n)) / n**1.5)
