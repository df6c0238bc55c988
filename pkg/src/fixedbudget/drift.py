"""Drift functions, their premise checks, and the direct fixed-budget bounds.

A drift function ``h`` maps a distance ``x`` to a lower bound on the
expected one-step decrease.  ``tilde(h)(x) = x - h(x)`` then bounds the
expected next state, and iterating it bounds the expected state after ``t``
steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "DriftFunction",
    "PremiseReport",
    "BoundPrediction",
    "h_onemax",
    "h_leadingones",
    "h_lo_exact",
    "constant_drift",
    "tabulated_drift",
    "exact_lo_drift",
    "check_premises",
    "tilde_derivative_at_zero",
    "tilde_orbit",
    "iterate_tilde",
    "limited_time_bound",
    "budget_sum",
    "DEFAULT_CONSTANTS",
    "resolve_constants",
    "predict_onemax_fitness",
    "predict_onemax_iterated",
    "predict_lo_fitness",
]


@dataclass(frozen=True)
class DriftFunction:
    """A drift bound ``h`` on the distance interval ``[lower, n]``.

    ``func`` must accept floats and arrays; ``derivative`` is optional.
    Calling the object checks the domain, ``func`` itself does not (finite
    differences at the boundary need that).
    """

    n: float
    func: Callable
    label: str
    derivative: Optional[Callable] = None
    lower: float = 0.0

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        tol = 1e-12 * max(1.0, self.n)
        if np.any(xa < self.lower - tol) or np.any(xa > self.n + tol):
            raise ValueError(f"{self.label}: argument outside [{self.lower}, {self.n}]")
        return self.func(x)

    def tilde(self, x):
        return x - self(x)


def h_onemax(n: int) -> DriftFunction:
    """OneMax drift at distance ``x``: one zero flips and every one stays."""
    q = 1.0 - 1.0 / n

    def h(x):
        return q ** (n - x) * x / n

    def dh(x):
        return q ** (n - x) * (1.0 / n - x / n * math.log(q))

    return DriftFunction(n, h, f"h_onemax(n={n})", dh)


def h_leadingones(n: int) -> DriftFunction:
    """LeadingOnes drift under the adjusted fitness (gain exactly 2 per improvement)."""
    q = 1.0 - 1.0 / n

    def h(x):
        return q ** (n - x) * 2.0 / n

    def dh(x):
        return -math.log(q) * q ** (n - x) * 2.0 / n

    return DriftFunction(n, h, f"h_leadingones(n={n})", dh)


def exact_lo_drift(n: int, X):
    """Exact expected decrease of the LeadingOnes distance at ``X`` (1 <= X <= n)."""
    Xa = np.asarray(X, dtype=float)
    if np.any(Xa < 1) or np.any(Xa > n):
        raise ValueError(f"X must lie in [1, {n}]")
    val = (2.0 - 2.0 ** (1.0 - Xa)) * (1.0 - 1.0 / n) ** (n - Xa) / n
    return float(val) if val.ndim == 0 else val


def h_lo_exact(n: int) -> DriftFunction:
    """:func:`exact_lo_drift` as a drift function on ``[1, n]``."""
    q = 1.0 - 1.0 / n

    def h(x):
        return (2.0 - 2.0 ** (1.0 - x)) * q ** (n - x) / n

    return DriftFunction(n, h, f"h_lo_exact(n={n})", lower=1.0)


def constant_drift(n: float, delta: float) -> DriftFunction:
    if delta <= 0:
        raise ValueError("delta must be positive")
    return DriftFunction(
        n,
        lambda x: np.full_like(np.asarray(x, dtype=float), delta) if np.ndim(x) else delta,
        f"constant({delta})",
        lambda x: 0.0,
    )


def tabulated_drift(values, label: str = "tabulated") -> DriftFunction:
    """Drift known only at the integer states ``0..len(values)-1``."""
    vals = np.asarray(values, dtype=float)

    def h(x):
        idx = np.rint(np.asarray(x, dtype=float)).astype(int)
        out = vals[idx]
        return float(out) if out.ndim == 0 else out

    return DriftFunction(len(vals) - 1, h, label)


@dataclass(frozen=True)
class PremiseReport:
    greed_admitting: bool
    convex: bool
    grid_step: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.greed_admitting and self.convex


def check_premises(h: DriftFunction, grid_step: float = 1.0, tol: float = 1e-12) -> PremiseReport:
    """Grid test of greed-admittance (``x - h(x)`` non-decreasing) and convexity."""
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    k = int(math.floor((h.n - h.lower) / grid_step + 1e-9))
    x = h.lower + grid_step * np.arange(k + 1)
    hx = np.asarray(h(x), dtype=float)
    greedy = bool(np.all(np.diff(x - hx) >= -tol))
    convex = bool(np.all(np.diff(hx, 2) >= -tol)) if hx.size >= 3 else True
    return PremiseReport(greedy, convex, grid_step, tol)


def tilde_orbit(h: DriftFunction, x0: float, t: int, clamp: bool = True) -> np.ndarray:
    """``[x0, tilde(x0), ..., tilde^t(x0)]``; values are clamped at 0 unless ``clamp=False``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    h(x0)
    f = h.func
    out = np.empty(t + 1)
    out[0] = x = float(x0)
    for s in range(1, t + 1):
        x -= float(f(x))
        if clamp and x < 0.0:
            x = 0.0
        out[s] = x
    return out


def iterate_tilde(h: DriftFunction, x0: float, t: int, clamp: bool = True) -> float:
    """t-fold composition of ``x -> x - h(x)`` started at ``x0``."""
    return float(tilde_orbit(h, x0, t, clamp)[-1])


def tilde_derivative_at_zero(h: DriftFunction, check_tol: float = 1e-6) -> float:
    """``1 - h'(0)``, analytic when available, cross-checked by a central difference."""
    step = 1e-6 * h.n
    numeric = 1.0 - (h.func(step) - h.func(-step)) / (2.0 * step)
    if h.derivative is None:
        return float(numeric)
    analytic = 1.0 - float(h.derivative(0.0))
    if abs(analytic - numeric) > check_tol:
        raise ValueError(f"analytic and numeric slopes disagree: {analytic} vs {numeric}")
    return analytic


def limited_time_bound(h: DriftFunction, x0: float, t: int, p_hit: float) -> float:
    """Bound on the expected distance when drift only holds before the optimum.

    ``tilde^t(x0) - tilde(0) / tilde'(0) * p_hit``, where ``p_hit`` bounds
    the probability that the optimum was reached within ``t`` steps.
    """
    if not 0.0 <= p_hit <= 1.0:
        raise ValueError("p_hit must be a probability")
    slope = tilde_derivative_at_zero(h)
    if not 0.0 < slope <= 1.0:
        raise ValueError(f"tilde'(0) = {slope} is not in (0, 1]")
    return iterate_tilde(h, x0, t) - float(h.tilde(0.0)) / slope * p_hit


def budget_sum(h: DriftFunction, m: int, n: int) -> float:
    """Sum of ``1/h(i)`` for ``i = m..n-1``: enough steps to bring ``n`` down to ``m``."""
    if not 0 <= m < n:
        raise ValueError("need 0 <= m < n")
    hv = np.asarray(h(np.arange(m, n, dtype=float)), dtype=float)
    if np.any(hv <= 0):
        bad = m + int(np.flatnonzero(hv <= 0)[0])
        raise ValueError(f"h({bad}) <= 0: the budget is unbounded")
    return math.fsum(1.0 / hv)


@dataclass(frozen=True)
class BoundPrediction:
    """A predicted lower bound (or bracket) on the expected fitness after ``t`` steps."""

    theorem_id: str
    t: int
    value: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value is None and (self.lower is None or self.upper is None):
            raise ValueError("need a point value or a full bracket")
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise ValueError("bracket lower end exceeds upper end")

    @property
    def is_bracket(self) -> bool:
        return self.value is None


# Stand-ins for the O(1) and o(1) terms; callers override per key.
DEFAULT_CONSTANTS = {
    "onemax_abs_slack": 0.0,
    "onemax_rel_slack": 0.02,
    "lo_slack": 2.0,
    "lo_rel_slack": 0.1,
}


def resolve_constants(overrides=None):
    """Default slack constants updated with ``overrides``."""
    c = dict(DEFAULT_CONSTANTS)
    if overrides:
        c.update(overrides)
    return c


def predict_onemax_fitness(n: int, t: int, bound: str = "sqrt_e", constants=None) -> BoundPrediction:
    """Lower bounds on the expected OneMax value after ``t`` iterations.

    ``"sqrt_e"``: ``n/2 + t/(2 sqrt(e)) - abs_slack - rel_slack * t``.
    ``"exp"``: ``n (1 - exp(-t/(en)) / 2)``, which needs no slack.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    c = resolve_constants(constants)
    if bound == "sqrt_e":
        used = {k: c[k] for k in ("onemax_abs_slack", "onemax_rel_slack")}
        v = n / 2 + t / (2 * math.sqrt(math.e)) - used["onemax_abs_slack"] - used["onemax_rel_slack"] * t
        return BoundPrediction("thm35_sqrt_e", t, v, constants=used)
    if bound == "exp":
        return BoundPrediction("thm35_exp", t, n * (1 - math.exp(-t / (math.e * n)) / 2))
    raise ValueError(f"unknown OneMax bound {bound!r}")


def predict_onemax_iterated(n: int, t: int) -> BoundPrediction:
    """``n - tilde^t(n/2)`` for the OneMax drift: the iterated-map fitness bound."""
    return BoundPrediction("thm32_iterated", t, n - iterate_tilde(h_onemax(n), n / 2, t))


def lo_log_window(n: int) -> float:
    return (math.e - 1) * n * n / 2 - n**1.5


def predict_lo_fitness(n: int, t: int, bound: str = "log", constants=None) -> BoundPrediction:
    """Lower bounds on the expected LeadingOnes value after ``t`` iterations.

    ``"linear"``: ``2t/n - lo_slack``; ``"linear_rel"``: ``2t/n (1 - lo_rel_slack)``;
    ``"log"``: ``n ln(1 + 2t/n^2) - lo_slack``, only for
    ``t <= (e-1) n^2 / 2 - n^1.5``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    c = resolve_constants(constants)
    if bound == "linear":
        return BoundPrediction("thm36_linear", t, 2 * t / n - c["lo_slack"], constants={"lo_slack": c["lo_slack"]})
    if bound == "linear_rel":
        r = c["lo_rel_slack"]
        return BoundPrediction("thm36_linear_rel", t, 2 * t / n * (1 - r), constants={"lo_rel_slack": r})
    if bound == "log":
        if t > lo_log_window(n):
            raise ValueError(f"t={t} beyond (e-1)n^2/2 - n^1.5 = {lo_log_window(n):.6g}")
        return BoundPrediction(
            "thm36_log", t, n * math.log1p(2 * t / n**2) - c["lo_slack"], constants={"lo_slack": c["lo_slack"]}
        )
    raise ValueError(f"unknown LeadingOnes bound {bound!r}")
