"""Variable-drift potentials and the fixed-budget bounds derived from them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .concentration import djwz_tail, expected_opt_time_lo, gain_pmf, improvement_probability
from .drift import BoundPrediction, DriftFunction, h_lo_exact, resolve_constants

__all__ = [
    "PotentialTable",
    "SurvivalCurve",
    "build_potential",
    "lo_potential",
    "expected_g_upper_bound",
    "additive_bound",
    "predict_lo_additive",
    "lo_additive_window",
    "invert_potential",
    "g_closed_form_bounds",
    "survival_from_djwz",
    "g_drift_lo",
    "g_drift_excess_constant",
]

SIMPSON_PANELS = 10


@dataclass(frozen=True)
class PotentialTable:
    """Potential ``g`` tabulated on the integer states ``0..n``."""

    n: int
    xmin: float
    values: np.ndarray
    source: str

    def __post_init__(self):
        v = self.values
        if v.shape != (self.n + 1,) or v[0] != 0.0:
            raise ValueError("potential tables hold g(0..n) with g(0) = 0")
        start = max(1, math.ceil(self.xmin))
        if np.any(np.diff(v[start:]) <= 0) or (start <= self.n and v[start] <= 0):
            raise ValueError("potential must be strictly increasing from xmin on")

    def __call__(self, a):
        return self.values[a]


@dataclass(frozen=True)
class SurvivalCurve:
    """``probs[s] = P(s < T)`` for ``s = 0..t-1``, with its provenance."""

    probs: np.ndarray
    provenance: str

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("survival probabilities must lie in [0, 1]")
        if np.any(np.diff(p) > 1e-12):
            raise ValueError("survival curve must be non-increasing")
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size

    def total(self) -> float:
        return math.fsum(self.probs)


def _simpson(f, a: float, b: float, panels: int) -> float:
    if b <= a:
        return 0.0
    k = 2 * panels
    x = np.linspace(a, b, k + 1)
    y = f(x)
    w = np.ones(k + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float((b - a) / (3 * k) * np.dot(w, y))


def build_potential(h: DriftFunction, xmin: float, n: int, mode: str = "integral") -> PotentialTable:
    """Tabulate the potential ``g`` of a non-decreasing drift ``h``.

    ``"integral"``: ``g(x) = xmin/h(xmin) + int_xmin^x dz/h(z)`` for
    ``x >= xmin`` and 0 below, by composite Simpson with
    ``SIMPSON_PANELS`` double-panels per unit interval.
    ``"discrete-sum"``: ``g(a) = sum_{i=1}^a 1/h(i)`` (requires ``xmin = 1``).
    """
    if xmin <= 0:
        raise ValueError("xmin must be positive")
    start = math.ceil(xmin)
    grid = np.arange(start, n + 1, dtype=float)
    hv = np.asarray(h(grid), dtype=float)
    if np.any(np.diff(hv) < 0):
        raise ValueError(f"{h.label} is not non-decreasing on [{xmin}, {n}]")
    if np.any(hv <= 0) or float(h(xmin)) <= 0:
        raise ValueError(f"{h.label} must be positive on [{xmin}, {n}]")

    values = np.zeros(n + 1)
    if mode == "discrete-sum":
        if xmin != 1:
            raise ValueError("discrete-sum potentials start at xmin = 1")
        values[1:] = np.cumsum(1.0 / hv)
    elif mode == "integral":
        inv = lambda z: 1.0 / h.func(z)  # noqa: E731
        acc = xmin / float(h(xmin)) + _simpson(inv, xmin, start, SIMPSON_PANELS)
        if start <= n:
            values[start] = acc
        for a in range(start + 1, n + 1):
            acc += _simpson(inv, a - 1.0, float(a), SIMPSON_PANELS)
            values[a] = acc
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return PotentialTable(n, float(xmin), values, mode)


@lru_cache(maxsize=32)
def lo_potential(n: int) -> PotentialTable:
    """Discrete potential of the exact LeadingOnes drift."""
    return build_potential(h_lo_exact(n), 1, n, mode="discrete-sum")


def expected_g_upper_bound(g: PotentialTable, x0: int, survival: SurvivalCurve) -> float:
    """``g(x0) - sum_s P(s < T)``: bound on the expected potential after ``len(survival)`` steps."""
    return float(g(x0)) - survival.total()


def additive_bound(x0: float, delta: float, survival: SurvivalCurve) -> float:
    """``x0 - delta * sum_s P(s < T)`` for constant drift ``delta``."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return x0 - delta * survival.total()


def lo_additive_window(n: int) -> float:
    return (math.e - 1) * n * n / 2 - n**1.5 * math.log(n)


def predict_lo_additive(n: int, t: int, constants=None) -> BoundPrediction:
    """``2t/(en) - lo_slack``: constant-drift lower bound on the LeadingOnes value."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t > lo_additive_window(n):
        raise ValueError(f"t={t} beyond (e-1)n^2/2 - n^1.5 ln n = {lo_additive_window(n):.6g}")
    c = resolve_constants(constants)
    return BoundPrediction(
        "thm43_additive", t, 2 * t / (math.e * n) - c["lo_slack"], constants={"lo_slack": c["lo_slack"]}
    )


def invert_potential(g: PotentialTable, y: float) -> int:
    """Smallest state ``a`` with ``g(a) >= y``."""
    if not 0 <= y <= g.values[-1]:
        raise ValueError(f"y={y} outside [0, g(n)={g.values[-1]}]")
    return int(np.searchsorted(g.values, y, side="left"))


def g_closed_form_bounds(n: int, a: int) -> tuple[float, float]:
    """Closed-form sandwich for the discrete LeadingOnes potential at ``a``.

    upper ``(n/2)(n-1)(1-1/n)^-n (1-(1-1/n)^a)``,
    lower ``(e n^2 / 2)(1-(1-1/n)^a) - 3 n log2 n``.  The upper end equals
    the potential of the adjusted drift ``(1-1/n)^(n-x) 2/n`` exactly.
    The lower end can be negative; it is returned raw.
    """
    if not 0 <= a <= n:
        raise ValueError("need 0 <= a <= n")
    q = 1.0 - 1.0 / n
    frac = -math.expm1(a * math.log1p(-1.0 / n))
    upper = n / 2 * (n - 1) * q**-n * frac
    lower = math.e * n * n / 2 * frac - 3 * n * math.log2(n)
    if a > 0 and lower > upper:
        raise ValueError(f"n={n} too small for the closed-form sandwich")
    return lower, upper


def survival_from_djwz(n: int, t: int) -> SurvivalCurve:
    """Analytic lower bound on ``P(s < T)`` for ``s = 0..t-1``.

    ``1 - djwz_tail(n, d)`` with ``d = E[T] - s`` clamped to ``2 n^2`` and
    floored at 0 once ``s`` reaches ``E[T]``.
    """
    ET = expected_opt_time_lo(n)
    cap = 2.0 * n * n
    probs = np.zeros(t)
    for s in range(t):
        d = ET - s
        if d <= 0:
            break
        probs[s] = 1.0 - djwz_tail(n, min(d, cap))
    return SurvivalCurve(probs, "djwz-lower-bound")


def g_drift_lo(n: int, g: PotentialTable | None = None) -> np.ndarray:
    """Exact expected one-step decrease of ``g`` at every LeadingOnes distance ``1..n``."""
    if g is None:
        g = lo_potential(n)
    out = np.empty(n)
    for X in range(1, n + 1):
        pmf = gain_pmf(X).as_array()
        drops = g.values[X] - g.values[X - np.arange(1, X + 1)]
        out[X - 1] = improvement_probability(n, X) * float(np.dot(pmf, drops))
    return out


def g_drift_excess_constant(n: int) -> float:
    """``max n (drift_g(X) - 1)`` over distances ``X >= log2 n``."""
    drift = g_drift_lo(n)
    start = math.ceil(math.log2(n))
    return float(np.max(n * (drift[start - 1 :] - 1.0)))
