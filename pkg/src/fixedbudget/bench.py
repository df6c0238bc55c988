"""Benchmark functions and the (1+1) EA.

Bit strings are plain ``numpy.uint8`` arrays.  The hot loops for OneMax and
LeadingOnes are compiled with numba and draw from a per-trial
``numpy.random.Generator``, so a trial is fully determined by its
``(master_seed, trial_index)`` pair.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numba
import numpy as np

__all__ = [
    "as_bitstring",
    "one_max",
    "leading_ones",
    "adjusted_lo",
    "EAState",
    "RngStream",
    "Trajectory",
    "initial_state",
    "ea_step",
    "run_trial",
]

FitnessFn = Callable[[np.ndarray], int]


def as_bitstring(bits) -> np.ndarray:
    """Validate ``bits`` and return it as a 1-d uint8 array."""
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    x = np.asarray(bits)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("a bit string must be a non-empty 1-d sequence")
    if not np.isin(x, (0, 1)).all():
        raise ValueError("bit strings may only contain 0 and 1")
    return x.astype(np.uint8, copy=False)


def one_max(x) -> int:
    """Number of ones in ``x``."""
    return int(np.count_nonzero(as_bitstring(x)))


def leading_ones(x) -> int:
    """Length of the longest all-ones prefix of ``x``."""
    x = as_bitstring(x)
    zeros = np.flatnonzero(x == 0)
    return int(zeros[0]) if zeros.size else int(x.size)


def adjusted_lo(x) -> int:
    """LeadingOnes with the all-ones string moved up to ``n + 1``.

    With this adjustment the expected gain of an improving step is exactly 2
    at every non-optimal level.  Used for drift predictions only; the EA
    itself always selects on :func:`leading_ones`.
    """
    x = as_bitstring(x)
    lo = leading_ones(x)
    return lo + 1 if lo == x.size else lo


@dataclass(frozen=True)
class EAState:
    x: np.ndarray
    fitness: int
    iteration: int = 0

    @property
    def n(self) -> int:
        return int(self.x.size)


@dataclass
class RngStream:
    """Random stream owned by one trial.

    The generator is PCG64 seeded through ``SeedSequence(master_seed,
    spawn_key=(trial_index,))``, which hashes both numbers into the full
    128-bit state.  Equal pairs give equal streams in any process and in
    any execution order.
    """

    master_seed: int
    trial_index: int = 0
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.trial_index < 0:
            raise ValueError("trial_index must be non-negative")
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.trial_index,))
        self.generator = np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class Trajectory:
    """Fitness of one run at the requested checkpoints.

    ``hitting_time`` is the first iteration at which the optimum was held
    (0 if the initial string was already optimal) or ``None`` when the run
    stopped at ``budget`` without reaching it.
    """

    checkpoints: np.ndarray
    fitness_at: np.ndarray
    hitting_time: Optional[int]
    budget: Optional[int]

    @property
    def censored(self) -> bool:
        return self.hitting_time is None


def initial_state(n: int, f: FitnessFn, rng: RngStream) -> EAState:
    x = rng.generator.integers(0, 2, size=n, dtype=np.uint8)
    return EAState(x, int(f(x)), 0)


def _flip_positions(gen: np.random.Generator, n: int) -> np.ndarray:
    # binomial count, then a uniform subset of that size: same law as
    # flipping each bit independently with probability 1/n
    k = gen.binomial(n, 1.0 / n)
    if k == 0:
        return np.empty(0, dtype=np.int64)
    return gen.choice(n, size=k, replace=False)


def ea_step(state: EAState, rng: RngStream, f: FitnessFn) -> EAState:
    """One iteration of the (1+1) EA: mutate, evaluate, keep if not worse."""
    pos = _flip_positions(rng.generator, state.n)
    if pos.size == 0:
        return EAState(state.x, state.fitness, state.iteration + 1)
    y = state.x.copy()
    y[pos] ^= 1
    fy = int(f(y))
    if fy >= state.fitness:
        return EAState(y, fy, state.iteration + 1)
    return EAState(state.x, state.fitness, state.iteration + 1)


# --- compiled kernels -----------------------------------------------------

_ONEMAX = 0
_LEADINGONES = 1


@numba.njit(cache=True)
def _draw_positions(gen, n, k, out):
    # rejection keeps the k positions distinct; k is almost always tiny
    i = 0
    while i < k:
        p = gen.integers(0, n)
        dup = False
        for j in range(i):
            if out[j] == p:
                dup = True
                break
        if not dup:
            out[i] = p
            i += 1


@numba.njit(cache=True)
def _lo_of(x, start):
    i = start
    n = x.shape[0]
    while i < n and x[i] == 1:
        i += 1
    return i


@numba.njit(cache=True)
def _ea_kernel(gen, x, problem, budget, checkpoints, fit_out):
    """Run the EA in place on ``x``; returns the hitting time or -1.

    ``budget < 0`` means run until the optimum.  ``fit_out[i]`` receives the
    fitness after ``checkpoints[i]`` iterations.
    """
    n = x.shape[0]
    pn = 1.0 / n
    pos = np.empty(n, dtype=np.int64)
    if problem == _ONEMAX:
        fit = 0
        for i in range(n):
            fit += x[i]
    else:
        fit = _lo_of(x, 0)
    ncp = checkpoints.shape[0]
    ci = 0
    it = 0
    hit = -1
    if fit == n:
        hit = 0
    while True:
        while ci < ncp and checkpoints[ci] <= it:
            fit_out[ci] = fit
            ci += 1
        if hit >= 0:
            # absorbed: later checkpoints all see the optimum
            while ci < ncp:
                fit_out[ci] = fit
                ci += 1
            break
        if budget >= 0 and it >= budget:
            break
        it += 1
        k = gen.binomial(n, pn)
        if k == 0:
            continue
        _draw_positions(gen, n, k, pos)
        if problem == _ONEMAX:
            delta = 0
            for j in range(k):
                delta += 1 - 2 * x[pos[j]]
            if delta >= 0:
                for j in range(k):
                    x[pos[j]] ^= 1
                fit += delta
        else:
            broken = False
            for j in range(k):
                if pos[j] < fit:
                    broken = True
                    break
            if not broken:
                grow = False
                for j in range(k):
                    x[pos[j]] ^= 1
                    if pos[j] == fit:
                        grow = True
                if grow:
                    fit = _lo_of(x, fit)
        if fit == n:
            hit = it
    return hit


_KERNEL_PROBLEMS = {one_max: _ONEMAX, leading_ones: _LEADINGONES}


def _checkpoint_array(checkpoints: Sequence[int], budget: Optional[int]) -> np.ndarray:
    cp = np.asarray(list(checkpoints), dtype=np.int64)
    if cp.ndim != 1:
        raise ValueError("checkpoints must be a flat list of budgets")
    if cp.size and (np.any(np.diff(cp) < 0) or cp[0] < 0):
        raise ValueError("checkpoints must be sorted and non-negative")
    if budget is not None and cp.size and cp[-1] > budget:
        raise ValueError(f"checkpoint {cp[-1]} exceeds budget {budget}")
    return cp


def run_trial(
    n: int,
    f: FitnessFn,
    budget: Optional[int],
    checkpoints: Sequence[int],
    rng: RngStream,
) -> Trajectory:
    """Run one (1+1) EA trial from a uniform random start.

    ``budget=None`` runs until the optimum.  ``one_max`` and ``leading_ones``
    go through the compiled kernel; any other fitness function uses
    :func:`ea_step`, which is slow but generic.  The optimum of a generic
    ``f`` is taken to be ``n``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if budget is not None and budget < 0:
        raise ValueError("budget must be non-negative")
    cp = _checkpoint_array(checkpoints, budget)
    code = _KERNEL_PROBLEMS.get(f)
    if code is not None:
        x = rng.generator.integers(0, 2, size=n, dtype=np.uint8)
        out = np.zeros(cp.size, dtype=np.int64)
        hit = _ea_kernel(rng.generator, x, code, -1 if budget is None else budget, cp, out)
        return Trajectory(cp, out, None if hit < 0 else int(hit), budget)

    state = initial_state(n, f, rng)
    out = np.zeros(cp.size, dtype=np.int64)
    hit = 0 if state.fitness == n else None
    ci = 0
    while True:
        while ci < cp.size and cp[ci] <= state.iteration:
            out[ci] = state.fitness
            ci += 1
        if hit is not None:
            out[ci:] = state.fitness
            break
        if budget is not None and state.iteration >= budget:
            break
        state = ea_step(state, rng, f)
        if state.fitness == n:
            hit = state.iteration
    return Trajectory(cp, out, hit, budget)
