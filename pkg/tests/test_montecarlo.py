import math

import numpy as np
import pytest

from fixedbudget.bench import RngStream, leading_ones, run_trial
from fixedbudget.concentration import expected_opt_time_lo
from fixedbudget.drift import BoundPrediction
from fixedbudget.montecarlo import (
    QUANTILES,
    HittingTimeSample,
    chi_square_two_sample,
    compare_bounds,
    empirical_survival,
    fast_lo_trial,
    ks_two_sample,
    run_ensemble,
)
from fixedbudget.potential import survival_from_djwz
from oracles import lo_fitness_moments


def _same(a, b):
    return (np.array_equal(a.fitness, b.fitness) and np.array_equal(a.hitting_times, b.hitting_times)
            and np.array_equal(a.mean, b.mean) and np.array_equal(a.variance, b.variance)
            and np.array_equal(a.quantiles, b.quantiles))


def test_single_trial_ensemble_equals_trajectory():
    st = run_ensemble("leadingones", 20, 1, [10, 100], master_seed=3, budget=100)
    tr = run_trial(20, leading_ones, 100, [10, 100], RngStream(3, 0))
    assert np.array_equal(st.fitness[0], tr.fitness_at)
    assert np.array_equal(st.mean, tr.fitness_at.astype(float))
    assert np.all(st.variance == 0)
    assert np.all(np.isnan(st.standard_error()))


@pytest.mark.parametrize("problem, sim", [("onemax", "bit"), ("leadingones", "bit"), ("leadingones", "fast")])
def test_schedule_independence(problem, sim):
    args = (problem, 24, 60, [0, 5, 50, 400], 2024)
    runs = [run_ensemble(*args, budget=400, simulator=sim, workers=w) for w in (1, 2, 8)]
    assert _same(runs[0], runs[1]) and _same(runs[0], runs[2])


def test_n1_onemax_mean_is_one():
    st = run_ensemble("onemax", 1, 50, [1], master_seed=0, budget=1)
    assert st.mean[0] == 1.0


def test_quantiles_monotone_and_stats():
    st = run_ensemble("onemax", 50, 300, [0, 10, 100, 1000], 8, budget=1000)
    assert st.quantiles.shape == (4, len(QUANTILES))
    assert np.all(np.diff(st.quantiles, axis=1) >= 0)
    assert np.all(np.diff(st.mean) >= 0)
    np.testing.assert_allclose(st.variance, st.fitness.var(axis=0, ddof=1))
    assert st.survival.provenance == "empirical" and len(st.survival) == 1000


def test_validation():
    with pytest.raises(ValueError):
        run_ensemble("onemax", 10, 0, [1], 1)
    with pytest.raises(ValueError):
        run_ensemble("twomax", 10, 5, [1], 1)
    with pytest.raises(ValueError):
        run_ensemble("onemax", 10, 5, [1], 1, simulator="fast")
    with pytest.raises(ValueError):
        run_ensemble("onemax", 10, 5, [1], 1, simulator="warp")


def test_brackets_counted():
    st = run_ensemble("leadingones", 30, 200, [100, 500], 5, budget=500, brackets=[(0, 30), None])
    assert st.inside_bracket.tolist() == [200, -1]


def test_fast_trial_absorbs_and_reaches_optimum():
    tr = fast_lo_trial(10, None, list(range(0, 3000, 10)), RngStream(1))
    T = tr.hitting_time
    assert T is not None
    after = tr.fitness_at[np.asarray(tr.checkpoints) >= T]
    assert np.all(after == 10)
    assert np.all(np.diff(tr.fitness_at) >= 0)


def test_fast_first_jump_mean_from_level_five():
    # trials starting at LO = 0 with n = 5 leave distance 5; the first change of V is the jump
    n = 5
    cps = list(range(0, 400))
    jumps = []
    for i in range(30000):
        v = fast_lo_trial(n, None, cps, RngStream(17, i)).fitness_at
        if v[0] != 0:
            continue
        moved = np.flatnonzero(v > 0)
        assert moved.size
        jumps.append(v[moved[0]])
    jumps = np.array(jumps)
    se = jumps.std(ddof=1) / math.sqrt(jumps.size)
    assert abs(jumps.mean() - 1.9375) < 3 * se


@pytest.mark.parametrize("n, t", [(20, 200), (50, 1500)])
def test_fast_matches_exact_chain(n, t):
    m, sd = lo_fitness_moments(n, t)
    st = run_ensemble("leadingones", n, 20000, [t], 31, budget=t, simulator="fast")
    assert abs(st.mean[0] - m) < 3.5 * sd / math.sqrt(20000)


def test_bit_level_matches_exact_chain():
    n, t = 16, 64
    m, sd = lo_fitness_moments(n, t)
    st = run_ensemble("leadingones", n, 20000, [t], 32, budget=t)
    assert abs(st.mean[0] - m) < 3.5 * sd / math.sqrt(20000)


def test_hitting_time_mean_n50():
    st = run_ensemble("leadingones", 50, 20000, [], 50, simulator="fast")
    h = st.hitting
    assert h.censored_count == 0
    assert abs(h.mean() - expected_opt_time_lo(50)) <= 3 * h.standard_error()


def test_empirical_survival_examples():
    st = run_ensemble("leadingones", 30, 2000, [], 4, simulator="fast")
    sc = empirical_survival(st)
    assert sc.probs[0] == pytest.approx(1.0, abs=0.002)
    assert sc.probs[-1] == 0.0 and len(sc) == st.hitting_times.max() + 1
    assert np.all(np.diff(sc.probs) <= 0)
    ht = st.hitting_times
    for s in (0, 100, 500, 900):
        assert sc.probs[s] == pytest.approx(np.mean(ht > s))


def test_empirical_survival_censored():
    st = run_ensemble("leadingones", 100, 300, [500], 4, budget=500)
    sc = empirical_survival(st)
    assert len(sc) == 500 and np.all(sc.probs == 1.0)
    with pytest.raises(ValueError):
        empirical_survival(st, 600)
    assert st.hitting.censored_count == 300


def test_empirical_survival_dominates_djwz():
    n, t = 100, 8000
    st = run_ensemble("leadingones", n, 5000, [t], 12, budget=t, simulator="fast")
    emp = st.survival.probs[:t]
    djwz = survival_from_djwz(n, t).probs
    se = np.sqrt(emp * (1 - emp) / st.trials)
    assert np.all(emp + 3 * se + 1e-12 >= djwz)


def test_hitting_time_sample():
    h = HittingTimeSample(np.array([1, 2, 3, 4]), 2)
    assert h.mean() == 2.5 and h.standard_error() == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)


def test_compare_bounds_behaviour():
    st = run_ensemble("onemax", 40, 500, [20, 100], 9, budget=100)
    se = st.standard_error()
    zero = BoundPrediction("zero", 20, 0.0)
    high = BoundPrediction("high", 100, float(st.mean[1] + 10 * math.sqrt(st.variance[1])))
    brk = BoundPrediction("brk", 100, lower=0.0, upper=40.0)
    rep = compare_bounds(st, [zero, high, brk])
    assert [r.status for r in rep.rows] == ["PASS", "FAIL", "PASS"]
    assert rep.rows[0].standard_error == pytest.approx(se[0])
    assert rep.rows[2].inside_fraction == 1.0
    assert not rep.all_pass and rep.master_seed == 9
    assert len(list(rep.lines())) == 3
    with pytest.raises(ValueError):
        compare_bounds(st, [BoundPrediction("x", 55, 0.0)])
    narrow = BoundPrediction("narrow", 100, lower=st.mean[1] + 1, upper=40.0)
    assert compare_bounds(st, [narrow]).rows[0].status == "FAIL"


def test_compare_bounds_strictness():
    st = run_ensemble("onemax", 40, 500, [100], 9, budget=100)
    m, se = st.mean[0], st.standard_error()[0]
    p = BoundPrediction("edge", 100, float(m))
    assert compare_bounds(st, [p], strict=True).rows[0].status == "FAIL"
    assert compare_bounds(st, [p], strict=False).rows[0].status == "PASS"
    assert compare_bounds(st, [BoundPrediction("e", 100, float(m - 3 * se))]).rows[0].status == "PASS"


def test_compare_bounds_insufficient():
    st = run_ensemble("onemax", 10, 1, [5], 1, budget=5)
    rep = compare_bounds(st, [BoundPrediction("z", 5, 0.0)])
    assert rep.rows[0].status == "INSUFFICIENT" and not rep.all_pass


def test_two_sample_tests():
    rng = np.random.default_rng(0)
    a = rng.poisson(5, 4000)
    b = rng.poisson(5, 4000)
    c = rng.poisson(6, 4000)
    assert ks_two_sample(a, b)[1] > 0.01 and ks_two_sample(a, c)[1] < 1e-6
    stat, p, dof = chi_square_two_sample(a, b)
    assert p > 0.01 and dof > 3
    assert chi_square_two_sample(a, c)[1] < 1e-6
    assert chi_square_two_sample(np.zeros(10, int), np.zeros(10, int)) == (0.0, 1.0, 0)
