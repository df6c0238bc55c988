"""Fixed-budget drift bounds for the (1+1) EA on OneMax and LeadingOnes.

Modules
-------
bench          benchmark functions, the EA step and trial runner
drift          drift functions, iterated drift maps and direct bounds
potential      variable-drift potentials, survival curves, additive bounds
concentration  gain law, tail bounds, mgf calibration, fitness brackets
montecarlo     seeded ensembles and bound comparison
cli            command-line entry point (``fixedbudget``)
"""
from .bench import (
    EAState,
    RngStream,
    Trajectory,
    adjusted_lo,
    as_bitstring,
    ea_step,
    leading_ones,
    one_max,
    run_trial,
)
from .concentration import (
    FitnessBracket,
    GainPmf,
    TailBoundParams,
    calibrate_bracket_constant,
    djwz_tail,
    expected_opt_time_lo,
    fitness_bracket,
    gain_mgf,
    gain_pmf,
    improvement_probability,
    martingale_tail,
    verify_mgf_drift_bound,
)
from .drift import (
    BoundPrediction,
    DriftFunction,
    PremiseReport,
    budget_sum,
    check_premises,
    exact_lo_drift,
    h_leadingones,
    h_onemax,
    iterate_tilde,
    limited_time_bound,
    predict_lo_fitness,
    predict_onemax_fitness,
)
from .montecarlo import (
    EnsembleStats,
    compare_bounds,
    empirical_survival,
    fast_lo_trial,
    run_ensemble,
)
from .potential import (
    PotentialTable,
    SurvivalCurve,
    additive_bound,
    build_potential,
    expected_g_upper_bound,
    g_closed_form_bounds,
    invert_potential,
    predict_lo_additive,
    survival_from_djwz,
)

__version__ = "0.1.0"
