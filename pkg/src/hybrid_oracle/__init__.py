"""Noisy classical and hybrid quantum-classical Boolean oracles."""

__version__ = "0.1.0"

from .oracle import (
    BudgetExceeded,
    OracleSpec,
    activated_array,
    activated_gates,
    activated_indices,
    hamming_weight,
    moebius_transform,
    truth_table,
    truth_value,
    word_from_bits,
)
from .noise import (
    NoiseConfig,
    Stream,
    draw_chis,
    draw_etas,
    draw_gates,
    draw_phase_flips,
    draw_signs,
    error_unitaries,
    error_unitary,
    stream_rng,
)
from .engines import (
    CapExceeded,
    NormDrift,
    QubitState,
    TrialEstimate,
    characteristic_constant,
    classical_model,
    classical_success_exact,
    estimate_success,
    hybrid_closed_form_w1,
    hybrid_closed_form_w2,
    hybrid_success_angle,
    hybrid_success_exact,
    hybrid_success_marginal,
    sample_query,
)
from .curve import (
    CurveFit,
    CurvePoint,
    InsufficientPoints,
    advantage_ratio,
    fit_characteristic,
    sweep,
    sweep_until_decayed,
    usable_length,
)
from .pac import (
    DegenerateOracle,
    HypothesisClass,
    NonConvergent,
    PacBound,
    PacParams,
    a_factor,
    a_factor_series,
    average_success,
    error_rate,
    pac_bound,
    pac_learn,
    sample_bound_noiseless,
    sample_bound_noisy,
    validate_learner,
)
