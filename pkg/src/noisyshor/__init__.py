"""Desk-scale lab for Shor's discrete-log algorithm under noisy QFT rotations."""

from .noise import NoiseConfig, NoiseRealization, derive_seed, noisy_rotation_angle, sample_noise, zero_noise
from .numtheory import (
    DlogInstance,
    PrimeClassification,
    additive_order,
    centered_residue,
    classify_prime,
    dlog_bruteforce,
    dlog_bsgs,
    find_generator,
    is_prime,
    largest_prime_factor,
    make_instance,
    multiplicative_order,
    random_prime,
)
from .peaks import (
    PeakSet,
    PeakSetParams,
    binary_entropy,
    build_peak_set,
    condition_check,
    deviation,
    entropy_count_check,
    j_set,
    s_v,
    s_v_prime,
    sym_diff_card,
    zeta_bound,
)
from .qft import (
    MeasurementDistribution,
    PairEvaluator,
    closed_form_distribution,
    exact_probability,
    noisy_phase,
    noisy_probability,
    statevector_run,
    u_k,
)
from .lemma_mc import (
    LemmaInstance,
    extract_lemma_instance,
    lemma_bound,
    make_lemma_instance,
    mc_mean,
    synthetic_instance,
)
from .harness import (
    ExperimentConfig,
    ResultRecord,
    density_scan,
    emit_csv,
    emit_summary,
    estimate_success_mass,
    order_stats,
    records_from_csv,
    run_sweep,
)

__version__ = "0.1.0"
