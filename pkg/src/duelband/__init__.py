"""Dueling-bandit simulation and bound verification.

The package splits into a few layers, re-exported flat here:

* ``preference``: preference matrices, their structural assumptions, and
  tournament/subset combinatorics.
* ``env``: the duel environment that samples outcomes and prices regret.
* ``posterior``: exact Beta/binomial tail oracles and the lemma sweeps.
* ``bounds``: finite-time constants and regret envelopes.
* ``rucb``: the algorithm itself plus the random-pairing baseline, run
  traces, and the confidence-coverage audit.
* ``harness``: config-driven experiment batches with deterministic outputs.
"""

from .errors import (
    AlphaNotGreaterThanOneError,
    AlphaTooSmallError,
    ConfigError,
    DiagonalViolationError,
    DomainError,
    DuelbandError,
    EntryOutOfRangeError,
    IndexOutOfRangeError,
    InvalidGapRangeError,
    NoCondorcetWinnerError,
    NonSquareError,
    PairMismatchError,
    SkewViolationError,
    SubsetTooLargeError,
    VerificationFailure,
    ZeroGapError,
)
from .preference import (
    AssumptionReport,
    GapVector,
    PreferenceMatrix,
    analyze_assumptions,
    beat_relation,
    borda_winner,
    condorcet_subset_count,
    condorcet_subset_probability,
    condorcet_winner,
    gaps,
    generate_cycle,
    generate_planted,
    load_matrix,
    matrix_sha256,
    save_matrix,
    total_ordering_probability_mc,
    validate,
)
from .env import DuelEnv, DuelOutcome, step_regret
from .posterior import (
    VerificationReport,
    beta_cdf,
    beta_tail,
    binomial_mix_tail,
    marginalized_tail,
    verify_beta_estimate,
    verify_envelope,
    verify_tail_shrinkage,
)
from .bounds import (
    BoundParams,
    c_delta,
    c_delta_log,
    c_delta_mean,
    d_matrix,
    expected_regret_bound,
    gaps_from_deltas,
    high_prob_regret_curve,
    kl_bernoulli,
)
from .rucb import (
    CheckpointLog,
    CoverageAudit,
    OptimisticMatrix,
    RucbState,
    RunTrace,
    StepDecision,
    StepLog,
    best_arm,
    log_checkpoints,
    optimistic_matrix,
    random_pairing_run,
    run,
    save_trace,
    select_pair,
    update,
)
from .harness import (
    AggregateResult,
    ExperimentConfig,
    aggregate,
    collect_runs,
    config_from_dict,
    emit_plot_data,
    load_config,
    resolve_matrix,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateResult",
    "AlphaNotGreaterThanOneError",
    "AlphaTooSmallError",
    "AssumptionReport",
    "BoundParams",
    "CheckpointLog",
    "ConfigError",
    "CoverageAudit",
    "DiagonalViolationError",
    "DomainError",
    "DuelEnv",
    "DuelOutcome",
    "DuelbandError",
    "EntryOutOfRangeError",
    "ExperimentConfig",
    "GapVector",
    "IndexOutOfRangeError",
    "InvalidGapRangeError",
    "NoCondorcetWinnerError",
    "NonSquareError",
    "OptimisticMatrix",
    "PairMismatchError",
    "PreferenceMatrix",
    "RucbState",
    "RunTrace",
    "SkewViolationError",
    "StepDecision",
    "StepLog",
    "SubsetTooLargeError",
    "VerificationFailure",
    "VerificationReport",
    "ZeroGapError",
    "aggregate",
    "analyze_assumptions",
    "beat_relation",
    "best_arm",
    "beta_cdf",
    "beta_tail",
    "binomial_mix_tail",
    "borda_winner",
    "c_delta",
    "c_delta_log",
    "c_delta_mean",
    "collect_runs",
    "condorcet_subset_count",
    "condorcet_subset_probability",
    "condorcet_winner",
    "config_from_dict",
    "d_matrix",
    "emit_plot_data",
    "expected_regret_bound",
    "gaps",
    "gaps_from_deltas",
    "generate_cycle",
    "generate_planted",
    "high_prob_regret_curve",
    "kl_bernoulli",
    "load_config",
    "load_matrix",
    "log_checkpoints",
    "marginalized_tail",
    "matrix_sha256",
    "optimistic_matrix",
    "random_pairing_run",
    "resolve_matrix",
    "run",
    "run_experiment",
    "save_matrix",
    "save_trace",
    "select_pair",
    "step_regret",
    "total_ordering_probability_mc",
    "update",
    "validate",
    "verify_beta_estimate",
    "verify_envelope",
    "verify_tail_shrinkage",
]
