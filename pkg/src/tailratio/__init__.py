"""Tail-probability evidence ratios for similarity scores.

Fits logistic mixtures to comparison-score distributions, turns an observed
score into a pair of opposing tail error probabilities and their ratio,
checks fitted models with KS and AD goodness-of-fit tests, and runs the
validation studies (tail audits, p-value calibration, toy convergence,
threshold decision rules) end to end.
"""
from __future__ import annotations

from ._version import __version__
from .dist import (
    GaussianParams,
    LogisticComponent,
    MixtureModel,
    gaussian_cdf,
    gaussian_pdf,
    log_likelihood,
    logistic_cdf,
    logistic_pdf,
    logistic_sf,
    mixture_cdf,
    mixture_pdf,
    mixture_quantile,
    mixture_sample,
    mixture_sf,
)
from .errors import (
    DataFormatError,
    DomainError,
    FitFailureError,
    ModelError,
    NoTippingPointError,
    TailratioError,
)
from .evidence import (
    BloodTypeTable,
    DiscreteWoe,
    EvidenceReport,
    TippingPoint,
    ToyScenario,
    alpha_tail,
    beta_tail,
    discrete_woe,
    evidence_numbers,
    score_lr,
    specific_source_lr,
    tipping_score,
)
from .experiments import (
    DEFAULT_MATED_MODEL,
    DEFAULT_THRESHOLDS,
    PValueStudyResult,
    RatioRecord,
    REFERENCE_NONMATED_MODEL,
    ScoreDataset,
    ScoreRecord,
    SynthConfig,
    TailAudit,
    ThresholdTable,
    ToyRecord,
    Violation,
    default_toy_scenarios,
    generate_synthetic,
    pvalue_study,
    table_fixture_check,
    tail_audit,
    threshold_study,
    toy_study,
)
from .fit import FitConfig, FitResult, SplitResult, fit_mixture, init_params, split_dataset
from .gof import (
    EmpiricalDistribution,
    GofOutcome,
    ad_statistic,
    ad_weight,
    asymptotic_ks_pvalue,
    bootstrap_pvalue,
    ks_statistic,
)
from .io import (
    load_model,
    load_scores,
    load_threshold_table,
    packaged_data_path,
    save_model,
    save_scores,
)
from .seeds import derive_seed, substream

__all__ = [
    "__version__",
    "BloodTypeTable",
    "DataFormatError",
    "DEFAULT_MATED_MODEL",
    "DEFAULT_THRESHOLDS",
    "DiscreteWoe",
    "DomainError",
    "EmpiricalDistribution",
    "EvidenceReport",
    "FitConfig",
    "FitFailureError",
    "FitResult",
    "GaussianParams",
    "GofOutcome",
    "LogisticComponent",
    "MixtureModel",
    "ModelError",
    "NoTippingPointError",
    "PValueStudyResult",
    "RatioRecord",
    "REFERENCE_NONMATED_MODEL",
    "ScoreDataset",
    "ScoreRecord",
    "SplitResult",
    "SynthConfig",
    "TailAudit",
    "TailratioError",
    "ThresholdTable",
    "TippingPoint",
    "ToyRecord",
    "ToyScenario",
    "Violation",
    "ad_statistic",
    "ad_weight",
    "alpha_tail",
    "asymptotic_ks_pvalue",
    "beta_tail",
    "bootstrap_pvalue",
    "default_toy_scenarios",
    "derive_seed",
    "discrete_woe",
    "evidence_numbers",
    "fit_mixture",
    "gaussian_cdf",
    "gaussian_pdf",
    "generate_synthetic",
    "init_params",
    "ks_statistic",
    "load_model",
    "load_scores",
    "load_threshold_table",
    "log_likelihood",
    "logistic_cdf",
    "logistic_pdf",
    "logistic_sf",
    "mixture_cdf",
    "mixture_pdf",
    "mixture_quantile",
    "mixture_sample",
    "mixture_sf",
    "packaged_data_path",
    "pvalue_study",
    "save_model",
    "save_scores",
    "score_lr",
    "specific_source_lr",
    "split_dataset",
    "substream",
    "table_fixture_check",
    "tail_audit",
    "threshold_study",
    "tipping_score",
    "toy_study",
]
