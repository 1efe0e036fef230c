"""Core evidence numbers for a compared score.

For an observed similarity score s this module computes the risk of
erroneous exclusion (left tail of the mated score distribution at s), the
risk of erroneous identification (right tail of the non-mated distribution
at s), their ratio, and the score-based likelihood ratio (the ratio of the
two densities at s).  It also finds the tipping score where the two tail
risks are equal, and provides the discrete blood-group weight of evidence
and the closed-form specific-source likelihood ratio used by the toy
simulation study.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .dist import (
    GaussianParams,
    MixtureModel,
    gaussian_pdf,
    mixture_cdf,
    mixture_pdf,
    mixture_sf,
    quantile_bracket,
)
from .errors import DomainError, NoTippingPointError

__all__ = [
    "EvidenceReport",
    "BloodTypeTable",
    "DiscreteWoe",
    "ToyScenario",
    "TippingPoint",
    "alpha_tail",
    "beta_tail",
    "evidence_numbers",
    "score_lr",
    "tipping_score",
    "discrete_woe",
    "specific_source_lr",
]

_TIPPING_TOL = 1e-9


@dataclass(frozen=True)
class EvidenceReport:
    """The evidence numbers at one observed score.

    `alpha` is the risk of erroneous exclusion, `beta` the risk of erroneous
    identification, `ratio` their quotient alpha / beta, and `slr` the
    score-based likelihood ratio (mated density over non-mated density).
    When `beta` underflows to 0 the ratio is +inf and `saturated` is set;
    the ratio is never silently reported as a plain huge number.
    """

    observed_score: float
    alpha: float
    beta: float
    ratio: float
    slr: float
    saturated: bool = False
    slr_saturated: bool = False
    mated_id: str = "mated"
    nonmated_id: str = "nonmated"


@dataclass(frozen=True)
class BloodTypeTable:
    """Population frequencies per discrete type; in (0, 1], summing to 1.

    The upper bound is closed so a degenerate single-type population
    (frequency exactly 1) is representable.
    """

    frequencies: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        if len(self.frequencies) == 0:
            raise DomainError("type table must not be empty")
        total = 0.0
        for label, freq in self.frequencies:
            if not 0.0 < freq <= 1.0:
                raise DomainError(f"frequency for {label!r} must be in (0, 1], got {freq}")
            total += freq
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"frequencies must sum to 1, got {total!r}")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, float]) -> "BloodTypeTable":
        """Build a table from a label-to-frequency mapping, preserving order."""
        return cls(tuple((str(k), float(v)) for k, v in mapping.items()))

    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.frequencies)


@dataclass(frozen=True, eq=False)
class DiscreteWoe:
    """Discrete weight of evidence: overall correspondence ratio and per-type LRs."""

    correspondence_ratio: float
    per_type_lr: dict[str, float]


@dataclass(frozen=True)
class ToyScenario:
    """Gaussian toy-model scenario for the convergence study.

    A population of sources has means N(pop_mean, between_sd); repeated
    observations of one source scatter N(source_mean, within_sd).  The
    hypothesis tags which distribution the observation is drawn from:
    H0 the named source, H1 a random population source.
    """

    pop_mean: float
    between_sd: float
    within_sd: float
    source_mean: float
    hypothesis: str = "H0"

    def __post_init__(self) -> None:
        if self.between_sd < 0.0 or self.within_sd < 0.0:
            raise DomainError("scenario sds must be nonnegative")
        if self.between_sd == 0.0 and self.within_sd == 0.0:
            raise DomainError("between_sd and within_sd must not both be 0")
        if self.hypothesis not in ("H0", "H1"):
            raise DomainError(f"hypothesis must be 'H0' or 'H1', got {self.hypothesis!r}")

    @property
    def total_sd(self) -> float:
        """Marginal sd of an observation from a random source."""
        return math.hypot(self.between_sd, self.within_sd)


@dataclass(frozen=True)
class TippingPoint:
    """Score where the two tail risks cross, with the values found there."""

    score: float
    alpha: float
    beta: float
    slr: float
    slr_saturated: bool


def alpha_tail(mated: MixtureModel, s: float) -> float:
    """Risk of erroneous exclusion: P(score <= s) under the mated model."""
    return mixture_cdf(mated, float(s))


def beta_tail(nonmated: MixtureModel, s: float) -> float:
    """Risk of erroneous identification: P(score > s) under the non-mated model."""
    return mixture_sf(nonmated, float(s))


def _pdf_ratio(mated: MixtureModel, nonmated: MixtureModel, s: float) -> tuple[float, bool]:
    num = mixture_pdf(mated, s)
    den = mixture_pdf(nonmated, s)
    if den == 0.0:
        return math.inf, True
    return num / den, False


def evidence_numbers(
    mated: MixtureModel,
    nonmated: MixtureModel,
    s: float,
    mated_id: str = "mated",
    nonmated_id: str = "nonmated",
) -> EvidenceReport:
    """Compute the full evidence report (both tail risks, their ratio, the SLR) at s."""
    s = float(s)
    alpha = alpha_tail(mated, s)
    beta = beta_tail(nonmated, s)
    if beta == 0.0:
        ratio, saturated = math.inf, True
    else:
        ratio, saturated = alpha / beta, False
    slr, slr_saturated = _pdf_ratio(mated, nonmated, s)
    return EvidenceReport(
        observed_score=s,
        alpha=alpha,
        beta=beta,
        ratio=ratio,
        slr=slr,
        saturated=saturated,
        slr_saturated=slr_saturated,
        mated_id=mated_id,
        nonmated_id=nonmated_id,
    )


def score_lr(mated: MixtureModel, nonmated: MixtureModel, s: float) -> float:
    """Score-based likelihood ratio: mated density over non-mated density at s.

    Returns +inf when the denominator underflows (saturation marker).
    """
    ratio, _ = _pdf_ratio(mated, nonmated, float(s))
    return ratio


def tipping_score(mated: MixtureModel, nonmated: MixtureModel) -> TippingPoint:
    """Find the score where the exclusion and identification risks are equal.

    The difference alpha(s) - beta(s) runs from -1 to +1, so a sign change
    exists on any bracket wide enough to cover both models; bisection drives
    |alpha - beta| below 1e-9.  The returned record also carries the
    score-based likelihood ratio at the crossing, which in general is not 1:
    a tail-probability ratio of exactly 1 does not mean the densities agree.
    """
    lo_m, hi_m = quantile_bracket(mated)
    lo_n, hi_n = quantile_bracket(nonmated)
    lo, hi = min(lo_m, lo_n), max(hi_m, hi_n)

    def gap(s: float) -> float:
        return alpha_tail(mated, s) - beta_tail(nonmated, s)

    if gap(lo) > 0.0 or gap(hi) < 0.0:
        raise NoTippingPointError("tail risks do not cross on the search bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    s_star = 0.5 * (lo + hi)
    alpha = alpha_tail(mated, s_star)
    beta = beta_tail(nonmated, s_star)
    if abs(alpha - beta) > _TIPPING_TOL:
        raise NoTippingPointError(
            f"bisection did not close the gap: |alpha - beta| = {abs(alpha - beta):.3e}"
        )
    slr, slr_saturated = _pdf_ratio(mated, nonmated, s_star)
    return TippingPoint(score=s_star, alpha=alpha, beta=beta, slr=slr, slr_saturated=slr_saturated)


def discrete_woe(table: BloodTypeTable, observed_type: str | None = None) -> DiscreteWoe:
    """Discrete weight of evidence for a type table.

    The correspondence ratio 1 / sum(p_i^2) is the average weight of
    evidence when the specific observed type is ignored; the per-type
    likelihood ratio for type t is 1 / p_t.
    """
    labels = table.labels()
    if observed_type is not None and observed_type not in labels:
        raise DomainError(f"unknown type label {observed_type!r}; known: {list(labels)}")
    sum_sq = sum(freq * freq for _, freq in table.frequencies)
    per_type = {label: 1.0 / freq for label, freq in table.frequencies}
    return DiscreteWoe(correspondence_ratio=1.0 / sum_sq, per_type_lr=per_type)


def specific_source_lr(sc: ToyScenario, x: float) -> float:
    """Closed-form specific-source LR: density under the named source over
    density under a random population source.

    Returns +inf when the denominator underflows (saturation marker).
    """
    if sc.within_sd <= 0.0:
        raise DomainError("within_sd must be positive for a density ratio")
    num = gaussian_pdf(float(x), GaussianParams(sc.source_mean, sc.within_sd))
    den = gaussian_pdf(float(x), GaussianParams(sc.pop_mean, sc.total_sd))
    if den == 0.0:
        return math.inf
    return num / den
