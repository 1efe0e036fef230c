"""Seeded experiment harnesses: synthetic data, tail audits, p-value and
toy convergence studies, and threshold decision-rule tables.

Every harness is deterministic under a fixed master seed and invariant to
worker count: each replicate owns RNG substreams keyed by (seed, replicate
index, channel) and results are aggregated by replicate index.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .dist import GaussianParams, MixtureModel, gaussian_cdf, gaussian_pdf, mixture_sample, mixture_sf
from .errors import DomainError, FitFailureError
from .evidence import ToyScenario
from .fit import FitConfig, fit_mixture, split_dataset
from .gof import ad_statistic, asymptotic_ks_pvalue, bootstrap_pvalue, ks_statistic
from .seeds import derive_seed, substream

__all__ = [
    "REFERENCE_NONMATED_MODEL",
    "DEFAULT_MATED_MODEL",
    "DEFAULT_STUDY_FIT_CONFIG",
    "DEFAULT_THRESHOLDS",
    "ScoreRecord",
    "ScoreDataset",
    "SynthConfig",
    "TailAudit",
    "PValueStudyResult",
    "ToyRecord",
    "RatioRecord",
    "ThresholdTable",
    "Violation",
    "generate_synthetic",
    "tail_audit",
    "pvalue_study",
    "toy_study",
    "default_toy_scenarios",
    "threshold_study",
    "table_fixture_check",
]

#: Published reference mixture for 15-feature non-mated comparisons.
REFERENCE_NONMATED_MODEL = MixtureModel.from_parts(
    weights=(0.8, 0.2),
    locations=(-83.75, -61.25),
    scales=(5.625, 10.9375),
    origin="nonmated",
    feature_count=15,
)

#: Default synthetic truth for mated scores: one logistic well to the right
#: of the non-mated bulk.
DEFAULT_MATED_MODEL = MixtureModel.from_parts(
    weights=(1.0,),
    locations=(15.0,),
    scales=(8.0,),
    origin="mated",
    feature_count=15,
)

#: Study-scale fitting default.  Restarts beyond the first never win on
#: samples this size (the simplex from the quantile initializer already
#: reaches the optimum and ties break toward restart 0), so the studies
#: trade them for runtime.
DEFAULT_STUDY_FIT_CONFIG = FitConfig(k=2, restarts=1)

#: Decision-rule thresholds audited by the shipped tables.
DEFAULT_THRESHOLDS = (1.0, 10.0, 100.0, 1_000.0, 10_000.0, 100_000.0)

_COMPLEMENT_TOL = 1e-3


@dataclass(frozen=True)
class ScoreRecord:
    """One labeled similarity score."""

    score: float
    origin: str
    feature_count: int
    pair_id: str
    source_id: str | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise DomainError(f"score must be finite, got {self.score}")
        if self.origin not in ("mated", "nonmated"):
            raise DomainError(f"origin must be 'mated' or 'nonmated', got {self.origin!r}")
        if not 5 <= self.feature_count <= 15:
            raise DomainError(f"feature_count must be in [5, 15], got {self.feature_count}")
        if not self.pair_id:
            raise DomainError("pair_id must be nonempty")


@dataclass(frozen=True, eq=False)
class ScoreDataset:
    """An ordered collection of labeled scores."""

    records: tuple[ScoreRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def scores(self, origin: str | None = None, feature_count: int | None = None) -> np.ndarray:
        """Scores filtered by origin and/or feature count, in record order."""
        return np.array(
            [
                r.score
                for r in self.records
                if (origin is None or r.origin == origin)
                and (feature_count is None or r.feature_count == feature_count)
            ],
            dtype=float,
        )


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic dataset configuration.

    Non-mated scores are drawn from (1 - w) * core + w * contamination where
    the contamination is a wide logistic sitting to the right of the core
    bulk.  The default weight and placement land the observed frequency of
    positive non-mated scores near 1.3%, the pooled rate the shipped tail
    fixture records, and produce the flat trailing right tail that a
    two-component refit cannot absorb without ruining its fit to the bulk.
    """

    mated_model: MixtureModel = DEFAULT_MATED_MODEL
    nonmated_core: MixtureModel = REFERENCE_NONMATED_MODEL
    contamination_weight: float = 0.013
    contamination_location: float = 45.0
    contamination_scale: float = 25.0
    n_mated: int = 1996
    n_nonmated: int = 2000
    feature_count: int = 15
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.contamination_weight < 0.5:
            raise DomainError(
                f"contamination_weight must be in [0, 0.5), got {self.contamination_weight}"
            )
        if self.contamination_scale <= 0.0:
            raise DomainError(f"contamination_scale must be positive, got {self.contamination_scale}")
        if self.n_mated < 0 or self.n_nonmated < 0:
            raise DomainError("record counts must be nonnegative")
        if not 5 <= self.feature_count <= 15:
            raise DomainError(f"feature_count must be in [5, 15], got {self.feature_count}")

    def nonmated_model(self) -> MixtureModel:
        """The full non-mated sampling model: core scaled down plus contamination."""
        w = self.contamination_weight
        core = self.nonmated_core
        if w == 0.0:
            return core
        return MixtureModel.from_parts(
            weights=np.concatenate([core.weights * (1.0 - w), [w]]),
            locations=np.concatenate([core.locations, [self.contamination_location]]),
            scales=np.concatenate([core.scales, [self.contamination_scale]]),
            origin=core.origin,
            feature_count=core.feature_count,
        )


# Scores per mated source under the round-robin id assignment.
_SCORES_PER_SOURCE = 10


def generate_synthetic(cfg: SynthConfig) -> ScoreDataset:
    """Generate a labeled synthetic dataset from the configured truth models.

    Mated and non-mated draws use independent substreams (seed, 0) and
    (seed, 1).  Mated records are assigned round-robin ids: each score is
    one compared pair, and every block of 10 consecutive scores shares a
    source.
    """
    records: list[ScoreRecord] = []
    if cfg.n_mated > 0:
        mated = mixture_sample(cfg.mated_model, cfg.n_mated, substream(cfg.seed, 0))
        for i, s in enumerate(mated):
            records.append(
                ScoreRecord(
                    score=float(s),
                    origin="mated",
                    feature_count=cfg.feature_count,
                    pair_id=f"mated-{i}",
                    source_id=f"source-{i // _SCORES_PER_SOURCE}",
                )
            )
    if cfg.n_nonmated > 0:
        nonmated = mixture_sample(cfg.nonmated_model(), cfg.n_nonmated, substream(cfg.seed, 1))
        for i, s in enumerate(nonmated):
            records.append(
                ScoreRecord(
                    score=float(s),
                    origin="nonmated",
                    feature_count=cfg.feature_count,
                    pair_id=f"nonmated-{i}",
                    source_id=None,
                )
            )
    return ScoreDataset(records=tuple(records))


@dataclass(frozen=True, eq=False)
class TailAudit:
    """Model-expected vs observed right-tail rates at a set of cutpoints, per 100,000."""

    cutpoints: tuple[float, ...]
    expected_per_100k: tuple[float, ...] | None
    observed_count: tuple[int, ...] | None
    observed_total: int | None
    observed_per_100k: tuple[float, ...] | None

    @classmethod
    def from_model(cls, model: MixtureModel, cutpoints: Sequence[float]) -> "TailAudit":
        """Expected rates only, from the model's right tail."""
        cuts = tuple(float(c) for c in cutpoints)
        if len(cuts) == 0:
            raise DomainError("need at least one cutpoint")
        expected = tuple(1e5 * mixture_sf(model, c) for c in cuts)
        return cls(cuts, expected, None, None, None)

    @classmethod
    def from_counts(
        cls,
        cutpoints: Sequence[float],
        counts: Sequence[int],
        total: int,
        model: MixtureModel | None = None,
    ) -> "TailAudit":
        """Observed rates from pre-binned exceedance counts, plus expected if a model is given."""
        cuts = tuple(float(c) for c in cutpoints)
        cnts = tuple(int(c) for c in counts)
        if len(cuts) == 0 or len(cuts) != len(cnts):
            raise DomainError("cutpoints and counts must align and be nonempty")
        if total < 1 or any(c < 0 or c > total for c in cnts):
            raise DomainError("counts must be within [0, total]")
        expected = tuple(1e5 * mixture_sf(model, c) for c in cuts) if model is not None else None
        observed = tuple(1e5 * c / total for c in cnts)
        return cls(cuts, expected, cnts, int(total), observed)


def tail_audit(model: MixtureModel, observed, cutpoints: Sequence[float]) -> TailAudit:
    """Audit a model's right tail against observed scores at the given cutpoints."""
    arr = np.asarray(observed, dtype=float)
    if arr.size == 0:
        raise DomainError("observed scores must be nonempty")
    cuts = [float(c) for c in cutpoints]
    counts = [int(np.sum(arr > c)) for c in cuts]
    return TailAudit.from_counts(cuts, counts, int(arr.size), model=model)


@dataclass(frozen=True, eq=False)
class PValueStudyResult:
    """Four p-value panels from the split/fit/test/resample protocol.

    Replicates whose fit failed are excluded from the panels but recorded
    in `missing` so the failure count stays visible.
    """

    ks_observed: tuple[float, ...]
    ad_observed: tuple[float, ...]
    ks_null: tuple[float, ...]
    ad_null: tuple[float, ...]
    reps: int
    missing: tuple[int, ...]
    seed: int
    fraction: float
    resample_n: int
    bootstrap_b: int
    p_methods: tuple[str, str]

    def __post_init__(self) -> None:
        panels = (self.ks_observed, self.ad_observed, self.ks_null, self.ad_null)
        lengths = {len(p) for p in panels}
        if lengths != {self.reps - len(self.missing)}:
            raise DomainError("panel lengths must all equal reps minus missing count")
        for panel in panels:
            for p in panel:
                if not 0.0 <= p <= 1.0:
                    raise DomainError(f"p-values must be in [0, 1], got {p}")


def _ks_pvalue(sample: np.ndarray, model: MixtureModel, method: str, seed: int, B: int) -> float:
    if method == "asymptotic":
        return asymptotic_ks_pvalue(ks_statistic(sample, model), len(sample))
    if method == "bootstrap":
        return bootstrap_pvalue(sample, model, "KS", B, seed).p_value
    raise DomainError(f"KS p-value method must be 'asymptotic' or 'bootstrap', got {method!r}")


def _ad_pvalue(sample: np.ndarray, model: MixtureModel, method: str, seed: int, B: int) -> float:
    if method != "bootstrap":
        raise DomainError(f"AD p-value method must be 'bootstrap', got {method!r}")
    return bootstrap_pvalue(sample, model, "AD", B, seed).p_value


def pvalue_study(
    data,
    reps: int,
    fraction: float = 0.75,
    resample_n: int = 1500,
    fit_config: FitConfig = DEFAULT_STUDY_FIT_CONFIG,
    p_methods: tuple[str, str] = ("asymptotic", "bootstrap"),
    bootstrap_b: int = 199,
    seed: int = 0,
    workers: int = 1,
) -> PValueStudyResult:
    """Run the split/fit/test/resample p-value study.

    Per replicate: randomly split the scores (train fraction 0.75 by
    default), fit the mixture to the train part, compute KS and AD p-values
    on the held-out part, then draw `resample_n` scores from the fitted
    model and compute both p-values again on that null sample.  The four
    panels are returned in replicate order.

    `p_methods` selects the p-value method per statistic as (KS, AD); the
    default pairs the asymptotic KS p-value with a parametric-bootstrap AD
    p-value of size `bootstrap_b`.

    Replicate r uses substreams keyed (seed, r, channel), so results are
    identical for any `workers` count.
    """
    arr = np.asarray(data, dtype=float)
    if arr.size < 100:
        raise DomainError(f"need at least 100 scores, got {arr.size}")
    if reps < 10:
        raise DomainError(f"need at least 10 replicates, got {reps}")
    if workers < 1:
        raise DomainError(f"workers must be at least 1, got {workers}")

    ks_method, ad_method = p_methods

    def one_rep(rep: int) -> tuple[float, float, float, float] | None:
        split = split_dataset(arr, fraction, substream(seed, rep, 0))
        try:
            model = fit_mixture(split.train, replace(fit_config, seed=rep)).model
        except FitFailureError:
            return None
        ks_obs = _ks_pvalue(split.test, model, ks_method, derive_seed(seed, rep, 5), bootstrap_b)
        ad_obs = _ad_pvalue(split.test, model, ad_method, derive_seed(seed, rep, 2), bootstrap_b)
        null_draw = mixture_sample(model, resample_n, substream(seed, rep, 4))
        ks_null = _ks_pvalue(null_draw, model, ks_method, derive_seed(seed, rep, 6), bootstrap_b)
        ad_null = _ad_pvalue(null_draw, model, ad_method, derive_seed(seed, rep, 3), bootstrap_b)
        return ks_obs, ad_obs, ks_null, ad_null

    if workers == 1:
        results = [one_rep(r) for r in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_rep, range(reps)))

    missing = tuple(r for r, out in enumerate(results) if out is None)
    kept = [out for out in results if out is not None]
    return PValueStudyResult(
        ks_observed=tuple(out[0] for out in kept),
        ad_observed=tuple(out[1] for out in kept),
        ks_null=tuple(out[2] for out in kept),
        ad_null=tuple(out[3] for out in kept),
        reps=reps,
        missing=missing,
        seed=seed,
        fraction=fraction,
        resample_n=resample_n,
        bootstrap_b=bootstrap_b,
        p_methods=(ks_method, ad_method),
    )


@dataclass(frozen=True)
class ToyRecord:
    """One paired draw from the toy convergence study."""

    scenario: str
    hypothesis: str
    rep: int
    true_lr: float
    frstat_like: float
    saturated: bool


def default_toy_scenarios(pop_mean: float = 0.0, between_sd: float = 1.0) -> tuple[ToyScenario, ...]:
    """The three standard scenario rows.

    (a) common source with some variance, (b) rare source 2.5 between-sds
    from the population mean, (c) common source with virtually no variance.
    """
    return (
        ToyScenario(pop_mean=pop_mean, between_sd=between_sd, within_sd=0.5 * between_sd, source_mean=pop_mean),
        ToyScenario(
            pop_mean=pop_mean,
            between_sd=between_sd,
            within_sd=0.5 * between_sd,
            source_mean=pop_mean + 2.5 * between_sd,
        ),
        ToyScenario(pop_mean=pop_mean, between_sd=between_sd, within_sd=0.01 * between_sd, source_mean=pop_mean),
    )


_STD_NORMAL = GaussianParams(0.0, 1.0)


def _toy_tails(sc: ToyScenario, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form tail risks for the similarity score s = -|x - source_mean|.

    The mated tail folds the within-source normal: P(S <= s) = 2 Phi(s / within).
    The non-mated tail is the probability a random-source observation lands
    within |s| of the source mean.
    """
    total = sc.total_sd
    if sc.within_sd > 0.0:
        alpha = 2.0 * gaussian_cdf(s / sc.within_sd, _STD_NORMAL)
    else:
        alpha = np.where(s == 0.0, 1.0, 0.0)
    upper = (sc.source_mean - s - sc.pop_mean) / total
    lower = (sc.source_mean + s - sc.pop_mean) / total
    beta = gaussian_cdf(upper, _STD_NORMAL) - gaussian_cdf(lower, _STD_NORMAL)
    return np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float)


def _toy_true_lr(sc: ToyScenario, x: np.ndarray) -> np.ndarray:
    if sc.within_sd > 0.0:
        num = gaussian_pdf(x, GaussianParams(sc.source_mean, sc.within_sd))
        den = gaussian_pdf(x, GaussianParams(sc.pop_mean, sc.total_sd))
        with np.errstate(divide="ignore"):
            return np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), np.inf)
    # point-mass source: the density ratio degenerates to an indicator
    return np.where(x == sc.source_mean, np.inf, 0.0)


def toy_study(
    scenarios: Sequence[ToyScenario],
    reps: int,
    seed: int = 0,
) -> tuple[ToyRecord, ...]:
    """Paired true-LR and tail-ratio values over scenarios and hypotheses.

    For each scenario row and each hypothesis (H0: draw from the named
    source; H1: draw from a random population source) this draws `reps`
    observations, scores each as s = -|x - source_mean|, and pairs the
    closed-form tail ratio with the closed-form specific-source LR.
    Saturated ratios (either value nonfinite) are carried as markers, not
    dropped.  Cell (i, h) uses substream (seed, i, h), so records are
    deterministic and independent of evaluation order.
    """
    if len(scenarios) == 0:
        raise DomainError("need at least one scenario")
    if reps < 100:
        raise DomainError(f"need at least 100 replicates, got {reps}")
    records: list[ToyRecord] = []
    for si, base in enumerate(scenarios):
        label = chr(ord("a") + si) if si < 26 else str(si)
        for hi, hyp in enumerate(("H0", "H1")):
            sc = replace(base, hypothesis=hyp)
            rng = substream(seed, si, hi)
            if hyp == "H0":
                x = rng.normal(sc.source_mean, sc.within_sd, size=reps)
            else:
                x = rng.normal(sc.pop_mean, sc.total_sd, size=reps)
            s = -np.abs(x - sc.source_mean)
            alpha, beta = _toy_tails(sc, s)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(beta > 0.0, alpha / np.where(beta > 0.0, beta, 1.0), np.inf)
            true_lr = _toy_true_lr(sc, x)
            saturated = ~(np.isfinite(ratio) & np.isfinite(true_lr))
            for rep in range(reps):
                records.append(
                    ToyRecord(
                        scenario=label,
                        hypothesis=hyp,
                        rep=rep,
                        true_lr=float(true_lr[rep]),
                        frstat_like=float(ratio[rep]),
                        saturated=bool(saturated[rep]),
                    )
                )
    return tuple(records)


@dataclass(frozen=True)
class RatioRecord:
    """One evidence ratio with its origin label and feature count."""

    ratio: float
    origin: str
    feature_count: int

    def __post_init__(self) -> None:
        if self.origin not in ("mated", "nonmated"):
            raise DomainError(f"origin must be 'mated' or 'nonmated', got {self.origin!r}")
        if not 5 <= self.feature_count <= 15:
            raise DomainError(f"feature_count must be in [5, 15], got {self.feature_count}")
        if math.isnan(self.ratio) or self.ratio < 0.0:
            raise DomainError(f"ratio must be nonnegative or +inf, got {self.ratio}")


@dataclass(frozen=True, eq=False)
class ThresholdTable:
    """Rates per feature count (rows) and decision threshold (columns)."""

    kind: str
    feature_counts: tuple[int, ...]
    thresholds: tuple[float, ...]
    rates: tuple[tuple[float, ...], ...]
    pair_counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("correct_exclusion", "erroneous_identification"):
            raise DomainError(f"unknown table kind {self.kind!r}")
        if len(self.rates) != len(self.feature_counts) or len(self.pair_counts) != len(self.feature_counts):
            raise DomainError("row count mismatch")
        for row in self.rates:
            if len(row) != len(self.thresholds):
                raise DomainError("column count mismatch")
            for rate in row:
                if not 0.0 <= rate <= 1.0:
                    raise DomainError(f"rates must be in [0, 1], got {rate}")

    def get(self, feature_count: int, threshold: float) -> float:
        """Rate at one (feature_count, threshold) cell."""
        try:
            i = self.feature_counts.index(feature_count)
            j = self.thresholds.index(threshold)
        except ValueError as exc:
            raise DomainError(f"no cell ({feature_count}, {threshold}) in table") from exc
        return self.rates[i][j]


def threshold_study(
    records: Iterable[RatioRecord],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> tuple[ThresholdTable, ThresholdTable]:
    """Decision-rule audit over non-mated evidence ratios.

    For every feature count present and every threshold T: the correct
    exclusion rate is the fraction of non-mated ratios strictly below T and
    the erroneous identification rate the fraction at or above T.  A ratio
    exactly at the threshold counts as an erroneous identification, the
    conservative reading for the person the evidence is used against.
    """
    recs = [r for r in records]
    if len(recs) == 0:
        raise DomainError("need at least one record")
    cols = tuple(sorted(float(t) for t in thresholds))
    if len(cols) == 0:
        raise DomainError("need at least one threshold")
    nonmated = [r for r in recs if r.origin == "nonmated"]
    if len(nonmated) == 0:
        raise DomainError("need at least one non-mated record")
    fcs = tuple(sorted({r.feature_count for r in nonmated}))
    excl_rows: list[tuple[float, ...]] = []
    err_rows: list[tuple[float, ...]] = []
    counts: list[int] = []
    for fc in fcs:
        ratios = np.array([r.ratio for r in nonmated if r.feature_count == fc], dtype=float)
        counts.append(ratios.size)
        excl_rows.append(tuple(float(np.mean(ratios < t)) for t in cols))
        err_rows.append(tuple(float(np.mean(ratios >= t)) for t in cols))
    return (
        ThresholdTable("correct_exclusion", fcs, cols, tuple(excl_rows), tuple(counts)),
        ThresholdTable("erroneous_identification", fcs, cols, tuple(err_rows), tuple(counts)),
    )


@dataclass(frozen=True)
class Violation:
    """One table cell whose exclusion and identification rates fail to sum to 1."""

    feature_count: int
    threshold: float
    exclusion_rate: float
    identification_rate: float
    deviation: float


def table_fixture_check(
    exclusion: ThresholdTable,
    identification: ThresholdTable,
    tolerance: float = _COMPLEMENT_TOL,
) -> tuple[Violation, ...]:
    """Flag every cell where exclusion + identification differs from 1.

    The default tolerance 0.001 absorbs printed rounding of 0.0005 per side.
    Tables must be aligned (same rows, columns, and pair counts); empty
    tables are a domain error.
    """
    if len(exclusion.feature_counts) == 0 or len(exclusion.thresholds) == 0:
        raise DomainError("tables must be nonempty")
    if (
        exclusion.feature_counts != identification.feature_counts
        or exclusion.thresholds != identification.thresholds
        or exclusion.pair_counts != identification.pair_counts
    ):
        raise DomainError("tables are not aligned")
    violations: list[Violation] = []
    for i, fc in enumerate(exclusion.feature_counts):
        for j, t in enumerate(exclusion.thresholds):
            excl = exclusion.rates[i][j]
            err = identification.rates[i][j]
            deviation = abs(excl + err - 1.0)
            if deviation > tolerance:
                violations.append(Violation(fc, t, excl, err, deviation))
    return tuple(violations)
