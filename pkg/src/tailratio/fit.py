"""Maximum-likelihood fitting of logistic mixtures with a 75/25 split protocol.

The optimizer is a derivative-free simplex search over an unconstrained
reparameterization: k-1 weight logits (softmax, last logit pinned to 0),
raw locations, and log scales.  Restarts jitter the initializer with an
independent substream per restart so results do not depend on scheduling.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .dist import MixtureModel
from .errors import DomainError, FitFailureError
from .seeds import SeedLike, as_generator, substream

__all__ = ["FitConfig", "SplitResult", "FitResult", "split_dataset", "init_params", "fit_mixture"]

_LOGIT_CLIP = 30.0
_LOG_SCALE_CLIP = 700.0
# Scale floor as a fraction of the sample range; prevents a component from
# collapsing onto a single point and blowing up the likelihood.
_SCALE_FLOOR_FRAC = 1e-4
# Simplex passes per start: re-running from the first result lets the shrunk
# simplex re-expand, which reliably finishes converging on ridge-shaped
# likelihood surfaces at negligible cost.
_PASSES = 2


@dataclass(frozen=True)
class FitConfig:
    """Fitting settings: component count, iteration budget, tolerance, restarts, seed."""

    k: int = 2
    max_iter: int = 2000
    tol: float = 1e-8
    restarts: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise DomainError(f"component count must be at least 1, got {self.k}")
        if self.tol <= 0.0:
            raise DomainError(f"tolerance must be positive, got {self.tol}")
        if self.restarts < 1:
            raise DomainError(f"restarts must be at least 1, got {self.restarts}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be at least 1, got {self.max_iter}")


@dataclass(frozen=True, eq=False)
class SplitResult:
    """Random train/test partition of a score sequence."""

    train: np.ndarray
    test: np.ndarray
    fraction: float


@dataclass(frozen=True, eq=False)
class FitResult:
    """Fitted model, its final log-likelihood, and the winning restart index."""

    model: MixtureModel
    log_likelihood: float
    restart: int


def split_dataset(scores, fraction: float, seed: SeedLike) -> SplitResult:
    """Randomly partition scores into train and test, train size = round(fraction * n)."""
    arr = np.asarray(scores, dtype=float)
    if arr.ndim != 1 or arr.size < 4:
        raise DomainError(f"need a flat sequence of at least 4 scores, got shape {arr.shape}")
    if not 0.0 < fraction < 1.0:
        raise DomainError(f"fraction must be in (0, 1), got {fraction}")
    n = arr.size
    n_train = round(fraction * n)
    if n_train == 0 or n_train == n:
        raise DomainError(f"degenerate split: {n_train} train of {n} total")
    idx = as_generator(seed).permutation(n)
    return SplitResult(train=arr[idx[:n_train]], test=arr[idx[n_train:]], fraction=fraction)


def _sample_stats(arr: np.ndarray) -> tuple[np.ndarray, float, float]:
    xs = np.sort(arr)
    iqr = float(np.quantile(xs, 0.75) - np.quantile(xs, 0.25))
    rng_width = float(xs[-1] - xs[0])
    return xs, iqr, rng_width


def init_params(train, k: int) -> MixtureModel:
    """Initializer: components at the k mid-quantiles, IQR-derived scales, uniform weights."""
    arr = np.asarray(train, dtype=float)
    if k < 1:
        raise DomainError(f"component count must be at least 1, got {k}")
    if arr.size < 10 * k:
        raise DomainError(f"need at least {10 * k} points to initialize k={k}, got {arr.size}")
    xs, iqr, rng_width = _sample_stats(arr)
    if rng_width <= 0.0:
        raise DomainError("sample is a single repeated value; no scale information")
    qs = np.quantile(xs, [(j - 0.5) / k for j in range(1, k + 1)])
    floor = _SCALE_FLOOR_FRAC * rng_width
    # sd of a unit-scale logistic is pi/sqrt(3); spread the IQR across components
    scale = max(iqr * (np.sqrt(3.0) / np.pi) / k, floor)
    return MixtureModel.from_parts(
        weights=np.full(k, 1.0 / k),
        locations=qs,
        scales=np.full(k, scale),
    )


def _pack(model: MixtureModel) -> np.ndarray:
    w = model.weights
    logits = np.log(w / w[-1])[:-1]
    return np.concatenate([logits, model.locations, np.log(model.scales)])


def _unpack(theta: np.ndarray, k: int, floor: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    logits = np.concatenate([theta[: k - 1], [0.0]])
    logits = np.clip(logits, -_LOGIT_CLIP, _LOGIT_CLIP)
    weights = np.exp(logits - logsumexp(logits))
    locations = theta[k - 1 : 2 * k - 1]
    scales = np.maximum(np.exp(np.clip(theta[2 * k - 1 :], -_LOG_SCALE_CLIP, _LOG_SCALE_CLIP)), floor)
    return weights, locations, scales


def _neg_loglik(theta: np.ndarray, xs: np.ndarray, k: int, floor: float) -> float:
    # Hot path: the simplex search calls this ~1000x per fit, so the
    # log-sum-exp is done in place on one n-by-k buffer.
    weights, locations, scales = _unpack(theta, k, floor)
    z = xs[:, None] - locations
    z /= scales
    np.abs(z, out=z)
    t = np.exp(-z)
    np.log1p(t, out=t)
    # z becomes -(logpdf + log weight) = |z| + 2 log1p(e^-|z|) + log s - log w
    z += t
    z += t
    z -= np.log(weights) - np.log(scales)
    m = z.min(axis=1)
    z -= m[:, None]
    np.exp(np.negative(z, out=z), out=z)
    return float(m.sum() - np.log(z.sum(axis=1)).sum())


def fit_mixture(train, cfg: FitConfig = FitConfig()) -> FitResult:
    """Fit a k-component logistic mixture by simplex search over restarts.

    Parameters
    ----------
    train : array-like of float
        Scores to fit; at least 10 * cfg.k points.
    cfg : FitConfig
        Component count, iteration budget, tolerance, restart count, and seed.

    Returns
    -------
    FitResult
        Best model across restarts in canonical component order, its
        log-likelihood, and the restart index that produced it (ties go to
        the lowest index, so reruns are reproducible).

    Raises
    ------
    FitFailureError
        If no restart improves on the initializer; carries best-so-far.
    """
    arr = np.asarray(train, dtype=float)
    init = init_params(arr, cfg.k)  # validates size and degeneracy
    xs, iqr, rng_width = _sample_stats(arr)
    floor = _SCALE_FLOOR_FRAC * rng_width
    k = cfg.k
    theta0 = _pack(init)
    f_init = _neg_loglik(theta0, xs, k, floor)

    best_f = np.inf
    best_theta = theta0
    best_restart = 0
    for r in range(cfg.restarts):
        theta = theta0.copy()
        if r > 0:
            jitter = substream(cfg.seed, r)
            theta[: k - 1] += jitter.normal(0.0, 0.5, size=k - 1)
            theta[k - 1 : 2 * k - 1] += jitter.normal(0.0, 0.25 * max(iqr, floor), size=k)
            theta[2 * k - 1 :] += jitter.normal(0.0, 0.25, size=k)
        f0 = _neg_loglik(theta, xs, k, floor)
        for _ in range(_PASSES):
            res = minimize(
                _neg_loglik,
                theta,
                args=(xs, k, floor),
                method="Nelder-Mead",
                options=dict(
                    maxiter=cfg.max_iter,
                    fatol=cfg.tol * max(1.0, abs(f0)),
                    xatol=1e-5,
                ),
            )
            theta = res.x
        f_r = _neg_loglik(theta, xs, k, floor)
        if f_r < best_f:
            best_f = f_r
            best_theta = theta
            best_restart = r

    if best_f > f_init:
        weights, locations, scales = _unpack(best_theta, k, floor)
        raise FitFailureError(
            "no restart improved on the initializer",
            best_model=MixtureModel.from_parts(weights, locations, scales),
            best_log_likelihood=-best_f,
        )
    weights, locations, scales = _unpack(best_theta, k, floor)
    model = MixtureModel.from_parts(weights, locations, scales)
    return FitResult(model=model, log_likelihood=-best_f, restart=best_restart)
