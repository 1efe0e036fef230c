"""Command-line front end.

Subcommands: gen, fit, eval, gof, tails, sim-pvalues, sim-toy, thresholds,
report.  Every artifact embeds the seed, a digest of the producing
configuration, and the tool version; reruns with the same seed produce
byte-identical outputs regardless of worker count.  Failures exit nonzero
with a machine-readable JSON error on stderr.
"""
from __future__ import annotations

import functools
import json
import math
import sys
from typing import Any

import click

from ._version import __version__
from .dist import MixtureModel
from .errors import DomainError, TailratioError
from .evidence import evidence_numbers, tipping_score
from .experiments import (
    RatioRecord,
    SynthConfig,
    TailAudit,
    default_toy_scenarios,
    generate_synthetic,
    pvalue_study,
    table_fixture_check,
    tail_audit,
    threshold_study,
    toy_study,
)
from .fit import FitConfig, fit_mixture, split_dataset
from .gof import GofOutcome, ad_statistic, asymptotic_ks_pvalue, bootstrap_pvalue, ks_statistic
from .io import (
    build_meta,
    config_digest,
    format_value,
    load_model,
    load_scores,
    load_threshold_table,
    packaged_data_path,
    save_model,
    save_scores,
    write_csv,
)
from .seeds import SEED_ENV_VAR

_SEED_OPTION = click.option(
    "--seed",
    type=int,
    default=0,
    envvar=SEED_ENV_VAR,
    show_default=True,
    help=f"Master seed (falls back to ${SEED_ENV_VAR}, then 0; an explicit flag always wins).",
)


def _fail_with_json(exc: Exception) -> None:
    if isinstance(exc, TailratioError):
        obj = exc.to_json_obj()
    else:
        obj = {"code": "io_error", "message": str(exc)}
    click.echo(json.dumps({"error": obj}), err=True)
    sys.exit(2)


def _wrap_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any):
        try:
            return fn(*args, **kwargs)
        except (TailratioError, OSError) as exc:
            _fail_with_json(exc)

    return wrapper


def _emit_json(obj: dict[str, Any], out: str | None) -> None:
    text = json.dumps(_jsonable(obj), indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _jsonable(value: Any) -> Any:
    """Encode nonfinite floats as None; saturation stays visible via flags."""
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _parse_float_list(text: str, what: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise click.BadParameter(f"bad {what}: {exc}")


def _load_model_arg(path: str | None, default_name: str | None = None) -> MixtureModel:
    if path is None:
        if default_name is None:
            raise click.BadParameter("a model file is required")
        path = str(packaged_data_path(default_name))
    return load_model(path).model


@click.group()
@click.version_option(version=__version__, prog_name="tailratio")
def main() -> None:
    """Tail-probability evidence ratios, mixture fitting, and validation studies."""


@main.command()
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output scores CSV.")
@click.option("--n-mated", type=int, default=1996, show_default=True)
@click.option("--n-nonmated", type=int, default=2000, show_default=True)
@click.option("--feature-count", type=int, default=15, show_default=True)
@click.option("--contamination-weight", type=float, default=0.013, show_default=True)
@click.option("--contamination-location", type=float, default=45.0, show_default=True)
@click.option("--contamination-scale", type=float, default=25.0, show_default=True)
@click.option("--mated-model", "mated_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Mated truth model JSON (default: built-in single logistic at 15, scale 8).")
@click.option("--nonmated-core", "core_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Non-mated core model JSON (default: shipped reference mixture).")
@_SEED_OPTION
@_wrap_errors
def gen(out, n_mated, n_nonmated, feature_count, contamination_weight,
        contamination_location, contamination_scale, mated_path, core_path, seed):
    """Generate a labeled synthetic score dataset."""
    kwargs: dict[str, Any] = dict(
        contamination_weight=contamination_weight,
        contamination_location=contamination_location,
        contamination_scale=contamination_scale,
        n_mated=n_mated,
        n_nonmated=n_nonmated,
        feature_count=feature_count,
        seed=seed,
    )
    if mated_path is not None:
        kwargs["mated_model"] = load_model(mated_path).model
    if core_path is not None:
        kwargs["nonmated_core"] = load_model(core_path).model
    cfg = SynthConfig(**kwargs)
    dataset = generate_synthetic(cfg)
    config = dict(
        subcommand="gen",
        n_mated=n_mated,
        n_nonmated=n_nonmated,
        feature_count=feature_count,
        contamination_weight=contamination_weight,
        contamination_location=contamination_location,
        contamination_scale=contamination_scale,
        mated_model=mated_path or "builtin",
        nonmated_core=core_path or "builtin",
    )
    save_scores(dataset, out, meta=build_meta(seed, config))
    click.echo(f"wrote {len(dataset)} records to {out}")


@main.command("fit")
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--origin", type=click.Choice(["mated", "nonmated"]), default="nonmated", show_default=True)
@click.option("--feature-count", type=int, default=None, help="Filter scores to one feature count.")
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--restarts", type=int, default=5, show_default=True)
@click.option("--max-iter", type=int, default=2000, show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.option("--train-fraction", type=float, default=None,
              help="Fit on a random train split of this fraction instead of all scores.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output model JSON.")
@_SEED_OPTION
@_wrap_errors
def fit_cmd(scores_path, origin, feature_count, k, restarts, max_iter, tol, train_fraction, out, seed):
    """Fit a logistic mixture to scores by maximum likelihood."""
    dataset = load_scores(scores_path)
    scores = dataset.scores(origin=origin, feature_count=feature_count)
    config = dict(
        subcommand="fit",
        scores=str(scores_path),
        origin=origin,
        feature_count=feature_count,
        k=k,
        restarts=restarts,
        max_iter=max_iter,
        tol=tol,
        train_fraction=train_fraction,
    )
    if train_fraction is not None:
        scores = split_dataset(scores, train_fraction, seed).train
    result = fit_mixture(scores, FitConfig(k=k, max_iter=max_iter, tol=tol, restarts=restarts, seed=seed))
    model = MixtureModel(result.model.components, origin=origin,
                         feature_count=feature_count if feature_count is not None else None)
    provenance = f"fitted by tailratio {__version__}; seed={seed}; config_digest={config_digest(config)}"
    save_model(model, out, provenance=provenance)
    _emit_json(
        {
            "log_likelihood": result.log_likelihood,
            "restart": result.restart,
            "n_points": int(len(scores)),
            "out": str(out),
            "meta": build_meta(seed, config),
        },
        None,
    )


@main.command("eval")
@click.option("--mated", "mated_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--nonmated", "nonmated_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--score", type=float, required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write JSON here instead of stdout.")
@_wrap_errors
def eval_cmd(mated_path, nonmated_path, score, out):
    """Evaluate the evidence numbers for one observed score."""
    mated = load_model(mated_path).model
    nonmated = load_model(nonmated_path).model
    rep = evidence_numbers(mated, nonmated, score)
    tp = tipping_score(mated, nonmated)
    config = dict(subcommand="eval", mated=str(mated_path), nonmated=str(nonmated_path), score=score)
    _emit_json(
        {
            "observed_score": rep.observed_score,
            "alpha": rep.alpha,
            "beta": rep.beta,
            "ratio": rep.ratio,
            "slr": rep.slr,
            "saturated": rep.saturated,
            "slr_saturated": rep.slr_saturated,
            "tipping_score": tp.score,
            "slr_at_tipping_score": tp.slr,
            "meta": build_meta(0, config),
        },
        out,
    )


@main.command("gof")
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--origin", type=click.Choice(["mated", "nonmated"]), default="nonmated", show_default=True)
@click.option("--feature-count", type=int, default=None)
@click.option("--kind", type=click.Choice(["KS", "AD", "both"]), default="both", show_default=True)
@click.option("--p-method", type=click.Choice(["asymptotic", "bootstrap", "none"]),
              default="bootstrap", show_default=True)
@click.option("--bootstrap-b", type=int, default=199, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_SEED_OPTION
@_wrap_errors
def gof_cmd(scores_path, model_path, origin, feature_count, kind, p_method, bootstrap_b, out, seed):
    """Test scores against a model with the KS and AD statistics."""
    dataset = load_scores(scores_path)
    sample = dataset.scores(origin=origin, feature_count=feature_count)
    model = load_model(model_path).model
    kinds = ["KS", "AD"] if kind == "both" else [kind]
    if p_method == "asymptotic" and "AD" in kinds:
        raise DomainError("asymptotic p-values are only available for KS")
    outcomes = []
    for stat_kind in kinds:
        if p_method == "bootstrap":
            outcomes.append(bootstrap_pvalue(sample, model, stat_kind, bootstrap_b, seed))
        elif p_method == "asymptotic":
            d = ks_statistic(sample, model)
            outcomes.append(GofOutcome("KS", d, asymptotic_ks_pvalue(d, len(sample)), "asymptotic"))
        else:
            stat_fn = ks_statistic if stat_kind == "KS" else ad_statistic
            outcomes.append(GofOutcome(stat_kind, stat_fn(sample, model), None, "none"))
    config = dict(subcommand="gof", scores=str(scores_path), model=str(model_path), origin=origin,
                  feature_count=feature_count, kind=kind, p_method=p_method, bootstrap_b=bootstrap_b)
    _emit_json(
        {
            "outcomes": [
                {
                    "statistic_kind": o.statistic_kind,
                    "statistic": o.statistic,
                    "p_value": o.p_value,
                    "p_method": o.p_method,
                }
                for o in outcomes
            ],
            "n": int(len(sample)),
            "meta": build_meta(seed, config),
        },
        out,
    )


@main.command("tails")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Model JSON for the expected column (default: shipped reference mixture).")
@click.option("--cutpoints", default="0,25,50", show_default=True)
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Observed scores CSV for the observed columns.")
@click.option("--origin", type=click.Choice(["mated", "nonmated"]), default="nonmated", show_default=True)
@click.option("--counts", default=None, help="Pre-binned exceedance counts, e.g. '35,14,3'.")
@click.option("--total", type=int, default=None, help="Total observations behind --counts.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_wrap_errors
def tails_cmd(model_path, cutpoints, scores_path, origin, counts, total, out):
    """Audit a model's right tail against observed data, per 100,000."""
    model = _load_model_arg(model_path, default_name="nonmated_15.json")
    cuts = _parse_float_list(cutpoints, "cutpoints")
    if scores_path is not None:
        observed = load_scores(scores_path).scores(origin=origin)
        audit = tail_audit(model, observed, cuts)
    elif counts is not None:
        if total is None:
            raise click.BadParameter("--counts requires --total")
        audit = TailAudit.from_counts(cuts, [int(c) for c in _parse_float_list(counts, "counts")], total, model=model)
    else:
        audit = TailAudit.from_model(model, cuts)
    config = dict(subcommand="tails", model=model_path or "builtin", cutpoints=cutpoints,
                  scores=scores_path, origin=origin, counts=counts, total=total)
    rows = []
    for i, c in enumerate(audit.cutpoints):
        rows.append(
            [
                c,
                audit.expected_per_100k[i] if audit.expected_per_100k is not None else None,
                audit.observed_count[i] if audit.observed_count is not None else None,
                audit.observed_total,
                audit.observed_per_100k[i] if audit.observed_per_100k is not None else None,
            ]
        )
    write_csv(out, ["cutpoint", "expected_per_100k", "observed_count", "observed_total", "observed_per_100k"],
              rows, meta=build_meta(0, config))
    click.echo(f"wrote {len(rows)} cutpoints to {out}")


@main.command("sim-pvalues")
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--origin", type=click.Choice(["mated", "nonmated"]), default="nonmated", show_default=True)
@click.option("--feature-count", type=int, default=None)
@click.option("--reps", type=int, default=200, show_default=True)
@click.option("--fraction", type=float, default=0.75, show_default=True)
@click.option("--resample-n", type=int, default=1500, show_default=True)
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--restarts", type=int, default=1, show_default=True)
@click.option("--ks-p", type=click.Choice(["asymptotic", "bootstrap"]), default="asymptotic", show_default=True)
@click.option("--bootstrap-b", type=int, default=199, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_SEED_OPTION
@_wrap_errors
def sim_pvalues(scores_path, origin, feature_count, reps, fraction, resample_n, k, restarts,
                ks_p, bootstrap_b, workers, out, seed):
    """Run the split/fit/test/resample p-value study; one CSV row per replicate."""
    dataset = load_scores(scores_path)
    data = dataset.scores(origin=origin, feature_count=feature_count)
    result = pvalue_study(
        data,
        reps=reps,
        fraction=fraction,
        resample_n=resample_n,
        fit_config=FitConfig(k=k, restarts=restarts),
        p_methods=(ks_p, "bootstrap"),
        bootstrap_b=bootstrap_b,
        seed=seed,
        workers=workers,
    )
    config = dict(subcommand="sim-pvalues", scores=str(scores_path), origin=origin,
                  feature_count=feature_count, reps=reps, fraction=fraction, resample_n=resample_n,
                  k=k, restarts=restarts, ks_p=ks_p, bootstrap_b=bootstrap_b)
    rows: list[list] = []
    kept = iter(zip(result.ks_observed, result.ad_observed, result.ks_null, result.ad_null))
    missing = set(result.missing)
    for rep in range(result.reps):
        if rep in missing:
            rows.append([rep, None, None, None, None])
        else:
            ks_o, ad_o, ks_n, ad_n = next(kept)
            rows.append([rep, ks_o, ad_o, ks_n, ad_n])
    meta = build_meta(seed, config, extra={"missing": len(result.missing)})
    write_csv(out, ["rep", "ks_observed", "ad_observed", "ks_null", "ad_null"], rows, meta=meta)
    click.echo(f"wrote {result.reps} replicates to {out} ({len(result.missing)} missing)")


@main.command("sim-toy")
@click.option("--reps", type=int, default=1000, show_default=True)
@click.option("--pop-mean", type=float, default=0.0, show_default=True)
@click.option("--between-sd", type=float, default=1.0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_SEED_OPTION
@_wrap_errors
def sim_toy(reps, pop_mean, between_sd, out, seed):
    """Run the toy convergence study; one CSV row per draw."""
    records = toy_study(default_toy_scenarios(pop_mean=pop_mean, between_sd=between_sd), reps, seed=seed)
    config = dict(subcommand="sim-toy", reps=reps, pop_mean=pop_mean, between_sd=between_sd)
    rows = [[r.scenario, r.hypothesis, r.rep, r.true_lr, r.frstat_like, r.saturated] for r in records]
    write_csv(out, ["scenario", "hypothesis", "rep", "true_lr", "frstat_like", "saturated"],
              rows, meta=build_meta(seed, config))
    click.echo(f"wrote {len(rows)} rows to {out}")


@main.command("thresholds")
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--mated-model", "mated_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--nonmated-model", "nonmated_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--thresholds", "thresholds_text", default="1,10,100,1000,10000,100000", show_default=True)
@click.option("--out-prefix", default=None, help="Write <prefix>_exclusion.csv and <prefix>_error.csv.")
@click.option("--check", is_flag=True, help="Check a shipped or explicit fixture pair instead of computing.")
@click.option("--exclusion", "exclusion_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Correct-exclusion fixture CSV (with --check; default: shipped).")
@click.option("--error", "error_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Erroneous-identification fixture CSV in percent (with --check; default: shipped).")
@_wrap_errors
def thresholds_cmd(scores_path, mated_path, nonmated_path, thresholds_text, out_prefix,
                   check, exclusion_path, error_path):
    """Audit decision-rule thresholds, or check a published table pair."""
    thresholds = _parse_float_list(thresholds_text, "thresholds")
    if check:
        excl = load_threshold_table(exclusion_path or packaged_data_path("table5a_exclusion.csv"),
                                    "correct_exclusion")
        err = load_threshold_table(error_path or packaged_data_path("table5a_error.csv"),
                                   "erroneous_identification", percent=True)
        violations = table_fixture_check(excl, err)
        _emit_json(
            {
                "cells": len(excl.feature_counts) * len(excl.thresholds),
                "violations": [
                    {
                        "feature_count": v.feature_count,
                        "threshold": v.threshold,
                        "exclusion_rate": v.exclusion_rate,
                        "identification_rate": v.identification_rate,
                        "deviation": v.deviation,
                    }
                    for v in violations
                ],
            },
            None,
        )
        if violations:
            sys.exit(1)
        return
    if scores_path is None or out_prefix is None:
        raise click.BadParameter("compute mode needs --scores and --out-prefix")
    mated = _load_model_arg(mated_path) if mated_path else None
    nonmated = _load_model_arg(nonmated_path, default_name="nonmated_15.json")
    dataset = load_scores(scores_path)
    records = []
    for rec in dataset.records:
        if rec.origin != "nonmated":
            continue
        mated_model = mated if mated is not None else _default_mated()
        rep = evidence_numbers(mated_model, nonmated, rec.score)
        records.append(RatioRecord(ratio=rep.ratio, origin=rec.origin, feature_count=rec.feature_count))
    excl_table, err_table = threshold_study(records, thresholds)
    config = dict(subcommand="thresholds", scores=str(scores_path), mated_model=mated_path or "builtin",
                  nonmated_model=nonmated_path or "builtin", thresholds=thresholds_text)
    meta = build_meta(0, config)
    for table, suffix in ((excl_table, "exclusion"), (err_table, "error")):
        rows = [
            [fc, table.pair_counts[i], *table.rates[i]]
            for i, fc in enumerate(table.feature_counts)
        ]
        write_csv(f"{out_prefix}_{suffix}.csv",
                  ["feature_count", "pairs", *[format_value(t) for t in table.thresholds]],
                  rows, meta=meta)
    click.echo(f"wrote {out_prefix}_exclusion.csv and {out_prefix}_error.csv")


def _default_mated() -> MixtureModel:
    from .experiments import DEFAULT_MATED_MODEL

    return DEFAULT_MATED_MODEL


@main.command("report")
@click.option("--mated", "mated_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--nonmated", "nonmated_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--score", type=float, required=True)
@_wrap_errors
def report_cmd(mated_path, nonmated_path, score):
    """Print the reporting sentence for one observed score."""
    mated = load_model(mated_path).model
    nonmated = load_model(nonmated_path).model
    rep = evidence_numbers(mated, nonmated, score)
    click.echo(render_report(rep))


def _one_significant_figure(x: float) -> float:
    if x <= 0.0 or not math.isfinite(x):
        return x
    exponent = math.floor(math.log10(x))
    base = 10.0**exponent
    return round(x / base) * base


def render_report(rep) -> str:
    """Fill the reporting template for an evidence report.

    The ratio is rounded to one significant figure; the direction word is
    elided when the rounded factor is 1; the absolute risk of erroneous
    identification is always appended, because the ratio alone hides its
    magnitude.
    """
    if rep.saturated:
        return (
            "The risk of erroneous identification at this score is below the smallest "
            "representable probability; the tail ratio is saturated and no finite factor "
            "can be reported. The risk of erroneous identification is 0 at double precision."
        )
    if rep.ratio >= 1.0:
        factor = _one_significant_figure(rep.ratio)
        direction = "greater"
    else:
        factor = _one_significant_figure(1.0 / rep.ratio)
        direction = "smaller"
    if factor == 1.0:
        body = (
            "the risk of erroneous exclusion is 1 times the risk of erroneous identification"
        )
    else:
        body = (
            f"the risk of erroneous exclusion is {factor:g} times {direction} than "
            "the risk of erroneous identification"
        )
    return (
        f"Based on the observed similarity score, {body}. "
        f"The risk of erroneous identification is {rep.beta:.2g}."
    )


if __name__ == "__main__":
    main()
