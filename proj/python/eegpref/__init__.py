"""Single-channel EEG Like/Dislike classification: Whittaker low-pass
extraction, nonlinear transform, stratified bootstrap and a small MLP."""

import json as _json

from ._core import (
    Dataset,
    EegprefError,
    Label,
    Metrics,
    MlpModel,
    Signal,
    band_powers,
    bce_loss,
    bootstrap_indices,
    class_variance_stats,
    compute_metrics,
    forward,
    generate_synthetic,
    grad_check,
    highfreq_residual,
    ingest_raw,
    init_mlp,
    load_model,
    nonlinear_transform,
    normalize_zscore,
    parse_label,
    pipeline_keys,
    predict_labels,
    read_canonical_csv,
    resample_to_length,
    save_model,
    smooth_whittaker,
    stratified_split,
    write_canonical_csv,
)
from . import _core

__version__ = "0.1.0"


def compare_pipelines(dataset, **settings):
    """Train the baseline and full arms on one split; returns the report as a dict.

    Keyword arguments use the config-file keys (lambda, transform, boot_mult,
    epochs, seed, ...)."""
    return _json.loads(_core.compare_pipelines(dataset, {k: str(v) for k, v in settings.items()}))


def run_pipeline(input, out, **settings):
    """Full run writing every artifact into `out`; returns the report as a dict."""
    settings = {k: str(v) for k, v in settings.items()}
    settings.update(input=str(input), out=str(out))
    return _json.loads(_core.run_pipeline(settings))
