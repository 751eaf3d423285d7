"""Elastic functional data pipeline: alignment, efPCA, random forests and
permutation feature importance, backed by the C++ core."""

import json

from . import _veesa
from ._veesa import (
    amplitude_distance,
    from_srvf,
    karcher_mean,
    num_threads,
    optimal_warp,
    phase_distance,
    set_num_threads,
    simulate,
    to_srvf,
)

__all__ = [
    "Pipeline",
    "amplitude_distance",
    "baseline",
    "cross_validate",
    "from_srvf",
    "karcher_mean",
    "num_threads",
    "optimal_warp",
    "phase_distance",
    "set_num_threads",
    "simulate",
    "to_srvf",
    "train",
]

Pipeline = _veesa.Pipeline


def _config_text(config):
    # dicts are accepted for convenience; the core parses JSON text
    if config is None:
        return "{}"
    if isinstance(config, str):
        return config
    return json.dumps(config)


def train(t, values, labels, config=None):
    return Pipeline.train(t, values, [str(x) for x in labels], _config_text(config))


def baseline(t, train, train_labels, test, test_labels=None, config=None):
    if test_labels is not None:
        test_labels = [str(x) for x in test_labels]
    return _veesa.baseline(t, train, [str(x) for x in train_labels], test, test_labels, _config_text(config))


def cross_validate(t, values, labels, config=None, folds=None, repeats=None, seed=None):
    cells = _veesa.cross_validate(t, values, [str(x) for x in labels], _config_text(config), folds, repeats, seed)
    return [(json.loads(c), acc) for c, acc in cells]

