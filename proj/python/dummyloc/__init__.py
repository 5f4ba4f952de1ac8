"""Dummy-location generation, entropy metrics and the Viterbi trajectory attack."""

import json

from ._core import (
    Error,
    GridSpec,
    HistoryModel,
    LocationSet,
    ZeroRowPolicy,
    brute_force_path,
    cell_entropy,
    default_config,
    dls_gen,
    entropy,
    exhaustive_gen,
    greedy_gen,
    max_product_weights,
    normalize_config,
    normalized_cell_entropy,
    normalized_priors,
    parse_plt,
    posterior_pair,
    posterior_trajectory,
    protection_rate,
    query_probability,
    random_gen,
    rdg_gen,
    read_corpus,
    results_csv,
    transition_entropy_pair,
    transition_entropy_trajectory,
    transition_probabilities,
    viterbi_attack,
)
from ._core import run_experiment as _run_experiment

__all__ = [name for name in dir() if not name.startswith("_")] + ["run_experiment"]


def run_experiment(config=None, **overrides):
    """Run a benchmark. `config` is a dict or JSON string; keyword arguments
    override top-level keys."""
    if config is None:
        config = {}
    elif isinstance(config, str):
        config = json.loads(config)
    config = {**config, **overrides}
    return _run_experiment(json.dumps(config))
