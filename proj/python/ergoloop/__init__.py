"""Closed-loop simulation with stochastic agent populations.

Configurations are passed as YAML text (or a path via ``load``); analysis
results come back as plain dicts and lists.
"""

import json
from pathlib import Path

from . import _ergoloop
from ._ergoloop import (
    Error,
    distribution_distance,
    export_dot,
    kde,
    normalize_config,
    run_cli,
    silverman_bandwidth,
    simulate,
)

__version__ = _ergoloop.__version__

__all__ = [
    "Error",
    "distribution_distance",
    "estimate_contraction",
    "export_dot",
    "fairness",
    "kde",
    "load",
    "normalize_config",
    "run_cli",
    "silverman_bandwidth",
    "simulate",
]


def load(path):
    """Reads a configuration file and returns its YAML text."""
    return Path(path).read_text()


def estimate_contraction(yaml, trials=None, seed=None):
    """Contraction estimate with its certificate, as a dict."""
    return json.loads(_ergoloop.estimate_contraction(yaml, trials=trials, seed=seed))


def fairness(yaml, trials=None, seed=None):
    """Equal treatment, equal impact and robustness reports, as a dict."""
    return json.loads(_ergoloop.fairness(yaml, trials=trials, seed=seed))
