"""Python access to the csim frame-consistency simulator."""

import json
from pathlib import Path

from ._csim import (
    ConfigError,
    UnsupportedError,
    collapse,
    conformal_factor,
    from_alt,
    to_alt,
    version,
)
from . import _csim

__all__ = [
    "ConfigError",
    "UnsupportedError",
    "collapse",
    "compare_frames",
    "conformal_factor",
    "from_alt",
    "load_scenario",
    "to_alt",
    "verify",
    "version",
]


def _text(config):
    path = Path(config)
    if "\n" not in str(config) and path.exists():
        return path.read_text()
    return str(config)


def load_scenario(config):
    """Parsed scenario (path or config text) as a dict."""
    return json.loads(_csim.scenario_json(_text(config)))


def compare_frames(config):
    """Runs both frames; returns the consistency report with correlator matrices."""
    text, corr_t, corr_eta, labels = _csim.compare_frames(_text(config))
    rep = json.loads(text)
    rep["corr_t"] = corr_t
    rep["corr_eta"] = corr_eta
    rep["labels"] = labels
    return rep


def verify(seed=20240101, inject_fault=False):
    return json.loads(_csim.verify_json(seed, inject_fault))
