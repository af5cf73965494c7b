"""Python access to the lorentz_index experiments."""

import json
from pathlib import Path

from . import _core
from ._core import ConfigError, LidxError, experiment_kinds

__all__ = [
    "ConfigError",
    "LidxError",
    "experiment_kinds",
    "run",
    "run_file",
    "config",
    "eta",
    "crossing_count",
    "equal_index",
]


def run(text, jobs=1):
    """Run an experiment from INI text; returns the report dict (csv contents under "csv")."""
    return json.loads(_core.run_text(text, jobs))


def run_file(path, jobs=1):
    return run(Path(path).read_text(), jobs)


def config(text):
    """Resolved config as a dict."""
    return json.loads(_core.config_json(text))


def eta(b, method="hurwitz", tol=1e-6):
    return json.loads(_core.eta(b, method, tol))


def crossing_count(a_minus, a_plus, alpha=0.5, modes=16):
    return _core.crossing_count(a_minus, a_plus, alpha, modes)


def equal_index(dim_x, dim_y, dim_h, seed):
    return json.loads(_core.equal_index(dim_x, dim_y, dim_h, seed))
