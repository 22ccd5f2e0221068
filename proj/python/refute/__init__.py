"""Python access to the refute core. Reports come back as plain dicts."""

import json

from . import _core
from ._core import ConfigError, ConsistencyError, DataError, Error, WeakIdentification

__all__ = [
    "ConfigError",
    "ConsistencyError",
    "DataError",
    "Error",
    "WeakIdentification",
    "analyze_space",
    "critical_value",
    "late_point",
    "min_efficiency_loss",
    "roy_bounds",
    "run",
    "true_identified_late",
    "wald",
]


def run(*args):
    """Run a CLI command in-process. Returns (exit code, parsed JSON report or None, stderr)."""
    code, out, err = _core.run([str(a) for a in args])
    report = json.loads(out) if out.strip().startswith("{") else None
    return code, report, err


def late_point(y, d, z, config=None):
    """Known-tail LATE interval. config is a RunConfig dict; None picks the data-driven defaults."""
    return json.loads(_core.late_point(list(y), list(d), list(z), json.dumps(config) if config else ""))


def wald(y, d, z, alpha=0.05):
    return json.loads(_core.wald(list(y), list(d), list(z), alpha))


def true_identified_late(design="builtin:normal-mix"):
    return _core.true_identified_late(design)


def min_efficiency_loss(cells):
    """cells: the eight probabilities Pr(Y=y, D=d, Z=z) at index 4y + 2d + z."""
    return _core.min_efficiency_loss(list(cells))


def roy_bounds(cells):
    return json.loads(_core.roy_bounds(list(cells)))


def critical_value(columns, B=1000, alpha=0.05, seed=1):
    """Bootstrap (1 - alpha) quantile of the joint empirical-process supremum over the columns."""
    columns = list(columns)
    if columns and not hasattr(columns[0], "__len__"):
        columns = [columns]
    cols = [[float(v) for v in c] for c in columns]
    return _core.critical_value(cols, B, alpha, seed)


def analyze_space(space, A, ext=None, H=None):
    """space: dict with "outcomes" and "structures"; A, ext, H: lists of structure names."""
    return json.loads(_core.analyze_space(json.dumps(space), list(A), ext, H))
