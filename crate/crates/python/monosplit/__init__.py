"""Forward-reflected-backward splitting for monotone inclusions."""

import json

from ._monosplit import (
    Problem,
    Run,
    catalog,
    energy_violations,
    estimate_rate,
    max_stepsize,
    solve,
)

__all__ = [
    "Problem",
    "Run",
    "catalog",
    "energy_violations",
    "estimate_rate",
    "make_problem",
    "max_stepsize",
    "solve",
]


def make_problem(name, seed=0, **params):
    """Build a gallery problem, e.g. ``make_problem("affine_vi", seed=13, n=4)``."""
    return Problem(name, json.dumps(params) if params else None, seed)
