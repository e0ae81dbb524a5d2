"""Python front end of the ubranch C++ core.

Closed forms are returned as floats; simulations and experiments return dicts decoded from the
core's JSON reports.
"""

import json as _json

try:
    from . import _ubranch as _core
except ImportError:  # in-tree build: the module sits on PYTHONPATH next to the sources
    import _ubranch as _core

DomainError = _core.DomainError
InvariantError = _core.InvariantError
UnsupportedCriticalCase = _core.UnsupportedCriticalCase
ConfigError = _core.ConfigError
schema_version = _core.schema_version

gw_mean = _core.gw_mean
extinction_prob = _core.extinction_prob
yule_pmf = _core.yule_pmf
yule_relative_tail = _core.yule_relative_tail
bd_gf = _core.bd_gf
reduced_gf = _core.reduced_gf
jump_target_pmf = _core.jump_target_pmf
long_jump_prob = _core.long_jump_prob
schedule_lower = _core.schedule_lower
max_line_tail_bound = _core.max_line_tail_bound


def _decoded(fn):
    def wrapper(*args, **kwargs):
        return _json.loads(fn(*args, **kwargs))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


simulate_lines = _decoded(_core.simulate_lines)
simulate_spatial = _decoded(_core.simulate_spatial)
extinction_experiment = _decoded(_core.extinction_experiment)
yule_law_experiment = _decoded(_core.yule_law_experiment)
validate_suite = _decoded(_core.validate_suite)
domination_quantiles = _decoded(_core.domination_quantiles)

__all__ = [
    "DomainError",
    "InvariantError",
    "UnsupportedCriticalCase",
    "ConfigError",
    "schema_version",
    "gw_mean",
    "extinction_prob",
    "yule_pmf",
    "yule_relative_tail",
    "bd_gf",
    "reduced_gf",
    "jump_target_pmf",
    "long_jump_prob",
    "schedule_lower",
    "max_line_tail_bound",
    "simulate_lines",
    "simulate_spatial",
    "extinction_experiment",
    "yule_law_experiment",
    "validate_suite",
    "domination_quantiles",
]
