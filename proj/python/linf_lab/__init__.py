"""Python access to linf-lab: operators, closed-form constants and the scenario pipelines."""

import json

from . import _linf
from ._linf import (
    ConeError,
    ConfigError,
    Error,
    derive_R_tilde,
    op_eval,
    relative_eigs,
    sigma,
    sup_levels,
    tau,
    tilde_eval,
)

__all__ = [
    "ConeError",
    "ConfigError",
    "Error",
    "derive_R_tilde",
    "hermitian_constants",
    "kahler_constants",
    "load_scenario",
    "op_eval",
    "relative_eigs",
    "run",
    "sigma",
    "sup_levels",
    "tau",
    "tilde_eval",
]


def kahler_constants(**params):
    return json.loads(_linf.kahler_constants(**params))


def hermitian_constants(**params):
    return json.loads(_linf.hermitian_constants(**params))


def load_scenario(path):
    """Parsed and validated scenario, with defaults filled in."""
    return json.loads(_linf.scenario_json(str(path)))


def run(verb, config=None, out="out"):
    """Runs a CLI verb; returns (exit_code, summary dict)."""
    if verb == "report":
        code, summary = _linf.run_report(str(out))
    else:
        fn = {
            "check": _linf.run_check,
            "verify": _linf.run_verify,
            "sweep": _linf.run_sweep,
            "budget": _linf.run_budget,
        }[verb]
        code, summary = fn(str(config), str(out))
    return code, json.loads(summary)
