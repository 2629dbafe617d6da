"""Degree-phase analytics and models for two-tier overlays."""

import json

from ._core import (
    Error,
    QueueParams,
    blocking_probability,
    bdtm_equilibrium,
    bdtm_transfer,
    calibrate_mu,
    classify,
    ctdm_equilibrium,
    ctdm_generator,
    ctdm_transfer,
    estimate_lambda,
    generate,
    limewire_model,
    profile_names,
    region_equilibrium,
    region_of,
    simulate,
    version,
)
from ._core import model_report as _model_report


def model_report(literal=False, out_dir="."):
    """Model command report as a dict."""
    return json.loads(_model_report(literal, str(out_dir)))


__version__ = version()

__all__ = [
    "Error",
    "QueueParams",
    "blocking_probability",
    "bdtm_equilibrium",
    "bdtm_transfer",
    "calibrate_mu",
    "classify",
    "ctdm_equilibrium",
    "ctdm_generator",
    "ctdm_transfer",
    "estimate_lambda",
    "generate",
    "limewire_model",
    "model_report",
    "profile_names",
    "region_equilibrium",
    "region_of",
    "simulate",
    "version",
]
