"""Partially linear spatial models with bivariate penalized splines over triangulations."""

import json
import os
from pathlib import Path

_bundled = Path(__file__).resolve().parent / "data"
if _bundled.is_dir():
    os.environ.setdefault("PLSM_DATA_DIR", str(_bundled))

from ._plsm import (
    Basis,
    Error,
    InputError,
    Model,
    NumericalError,
    bundled_meshes,
    fit,
    scad_threshold,
    scad_value,
)
from . import _plsm

__all__ = [
    "Basis",
    "Error",
    "InputError",
    "Model",
    "NumericalError",
    "bundled_meshes",
    "fit",
    "mesh_check",
    "scad_threshold",
    "scad_value",
    "simulate",
]


def simulate(**kwargs):
    """Run a Monte Carlo study; returns the metrics, configuration and per-replication records as a dict."""
    return json.loads(_plsm.simulate_json(**kwargs))


def mesh_check(mesh):
    """Validate a mesh and return its report as a dict."""
    return json.loads(_plsm.mesh_check_json(mesh))
