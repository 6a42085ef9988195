"""Python bindings for the sgdmlab C++ core."""

import json as _json
from pathlib import Path as _Path

from ._core import (
    Bracket,
    ConfigError,
    DivergenceError,
    EnvelopeParams,
    NoiseModel,
    Objective,
    Schedule,
    Trajectory,
    __version__,
    baseline_envelope,
    calibrate,
    envelope_U,
    envelope_constants,
    gamma1,
    gamma2,
    lyapunov_trace,
    riemann_zeta,
    run_cli,
    run_trajectory,
)
from ._core import run_experiment as _run_experiment


def run_experiment(config, output_dir=None, workers=None):
    """Run a config (YAML text or a path to a YAML file) and return the report as a dict."""
    if isinstance(config, _Path) or (isinstance(config, str) and "\n" not in config and config.endswith((".yaml", ".yml"))):
        config = _Path(config).read_text()
    return _json.loads(_run_experiment(config, output_dir, workers))
