"""Python access to the paraqnd simulator core."""

import json

from ._core import (
    ConfigError,
    DomainError,
    ExperimentError,
    TruncationError,
    __version__,
    bogoliubov_params,
    coherent_state,
    feasibility_check,
    jump_probability,
    kraus_amplitude,
    povm_purity,
    pump_width_decay,
    squeezed_number_state,
    squeezing_db,
    width_from_db,
)
from . import _core


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def canonical_config(config):
    """Parsed config with defaults filled in, as a dict."""
    return json.loads(_core.canonical_config(_text(config)))


def run_experiment(config, out=""):
    """Runs one experiment and returns its manifest as a dict."""
    return json.loads(_core.run_experiment(_text(config), str(out)))


def run_criteria(criteria, seed=1, threads=1):
    return json.loads(_core.run_criteria(list(criteria), seed, threads))
