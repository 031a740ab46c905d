"""Python interface to the spamsim simulator."""

import json

from ._spamsim import (  # noqa: F401
    ConfigError,
    InseparableDistributions,
    __version__,
    bias_closed_form,
    calibrate_threshold as _calibrate_threshold,
    detection_error_budget,
    evaluate_flags,
    fit_lifetime,
    main,
    predict_rejection,
    run as _run,
    simulate_counts,
    wilson_interval,
)


def run(config=None):
    """Run an experiment. `config` is a dict shaped like the JSON config file."""
    return json.loads(_run(json.dumps(config) if config is not None else ""))


def calibrate_threshold(bright_counts, dark_counts):
    return json.loads(_calibrate_threshold(list(bright_counts), list(dark_counts)))
