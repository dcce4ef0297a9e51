from __future__ import annotations

import datetime
import logging
import sys

import numpy as np

logger_initialized = False


def create_default_formatter() -> logging.Formatter:
    formatter = logging.Formatter('chkpi [{asctime} {levelname} {name}] {message}', style='{')
    return formatter


def set_up_default_logger(*, verbose: bool | None = None):
    """
    Attaches the package stdout handler to the `chkpi` logger at the info level. Repeated calls only adjust the level.

    :param verbose: Whether to log at the debug level instead of the info level. None keeps the current level.
    """
    global logger_initialized  # noqa PLW0603 : TODO: Replace the module global with a handler lookup on the logger.
    logger = logging.getLogger('chkpi')
    if not logger_initialized:
        formatter = create_default_formatter()
        handler = logging.StreamHandler(sys.stdout)
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.propagate = False
        sys.excepthook = excepthook
        logger.setLevel(logging.INFO)
        logger_initialized = True
    if verbose is not None:
        logger.setLevel(logging.DEBUG if verbose else logging.INFO)


def excepthook(exc_type, exc_value, exc_traceback):
    logger = logging.getLogger('chkpi')
    logger.critical(f'Uncaught exception at {datetime.datetime.now().astimezone()}:')
    logger.handlers[0].flush()
    sys.__excepthook__(exc_type, exc_value, exc_traceback)


def format_amplitude(amplitude: float) -> str:
    """
    Formats a perturbation amplitude for use in file names and log keys, e.g., `1e-04` or `1.5e-04`. Distinct
    amplitudes give distinct strings.

    :param amplitude: The amplitude.
    :return: The formatted string.
    """
    return np.format_float_scientific(amplitude, trim='-', exp_digits=2)
