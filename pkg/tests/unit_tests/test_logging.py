import logging

import pytest

from chkpi.internal.logging import format_amplitude, set_up_default_logger


@pytest.mark.parametrize(('amplitude', 'expected'), [(1e-3, '1e-03'), (1e-4, '1e-04'), (3e-5, '3e-05'),
                                                     (1.5e-4, '1.5e-04'), (1.2e-3, '1.2e-03')])
def test_format_amplitude(amplitude, expected):
    assert format_amplitude(amplitude) == expected


def test_format_amplitude_separates_close_amplitudes():
    amplitudes = [1.5e-4, 2e-4, 1e-3, 1.2e-3, 1.25e-3]
    assert len({format_amplitude(amplitude) for amplitude in amplitudes}) == len(amplitudes)


def test_set_up_default_logger_levels():
    logger = logging.getLogger('chkpi')
    set_up_default_logger(verbose=True)
    assert logger.level == logging.DEBUG
    set_up_default_logger()
    assert logger.level == logging.DEBUG
    set_up_default_logger(verbose=False)
    assert logger.level == logging.INFO
    assert not logger.propagate


def test_set_up_default_logger_adds_one_handler():
    logger = logging.getLogger('chkpi')
    set_up_default_logger()
    handler_count = len(logger.handlers)
    set_up_default_logger()
    assert len(logger.handlers) == handler_count
