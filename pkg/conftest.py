"""Configuration for the pytest tests."""
import os

import matplotlib as mpl
import pytest

mpl.use('Agg')  # Plots are only written to files.

EXCLUDABLE_MARKERS = {
    'functional': 'Mark a test as a functional test.',
    'integration': 'Mark a test as an integration test.',
    'slow': 'Mark a test as a slow test, e.g., a long numerical integration.',
    'external': 'Mark a test as requiring an external resource (e.g. makes a network call to a URL).',
}


def pytest_addoption(parser):
    """Adds an `--exclude-<marker>` option per excludable marker."""
    for marker in EXCLUDABLE_MARKERS:
        parser.addoption(f'--exclude-{marker}', action='store_true', default=False,
                         help=f'Skip tests marked as {marker}.')


def pytest_configure(config):
    for marker, description in EXCLUDABLE_MARKERS.items():
        config.addinivalue_line('markers', f'{marker}: {description}')
    os.environ.setdefault('WANDB_MODE', 'disabled')


def pytest_collection_modifyitems(config, items):
    """Skips the tests whose markers were excluded on the command line."""
    for marker in EXCLUDABLE_MARKERS:
        if not config.getoption(f'--exclude-{marker}'):
            continue
        skip_mark = pytest.mark.skip(reason=f'Options to exclude {marker} tests were passed.')
        for item in items:
            if marker in item.keywords:
                item.add_marker(skip_mark)
