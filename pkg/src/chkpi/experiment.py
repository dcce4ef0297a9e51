"""
Experiment configuration and orbital distance public interface.
"""
from chkpi.internal.configuration import (
    ExperimentConfiguration,
    GridConfiguration,
    OutputConfiguration,
    PhysicsConfiguration,
    RunConfiguration,
    SpectrumConfiguration,
    TrackingConfiguration,
    load_configuration,
)
from chkpi.internal.orbital_distance import orbital_distance, project_offzero_y
from chkpi.internal.report_outputs import emit_outputs

__all__ = [
    'emit_outputs',
    'ExperimentConfiguration',
    'GridConfiguration',
    'load_configuration',
    'orbital_distance',
    'OutputConfiguration',
    'PhysicsConfiguration',
    'project_offzero_y',
    'RunConfiguration',
    'SpectrumConfiguration',
    'TrackingConfiguration',
]
