"""
Configuration of an instability experiment, split by concern, and its TOML file format.

The file uses dotted keys, e.g.::

    physics.c = 3.0
    grid.nx = 1024
    run.delta_list = [1e-3, 1e-4, 1e-5]
    out.dir = "outputs"
"""
from __future__ import annotations

import tomllib
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from public import public
from typing_extensions import Self

from chkpi.internal.solitary_wave import default_half_length, validate_parameters

DEFAULT_THETA_FACTOR = 0.05


@public
@dataclass(frozen=True)
class PhysicsConfiguration:
    """
    :ivar c: The wave speed c.
    :ivar kappa: The parameter κ.
    :ivar epsilon: The regularization strength of 𝒥^ε. Zero is the unregularized equation.
    """

    c: float
    kappa: float
    epsilon: float

    @classmethod
    def new(cls, *, c: float = 3.0, kappa: float = 1.0, epsilon: float = 0.0) -> Self:
        validate_parameters(c, kappa)
        if epsilon < 0:
            error_message = f'The regularization strength must be nonnegative, but {epsilon} was given.'
            raise ValueError(error_message)
        return cls(c=float(c), kappa=float(kappa), epsilon=float(epsilon))

    @property
    def amplitude(self) -> float:
        return self.c - 2 * self.kappa


@public
@dataclass(frozen=True)
class GridConfiguration:
    """
    :ivar nx: The number of x-nodes.
    :ivar lx: The half length of the x-interval. None derives it from the decay rate of the wave.
    :ivar ny: The number of transverse nodes.
    """

    nx: int
    lx: float | None
    ny: int

    @classmethod
    def new(cls, *, nx: int = 1024, lx: float | None = None, ny: int = 32) -> Self:
        if nx < 8 or ny < 2 or ny % 2 != 0:
            error_message = f'The grid needs nx ≥ 8 and an even ny ≥ 2, but nx = {nx} and ny = {ny} were given.'
            raise ValueError(error_message)
        return cls(nx=int(nx), lx=None if lx is None else float(lx), ny=int(ny))

    def half_length(self, physics: PhysicsConfiguration) -> float:
        if self.lx is not None:
            return self.lx
        return default_half_length(physics.c, physics.kappa)


@public
@dataclass(frozen=True)
class SpectrumConfiguration:
    """
    :ivar k_min: The smallest scanned wavenumber.
    :ivar k_max: The largest scanned wavenumber. None scans up to twice the analytic bound on the unstable band.
    :ivar n_samples: The number of scanned wavenumbers.
    :ivar tol_growth: The real part a growth rate must exceed to count as unstable.
    :ivar workers: The number of threads of the scan.
    :ivar k0: The base transverse frequency. None uses the most unstable scanned wavenumber.
    """

    k_min: float
    k_max: float | None
    n_samples: int
    tol_growth: float
    workers: int
    k0: float | None

    @classmethod
    def new(
            cls,
            *,
            k_min: float = 0.0,
            k_max: float | None = None,
            n_samples: int = 41,
            tol_growth: float = 1e-4,
            workers: int = 1,
            k0: float | None = None,
    ) -> Self:
        return cls(k_min=float(k_min), k_max=k_max, n_samples=int(n_samples), tol_growth=float(tol_growth),
                   workers=int(workers), k0=k0)


@public
@dataclass(frozen=True)
class RunConfiguration:
    """
    :ivar delta_list: The perturbation amplitudes δ.
    :ivar theta: The escape amplitude θ. None uses 0.05(c − 2κ).
    :ivar hierarchy_order: The order M of the approximate solution.
    :ivar sobolev_s: The Sobolev index of the monitored norms.
    :ivar time_step: The step size. None uses half the explicit stability bound.
    :ivar sample_stride: The number of steps between recorded samples.
    :ivar blowup_slope: The wave breaking guard on max |u_x|. None uses 50(c − 2κ).
    :ivar horizon_factor: Simulations run to this multiple of the predicted escape time.
    :ivar workers: The number of amplitudes simulated concurrently, each with its own simulator.
    """

    delta_list: tuple[float, ...]
    theta: float | None
    hierarchy_order: int
    sobolev_s: float
    time_step: float | None
    sample_stride: int
    blowup_slope: float | None
    horizon_factor: float
    workers: int

    @classmethod
    def new(
            cls,
            *,
            delta_list: tuple[float, ...] | list[float] = (1e-3, 1e-4, 1e-5),
            theta: float | None = None,
            hierarchy_order: int = 2,
            sobolev_s: float = 0.0,
            time_step: float | None = None,
            sample_stride: int = 10,
            blowup_slope: float | None = None,
            horizon_factor: float = 1.2,
            workers: int = 1,
    ) -> Self:
        if not 0 <= hierarchy_order <= 4:
            error_message = f'The hierarchy order must be in 0..4, but {hierarchy_order} was given.'
            raise ValueError(error_message)
        if workers < 1:
            error_message = f'The worker count must be at least 1, but {workers} was given.'
            raise ValueError(error_message)
        if sample_stride < 1:
            error_message = f'The sample stride must be at least 1, but {sample_stride} was given.'
            raise ValueError(error_message)
        return cls(delta_list=tuple(float(delta) for delta in delta_list), theta=theta,
                   hierarchy_order=int(hierarchy_order), sobolev_s=float(sobolev_s), time_step=time_step,
                   sample_stride=int(sample_stride), blowup_slope=blowup_slope, horizon_factor=float(horizon_factor),
                   workers=int(workers))


@public
@dataclass(frozen=True)
class OutputConfiguration:
    """
    :ivar dir: The output directory.
    :ivar snapshots: Whether the final simulated states are written as snapshots.
    """

    dir: Path
    snapshots: bool

    @classmethod
    def new(cls, *, dir: Path | str = Path('outputs'), snapshots: bool = False) -> Self:  # noqa A002
        return cls(dir=Path(dir), snapshots=bool(snapshots))


@public
@dataclass(frozen=True)
class TrackingConfiguration:
    """
    :ivar wandb_project: The wandb project to log to. No wandb run is created when None.
    :ivar wandb_entity: The wandb entity to log to.
    """

    wandb_project: str | None
    wandb_entity: str | None

    @classmethod
    def new(cls, *, wandb_project: str | None = None, wandb_entity: str | None = None) -> Self:
        return cls(wandb_project=wandb_project, wandb_entity=wandb_entity)


SECTION_TYPES = {
    'physics': PhysicsConfiguration,
    'grid': GridConfiguration,
    'spectrum': SpectrumConfiguration,
    'run': RunConfiguration,
    'out': OutputConfiguration,
    'tracking': TrackingConfiguration,
}


@public
@dataclass(frozen=True)
class ExperimentConfiguration:
    """
    The complete configuration of an instability experiment.
    """

    physics: PhysicsConfiguration = field(default_factory=PhysicsConfiguration.new)
    grid: GridConfiguration = field(default_factory=GridConfiguration.new)
    spectrum: SpectrumConfiguration = field(default_factory=SpectrumConfiguration.new)
    run: RunConfiguration = field(default_factory=RunConfiguration.new)
    out: OutputConfiguration = field(default_factory=OutputConfiguration.new)
    tracking: TrackingConfiguration = field(default_factory=TrackingConfiguration.new)

    @classmethod
    def new(cls, **sections: dict[str, Any]) -> Self:
        """
        Creates a configuration from one keyword dictionary per section, e.g., `new(physics={'c': 4.0})`.

        :raises ValueError: If a section or key is unknown, or if a δ lies outside (0, θ).
        """
        built = {}
        for section_name, values in sections.items():
            if section_name not in SECTION_TYPES:
                error_message = f'Unknown configuration section `{section_name}`.'
                raise ValueError(error_message)
            section_type = SECTION_TYPES[section_name]
            known_keys = {section_field.name for section_field in fields(section_type)}
            for key in values:
                if key not in known_keys:
                    error_message = f'Unknown configuration key `{section_name}.{key}`.'
                    raise ValueError(error_message)
            built[section_name] = section_type.new(**values)
        configuration = cls(**built)
        configuration.validate()
        return configuration

    @property
    def theta(self) -> float:
        if self.run.theta is not None:
            return float(self.run.theta)
        return DEFAULT_THETA_FACTOR * self.physics.amplitude

    @property
    def half_length(self) -> float:
        return self.grid.half_length(self.physics)

    def validate(self):
        for delta in self.run.delta_list:
            if not 0 < delta < self.theta:
                error_message = f'Every δ must lie in (0, θ) = (0, {self.theta:.4g}), but δ = {delta} was given.'
                raise ValueError(error_message)

    def to_dict(self) -> dict[str, Any]:
        dictionary = asdict(self)
        dictionary['out']['dir'] = str(self.out.dir)
        dictionary['run']['delta_list'] = list(self.run.delta_list)
        return dictionary


def parse_override(override: str) -> tuple[str, Any]:
    """
    Parses a `key=value` override, reading the value as TOML and falling back to a bare string.

    :param override: The override, e.g., `run.theta=0.1`.
    :return: The dotted key and the value.
    """
    key, separator, raw_value = override.partition('=')
    if not separator or not key.strip():
        error_message = f'An override must look like `section.key=value`, but `{override}` was given.'
        raise ValueError(error_message)
    try:
        value = tomllib.loads(f'value = {raw_value.strip()}')['value']
    except tomllib.TOMLDecodeError:
        value = raw_value.strip()
    return key.strip(), value


def _set_dotted(sections: dict[str, dict[str, Any]], dotted_key: str, value: Any):
    section_name, separator, key = dotted_key.partition('.')
    if not separator or '.' in key:
        error_message = f'Configuration keys must look like `section.key`, but `{dotted_key}` was given.'
        raise ValueError(error_message)
    sections.setdefault(section_name, {})[key] = value


def load_configuration(path: Path | None = None, overrides: list[str] | tuple[str, ...] = ()
                       ) -> ExperimentConfiguration:
    """
    Reads a configuration file and applies `key=value` overrides after it.

    :param path: The TOML file. None starts from the defaults.
    :param overrides: The overrides.
    :return: The configuration.
    :raises ValueError: If a key is unknown or a value is invalid.
    """
    sections: dict[str, dict[str, Any]] = {}
    if path is not None:
        document = tomllib.loads(Path(path).read_text())
        for section_name, values in document.items():
            if not isinstance(values, dict):
                error_message = f'Configuration key `{section_name}` must be namespaced, e.g., `physics.c`.'
                raise ValueError(error_message)
            for key, value in values.items():
                _set_dotted(sections, f'{section_name}.{key}', value)
    for override in overrides:
        _set_dotted(sections, *parse_override(override))
    return ExperimentConfiguration.new(**sections)

