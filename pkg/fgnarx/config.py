"""Experiment settings and their JSON persistence"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from fgnarx.design import (InputDesign, check_admissible, design_from_input, optimal_input,
                           zero_input)
from fgnarx.exceptions import ExperimentError, FormatError, NoiseModelError
from fgnarx.formats import load_input
from fgnarx.innovations import InnovationSystem
from fgnarx.noise import NoiseModel

logger = logging.getLogger(__name__)

FILE_PREFIX = 'file:'


class InputKind(Enum):
    """Supported experiment inputs"""
    OPTIMAL = 'optimal'
    ZERO = 'zero'
    FILE = 'file'


def parse_input(spec: str) -> InputKind:
    """Classify an input setting: ``optimal``, ``zero`` or ``file:PATH``"""
    if spec.startswith(FILE_PREFIX):
        if not spec[len(FILE_PREFIX):]:
            raise ExperimentError('input file: requires a path')
        return InputKind.FILE
    try:
        return InputKind(spec)
    except ValueError:
        raise ExperimentError(f"input must be 'optimal', 'zero' or 'file:PATH', got {spec!r}")


def build_design(spec: str, system: InnovationSystem, n: int, theta: float,
                 alternate_start: str = 'even') -> InputDesign:
    """Resolve an input setting to a design for an N-step experiment at theta

    Custom inputs are checked against the energy bound but never rescaled.
    """
    kind = parse_input(spec)
    if kind is InputKind.OPTIMAL:
        return optimal_input(system, n, theta, alternate_start=alternate_start)
    if kind is InputKind.ZERO:
        return zero_input(system, n)
    u = load_input(spec[len(FILE_PREFIX):], n)
    return check_admissible(design_from_input(u, system))


@dataclass
class ExperimentConfig:
    """Monte Carlo study settings

    Defaults describe the full-scale study: N = 2500, 5000 replications of
    fGn noise with H = 0.6 under the optimal input.
    """
    thetas: List[float] = field(default_factory=lambda: [0.4, 0.7, -0.4, -0.7])
    n: int = 2500
    replications: int = 5000
    noise: NoiseModel = field(default_factory=lambda: NoiseModel.fgn(0.6))
    input: str = InputKind.OPTIMAL.value
    seed: int = 20240601
    output_dir: str = 'results'

    # Histogram bins: an integer or the name of a numpy binning rule
    bins: Union[int, str] = 'fd'
    jobs: Optional[int] = None
    consistency_nu: float = 0.1
    alternate_start: str = 'even'
    max_failure_fraction: float = 0.001

    def __post_init__(self):
        if isinstance(self.noise, dict):
            self.noise = NoiseModel.from_dict(self.noise)
        self.thetas = [float(t) for t in self.thetas]
        self.validate()

    def validate(self):
        """Raise ExperimentError on the first invalid setting"""
        if not self.thetas:
            raise ExperimentError('thetas must not be empty')
        for theta in self.thetas:
            if not (math.isfinite(theta) and -1.0 < theta < 1.0):
                raise ExperimentError(f'theta must lie in (-1,1), got {theta}')
        if int(self.n) != self.n or self.n < 2:
            raise ExperimentError('n must be an integer >= 2')
        if int(self.replications) != self.replications or self.replications < 2:
            raise ExperimentError('replications must be an integer >= 2')
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ExperimentError('seed must be an unsigned 64-bit integer')
        parse_input(self.input)
        if isinstance(self.bins, int):
            if self.bins < 1:
                raise ExperimentError('bins must be a positive integer or a binning rule')
        elif self.bins not in ('fd', 'auto', 'sturges', 'scott', 'doane', 'rice', 'sqrt'):
            raise ExperimentError(f'unknown binning rule {self.bins!r}')
        if self.jobs is not None and self.jobs < 1:
            raise ExperimentError('jobs must be a positive integer')
        if not self.consistency_nu > 0.0:
            raise ExperimentError('consistency_nu must be positive')
        if self.alternate_start not in ('even', 'odd'):
            raise ExperimentError("alternate_start must be 'even' or 'odd'")
        if not 0.0 <= self.max_failure_fraction < 1.0:
            raise ExperimentError('max_failure_fraction must lie in [0,1)')

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['noise'] = self.noise.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        """Build settings from a JSON object; unknown keys are rejected"""
        if not isinstance(data, dict):
            raise ExperimentError('experiment settings must be a JSON object')
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ExperimentError(f'unknown settings: {", ".join(sorted(unknown))}')
        try:
            return cls(**data)
        except NoiseModelError as e:
            raise ExperimentError(f'noise: {e}') from e


class ExperimentFile:
    """An experiment configuration stored as versioned JSON"""

    CONFIG_VERSION = '1.0'

    def __init__(self, path: Path, config: Optional[ExperimentConfig] = None):
        self.path = Path(path)
        self.config = config or ExperimentConfig()

    @classmethod
    def load(cls, path: Path) -> 'ExperimentFile':
        """
        Load an experiment file

        Both the versioned envelope ``{"version": ..., "settings": {...}}``
        and a bare settings object are accepted.

        Args:
            path: JSON file

        Returns:
            Loaded ExperimentFile
        """
        path = Path(path)
        if not path.is_file():
            raise FormatError(f'configuration file not found: {path}')
        try:
            with open(path, 'r') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise FormatError(f'cannot read {path}: {e}') from e

        if isinstance(data, dict) and 'settings' in data:
            if data.get('version') != cls.CONFIG_VERSION:
                logger.warning('configuration version mismatch: expected %s, got %s',
                               cls.CONFIG_VERSION, data.get('version'))
            data = data['settings']

        return cls(path, ExperimentConfig.from_dict(data))

    def save(self):
        """Write the configuration with its version envelope"""
        data = {
            'version': self.CONFIG_VERSION,
            'settings': self.config.to_dict(),
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, 'w') as f:
            json.dump(data, f, indent=2)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    return ExperimentFile.load(path).config


def save_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    ExperimentFile(path, config).save()
    return Path(path)


def theta_tag(theta: float) -> str:
    """File name tag for a theta value, e.g. ``0.4`` or ``-0.7``"""
    return np.format_float_positional(theta, trim='-')
