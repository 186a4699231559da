"""Stationary Gaussian noise families and their autocovariance functions

Every model is normalized so that rho(0) = 1 and the sampling step h is 1.
The AR(1) and MA(1) parametrizations are conventional choices:

- AR1: rho(j) = phi**j
- MA1: xi_n = e_n + psi * e_{n-1}, rescaled to unit variance, so
  rho(1) = psi / (1 + psi**2) and rho(j) = 0 beyond lag 1
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Union

import numpy as np
from scipy import linalg

from fgnarx.exceptions import DegenerateCovarianceError, NoiseModelError


class NoiseKind(Enum):
    """Supported noise families"""
    FGN = 'fgn'
    AR1 = 'ar1'
    MA1 = 'ma1'
    WHITE = 'white'


# Parameter owned by each family
_FAMILY_PARAMETER = {
    NoiseKind.FGN: 'hurst',
    NoiseKind.AR1: 'phi',
    NoiseKind.MA1: 'psi',
    NoiseKind.WHITE: None,
}


@dataclass(frozen=True)
class NoiseModel:
    """Centred stationary Gaussian noise with unit variance

    Only the parameter belonging to ``kind`` may be set; the others stay None.
    """
    kind: NoiseKind
    hurst: Optional[float] = None
    phi: Optional[float] = None
    psi: Optional[float] = None
    step: float = 1.0

    def __post_init__(self):
        kind = self.kind
        if not isinstance(kind, NoiseKind):
            try:
                kind = NoiseKind(str(kind).lower())
            except ValueError:
                choices = ', '.join(k.value for k in NoiseKind)
                raise NoiseModelError(f'kind must be one of {{{choices}}}, got {self.kind!r}')
            object.__setattr__(self, 'kind', kind)

        if self.step != 1.0:
            raise NoiseModelError('step is fixed to 1 so that rho(0) = 1')

        owned = _FAMILY_PARAMETER[kind]
        for name in ('hurst', 'phi', 'psi'):
            value = getattr(self, name)
            if name == owned:
                if value is None:
                    raise NoiseModelError(f'{name} is required for {kind.value} noise')
                object.__setattr__(self, name, float(value))
            elif value is not None:
                raise NoiseModelError(f'{name} applies only to '
                                      f'{_owner_of(name).value} noise')

        if kind is NoiseKind.FGN and not 0.0 < self.hurst < 1.0:
            raise NoiseModelError('hurst must lie in (0,1)')
        if kind is NoiseKind.AR1 and not -1.0 < self.phi < 1.0:
            raise NoiseModelError('phi must lie in (-1,1)')
        if kind is NoiseKind.MA1 and not math.isfinite(self.psi):
            raise NoiseModelError('psi must be a finite real number')

    @classmethod
    def fgn(cls, hurst: float) -> 'NoiseModel':
        return cls(NoiseKind.FGN, hurst=hurst)

    @classmethod
    def ar1(cls, phi: float) -> 'NoiseModel':
        return cls(NoiseKind.AR1, phi=phi)

    @classmethod
    def ma1(cls, psi: float) -> 'NoiseModel':
        return cls(NoiseKind.MA1, psi=psi)

    @classmethod
    def white(cls) -> 'NoiseModel':
        return cls(NoiseKind.WHITE)

    @property
    def label(self) -> str:
        """Short human readable name, e.g. ``fgn(hurst=0.6)``"""
        owned = _FAMILY_PARAMETER[self.kind]
        if owned is None:
            return self.kind.value
        return f'{self.kind.value}({owned}={getattr(self, owned):g})'

    def to_dict(self) -> Dict[str, Any]:
        """Serialize to the JSON object form, e.g. ``{"kind": "fgn", "hurst": 0.6}``"""
        data: Dict[str, Any] = {'kind': self.kind.value}
        owned = _FAMILY_PARAMETER[self.kind]
        if owned is not None:
            data[owned] = getattr(self, owned)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'NoiseModel':
        """Build a model from its JSON object form; unknown keys are rejected"""
        if not isinstance(data, dict):
            raise NoiseModelError('noise model must be a JSON object')
        unknown = set(data) - {'kind', 'hurst', 'phi', 'psi', 'step'}
        if unknown:
            raise NoiseModelError(f'unknown noise model keys: {", ".join(sorted(unknown))}')
        if 'kind' not in data:
            raise NoiseModelError('noise model requires a kind')
        return cls(**data)


def _owner_of(parameter: str) -> NoiseKind:
    for kind, owned in _FAMILY_PARAMETER.items():
        if owned == parameter:
            return kind
    raise KeyError(parameter)


def autocovariances(model: NoiseModel, lags: Union[np.ndarray, list]) -> np.ndarray:
    """Vectorized rho(lag) for an array of nonnegative integer lags"""
    lags = np.asarray(lags)
    if lags.size and (lags.min() < 0 or not np.all(np.equal(np.mod(lags, 1), 0))):
        raise NoiseModelError('lag must be a nonnegative integer')
    k = lags.astype(float)

    if model.kind is NoiseKind.FGN:
        two_h = 2.0 * model.hurst
        return 0.5 * (np.abs(k - 1.0) ** two_h + np.abs(k + 1.0) ** two_h
                      - 2.0 * np.abs(k) ** two_h)
    if model.kind is NoiseKind.AR1:
        return model.phi ** k
    if model.kind is NoiseKind.MA1:
        out = np.zeros_like(k)
        out[k == 0] = 1.0
        out[k == 1] = model.psi / (1.0 + model.psi ** 2)
        return out
    return (k == 0).astype(float)


def autocovariance(model: NoiseModel, lag: int) -> float:
    """Autocovariance rho(lag) of the noise, rho(0) = 1"""
    if isinstance(lag, float) and not lag.is_integer():
        raise NoiseModelError('lag must be a nonnegative integer')
    return float(autocovariances(model, np.array([int(lag)]))[0])


def covariance_row(model: NoiseModel, n: int) -> np.ndarray:
    """First row rho(0), ..., rho(n-1) of the n x n Toeplitz covariance"""
    return autocovariances(model, np.arange(n))


def cholesky_factor(model: NoiseModel, n: int) -> np.ndarray:
    """Lower triangular factor L with L L^T equal to the n x n covariance"""
    return _factor(model, _toeplitz(model, n))


def covariance_matrix(model: NoiseModel, n: int) -> np.ndarray:
    """Symmetric Toeplitz covariance of xi_1..xi_n

    The matrix is built from a single row, so it is exactly symmetric, and it
    is checked for positive definiteness by a Cholesky factorization.
    """
    matrix = _toeplitz(model, n)
    _factor(model, matrix)
    return matrix


def _factor(model: NoiseModel, matrix: np.ndarray) -> np.ndarray:
    try:
        return linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError:
        n = matrix.shape[0]
        raise DegenerateCovarianceError(
            f'{model.label} covariance is numerically degenerate at n={n}', n=n)


def _toeplitz(model: NoiseModel, n: int) -> np.ndarray:
    if n < 1:
        raise NoiseModelError('n must be a positive integer')
    return linalg.toeplitz(covariance_row(model, n))
