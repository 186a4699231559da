"""Innovation representation of a stationary Gaussian noise

For xi_1, xi_2, ... with autocovariance rho, the innovations

    sigma_n eps_n = xi_n - E(xi_n | xi_1, ..., xi_{n-1}) = sum_{m<=n} k(n, m) xi_m

are independent. The whitening kernel k is unit lower triangular and is built
row by row with the Durbin-Levinson recursion

    beta_n = sum_{m<=n} k(n, m) rho(m) / sigma_n^2
    k(n+1, n+1-m) = k(n, n-m) - beta_n k(n, m),   k(n, 0) = 0
    sigma_{n+1}^2 = sigma_n^2 (1 - beta_n^2),      sigma_1 = 1

K, the inverse kernel, maps innovations back: xi_n = sum_m K(n, m) sigma_m eps_m.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import linalg

from fgnarx.exceptions import DegenerateCovarianceError, DimensionError
from fgnarx.noise import NoiseModel, covariance_row

logger = logging.getLogger(__name__)

# Largest N for which the dense kernels are materialized
MAX_KERNEL_HORIZON = 8192


@dataclass(frozen=True, eq=False)
class InnovationSystem:
    """Partial correlations, innovation scales and kernels up to ``horizon``

    The system is built for a horizon N + 1 so that sigma_{N+1} is available
    to the design and Fisher computations of an N-step experiment.

    Attributes:
        model: noise model the system was built for
        horizon: N + 1
        beta: beta_1 .. beta_N
        sigma: sigma_1 .. sigma_{N+1}
        kernel: dense k (horizon x horizon), None when built without kernels
    """
    model: NoiseModel
    horizon: int
    beta: np.ndarray
    sigma: np.ndarray
    kernel: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        """Experiment length N the system serves"""
        return self.horizon - 1

    @property
    def sigma_next(self) -> np.ndarray:
        """sigma_{n+1} for n = 1..N"""
        return self.sigma[1:]

    @property
    def has_kernels(self) -> bool:
        return self.kernel is not None

    @property
    def k(self) -> np.ndarray:
        if self.kernel is None:
            raise DimensionError('innovation system was built without kernels')
        return self.kernel

    @cached_property
    def K(self) -> np.ndarray:
        """Inverse kernel, by unit lower triangular inversion of k"""
        return linalg.solve_triangular(self.k, np.eye(self.horizon), lower=True,
                                       unit_diagonal=True)


def build_innovation_system(model: NoiseModel, n: int,
                            kernels: bool = True) -> InnovationSystem:
    """Run the Durbin-Levinson recursion up to horizon n + 1

    Args:
        model: noise model
        n: experiment length N
        kernels: store the dense kernel k; without it only beta and sigma
            are kept, which is all the Fisher and Laplace recursions need

    Raises:
        DegenerateCovarianceError: if |beta_n| >= 1 for some n
        DimensionError: if kernels are requested beyond MAX_KERNEL_HORIZON
    """
    if n < 1:
        raise DimensionError('n must be a positive integer')
    if kernels and n > MAX_KERNEL_HORIZON:
        raise DimensionError(f'dense kernels are limited to N <= {MAX_KERNEL_HORIZON}; '
                             f'build with kernels=False for beta and sigma only')

    horizon = n + 1
    rho = covariance_row(model, horizon + 1)
    beta = np.empty(n)
    sigma2 = np.empty(horizon)
    sigma2[0] = 1.0
    kernel = np.zeros((horizon, horizon)) if kernels else None

    row = np.ones(1)
    if kernel is not None:
        kernel[0, 0] = 1.0
    for i in range(1, horizon):
        b = float(row @ rho[1:i + 1]) / sigma2[i - 1]
        if not abs(b) < 1.0:
            raise DegenerateCovarianceError(
                f'{model.label}: partial correlation |beta_{i}| >= 1, '
                f'covariance is numerically degenerate at n={i}', n=i)
        beta[i - 1] = b
        sigma2[i] = sigma2[i - 1] * (1.0 - b * b)

        padded = np.concatenate(([0.0], row))
        row = padded - b * padded[::-1]
        if kernel is not None:
            kernel[i, :i + 1] = row

    logger.debug('innovations %s: N=%d, sigma_{N+1}=%.6g', model.label, n,
                 np.sqrt(sigma2[-1]))
    return InnovationSystem(model=model, horizon=horizon, beta=beta,
                            sigma=np.sqrt(sigma2), kernel=kernel)


def _check_length(length: int, system: InnovationSystem):
    if length > system.horizon:
        raise DimensionError(f'series of length {length} exceeds the system '
                             f'horizon {system.horizon}')


def whiten_series(x: np.ndarray, system: InnovationSystem) -> np.ndarray:
    """Z_n = sum_{m<=n} k(n, m) x_m; a (reps, L) array whitens row-wise"""
    x = np.asarray(x, dtype=float)
    length = x.shape[-1]
    _check_length(length, system)
    return x @ system.k[:length, :length].T


def unwhiten_series(z: np.ndarray, system: InnovationSystem) -> np.ndarray:
    """Inverse of whiten_series: x_n = sum_{m<=n} K(n, m) z_m"""
    z = np.asarray(z, dtype=float)
    length = z.shape[-1]
    _check_length(length, system)
    solved = linalg.solve_triangular(system.k[:length, :length], z.T, lower=True,
                                     unit_diagonal=True)
    return solved.T
