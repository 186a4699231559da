"""Input design under the energy constraint

An input u is admissible for an N-step experiment when its transformed
version v = k u satisfies

    (1/N) sum_{n<=N} (v(n) / sigma_{n+1})^2 <= 1

The asymptotically optimal input puts v(n) = sigma_{n+1} for theta > 0, and
v(n) = (-1)^n sigma_{n+1} (or (-1)^{n+1} sigma_{n+1}) for theta < 0; in the
original coordinates u = K v.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from scipy import signal

from fgnarx.exceptions import DimensionError, InadmissibleError
from fgnarx.innovations import InnovationSystem, unwhiten_series, whiten_series

logger = logging.getLogger(__name__)

ENERGY_TOLERANCE = 1e-12


class SignProfile(Enum):
    """Sign pattern of the transformed input"""
    PLUS = 'plus'
    ALTERNATING = 'alternating'
    CUSTOM = 'custom'


@dataclass(frozen=True, eq=False)
class InputDesign:
    """Input in original (u) and transformed (v) coordinates"""
    u: np.ndarray
    v: np.ndarray
    energy: float
    sign_profile: SignProfile
    sigma_next: np.ndarray

    @property
    def n(self) -> int:
        return self.u.size

    @property
    def admissible(self) -> bool:
        return self.energy <= 1.0 + ENERGY_TOLERANCE


def _check_horizon(system: InnovationSystem, n: int):
    if system.horizon < n + 1:
        raise DimensionError(f'horizon shortfall: sigma_{n + 1} is missing from a system '
                             f'of horizon {system.horizon}')


def energy_of(u: np.ndarray, system: InnovationSystem) -> float:
    """(1/N) sum_n (sum_{m<=n} k(n, m) u(m) / sigma_{n+1})^2"""
    u = np.asarray(u, dtype=float)
    n = u.size
    if n == 0:
        return 0.0
    _check_horizon(system, n)
    v = whiten_series(u, system)
    return float(np.mean((v / system.sigma[1:n + 1]) ** 2))


def alternating_signs(n: int, alternate_start: str = 'even') -> np.ndarray:
    """(-1)^n for ``even`` or (-1)^{n+1} for ``odd``, n = 1..N"""
    if alternate_start not in ('even', 'odd'):
        raise InadmissibleError("alternate_start must be 'even' or 'odd'")
    exponent = np.arange(1, n + 1) + (1 if alternate_start == 'odd' else 0)
    return np.where(exponent % 2 == 0, 1.0, -1.0)


def _is_negative(theta_sign: Union[str, float]) -> bool:
    if isinstance(theta_sign, str):
        if theta_sign not in ('+', '-'):
            raise InadmissibleError("theta_sign must be '+' or '-'")
        return theta_sign == '-'
    return theta_sign < 0


def optimal_transformed_input(system: InnovationSystem, n: int,
                              theta_sign: Union[str, float] = '+',
                              alternate_start: str = 'even') -> np.ndarray:
    """v_opt(n) = sigma_{n+1}, with alternating signs for negative theta

    Needs only the innovation scales, so it works for systems built without
    kernels.
    """
    _check_horizon(system, n)
    target = system.sigma[1:n + 1].copy()
    if _is_negative(theta_sign):
        target *= alternating_signs(n, alternate_start)
    return target


def optimal_input(system: InnovationSystem, n: int, theta_sign: Union[str, float] = '+',
                  alternate_start: str = 'even') -> InputDesign:
    """Asymptotically optimal input for an N-step experiment

    Args:
        system: innovation system with horizon >= n + 1
        n: experiment length N
        theta_sign: '+' or '-', or a value of theta whose sign is used
            (theta = 0 takes the plus design)
        alternate_start: 'even' for (-1)^n, 'odd' for (-1)^{n+1}

    Raises:
        DimensionError: if sigma_{N+1} is not available
    """
    target = optimal_transformed_input(system, n, theta_sign, alternate_start)
    sigma_next = system.sigma[1:n + 1]
    profile = SignProfile.ALTERNATING if _is_negative(theta_sign) else SignProfile.PLUS

    u = unwhiten_series(target, system)
    v = whiten_series(u, system)
    energy = float(np.mean((v / sigma_next) ** 2))
    logger.debug('optimal %s input N=%d: energy %.15g', profile.value, n, energy)
    return InputDesign(u=u, v=v, energy=energy, sign_profile=profile, sigma_next=sigma_next)


def design_from_input(u: np.ndarray, system: InnovationSystem) -> InputDesign:
    """Wrap an arbitrary input, computing its transformed version and energy"""
    u = np.asarray(u, dtype=float)
    n = u.size
    _check_horizon(system, n)
    v = whiten_series(u, system)
    sigma_next = system.sigma[1:n + 1]
    energy = float(np.mean((v / sigma_next) ** 2)) if n else 0.0
    return InputDesign(u=u, v=v, energy=energy, sign_profile=SignProfile.CUSTOM,
                       sigma_next=sigma_next)


def zero_input(system: InnovationSystem, n: int) -> InputDesign:
    return design_from_input(np.zeros(n), system)


def check_admissible(design: InputDesign) -> InputDesign:
    """Return ``design`` unchanged, or raise when its energy exceeds 1

    Inputs marginally over the bound are rejected, never rescaled.
    """
    if not design.admissible:
        raise InadmissibleError(f'input energy {design.energy:.15g} exceeds the unit bound')
    return design


def input_response_limit(theta: float, n: int) -> float:
    """(1/N) sum alpha(n)^2 for alpha(n) = theta alpha(n-1) + 1, alpha(0) = 0

    This is the response of the reduced control problem to the constant
    input f = 1; it tends to 1/(1 - theta)^2.
    """
    if not -1.0 < theta < 1.0:
        raise InadmissibleError(f'theta must lie in (-1,1), got {theta}')
    if n < 1:
        raise DimensionError('n must be a positive integer')
    alpha = signal.lfilter([1.0], [1.0, -theta], np.ones(n))
    return float(np.mean(alpha ** 2))
