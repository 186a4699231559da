"""Laplace transforms of quadratic functionals of the state process

Two families are covered.

1. The observed information of the estimator,

       L_N(mu) = E exp(-mu/(2N) <M>_N) = E exp(-1/2 sum_n zeta_n' M_n zeta_n),
       M_n = mu / (N sigma_{n+1}^2) a_n a_n',

   evaluated exactly through the Riccati recursion

       gamma(n,n) = A_{n-1} (Id + gamma(n-1,n-1) M_{n-1})^{-1} gamma(n-1,n-1) A_{n-1}' + sigma_n^2 b b'

   as prod det(Id + gamma(n,n) M_n)^{-1/2} exp(-1/2 sum z_n' M_n (Id + gamma(n,n) M_n)^{-1} z_n).
   M_n has rank one, so every 2 x 2 inverse and determinant is taken in
   closed form.

2. The auxiliary backward chain phi_{n-1} = theta phi_n + eps_{n-1},
   phi_N = 0, whose covariance operator F_N governs the input part of the
   design problem. Its transform E exp(-a/2 sum phi_i^2) is computed both
   from a 2 x 2 matrix power and from the eigenvalues of F_N.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from fgnarx.arx import asymptotic_fisher, observed_information_batch
from fgnarx.exceptions import DimensionError, InadmissibleError
from fgnarx.innovations import InnovationSystem

logger = logging.getLogger(__name__)

DENSE_CHAIN_LIMIT = 400


@dataclass(frozen=True, eq=False)
class RiccatiTrace:
    """Per-step quantities of the exact Laplace transform

    Arrays are indexed by step n = 1..N-1: ``gamma_diag`` (steps, 2, 2) holds
    gamma(n,n), ``z`` and ``m`` (steps, 2) the filtered and plain means,
    ``scale`` the weights mu / (N sigma_{n+1}^2) of M_n, and ``log_det`` the
    running sum of log det(Id + gamma(n,n) M_n).
    """
    mu: float
    gamma_diag: np.ndarray
    z: np.ndarray
    m: np.ndarray
    scale: np.ndarray
    log_det: np.ndarray
    exponent: float

    @property
    def determinant_part(self) -> float:
        total = self.log_det[-1] if self.log_det.size else 0.0
        return math.exp(-0.5 * total)

    @property
    def value(self) -> float:
        total = self.log_det[-1] if self.log_det.size else 0.0
        return math.exp(-0.5 * total - 0.5 * self.exponent)


def riccati_trace(theta: float, mu: float, system: InnovationSystem,
                  v: np.ndarray) -> RiccatiTrace:
    """Run the Riccati recursion for E exp(-mu/(2N) <M>_N) under input v

    Raises:
        InadmissibleError: if Id + gamma(n,n) M_n is singular or indefinite
            at some step (possible for negative mu)
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if system.horizon < n + 1:
        raise DimensionError(f'innovation system horizon {system.horizon} is too short for N={n}')
    steps = max(n - 1, 0)
    beta = system.beta
    sigma = system.sigma

    gamma_diag = np.zeros((steps, 2, 2))
    z_trace = np.zeros((steps, 2))
    m_trace = np.zeros((steps, 2))
    scale = np.zeros(steps)
    log_det = np.zeros(steps)

    # predicted covariance, filtered mean and plain mean at step 1
    g11, g12, g22 = sigma[0] ** 2, 0.0, 0.0
    z1, z2 = (v[0], 0.0) if n else (0.0, 0.0)
    m1, m2 = z1, z2
    running = 0.0
    exponent = 0.0
    for i in range(steps):
        b = beta[i]
        sig_next = sigma[i + 1]
        c = mu / (n * sig_next * sig_next)

        gamma_diag[i] = ((g11, g12), (g12, g22))
        z_trace[i] = (z1, z2)
        m_trace[i] = (m1, m2)
        scale[i] = c

        p1 = g11 + b * g12
        p2 = g12 + b * g22
        det = 1.0 + c * (p1 + b * p2)
        if not det > 0.0:
            logger.debug('riccati_trace: determinant factor %.6g at step %d (theta=%g, mu=%g)',
                         det, i + 1, theta, mu)
            raise InadmissibleError(f'Id + gamma M is not invertible at step {i + 1} '
                                    f'for mu={mu}')
        running += math.log(det)
        log_det[i] = running

        az = z1 + b * z2
        exponent += c * az * az / det

        # condition on the quadratic tilt (Sherman-Morrison)
        w = c / det
        f11 = g11 - w * p1 * p1
        f12 = g12 - w * p1 * p2
        f22 = g22 - w * p2 * p2
        y1 = z1 - w * p1 * az
        y2 = z2 - w * p2 * az

        # propagate with A_n = [[theta, theta b], [b, 1]]
        t11 = theta * (f11 + b * f12)
        t12 = theta * (f12 + b * f22)
        t21 = b * f11 + f12
        t22 = b * f12 + f22
        g11 = theta * (t11 + b * t12) + sig_next * sig_next
        g12 = b * t11 + t12
        g22 = b * t21 + t22

        u_next = v[i + 1]
        z1, z2 = theta * (y1 + b * y2) + u_next, b * y1 + y2
        m1, m2 = theta * (m1 + b * m2) + u_next, b * m1 + m2

    return RiccatiTrace(mu=mu, gamma_diag=gamma_diag, z=z_trace, m=m_trace, scale=scale,
                        log_det=log_det, exponent=exponent)


def laplace_exact(theta: float, mu: float, system: InnovationSystem, v: np.ndarray,
                  n: Optional[int] = None, part: str = 'full') -> float:
    """Exact E exp(-mu/(2N) <M>_N)

    Args:
        part: 'full' for the transform, 'determinant' for the determinant
            factor alone (the noise part of the information)
    """
    v = np.asarray(v, dtype=float)
    if n is not None and n != v.size:
        raise DimensionError(f'input has length {v.size}, expected {n}')
    trace = riccati_trace(theta, mu, system, v)
    if part == 'full':
        return trace.value
    if part == 'determinant':
        return trace.determinant_part
    raise InadmissibleError("part must be 'full' or 'determinant'")


def laplace_mc(theta: float, mu: float, system: InnovationSystem, v: np.ndarray,
               n: Optional[int], reps: int, rng: np.random.Generator):
    """Monte Carlo estimate of E exp(-mu/(2N) <M>_N) with its standard error"""
    v = np.asarray(v, dtype=float)
    if n is not None and n != v.size:
        raise DimensionError(f'input has length {v.size}, expected {n}')
    if reps < 1000:
        raise InadmissibleError('laplace_mc needs at least 1000 replications')
    if mu == 0:
        return 1.0, 0.0
    info = observed_information_batch(theta, v, system, reps, rng)
    values = np.exp(-mu / (2.0 * v.size) * info)
    return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(reps))


def laplace_limit(theta: float, mu: float, part: str = 'full') -> float:
    """exp(-mu I(theta) / 2), or exp(-mu / (2(1 - theta^2))) for the determinant part"""
    if part == 'determinant':
        return math.exp(-0.5 * mu / (1.0 - theta * theta))
    return math.exp(-0.5 * mu * asymptotic_fisher(theta))


def chain_covariance(theta: float, n: int) -> np.ndarray:
    """F_N(i, j) = sum_{l >= max(i, j)} theta^(l-i) theta^(l-j) over the n - 1 active coordinates"""
    if n < 2:
        raise DimensionError('the chain needs n >= 2')
    d = n - 1
    first_row = float(theta) ** np.arange(d)
    first_col = np.zeros(d)
    first_col[0] = 1.0
    transfer = linalg.toeplitz(first_col, first_row)
    return transfer @ transfer.T


def phi_chain_laplace_closed(theta: float, a: float, n: int) -> float:
    """E exp(-a/2 sum phi_i^2) from a 2 x 2 matrix power

    With C = [[1, 1], [a, a + theta^2]] the transform of the chain with n - 1
    active coordinates equals ((C^n)_{11})^{-1/2}; C is theta times the
    matrix [[1/theta, 1/theta], [a/theta, a/theta + theta]], so this is the
    bilinear form theta^n Psi written without dividing by theta.
    """
    if n < 1:
        raise DimensionError('n must be a positive integer')
    generator = np.array([[1.0, 1.0], [a, a + theta * theta]])
    if a < 0:
        _check_chain_minors(generator, n, a)
    psi = np.linalg.matrix_power(generator, n)[0, 0]
    if not (math.isfinite(psi) and psi > 0.0):
        raise InadmissibleError(f'a={a} lies beyond the spectral gap (Psi={psi:.3g})')
    return psi ** -0.5


def _check_chain_minors(generator: np.ndarray, n: int, a: float):
    # det(Id + a F) for the nested chains of length 1..n-1 must stay positive
    state = np.array([1.0, a])
    for length in range(1, n):
        state = generator @ state
        if not state[0] > 0.0:
            raise InadmissibleError(f'a={a} lies beyond the spectral gap '
                                    f'(chain length {length})')


def phi_chain_laplace_eigen(theta: float, a: float, n: int) -> float:
    """E exp(-a/2 sum phi_i^2) = prod (1 + a nu_i)^{-1/2} over the eigenvalues of F_N"""
    if n > DENSE_CHAIN_LIMIT:
        raise DimensionError(f'eigen evaluation is limited to n <= {DENSE_CHAIN_LIMIT}')
    if n < 2:
        return 1.0
    eigenvalues = linalg.eigvalsh(chain_covariance(theta, n))
    factors = 1.0 + a * eigenvalues
    if np.any(factors <= 0.0):
        raise InadmissibleError(f'1 + a nu_i <= 0 for a={a}')
    return math.exp(-0.5 * float(np.sum(np.log(factors))))


def spectral_gap(theta: float, n: int) -> float:
    """Largest eigenvalue nu_1(N) of the chain covariance F_N"""
    if n > DENSE_CHAIN_LIMIT:
        raise DimensionError(f'eigen evaluation is limited to n <= {DENSE_CHAIN_LIMIT}')
    d = n - 1
    top = linalg.eigh(chain_covariance(theta, n), eigvals_only=True,
                      subset_by_index=[d - 1, d - 1])
    logger.debug('spectral_gap: nu1=%.6g for theta=%g, N=%d', top[0], theta, n)
    return float(top[0])
