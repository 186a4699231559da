"""ARX(1) model driven by stationary Gaussian noise

    X_n = theta X_{n-1} + u(n) + xi_n,   X_0 = 0

Whitening the observations with the innovation kernel, Z = k X, turns the
model into the first coordinate of the 2-dimensional Markov process

    zeta_n = (Z_n, sum_{r<n} beta_r Z_r)
    zeta_n = A_{n-1} zeta_{n-1} + b v(n) + b sigma_n eps_n,   zeta_0 = 0
    A_n = [[theta, theta beta_n], [beta_n, 1]],  b = (1, 0)

with v = k u the transformed input and eps_n independent standard normals.
The likelihood, the maximum likelihood estimator and the Fisher information
are all written in terms of zeta and a_n = (1, beta_n).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import signal

from fgnarx.exceptions import DimensionError, InadmissibleError, NotIdentifiableError
from fgnarx.innovations import InnovationSystem, build_innovation_system, whiten_series
from fgnarx.noise import NoiseModel

logger = logging.getLogger(__name__)


def check_theta(theta: float):
    if not -1.0 < theta < 1.0:
        raise InadmissibleError(f'theta must lie in (-1,1), got {theta}')


@dataclass(frozen=True, eq=False)
class ArxSpec:
    """Generating parameters of an ARX(1) experiment of length n"""
    theta: float
    noise: NoiseModel
    n: int
    input_u: np.ndarray

    def __post_init__(self):
        check_theta(self.theta)
        u = np.asarray(self.input_u, dtype=float)
        if u.shape != (self.n,):
            raise DimensionError(f'input has length {u.size}, expected {self.n}')
        object.__setattr__(self, 'input_u', u)


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    """Observed path X together with its whitened state representation

    ``zeta`` is an (N, 2) array. ``theta`` and ``innovations`` are only known
    for simulated trajectories.
    """
    x: np.ndarray
    z: np.ndarray
    zeta: np.ndarray
    v: np.ndarray
    theta: Optional[float] = None
    innovations: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class EstimationResult:
    """Maximum likelihood estimate and its martingale decomposition

    theta_hat - theta = score / observed_info, where score is M_N and
    observed_info the quadratic characteristic <M>_N.
    """
    theta_hat: float
    observed_info: float
    loglik_at_hat: float
    n: int
    score: Optional[float] = None
    phi: Optional[float] = None
    reference_theta: Optional[float] = None

    @property
    def outside_unit_interval(self) -> bool:
        """True when the unclamped estimate left (-1, 1)"""
        return abs(self.theta_hat) >= 1.0

    def to_dict(self) -> dict:
        return {
            'theta_hat': self.theta_hat,
            'observed_info': self.observed_info,
            'observed_info_per_step': self.observed_info / self.n,
            'score': self.score,
            'phi': self.phi,
            'reference_theta': self.reference_theta,
            'loglik_at_hat': self.loglik_at_hat,
            'outside_unit_interval': self.outside_unit_interval,
            'n': self.n,
        }


def _check_system(system: InnovationSystem, n: int):
    if system.horizon < n + 1:
        raise DimensionError(f'innovation system horizon {system.horizon} is too short '
                             f'for N={n} (needs N + 1)')


def trajectory_from_observations(x: np.ndarray, v: np.ndarray, system: InnovationSystem,
                                 theta: Optional[float] = None,
                                 innovations: Optional[np.ndarray] = None) -> StateTrajectory:
    """Rebuild Z and zeta from observations X and the transformed input v"""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.ndim != 1 or v.shape != x.shape:
        raise DimensionError(f'observations ({x.size}) and input ({v.size}) lengths differ')
    n = x.size
    _check_system(system, n)

    z = whiten_series(x, system)
    zeta = np.empty((n, 2))
    zeta[:, 0] = z
    zeta[0, 1] = 0.0
    zeta[1:, 1] = np.cumsum(system.beta[:n - 1] * z[:n - 1])
    return StateTrajectory(x=x, z=z, zeta=zeta, v=v, theta=theta, innovations=innovations)


def simulate_arx(spec: ArxSpec, noise_path: np.ndarray,
                 system: Optional[InnovationSystem] = None) -> StateTrajectory:
    """Run the ARX(1) recursion from X_0 = 0 and derive its state representation

    Args:
        spec: generating parameters
        noise_path: xi_1..xi_n
        system: innovation system for ``spec.noise`` with horizon >= n + 1;
            built on demand when omitted
    """
    noise_path = np.asarray(noise_path, dtype=float)
    if noise_path.shape != (spec.n,):
        raise DimensionError(f'noise path has length {noise_path.size}, expected {spec.n}')
    if system is None:
        system = build_innovation_system(spec.noise, spec.n)
    _check_system(system, spec.n)

    x = signal.lfilter([1.0], [1.0, -spec.theta], spec.input_u + noise_path)
    v = whiten_series(spec.input_u, system)
    eps = whiten_series(noise_path, system) / system.sigma[:spec.n]
    return trajectory_from_observations(x, v, system, theta=spec.theta, innovations=eps)


def zeta_recursion_residual(traj: StateTrajectory, system: InnovationSystem,
                            theta: Optional[float] = None) -> float:
    """Largest deviation from zeta_n = A_{n-1} zeta_{n-1} + b v(n) + b sigma_n eps_n"""
    theta = traj.theta if theta is None else theta
    if theta is None or traj.innovations is None:
        raise DimensionError('residual needs a simulated trajectory (theta and innovations)')
    n = traj.n
    prev = np.vstack(([0.0, 0.0], traj.zeta[:-1]))
    beta_prev = np.concatenate(([0.0], system.beta[:n - 1]))
    first = (theta * (prev[:, 0] + beta_prev * prev[:, 1]) + traj.v
             + system.sigma[:n] * traj.innovations)
    second = beta_prev * prev[:, 0] + prev[:, 1]
    return float(max(np.max(np.abs(traj.zeta[:, 0] - first)),
                     np.max(np.abs(traj.zeta[:, 1] - second))))


def _regression(traj: StateTrajectory, system: InnovationSystem):
    """Regressor a_m' zeta_m, response Z_{m+1} - v(m+1) and scale sigma_{m+1}, m < N"""
    n = traj.n
    _check_system(system, n)
    beta = system.beta[:n - 1]
    regressor = traj.zeta[:-1, 0] + beta * traj.zeta[:-1, 1]
    response = traj.z[1:] - traj.v[1:]
    scale = system.sigma[1:n]
    return regressor, response, scale


def log_likelihood(theta: float, traj: StateTrajectory, system: InnovationSystem) -> float:
    """Exact Gaussian log-likelihood of X_1..X_N at ``theta``

    The residual of step n is Z_n - v(n) - theta a_{n-1}' zeta_{n-1}, the
    deterministic shift v(n) entering through the input.
    """
    regressor, response, scale = _regression(traj, system)
    sigma = system.sigma[:traj.n]
    residual = np.concatenate(([traj.z[0] - traj.v[0]], response - theta * regressor))
    return float(-0.5 * np.sum(np.log(2.0 * math.pi * sigma ** 2))
                 - 0.5 * np.sum((residual / sigma) ** 2))


def observed_information(traj: StateTrajectory, system: InnovationSystem) -> float:
    """<M>_N = sum_{n<N} (a_n' zeta_n / sigma_{n+1})^2"""
    regressor, _, scale = _regression(traj, system)
    return float(np.sum((regressor / scale) ** 2))


def mle_estimate(traj: StateTrajectory, system: InnovationSystem,
                 true_theta: Optional[float] = None) -> EstimationResult:
    """Closed-form maximum likelihood estimate of theta

    The score M_N is reported at the reference value ``true_theta`` (or the
    generating theta of a simulated trajectory). When the trajectory carries
    its innovations the score is the martingale sum_{n<N} (a_n' zeta_n /
    sigma_{n+1}) eps_{n+1} itself.

    Raises:
        NotIdentifiableError: if the observed information is zero
    """
    regressor, response, scale = _regression(traj, system)
    weighted = regressor / scale
    info = float(np.sum(weighted ** 2))
    if not info > 0.0:
        raise NotIdentifiableError('observed information is zero; theta is not '
                                   'identifiable from an all-zero trajectory and input')
    theta_hat = float(np.sum(regressor * response / scale ** 2)) / info
    if abs(theta_hat) >= 1.0:
        logger.info('estimate %.6g lies outside (-1, 1)', theta_hat)

    reference = true_theta if true_theta is not None else traj.theta
    score = phi = None
    if reference is not None:
        if traj.innovations is not None and reference == traj.theta:
            score = float(np.sum(weighted * traj.innovations[1:]))
        else:
            score = float(np.sum(regressor * (response - reference * regressor) / scale ** 2))
        phi = math.sqrt(traj.n) * (theta_hat - reference)

    return EstimationResult(theta_hat=theta_hat, observed_info=info,
                            loglik_at_hat=log_likelihood(theta_hat, traj, system),
                            n=traj.n, score=score, phi=phi, reference_theta=reference)


def fisher_components(theta: float, v: np.ndarray,
                      system: InnovationSystem) -> Tuple[float, float]:
    """Noise part I_{1,N}(theta) and input part I_{2,N}(theta, v) of the Fisher information

    I_{1,N} follows the second moment recursion
        Q_n = A_{n-1} Q_{n-1} A_{n-1}' + sigma_n^2 b b',   I_1 = sum a_n' Q_n a_n / sigma_{n+1}^2
    and I_{2,N} the normalized mean recursion
        s(n) = A_{n-1} s(n-1) sigma_n / sigma_{n+1} + b v(n) / sigma_{n+1},   I_2 = sum (a_n' s(n))^2
    both summed over n = 1..N-1.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    _check_system(system, n)
    beta = system.beta
    sigma = system.sigma

    q11 = q12 = q22 = 0.0
    s1 = s2 = 0.0
    info_noise = info_input = 0.0
    b_prev = 0.0
    for i in range(n - 1):
        # step n = i + 1
        sig, sig_next = sigma[i], sigma[i + 1]
        t11 = theta * q11 + theta * b_prev * q12
        t12 = theta * q12 + theta * b_prev * q22
        t21 = b_prev * q11 + q12
        t22 = b_prev * q12 + q22
        q11 = t11 * theta + t12 * theta * b_prev + sig * sig
        q12 = t11 * b_prev + t12
        q22 = t21 * b_prev + t22

        ratio = sig / sig_next
        s1, s2 = ((theta * s1 + theta * b_prev * s2) * ratio + v[i] / sig_next,
                  (b_prev * s1 + s2) * ratio)

        b = beta[i]
        info_noise += (q11 + 2.0 * b * q12 + b * b * q22) / (sig_next * sig_next)
        info_input += (s1 + b * s2) ** 2
        b_prev = b
    return info_noise, info_input


def fisher_exact(theta: float, v: np.ndarray, system: InnovationSystem) -> float:
    """Fisher information I_N(theta, v) = I_{1,N}(theta) + I_{2,N}(theta, v)"""
    info_noise, info_input = fisher_components(theta, v, system)
    return info_noise + info_input


def observed_information_batch(theta: float, v: np.ndarray, system: InnovationSystem,
                               replications: int, rng: np.random.Generator) -> np.ndarray:
    """Draw <M>_N for independent replications by propagating the zeta equation"""
    v = np.asarray(v, dtype=float)
    n = v.size
    _check_system(system, n)
    beta = system.beta
    sigma = system.sigma

    z1 = np.zeros(replications)
    z2 = np.zeros(replications)
    info = np.zeros(replications)
    b_prev = 0.0
    for i in range(n - 1):
        eps = rng.standard_normal(replications)
        z1, z2 = (theta * (z1 + b_prev * z2) + v[i] + sigma[i] * eps,
                  b_prev * z1 + z2)
        b = beta[i]
        info += ((z1 + b * z2) / sigma[i + 1]) ** 2
        b_prev = b
    return info


def fisher_empirical(theta: float, v: np.ndarray, system: InnovationSystem,
                     replications: int, rng: np.random.Generator) -> Tuple[float, float]:
    """Monte Carlo estimate of I_N(theta, v) and its standard error"""
    if replications < 100:
        raise InadmissibleError('replications must be at least 100')
    info = observed_information_batch(theta, v, system, replications, rng)
    return float(np.mean(info)), float(np.std(info, ddof=1) / math.sqrt(replications))


def asymptotic_fisher(theta: float) -> float:
    """Limit I(theta) of I_N / N under the optimal input

    1/(1 - theta^2) + 1/(1 - theta)^2 for theta >= 0 and
    1/(1 - theta^2) + 1/(1 + theta)^2 for theta < 0.
    """
    check_theta(theta)
    gain = 1.0 - abs(theta)
    return 1.0 / (1.0 - theta * theta) + 1.0 / (gain * gain)
