"""Exact sampling of stationary Gaussian noise paths

Two samplers are provided:

- the circulant embedding sampler (Wood-Chan): the Toeplitz covariance is
  embedded in an m x m symmetric circulant matrix, diagonalized by the FFT,
  and paths are reconstructed from Hermitian-symmetric complex normals;
- a dense sampler drawing N(0, C) through the Cholesky factor of C, kept as
  the statistical oracle for the circulant sampler.

Random streams are counter based (Philox) and addressed by a master seed plus
an integer key, so that any single draw can be reproduced in isolation.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from fgnarx.exceptions import DimensionError, EmbeddingError
from fgnarx.noise import NoiseModel, autocovariances, cholesky_factor

logger = logging.getLogger(__name__)

NEGATIVE_EIGENVALUE_TOLERANCE = 1e-9
IMAGINARY_EIGENVALUE_TOLERANCE = 1e-9
IMAGINARY_PATH_TOLERANCE = 1e-8
MAX_EMBEDDING_RETRIES = 3
DENSE_SAMPLER_LIMIT = 2048


def stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based random stream for ``seed`` and the integer path ``key``

    Streams for distinct keys are statistically independent and do not
    depend on the order in which they are created.
    """
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


@dataclass(frozen=True)
class CirculantEmbedding:
    """Circulant extension of the n x n Toeplitz covariance of a noise model"""
    model: NoiseModel
    n: int
    m: int
    first_row: np.ndarray
    eigenvalues: np.ndarray


def embedding_size(n: int) -> int:
    """Smallest power of two not below 2(n - 1)"""
    target = max(2 * (n - 1), 2)
    return 1 << math.ceil(math.log2(target))


def circulant_row(model: NoiseModel, m: int) -> np.ndarray:
    """First row of the circulant: gamma(j) for j <= m/2, gamma(m - j) above"""
    j = np.arange(m)
    return autocovariances(model, np.minimum(j, m - j))


def build_embedding(model: NoiseModel, n: int,
                    max_retries: int = MAX_EMBEDDING_RETRIES) -> CirculantEmbedding:
    """Build the circulant embedding of the covariance of xi_1..xi_n

    The embedding size starts at the smallest power of two >= 2(n-1) and is
    doubled up to ``max_retries`` times while the spectrum has negative
    eigenvalues beyond tolerance.

    Raises:
        EmbeddingError: if the spectrum stays negative after all retries
    """
    if n < 2:
        raise DimensionError('circulant embedding needs n >= 2')

    m = embedding_size(n)
    for attempt in range(max_retries + 1):
        row = circulant_row(model, m)
        spectrum = np.fft.fft(row)

        residue = np.max(np.abs(spectrum.imag))
        if residue >= IMAGINARY_EIGENVALUE_TOLERANCE:
            raise EmbeddingError(f'circulant eigenvalues are not real '
                                 f'(imaginary residue {residue:.3g} at m={m})')

        eigenvalues = spectrum.real
        smallest = eigenvalues.min()
        if smallest >= -NEGATIVE_EIGENVALUE_TOLERANCE:
            logger.debug('embedding %s n=%d: m=%d, min eigenvalue %.3g',
                         model.label, n, m, smallest)
            return CirculantEmbedding(model=model, n=n, m=m, first_row=row,
                                      eigenvalues=np.clip(eigenvalues, 0.0, None))

        if attempt < max_retries:
            logger.info('embedding %s n=%d: eigenvalue %.3g at m=%d, doubling m',
                        model.label, n, smallest, m)
            m *= 2

    raise EmbeddingError(f'negative circulant eigenvalue {smallest:.3g} for '
                         f'{model.label} at m={m}; a larger embedding is needed')


def sample_paths(embedding: CirculantEmbedding, rng: np.random.Generator,
                 size: int) -> np.ndarray:
    """Draw ``size`` independent paths, returned as a (size, n) array"""
    m = embedding.m
    half = m // 2
    u = rng.standard_normal((size, half))
    v = rng.standard_normal((size, half))

    # F_0 = U_0, F_{m/2} = V_0, F_j = (U_j + iV_j)/sqrt(2) below m/2 and the
    # conjugate of F_{m-j} above it
    f = np.empty((size, m), dtype=complex)
    f[:, 0] = u[:, 0]
    f[:, half] = v[:, 0]
    f[:, 1:half] = (u[:, 1:] + 1j * v[:, 1:]) / math.sqrt(2.0)
    f[:, half + 1:] = np.conj(f[:, 1:half][:, ::-1])

    xi = np.fft.fft(np.sqrt(embedding.eigenvalues) * f, axis=-1) / math.sqrt(m)

    residue = np.max(np.abs(xi.imag)) if xi.size else 0.0
    if residue >= IMAGINARY_PATH_TOLERANCE:
        raise EmbeddingError(f'reconstructed path is not real (imaginary residue '
                             f'{residue:.3g}); F_j symmetry is broken')
    return xi.real[:, :embedding.n]


def sample_path(embedding: CirculantEmbedding, rng: np.random.Generator) -> np.ndarray:
    """Draw one exact N(0, C) path xi_1..xi_n by circulant embedding"""
    return sample_paths(embedding, rng, 1)[0]


def sample_paths_dense(model: NoiseModel, n: int, rng: np.random.Generator,
                       size: int) -> np.ndarray:
    """Draw ``size`` paths through the Cholesky factor of the covariance"""
    if n > DENSE_SAMPLER_LIMIT:
        raise DimensionError(f'dense sampler is limited to n <= {DENSE_SAMPLER_LIMIT}')
    factor = cholesky_factor(model, n)
    return rng.standard_normal((size, n)) @ factor.T


def sample_path_dense(model: NoiseModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Oracle sampler: one N(0, C) path by Cholesky factorization"""
    return sample_paths_dense(model, n, rng, 1)[0]


def sample_noise(model: NoiseModel, n: int, rng: np.random.Generator,
                 embedding: Optional[CirculantEmbedding] = None) -> np.ndarray:
    """Sample xi_1..xi_n, reusing ``embedding`` when given

    Falls back to the dense sampler for n = 1, where no embedding exists.
    """
    if n == 1:
        return sample_path_dense(model, 1, rng)
    if embedding is None:
        embedding = build_embedding(model, n)
    return sample_path(embedding, rng)


def sample_autocovariances(paths: np.ndarray, lags: Sequence[int],
                           pooled: bool = True) -> np.ndarray:
    """Lag-j autocovariance estimates sum_k xi_k xi_{k+j} / (n - j)

    The process mean is known to be zero, so no centering is applied. With
    ``pooled`` the estimates are averaged over all paths and the result has
    shape (len(lags),); otherwise it has one row per path.
    """
    paths = np.atleast_2d(paths)
    n = paths.shape[1]
    per_path = np.stack([np.mean(paths[:, :n - j] * paths[:, j:], axis=1) for j in lags],
                        axis=1)
    return per_path.mean(axis=0) if pooled else per_path
