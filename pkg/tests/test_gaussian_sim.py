import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import linalg

from fgnarx.exceptions import DimensionError
from fgnarx.gaussian_sim import (build_embedding, embedding_size, sample_noise, sample_path,
                                 sample_autocovariances, sample_paths, sample_paths_dense,
                                 stream)
from fgnarx.noise import NoiseModel, autocovariances

LAGS = range(6)


@pytest.mark.parametrize('n, m', [(2, 2), (3, 4), (4, 8), (64, 128), (100, 256), (129, 256)])
def test_embedding_size(n, m):
    assert embedding_size(n) == m


def test_white_embedding_is_flat():
    embedding = build_embedding(NoiseModel.white(), 4)
    assert embedding.m == 8
    assert_allclose(embedding.eigenvalues, np.ones(8), atol=1e-15)


@pytest.mark.parametrize('model, n', [
    (NoiseModel.fgn(0.6), 4),
    (NoiseModel.fgn(0.75), 100),
    (NoiseModel.fgn(0.3), 100),
    (NoiseModel.ar1(0.9), 64),
])
def test_eigenvalues_match_dense_circulant(model, n):
    embedding = build_embedding(model, n)
    assert embedding.eigenvalues.min() >= 0.0
    dense = np.sort(linalg.eigvalsh(linalg.circulant(embedding.first_row)))
    assert_allclose(np.sort(embedding.eigenvalues), dense, atol=1e-8)


def test_first_row_is_symmetric():
    embedding = build_embedding(NoiseModel.fgn(0.6), 20)
    row = embedding.first_row
    assert_allclose(row[1:], row[1:][::-1], rtol=0, atol=0)


def test_embedding_needs_two_points():
    with pytest.raises(DimensionError):
        build_embedding(NoiseModel.white(), 1)


def test_same_key_same_path():
    embedding = build_embedding(NoiseModel.fgn(0.6), 50)
    first = sample_path(embedding, stream(7, 0, 3))
    second = sample_path(embedding, stream(7, 0, 3))
    assert np.array_equal(first, second)


def test_distinct_keys_differ():
    embedding = build_embedding(NoiseModel.fgn(0.6), 50)
    assert not np.array_equal(sample_path(embedding, stream(7, 0, 3)),
                              sample_path(embedding, stream(7, 0, 4)))


def test_white_noise_variance():
    embedding = build_embedding(NoiseModel.white(), 4)
    paths = sample_paths(embedding, stream(1), 100_000)
    assert paths.shape == (100_000, 4)
    assert 0.99 <= np.var(paths) <= 1.01


@pytest.mark.parametrize('hurst', [0.55, 0.6, 0.75])
def test_circulant_autocovariances(hurst):
    model = NoiseModel.fgn(hurst)
    paths = sample_paths(build_embedding(model, 32), stream(11, int(hurst * 100)), 20_000)
    target = autocovariances(model, list(LAGS))
    products = sample_autocovariances(paths, LAGS, pooled=False)
    se = products.std(axis=0, ddof=1) / np.sqrt(products.shape[0])
    assert np.all(np.abs(sample_autocovariances(paths, LAGS) - target) < 4 * se)


def test_dense_sampler_correlation():
    paths = sample_paths_dense(NoiseModel.ar1(0.5), 2, stream(3), 100_000)
    corr = np.corrcoef(paths, rowvar=False)[0, 1]
    assert 0.49 <= corr <= 0.51


def test_dense_and_circulant_agree():
    model = NoiseModel.fgn(0.6)
    circulant = sample_paths(build_embedding(model, 64), stream(5, 0), 20_000)
    dense = sample_paths_dense(model, 64, stream(5, 1), 20_000)
    a = sample_autocovariances(circulant, LAGS, pooled=False)
    b = sample_autocovariances(dense, LAGS, pooled=False)
    se = np.sqrt(a.var(axis=0, ddof=1) / a.shape[0] + b.var(axis=0, ddof=1) / b.shape[0])
    assert np.all(np.abs(a.mean(axis=0) - b.mean(axis=0)) < 4 * se)


def test_sample_autocovariances_shapes():
    paths = np.array([[1.0, 2.0, 3.0], [0.0, 1.0, -1.0]])
    per_path = sample_autocovariances(paths, [0, 1, 2], pooled=False)
    assert_allclose(per_path, [[14.0 / 3.0, 4.0, 3.0], [2.0 / 3.0, -0.5, 0.0]])
    assert_allclose(sample_autocovariances(paths, [0, 1, 2]), [8.0 / 3.0, 1.75, 1.5])
    assert_allclose(sample_autocovariances(paths[0], [1]), [4.0])


def test_dense_sampler_limit():
    with pytest.raises(DimensionError):
        sample_paths_dense(NoiseModel.white(), 4096, stream(0), 1)


def test_sample_noise_single_point():
    xi = sample_noise(NoiseModel.fgn(0.6), 1, stream(2))
    assert xi.shape == (1,)
    assert np.isfinite(xi[0])
