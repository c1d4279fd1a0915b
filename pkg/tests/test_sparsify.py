import numpy as np
import pytest

from volume_al.errors import ConfigError, ShapeError
from volume_al.kernel import KernelKind, KernelMatrix, KernelSpec
from volume_al.sparsify import (
    ScoreVariant,
    SparsifyParams,
    SubsetIndices,
    confidence_scores,
    deflate,
    sequential_select,
    sparsify_halve,
)
from volume_al.testing import naive_sparsify

from .common import random_psd

# pylint: disable=R0201, no-self-use

LINEAR = KernelSpec(KernelKind.LINEAR)
PAIR = KernelMatrix([[1.0, 0.5], [0.5, 1.0]], LINEAR)


class TestSubsetIndices:
    def test_sequence(self):
        indices = SubsetIndices([4, 0, 2])
        assert len(indices) == 3
        assert list(indices) == [4, 0, 2]
        assert indices[1:] == SubsetIndices([0, 2])
        assert indices == [4, 0, 2]
        assert indices.to_array().dtype == np.int64

    @pytest.mark.parametrize(
        "indices",
        [pytest.param([1, 1], id="duplicate"), pytest.param([-1], id="negative")],
    )
    def test_invalid(self, indices):
        with pytest.raises(ValueError):
            SubsetIndices(indices)

    def test_prefix(self):
        assert SubsetIndices([3, 1]).is_prefix_of(SubsetIndices([3, 1, 2]))
        assert not SubsetIndices([1, 3]).is_prefix_of(SubsetIndices([3, 1, 2]))


class TestSparsifyParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            pytest.param({"mu": 0.0}, id="zero_mu"),
            pytest.param({"target_fraction": 0.0}, id="zero_fraction"),
            pytest.param({"target_fraction": 1.5}, id="large_fraction"),
            pytest.param({"score_variant": "other"}, id="variant"),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SparsifyParams(**kwargs)

    def test_target_size(self):
        assert SparsifyParams().target_size(7) == 3
        assert SparsifyParams(target_fraction=1.0).target_size(7) == 7

    def test_variant_names(self):
        assert SparsifyParams().score_variant is ScoreVariant.PAPER
        assert SparsifyParams(score_variant="paper").score_variant is ScoreVariant.PAPER
        assert SparsifyParams(score_variant="ted").score_variant is ScoreVariant.TED


class TestConfidenceScores:
    def test_identity(self):
        K = KernelMatrix(np.eye(3), LINEAR)
        assert np.allclose(confidence_scores(K, 0.1), 1 / 1.1)

    @pytest.mark.parametrize(
        ("variant", "expected"),
        [
            pytest.param(ScoreVariant.PAPER, 1.25 ** 2 / 1.1, id="paper"),
            pytest.param(ScoreVariant.TED, 1.25 / 1.1, id="ted"),
        ],
    )
    def test_hand_values(self, variant, expected):
        scores = confidence_scores(PAIR, 0.1, variant=variant)
        assert scores[0] == pytest.approx(expected, abs=1e-12)

    def test_excluded(self):
        scores = confidence_scores(PAIR, 0.1, excluded=[1])
        assert scores[1] == -np.inf
        assert np.isfinite(scores[0])

    def test_mu_must_be_positive(self):
        with pytest.raises(ConfigError):
            confidence_scores(PAIR, 0.0)


class TestDeflate:
    def test_hand_values(self):
        deflated = deflate(PAIR, 0, 0.1)
        expected = [[1 - 1 / 1.1, 0.5 - 0.5 / 1.1], [0.5 - 0.5 / 1.1, 1 - 0.25 / 1.1]]
        assert np.allclose(deflated.entries, expected, atol=1e-12)
        assert PAIR.entries[0, 0] == 1.0

    @pytest.mark.parametrize("k", range(4))
    def test_identity(self, k):
        deflated = deflate(KernelMatrix(np.eye(4), LINEAR), k, 0.1)
        expected = np.eye(4)
        expected[k, k] = 0.1 / 1.1
        assert np.allclose(deflated.entries, expected, atol=1e-15)

    def test_large_mu_vanishes(self):
        K = random_psd(3, 10)
        deflated = deflate(K, 4, 1e12)
        bound = 1e-10 * np.max(np.abs(K.entries)) ** 2
        assert np.max(np.abs(deflated.entries - K.entries)) <= bound

    def test_out_of_range(self):
        with pytest.raises(ShapeError):
            deflate(PAIR, 2, 0.1)

    @pytest.mark.parametrize("seed", range(100))
    def test_spectrum(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 41))
        K = random_psd(seed, n)
        mu = float(rng.uniform(0.01, 2.0))
        index = int(rng.integers(n))
        deflated = deflate(K, index, mu)
        diag = K.entries[index, index]
        assert deflated.is_symmetric(tol=0.0)
        assert deflated.min_eigenvalue() >= -1e-8 * n
        assert deflated.entries[index, index] == pytest.approx(
            diag * mu / (diag + mu), rel=1e-9, abs=1e-12
        )

    @pytest.mark.parametrize("variant", list(ScoreVariant))
    @pytest.mark.parametrize("seed", range(50))
    def test_score_of_deflated_index_drops(self, seed, variant):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 21))
        K = random_psd(seed, n)
        mu = float(rng.uniform(0.01, 2.0))
        index = int(np.argmax(np.diag(K.entries)))
        before = confidence_scores(K, mu, variant=variant)[index]
        after = confidence_scores(deflate(K, index, mu), mu, variant=variant)[index]
        assert after < before


class TestSequentialSelect:
    def test_diagonal_order(self):
        K = KernelMatrix(np.diag([0.5, 3.0, 1.0, 2.0]), LINEAR)
        selected = sequential_select(K, 4, 0.1, ScoreVariant.TED)
        assert selected == [1, 3, 2, 0]

    def test_ties_lowest_index(self):
        K = KernelMatrix(np.eye(3), LINEAR)
        assert sequential_select(K, 3, 0.1, ScoreVariant.PAPER) == [0, 1, 2]

    def test_count_too_large(self):
        with pytest.raises(ConfigError):
            sequential_select(PAIR, 3, 0.1, ScoreVariant.PAPER)


class TestSparsifyHalve:
    def test_two_points(self):
        pool = sparsify_halve([[0.0], [1.0]], KernelSpec(gamma=1.0))
        assert len(pool) == 1

    @pytest.mark.parametrize(
        ("n", "fraction", "size"),
        [
            pytest.param(10, 0.5, 5, id="half"),
            pytest.param(11, 0.5, 5, id="floor"),
            pytest.param(9, 0.3, 2, id="fraction"),
        ],
    )
    def test_size(self, n, fraction, size):
        X = np.random.default_rng(n).normal(size=(n, 2))
        pool = sparsify_halve(X, KernelSpec(), SparsifyParams(target_fraction=fraction))
        assert len(pool) == size
        assert len(set(pool)) == size

    def test_too_small(self):
        with pytest.raises(ConfigError):
            sparsify_halve([[0.0]], KernelSpec(gamma=1.0))
        with pytest.raises(ConfigError):
            sparsify_halve(
                [[0.0], [1.0]],
                KernelSpec(gamma=1.0),
                SparsifyParams(target_fraction=0.4),
            )

    @pytest.mark.parametrize("seed", range(30))
    @pytest.mark.parametrize("variant", list(ScoreVariant))
    def test_matches_naive(self, seed, variant):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 51))
        X = rng.normal(size=(n, int(rng.integers(1, 6))))
        params = SparsifyParams(
            mu=float(rng.uniform(0.05, 1.0)),
            target_fraction=float(rng.uniform(0.2, 1.0)),
            score_variant=variant,
        )
        if params.target_size(n) < 1:
            params = SparsifyParams(mu=params.mu, score_variant=variant)
        spec = KernelSpec()
        assert sparsify_halve(X, spec, params) == naive_sparsify(X, spec, params)
