import numpy as np
import pytest

from toeplitz_outliers.errors import DomainError
from toeplitz_outliers.noise import DISTS, FixedNoise, NoiseSource, entry, sample_block


def test_entry_is_deterministic():
    src = NoiseSource(17)
    a, b = entry(src, 5, 9), entry(NoiseSource(17), 5, 9)
    assert np.array(a).tobytes() == np.array(b).tobytes()
    assert entry(src, 5, 9) != entry(src, 9, 5)


@pytest.mark.parametrize("dist", [d for d in DISTS if d != "zero"])
def test_moments(dist):
    src = NoiseSource(3, dist)
    i = np.arange(1, 1001)
    e = src.entries(i[:, None], i[None, :]).ravel()
    assert abs(e.mean()) < 0.005
    assert 0.995 <= np.mean(np.abs(e) ** 2) <= 1.005


def test_complex_gaussian_parts_have_half_variance():
    i = np.arange(1, 1001)
    e = NoiseSource(8).entries(i[:, None], i[None, :]).ravel()
    assert np.var(e.real) == pytest.approx(0.5, abs=0.005)
    assert np.var(e.imag) == pytest.approx(0.5, abs=0.005)
    assert abs(np.mean(e.real * e.imag)) < 0.005


def test_block_nesting_and_frobenius():
    src = NoiseSource(2)
    np.testing.assert_array_equal(sample_block(src, 3)[:2, :2], sample_block(src, 2))
    big = sample_block(src, 200)
    assert np.sum(np.abs(big) ** 2) / 200 ** 2 == pytest.approx(1.0, rel=0.05)


def test_rademacher_values():
    b = sample_block(NoiseSource(1, "rademacher"), 30)
    assert set(np.unique(b)) <= {-1, 1}


def test_trials_differ_and_errors():
    src = NoiseSource(5)
    assert entry(src.trial(0), 1, 1) != entry(src.trial(1), 1, 1)
    assert entry(src.trial(3), 2, 2) == entry(NoiseSource(5).trial(3), 2, 2)
    with pytest.raises(DomainError):
        NoiseSource(1, "cauchy")
    with pytest.raises(DomainError):
        src.entry(0, 1)


def test_fixed_noise():
    f = FixedNoise({(1, 2): 3.0})
    np.testing.assert_array_equal(f.block([1, 2], [1, 2]), [[0, 3], [0, 0]])
