import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rngverify import synth
from rngverify.errors import InvalidBitDepth, InvalidParameter, InvalidPeriod, InvalidRho, OddLength
from rngverify.topology import pearson_r2


def splitmix_reference(seed: int, count: int) -> list[int]:
    """Textbook sequential SplitMix64 on Python ints."""
    mask = (1 << 64) - 1
    out, state = [], seed
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return out


def test_splitmix_reference_values():
    assert [int(v) for v in synth.splitmix64(0, 3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    assert int(synth.splitmix64(42, 1)[0]) == 0xBDD732262FEB6E95


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 50))
def test_splitmix_matches_sequential_reference(seed, start):
    got = [int(v) for v in synth.splitmix64(seed, 20, start=start)]
    assert got == splitmix_reference(seed, start + 20)[start:]


def test_uniforms_open_interval_and_deterministic():
    u = synth.uniforms(100_000, seed=5)
    assert u.min() > 0 and u.max() < 1
    np.testing.assert_array_equal(u, synth.uniforms(100_000, seed=5))
    assert not np.array_equal(u, synth.uniforms(100_000, seed=6))


def test_gaussian_moments():
    g = synth.gaussian(1_000_000, seed=42)
    assert abs(g.mean()) < 5 / 1000
    assert abs(g.std() - 1) < 5e-3


def test_random_bits_balanced():
    b = synth.random_bits(100_000, seed=3)
    assert b.dtype == np.uint8 and set(np.unique(b)) == {0, 1}
    assert abs(b.mean() - 0.5) < 0.01


def test_ar1_lag_one_correlation():
    for rho in (0.3, 0.7, -0.5):
        x = synth.ar1(400_000, rho, seed=9)
        r = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert r == pytest.approx(rho, abs=0.01)
        assert x.std() == pytest.approx(1.0, abs=0.02)
    np.testing.assert_array_equal(synth.ar1(1000, 0.0, seed=4), synth.gaussian(1000, seed=4))


def test_duplicate_halves_r2():
    exact = synth.duplicate_halves(20000, 0.0, seed=1)
    assert pearson_r2(exact[:10000], exact[10000:]) == 1.0
    for jitter in (0.5, 1.0, 3.0):
        s = synth.duplicate_halves(200_000, jitter, seed=1)
        assert pearson_r2(s[:100_000], s[100_000:]) == pytest.approx(1 / (1 + jitter**2), abs=0.01)


def test_sinusoid_drift_shape():
    s = synth.sinusoid_drift(100_000, 2.0, 1000.0, seed=2)
    resid = s - 2.0 * np.sin(2 * np.pi * np.arange(100_000) / 1000.0)
    assert resid.std() == pytest.approx(1.0, abs=0.02)


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, st.integers(2, 200), elements=st.floats(-1e6, 1e6)),
    st.integers(1, 24),
)
def test_quantize_properties(s, bits):
    q = synth.quantize(s, bits)
    assert q.shape == s.shape
    assert len(np.unique(q)) <= 2**bits
    np.testing.assert_array_equal(synth.quantize(q, bits), q)
    assert q.min() == s.min() and q.max() == s.max()
    if s.max() > s.min():
        assert np.all(np.abs(q - s) <= (s.max() - s.min()) / (2**bits - 1) + 1e-9 * np.abs(s).max())


def test_quantize_level_count():
    q = synth.quantize(synth.gaussian(1_000_000, seed=1), 8)
    assert len(np.unique(q)) <= 256


def test_generate_dispatch():
    spec = synth.SourceSpec("ar1", 1000, 7, {"rho": 0.4})
    np.testing.assert_array_equal(synth.generate(spec), synth.ar1(1000, 0.4, 7))
    with pytest.raises(InvalidParameter):
        synth.SourceSpec("gaussian", 7, 1)


def test_parameter_errors():
    with pytest.raises(InvalidRho):
        synth.ar1(100, 1.0, 0)
    with pytest.raises(OddLength):
        synth.duplicate_halves(101, 0.1, 0)
    with pytest.raises(InvalidPeriod):
        synth.sinusoid_drift(100, 1.0, 1.5, 0)
    with pytest.raises(InvalidBitDepth):
        synth.quantize(np.arange(10.0), 0)
    with pytest.raises(InvalidBitDepth):
        synth.quantize(np.arange(10.0), 25)
