import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from voxkit.quantizers import (
    DEFAULT_FSQ_CONFIG,
    DEFAULT_VQ_CODEBOOK_SIZE,
    FactorizedProjection,
    FsqConfig,
    QuantizerError,
    VqCodebook,
    codebook_stats,
    factorized_roundtrip,
    fsq_dequantize,
    fsq_digits,
    fsq_index,
    fsq_quantize,
    fsq_quantize_batch,
    vq_quantize,
    vq_quantize_batch,
)


# ---------------------------------------------------------------------------
# FSQ
# ---------------------------------------------------------------------------

def test_default_config_sizes():
    assert DEFAULT_FSQ_CONFIG.dims == 6
    assert DEFAULT_FSQ_CONFIG.codebook_size == 4096
    assert DEFAULT_VQ_CODEBOOK_SIZE == 8192


def test_fsq_extremes():
    code = fsq_quantize([-1.0] * 6)
    assert code.digits == (0,) * 6 and code.index == 0
    code = fsq_quantize([1.0] * 6)
    assert code.digits == (3,) * 6 and code.index == 4095


def test_fsq_snap_nearest_level():
    # 4-level grid is {-1, -1/3, 1/3, 1}; 0.2 snaps up to 1/3
    code = fsq_quantize([0.2, 0.0, 0.0, 0.0, 0.0, 0.0])
    assert code.digits[0] == 2


def test_fsq_midpoint_rounds_up():
    # midpoint between -1/3 and 1/3 is 0
    code = fsq_quantize([0.0] * 6)
    assert code.digits == (2,) * 6


def test_fsq_clamps_out_of_range():
    code = fsq_quantize([5.0, -5.0, 0.0, 0.0, 0.0, 0.0])
    assert code.digits[0] == 3 and code.digits[1] == 0


def test_fsq_length_mismatch():
    with pytest.raises(QuantizerError):
        fsq_quantize([0.0] * 5)


def test_fsq_dequantize_values():
    np.testing.assert_allclose(fsq_dequantize((0,) * 6), [-1.0] * 6)
    np.testing.assert_allclose(
        fsq_dequantize((0, 1, 2, 3, 0, 1)), [-1, -1 / 3, 1 / 3, 1, -1, -1 / 3]
    )


def test_fsq_dequantize_bad_digit():
    with pytest.raises(QuantizerError):
        fsq_dequantize((4, 0, 0, 0, 0, 0))


def test_fsq_index_mixed_radix():
    assert fsq_index((1, 0, 0, 0, 0, 0), DEFAULT_FSQ_CONFIG) == 1024
    assert fsq_digits(0, DEFAULT_FSQ_CONFIG) == (0,) * 6


def test_fsq_bijection_exhaustive():
    for index in range(DEFAULT_FSQ_CONFIG.codebook_size):
        digits = fsq_digits(index, DEFAULT_FSQ_CONFIG)
        assert fsq_index(digits, DEFAULT_FSQ_CONFIG) == index


def test_fsq_roundtrip_all_codes():
    for index in range(DEFAULT_FSQ_CONFIG.codebook_size):
        digits = fsq_digits(index, DEFAULT_FSQ_CONFIG)
        vec = fsq_dequantize(digits)
        assert fsq_quantize(vec).index == index


def test_fsq_mixed_radices():
    config = FsqConfig((2, 3, 5))
    assert config.codebook_size == 30
    for index in range(30):
        assert fsq_index(fsq_digits(index, config), config) == index


@given(st.lists(st.floats(min_value=-2, max_value=2, allow_nan=False),
                min_size=6, max_size=6))
def test_fsq_idempotent(vec):
    code = fsq_quantize(vec)
    assert fsq_quantize(fsq_dequantize(code)) == code


@given(st.lists(st.floats(min_value=-1, max_value=1, allow_nan=False),
                min_size=6, max_size=6))
def test_fsq_error_bound(vec):
    code = fsq_quantize(vec)
    err = np.abs(fsq_dequantize(code) - np.asarray(vec))
    assert np.all(err <= 1.0 / 3.0 + 1e-12)


def test_fsq_batch_matches_scalar():
    rng = np.random.default_rng(5)
    mat = rng.uniform(-1.5, 1.5, size=(200, 6))
    batch = fsq_quantize_batch(mat)
    for row, idx in zip(mat, batch):
        assert fsq_quantize(row).index == idx


# ---------------------------------------------------------------------------
# VQ
# ---------------------------------------------------------------------------

def make_codebook(k=8, dim=3, seed=0):
    rng = np.random.default_rng(seed)
    return VqCodebook(entries=rng.normal(size=(k, dim)))


def test_vq_exact_match():
    book = make_codebook()
    idx, vec = vq_quantize(book.entries[7], book)
    assert idx == 7
    np.testing.assert_array_equal(vec, book.entries[7])


def test_vq_nearest():
    book = VqCodebook(entries=np.array([[0.0, 0.0], [1.0, 1.0]]))
    idx, _ = vq_quantize([0.4, 0.4], book)
    assert idx == 0


def test_vq_tie_lowest_index():
    book = VqCodebook(entries=np.array([[1.0, 0.0], [0.0, 1.0]]))
    idx, _ = vq_quantize([0.5, 0.5], book)
    assert idx == 0


def test_vq_dimension_mismatch():
    with pytest.raises(QuantizerError):
        vq_quantize([1.0, 2.0, 3.0], make_codebook(dim=2))


def test_vq_duplicate_entries_rejected():
    with pytest.raises(QuantizerError, match="duplicate"):
        VqCodebook(entries=np.array([[1.0, 2.0], [1.0, 2.0]]))


def test_vq_brute_force_oracle():
    rng = np.random.default_rng(99)
    for _ in range(50):
        k = rng.integers(1, 64)
        dim = rng.integers(1, 8)
        book = VqCodebook(entries=rng.normal(size=(int(k), int(dim))))
        query = rng.normal(size=int(dim))
        idx, vec = vq_quantize(query, book)
        dists = [float(np.sum((e - query) ** 2)) for e in book.entries]
        best = min(range(len(dists)), key=lambda i: (dists[i], i))
        assert idx == best
        assert dists[idx] <= min(dists) + 1e-15


def test_vq_batch_matches_scalar():
    book = make_codebook(k=32, dim=4, seed=3)
    rng = np.random.default_rng(4)
    queries = rng.normal(size=(300, 4))
    batch = vq_quantize_batch(queries, book)
    for q, idx in zip(queries, batch):
        assert vq_quantize(q, book)[0] == idx


def test_vq_batch_backends_agree():
    import voxkit._accel as accel

    book = make_codebook(k=16, dim=5, seed=8)
    rng = np.random.default_rng(9)
    queries = rng.normal(size=(100, 5))
    current = accel.backend()
    try:
        accel.set_backend("numpy")
        a = vq_quantize_batch(queries, book)
        accel.set_backend("numba")
        b = vq_quantize_batch(queries, book)
    except RuntimeError:
        pytest.skip("numba unavailable")
    finally:
        accel.set_backend(current)
    np.testing.assert_array_equal(a, b)


def test_codebook_file_roundtrip(tmp_path):
    book = make_codebook(k=12, dim=6, seed=11)
    path = tmp_path / "codes.vqcb"
    book.save(path)
    loaded = VqCodebook.load(path)
    np.testing.assert_array_equal(loaded.entries, book.entries)


def test_codebook_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.vqcb"
    path.write_bytes(b"nope")
    with pytest.raises(QuantizerError):
        VqCodebook.load(path)


# ---------------------------------------------------------------------------
# factorized projection
# ---------------------------------------------------------------------------

def test_factorized_identity_maps_reduce_to_vq():
    book = make_codebook(k=6, dim=4, seed=2)
    proj = FactorizedProjection(down=np.eye(4), up=np.eye(4))
    query = np.array([0.3, -0.2, 0.9, 0.1])
    out = factorized_roundtrip(query, proj, book)
    np.testing.assert_array_equal(out, vq_quantize(query, book)[1])


def test_factorized_output_in_image():
    rng = np.random.default_rng(21)
    book = VqCodebook(entries=rng.normal(size=(4, 2)))
    proj = FactorizedProjection(down=rng.normal(size=(8, 2)), up=rng.normal(size=(2, 8)))
    out = factorized_roundtrip(rng.normal(size=8), proj, book)
    images = [e @ proj.up for e in book.entries]
    assert any(np.allclose(out, img) for img in images)


def test_factorized_hand_computed():
    down = np.zeros((8, 2))
    down[0, 0] = 1.0
    down[1, 1] = 1.0
    up = np.zeros((2, 8))
    up[0, 2] = 2.0
    up[1, 3] = -1.0
    book = VqCodebook(entries=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    x = np.array([0.9, 0.1, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0])
    # down(x) = (0.9, 0.1) -> nearest entry (1, 0) -> up gives 2 at slot 2
    out = factorized_roundtrip(x, FactorizedProjection(down, up), book)
    expected = np.zeros(8)
    expected[2] = 2.0
    np.testing.assert_allclose(out, expected)


def test_factorized_shape_mismatch():
    book = make_codebook(k=4, dim=3)
    proj = FactorizedProjection(down=np.eye(4, 2), up=np.eye(2, 4))
    with pytest.raises(QuantizerError):
        factorized_roundtrip(np.zeros(4), proj, book)


# ---------------------------------------------------------------------------
# codebook stats
# ---------------------------------------------------------------------------

def test_stats_uniform_perplexity():
    stats = codebook_stats(list(range(16)) * 4, 16)
    assert stats.perplexity == pytest.approx(16.0)


def test_stats_collapsed_perplexity():
    stats = codebook_stats([3] * 100, 8)
    assert stats.perplexity == pytest.approx(1.0)
    assert stats.counts[3] == 100


def test_stats_known_entropy():
    stats = codebook_stats([0, 0, 1, 2], 4)
    assert stats.perplexity == pytest.approx(math.exp(1.0397), abs=1e-3)
    assert stats.perplexity == pytest.approx(2.828, abs=1e-3)


def test_stats_out_of_range():
    with pytest.raises(QuantizerError):
        codebook_stats([0, 5], 4)
