"""Training-free codec quantizer primitives.

Finite scalar quantization (FSQ) with mixed-radix indexing, nearest-neighbor
vector quantization (VQ) over a file-loaded codebook, and the factorized
down/up projection wrapped around VQ. Batch VQ assignment is the hot loop
and has numba and numpy variants selected by voxkit._accel.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _accel


class QuantizerError(Exception):
    pass


# ---------------------------------------------------------------------------
# FSQ
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FsqConfig:
    """Per-dimension level counts; levels are uniform over [-1, 1] inclusive."""

    levels_per_dim: tuple

    def __post_init__(self):
        levels = tuple(int(l) for l in self.levels_per_dim)
        if not levels or any(l < 2 for l in levels):
            raise ValueError("every dimension needs at least 2 levels")
        object.__setattr__(self, "levels_per_dim", levels)

    @property
    def dims(self):
        return len(self.levels_per_dim)

    @property
    def codebook_size(self):
        return math.prod(self.levels_per_dim)


# 6 dimensions x 4 levels -> 4096 codes.
DEFAULT_FSQ_CONFIG = FsqConfig((4, 4, 4, 4, 4, 4))


@dataclass(frozen=True)
class FsqCode:
    digits: tuple
    index: int


def fsq_index(digits, config):
    """Mixed-radix encoding, dimension 0 most significant."""
    digits = tuple(int(d) for d in digits)
    if len(digits) != config.dims:
        raise QuantizerError("digit count does not match config dims")
    index = 0
    for d, levels in zip(digits, config.levels_per_dim):
        if not 0 <= d < levels:
            raise QuantizerError(f"digit {d} out of range for {levels} levels")
        index = index * levels + d
    return index


def fsq_digits(index, config):
    """Inverse of fsq_index."""
    if not 0 <= index < config.codebook_size:
        raise QuantizerError(f"index {index} out of range")
    digits = [0] * config.dims
    rem = int(index)
    for i in range(config.dims - 1, -1, -1):
        levels = config.levels_per_dim[i]
        rem, digits[i] = divmod(rem, levels)
    return tuple(digits)


def fsq_quantize(vector, config=DEFAULT_FSQ_CONFIG):
    """Clamp to [-1, 1], snap each dimension to the nearest of its uniform
    levels (midpoint ties round toward the higher level)."""
    vec = np.asarray(vector, dtype=np.float64)
    if vec.shape != (config.dims,):
        raise QuantizerError(f"expected vector of length {config.dims}, got {vec.shape}")
    digits = []
    for x, levels in zip(vec, config.levels_per_dim):
        x = min(1.0, max(-1.0, float(x)))
        pos = (x + 1.0) * (levels - 1) / 2.0  # in [0, levels-1]
        digits.append(min(levels - 1, int(math.floor(pos + 0.5))))
    digits = tuple(digits)
    return FsqCode(digits=digits, index=fsq_index(digits, config))


def fsq_dequantize(code, config=DEFAULT_FSQ_CONFIG):
    """Level values for a code; accepts an FsqCode or a digit sequence."""
    digits = code.digits if isinstance(code, FsqCode) else tuple(int(d) for d in code)
    if len(digits) != config.dims:
        raise QuantizerError("digit count does not match config dims")
    out = np.empty(config.dims)
    for i, (d, levels) in enumerate(zip(digits, config.levels_per_dim)):
        if not 0 <= d < levels:
            raise QuantizerError(f"digit {d} out of range for {levels} levels")
        out[i] = -1.0 + 2.0 * d / (levels - 1)
    return out


def fsq_quantize_batch(vectors, config=DEFAULT_FSQ_CONFIG):
    """Vectorized fsq_quantize over rows; returns an int64 index array."""
    mat = np.asarray(vectors, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != config.dims:
        raise QuantizerError(f"expected (n, {config.dims}) matrix")
    levels = np.asarray(config.levels_per_dim, dtype=np.float64)
    pos = (np.clip(mat, -1.0, 1.0) + 1.0) * (levels - 1) / 2.0
    digits = np.minimum(np.floor(pos + 0.5).astype(np.int64), (levels - 1).astype(np.int64))
    radix = np.ones(config.dims, dtype=np.int64)
    for i in range(config.dims - 2, -1, -1):
        radix[i] = radix[i + 1] * config.levels_per_dim[i + 1]
    return digits @ radix


# ---------------------------------------------------------------------------
# VQ
# ---------------------------------------------------------------------------

DEFAULT_VQ_CODEBOOK_SIZE = 8192

_CODEBOOK_MAGIC = b"VOXKITVQ1\n"


@dataclass(frozen=True, eq=False)
class VqCodebook:
    entries: np.ndarray  # (codebook_size, latent_dim)

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] == 0:
            raise QuantizerError("codebook must be a nonempty 2-D matrix")
        uniq = np.unique(entries, axis=0)
        if len(uniq) != len(entries):
            raise QuantizerError("codebook contains duplicate entries")
        object.__setattr__(self, "entries", entries)

    @property
    def codebook_size(self):
        return self.entries.shape[0]

    @property
    def latent_dim(self):
        return self.entries.shape[1]

    def save(self, path):
        """Binary layout: magic line, ascii 'size dim' line, an endianness
        note line, then row-major little-endian float64 entries."""
        with open(path, "wb") as f:
            f.write(_CODEBOOK_MAGIC)
            f.write(f"{self.codebook_size} {self.latent_dim}\n".encode())
            f.write(b"float64 little-endian row-major\n")
            f.write(self.entries.astype("<f8").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as f:
            magic = f.read(len(_CODEBOOK_MAGIC))
            if magic != _CODEBOOK_MAGIC:
                raise QuantizerError(f"not a voxkit codebook file: {path}")
            size, dim = (int(v) for v in f.readline().split())
            f.readline()  # endianness note
            data = np.frombuffer(f.read(size * dim * 8), dtype="<f8")
            if data.size != size * dim:
                raise QuantizerError(f"truncated codebook file: {path}")
        return cls(entries=data.reshape(size, dim).astype(np.float64))


def vq_quantize(vector, codebook):
    """Nearest entry by squared Euclidean distance; ties take the lowest index."""
    vec = np.asarray(vector, dtype=np.float64)
    if vec.shape != (codebook.latent_dim,):
        raise QuantizerError(
            f"expected vector of length {codebook.latent_dim}, got {vec.shape}"
        )
    dists = ((codebook.entries - vec) ** 2).sum(axis=1)
    index = int(np.argmin(dists))  # argmin returns the first minimum
    return index, codebook.entries[index].copy()


def _vq_assign_numpy(vectors, entries):
    out = np.empty(len(vectors), dtype=np.int64)
    # chunked to bound the (chunk, K) distance matrix
    chunk = max(1, int(4_000_000 // max(1, len(entries))))
    for s in range(0, len(vectors), chunk):
        block = vectors[s : s + chunk]
        d = ((block[:, None, :] - entries[None, :, :]) ** 2).sum(axis=2)
        out[s : s + chunk] = np.argmin(d, axis=1)
    return out


_vq_assign_numba = None


def _get_vq_assign_numba():
    global _vq_assign_numba
    if _vq_assign_numba is None:
        from numba import njit

        @njit(cache=True)
        def kernel(vectors, entries):
            n = vectors.shape[0]
            k = entries.shape[0]
            dim = entries.shape[1]
            out = np.empty(n, dtype=np.int64)
            for i in range(n):
                best = 0
                best_d = np.inf
                for c in range(k):
                    d = 0.0
                    for j in range(dim):
                        diff = vectors[i, j] - entries[c, j]
                        d += diff * diff
                    if d < best_d:
                        best_d = d
                        best = c
                out[i] = best
            return out

        _vq_assign_numba = kernel
    return _vq_assign_numba


def vq_quantize_batch(vectors, codebook):
    """Row-wise nearest-neighbor assignment; returns int64 indices."""
    mat = np.ascontiguousarray(vectors, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != codebook.latent_dim:
        raise QuantizerError(f"expected (n, {codebook.latent_dim}) matrix")
    if _accel.use_numba():
        return _get_vq_assign_numba()(mat, codebook.entries)
    return _vq_assign_numpy(mat, codebook.entries)


# ---------------------------------------------------------------------------
# Factorized projection
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FactorizedProjection:
    """Linear maps into and out of the low-dimensional VQ latent space."""

    down: np.ndarray  # (input_dim, latent_dim)
    up: np.ndarray  # (latent_dim, input_dim)

    def __post_init__(self):
        down = np.asarray(self.down, dtype=np.float64)
        up = np.asarray(self.up, dtype=np.float64)
        if down.ndim != 2 or up.ndim != 2 or down.shape[1] != up.shape[0]:
            raise QuantizerError("down and up projection shapes are incompatible")
        object.__setattr__(self, "down", down)
        object.__setattr__(self, "up", up)

    @property
    def input_dim(self):
        return self.down.shape[0]

    @property
    def latent_dim(self):
        return self.down.shape[1]


def factorized_roundtrip(vector, proj, codebook):
    """up(nearest codebook entry of down(vector))."""
    vec = np.asarray(vector, dtype=np.float64)
    if vec.shape != (proj.input_dim,):
        raise QuantizerError(f"expected vector of length {proj.input_dim}, got {vec.shape}")
    if codebook.latent_dim != proj.latent_dim:
        raise QuantizerError("codebook latent_dim does not match projection")
    _, quantized = vq_quantize(vec @ proj.down, codebook)
    return quantized @ proj.up


# ---------------------------------------------------------------------------
# Codebook usage statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CodebookStats:
    counts: np.ndarray
    perplexity: float


def codebook_stats(assignments, codebook_size):
    """Per-code counts and exp(entropy) of the empirical code distribution."""
    idx = np.asarray(list(assignments), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= codebook_size):
        raise QuantizerError("assignment index out of range")
    counts = np.bincount(idx, minlength=codebook_size)
    total = counts.sum()
    if total == 0:
        return CodebookStats(counts=counts, perplexity=0.0)
    probs = counts[counts > 0] / total
    entropy = float(-(probs * np.log(probs)).sum())
    return CodebookStats(counts=counts, perplexity=float(np.exp(entropy)))
