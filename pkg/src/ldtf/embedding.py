"""Low-dimensional denoising embedding of a two-lead beat window.

A 2x241 segment becomes an 18x241 matrix. Per channel, the nine rows are

    raw signal,
    full-length projections of the level-1..4 low-pass wavelet bands,
    full-length projection of the level-4 high-pass band,
    denoised reconstruction (configurable detail levels dropped),
    Fourier magnitude,
    Fourier phase.

Wavelet analysis follows the Mallat cascade: convolve with the low/high
pass filters, keep the even-index samples, extend the signal half-sample
symmetrically at the boundaries. Each band then has
ceil((parent_length + K - 1) / 2) coefficients, which makes the inverse
cascade (upsample, convolve with the time-reversed filters, sum, crop by
K - 1) an exact left inverse for orthonormal filter pairs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import ceil

import numpy as np

from .errors import InconsistentPyramid, ShapeMismatch, SignalTooShort, UnknownBand
from .records import Segment

# --- wavelet filter families ------------------------------------------------

_SQRT2 = np.sqrt(2.0)

# Orthonormal scaling (low-pass) coefficients; sum = sqrt(2), sum of squares = 1.
_LOWPASS = {
    "haar": np.array([1.0, 1.0]) / _SQRT2,
    "db4": np.array([
        0.23037781330885523, 0.7148465705525415, 0.6308807679295904,
        -0.02798376941698385, -0.18703481171888114, 0.030841381835986965,
        0.032883011666982945, -0.010597401784997278,
    ]),
    "db6": np.array([
        0.11154074335008017, 0.4946238903983854, 0.7511339080215775,
        0.3152503517092432, -0.22626469396516913, -0.12976686756709563,
        0.09750160558707936, 0.02752286553001629, -0.031582039318031156,
        0.0005538422009938016, 0.004777257511010651, -0.00107730108499558,
    ]),
}


@dataclass(frozen=True)
class WaveletFilterPair:
    name: str
    h: np.ndarray   # high-pass analysis filter
    g: np.ndarray   # low-pass analysis filter

    @classmethod
    def from_lowpass(cls, name: str, g: np.ndarray) -> "WaveletFilterPair":
        g = np.asarray(g, dtype=np.float64)
        k = np.arange(g.size)
        h = (-1.0) ** k * g[::-1]   # alternating flip of the reversed low-pass
        return cls(name=name, h=h, g=g)

    def __len__(self) -> int:
        return self.g.size


def get_filters(name: str) -> WaveletFilterPair:
    try:
        return WaveletFilterPair.from_lowpass(name, _LOWPASS[name])
    except KeyError:
        raise ValueError(f"unknown wavelet family {name!r}; "
                         f"choose from {sorted(_LOWPASS)}") from None


WAVELET_FAMILIES = tuple(sorted(_LOWPASS))


# --- single-level analysis / synthesis ---------------------------------------

def _symmetric_take(x: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Sample x at arbitrary integer indices under half-sample symmetric
    extension (…x1 x0 | x0 x1 … xn-1 | xn-1 xn-2…), a triangle of period 2n."""
    n = x.size
    j = np.mod(indices, 2 * n)
    return x[np.where(j < n, j, 2 * n - 1 - j)]


def _analyze(x: np.ndarray, filt: np.ndarray) -> np.ndarray:
    """band[j] = sum_k filt[k] * x_sym[2j - k] for j in [0, ceil((n+K-1)/2))."""
    n, k = x.size, filt.size
    m = ceil((n + k - 1) / 2)
    ext = _symmetric_take(x, np.arange(-(k - 1), 2 * m - 1))
    return np.convolve(ext, filt, mode="valid")[::2]


def _synthesize(approx: np.ndarray, detail: np.ndarray,
                filters: WaveletFilterPair, out_len: int) -> np.ndarray:
    """Exact inverse of one _analyze level for orthonormal filter pairs."""
    k = len(filters)
    up_a = np.zeros(2 * approx.size - 1)
    up_a[::2] = approx
    up_d = np.zeros(2 * detail.size - 1)
    up_d[::2] = detail
    rec = np.convolve(up_a, filters.g[::-1]) + np.convolve(up_d, filters.h[::-1])
    return rec[k - 1: k - 1 + out_len]


# --- multi-level pyramid ------------------------------------------------------

@dataclass
class WaveletPyramid:
    levels: int
    approx: list[np.ndarray]        # approx[j-1] = low-pass output of level j
    details: list[np.ndarray]       # details[j-1] = high-pass output of level j
    input_lengths: list[int]        # signal length fed into each level
    filters: WaveletFilterPair
    boundary_mode: str = "symmetric"

    def _check_chain(self) -> None:
        k = len(self.filters)
        if not (len(self.approx) == len(self.details) == len(self.input_lengths) == self.levels):
            raise InconsistentPyramid("band list lengths disagree with levels")
        for j in range(self.levels):
            want = ceil((self.input_lengths[j] + k - 1) / 2)
            if self.approx[j].size != want or self.details[j].size != want:
                raise InconsistentPyramid(
                    f"level {j + 1}: band length {self.approx[j].size} != {want}"
                )
            if j + 1 < self.levels and self.input_lengths[j + 1] != want:
                raise InconsistentPyramid(
                    f"level {j + 2} input length does not chain from level {j + 1}"
                )


def dwt_decompose(x: np.ndarray, filters: WaveletFilterPair,
                  levels: int = 4) -> WaveletPyramid:
    """Mallat cascade: recursively split the low-pass branch `levels` times."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeMismatch("dwt_decompose expects a 1-D signal")
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if x.size < 2 ** levels:
        raise SignalTooShort(f"signal length {x.size} < 2**{levels}")
    approx, details, lengths = [], [], []
    current = x
    for _ in range(levels):
        lengths.append(current.size)
        details.append(_analyze(current, filters.h))
        current = _analyze(current, filters.g)
        approx.append(current)
    return WaveletPyramid(levels=levels, approx=approx, details=details,
                          input_lengths=lengths, filters=filters)


def dwt_reconstruct(pyramid: WaveletPyramid,
                    drop_detail_levels: frozenset[int] | set[int] = frozenset()) -> np.ndarray:
    """Inverse cascade; detail bands at the dropped levels are zeroed.

    With nothing dropped this reconstructs the original signal exactly
    (up to float round-off) for any orthonormal filter family.
    """
    bad = set(drop_detail_levels) - set(range(1, pyramid.levels + 1))
    if bad:
        raise ValueError(f"drop_detail_levels outside 1..{pyramid.levels}: {sorted(bad)}")
    pyramid._check_chain()
    current = pyramid.approx[-1]
    for level in range(pyramid.levels, 0, -1):
        detail = pyramid.details[level - 1]
        if level in drop_detail_levels:
            detail = np.zeros_like(detail)
        current = _synthesize(current, detail, pyramid.filters,
                              pyramid.input_lengths[level - 1])
    return current


BAND_IDS = ("L1", "L2", "L3", "L4", "H1", "H2", "H3", "H4")


def band_to_full_length(pyramid: WaveletPyramid, band: str) -> np.ndarray:
    """Project one band back to the original signal length.

    Keeps only the requested band (Lj = level-j approximation,
    Hj = level-j detail), zeroes everything else, and runs the inverse
    cascade from that level upward. The projections of H1..H4 plus L4 sum
    to the full reconstruction by linearity.
    """
    pyramid._check_chain()
    if not (isinstance(band, str) and len(band) == 2 and band[0] in "LH"
            and band[1].isdigit()):
        raise UnknownBand(f"band id {band!r} not of the form L<j>/H<j>")
    level = int(band[1])
    if not 1 <= level <= pyramid.levels:
        raise UnknownBand(f"band level {level} outside 1..{pyramid.levels}")

    if band[0] == "L":
        current = pyramid.approx[level - 1]
        start = level
    else:
        detail = pyramid.details[level - 1]
        current = _synthesize(np.zeros_like(detail), detail, pyramid.filters,
                              pyramid.input_lengths[level - 1])
        start = level - 1
    for lev in range(start, 0, -1):
        current = _synthesize(current, np.zeros(current.size), pyramid.filters,
                              pyramid.input_lengths[lev - 1])
    return current


# --- Fourier features ---------------------------------------------------------

PHASE_FLOOR = 1e-12   # bins with |X| below this get phase pinned to 0


@lru_cache(maxsize=8)
def _dft_matrix(n: int) -> np.ndarray:
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n)


def _fft_pow2(a: np.ndarray) -> np.ndarray:
    """Iterative radix-2 FFT; len(a) must be a power of two."""
    n = a.size
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    bits = n.bit_length() - 1
    rev = np.zeros(n, dtype=np.intp)
    for i in range(n):
        rev[i] = int(format(i, f"0{bits}b")[::-1], 2) if bits else 0
    out = a[rev].astype(np.complex128)
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = out.reshape(-1, size)
        even = blocks[:, :half].copy()
        odd = blocks[:, half:] * twiddle
        blocks[:, :half] = even + odd
        blocks[:, half:] = even - odd
        size *= 2
    return out


def _ifft_pow2(a: np.ndarray) -> np.ndarray:
    return np.conj(_fft_pow2(np.conj(a))) / a.size


def bluestein_dft(x: np.ndarray) -> np.ndarray:
    """Chirp-z DFT of arbitrary (e.g. prime) length via power-of-two FFTs."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    idx = np.arange(n)
    chirp = np.exp(-1j * np.pi * idx * idx / n)
    m = 1 << (2 * n - 1).bit_length()
    a = np.zeros(m, dtype=np.complex128)
    a[:n] = x * chirp
    b = np.zeros(m, dtype=np.complex128)
    b[:n] = np.conj(chirp)
    b[m - n + 1:] = np.conj(chirp[1:][::-1])
    conv = _ifft_pow2(_fft_pow2(a) * _fft_pow2(b))
    return conv[:n] * chirp


def dft_features(x: np.ndarray, fast: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Magnitude and phase of the unnormalized DFT of a real vector.

    The reference path is a direct matrix product (the window length 241 is
    prime, so nothing is lost); `fast=True` switches to the chirp-z route.
    Phase lies in (-pi, pi]; bins with near-zero magnitude get phase 0 so
    that float noise in atan2 never leaks into the embedding.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeMismatch("dft_features expects a 1-D signal")
    spectrum = bluestein_dft(x) if fast else _dft_matrix(x.size) @ x
    magnitude = np.abs(spectrum)
    phase = np.arctan2(spectrum.imag, spectrum.real)
    phase[magnitude < PHASE_FLOOR] = 0.0
    phase[phase == -np.pi] = np.pi
    return magnitude, phase


# --- the 18-row embedding ------------------------------------------------------

SEGMENT_CHANNELS = 2
EMBED_ROWS_PER_CHANNEL = 9
EMBED_ROWS = SEGMENT_CHANNELS * EMBED_ROWS_PER_CHANNEL
ROW_SCHEMES = ("as_printed", "details")

# Wavelet rows per scheme: the default stacks the four approximation bands
# plus the deepest detail; "details" stacks the non-redundant set instead.
_SCHEME_BANDS = {
    "as_printed": ("L1", "L2", "L3", "L4", "H4"),
    "details": ("H1", "H2", "H3", "H4", "L4"),
}


def row_labels(row_scheme: str = "as_printed") -> list[str]:
    bands = _SCHEME_BANDS[row_scheme]
    per_channel = ["raw", *bands, "denoised", "magnitude", "phase"]
    return [f"ch{c + 1}:{name}" for c in range(SEGMENT_CHANNELS) for name in per_channel]


@dataclass
class LdeEmbedding:
    matrix: np.ndarray           # (18, segment length)
    row_scheme: str = "as_printed"

    def __post_init__(self):
        if self.matrix.shape[0] != EMBED_ROWS:
            raise ShapeMismatch(f"embedding must have {EMBED_ROWS} rows, "
                                f"got {self.matrix.shape[0]}")


def embed(segment: Segment, filters: WaveletFilterPair,
          drop_detail_levels: frozenset[int] | set[int] = frozenset({1}),
          row_scheme: str = "as_printed") -> LdeEmbedding:
    """Assemble the 18-row embedding of a two-channel segment."""
    if row_scheme not in _SCHEME_BANDS:
        raise ValueError(f"row_scheme must be one of {ROW_SCHEMES}")
    data = np.asarray(segment.data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] != SEGMENT_CHANNELS:
        raise ShapeMismatch(f"segment must be ({SEGMENT_CHANNELS}, n), got {data.shape}")
    n = data.shape[1]
    rows = np.empty((EMBED_ROWS, n), dtype=np.float64)
    for ch in range(SEGMENT_CHANNELS):
        x = data[ch]
        pyramid = dwt_decompose(x, filters, levels=4)
        base = ch * EMBED_ROWS_PER_CHANNEL
        rows[base] = x
        for offset, band in enumerate(_SCHEME_BANDS[row_scheme], start=1):
            rows[base + offset] = band_to_full_length(pyramid, band)
        rows[base + 6] = dwt_reconstruct(pyramid, drop_detail_levels)
        rows[base + 7], rows[base + 8] = dft_features(x)
    return LdeEmbedding(matrix=rows, row_scheme=row_scheme)


def embed_dataset(segments: list[Segment], filters: WaveletFilterPair,
                  drop_detail_levels: frozenset[int] | set[int] = frozenset({1}),
                  row_scheme: str = "as_printed",
                  threads: int = 1) -> np.ndarray:
    """Embed a list of segments into an (n, 18, len) array, order preserved.

    Embedding is pure per segment, so `threads > 1` fans out over a process
    pool without changing the result.
    """
    if not segments:
        return np.zeros((0, EMBED_ROWS, 0))
    if threads > 1 and len(segments) > 1:
        from multiprocessing import get_context

        with get_context("fork").Pool(threads) as pool:
            mats = pool.starmap(
                _embed_matrix,
                [(seg.data, filters.name, frozenset(drop_detail_levels), row_scheme)
                 for seg in segments],
                chunksize=max(1, len(segments) // (4 * threads)),
            )
    else:
        mats = [embed(seg, filters, drop_detail_levels, row_scheme).matrix
                for seg in segments]
    return np.stack(mats)


def _embed_matrix(data: np.ndarray, family: str, drop: frozenset[int],
                  row_scheme: str) -> np.ndarray:
    seg = Segment(data=data, label=None, source=("", 0))
    return embed(seg, get_filters(family), drop, row_scheme).matrix
