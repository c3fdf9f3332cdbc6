"""Record parsing, segment extraction, and synthetic record generation.

File layout (one record = three files):

* ``<name>.hea``  text header. Line 1: ``name channels rate samples``;
  one line per channel: ``filename format adc_gain adc_zero``.
* ``<name>.dat``  binary signal, packed-212: every 3 bytes hold two
  12-bit two's-complement samples, channels interleaved sample by sample.
* ``<name>.csv``  annotations, one ``sample_index,symbol`` per line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .aami import AamiClass, map_symbol_to_aami
from .errors import (
    InvalidSpec,
    MalformedAnnotation,
    MalformedHeader,
    TruncatedData,
    UnsupportedFormat,
)

SIGNAL_FORMAT = 212
DIGITAL_MIN = -2048
DIGITAL_MAX = 2047


@dataclass(frozen=True)
class RecordHeader:
    record_name: str
    num_channels: int
    sampling_rate_hz: int
    num_samples: int
    signal_file: str
    adc_gain: tuple[float, ...]   # ADC units per millivolt, one per channel
    adc_zero: tuple[int, ...]     # ADC baseline, one per channel

    def __post_init__(self):
        if self.num_channels <= 0 or self.sampling_rate_hz <= 0 or self.num_samples <= 0:
            raise MalformedHeader(
                f"record {self.record_name!r}: channels/rate/samples must be positive"
            )
        if len(self.adc_gain) != self.num_channels or len(self.adc_zero) != self.num_channels:
            raise MalformedHeader(
                f"record {self.record_name!r}: per-channel field count != num_channels"
            )


@dataclass
class EcgRecord:
    header: RecordHeader
    samples: np.ndarray                  # (num_channels, num_samples), millivolts
    annotations: list[tuple[int, str]]   # (sample_index, beat symbol)

    def __post_init__(self):
        expect = (self.header.num_channels, self.header.num_samples)
        if self.samples.shape != expect:
            raise MalformedHeader(
                f"signal shape {self.samples.shape} does not match header {expect}"
            )
        for idx, _sym in self.annotations:
            if not 0 <= idx < self.header.num_samples:
                raise MalformedAnnotation(f"annotation index {idx} outside [0, {self.header.num_samples})")


@dataclass
class Segment:
    """One labeled beat window of shape (2, 2*half_width + 1)."""

    data: np.ndarray
    label: AamiClass
    source: tuple[str, int]   # (record_name, center_index)
    symbol: str = ""          # original beat symbol, kept for bookkeeping


@dataclass
class ExtractionResult:
    segments: list[Segment]
    skipped: int               # annotations dropped (window out of bounds or unmapped symbol)
    skipped_unknown: int = 0   # subset of `skipped` dropped for an unmapped symbol


def parse_header(text: str) -> RecordHeader:
    """Parse header text into a RecordHeader.

    Raises MalformedHeader on structural problems and UnsupportedFormat
    when a channel declares a storage format other than 212.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise MalformedHeader("header needs a record line plus one line per channel")
    fields = lines[0].split()
    if len(fields) != 4:
        raise MalformedHeader(f"record line has {len(fields)} fields, expected 4")
    name = fields[0]
    try:
        num_channels = int(fields[1])
        rate = int(fields[2])
        num_samples = int(fields[3])
    except ValueError as exc:
        raise MalformedHeader(f"non-integer field in record line: {lines[0]!r}") from exc
    if len(lines) != 1 + num_channels:
        raise MalformedHeader(
            f"expected {num_channels} channel lines, found {len(lines) - 1}"
        )

    signal_files: list[str] = []
    gains: list[float] = []
    zeros: list[int] = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 4:
            raise MalformedHeader(f"channel line has {len(parts)} fields, expected 4: {ln!r}")
        fname, fmt, gain, zero = parts
        try:
            fmt_code = int(fmt)
        except ValueError as exc:
            raise MalformedHeader(f"non-integer format code: {fmt!r}") from exc
        if fmt_code != SIGNAL_FORMAT:
            raise UnsupportedFormat(f"format {fmt_code} not supported, only {SIGNAL_FORMAT}")
        try:
            gains.append(float(gain))
            zeros.append(int(zero))
        except ValueError as exc:
            raise MalformedHeader(f"bad gain/zero in channel line: {ln!r}") from exc
        signal_files.append(fname)

    if len(set(signal_files)) != 1:
        raise MalformedHeader("all channels must share one signal file")
    return RecordHeader(
        record_name=name,
        num_channels=num_channels,
        sampling_rate_hz=rate,
        num_samples=num_samples,
        signal_file=signal_files[0],
        adc_gain=tuple(gains),
        adc_zero=tuple(zeros),
    )


def decode_packed_212(data: bytes) -> np.ndarray:
    """Decode a packed-212 byte stream into int16 digital samples.

    Each byte triple (b0, b1, b2) holds two 12-bit two's-complement values:
    first = (b1 & 0x0F) << 8 | b0, second = (b1 & 0xF0) << 4 | b2.
    """
    if len(data) % 3 != 0:
        raise TruncatedData(f"byte stream length {len(data)} is not a multiple of 3")
    b = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
    first = ((b[:, 1] & 0x0F) << 8) | b[:, 0]
    second = ((b[:, 1] & 0xF0) << 4) | b[:, 2]
    out = np.empty(2 * b.shape[0], dtype=np.int32)
    out[0::2] = first
    out[1::2] = second
    out[out > DIGITAL_MAX] -= 4096
    return out.astype(np.int16)


def encode_packed_212(samples: np.ndarray) -> bytes:
    """Inverse of decode_packed_212 for an even-length sample vector."""
    s = np.asarray(samples, dtype=np.int64)
    if s.ndim != 1 or s.size % 2 != 0:
        raise ValueError("need a 1-D vector with an even number of samples")
    if s.size and (s.min() < DIGITAL_MIN or s.max() > DIGITAL_MAX):
        raise ValueError(f"samples outside [{DIGITAL_MIN}, {DIGITAL_MAX}]")
    u = np.where(s < 0, s + 4096, s).astype(np.uint32)
    first, second = u[0::2], u[1::2]
    out = np.empty((first.size, 3), dtype=np.uint8)
    out[:, 0] = first & 0xFF
    out[:, 1] = ((first >> 8) & 0x0F) | (((second >> 8) & 0x0F) << 4)
    out[:, 2] = second & 0xFF
    return out.tobytes()


def parse_signal_212(data: bytes, header: RecordHeader) -> EcgRecord:
    """Decode an interleaved 2-channel packed-212 stream into millivolts."""
    if header.num_channels != 2:
        raise MalformedHeader(
            f"pipeline requires 2 channels, header declares {header.num_channels}"
        )
    total = header.num_channels * header.num_samples
    expected = math.ceil(3 * total / 2)
    if len(data) != expected:
        raise TruncatedData(f"signal file is {len(data)} bytes, expected {expected}")
    digital = decode_packed_212(data).astype(np.float64).reshape(-1, 2).T
    gain = np.asarray(header.adc_gain)[:, None]
    zero = np.asarray(header.adc_zero)[:, None]
    millivolts = (digital - zero) / gain
    return EcgRecord(header=header, samples=millivolts, annotations=[])


def parse_annotations(text: str) -> list[tuple[int, str]]:
    """Parse ``sample_index,symbol`` CSV lines, sorted ascending by index.

    Duplicate indices keep their input order (stable sort).
    """
    out: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedAnnotation(f"line {lineno}: expected 'index,symbol', got {raw!r}")
        idx_text, symbol = parts[0].strip(), parts[1].strip()
        try:
            idx = int(idx_text)
        except ValueError as exc:
            raise MalformedAnnotation(f"line {lineno}: non-integer index {idx_text!r}") from exc
        if not symbol:
            raise MalformedAnnotation(f"line {lineno}: empty symbol")
        out.append((idx, symbol))
    out.sort(key=lambda item: item[0])
    return out


def extract_segments(record: EcgRecord, half_width: int = 120) -> ExtractionResult:
    """Cut one window of 2*half_width+1 columns around each annotated beat.

    Annotations whose window would cross a record edge, and annotations
    with a symbol outside the AAMI table, are skipped and counted rather
    than padded or raised.
    """
    if half_width < 1:
        raise ValueError("half_width must be >= 1")
    n = record.header.num_samples
    segments: list[Segment] = []
    skipped = 0
    skipped_unknown = 0
    for idx, symbol in record.annotations:
        if not (half_width <= idx < n - half_width):
            skipped += 1
            continue
        try:
            label = map_symbol_to_aami(symbol)
        except Exception:
            skipped += 1
            skipped_unknown += 1
            continue
        window = record.samples[:, idx - half_width: idx + half_width + 1].copy()
        segments.append(Segment(data=window, label=label,
                                source=(record.header.record_name, idx),
                                symbol=symbol))
    return ExtractionResult(segments=segments, skipped=skipped, skipped_unknown=skipped_unknown)


# --- synthetic records ----------------------------------------------------

@dataclass
class SynthSpec:
    num_samples: int
    rate: int = 360
    beat_indices: tuple[int, ...] = ()
    beat_symbols: tuple[str, ...] = ()
    noise_std: float = 0.0           # millivolts
    record_name: str = "synth"
    adc_gain: float = 200.0
    adc_zero: int = 0

    def validate(self) -> None:
        if self.num_samples <= 0 or self.rate <= 0:
            raise InvalidSpec("num_samples and rate must be positive")
        if len(self.beat_indices) != len(self.beat_symbols):
            raise InvalidSpec("beat_indices and beat_symbols differ in length")
        if self.noise_std < 0:
            raise InvalidSpec("noise_std must be >= 0")
        prev = -1
        for idx in self.beat_indices:
            if idx <= prev:
                raise InvalidSpec("beat_indices must be strictly increasing")
            if not 0 <= idx < self.num_samples:
                raise InvalidSpec(f"beat index {idx} outside [0, {self.num_samples})")
            prev = idx
        for sym in self.beat_symbols:
            if sym not in PULSE_PARAMS:
                raise InvalidSpec(f"no pulse shape defined for symbol {sym!r}")


@dataclass(frozen=True)
class PulseShape:
    """A beat is a main bump plus one satellite bump (amplitudes in mV)."""

    amp: float
    width: float
    side_amp: float = 0.0
    side_offset: float = 0.0
    side_width: float = 10.0


# Distinct amplitude/width per symbol. The shapes within one AAMI class
# share a family (so class structure survives per-segment normalization)
# while differing enough that symbols stay distinguishable by peak height.
PULSE_PARAMS: dict[str, PulseShape] = {
    # class N: sharp R peak with a small leading dip
    "N": PulseShape(1.00, 8.0, -0.25, -22.0, 5.0),
    "L": PulseShape(1.10, 9.5, -0.25, -22.0, 5.0),
    "R": PulseShape(0.90, 7.0, -0.25, -22.0, 5.0),
    "e": PulseShape(0.70, 8.5, -0.20, -22.0, 5.0),
    "j": PulseShape(0.80, 7.5, -0.20, -22.0, 5.0),
    # class S: narrow spike with a trailing bump
    "A": PulseShape(0.90, 4.0, 0.45, 45.0, 10.0),
    "a": PulseShape(0.80, 4.5, 0.45, 45.0, 10.0),
    "J": PulseShape(1.00, 3.5, 0.40, 45.0, 10.0),
    "S": PulseShape(0.85, 4.0, 0.50, 45.0, 10.0),
    # class V: wide complex with a deep after-dip
    "V": PulseShape(1.20, 22.0, -0.55, 40.0, 14.0),
    "E": PulseShape(1.05, 25.0, -0.55, 40.0, 14.0),
    # class F: intermediate width with a leading bump
    "F": PulseShape(1.00, 13.0, 0.50, -35.0, 9.0),
    # class Q: broad low mound with a late dip
    "/": PulseShape(0.70, 35.0, -0.30, 60.0, 12.0),
    "f": PulseShape(0.60, 32.0, -0.30, 60.0, 12.0),
    "Q": PulseShape(0.55, 38.0, -0.25, 60.0, 12.0),
}

_PULSE_SUPPORT = 120  # samples either side of the beat center


def _pulse_waveform(shape: PulseShape) -> np.ndarray:
    t = np.arange(-_PULSE_SUPPORT, _PULSE_SUPPORT + 1, dtype=np.float64)
    main = shape.amp * np.exp(-0.5 * (t / shape.width) ** 2)
    side = shape.side_amp * np.exp(-0.5 * ((t - shape.side_offset) / shape.side_width) ** 2)
    return main + side


def synth_record(spec: SynthSpec, seed: int) -> EcgRecord:
    """Generate a deterministic two-channel record from a SynthSpec.

    Channel 1 carries the pulse table verbatim; channel 2 is a scaled,
    slightly widened copy so the two leads are correlated but distinct.
    White noise of spec.noise_std is added to both channels.
    """
    spec.validate()
    rng = np.random.default_rng(seed)
    signal = np.zeros((2, spec.num_samples), dtype=np.float64)
    for idx, sym in zip(spec.beat_indices, spec.beat_symbols):
        shape = PULSE_PARAMS[sym]
        wide = PulseShape(0.6 * shape.amp, 1.3 * shape.width,
                          0.6 * shape.side_amp, shape.side_offset, 1.3 * shape.side_width)
        for ch, pulse in enumerate((_pulse_waveform(shape), _pulse_waveform(wide))):
            lo = idx - _PULSE_SUPPORT
            hi = idx + _PULSE_SUPPORT + 1
            p_lo = max(0, -lo)
            p_hi = pulse.size - max(0, hi - spec.num_samples)
            signal[ch, max(0, lo): min(hi, spec.num_samples)] += pulse[p_lo:p_hi]
    signal += rng.normal(0.0, spec.noise_std, size=signal.shape) if spec.noise_std > 0 else 0.0

    header = RecordHeader(
        record_name=spec.record_name,
        num_channels=2,
        sampling_rate_hz=spec.rate,
        num_samples=spec.num_samples,
        signal_file=f"{spec.record_name}.dat",
        adc_gain=(spec.adc_gain, spec.adc_gain),
        adc_zero=(spec.adc_zero, spec.adc_zero),
    )
    annotations = list(zip(spec.beat_indices, spec.beat_symbols))
    return EcgRecord(header=header, samples=signal, annotations=annotations)


# --- directory-level reading and writing ----------------------------------

def header_to_text(header: RecordHeader) -> str:
    lines = [f"{header.record_name} {header.num_channels} "
             f"{header.sampling_rate_hz} {header.num_samples}"]
    for gain, zero in zip(header.adc_gain, header.adc_zero):
        lines.append(f"{header.signal_file} {SIGNAL_FORMAT} {gain:g} {zero}")
    return "\n".join(lines) + "\n"


def read_record(records_dir: str | Path, name: str,
                annotations_dir: str | Path | None = None) -> EcgRecord:
    """Read <name>.hea / signal file / <name>.csv into an EcgRecord."""
    records_dir = Path(records_dir)
    annotations_dir = Path(annotations_dir) if annotations_dir else records_dir
    header_path = records_dir / f"{name}.hea"
    if not header_path.exists():
        raise FileNotFoundError(f"missing header file: {header_path}")
    header = parse_header(header_path.read_text())
    if header.num_channels != 2:
        raise MalformedHeader(
            f"pipeline requires 2 channels, record {name!r} has {header.num_channels}"
        )
    signal_path = records_dir / header.signal_file
    if not signal_path.exists():
        raise FileNotFoundError(f"missing signal file: {signal_path}")
    record = parse_signal_212(signal_path.read_bytes(), header)
    ann_path = annotations_dir / f"{name}.csv"
    if not ann_path.exists():
        raise FileNotFoundError(f"missing annotation file: {ann_path}")
    record.annotations = parse_annotations(ann_path.read_text())
    record.__post_init__()   # re-check annotation bounds
    return record


def write_record(record: EcgRecord, records_dir: str | Path,
                 annotations_dir: str | Path | None = None) -> None:
    """Write an EcgRecord as the .hea / .dat / .csv triple."""
    records_dir = Path(records_dir)
    annotations_dir = Path(annotations_dir) if annotations_dir else records_dir
    records_dir.mkdir(parents=True, exist_ok=True)
    annotations_dir.mkdir(parents=True, exist_ok=True)
    header = record.header

    (records_dir / f"{header.record_name}.hea").write_text(header_to_text(header))

    gain = np.asarray(header.adc_gain)[:, None]
    zero = np.asarray(header.adc_zero)[:, None]
    digital = np.rint(record.samples * gain + zero)
    digital = np.clip(digital, DIGITAL_MIN, DIGITAL_MAX).astype(np.int64)
    interleaved = digital.T.reshape(-1)
    (records_dir / header.signal_file).write_bytes(encode_packed_212(interleaved))

    lines = "".join(f"{idx},{sym}\n" for idx, sym in record.annotations)
    (annotations_dir / f"{header.record_name}.csv").write_text(lines)


def list_records(records_dir: str | Path) -> list[str]:
    """Record names in a directory, sorted for deterministic iteration."""
    return sorted(p.stem for p in Path(records_dir).glob("*.hea"))
