import io
import struct

import numpy as np
import pytest

from ldtf.aami import AamiClass
from ldtf.artifacts import (
    iter_embedding_archive,
    read_matrix,
    read_segments,
    write_embedding_archive,
    write_matrix,
    write_segments,
)
from ldtf.errors import MalformedArchive
from ldtf.records import Segment


class TestEmbeddingFormat:
    def test_header_is_16_bytes(self, rng):
        matrix = rng.normal(size=(18, 241))
        buf = io.BytesIO()
        write_matrix(buf, matrix)
        raw = buf.getvalue()
        assert raw[:4] == b"LDE1"
        rows, cols, reserved = struct.unpack("<III", raw[4:16])
        assert (rows, cols, reserved) == (18, 241, 0)
        assert len(raw) == 16 + 18 * 241 * 8
        payload = np.frombuffer(raw[16:], dtype=np.float64).reshape(18, 241)
        np.testing.assert_array_equal(payload, matrix)

    def test_archive_roundtrip(self, tmp_path, rng):
        matrices = [rng.normal(size=(18, 241)) for _ in range(3)]
        path = tmp_path / "emb.lde1"
        write_embedding_archive(path, matrices)
        loaded = list(iter_embedding_archive(path))
        assert len(loaded) == 3
        for a, b in zip(matrices, loaded):
            np.testing.assert_array_equal(a, b)

    def test_bad_magic(self):
        buf = io.BytesIO(b"NOPE" + b"\x00" * 12)
        with pytest.raises(MalformedArchive):
            read_matrix(buf)

    def test_truncated_payload(self, rng):
        buf = io.BytesIO()
        write_matrix(buf, rng.normal(size=(2, 4)))
        raw = buf.getvalue()[:-8]
        with pytest.raises(MalformedArchive):
            read_matrix(io.BytesIO(raw))


class TestSegmentArchive:
    def test_roundtrip_preserves_labels_and_sources(self, tmp_path, rng):
        segments = [
            Segment(data=rng.normal(size=(2, 241)), label=AamiClass.V,
                    source=("rec_a", 1200)),
            Segment(data=rng.normal(size=(2, 241)), label=AamiClass.Q,
                    source=("rec_b", 77)),
        ]
        path = tmp_path / "segments.seg1"
        write_segments(path, segments)
        loaded = read_segments(path)
        assert len(loaded) == 2
        for original, copy in zip(segments, loaded):
            np.testing.assert_array_equal(original.data, copy.data)
            assert copy.label is original.label
            assert copy.source == original.source

    def test_empty_archive(self, tmp_path):
        path = tmp_path / "empty.seg1"
        write_segments(path, [])
        assert read_segments(path) == []

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.seg1"
        path.write_bytes(b"XXXX" + b"\x00" * 8)
        with pytest.raises(MalformedArchive):
            read_segments(path)
