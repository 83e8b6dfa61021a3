"""Ingestion, cropping and snapshot-matrix assembly."""

import json

import numpy as np
import pytest
from PIL import Image

from modalaug.errors import DataError
from modalaug.snapshots import (CropRect, FrameSequence, crop, load_crop_sidecar,
                                load_sequence, to_snapshot_matrix, write_frame)


def write_pngs(directory, frames):
    directory.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        write_frame(directory / f"frame_{i:04d}.png", frame)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def make_sequence(rng, k=5, ny=6, nx=4, dt=0.1):
    frames = rng.integers(0, 256, size=(k, ny, nx)).astype(np.uint8)
    return FrameSequence(frames=frames, dt=dt, source_id="s")


class TestLoadSequence:
    def test_loads_in_filename_order(self, tmp_path, rng):
        frames = rng.integers(0, 256, size=(4, 8, 8)).astype(np.uint8)
        write_pngs(tmp_path / "seq", frames)
        seq = load_sequence(tmp_path / "seq", dt=0.01)
        assert seq.k == 4 and seq.nx == 8 and seq.ny == 8
        np.testing.assert_array_equal(seq.frames, frames)
        assert seq.source_id == "seq"

    def test_single_frame_rejected(self, tmp_path, rng):
        write_pngs(tmp_path / "one", rng.integers(0, 256, size=(1, 4, 4)).astype(np.uint8))
        with pytest.raises(DataError, match="fewer than 2 frames"):
            load_sequence(tmp_path / "one", dt=0.01)

    def test_mixed_dimensions_rejected(self, tmp_path, rng):
        d = tmp_path / "mixed"
        d.mkdir()
        write_frame(d / "a.png", rng.integers(0, 256, size=(4, 4)).astype(np.uint8))
        write_frame(d / "b.png", rng.integers(0, 256, size=(5, 4)).astype(np.uint8))
        with pytest.raises(DataError, match="mixed"):
            load_sequence(d, dt=0.01)

    def test_unreadable_file_rejected(self, tmp_path):
        d = tmp_path / "bad"
        d.mkdir()
        (d / "a.png").write_bytes(b"not a png")
        (d / "b.png").write_bytes(b"also not")
        with pytest.raises(DataError, match="unreadable"):
            load_sequence(d, dt=0.01)

    def test_rgb_converted_via_fixed_luma(self, tmp_path, rng):
        d = tmp_path / "rgb"
        d.mkdir()
        rgb = rng.integers(0, 256, size=(6, 5, 3)).astype(np.uint8)
        for name in ("a.png", "b.png"):
            Image.fromarray(rgb, mode="RGB").save(d / name)
        seq = load_sequence(d, dt=0.01)
        y = np.floor(0.299 * rgb[..., 0] + 0.587 * rgb[..., 1]
                     + 0.114 * rgb[..., 2] + 0.5).astype(np.uint8)
        np.testing.assert_array_equal(seq.frames[0], y)

    def test_large_frame_counts_accepted(self, tmp_path, rng):
        # sequences between 120 and 300 frames are the expected regime
        frames = rng.integers(0, 256, size=(120, 3, 3)).astype(np.uint8)
        write_pngs(tmp_path / "long", frames)
        assert load_sequence(tmp_path / "long", dt=0.01).k == 120


class TestCrop:
    def test_full_frame_crop_is_identity(self, rng):
        seq = make_sequence(rng)
        out = crop(seq, CropRect(0, 0, seq.nx, seq.ny))
        np.testing.assert_array_equal(out.frames, seq.frames)

    def test_shape_arithmetic(self, rng):
        seq = make_sequence(rng, k=3, ny=300, nx=300)
        out = crop(seq, CropRect(10, 10, 256, 256))
        assert (out.k, out.ny, out.nx) == (3, 256, 256)

    def test_out_of_bounds_rejected(self, rng):
        seq = make_sequence(rng)
        with pytest.raises(DataError, match="bounds"):
            crop(seq, CropRect(2, 0, seq.nx, seq.ny))

    def test_crop_then_flatten_commutes_with_index_select(self, rng):
        # oracle: direct pixel bookkeeping on a random 8x8 frame
        seq = make_sequence(rng, k=2, ny=8, nx=8)
        rect = CropRect(2, 1, 4, 5)
        cropped = to_snapshot_matrix(crop(seq, rect))
        full = to_snapshot_matrix(seq)
        rows = [(rect.y0 + r) * 8 + rect.x0 + c for r in range(5) for c in range(4)]
        np.testing.assert_array_equal(cropped.data, full.data[rows, :])


class TestSnapshotMatrix:
    def test_two_by_two_flattening(self):
        frames = np.zeros((2, 2, 2), dtype=np.uint8)
        frames[1] = [[0, 255], [255, 0]]
        m = to_snapshot_matrix(FrameSequence(frames=frames, dt=1.0))
        np.testing.assert_array_equal(m.data[:, 1], [0.0, 1.0, 1.0, 0.0])

    def test_shape_arithmetic(self, rng):
        seq = make_sequence(rng, k=100, ny=256, nx=256)
        m = to_snapshot_matrix(seq)
        assert m.data.shape == (65536, 100)

    def test_every_pixel_lands_exactly(self, rng):
        seq = make_sequence(rng, k=3, ny=5, nx=7)
        m = to_snapshot_matrix(seq)
        for k in range(3):
            for i in range(5):
                for j in range(7):
                    assert m.data[i * 7 + j, k] == seq.frames[k, i, j] / 255.0

    def test_requantization_roundtrip_is_bit_identical(self, rng):
        seq = make_sequence(rng, k=4, ny=9, nx=3)
        m = to_snapshot_matrix(seq)
        back = np.floor(m.data * 255.0 + 0.5).astype(np.uint8)
        np.testing.assert_array_equal(back, seq.frames.reshape(4, 27).T)

    def test_pipeline_is_deterministic(self, tmp_path, rng):
        frames = rng.integers(0, 256, size=(3, 10, 10)).astype(np.uint8)
        write_pngs(tmp_path / "det", frames)
        rect = CropRect(1, 2, 7, 6)
        runs = [to_snapshot_matrix(crop(load_sequence(tmp_path / "det", 0.04), rect)).data
                for _ in range(2)]
        assert np.array_equal(runs[0], runs[1])


class TestCropSidecar:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "crop.json"
        path.write_text(json.dumps({"x0": 3, "y0": 4, "width": 10, "height": 12, "dt": 0.02}))
        rect, dt = load_crop_sidecar(path)
        assert rect == CropRect(3, 4, 10, 12) and dt == 0.02

    def test_dt_is_optional(self, tmp_path):
        path = tmp_path / "crop.json"
        path.write_text(json.dumps({"x0": 0, "y0": 0, "width": 2, "height": 2}))
        rect, dt = load_crop_sidecar(path)
        assert dt is None

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "crop.json"
        path.write_text(json.dumps({"x0": 0}))
        with pytest.raises(DataError, match="missing key"):
            load_crop_sidecar(path)
