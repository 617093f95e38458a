import numpy as np
import pytest

from miscalib import ImageSize, ParseError
from miscalib.image_io import read_image, read_map, write_image, write_map
from miscalib.rectify import RectifyMap, build_map
from miscalib.textures import synth_texture

from conftest import small_reference


class TestPng:
    def test_grayscale_round_trip(self, tmp_path):
        img = synth_texture(ImageSize(64, 48), seed=1)
        path = tmp_path / "gray.png"
        write_image(path, img)
        loaded = read_image(path)
        assert loaded.shape == (48, 64)
        assert np.array_equal(loaded, np.rint(img))

    def test_rgb_round_trip(self, tmp_path):
        img = synth_texture(ImageSize(32, 24), seed=2, channels=3)
        path = tmp_path / "rgb.png"
        write_image(path, img)
        loaded = read_image(path)
        assert loaded.shape == (24, 32, 3)
        assert np.array_equal(loaded, np.rint(img))

    def test_values_clipped_to_byte_range(self, tmp_path):
        img = np.array([[-5.0, 100.0], [300.0, 255.4]])
        path = tmp_path / "clip.png"
        write_image(path, img)
        assert read_image(path).tolist() == [[0.0, 100.0], [255.0, 255.0]]

    def test_bad_shape_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_image(tmp_path / "bad.png", np.zeros((4, 4, 2)))


class TestMapDump:
    def test_round_trip_is_exact(self, tmp_path):
        intr, size = small_reference(48, 36)
        rmap = build_map(intr, size)
        path = tmp_path / "m.rmap"
        write_map(path, rmap)
        loaded = read_map(path)
        assert np.array_equal(loaded.grid, rmap.grid)
        assert loaded.raw_size == rmap.raw_size
        assert loaded.target_size == rmap.target_size

    def test_header_layout(self, tmp_path):
        intr, size = small_reference(48, 36)
        path = tmp_path / "m.rmap"
        write_map(path, build_map(intr, size))
        blob = path.read_bytes()
        assert blob[:4] == b"RMAP"
        assert int.from_bytes(blob[4:8], "little") == 48
        assert int.from_bytes(blob[8:12], "little") == 36
        assert len(blob) == 20 + 48 * 36 * 2 * 8

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "m.rmap"
        path.write_bytes(b"JUNK" + b"\x00" * 16)
        with pytest.raises(ParseError, match="magic"):
            read_map(path)

    def test_truncated_payload_rejected(self, tmp_path):
        intr, size = small_reference(48, 36)
        path = tmp_path / "m.rmap"
        write_map(path, build_map(intr, size))
        path.write_bytes(path.read_bytes()[:-64])
        with pytest.raises(ParseError, match="payload"):
            read_map(path)
