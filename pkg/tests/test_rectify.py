import numpy as np
import pytest

from miscalib import ImageSize, Intrinsics, NoValidRegion, SizeMismatch
from miscalib.camera import distort_normalized, normalized_from_pixel, pixel_from_normalized
from miscalib.rectify import (
    CropRect,
    build_map,
    crop_rescale_map,
    largest_valid_rect,
    rect_border_valid,
    rectified_map,
    rectify_pipeline,
    remap_image,
    validity_mask,
)

from conftest import KITTI_LIKE, KITTI_SIZE, small_reference
from oracles import oracle_largest_centered_rect

ZERO_DIST = Intrinsics(fu=321.7, fv=295.3, uc=101.1, vc=77.7)


def identity_grid(size):
    u = np.arange(size.width, dtype=float)
    v = np.arange(size.height, dtype=float)
    uu, vv = np.meshgrid(u, v)
    return np.stack([uu, vv], axis=-1)


class TestBuildMap:
    def test_zero_distortion_gives_identity_grid(self):
        size = ImageSize(64, 48)
        rmap = build_map(ZERO_DIST, size)
        assert np.abs(rmap.grid - identity_grid(size)).max() < 1e-12

    def test_matches_camera_composition(self):
        intr, size = small_reference(97, 41)
        rmap = build_map(intr, size)
        uu, vv = np.meshgrid(np.arange(size.width, dtype=float),
                             np.arange(size.height, dtype=float))
        nx, ny = normalized_from_pixel(uu, vv, intr)
        dx, dy = distort_normalized(nx, ny, intr)
        sx, sy = pixel_from_normalized(dx, dy, intr)
        assert np.abs(rmap.grid - np.stack([sx, sy], axis=-1)).max() < 1e-10

    def test_barrel_pulls_corners_inward(self):
        intr, size = small_reference()
        rmap = build_map(intr, size)
        for (u, v) in [(0, 0), (size.width - 1, 0), (0, size.height - 1),
                       (size.width - 1, size.height - 1)]:
            shift = np.hypot(rmap.grid[v, u, 0] - u, rmap.grid[v, u, 1] - v)
            assert shift > 0.5

    def test_principal_point_is_fixed(self):
        intr, size = small_reference()
        rmap = build_map(intr, size)
        u, v = int(round(intr.uc)), int(round(intr.vc))
        # interpolate nothing: evaluate the map formula exactly at (uc, vc)
        nx, ny = normalized_from_pixel(intr.uc, intr.vc, intr)
        dx, dy = distort_normalized(nx, ny, intr)
        su, sv = pixel_from_normalized(dx, dy, intr)
        assert abs(su - intr.uc) < 1e-12 and abs(sv - intr.vc) < 1e-12
        assert np.hypot(rmap.grid[v, u, 0] - u, rmap.grid[v, u, 1] - v) < 0.1


class TestValidityMask:
    def test_identity_map_all_valid(self):
        rmap = build_map(ZERO_DIST, ImageSize(32, 24))
        assert validity_mask(rmap).all()

    def test_single_out_of_bounds_entry(self):
        rmap = build_map(ZERO_DIST, ImageSize(32, 24))
        grid = rmap.grid.copy()
        grid[10, 7] = (-0.5, 10.0)
        mask = validity_mask(type(rmap)(grid=grid, raw_size=rmap.raw_size))
        assert not mask[10, 7]
        assert mask.sum() == 32 * 24 - 1

    def test_pincushion_ring_matches_bounds_predicate_exhaustively(self):
        # positive k1 pushes border samples out of the raw frame
        size = ImageSize(64, 48)
        intr = Intrinsics(fu=40.0, fv=40.0, uc=32.0, vc=24.0, k1=0.1)
        rmap = build_map(intr, size)
        mask = validity_mask(rmap)
        for v in range(size.height):
            for u in range(size.width):
                sx, sy = rmap.grid[v, u]
                expected = (0 <= sx <= size.width - 1) and (0 <= sy <= size.height - 1)
                assert mask[v, u] == expected
        assert mask[size.height // 2, size.width // 2]
        assert not mask.all()
        assert not mask[0, 0] and not mask[-1, -1]


class TestLargestValidRect:
    def test_all_valid_returns_full_rect(self):
        mask = np.ones((480, 640), dtype=bool)
        rect = largest_valid_rect(mask, 640 / 480)
        assert abs(rect.x0) <= 1 and abs(rect.y0) <= 1
        assert abs(rect.w - 640) <= 1 and abs(rect.h - 480) <= 1

    def test_invalid_border_ring_matches_exhaustive_search(self):
        mask = np.zeros((48, 64), dtype=bool)
        mask[4:-4, 4:-4] = True
        rect = largest_valid_rect(mask, 4 / 3)
        x0, y0, w, h = oracle_largest_centered_rect(mask, 4 / 3)
        assert abs(rect.x0 - x0) <= 1 and abs(rect.y0 - y0) <= 1
        assert abs(rect.w - w) <= 1 and abs(rect.h - h) <= 1

    def test_pincushion_mask_matches_exhaustive_search(self):
        size = ImageSize(64, 48)
        intr = Intrinsics(fu=40.0, fv=40.0, uc=32.0, vc=24.0, k1=0.1)
        mask = validity_mask(build_map(intr, size))
        assert not mask.all()
        rect = largest_valid_rect(mask, size.aspect)
        x0, y0, w, h = oracle_largest_centered_rect(mask, size.aspect)
        assert abs(rect.x0 - x0) <= 1.5 and abs(rect.y0 - y0) <= 1.5
        assert abs(rect.w - w) <= 1.5 and abs(rect.h - h) <= 1.5
        assert abs(rect.w - rect.h * size.aspect) <= 1.0
        assert rect_border_valid(mask, rect)

    def test_barrel_reference_keeps_full_frame(self):
        # the wide-aspect barrel reference contracts the map, so every
        # source coordinate stays in bounds and the crop is the whole frame
        intr, size = small_reference(311, 94)
        mask = validity_mask(build_map(intr, size))
        assert mask.all()
        rect = largest_valid_rect(mask, size.aspect)
        assert (rect.x0, rect.y0, rect.w, rect.h) == (0.0, 0.0, 311.0, 94.0)

    def test_invalid_center_raises(self):
        mask = np.ones((48, 64), dtype=bool)
        mask[24, 32] = False
        with pytest.raises(NoValidRegion):
            largest_valid_rect(mask, 4 / 3)

    def test_aspect_preserved_and_border_revalidates(self):
        intr, size = small_reference(311, 94)
        mask = validity_mask(build_map(intr, size))
        aspect = size.aspect
        rect = largest_valid_rect(mask, aspect)
        assert abs(rect.w - rect.h * aspect) <= 1.0
        assert rect_border_valid(mask, rect)


class TestCropRescale:
    def test_full_image_rect_is_identity(self):
        intr, size = small_reference(64, 48)
        rmap = build_map(intr, size)
        out = crop_rescale_map(rmap, CropRect(0.0, 0.0, 64.0, 48.0))
        assert np.abs(out.grid - rmap.grid).max() < 1e-12

    def test_half_size_rect_on_identity_map_is_affine(self):
        size = ImageSize(8, 6)
        rmap = build_map(ZERO_DIST, size)
        rect = CropRect(2.0, 1.5, 4.0, 3.0)
        out = crop_rescale_map(rmap, rect)
        uu, vv = np.meshgrid(np.arange(8.0), np.arange(6.0))
        assert np.abs(out.grid[..., 0] - (2.0 + uu * 0.5)).max() < 1e-12
        assert np.abs(out.grid[..., 1] - (1.5 + vv * 0.5)).max() < 1e-12

    def test_identical_crops_give_zero_appd(self):
        from miscalib.metric import appd
        intr, size = small_reference(64, 48)
        rmap = build_map(intr, size)
        rect = CropRect(3.0, 2.25, 56.0, 42.0)
        assert appd(crop_rescale_map(rmap, rect), crop_rescale_map(rmap, rect)) == 0.0


class TestRemap:
    def test_identity_map_is_exact(self):
        rng = np.random.default_rng(2)
        img = rng.uniform(0, 255, (24, 32))
        rmap = build_map(ZERO_DIST, ImageSize(32, 24))
        assert np.array_equal(remap_image(img, rmap), img)

    def test_half_pixel_shift_on_ramp_averages_neighbors(self):
        size = ImageSize(32, 24)
        img = np.tile(np.arange(32.0) ** 2, (24, 1))
        rmap = build_map(ZERO_DIST, size)
        grid = rmap.grid.copy()
        grid[..., 0] += 0.5
        shifted = type(rmap)(grid=grid, raw_size=size)
        out = remap_image(img, shifted)
        expected = 0.5 * (img[:, :-1] + img[:, 1:])
        assert np.abs(out[:, :-1] - expected).max() < 1e-12

    def test_constant_image_stays_constant(self):
        intr, size = small_reference(64, 48)
        img = np.full((48, 64), 137.0)
        out, _ = rectify_pipeline(img, intr)
        assert np.array_equal(out, img)

    def test_output_within_input_range(self):
        rng = np.random.default_rng(4)
        intr, size = small_reference(64, 48)
        img = rng.uniform(10, 240, (48, 64))
        out, _ = rectify_pipeline(img, intr)
        assert out.min() >= img.min() - 1e-12
        assert out.max() <= img.max() + 1e-12

    def test_rgb_channels_supported(self):
        rng = np.random.default_rng(6)
        intr, size = small_reference(40, 30)
        img = rng.uniform(0, 255, (30, 40, 3))
        out, _ = rectify_pipeline(img, intr)
        assert out.shape == img.shape

    def test_size_mismatch(self):
        rmap = build_map(ZERO_DIST, ImageSize(32, 24))
        with pytest.raises(SizeMismatch):
            remap_image(np.zeros((10, 10)), rmap)


class TestPipeline:
    def test_zero_distortion_is_pixel_exact_identity(self):
        rng = np.random.default_rng(8)
        img = rng.uniform(0, 255, (48, 64))
        out, rmap = rectify_pipeline(img, ZERO_DIST)
        assert np.array_equal(out, img)
        assert np.abs(rmap.grid - identity_grid(ImageSize(64, 48))).max() < 1e-12

    def test_map_equals_explicit_composition(self):
        intr, size = small_reference(128, 64)
        rmap = build_map(intr, size)
        rect = largest_valid_rect(validity_mask(rmap), size.aspect)
        expected = crop_rescale_map(rmap, rect)
        actual = rectified_map(intr, size)
        assert np.array_equal(actual.grid, expected.grid)

    def test_output_size_equals_input_size(self):
        rng = np.random.default_rng(10)
        intr, size = small_reference(100, 37)
        img = rng.uniform(0, 255, (37, 100))
        out, rmap = rectify_pipeline(img, intr)
        assert out.shape == (37, 100)
        assert rmap.target_size == size
