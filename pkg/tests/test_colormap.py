import math

import numpy as np
import pytest

from fieldplay.colormap import (
    AffineColorMap,
    Image,
    _loss_and_grad,
    apply_color_map,
    color_loss,
    fit_color_map,
    fit_color_map_full,
    harmonize_multiview,
    load_color_maps,
    load_image,
    psnr,
    save_color_maps,
    save_image,
    ssim,
    temporal_continuity_report,
)

from oracles import constant_patch_ssim, psnr_reference, ssim_reference


def textured(rng, h=24, w=32, lo=0.0, hi=1.0):
    return Image(rng.uniform(lo, hi, (h, w, 3)))


def random_cleanroom_map(rng):
    """A map near identity that keeps [0.3, 0.6] pixels strictly inside (0, 1)."""
    while True:
        matrix = np.eye(3) + rng.uniform(-0.2, 0.2, (3, 3))
        offset = rng.uniform(-0.1, 0.1, 3)
        corners = np.array([[a, b, c] for a in (0.3, 0.6) for b in (0.3, 0.6)
                            for c in (0.3, 0.6)])
        mapped = corners @ matrix.T + offset
        if mapped.min() > 0.005 and mapped.max() < 0.995:
            return AffineColorMap(matrix, offset)


class TestApply:
    def test_identity_is_bit_identical(self, rng):
        img = textured(rng)
        out = apply_color_map(AffineColorMap.identity(), img)
        np.testing.assert_array_equal(out.pixels, img.pixels)

    def test_channel_permutation(self):
        red = Image(np.tile([1.0, 0.0, 0.0], (8, 8, 1)).reshape(8, 8, 3))
        swap_rb = AffineColorMap(np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]],
                                          dtype=float), np.zeros(3))
        out = apply_color_map(swap_rb, red)
        np.testing.assert_array_equal(out.pixels[..., 2], np.ones((8, 8)))
        np.testing.assert_array_equal(out.pixels[..., 0], np.zeros((8, 8)))

    def test_offset_clamps_at_one(self):
        img = Image(np.full((4, 4, 3), 0.8))
        out = apply_color_map(AffineColorMap(np.eye(3), np.full(3, 0.5)), img)
        np.testing.assert_array_equal(out.pixels, np.ones((4, 4, 3)))

    def test_composition(self, rng):
        # headroom pixels so neither stage clamps
        img = textured(rng, lo=0.35, hi=0.55)
        m1 = AffineColorMap(np.eye(3) + rng.uniform(-0.05, 0.05, (3, 3)),
                            rng.uniform(-0.03, 0.03, 3))
        m2 = AffineColorMap(np.eye(3) + rng.uniform(-0.05, 0.05, (3, 3)),
                            rng.uniform(-0.03, 0.03, 3))
        chained = apply_color_map(m2, apply_color_map(m1, img))
        composed = apply_color_map(m2.compose(m1), img)
        np.testing.assert_allclose(chained.pixels, composed.pixels, atol=1e-12)


class TestSsim:
    def test_identity_is_exactly_one(self, rng):
        img = textured(rng)
        assert ssim(img, img) == 1.0

    def test_constant_patches_closed_form(self):
        a = Image(np.full((16, 16, 3), 0.2))
        b = Image(np.full((16, 16, 3), 0.8))
        expected = constant_patch_ssim(0.2, 0.8)
        assert ssim(a, b) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.47066, abs=1e-4)

    def test_negative_image_scores_low(self, rng):
        img = textured(rng)
        neg = Image(1.0 - img.pixels)
        assert ssim(img, neg) < 0.2

    def test_matches_per_pixel_oracle(self, rng):
        a = textured(rng, 20, 24)
        b = Image(np.clip(a.pixels + rng.normal(0, 0.08, a.pixels.shape), 0, 1))
        assert ssim(a, b) == pytest.approx(ssim_reference(a.pixels, b.pixels),
                                           abs=1e-9)

    def test_symmetry(self, rng):
        a = textured(rng)
        b = textured(rng)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)

    def test_below_one_for_different_images(self, rng):
        a = textured(rng)
        b = Image(np.clip(a.pixels + 0.01, 0, 1))
        assert ssim(a, b) < 1.0

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            ssim(textured(rng, 16, 16), textured(rng, 16, 18))

    def test_too_small_rejected(self, rng):
        with pytest.raises(ValueError):
            ssim(textured(rng, 8, 8), textured(rng, 8, 8))


class TestPsnr:
    def test_identical_images_are_infinite(self, rng):
        img = textured(rng)
        assert psnr(img, img) == math.inf

    def test_uniform_difference(self):
        a = Image(np.full((12, 12, 3), 0.4))
        b = Image(np.full((12, 12, 3), 0.5))
        assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)

    def test_matches_per_pixel_oracle(self, rng):
        a = textured(rng, 10, 12)
        b = textured(rng, 10, 12)
        assert psnr(a, b) == pytest.approx(psnr_reference(a.pixels, b.pixels),
                                           abs=1e-9)


class TestColorLoss:
    def test_lambda_zero_is_mean_absolute_error(self, rng):
        a = textured(rng)
        b = textured(rng)
        assert color_loss(a, b, 0.0) == pytest.approx(
            np.abs(a.pixels - b.pixels).mean(), abs=1e-12)

    def test_identical_images_zero_loss_at_lambda_one(self, rng):
        img = textured(rng)
        assert color_loss(img, img, 1.0) == 0.0

    def test_blend_matches_independent_terms(self, rng):
        a = textured(rng)
        b = textured(rng)
        l1 = np.abs(a.pixels - b.pixels).mean()
        dssim = (1.0 - ssim(a, b)) / 2.0
        assert color_loss(a, b, 0.2) == pytest.approx(0.8 * l1 + 0.2 * dssim,
                                                      abs=1e-12)

    def test_nonnegative_and_zero_iff_identical(self, rng):
        a = textured(rng)
        b = Image(np.clip(a.pixels + 0.02, 0, 1))
        assert color_loss(a, a, 0.2) == 0.0
        assert color_loss(a, b, 0.2) > 0.0


class TestFit:
    def test_identity_recovered_for_equal_images(self, rng):
        img = textured(rng, 32, 32)
        cmap = fit_color_map(img, img)
        err = np.linalg.norm(cmap.matrix - np.eye(3)) + np.linalg.norm(cmap.offset)
        assert err <= 1e-3

    def test_synthesized_map_recovered(self, rng):
        src = textured(rng, 48, 48, lo=0.3, hi=0.6)
        true = random_cleanroom_map(rng)
        target = apply_color_map(true, src)
        got = fit_color_map(src, target)
        frob = math.sqrt(np.sum((got.matrix - true.matrix) ** 2)
                         + np.sum((got.offset - true.offset) ** 2))
        assert frob <= 1e-2

    def test_constant_source_warns_and_reproduces_target(self, rng):
        src = Image(np.full((16, 16, 3), 0.5))
        target = Image(np.broadcast_to([0.2, 0.4, 0.6], (16, 16, 3)).copy())
        with pytest.warns(UserWarning, match="unidentifiable"):
            cmap = fit_color_map(src, target)
        out = apply_color_map(cmap, src)
        np.testing.assert_allclose(out.pixels, target.pixels, atol=1e-9)

    def test_descent_is_monotone(self, rng):
        src = textured(rng, 32, 32, lo=0.2, hi=0.7)
        noisy = Image(np.clip(
            apply_color_map(random_cleanroom_map(rng), src).pixels
            + rng.normal(0, 0.02, (32, 32, 3)), 0, 1))
        _, history = fit_color_map_full(src, noisy)
        assert len(history) >= 1
        assert all(b < a for a, b in zip(history, history[1:]))

    def test_analytic_gradient_matches_finite_differences(self, rng):
        src = textured(rng, 16, 16, lo=0.3, hi=0.6).pixels
        gt = textured(rng, 16, 16, lo=0.3, hi=0.6).pixels
        matrix = np.eye(3) + rng.uniform(-0.05, 0.05, (3, 3))
        offset = rng.uniform(-0.05, 0.05, 3)
        loss, grad_m, grad_t = _loss_and_grad(matrix, offset, src, gt, 0.2)

        eps = 1e-6
        for idx in np.ndindex(3, 3):
            bumped = matrix.copy()
            bumped[idx] += eps
            up, *_ = _loss_and_grad(bumped, offset, src, gt, 0.2)
            bumped[idx] -= 2 * eps
            down, *_ = _loss_and_grad(bumped, offset, src, gt, 0.2)
            assert grad_m[idx] == pytest.approx((up - down) / (2 * eps),
                                                rel=1e-3, abs=1e-8)
        for i in range(3):
            bumped = offset.copy()
            bumped[i] += eps
            up, *_ = _loss_and_grad(matrix, bumped, src, gt, 0.2)
            bumped[i] -= 2 * eps
            down, *_ = _loss_and_grad(matrix, bumped, src, gt, 0.2)
            assert grad_t[i] == pytest.approx((up - down) / (2 * eps),
                                              rel=1e-3, abs=1e-8)


class TestHarmonize:
    def test_single_reference_image(self, rng):
        img = textured(rng)
        maps = harmonize_multiview([("cam0", img)], "cam0")
        assert len(maps) == 1
        np.testing.assert_array_equal(maps[0][1].matrix, np.eye(3))

    def test_two_identical_images(self, rng):
        img = textured(rng, 32, 32)
        maps = dict(harmonize_multiview([("a", img), ("b", img)], "a"))
        for cmap in maps.values():
            err = (np.linalg.norm(cmap.matrix - np.eye(3))
                   + np.linalg.norm(cmap.offset))
            assert err <= 1e-3

    def test_known_shift_recovers_inverse(self, rng):
        ref = textured(rng, 48, 48, lo=0.3, hi=0.6)
        shift = random_cleanroom_map(rng)
        shifted = apply_color_map(shift, ref)
        maps = dict(harmonize_multiview([("ref", ref), ("cam1", shifted)], "ref"))
        inv_matrix = np.linalg.inv(shift.matrix)
        inv_offset = -inv_matrix @ shift.offset
        frob = math.sqrt(np.sum((maps["cam1"].matrix - inv_matrix) ** 2)
                         + np.sum((maps["cam1"].offset - inv_offset) ** 2))
        assert frob <= 1e-2

    def test_missing_reference(self, rng):
        with pytest.raises(KeyError):
            harmonize_multiview([("a", textured(rng))], "zz")


class TestContinuityReport:
    def test_consistent_segments_within_threshold(self, rng):
        base = textured(rng, 24, 24, lo=0.3, hi=0.6)
        segs = [base, Image(base.pixels + 0.001), Image(base.pixels - 0.001)]
        maps = [AffineColorMap.identity()] * 3
        report = temporal_continuity_report(segs, maps, threshold=0.02)
        assert report["within_threshold"]
        assert report["max_jump"] <= 0.01

    def test_abrupt_segment_flagged(self, rng):
        base = textured(rng, 24, 24, lo=0.2, hi=0.5)
        jumped = Image(np.clip(base.pixels + 0.3, 0, 1))
        report = temporal_continuity_report(
            [base, jumped], [AffineColorMap.identity()] * 2, threshold=0.02)
        assert not report["within_threshold"]
        assert report["boundaries"][0]["max_jump"] >= 0.29


class TestSerialization:
    def test_map_table_round_trip(self, tmp_path, rng):
        maps = [("cam0", AffineColorMap.identity()),
                ("cam1", random_cleanroom_map(rng))]
        path = tmp_path / "maps.txt"
        save_color_maps(path, maps)
        loaded = dict(load_color_maps(path))
        np.testing.assert_allclose(loaded["cam1"].matrix, maps[1][1].matrix,
                                   atol=1e-9)
        np.testing.assert_allclose(loaded["cam1"].offset, maps[1][1].offset,
                                   atol=1e-9)

    def test_png_round_trip(self, tmp_path, rng):
        img = Image(np.round(rng.uniform(0, 1, (10, 14, 3)) * 255) / 255)
        path = tmp_path / "img.png"
        save_image(path, img)
        np.testing.assert_allclose(load_image(path).pixels, img.pixels,
                                   atol=1 / 510)

    def test_ppm_round_trip(self, tmp_path, rng):
        img = Image(np.round(rng.uniform(0, 1, (6, 5, 3)) * 255) / 255)
        path = tmp_path / "img.ppm"
        save_image(path, img)
        np.testing.assert_allclose(load_image(path).pixels, img.pixels,
                                   atol=1 / 510)
