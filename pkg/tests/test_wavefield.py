import numpy as np
import pytest

from oamcnot.wavefield import (
    ApertureSpec,
    CIRCLE,
    Grid,
    ScalarField,
    TRIANGLE,
    aperture_mask,
    apply_mask,
    far_field,
    intensity,
    lg_mode,
    point_reflect,
    power,
)

LAM, F, W0 = 532e-9, 0.30, 0.5e-3


def random_field(rng, grid, wavelength=LAM):
    samples = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal(
        (grid.n, grid.n)
    )
    return ScalarField(samples, grid, wavelength)


def radial_profile(img, grid, bin_px=1.0):
    x, y = grid.mesh()
    r = np.hypot(x, y)
    width = bin_px * grid.pitch
    idx = np.round(r / width).astype(int)
    counts = np.bincount(idx.ravel())
    prof = np.bincount(idx.ravel(), img.ravel()) / np.maximum(counts, 1)
    return prof, width


class TestGrid:
    def test_pitch_and_coords(self):
        grid = Grid(128, 8e-3)
        assert grid.pitch == 8e-3 / 128
        coords = grid.coords()
        assert coords[64] == 0.0
        assert coords[0] == -64 * grid.pitch

    @pytest.mark.parametrize("n", [32, 63, 100, 1000])
    def test_bad_sizes_rejected(self, n):
        with pytest.raises(ValueError, match="power of two"):
            Grid(n, 8e-3)

    def test_bad_window_rejected(self):
        with pytest.raises(ValueError, match="window"):
            Grid(128, 0.0)


class TestLgMode:
    def test_center_null_for_nonzero_charge(self, fast_grid):
        field = lg_mode(fast_grid, 1, W0, LAM)
        c = fast_grid.n // 2
        assert abs(field.samples[c, c]) == 0.0

    @pytest.mark.parametrize("ell", [-3, 0, 1, 5])
    def test_unit_power(self, fast_grid, ell):
        assert abs(power(lg_mode(fast_grid, ell, W0, LAM)) - 1.0) < 1e-12

    def test_phase_winding(self, fast_grid):
        # total phase accumulated once around the axis is 2*pi*ell
        field = lg_mode(fast_grid, 2, W0, LAM)
        angles = np.linspace(0.0, 2.0 * np.pi, 721)
        ix = np.round(W0 * np.cos(angles) / fast_grid.pitch).astype(int)
        iy = np.round(W0 * np.sin(angles) / fast_grid.pitch).astype(int)
        c = fast_grid.n // 2
        phase = np.unwrap(np.angle(field.samples[c + iy, c + ix]))
        total = phase[-1] - phase[0]
        assert abs(total - 4.0 * np.pi) / (4.0 * np.pi) < 0.01

    def test_opposite_charges_are_conjugates(self, fast_grid):
        plus = lg_mode(fast_grid, 3, W0, LAM)
        minus = lg_mode(fast_grid, -3, W0, LAM)
        assert np.array_equal(minus.samples, plus.samples.conj())

    def test_waist_bounds_reported(self, fast_grid):
        with pytest.raises(ValueError) as err:
            lg_mode(fast_grid, 1, 1e-8, LAM)
        message = str(err.value)
        assert f"{4 * fast_grid.pitch:g}" in message
        assert f"{fast_grid.window / 4:g}" in message
        with pytest.raises(ValueError):
            lg_mode(fast_grid, 1, fast_grid.window, LAM)

    def test_charge_range_enforced(self, fast_grid):
        with pytest.raises(ValueError, match="supported range"):
            lg_mode(fast_grid, 11, W0, LAM)


class TestApertureMask:
    def test_triangle_area(self):
        grid = Grid(1024, 8e-3)
        side = 2e-3
        mask = aperture_mask(grid, ApertureSpec(TRIANGLE, side))
        area_frac = mask.sum() / grid.n**2
        exact = (np.sqrt(3.0) / 4.0) * side**2 / grid.window**2
        tolerance = 2.0 * 3.0 * side * grid.pitch / grid.window**2
        assert abs(area_frac - exact) < tolerance

    def test_circle_area(self):
        grid = Grid(1024, 8e-3)
        d = 3e-3
        mask = aperture_mask(grid, ApertureSpec(CIRCLE, d))
        area_frac = mask.sum() / grid.n**2
        exact = np.pi * d**2 / 4.0 / grid.window**2
        tolerance = 2.0 * np.pi * d * grid.pitch / grid.window**2
        assert abs(area_frac - exact) < tolerance

    def test_half_turn_is_point_reflection(self, fast_grid):
        mask0 = aperture_mask(fast_grid, ApertureSpec(TRIANGLE, 2e-3, 0.0))
        mask_pi = aperture_mask(fast_grid, ApertureSpec(TRIANGLE, 2e-3, np.pi))
        assert np.array_equal(mask_pi, point_reflect(mask0))

    def test_full_turn_by_thirds_is_identity(self, fast_grid):
        mask0 = aperture_mask(fast_grid, ApertureSpec(TRIANGLE, 2e-3, 0.3))
        mask120 = aperture_mask(
            fast_grid, ApertureSpec(TRIANGLE, 2e-3, 0.3 + 2.0 * np.pi / 3.0)
        )
        assert np.array_equal(mask0, mask120)

    def test_oversized_rejected(self, fast_grid):
        with pytest.raises(ValueError, match="fit"):
            aperture_mask(fast_grid, ApertureSpec(TRIANGLE, 8e-3))
        with pytest.raises(ValueError, match="fit"):
            aperture_mask(fast_grid, ApertureSpec(CIRCLE, 8e-3))

    def test_bad_spec_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            ApertureSpec("hexagon", 1e-3)
        with pytest.raises(ValueError, match="positive"):
            ApertureSpec(TRIANGLE, 0.0)


class TestApplyMask:
    def test_identity_mask(self, rng, fast_grid):
        field = random_field(rng, fast_grid)
        out = apply_mask(field, np.ones((fast_grid.n, fast_grid.n)))
        assert np.array_equal(out.samples, field.samples)

    def test_zero_mask(self, rng, fast_grid):
        field = random_field(rng, fast_grid)
        out = apply_mask(field, np.zeros((fast_grid.n, fast_grid.n)))
        assert power(out) == 0.0

    def test_partial_transmission(self, fast_grid):
        field = lg_mode(fast_grid, 1, W0, LAM)
        mask = aperture_mask(fast_grid, ApertureSpec(TRIANGLE, 2e-3))
        transmitted = power(apply_mask(field, mask))
        assert 0.0 < transmitted < 1.0

    def test_shape_mismatch_rejected(self, rng, fast_grid):
        field = random_field(rng, fast_grid)
        with pytest.raises(ValueError, match="does not match"):
            apply_mask(field, np.ones((8, 8)))


class TestFarField:
    def test_parseval(self, rng, fast_grid):
        for _ in range(20):
            field = random_field(rng, fast_grid)
            ratio = power(far_field(field, F)) / power(field)
            assert abs(ratio - 1.0) < 1e-10

    def test_output_grid_scaling(self, fast_grid):
        out = far_field(lg_mode(fast_grid, 0, W0, LAM), F)
        assert out.grid.n == fast_grid.n
        assert abs(out.grid.pitch - LAM * F / fast_grid.window) < 1e-18

    def test_gaussian_waist(self, default_grid):
        out = far_field(lg_mode(default_grid, 0, W0, LAM), F)
        img = intensity(out)
        x, y = out.grid.mesh()
        w_measured = np.sqrt(2.0 * np.sum(img * (x**2 + y**2)) / np.sum(img))
        w_predicted = LAM * F / (np.pi * W0)
        assert abs(w_measured - w_predicted) < out.grid.pitch

    def test_airy_first_zero(self):
        grid = Grid(1024, 16e-3)
        d = 1e-3
        mask = aperture_mask(grid, ApertureSpec(CIRCLE, d))
        field = ScalarField(mask.astype(complex), grid, LAM)
        out = far_field(field, F)
        prof, width = radial_profile(intensity(out), out.grid)
        k = int(np.argmax(prof))
        while k + 1 < len(prof) and prof[k + 1] < prof[k]:
            k += 1
        a, b, c = prof[k - 1], prof[k], prof[k + 1]
        r_zero = (k + 0.5 * (a - c) / (a - 2.0 * b + c)) * width
        r_predicted = 1.22 * LAM * F / d
        assert abs(r_zero - r_predicted) / r_predicted < 0.02

    def test_linearity(self, rng, fast_grid):
        a = random_field(rng, fast_grid)
        b = random_field(rng, fast_grid)
        alpha, beta = 0.3 - 0.8j, 1.1 + 0.2j
        mixed = ScalarField(
            alpha * a.samples + beta * b.samples, fast_grid, LAM
        )
        direct = far_field(mixed, F).samples
        separate = alpha * far_field(a, F).samples + beta * far_field(b, F).samples
        scale = np.max(np.abs(direct))
        assert np.max(np.abs(direct - separate)) / scale < 1e-12

    def test_donut_null(self, default_grid):
        for ell in (1, -2):
            img = intensity(far_field(lg_mode(default_grid, ell, W0, LAM), F))
            c = default_grid.n // 2
            assert img[c, c] < 1e-6 * img.max()

    def test_point_inversion_symmetry(self, fast_grid):
        # conjugating the input field point-reflects the far-field intensity;
        # this is what makes the sign readout possible at all
        mask = aperture_mask(fast_grid, ApertureSpec(TRIANGLE, 2e-3))
        for ell in (1, 2, 3):
            plus = intensity(far_field(apply_mask(lg_mode(fast_grid, ell, W0, LAM), mask), F))
            minus = intensity(far_field(apply_mask(lg_mode(fast_grid, -ell, W0, LAM), mask), F))
            assert np.max(np.abs(plus - point_reflect(minus))) / plus.max() < 1e-9

    def test_bad_focal_length(self, fast_grid):
        with pytest.raises(ValueError, match="focal"):
            far_field(lg_mode(fast_grid, 0, W0, LAM), 0.0)


class TestIntensityAndPower:
    def test_zero_field(self, fast_grid):
        field = ScalarField(np.zeros((fast_grid.n, fast_grid.n)), fast_grid, LAM)
        assert np.array_equal(intensity(field), np.zeros((fast_grid.n, fast_grid.n)))
        assert power(field) == 0.0

    def test_global_phase_invariance(self, fast_grid):
        field = lg_mode(fast_grid, 1, W0, LAM)
        rotated = ScalarField(np.exp(0.7j) * field.samples, fast_grid, LAM)
        assert np.allclose(intensity(rotated), intensity(field), atol=1e-15)

    def test_power_scales_quadratically(self, fast_grid):
        field = lg_mode(fast_grid, 1, W0, LAM)
        half = ScalarField(0.5 * field.samples, fast_grid, LAM)
        assert abs(power(half) - 0.25) < 1e-12


def test_point_reflect_is_involution(rng):
    img = rng.standard_normal((16, 16))
    assert np.array_equal(point_reflect(point_reflect(img)), img)


def test_resolution_stability():
    # doubling the sampling at fixed window moves the lattice peaks by
    # less than one coarse output pixel
    from oamcnot.readout import find_peaks

    side = 2e-3
    positions = {}
    for n in (1024, 2048):
        grid = Grid(n, 8e-3)
        mask = aperture_mask(grid, ApertureSpec(TRIANGLE, side))
        out = far_field(apply_mask(lg_mode(grid, 1, W0, LAM), mask), F)
        img = intensity(out)
        peaks = find_peaks(img, 0.3, 2.0 * out.grid.pitch, out.grid)
        positions[n] = sorted((p.x, p.y) for p in peaks.peaks)
        coarse_pitch = LAM * F / 8e-3
    assert len(positions[1024]) == len(positions[2048]) == 3
    for (x1, y1), (x2, y2) in zip(positions[1024], positions[2048]):
        assert np.hypot(x1 - x2, y1 - y2) < coarse_pitch
