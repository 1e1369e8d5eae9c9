"""Kernel family shapes, peak normalization, and truncation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nwbound.kernels import KERNEL_FAMILIES, KernelSpec, eval_base, eval_scaled

COMPACT = [f for f in KERNEL_FAMILIES if f != "gaussian"]


class TestBaseValues:
    def test_families_present(self):
        assert set(KERNEL_FAMILIES) == {
            "boxcar", "gaussian", "epanechnikov", "quartic",
            "triweight", "tricube", "cosine",
        }

    def test_epanechnikov(self):
        assert eval_base("epanechnikov", 0.0) == 1.0
        assert eval_base("epanechnikov", 1.0) == 0.0
        assert eval_base("epanechnikov", 0.5) == 0.75

    def test_quartic_midpoint(self):
        assert eval_base("quartic", 0.5) == 0.5625

    def test_triweight_midpoint(self):
        assert eval_base("triweight", 0.5) == 0.75 ** 3

    def test_tricube_midpoint(self):
        assert eval_base("tricube", 0.5) == (1.0 - 0.125) ** 3

    def test_gaussian(self):
        assert eval_base("gaussian", 0.0) == 1.0
        np.testing.assert_allclose(eval_base("gaussian", 1.0), math.exp(-0.5), rtol=1e-15)
        # no compact support: still positive far out
        assert eval_base("gaussian", 3.0) > 0.0

    def test_boxcar_flat_then_zero(self):
        assert eval_base("boxcar", 0.0) == 1.0
        assert eval_base("boxcar", 0.999) == 1.0
        assert eval_base("boxcar", 1.0) == 1.0
        assert eval_base("boxcar", 1.0001) == 0.0

    def test_cosine_peak_is_quarter_pi(self):
        np.testing.assert_allclose(eval_base("cosine", 0.0), math.pi / 4.0, rtol=1e-15)

    def test_compact_support(self):
        for fam in COMPACT:
            assert eval_base(fam, 1.5) == 0.0, fam
            assert eval_base(fam, -2.0) == 0.0, fam

    def test_sign_symmetry(self):
        grid = np.linspace(-1.5, 1.5, 31)
        for fam in KERNEL_FAMILIES:
            np.testing.assert_array_equal(eval_base(fam, grid), eval_base(fam, -grid))

    def test_case_insensitive(self):
        assert eval_base("Epanechnikov", 0.5) == eval_base("epanechnikov", 0.5)

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="boxcar"):
            eval_base("parabolic", 0.5)

    def test_scalar_and_array_shapes(self):
        assert isinstance(eval_base("quartic", 0.3), float)
        out = eval_base("quartic", np.array([0.0, 0.3, 2.0]))
        assert out.shape == (3,)


class TestKernelSpec:
    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
    def test_bandwidth_must_be_positive_finite(self, bad):
        with pytest.raises(ValueError, match="bandwidth"):
            KernelSpec("epanechnikov", bad)

    def test_truncate_false_needs_gaussian(self):
        with pytest.raises(ValueError, match="gaussian"):
            KernelSpec("epanechnikov", 1.0, truncate=False)
        spec = KernelSpec("gaussian", 1.0, truncate=False)
        assert spec.truncate is False

    def test_peak_constant(self):
        assert KernelSpec("cosine", 1.0).c_k == math.pi / 4.0
        for fam in KERNEL_FAMILIES:
            if fam != "cosine":
                assert KernelSpec(fam, 1.0).c_k == 1.0

    def test_family_normalized(self):
        assert KernelSpec("GAUSSIAN", 1.0).family == "gaussian"


class TestScaled:
    def test_epanechnikov_tenth_at_fifth_bandwidth(self):
        spec = KernelSpec("epanechnikov", 0.2)
        assert eval_scaled(spec, 0.1) == 0.75

    def test_compact_families_vanish_past_bandwidth(self):
        for fam in COMPACT:
            spec = KernelSpec(fam, 0.2)
            assert eval_scaled(spec, 0.3) == 0.0, fam

    def test_boxcar_unit_weight_inside(self):
        assert eval_scaled(KernelSpec("boxcar", 1.0), 0.999) == 1.0

    def test_cosine_normalized_to_unit_peak(self):
        assert eval_scaled(KernelSpec("cosine", 2.0), 0.0) == 1.0

    def test_gaussian_truncation_toggle(self):
        lam = 0.5
        assert eval_scaled(KernelSpec("gaussian", lam, truncate=True), 0.7) == 0.0
        loose = eval_scaled(KernelSpec("gaussian", lam, truncate=False), 0.7)
        np.testing.assert_allclose(loose, math.exp(-0.5 * (0.7 / lam) ** 2), rtol=1e-15)

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            eval_scaled(KernelSpec("quartic", 1.0), -0.1)

    def test_array_matches_scalar_loop(self):
        spec = KernelSpec("tricube", 0.7)
        d = np.linspace(0.0, 1.4, 17)
        np.testing.assert_array_equal(
            eval_scaled(spec, d), [eval_scaled(spec, float(x)) for x in d])

    @given(
        fam=st.sampled_from(list(KERNEL_FAMILIES)),
        bw=st.floats(1e-3, 1e3),
        dist=st.floats(0.0, 1e4),
    )
    @settings(max_examples=200, deadline=None)
    def test_weights_stay_in_unit_interval(self, fam, bw, dist):
        w = eval_scaled(KernelSpec(fam, bw), dist)
        assert 0.0 <= w <= 1.0

    @pytest.mark.parametrize("fam", sorted(KERNEL_FAMILIES))
    def test_nonincreasing_in_distance(self, fam):
        spec = KernelSpec(fam, 1.3)
        w = eval_scaled(spec, np.linspace(0.0, 2.6, 200))
        assert np.all(np.diff(w) <= 1e-15)

    @pytest.mark.parametrize("fam", sorted(KERNEL_FAMILIES))
    def test_truncated_weight_zero_past_bandwidth(self, fam):
        spec = KernelSpec(fam, 0.4)
        d = np.array([0.400001, 0.5, 3.0])
        np.testing.assert_array_equal(eval_scaled(spec, d), 0.0)
