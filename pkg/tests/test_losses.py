import math

import numpy as np
import pytest

from wltls.losses import LOSS_CLAMP, LossKind, loss, loss_at_zero, loss_values


class TestLossValues:
    def test_direct_substitution(self):
        assert loss(LossKind.SQUARED, 3) == 4.0
        assert loss(LossKind.HINGE, -1) == 2.0
        assert loss(LossKind.EXPONENTIAL, 0) == 1.0
        assert loss(LossKind.SQUARED_HINGE, 2) == 0.0
        assert loss(LossKind.SQUARED_HINGE, -1) == 4.0

    def test_hamming_step(self):
        assert loss(LossKind.HAMMING, 0.3) == 0.0
        assert loss(LossKind.HAMMING, -1e-9) == 1.0
        assert loss(LossKind.HAMMING, 0.0) == 0.5

    def test_log_loss_is_stable_for_large_negative_margins(self):
        value = loss(LossKind.LOG, -800)
        assert math.isfinite(value)
        # log(1 + e^800) = 800 + log1p(e^-800)
        assert value == pytest.approx(800 + math.log1p(math.exp(-800)), rel=1e-15)
        assert loss(LossKind.LOG, 800) == pytest.approx(math.exp(-800), rel=1e-12, abs=0)

    def test_log_loss_matches_naive_formula_in_safe_range(self):
        z = np.linspace(-30, 30, 601)
        np.testing.assert_allclose(loss_values(LossKind.LOG, z), np.log1p(np.exp(-z)),
                                   rtol=1e-12)

    def test_exponential_clamps_instead_of_overflowing(self):
        assert loss(LossKind.EXPONENTIAL, -1000) == LOSS_CLAMP

    @pytest.mark.parametrize("kind", list(LossKind))
    def test_rejects_non_finite(self, kind):
        with pytest.raises(ValueError):
            loss(kind, float("nan"))
        with pytest.raises(ValueError):
            loss(kind, float("inf"))


class TestLossAtZero:
    @pytest.mark.parametrize("kind,expected", [
        (LossKind.EXPONENTIAL, 1.0), (LossKind.SQUARED, 1.0), (LossKind.LOG, math.log(2)),
        (LossKind.HINGE, 1.0), (LossKind.SQUARED_HINGE, 1.0), (LossKind.HAMMING, 0.5),
    ])
    def test_values(self, kind, expected):
        assert loss_at_zero(kind) == pytest.approx(expected, rel=1e-15)
        assert loss(kind, 0.0) == pytest.approx(expected, rel=1e-15)


class TestShape:
    z = np.linspace(-20, 20, 4001)

    @pytest.mark.parametrize("kind", list(LossKind))
    def test_non_negative(self, kind):
        assert np.all(loss_values(kind, self.z) >= 0)

    @pytest.mark.parametrize("kind", [k for k in LossKind if k is not LossKind.HAMMING])
    def test_convex_by_second_differences(self, kind):
        v = loss_values(kind, self.z)
        second = v[2:] - 2 * v[1:-1] + v[:-2]
        assert np.all(second >= -1e-9 * np.maximum(1.0, np.abs(v[1:-1])))

    @pytest.mark.parametrize("kind", [k for k in LossKind
                                      if k not in (LossKind.HAMMING, LossKind.SQUARED)])
    def test_non_increasing(self, kind):
        v = loss_values(kind, self.z)
        assert np.all(np.diff(v) <= 1e-12)

    def test_squared_loss_is_not_monotone(self):
        # (1 - z)^2 grows again past z = 1; it is convex but not non-increasing.
        v = loss_values(LossKind.SQUARED, self.z)
        assert np.all(np.diff(v[self.z <= 1]) <= 0)
        assert np.any(np.diff(v) > 0)


class TestNames:
    @pytest.mark.parametrize("name,kind", [
        ("exp", LossKind.EXPONENTIAL), ("squared", LossKind.SQUARED), ("log", LossKind.LOG),
        ("hinge", LossKind.HINGE), ("squaredhinge", LossKind.SQUARED_HINGE),
        ("hamming", LossKind.HAMMING), ("squared_hinge", LossKind.SQUARED_HINGE),
    ])
    def test_parse(self, name, kind):
        assert LossKind.parse(name) is kind

    def test_tags_round_trip(self):
        for kind in LossKind:
            assert LossKind.from_tag(kind.tag) is kind

    def test_unknown(self):
        with pytest.raises(ValueError, match="unknown loss"):
            LossKind.parse("cosh")
