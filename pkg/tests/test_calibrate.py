"""Amplitude seeding and the noiseless calibration search."""

import numpy as np
import pytest
from scipy.special import erf

from dfsgate import calibrate, model
from dfsgate.calibrate import CalibrationResult, first_order_seed, optimize_amplitude


class TestFirstOrderSeed:
    def test_wide_window_closed_form(self):
        # window wide enough that truncation is immaterial:
        # amplitude = (9 pi / 2) / (sigma sqrt(2 pi))
        got = first_order_seed(100.0, window=12.0)
        assert got * 100.0 == pytest.approx(4.5 * np.pi / np.sqrt(2 * np.pi), rel=1e-9)

    def test_truncation_correction(self):
        sigma, w = 73.0, 4.0
        want = 4.5 * np.pi / (sigma * np.sqrt(2 * np.pi) * erf(w / np.sqrt(2)))
        assert first_order_seed(sigma, window=w) == pytest.approx(want, rel=1e-12)

    def test_doubling_width_halves_amplitude(self):
        assert first_order_seed(200.0) / first_order_seed(100.0) == pytest.approx(0.5, rel=1e-12)

    def test_tensor_pair_needs_quarter_amplitude(self):
        # the t-t structure factor product is 4x larger, so the area
        # (and with it the seed) drops by 4
        ratio = first_order_seed(100.0, cross_pair=("t", "t")) / first_order_seed(100.0)
        assert ratio == pytest.approx(0.25, rel=1e-12)


class TestOptimizeAmplitude:
    def test_j1_mode_zeroes_its_own_sector(self):
        res = optimize_amplitude(100.0, mode="j1")
        assert res.distance[1] <= res.leakage[1] + 1e-8
        assert res.distance[0] > 10 * res.distance[1]
        assert 0.5 < res.amplitude / res.seed_amplitude < 1.0
        assert res.nfev > 3

    def test_weighted_mode_balances_sectors(self):
        r1 = optimize_amplitude(100.0, mode="j1")
        rw = optimize_amplitude(100.0, mode="weighted")
        assert abs(rw.distance[0] - rw.distance[1]) < abs(r1.distance[0] - r1.distance[1])
        assert rw.objective == pytest.approx(
            (3 * rw.distance[1] + rw.distance[0]) / 4.0, rel=1e-12
        )

    def test_large_width_approaches_first_order_seed(self):
        # second-order dressed shifts pull the optimum below the seed by
        # O(1/sigma); at sigma=2000 the weighted pull is ~0.4%
        res = optimize_amplitude(2000.0, mode="weighted", xatol_rel=1e-5)
        assert abs(res.amplitude / res.seed_amplitude - 1.0) < 5e-3

    def test_amplitude_pull_decays_inversely_with_width(self):
        shifts = {}
        for sigma in (1000.0, 2000.0):
            res = optimize_amplitude(sigma, mode="j1", xatol_rel=1e-5)
            shifts[sigma] = res.amplitude / res.seed_amplitude - 1.0
        assert shifts[2000.0] < 0  # optimum sits below the seed
        assert shifts[1000.0] / shifts[2000.0] == pytest.approx(2.0, abs=0.4)

    def test_deterministic(self):
        a = optimize_amplitude(100.0, mode="j1")
        b = optimize_amplitude(100.0, mode="j1")
        assert a.amplitude == b.amplitude
        assert a.objective == b.objective

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError, match="mode"):
            optimize_amplitude(100.0, mode="both")

    def test_bracket_clipped_by_degeneracy_gap(self):
        # at sigma=8 twice the seed would graze the dressed gap; the
        # search must stay strictly below it
        cfg = model.BiasConfig()
        gap = model.degeneracy_min_gap(
            model.bias_eigensystem(*cfg.qubit("A")),
            model.bias_eigensystem(*cfg.qubit("B")),
        )
        assert 2.0 * first_order_seed(8.0) > gap
        res = optimize_amplitude(8.0, xatol_rel=1e-4)
        assert res.amplitude < gap

    def test_no_room_below_gap_raises(self):
        with pytest.raises(model.DegeneracyError, match="search room"):
            optimize_amplitude(2.0)

    def test_result_guards_runaway_amplitude(self):
        with pytest.raises(ValueError, match="strays"):
            CalibrationResult(
                sigma_t=100.0,
                amplitude=0.2,
                seed_amplitude=0.05,
                mode="j1",
                objective=0.0,
            )
