import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from errors import DimensionMismatch, NotUnitary, OutOfRange
from services.channel import (ChannelConfig, calibrated_map, collective_channel, scan_random_states,
                              simulate)
from services.graph import OutcomePermutation
from services.qudit import OrthonormalBasis, haar_unitary, random_state, stream
from services.states import max_entangled, maximally_mixed, spin_singlet


def _oracle_success(trials: int, seed: int):
    """Independent Monte Carlo: Σᵢ |(U Uᵀ)ᵢᵢ|² / 3 for the maximally entangled qutrit pair."""
    us = unitary_group.rvs(3, size=trials, random_state=np.random.default_rng(seed))
    w = us @ np.transpose(us, (0, 2, 1))
    return (np.abs(np.diagonal(w, axis1=1, axis2=2)) ** 2).sum(axis=1) / 3


class TestCollectiveChannel:
    def test_singlet_is_a_fixed_point(self, singlet, rng):
        for _ in range(20):
            assert collective_channel(singlet, haar_unitary(2, rng)).distance(singlet) < 1e-12

    def test_rejects_non_unitary(self, singlet):
        with pytest.raises(NotUnitary):
            collective_channel(singlet, 2 * np.eye(2))

    def test_rejects_wrong_shape(self, singlet):
        with pytest.raises(DimensionMismatch):
            collective_channel(singlet, np.eye(3))


class TestSimulate:
    def test_singlet_survives_every_trial(self, singlet):
        stats = simulate(ChannelConfig(singlet, 500, seed=1))
        assert stats.min >= 1 - 1e-10
        assert stats.mean == pytest.approx(1.0)
        assert stats.declared_map == OutcomePermutation.of((1, 0))

    @pytest.mark.slow
    def test_singlet_ten_thousand_trials(self, singlet):
        stats = simulate(ChannelConfig(singlet, 10_000, seed=2, workers=4))
        assert stats.min >= 1 - 1e-10

    def test_maximally_mixed_is_one_half(self):
        stats = simulate(ChannelConfig(maximally_mixed(2), 50))
        assert_allclose(stats.per_trial_success, 0.5, atol=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_other_pure_qubit_pairs_degrade(self, singlet, seed):
        rho = random_state(2, "pure", stream(seed))
        assert rho.distance(singlet) > 1e-3
        stats = simulate(ChannelConfig(rho, 300, seed=seed))
        assert stats.mean < 1 - 1e-3

    def test_qutrit_matches_independent_oracle(self):
        stats = simulate(ChannelConfig(max_entangled(3), 2000, seed=3))
        oracle = _oracle_success(1000, seed=4)
        oracle_se = oracle.std(ddof=1) / np.sqrt(len(oracle))
        combined = np.hypot(stats.std_error, oracle_se)
        assert abs(stats.mean - oracle.mean()) <= 3 * combined
        assert stats.mean == pytest.approx(0.5, abs=4 * stats.std_error)

    def test_std_error(self):
        stats = simulate(ChannelConfig(max_entangled(3), 40, seed=5))
        expected = stats.per_trial_success.std(ddof=1) / np.sqrt(40)
        assert stats.std_error == pytest.approx(expected)

    def test_worker_count_does_not_change_results(self):
        a = simulate(ChannelConfig(max_entangled(3), 64, seed=6, workers=1))
        b = simulate(ChannelConfig(max_entangled(3), 64, seed=6, workers=4))
        assert np.array_equal(a.per_trial_success, b.per_trial_success)

    def test_spin_noise_keeps_spin_singlet(self):
        stats = simulate(ChannelConfig(spin_singlet(3), 100, noise="spin"))
        assert stats.min >= 1 - 1e-10

    def test_calibrated_map_in_fourier_basis(self):
        perm = calibrated_map(max_entangled(3), OrthonormalBasis.fourier(3))
        assert perm == OutcomePermutation.of((0, 2, 1))

    def test_declared_map_size(self, singlet):
        with pytest.raises(DimensionMismatch):
            simulate(ChannelConfig(singlet, 5, declared_map=OutcomePermutation.identity(3)))

    def test_needs_trials(self, singlet):
        with pytest.raises(OutOfRange):
            simulate(ChannelConfig(singlet, 0))


class TestScan:
    def test_qutrit_states_have_positive_defect(self):
        report = scan_random_states(3, 6, 20, seed=1)
        assert report.count == 6
        assert report.min_defect > 0
        assert report.argmin.kind in ("pure", "mixed")
        assert report.snapped_certified is None

    def test_qutrit_floor_is_stable_across_seeds(self):
        floors = [scan_random_states(3, 40, 20, seed=s).min_defect for s in (0, 1, 2)]
        assert min(floors) > 1e-3
        assert max(floors) < 2 * min(floors)

    @pytest.mark.slow
    def test_qutrit_floor_full_size(self):
        floors = [scan_random_states(3, 1000, 100, seed=s, workers=4).min_defect for s in (0, 1)]
        # recorded floors: 0.5813 and 0.5748
        assert all(0.45 < f < 2 / 3 for f in floors)
        assert max(floors) < 2 * min(floors)

    def test_singlet_found_among_given_states(self, singlet):
        states = [random_state(2, "mixed", stream(1)), singlet]
        report = scan_random_states(2, 0, 30, states=states)
        assert report.argmin.index == 1
        assert report.min_defect <= 1e-9
        assert report.near_singlet == [1]
        assert report.snapped_certified is True

    def test_reproducible(self):
        a = scan_random_states(3, 4, 10, seed=9)
        b = scan_random_states(3, 4, 10, seed=9, workers=4)
        assert a.min_defect == b.min_defect
        assert a.argmin.index == b.argmin.index

    def test_dimension_range(self):
        with pytest.raises(OutOfRange):
            scan_random_states(1, 4, 10)
