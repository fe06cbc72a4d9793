"""Tests for geodss.enkf: linear-Gaussian consistency, update mechanics."""

import numpy as np
import pytest

from geodss.em_forward import MeasurementVector, ToolSpec, observe, simulate
from geodss.enkf import assimilate, innovation_stats, kalman_update
from geodss.geomodel import Ensemble, GeostatParams, generate_ensemble, generate_truth


def _depths(ens):
    return np.stack([m.boundary_depths for m in ens.members])


class TestKalmanUpdateScalar:
    """Scalar identity-operator case against the closed-form Kalman answer."""

    def setup_method(self):
        self.prior_mean = 2.0
        self.prior_var = 4.0
        self.noise_var = 0.5
        self.observed = np.array([5.0])
        self.n = 10_000
        rng = np.random.default_rng(99)
        self.states = self.prior_mean + np.sqrt(self.prior_var) * rng.standard_normal(
            (1, self.n)
        )

    def _update(self):
        rng = np.random.default_rng(1234)
        updated, _ = kalman_update(
            self.states, self.states.copy(), self.observed, self.noise_var, rng
        )
        return updated

    def test_posterior_mean_within_3_mc_errors(self):
        """Ensemble-mean update approaches mu + K(d - mu), K = s2/(s2+r)."""
        updated = self._update()
        k = self.prior_var / (self.prior_var + self.noise_var)
        prior_sample_mean = self.states.mean()
        exact = prior_sample_mean + k * (self.observed[0] - prior_sample_mean)
        se = updated.std(ddof=1) / np.sqrt(self.n)
        assert abs(updated.mean() - exact) <= 3 * se

    def test_posterior_variance_within_5_percent(self):
        """Updated ensemble variance approaches s2*r/(s2+r)."""
        updated = self._update()
        posterior_var = self.prior_var * self.noise_var / (self.prior_var + self.noise_var)
        assert updated.var(ddof=1) == pytest.approx(posterior_var, rel=0.05)

    def test_forced_zero_gain_is_identity(self):
        """With zero cross-covariance the update is the identity."""
        rng = np.random.default_rng(0)
        constant_obs = np.ones((1, self.n))  # zero anomalies
        updated, gain = kalman_update(
            self.states, constant_obs, self.observed, self.noise_var, rng
        )
        assert gain == 0.0
        np.testing.assert_array_equal(updated, self.states)

    def test_huge_noise_freezes_state(self):
        """noise variance 1e9: updates below 1e-3."""
        rng = np.random.default_rng(5)
        updated, _ = kalman_update(
            self.states, self.states.copy(), self.observed, 1e9, rng
        )
        assert np.max(np.abs(updated - self.states)) < 1e-3

    def test_dimension_mismatch_rejected(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            kalman_update(self.states, self.states[:, :10], self.observed, 0.5, rng)
        with pytest.raises(ValueError):
            kalman_update(self.states, self.states, np.array([1.0, 2.0]), 0.5, rng)


class TestAssimilate:
    def setup_method(self):
        self.params = GeostatParams()
        self.tool = ToolSpec()
        self.truth = generate_truth(self.params, seed=77)
        self.station = (57.12, 2.0)

    def test_identical_members_unchanged(self):
        """Zero ensemble anomalies give zero gain: depths stay put."""
        ens = Ensemble(members=(self.truth,) * 5)
        obs = observe(self.truth, self.station, self.tool, seed=4)
        out = assimilate(ens, self.station, obs, self.tool, seed=8)
        np.testing.assert_array_equal(_depths(out), _depths(ens))
        np.testing.assert_array_equal(out.weights, ens.weights)

    def test_zero_noise_identical_members_no_crash(self):
        """Singular innovation covariance with zero cross-covariance is a no-op."""
        tool = ToolSpec(noise_variance=0.0)
        ens = Ensemble(members=(self.truth,) * 4)
        obs = simulate(self.truth, self.station, tool)
        out = assimilate(ens, self.station, obs, tool, seed=8)
        np.testing.assert_array_equal(_depths(out), _depths(ens))

    def test_deterministic_given_seed(self):
        ens = generate_ensemble(self.params, 20, seed=1)
        obs = observe(self.truth, self.station, self.tool, seed=2)
        a = assimilate(ens, self.station, obs, self.tool, seed=3)
        b = assimilate(ens, self.station, obs, self.tool, seed=3)
        np.testing.assert_array_equal(_depths(a), _depths(b))

    def test_update_moves_toward_observation(self):
        """Mean innovation RMS shrinks across 100 seeded trials."""
        deltas = []
        for trial in range(100):
            truth = generate_truth(self.params, seed=1000 + trial)
            ens = generate_ensemble(self.params, 20, seed=2000 + trial)
            station = (85.68, -1.0)
            obs = observe(truth, station, self.tool, seed=3000 + trial)
            out = assimilate(ens, station, obs, self.tool, seed=4000 + trial)
            before, after = innovation_stats(ens, out, station, obs, self.tool)
            deltas.append(after - before)
        assert np.mean(deltas) < 0.0

    def test_innovation_stats_equal_for_same_ensemble(self):
        ens = generate_ensemble(self.params, 10, seed=1)
        obs = observe(self.truth, self.station, self.tool, seed=2)
        before, after = innovation_stats(ens, ens, self.station, obs, self.tool)
        assert before == after

    def test_propagates_ahead_of_the_bit(self):
        """Knots beyond the station move when the innovation is nonzero."""
        ens = generate_ensemble(self.params, 30, seed=6)
        obs = MeasurementVector(station=self.station, values=(60.0, 90.0))
        out = assimilate(ens, self.station, obs, self.tool, seed=9)
        knots = ens.members[0].knots_x
        ahead = knots > self.station[0] + self.tool.doi
        moved = np.abs(_depths(out) - _depths(ens))[:, :, ahead]
        assert moved.max() > 0.0

    def test_repair_after_update(self):
        """Aggressive innovations cannot make boundaries cross."""
        ens = generate_ensemble(self.params, 10, seed=12)
        obs = MeasurementVector(station=self.station, values=(500.0, 500.0))
        out = assimilate(ens, self.station, obs, self.tool, seed=13)
        for m in out.members:
            assert np.all(np.diff(m.boundary_depths, axis=0) < 0)

    def test_diagnostics_payload(self):
        ens = generate_ensemble(self.params, 10, seed=1)
        obs = observe(self.truth, self.station, self.tool, seed=2)
        out, diag = assimilate(
            ens, self.station, obs, self.tool, seed=3, return_diagnostics=True
        )
        assert set(diag) == {
            "station",
            "innovation_rms_before",
            "innovation_rms_after",
            "gain_frobenius",
        }
        assert diag["gain_frobenius"] >= 0.0

    def test_mismatched_channels_rejected(self):
        ens = generate_ensemble(self.params, 5, seed=1)
        obs = MeasurementVector(station=self.station, values=(10.0,))
        with pytest.raises(ValueError, match="channel"):
            assimilate(ens, self.station, obs, self.tool, seed=1)

    def test_single_member_rejected(self):
        ens = Ensemble(members=(self.truth,))
        obs = observe(self.truth, self.station, self.tool, seed=1)
        with pytest.raises(ValueError, match="at least 2"):
            assimilate(ens, self.station, obs, self.tool, seed=1)
