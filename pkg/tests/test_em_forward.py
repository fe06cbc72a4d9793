"""Tests for geodss.em_forward: kernel integrals, noise model, locality."""

import numpy as np
import pytest

from geodss.em_forward import (
    Channel,
    MeasurementVector,
    ToolSpec,
    observe,
    simulate,
    simulate_members,
    write_measurement_csv,
)
from geodss.geomodel import (
    DomainError,
    EarthRealization,
    GeostatParams,
    generate_ensemble,
    mean_model,
    resistivity_at,
)

TOOL = ToolSpec()


def fine_quadrature_oracle(model, station, doi, direction, n=10_000):
    """Independent midpoint integral of the triangular-kernel average."""
    x, z = station
    sign = 1.0 if direction == "up" else -1.0
    s = (np.arange(n) + 0.5) * (doi / n)
    w = 2.0 * (doi - s) / doi**2
    rho = np.array([resistivity_at(model, x, z + sign * si) for si in s])
    return float(np.sum(w * rho) * (doi / n))


def homogeneous_model(rho=10.0):
    return EarthRealization(
        knots_x=np.array([-100.0, 500.0]),
        boundary_depths=np.array([[1000.0, 1000.0]]),
        layer_resistivities=(rho, rho),
    )


class TestSimulate:
    def test_homogeneous_returns_rho_exactly(self):
        """Normalized kernel: constant profile reproduces the resistivity."""
        m = homogeneous_model(10.0)
        out = simulate(m, (0.0, -50.0), TOOL)
        assert out.values[0] == pytest.approx(10.0, abs=1e-10)
        assert out.values[1] == pytest.approx(10.0, abs=1e-10)

    def test_down_channel_mixture_against_oracle(self):
        """Station in the top sand: both channels match the fine oracle.

        The 64-interval midpoint rule has a worst-case error of one kernel
        panel across the resistivity jump; the tolerance reflects that.
        """
        m = mean_model(GeostatParams())
        station = (100.0, -2.65)
        out = simulate(m, station, TOOL)
        panel = (150.0 - 10.0) * (2.0 / TOOL.doi) * (TOOL.doi / 64)
        for i, direction in enumerate(("up", "down")):
            oracle = fine_quadrature_oracle(m, station, TOOL.doi, direction)
            assert out.values[i] == pytest.approx(oracle, abs=panel)
        # down looks across the -5.3 boundary: strictly between the two rocks
        assert 10.0 < out.values[1] < 150.0

    def test_mid_shale_sees_both_sands(self):
        """At z=-9.3 both sands are in reach; the richer bottom reads higher."""
        m = mean_model(GeostatParams())
        out = simulate(m, (100.0, -9.3), TOOL)
        up, down = out.values
        assert up > 10.0
        assert down > 10.0
        assert down > up

    def test_monotone_response(self):
        """Raising a layer's resistivity inside the kernel raises the reading."""
        p = GeostatParams()
        m1 = mean_model(p)
        m2 = mean_model(
            GeostatParams(layer_resistivities=(10.0, 180.0, 10.0, 250.0, 10.0))
        )
        s = (100.0, -2.65)
        assert simulate(m2, s, TOOL).values[1] > simulate(m1, s, TOOL).values[1]

    def test_locality_bit_identical(self):
        """Boundaries farther than the DOI do not touch the output bits."""
        base = mean_model(GeostatParams())
        moved = EarthRealization(
            knots_x=base.knots_x,
            boundary_depths=np.vstack(
                [base.boundary_depths[:3], base.boundary_depths[3] - 3.0]
            ),
            layer_resistivities=base.layer_resistivities,
        )
        station = (100.0, -2.65)  # bottom-sand roof at -13.3 is 10.65 m away
        a = simulate(base, station, TOOL)
        b = simulate(moved, station, TOOL)
        assert a.values == b.values

    def test_outside_extent_raises(self):
        with pytest.raises(DomainError):
            simulate(mean_model(GeostatParams()), (1e6, 0.0), TOOL)

    def test_members_batch_matches_scalar(self):
        ens = generate_ensemble(GeostatParams(), 8, seed=3)
        station = (57.12, -1.0)
        batch = simulate_members(ens.members, station, TOOL)
        for j, m in enumerate(ens.members):
            single = simulate(m, station, TOOL)
            np.testing.assert_allclose(batch[:, j], single.values, rtol=1e-12)


class TestObserve:
    def test_zero_variance_identical(self):
        m = mean_model(GeostatParams())
        tool = ToolSpec(noise_variance=0.0)
        assert observe(m, (100.0, -2.0), tool, seed=5) == simulate(m, (100.0, -2.0), tool)

    @pytest.mark.slow
    def test_noise_variance_calibrated(self):
        """Sample variance of each channel over 1e4 draws within [0.45, 0.55]."""
        m = mean_model(GeostatParams())
        station = (100.0, -2.0)
        clean = np.asarray(simulate(m, station, TOOL).values)
        draws = np.array(
            [observe(m, station, TOOL, seed=s).values for s in range(10_000)]
        )
        var = draws.var(axis=0, ddof=1)
        assert np.all(var >= 0.45) and np.all(var <= 0.55)
        # unbiasedness: mean within 3 standard errors of the clean value
        se = np.sqrt(var / draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - clean) <= 3 * se)

    def test_seeds_differ_but_deterministic(self):
        m = mean_model(GeostatParams())
        a = observe(m, (100.0, -2.0), TOOL, seed=1)
        b = observe(m, (100.0, -2.0), TOOL, seed=2)
        again = observe(m, (100.0, -2.0), TOOL, seed=1)
        assert a.values != b.values
        assert a.values == again.values


class TestTypes:
    def test_tool_validation(self):
        with pytest.raises(ValueError):
            ToolSpec(doi=0.0)
        with pytest.raises(ValueError):
            ToolSpec(noise_variance=-1.0)
        with pytest.raises(ValueError):
            Channel("sideways")

    def test_measurement_finite(self):
        with pytest.raises(ValueError):
            MeasurementVector(station=(0.0, 0.0), values=(np.nan,))

    def test_json_round_trip(self):
        m = MeasurementVector(station=(1.0, -2.0), values=(10.5, 11.5))
        assert MeasurementVector.from_dict(m.to_dict()) == m
        t = ToolSpec(doi=4.0, noise_variance=0.25)
        assert ToolSpec.from_dict(t.to_dict()) == t

    def test_csv_export(self, tmp_path):
        path = tmp_path / "log.csv"
        write_measurement_csv(
            path,
            [
                MeasurementVector(station=(0.0, 15.0), values=(10.0, 10.5)),
                MeasurementVector(station=(28.56, 13.0), values=(11.0, 12.5)),
            ],
        )
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "x,z,channel_up,channel_down"
        assert len(lines) == 3
        assert lines[1].split(",")[0] == "0.0"
