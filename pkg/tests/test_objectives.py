"""Tests for geodss.objectives: unit checks, constraints, quadrature behavior."""

import math

import numpy as np
import pytest

from geodss.geomodel import EarthRealization, GeostatParams, mean_model
from geodss.objectives import (
    ALTERNATIVE_WEIGHTS,
    DELTA_X_DECISION,
    PRIMARY_WEIGHTS,
    Constraints,
    ConstraintViolation,
    ObjectiveWeights,
    Segment,
    dogleg_ok,
    drilling_cost,
    inclination,
    position_value,
    sand_value,
    segment_value,
    trajectory_value,
)

DX = DELTA_X_DECISION


def slab_model(roof, thickness, rho_sand=150.0):
    """Single flat sand of the given roof depth and thickness."""
    return EarthRealization(
        knots_x=np.array([-100.0, 1000.0]),
        boundary_depths=np.array(
            [[roof, roof], [roof - thickness, roof - thickness]]
        ),
        layer_resistivities=(10.0, rho_sand, 10.0),
    )


def hstand(x0, z):
    return Segment((x0, z), (x0 + DX, z))


class TestInclination:
    def test_horizontal_is_90(self):
        assert inclination(hstand(0.0, -1.0)) == 90.0

    def test_landing_angle(self):
        """Drop of 5.036 m over one stand is the 80-degree approach."""
        seg = Segment((0.0, 0.0), (DX, -5.036))
        assert inclination(seg) == pytest.approx(80.0, abs=0.01)

    def test_45_degrees(self):
        seg = Segment((0.0, 0.0), (DX, -DX))
        assert inclination(seg) == pytest.approx(45.0, abs=1e-12)

    def test_climbing_rejected(self):
        with pytest.raises(ConstraintViolation):
            inclination(Segment((0.0, 0.0), (DX, 1.0)))


class TestDogleg:
    def test_first_buildup_allowed(self):
        """A build-up from 80 to 81.1 degrees is within the 2-degree dogleg."""
        drop = DX / math.tan(math.radians(81.1))
        seg = Segment((0.0, 0.0), (DX, -drop))
        assert dogleg_ok(80.0, seg, Constraints())

    def test_three_degree_turn_rejected(self):
        drop = DX / math.tan(math.radians(83.0))
        seg = Segment((0.0, 0.0), (DX, -drop))
        assert not dogleg_ok(80.0, seg, Constraints())

    def test_flat_after_89_allowed(self):
        assert dogleg_ok(89.0, hstand(0.0, 0.0), Constraints())

    def test_max_inclination_cap(self):
        assert not dogleg_ok(89.0, hstand(0.0, 0.0), Constraints(max_inclination=88.0))


class TestPositionValue:
    def test_shale_is_zero(self):
        m = mean_model(GeostatParams())
        assert position_value(hstand(0.0, 10.0), m) == 0.0

    def test_unit_definition(self):
        """A stand along a 1 m sand outside the sweet band is exactly one unit."""
        m = slab_model(roof=0.0, thickness=1.0)
        assert position_value(hstand(0.0, -0.5), m) == pytest.approx(1.0, abs=1e-3)

    def test_sweet_spot_doubles(self):
        """The same stand inside the sweet band scores two units."""
        m = slab_model(roof=0.0, thickness=1.0)
        assert position_value(hstand(0.0, -0.85), m) == pytest.approx(2.0, abs=1e-3)

    def test_doubling_property_against_moved_band(self):
        """Sweet value is exactly twice the value with the band moved away."""
        m = slab_model(roof=0.0, thickness=5.0)
        seg = hstand(12.0, -1.5)
        sweet = position_value(seg, m)
        plain = position_value(seg, m, sweet_spot=(100.0, 200.0))
        assert sweet == pytest.approx(2.0 * plain, rel=1e-12)

    def test_quadrature_convergence_on_examples(self):
        """Doubling quadrature points moves the example values by < 1e-3."""
        m = mean_model(GeostatParams())
        slab = slab_model(roof=0.0, thickness=1.0)
        for seg, model in (
            (hstand(0.0, 10.0), m),      # shale
            (hstand(0.0, -0.5), slab),   # one unit
            (hstand(0.0, -0.85), slab),  # sweet spot
            (hstand(0.0, -14.0), m),     # bottom sand
            (Segment((0.0, -1.0), (DX, -3.0)), m),  # inclined inside top sand
        ):
            v16 = position_value(seg, model)
            v32 = position_value(seg, model, n_quad=32)
            assert abs(v32 - v16) < 1e-3

    def test_quadrature_stable_across_breakpoints(self):
        """Boundary-crossing segments stay within the refined panel error."""
        m = mean_model(GeostatParams())
        seg = Segment((0.0, 2.0), (DX, -3.0))
        v16 = position_value(seg, m)
        v32 = position_value(seg, m, n_quad=32)
        assert abs(v32 - v16) < 0.05


class TestSandValue:
    def setup_method(self):
        self.m = mean_model(GeostatParams())

    def test_bottom_sand(self):
        assert sand_value(hstand(0.0, -14.0), self.m) == pytest.approx(14.0, abs=1e-9)

    def test_top_sand(self):
        assert sand_value(hstand(0.0, -2.0), self.m) == pytest.approx(7.0, abs=1e-9)

    def test_shale(self):
        assert sand_value(hstand(0.0, -10.0), self.m) == 0.0


class TestDrillingCost:
    def test_horizontal_stand(self):
        """One flat stand costs 8.568% of a unit."""
        assert drilling_cost(hstand(0.0, 0.0)) == pytest.approx(-0.08568, abs=1e-12)

    def test_45_degree_stand(self):
        seg = Segment((0.0, 0.0), (DX, -DX))
        assert drilling_cost(seg) == pytest.approx(-0.003 * DX * math.sqrt(2.0), rel=1e-12)

    def test_zero_length(self):
        assert drilling_cost(Segment((5.0, 1.0), (5.0, 1.0))) == 0.0


class TestSegmentValue:
    def test_primary_preset_sweet_stand(self):
        """Position doubling minus one stand of cost: 2.0 - 0.08568."""
        m = slab_model(roof=0.0, thickness=1.0)
        v = segment_value(hstand(0.0, -0.85), m, PRIMARY_WEIGHTS)
        assert v == pytest.approx(1.91432, abs=1e-3)

    def test_alternative_preset_bottom_sand(self):
        """0.3*13.6 + 0.7*14 - 0.08568 for a sweet-spot stand in the bottom sand."""
        m = mean_model(GeostatParams())
        v = segment_value(hstand(0.0, -14.5), m, ALTERNATIVE_WEIGHTS)
        assert v == pytest.approx(0.3 * 13.6 + 0.7 * 14.0 - 0.08568, abs=1e-3)

    def test_zero_weights_zero_value(self):
        m = mean_model(GeostatParams())
        assert segment_value(hstand(0.0, -14.0), m, ObjectiveWeights(0, 0, 0)) == 0.0

    def test_linearity_in_weights(self):
        m = mean_model(GeostatParams())
        seg = Segment((0.0, -1.0), (DX, -2.0))
        w1 = ObjectiveWeights(1.0, 2.0, 0.5)
        w2 = ObjectiveWeights(2.0, 4.0, 1.0)
        assert segment_value(seg, m, w2) == pytest.approx(
            2.0 * segment_value(seg, m, w1), rel=1e-12
        )

    def test_extra_objective_registration(self):
        m = mean_model(GeostatParams())
        seg = hstand(0.0, -1.0)
        base = segment_value(seg, m, PRIMARY_WEIGHTS)
        bonus = segment_value(seg, m, PRIMARY_WEIGHTS, extra=[(2.0, lambda s, mm: 1.5)])
        assert bonus == pytest.approx(base + 3.0, rel=1e-12)

    def test_additivity_over_trajectory(self):
        """Trajectory value equals the sum of its segment values."""
        m = mean_model(GeostatParams())
        pts = [(0.0, 2.0), (DX, -1.0), (2 * DX, -2.5), (3 * DX, -2.5)]
        total = trajectory_value(pts, m, PRIMARY_WEIGHTS)
        parts = sum(
            segment_value(Segment(a, b), m, PRIMARY_WEIGHTS)
            for a, b in zip(pts[:-1], pts[1:])
        )
        assert total == pytest.approx(parts, rel=1e-12)

    def test_discounted_trajectory_value(self):
        m = slab_model(roof=0.0, thickness=1.0)
        pts = [(0.0, -0.5), (DX, -0.5), (2 * DX, -0.5)]
        v1 = segment_value(Segment(pts[0], pts[1]), m, PRIMARY_WEIGHTS)
        v2 = segment_value(Segment(pts[1], pts[2]), m, PRIMARY_WEIGHTS)
        got = trajectory_value(pts, m, PRIMARY_WEIGHTS, gamma=0.5)
        assert got == pytest.approx(v1 + 0.5 * v2, rel=1e-12)


class TestWeightsType:
    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ObjectiveWeights(-0.1, 0.0, 1.0)

    def test_presets(self):
        assert PRIMARY_WEIGHTS.to_dict() == {"w_position": 1.0, "w_sand": 0.0, "w_cost": 1.0}
        assert ALTERNATIVE_WEIGHTS.to_dict() == {"w_position": 0.3, "w_sand": 0.7, "w_cost": 1.0}

    def test_round_trip(self):
        w = ObjectiveWeights(0.5, 0.25, 2.0)
        assert ObjectiveWeights.from_dict(w.to_dict()) == w
