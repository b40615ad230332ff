import math

import numpy as np
import pytest

from harmval.errors import LeadingPartVanishes
from harmval.hyperdim import (
    HarmonicFieldND,
    build_example3d,
    circle_zero_sets,
    coercive_radius_nd,
    cone_slopes,
    eval_nd,
    milnor_bound,
    min_leading_on_sphere,
    sphere_points,
)
from harmval.poly import RealMultivariate


def _xy():
    return RealMultivariate.variable(2, 0), RealMultivariate.variable(2, 1)


def test_example_is_exactly_harmonic():
    F = build_example3d()
    for c in F.components:
        assert c.laplacian().is_zero()
        assert c.degree == 4
        assert all(isinstance(v, int) for v in c.terms.values())


def test_example_values():
    F = build_example3d()
    assert np.allclose(eval_nd(F, [0, 0, 0]), [0, 0, 8])
    assert np.allclose(eval_nd(F, [0, 0, 1]), [0, 0, 0])


def test_leading_part_of_w():
    F = build_example3d()
    x, y, z = (RealMultivariate.variable(3, i) for i in range(3))
    r2 = x * x + y * y + z * z
    w4 = 35 * z**4 - 30 * z * z * r2 + 3 * r2 * r2
    assert F.leading_part().components[2] == w4
    lead, low = F.leading_part(), F.lower_part()
    for c, a, b in zip(F.components, lead.components, low.components):
        assert c == a + b


def test_zero_field_evaluates_to_zero():
    zero = RealMultivariate(3, {})
    F = HarmonicFieldND([zero, zero, zero])
    assert np.allclose(F([1.0, 2.0, 3.0]), 0)


def test_dimension_checks():
    F = build_example3d()
    with pytest.raises(ValueError):
        eval_nd(F, [1.0, 2.0])
    x, y = _xy()
    with pytest.raises(ValueError):
        HarmonicFieldND([x * x + y * y, x])  # not harmonic
    with pytest.raises(ValueError):
        HarmonicFieldND([x])  # wrong component count


def test_sphere_points_are_unit():
    for d in (2, 3, 4):
        pts = sphere_points(d, 1000)
        assert pts.shape == (1000, d)
        assert np.allclose(np.linalg.norm(pts, axis=1), 1)
    mean = sphere_points(3, 20000).mean(axis=0)
    assert np.all(np.abs(mean) < 1e-3)


def test_min_leading_on_sphere_cases():
    F = build_example3d()
    assert min_leading_on_sphere(F) > 0.01
    x, y = _xy()
    zero = RealMultivariate(2, {})
    assert min_leading_on_sphere(HarmonicFieldND([x * x - y * y, zero])) < 1e-6
    # p = z^3 in the plane: (Re z^3, Im z^3) has |F_3| = 1 on the circle
    re = x**3 - 3 * x * y * y
    im = 3 * x * x * y - y**3
    assert min_leading_on_sphere(HarmonicFieldND([re, im])) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        min_leading_on_sphere(F, samples=100)


def test_coercive_radius_nd():
    x, y = _xy()
    re = x**3 - 3 * x * y * y
    im = 3 * x * x * y - y**3
    assert coercive_radius_nd(HarmonicFieldND([re, im]), samples=20000) == 1.25
    radii = []
    for t in (100.0, 200.0, 400.0):
        G = HarmonicFieldND([re + t * x, im + t * y])
        radii.append(coercive_radius_nd(G, samples=20000))
    # R = 1.25 t for the linear perturbation t (x, y)
    assert np.allclose(np.diff(radii), [125.0, 250.0], rtol=1e-6)
    zero = RealMultivariate(2, {})
    with pytest.raises(LeadingPartVanishes):
        coercive_radius_nd(HarmonicFieldND([x * x - y * y + x, zero]), samples=20000)


def test_example_coercive_radius_is_finite():
    R = coercive_radius_nd(build_example3d(), samples=20000)
    assert math.isfinite(R) and R > 1.25


def test_milnor_bound():
    assert milnor_bound(4, 3) == 196
    assert milnor_bound(7, 1) == 7
    assert milnor_bound(1, 5) == 1
    with pytest.raises(ValueError):
        milnor_bound(0, 3)


def test_circles():
    circles = circle_zero_sets(100)
    assert len(circles) == 4
    expected = [-0.31760, 0.19423, 0.53034, 8.73990]
    for c, h in zip(circles, expected):
        # the listed reference values are rounded approximations
        assert abs(c.height - h) < 5e-3
        assert c.radius == pytest.approx(math.sqrt(6) * abs(c.height))
        assert c.max_residual < 1e-9
    F = build_example3d()
    for c in circles:
        vals = eval_nd(F, c.points(100))
        scale = max(1.0, c.radius) ** 4
        assert np.all(np.abs(vals[:, :2]) < 1e-12 * scale)


def test_cone_slopes_are_separated():
    s = cone_slopes()
    for t2 in s["P4"]:
        assert abs(t2 - s["P42"][0]) > 0.02
    for t2 in s["P4"]:
        t = math.sqrt(t2)
        assert abs(35 * t**4 - 30 * t**2 + 3) < 1e-12


def test_w4_nonvanishing_on_poles_and_cone():
    w4 = build_example3d().leading_part().components[2]
    assert w4([0.0, 0.0, 1.0]) == pytest.approx(8.0)
    t = 1 / math.sqrt(7)
    p = np.array([math.sqrt(1 - t * t), 0.0, t])
    p4 = (35 * t**4 - 30 * t**2 + 3) / 8
    assert p4 == pytest.approx(-0.0714, abs=1e-4)
    assert w4(p) == pytest.approx(8 * p4)
