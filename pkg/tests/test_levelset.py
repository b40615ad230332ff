import json
import math

import numpy as np
import pytest

from harmval import family
from harmval.levelset import (
    LevelSetMesh,
    count_intersections,
    default_window,
    figure_data,
    gamma0_rays,
    intersections,
    rays,
    trace_gamma,
)
from harmval.planar import _newton
from harmval.poly import ComplexUnivariate

SQUARE = (-1.0, 1.0, -1.0, 1.0)


def test_axes_of_z_squared():
    # odd resolution puts the saddle at a cell center, where Im z^2 = 0 exactly
    mesh = trace_gamma(ComplexUnivariate([0, 0, 1]), SQUARE, 33)
    assert len(mesh.polylines) == 4
    for pl in mesh.polylines:
        ends = [pl[0], pl[-1]]
        assert any(max(abs(e.real), abs(e.imag)) == pytest.approx(1.0) for e in ends)
        assert np.all(np.minimum(np.abs(pl.real), np.abs(pl.imag)) < 1e-12)


def test_constant_gives_empty_mesh():
    assert trace_gamma(ComplexUnivariate([2 + 1j]), SQUARE, 64).polylines == []


def test_resolution_floor():
    with pytest.raises(ValueError):
        trace_gamma(ComplexUnivariate([0, 1]), SQUARE, 16)


def test_vertices_lie_on_level_set():
    f = family.build(8, 1 + 0.04j).f
    window = (-3.0, 3.0, -3.0, 3.0)
    res = 256
    mesh = trace_gamma(f, window, res)
    v = np.concatenate(mesh.polylines)
    h = 6.0 / res
    # linear interpolation error is bounded by |f''| h^2 / 8 on each edge
    bound = np.abs(f.derivative().derivative()(v)) * h * h / 8 + 1e-9 * np.abs(f(v))
    assert np.all(np.abs(f(v).imag) <= bound + 1e-12)


def test_gamma0_ray_counts():
    assert len(gamma0_rays(1, SQUARE).polylines) == 2
    diag = gamma0_rays(2, SQUARE)
    assert len(diag.polylines) == 4
    for pl in diag.polylines:
        assert abs(abs(pl[1].real) - abs(pl[1].imag)) < 1e-15
    assert len(gamma0_rays(8, SQUARE).polylines) == 16
    with pytest.raises(ValueError):
        gamma0_rays(0, SQUARE)


def test_ray_zn_is_zero_on_gamma0():
    mesh = gamma0_rays(5, (-2, 2, -2, 2))
    t = np.linspace(0, 1, 11)
    for a, b in mesh.polylines:
        z = a + t * (b - a)
        assert np.all(np.abs((z**5).real) <= 1e-12 * np.abs(z) ** 5 + 1e-15)


def test_axes_and_diagonals_meet_once():
    axes = rays([0, math.pi / 2, math.pi, 3 * math.pi / 2], SQUARE)
    assert count_intersections(axes, gamma0_rays(2, SQUARE)) == 1


def test_disjoint_meshes():
    a = LevelSetMesh([np.array([0.1 + 0.1j, 0.2 + 0.1j])], SQUARE)
    b = LevelSetMesh([np.array([0.5 + 0.5j, 0.6 + 0.7j])], SQUARE)
    assert count_intersections(a, b) == 0


def test_tangential_crossing_is_flagged():
    a = LevelSetMesh([np.array([-1 + 0j, 1 + 0j])], SQUARE)
    b = LevelSetMesh([np.array([-1 - 1e-4j, 1 + 1e-4j])], SQUARE)
    hit = intersections(a, b)
    assert hit.count == 0
    assert hit.tangential.size == 1


def test_asymptotic_directions():
    f = family.build(8, 1.0).f
    for half in (12.0,):
        mesh = trace_gamma(f, (-half, half, -half, half), 1024)
        ends = [e for pl in mesh.polylines for e in (pl[0], pl[-1]) if max(abs(e.real), abs(e.imag)) > half - 1e-9]
        ang = np.angle(ends)
        dev = np.abs(ang - np.pi / 8 * np.round(ang / (np.pi / 8)))
        assert len(ends) == 16
        assert dev.max() < 2 * np.pi / 1024


def test_boundary_crossings_match_exact_level_set():
    # at half-width 6 the branches still bend away from the asymptotes; compare
    # the traced end points with the exact zeros of Im f along the window edge
    f = family.build(8, 1.0).f
    half = 6.0
    mesh = trace_gamma(f, (-half, half, -half, half), 1024)
    ends = np.array([e for pl in mesh.polylines for e in (pl[0], pl[-1]) if max(abs(e.real), abs(e.imag)) > half - 1e-9])
    s = np.linspace(-half, half, 200001)
    edges = [s - 1j * half, half + 1j * s, s + 1j * half, -half + 1j * s]
    exact = []
    for e in edges:
        v = f(e).imag
        k = np.nonzero(np.sign(v[:-1]) != np.sign(v[1:]))[0]
        exact += list(e[k])
    # a zero landing exactly on a sample registers on both neighbouring intervals,
    # and window corners are shared by two edges
    uniq = []
    for z in exact:
        if all(abs(z - u) > 1e-3 for u in uniq):
            uniq.append(z)
    exact = np.array(uniq)
    assert ends.size == exact.size
    d = np.abs(ends[:, None] - exact[None, :]).min(axis=1)
    assert d.max() < 1e-3


def test_crossings_refine_to_solver_zeros(family8):
    inst, rep = family8
    window = default_window(inst.field)
    hit = intersections(trace_gamma(inst.f, window, 1024), gamma0_rays(8, window))
    z = _newton(inst.field, hit.points, 40, 1e6)
    d = np.abs(z[:, None] - rep.locations[None, :]).min(axis=1)
    assert d.max() < 1e-6 * max(1.0, np.abs(rep.locations).max())


def test_figure_json(family8):
    inst, _ = family8
    window = default_window(inst.field)
    data = figure_data(inst.f, 8, window, 128)
    text = json.dumps(data)
    back = json.loads(text)
    assert set(back) >= {"gamma", "gamma0", "intersections"}
    assert len(back["gamma0"]) == 16
    assert {"re", "im"} == set(back["gamma"][0][0])
