import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harmval.errors import ConstantPolynomial, NonIsolatedZeroSet
from harmval.planar import (
    PRESERVING,
    REVERSING,
    PlanarHarmonicField,
    bounds,
    classify,
    eval_field,
    jacobian,
    root_bound,
    solve,
)
from harmval.poly import ComplexUnivariate

from conftest import random_field


def F_of(p, q):
    return PlanarHarmonicField(ComplexUnivariate(p), ComplexUnivariate(q))


def test_eval_field_definition():
    F = F_of([1, 2j, 1], [0.5j, 1])
    z = np.array([0.3 - 0.1j, -2 + 1j])
    expected = F.p(z) + np.conj(F.q(z))
    assert np.allclose(eval_field(F, z), expected)
    assert np.allclose(jacobian(F, z), np.abs(F.p.derivative()(z)) ** 2 - np.abs(F.q.derivative()(z)) ** 2)


def test_cubic_roots_of_unity():
    rep = solve(F_of([-1, 0, 0, 1], [0]))
    assert rep.N_F == 3
    assert rep.N_plus == 3 and rep.N_minus == 0


def test_sharp_quadratic_case():
    rep = solve(F_of([0, 0, 1], [0, 0.5]))
    assert rep.N_F == 4
    assert (rep.N_plus, rep.N_minus, rep.N_singular) == (3, 1, 0)
    rev = [z.location for z in rep.zeros if z.orientation == REVERSING]
    assert abs(rev[0]) < 1e-12  # z = 0 has Jacobian -1/4


def test_non_isolated_zero_set():
    with pytest.raises(NonIsolatedZeroSet):
        solve(F_of([0, 1], [0, 1]))


def test_constant_field_rejected():
    with pytest.raises(ConstantPolynomial):
        solve(F_of([2], [1j]))
    with pytest.raises(ValueError):
        F_of([0], [0])


def test_affine_field_has_one_zero():
    rep = solve(F_of([1 + 1j, 2], [0, 0.5 - 0.3j]))
    assert rep.N_F == 1
    z = rep.zeros[0].location
    assert abs(eval_field(F_of([1 + 1j, 2], [0, 0.5 - 0.3j]), z)) < 1e-12


def test_degree_of_q_larger_than_p():
    # conj(F) swaps the roles; zeros are the same set
    F = F_of([0, 0.5], [0, 0, 1])
    rep = solve(F)
    assert rep.N_F == 4
    assert (rep.N_plus, rep.N_minus) == (1, 3)


def test_zero_records_serialize():
    rep = solve(F_of([0, 0, 1], [0, 0.5]))
    obj = rep.to_json()
    json.dumps(obj)
    assert set(obj["zeros"][0]) >= {"re", "im", "jac", "class", "residual"}
    assert obj["bounds"]["bezout"] == 4


def test_field_json_roundtrip():
    F = F_of([1, 2j, 3], [0.5])
    G = PlanarHarmonicField.from_json(json.loads(json.dumps(F.to_json())))
    z = np.array([0.1 + 0.2j, 3 - 1j])
    assert np.allclose(F(z), G(z))


def test_bounds_table():
    t = bounds(16, 13)
    assert t.bezout == 256
    assert t.conjecture_wilmshurst == 202
    assert t.conjecture_new_Nminus == 13 * 15
    assert t.conjecture_new_total == 2 * 13 * 15 + 16
    assert t.theorem_applicable
    t = bounds(16, 13, N_F=214, N_minus=99)
    assert t.satisfied["conjecture_wilmshurst"] is False
    assert t.satisfied["wilmshurst_theorem"] is True
    assert t.satisfied["conjecture_new_total"] is True
    t = bounds(4, 4, N_F=3, N_singular=1)
    assert not t.theorem_applicable
    assert t.satisfied["conjecture_wilmshurst"] is None


def test_classify_counts():
    F = F_of([0, 0, 1], [0, 0.5])
    pts = np.array([0.25 + 0.25j * np.sqrt(3), 0.0])
    assert classify(F, pts) == (1, 1, 0)


def test_root_bound_contains_zeros():
    for s in range(10):
        F = random_field(s)
        rep = solve(F)
        assert np.all(np.abs(rep.locations) <= root_bound(F) * (1 + 1e-12))


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_argument_principle_identity(seed):
    F = random_field(seed, n_max=5)
    rep = solve(F)
    if rep.N_singular:
        return
    assert rep.N_plus - rep.N_minus == max(F.n, F.m) * (1 if F.n > F.m else -1)
    assert rep.N_F <= max(F.n, F.m) ** 2
    assert (rep.N_F - max(F.n, F.m)) % 2 == 0


def test_residuals_are_small():
    F = random_field(7)
    rep = solve(F)
    assert all(z.residual <= 1e-12 for z in rep.zeros)
    assert np.all(np.abs(F(rep.locations)) < 1e-9)


def test_diagnostics_present():
    rep = solve(random_field(3))
    for key in ("path", "candidates", "seeds", "dropped"):
        assert key in rep.diagnostics
