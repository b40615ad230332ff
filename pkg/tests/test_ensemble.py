import numpy as np
import pytest

from harmval.ensemble import (
    EnsembleSpec,
    draw_coefficients,
    expected_zeros,
    run_trial,
    sample_planar,
    trig_field,
)
from harmval.errors import DegenerateDraw


def test_conversion_identity():
    spec = EnsembleSpec(5, seed=123)
    xi = draw_coefficients(spec, 0)
    F = sample_planar(spec, 0)
    rng = np.random.default_rng(0)
    z = rng.normal(size=100) + 1j * rng.normal(size=100)
    assert np.max(np.abs(F(z) - trig_field(xi, z))) < 1e-10 * max(1.0, np.abs(trig_field(xi, z)).max())


def test_constant_term_has_no_sine_part():
    xi = draw_coefficients(EnsembleSpec(3, seed=1), 4)
    assert np.all(xi[0, 1, :] == 0)


def test_fixed_seed_is_byte_identical():
    a = sample_planar(EnsembleSpec(3, seed=42))
    b = sample_planar(EnsembleSpec(3, seed=42))
    assert a.p.coeffs.tobytes() == b.p.coeffs.tobytes()
    assert a.q.coeffs.tobytes() == b.q.coeffs.tobytes()
    c = sample_planar(EnsembleSpec(3, seed=42), trial=1)
    assert c.p.coeffs.tobytes() != a.p.coeffs.tobytes()


def test_degree_zero_is_degenerate():
    with pytest.raises(DegenerateDraw):
        sample_planar(EnsembleSpec(0, seed=1))
    with pytest.raises(DegenerateDraw):
        expected_zeros(EnsembleSpec(0, seed=1))


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(2, trials=0)
    with pytest.raises(ValueError):
        EnsembleSpec(-1)


def test_affine_case():
    res = expected_zeros(EnsembleSpec(1, seed=5, trials=100))
    assert res.mean == 1.0
    assert res.std_error == 0.0
    assert res.discarded == 0


def test_single_trial():
    res = expected_zeros(EnsembleSpec(3, seed=9, trials=1))
    assert res.std_error == 0.0
    assert res.mean == res.counts[0]


def test_counts_within_bezout_and_parity():
    res = expected_zeros(EnsembleSpec(3, seed=2, trials=40))
    assert all(1 <= c <= 9 for c in res.counts)
    assert res.parity_ok
    assert len(res.counts) == 40 - res.discarded
    for t in res.trials:
        if t.discarded is None:
            assert abs(t.N_plus - t.N_minus) == 3


def test_thread_count_does_not_change_results():
    spec = EnsembleSpec(3, seed=77, trials=30)
    a = expected_zeros(spec, threads=1)
    b = expected_zeros(spec, threads=4)
    assert a.to_csv() == b.to_csv()
    assert a.to_json() == b.to_json()


def test_csv_layout():
    res = expected_zeros(EnsembleSpec(2, seed=3, trials=5))
    lines = res.to_csv().strip().splitlines()
    assert lines[0] == "trial,N_F,N_plus,N_minus"
    assert len(lines) == 1 + len(res.counts)
    assert res.to_json()["spec"]["variance"] == 1.0


def test_run_trial_matches_ensemble():
    spec = EnsembleSpec(2, seed=8, trials=3)
    res = expected_zeros(spec)
    assert run_trial(spec, 2).N_F == res.trials[2].N_F
