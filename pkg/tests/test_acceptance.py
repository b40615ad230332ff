"""The eleven acceptance criteria, each at its stated tolerance.

Each test records its criterion number and a one-line summary before
asserting; ``conftest.py`` prints a PASS/FAIL line per criterion at the end of
the run.  Running this file directly prints the same lines.
"""
import json
import math
import time

import numpy as np
import pytest

from harmval import cli, family
from harmval.certify import default_window, grid_oracle, subdivision_certify
from harmval.ensemble import EnsembleSpec, expected_zeros
from harmval.hyperdim import build_example3d, circle_zero_sets, milnor_bound, min_leading_on_sphere
from harmval.levelset import count_intersections, default_window as ls_window, gamma0_rays, trace_gamma
from harmval.planar import PlanarHarmonicField, PRESERVING, REVERSING, solve
from harmval.poly import ComplexUnivariate

from conftest import family_report, random_field


def _record(record_property, num, ok, detail):
    record_property("criterion", num)
    record_property("detail", detail)
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")


def test_c01_counterexample_n16(record_property, tmp_path):
    out = tmp_path / "family16.json"
    t0 = time.perf_counter()
    code = cli.main(["family", "--n", "16", "-o", str(out)])
    elapsed = time.perf_counter() - t0
    res = json.loads(out.read_text())["result"]
    ok = (
        code == 0
        and res["N_F"] >= 206
        and family.conjectured_max(16, 13) == 202
        and res["winding_at_infinity"] == 16
        and res["certified"]
        and res["N_plus"] - res["N_minus"] == 16
        and res["violated"]
        and elapsed < 60
    )
    _record(
        record_property,
        1,
        ok,
        f"N_F={res['N_F']} (>=206, bound 202) winding={res['winding_at_infinity']} "
        f"N+-N-={res['N_plus'] - res['N_minus']} certified={res['certified']} {elapsed:.1f}s",
    )
    assert ok


def test_c02_family_n8(record_property):
    _, rep = family_report(8, 0.04)
    ok = 38 <= rep.N_F <= 64 and rep.N_plus - rep.N_minus == 8
    _record(record_property, 2, ok, f"N_F={rep.N_F} in [38, 64], N+-N-={rep.N_plus - rep.N_minus}")
    assert ok


def _corpus():
    fields = [random_field(1000 + s) for s in range(20)]
    fields.append(PlanarHarmonicField(ComplexUnivariate([0, 0, 1]), ComplexUnivariate([0, 0.5])))
    fields += [PlanarHarmonicField(ComplexUnivariate.monomial(n) - 1, ComplexUnivariate.zero()) for n in range(1, 13)]
    return fields


def test_c03_theorem_bound_invariant(record_property):
    # solve() itself asserts N_F <= n^2 for n > m; this re-checks a corpus explicitly
    reports = [solve(F) for F in _corpus()]
    reports += [family_report(8, 0.04)[1], family_report(16, 0.02)[1]]
    worst = max(r.N_F / r.bounds.n**2 for r in reports)
    ok = all(r.N_F <= r.bounds.bezout for r in reports if r.bounds.theorem_applicable)
    _record(record_property, 3, ok, f"{len(reports)} instances, max N_F/n^2 = {worst:.3f}")
    assert ok


def test_c04_appendix_identity(record_property):
    fields = _corpus()[:21] + [family.build(8, 1 + 0.04j).field]
    bad, fractions = 0, []
    for F in fields:
        rep = solve(F, certify=True)
        if rep.N_singular:
            continue
        n = max(F.n, F.m)
        if rep.N_plus != rep.N_minus + n:
            bad += 1
        fractions.append(rep.certification["consistent_fraction"])
    rep16 = family_report(16, 0.02)[1]
    bad += rep16.N_plus != rep16.N_minus + 16
    fractions.append(rep16.certification["consistent_fraction"])
    ok = bad == 0 and min(fractions) >= 0.95
    _record(record_property, 4, ok, f"{len(fractions)} instances, identity failures={bad}, min consistent={min(fractions):.3f}")
    assert ok


def test_c05_fundamental_theorem(record_property):
    worst, ok = 0.0, True
    for n in range(1, 13):
        F = PlanarHarmonicField(ComplexUnivariate.monomial(n) - 1, ComplexUnivariate.zero())
        rep = solve(F)
        roots = np.exp(2j * np.pi * np.arange(n) / n)
        d = np.abs(rep.locations[:, None] - roots[None, :]).min(axis=1) if rep.N_F else np.array([np.inf])
        worst = max(worst, float(d.max()))
        ok &= rep.N_F == n and rep.N_plus == n and bool(np.all(d < 1e-10))
    _record(record_property, 5, ok, f"n=1..12 exact counts, max distance to roots of unity {worst:.1e}")
    assert ok


def test_c06_sharp_small_case(record_property):
    F = PlanarHarmonicField(ComplexUnivariate([0, 0, 1]), ComplexUnivariate([0, 0.5]))
    rep = solve(F)
    ok = rep.N_F == 4 and (rep.N_plus, rep.N_minus) == (3, 1)
    _record(record_property, 6, ok, f"N_F={rep.N_F} (N+, N-)=({rep.N_plus}, {rep.N_minus})")
    assert ok


def test_c07_oracle_equivalence(record_property):
    agree = 0
    for s in range(50):
        F = random_field(1000 + s)
        rep = solve(F)
        window = default_window(F)
        grid = grid_oracle(F, window)
        boxes = subdivision_certify(F, window, rep)
        sub = sum(abs(b.winding) for b in boxes if b.winding is not None)
        consistent = all(b.status == "consistent" for b in boxes)
        agree += rep.N_F == grid.size == sub and consistent
    ok = agree == 50
    _record(record_property, 7, ok, f"{agree}/50 instances agree (resultant = grid oracle = subdivision)")
    assert ok


def test_c08_levelset_crosscheck(record_property):
    inst, rep = family_report(8, 0.04)
    window = ls_window(inst.field)
    x0, x1, y0, y1 = window
    loc = rep.locations
    inside = int(np.sum((loc.real > x0) & (loc.real < x1) & (loc.imag > y0) & (loc.imag < y1)))
    rays = gamma0_rays(8, window)
    counts = [count_intersections(trace_gamma(inst.f, window, res), rays) for res in (1024, 2048)]
    ok = counts == [inside, inside]
    _record(record_property, 8, ok, f"crossings at res 1024/2048 = {counts}, solver in window = {inside}")
    assert ok


def test_c09_example3d(record_property):
    F = build_example3d()
    harmonic = all(c.laplacian().is_zero() for c in F.components)
    lo = min_leading_on_sphere(F)
    circles = circle_zero_sets(100)
    residual = max(c.max_residual for c in circles)
    # independent oracle: u = v = 0 on x^2 + y^2 = 6 z^2; w = 0 reduces to a quadratic in z per slope
    heights = []
    for t2 in ((15 - 2 * math.sqrt(30)) / 35, (15 + 2 * math.sqrt(30)) / 35):
        k = 1 / t2 - 1
        disc = math.sqrt(4 * k * k + 4 * (6 - k) * k)
        heights += [(-2 * k + disc) / (2 * (6 - k)), (-2 * k - disc) / (2 * (6 - k))]
    heights.sort()
    hdiff = max(abs(c.height - h) for c, h in zip(circles, heights))
    ok = harmonic and lo >= 0.01 and len(circles) == 4 and residual < 1e-9 and hdiff < 1e-9 and milnor_bound(4, 3) == 196
    _record(
        record_property,
        9,
        ok,
        f"harmonic={harmonic} min|F4|={lo:.4f} circles={len(circles)} max|F|={residual:.1e} "
        f"height error={hdiff:.1e} milnor={milnor_bound(4, 3)}",
    )
    assert ok


def test_c10_ensemble(record_property):
    r1 = expected_zeros(EnsembleSpec(1, 7, 1000))
    r4 = expected_zeros(EnsembleSpec(4, 11, 500), threads=1)
    r4b = expected_zeros(EnsembleSpec(4, 11, 500), threads=3)
    in_range = all(1 <= c <= 16 for c in r4.counts)
    identical = r4.to_csv() == r4b.to_csv() and r4.to_json() == r4b.to_json()
    ok = (
        len(r1.counts) == 1000
        and r1.mean == 1.0
        and in_range
        and r4.parity_ok
        and r1.parity_ok
        and identical
    )
    _record(
        record_property,
        10,
        ok,
        f"n=1 mean={r1.mean} kept={len(r1.counts)}; n=4 range [{min(r4.counts)}, {max(r4.counts)}] "
        f"parity={r4.parity_ok} discarded={r4.discarded} thread-identical={identical}",
    )
    assert ok


def test_c11_asymptotic_gap(record_property):
    t0 = time.perf_counter()
    gaps = [abs(family.predicted_lower(n) - n * n + 3 * n) for n in range(4, 201)]
    elapsed = time.perf_counter() - t0
    ok = max(gaps) <= 8 and elapsed < 1.0
    _record(record_property, 11, ok, f"max |predicted_lower - n^2 + 3n| = {max(gaps)} over n=4..200 in {elapsed * 1e3:.1f} ms")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
