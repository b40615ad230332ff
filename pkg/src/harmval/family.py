"""The counterexample family ``f(z) = (z - a)^(n-2) P(z)``.

With ``P(z) = z^2 + (n-2) a z + (n-2)(n-1) a^2 / 2`` the two coefficients of
``f`` below the leading one vanish, so ``f = z^n + O(z^(n-3))``.  The equation
``conj(p) = q`` with ``p = z^n + f`` and ``q = -z^n + f`` is emitted in the
solver convention as the field ``p_gen + conj(q_gen)`` with ``p_gen = p`` and
``q_gen = -q = z^n - f``, which has degrees ``n`` and ``n - 3``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IrregularInstance
from .planar import FactoredParts, PlanarHarmonicField, SolveReport, bounds, solve
from .poly import ComplexUnivariate, evaluate_compensated

__all__ = [
    "FamilyInstance",
    "RegularityReport",
    "SweepPoint",
    "build",
    "critical_points",
    "extra_roots",
    "delta_arg",
    "k_bound",
    "predicted_lower",
    "conjectured_max",
    "check_regularity",
    "eps_sweep",
    "sweep_csv",
    "DEFAULT_EPS",
    "SWEEP_EPS",
]

DEFAULT_EPS = 0.01
SWEEP_EPS = (0.005, 0.01, 0.02, 0.04)


def _check_n(n: int):
    if int(n) != n or n < 4:
        raise ValueError(f"the family needs an integer n >= 4, got {n}")


def _gamma(n: int) -> float:
    """``arctan(sqrt(n^2 - 2n) / n)``, the per-sector half angle."""
    return math.atan(math.sqrt(n * n - 2 * n) / n)


def critical_points(n: int, a: complex = 1.0) -> tuple[complex, complex]:
    """The two critical points of ``f`` other than ``a``."""
    _check_n(n)
    a = complex(a)
    half = 0.5 * math.sqrt((n - 3) * (n - 1))
    return (-(n - 3) / 2 + 1j * half) * a, (-(n - 3) / 2 - 1j * half) * a


def extra_roots(n: int, a: complex = 1.0) -> tuple[complex, complex]:
    """Roots ``z_+, z_-`` of ``P``."""
    _check_n(n)
    a = complex(a)
    half = 0.5 * math.sqrt(n * n - 2 * n)
    return -a * ((n - 2) / 2 - 1j * half), -a * ((n - 2) / 2 + 1j * half)


def delta_arg(n: int) -> float:
    """Angular variation ``2 (n - 2) arctan(sqrt(n^2 - 2n) / n)`` of ``f``."""
    _check_n(n)
    return 2 * (n - 2) * _gamma(n)


def _floor_term(n: int) -> int:
    return math.floor((n - 2) / math.pi * _gamma(n))


def k_bound(n: int) -> int:
    """Lower bound ``2 floor((n-2)/pi * arctan(.)) - 1`` (never below -1)."""
    _check_n(n)
    return max(-1, 2 * _floor_term(n) - 1)


def predicted_lower(n: int) -> int:
    """Guaranteed root count ``n^2 - 4n + 4 floor((n-2)/pi * arctan(.)) + 2``."""
    _check_n(n)
    return n * n - 4 * n + 4 * _floor_term(n) + 2


def conjectured_max(n: int, m: int) -> int:
    """The conjectured bound ``3n - 2 + m(m - 1)``."""
    if not 0 <= m < n:
        raise ValueError("need 0 <= m < n")
    return 3 * n - 2 + m * (m - 1)


def _expand_f(n: int, a: complex) -> np.ndarray:
    """Ascending coefficients of ``f``; exact integer arithmetic when ``a`` is an integer."""
    if a.imag == 0 and float(a.real).is_integer():
        ai = int(a.real)
        lin = [1]
        for _ in range(n - 2):
            lin = [c1 - ai * c0 for c0, c1 in zip(lin + [0], [0] + lin)]
        quad = [(n - 2) * (n - 1) * ai * ai // 2, (n - 2) * ai, 1]
        out = [0] * (n + 1)
        for i, x in enumerate(lin):
            for j, y in enumerate(quad):
                out[i + j] += x * y
        return np.array(out, dtype=complex)
    lin = np.array([1.0 + 0j])
    for _ in range(n - 2):
        lin = np.convolve(lin, [-a, 1.0])
    quad = np.array([(n - 2) * (n - 1) / 2 * a * a, (n - 2) * a, 1.0])
    out = np.convolve(lin, quad)
    # these two vanish identically; in floating point they only round to ~1e-15
    out[n - 1] = 0.0
    out[n - 2] = 0.0
    return out


@dataclass
class FamilyInstance:
    n: int
    a: complex
    f: ComplexUnivariate
    P_quad: ComplexUnivariate
    p_gen: ComplexUnivariate
    q_gen: ComplexUnivariate
    zeta_plus: complex
    zeta_minus: complex
    z_plus: complex
    z_minus: complex
    delta_arg: float
    k_bound: int
    predicted_lower: int
    conjectured_max: int
    new_total_bound: int
    field: PlanarHarmonicField = field(repr=False)

    @property
    def m(self) -> int:
        return self.n - 3

    def scalars(self) -> dict:
        def c(x):
            return {"re": x.real, "im": x.imag}

        return {
            "n": self.n,
            "m": self.m,
            "a": c(self.a),
            "zeta_plus": c(self.zeta_plus),
            "zeta_minus": c(self.zeta_minus),
            "z_plus": c(self.z_plus),
            "z_minus": c(self.z_minus),
            "delta_arg": self.delta_arg,
            "k_bound": self.k_bound,
            "predicted_lower": self.predicted_lower,
            "conjectured_max": self.conjectured_max,
            "new_total_bound": self.new_total_bound,
        }


def build(n: int, a: complex = complex(1.0, DEFAULT_EPS)) -> FamilyInstance:
    """Family instance for degree ``n`` and parameter ``a``."""
    _check_n(n)
    a = complex(a)
    if a == 0:
        raise ValueError("a = 0 gives a degenerate family")
    fc = _expand_f(n, a)
    f = ComplexUnivariate(fc)
    P = ComplexUnivariate([(n - 2) * (n - 1) / 2 * a * a, (n - 2) * a, 1.0])
    zn = ComplexUnivariate.monomial(n)
    p_gen = zn + f
    q_full = zn.padded(n + 1) - fc
    q_full[n] = 0.0
    q_gen = ComplexUnivariate(q_full[: n - 2])
    zp, zm = extra_roots(n, a)
    zeta_p, zeta_m = critical_points(n, a)
    # s = p_gen + q_gen = 2 z^n and d = p_gen - q_gen = 2 f in product form
    fp = FactoredParts(2.0, np.zeros(n), 2.0, np.concatenate([np.full(n - 2, a), [zp, zm]]))
    F = PlanarHarmonicField(p_gen, q_gen, fp)
    m = n - 3
    return FamilyInstance(
        n=n,
        a=a,
        f=f,
        P_quad=P,
        p_gen=p_gen,
        q_gen=q_gen,
        zeta_plus=zeta_p,
        zeta_minus=zeta_m,
        z_plus=zp,
        z_minus=zm,
        delta_arg=delta_arg(n),
        k_bound=k_bound(n),
        predicted_lower=predicted_lower(n),
        conjectured_max=conjectured_max(n, m),
        new_total_bound=bounds(n, m).conjecture_new_total,
        field=F,
    )


@dataclass
class RegularityReport:
    regular: bool
    arg_distance: float  # distance of arg f(zeta_+) from the nearest multiple of pi
    min_abs_im: float  # min over zeta_+/- of |Im f(zeta)|
    checked_complex: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def check_regularity(inst: FamilyInstance, strict: bool = False) -> RegularityReport:
    """Numerically confirm ``Im f(zeta) != 0`` at the critical points.

    The level set ``Im f = 0`` then has no crossings away from ``a``.  For real
    ``a`` only ``zeta_+`` is tested (``zeta_-`` is its mirror image); for complex
    ``a`` both points must also have ``|Im f| > 1e-9``.
    """
    vp = evaluate_compensated(inst.f, inst.zeta_plus)
    vm = evaluate_compensated(inst.f, inst.zeta_minus)
    ang = math.atan2(vp.imag, vp.real)
    dist = abs(ang - math.pi * round(ang / math.pi))
    min_im = min(abs(vp.imag), abs(vm.imag))
    complex_a = inst.a.imag != 0
    ok = dist > 1e-6 and (not complex_a or min_im > 1e-9)
    rep = RegularityReport(bool(ok), float(dist), float(min_im), complex_a)
    if strict and not ok:
        raise IrregularInstance(f"Im f vanishes at a critical point (n={inst.n}, a={inst.a})")
    return rep


@dataclass
class SweepPoint:
    n: int
    m: int
    eps: float
    regular: bool
    report: SolveReport | None = None

    @property
    def N_F(self) -> int | None:
        return None if self.report is None else self.report.N_F

    def row(self) -> dict:
        r = self.report
        pl = predicted_lower(self.n)
        cm = conjectured_max(self.n, self.m)
        return {
            "n": self.n,
            "m": self.m,
            "eps": self.eps,
            "N_F": "" if r is None else r.N_F,
            "N_plus": "" if r is None else r.N_plus,
            "N_minus": "" if r is None else r.N_minus,
            "predicted_lower": pl,
            "conjectured_max": cm,
            "violated": "" if r is None else bool(r.N_F > cm and r.N_singular == 0),
        }


def eps_sweep(n: int, eps_values=SWEEP_EPS, certify: bool = True) -> tuple[list, SweepPoint | None]:
    """Solve the family for ``a = 1 + i eps`` over ``eps_values``.

    Returns all sweep points and the best one: among regular instances,
    certified ones are preferred, then larger ``N_F``, then smaller ``eps``.
    Returns ``None`` as best when no instance is regular.
    """
    _check_n(n)
    points = []
    for eps in eps_values:
        inst = build(n, complex(1.0, eps))
        reg = check_regularity(inst)
        pt = SweepPoint(n, n - 3, float(eps), reg.regular)
        if reg.regular:
            pt.report = solve(inst.field, certify=certify)
        points.append(pt)
    cands = [p for p in points if p.regular and p.report is not None]
    if not cands:
        return points, None
    best = max(cands, key=lambda p: (p.report.certified, p.report.N_F, -p.eps))
    return points, best


SWEEP_COLUMNS = ["n", "m", "eps", "N_F", "N_plus", "N_minus", "predicted_lower", "conjectured_max", "violated"]


def sweep_csv(points) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for p in points:
        row = p.row()
        row["eps"] = repr(row["eps"])
        w.writerow(row)
    return buf.getvalue()
