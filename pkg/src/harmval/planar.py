"""Zeros of planar harmonic fields ``F(z) = p(z) + conj(q(z))``.

Internally the field is written through ``s = p + q`` and ``d = p - q``:

    Re F = Re s(z),    Im F = Im d(z),

so each real equation involves one analytic polynomial and no cancellation
between ``p`` and ``q`` happens at evaluation time.  The Jacobian is
``|p'|^2 - |q'|^2 = Re(s' * conj(d'))``.

``solve`` takes candidate points from the roots of the resultant ``R(z)``
(see :mod:`harmval.elim`), adds a small lattice of extra seeds around each
candidate (clustered resultant roots are only accurate to a fraction of the
cluster spacing), and refines everything by Newton's method on the real
2x2 system.  Points survive if their backward error is at rounding level and
five further Newton steps leave them in place.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from .elim import build_conjugate_system, resultant_roots
from .errors import ConstantPolynomial, DegenerateElimination, LeadingPartVanishes
from .poly import ComplexUnivariate, horner_compensated, magnitude_scale
from .roots import all_roots

__all__ = [
    "FactoredParts",
    "PlanarHarmonicField",
    "Zero",
    "BoundTable",
    "SolveReport",
    "eval_field",
    "jacobian",
    "classify",
    "solve",
    "bounds",
    "root_bound",
    "PRESERVING",
    "REVERSING",
    "SINGULAR",
]

PRESERVING = "preserving"
REVERSING = "reversing"
SINGULAR = "singular"

# relative threshold for singular zeros: |J| <= SING_REL * |s'| |d'|
SING_REL = 1e-9


@dataclass(frozen=True)
class FactoredParts:
    """Optional product form ``s = s_lead * prod(z - s_roots)``, ``d = d_lead * prod(z - d_roots)``.

    When a field is known in this form (the counterexample family is), values
    near clustered roots keep full relative accuracy, which the expanded
    coefficients cannot offer.
    """

    s_lead: complex
    s_roots: np.ndarray
    d_lead: complex
    d_roots: np.ndarray

    def __post_init__(self):
        for name in ("s_roots", "d_roots"):
            arr = np.array(getattr(self, name), dtype=complex).ravel()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "s_lead", complex(self.s_lead))
        object.__setattr__(self, "d_lead", complex(self.d_lead))

    def to_json(self) -> dict:
        return {
            "s_lead": [self.s_lead.real, self.s_lead.imag],
            "s_roots": {"re": self.s_roots.real.tolist(), "im": self.s_roots.imag.tolist()},
            "d_lead": [self.d_lead.real, self.d_lead.imag],
            "d_roots": {"re": self.d_roots.real.tolist(), "im": self.d_roots.imag.tolist()},
        }

    @classmethod
    def from_json(cls, obj) -> "FactoredParts":
        def roots(r):
            return np.asarray(r["re"], float) + 1j * np.asarray(r.get("im", [0.0] * len(r["re"])), float)

        return cls(complex(*obj["s_lead"]), roots(obj["s_roots"]), complex(*obj["d_lead"]), roots(obj["d_roots"]))


def _product_eval(lead: complex, rts: np.ndarray, z: np.ndarray):
    """Value and derivative of ``lead * prod(z - r)`` via prefix/suffix products."""
    if rts.size == 0:
        return np.full(z.shape, lead), np.zeros(z.shape, complex)
    diff = z[..., None] - rts
    ones = np.ones(z.shape + (1,), complex)
    pre = np.cumprod(np.concatenate([ones, diff[..., :-1]], axis=-1), axis=-1)
    suf = np.cumprod(np.concatenate([ones, diff[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    val = lead * pre[..., -1] * diff[..., -1]
    der = lead * np.sum(pre * suf, axis=-1)
    return val, der


def _product_scale(lead: complex, rts: np.ndarray, z: np.ndarray):
    return np.abs(lead) * np.prod(np.abs(z[..., None] - rts), axis=-1)


class PlanarHarmonicField:
    """The pair ``(p, q)`` representing ``F(z) = p(z) + conj(q(z))``."""

    def __init__(self, p, q, factored: FactoredParts | None = None):
        self.p = p if isinstance(p, ComplexUnivariate) else ComplexUnivariate(p)
        self.q = q if isinstance(q, ComplexUnivariate) else ComplexUnivariate(q)
        if self.p.is_zero() and self.q.is_zero():
            raise ValueError("p and q are both identically zero")
        size = max(self.p.coeffs.size, self.q.coeffs.size)
        P, Q = self.p.padded(size), self.q.padded(size)
        self._s = P + Q
        self._d = P - Q
        k = np.arange(1, size)
        self._ds = self._s[1:] * k if size > 1 else np.zeros(1, complex)
        self._dd = self._d[1:] * k if size > 1 else np.zeros(1, complex)
        self.factored = factored
        if factored is not None:
            self._check_factored(factored)

    def _check_factored(self, fp: FactoredParts):
        for coeffs, lead, rts, name in ((self._s, fp.s_lead, fp.s_roots, "s"), (self._d, fp.d_lead, fp.d_roots, "d")):
            expanded = ComplexUnivariate.from_roots(rts, leading=lead).padded(coeffs.size)
            scale = max(1.0, float(np.max(np.abs(coeffs))))
            if expanded.size != coeffs.size or np.max(np.abs(expanded - coeffs)) > 1e-9 * scale:
                raise ValueError(f"factored form of {name} does not match p and q")

    @property
    def n(self) -> int:
        return self.p.degree

    @property
    def m(self) -> int:
        return self.q.degree

    def parts(self, z):
        """``(s, d, s', d')`` at the points ``z`` using the most accurate available form."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.factored is not None:
            fp = self.factored
            s, ds = _product_eval(fp.s_lead, fp.s_roots, z)
            d, dd = _product_eval(fp.d_lead, fp.d_roots, z)
            return s, d, ds, dd
        return (
            horner_compensated(self._s, z),
            horner_compensated(self._d, z),
            horner_compensated(self._ds, z),
            horner_compensated(self._dd, z),
        )

    def newton_parts(self, z, accurate: bool = True):
        """Like :meth:`parts`; derivatives in plain Horner, values compensated only if ``accurate``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.factored is not None:
            return self.parts(z)
        ev = horner_compensated if accurate else _horner
        return ev(self._s, z), ev(self._d, z), _horner(self._ds, z), _horner(self._dd, z)

    def part_scales(self, z):
        """Magnitudes against which rounding in ``Re s`` and ``Im d`` is measured."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.factored is not None:
            fp = self.factored
            return _product_scale(fp.s_lead, fp.s_roots, z), _product_scale(fp.d_lead, fp.d_roots, z)
        r = np.abs(z)
        return np.polyval(np.abs(self._s)[::-1], r), np.polyval(np.abs(self._d)[::-1], r)

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        s, d, _, _ = self.parts(zz.ravel())
        out = s.real + 1j * d.imag
        return complex(out[0]) if zz.ndim == 0 else out.reshape(zz.shape)

    def jacobian(self, z):
        zz = np.asarray(z, dtype=complex)
        _, _, ds, dd = self.parts(zz.ravel())
        out = (ds * np.conj(dd)).real
        return float(out[0]) if zz.ndim == 0 else out.reshape(zz.shape)

    def conjugate(self) -> "PlanarHarmonicField":
        """The field ``conj(F) = q + conj(p)``; same zeros, opposite Jacobian."""
        fp = None
        if self.factored is not None:
            f = self.factored
            fp = FactoredParts(f.s_lead, f.s_roots, -f.d_lead, f.d_roots)
        return PlanarHarmonicField(self.q, self.p, fp)

    def to_json(self) -> dict:
        out = {"p": self.p.to_json(), "q": self.q.to_json()}
        if self.factored is not None:
            out["factored"] = self.factored.to_json()
        return out

    @classmethod
    def from_json(cls, obj) -> "PlanarHarmonicField":
        fp = FactoredParts.from_json(obj["factored"]) if "factored" in obj else None
        return cls(ComplexUnivariate.from_json(obj["p"]), ComplexUnivariate.from_json(obj["q"]), fp)

    def __repr__(self):
        return f"PlanarHarmonicField(n={self.n}, m={self.m})"


def eval_field(F: PlanarHarmonicField, z):
    """``p(z) + conj(q(z))``."""
    return F(z)


def jacobian(F: PlanarHarmonicField, z):
    """``|p'(z)|^2 - |q'(z)|^2``."""
    return F.jacobian(z)


def _orientation(jac, ds, dd):
    thr = SING_REL * np.abs(ds) * np.abs(dd)
    return np.where(jac > thr, PRESERVING, np.where(jac < -thr, REVERSING, SINGULAR))


@dataclass(frozen=True)
class Zero:
    location: complex
    jacobian: float
    orientation: str
    residual: float
    refined: bool = True

    def to_json(self) -> dict:
        return {
            "re": self.location.real,
            "im": self.location.imag,
            "jac": self.jacobian,
            "class": self.orientation,
            "residual": self.residual,
        }


def classify(F: PlanarHarmonicField, zeros) -> tuple[int, int, int]:
    """``(N_plus, N_minus, N_singular)`` by the sign of the Jacobian.

    A zero counts as singular when ``|J| <= 1e-9 * |s'| * |d'|``.  Accepts
    either :class:`Zero` records or bare locations.
    """
    locs = np.array([z.location if isinstance(z, Zero) else z for z in zeros], dtype=complex)
    if locs.size == 0:
        return 0, 0, 0
    _, _, ds, dd = F.parts(locs)
    cls = _orientation((ds * np.conj(dd)).real, ds, dd)
    return int(np.sum(cls == PRESERVING)), int(np.sum(cls == REVERSING)), int(np.sum(cls == SINGULAR))


@dataclass
class BoundTable:
    n: int
    m: int
    bezout: int
    wilmshurst_theorem: int
    conjecture_wilmshurst: int
    conjecture_new_Nminus: int
    conjecture_new_total: int
    theorem_applicable: bool
    satisfied: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "bezout": self.bezout,
            "wilmshurst_theorem": self.wilmshurst_theorem if self.theorem_applicable else None,
            "conjecture_wilmshurst": self.conjecture_wilmshurst,
            "conjecture_new_Nminus": self.conjecture_new_Nminus,
            "conjecture_new_total": self.conjecture_new_total,
            "theorem_applicable": self.theorem_applicable,
            "satisfied": dict(self.satisfied),
        }


def bounds(n: int, m: int, N_F: int | None = None, N_minus: int | None = None, N_singular: int = 0) -> BoundTable:
    """All bounds for degrees ``n = deg p`` and ``m = deg q`` (``m < n`` expected).

    With counts supplied, ``satisfied`` holds one flag per bound.  Conjecture
    flags are ``None`` when singular zeros are present, since their
    contribution to the count is not defined.
    """
    n, m = max(n, m), min(n, m)
    m = max(m, 0)
    table = BoundTable(
        n=n,
        m=m,
        bezout=n * n,
        wilmshurst_theorem=n * n,
        conjecture_wilmshurst=3 * n - 2 + m * (m - 1),
        conjecture_new_Nminus=m * (n - 1),
        conjecture_new_total=2 * m * (n - 1) + n,
        theorem_applicable=n > m,
    )
    if N_F is not None:
        sat: dict = {"bezout": N_F <= table.bezout}
        sat["wilmshurst_theorem"] = (N_F <= table.wilmshurst_theorem) if table.theorem_applicable else None
        clean = N_singular == 0
        sat["conjecture_wilmshurst"] = (N_F <= table.conjecture_wilmshurst) if clean else None
        sat["conjecture_new_total"] = (N_F <= table.conjecture_new_total) if clean else None
        if N_minus is not None:
            sat["conjecture_new_Nminus"] = (N_minus <= table.conjecture_new_Nminus) if clean else None
        table.satisfied = sat
    return table


@dataclass
class SolveReport:
    zeros: list
    N_F: int
    N_plus: int
    N_minus: int
    N_singular: int
    bounds: BoundTable
    winding_at_infinity: int | None = None
    certified: bool = False
    diagnostics: dict = field(default_factory=dict)
    certification: dict | None = None

    @property
    def locations(self) -> np.ndarray:
        return np.array([z.location for z in self.zeros], dtype=complex)

    def to_json(self) -> dict:
        out = {
            "zeros": [z.to_json() for z in self.zeros],
            "N_F": self.N_F,
            "N_plus": self.N_plus,
            "N_minus": self.N_minus,
            "N_singular": self.N_singular,
            "winding_at_infinity": self.winding_at_infinity,
            "certified": self.certified,
            "bounds": self.bounds.to_json(),
            "diagnostics": dict(self.diagnostics),
        }
        if self.certification is not None:
            out["certification"] = dict(self.certification)
        return out


def root_bound(F: PlanarHarmonicField) -> float:
    """Radius outside of which ``F`` has no zeros.

    Positive root of ``c_N r^N - sum_{k<N} b_k r^k`` with ``c_N = ||p_N| - |q_N||``,
    ``b_0 = |p_0 + conj(q_0)|`` and ``b_k = |p_k| + |q_k|``.  This is a much
    tighter radius than the coercive one and is what windows are sized by.
    """
    N = max(F.n, F.m)
    P, Q = F.p.padded(N + 1), F.q.padded(N + 1)
    lead = abs(abs(P[N]) - abs(Q[N]))
    if lead <= 1e-12 * max(abs(P[N]), abs(Q[N])):
        raise LeadingPartVanishes("|p_N| = |q_N|: the leading part vanishes on the unit circle")
    b = np.abs(P) + np.abs(Q)
    b[0] = abs(P[0] + np.conj(Q[0]))
    b = b[:N] / lead
    if not np.any(b):
        return 0.0

    def g(logr):
        r = np.exp(logr)
        return N * logr - np.log(np.polyval(b[::-1], r)) if r > 0 else -np.inf

    # g is increasing in log r; 1 + max b_k is a Cauchy upper bound
    hi = np.log1p(float(np.max(b)))
    return float(np.exp(brentq(g, -700.0, hi + 1e-12, xtol=1e-15, rtol=1e-14)))


# solver internals ------------------------------------------------------------


def _horner(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.polyval(coeffs[::-1], z)


def _newton(F: PlanarHarmonicField, z: np.ndarray, steps: int, limit: float, accurate_tail: int = 4):
    """Newton on ``(Re s, Im d) = 0``; points that blow up become NaN.

    Residuals are evaluated in plain arithmetic except for the last
    ``accurate_tail`` steps, where compensated Horner takes over; points only
    freeze during those steps.
    """
    z = z.astype(complex).copy()
    act = np.isfinite(z)
    for it in range(steps):
        idx = np.nonzero(act)[0]
        if idx.size == 0:
            break
        accurate = it >= steps - accurate_tail
        s, d, ds, dd = F.newton_parts(z[idx], accurate)
        al, be = s.real, d.imag
        A, B, C, D = ds.real, -ds.imag, dd.imag, dd.real
        det = A * D - B * C
        with np.errstate(all="ignore"):
            h = ((-al * D + be * B) + 1j * (-be * A + al * C)) / det
        new = z[idx] + h
        bad = ~np.isfinite(new) | (np.abs(new) > limit)
        new[bad] = np.nan
        z[idx] = new
        still = ~bad
        if accurate:
            still &= np.abs(h) > 1e-17 * np.maximum(1.0, np.abs(new))
        act[idx] = still
    return z


def _backward_error(F: PlanarHarmonicField, z: np.ndarray):
    s, d, _, _ = F.parts(z)
    ss, sd = F.part_scales(z)
    with np.errstate(all="ignore"):
        es = np.where(ss > 0, np.abs(s.real) / ss, 0.0)
        ed = np.where(sd > 0, np.abs(d.imag) / sd, 0.0)
    return np.maximum(es, ed)


def _merge(z: np.ndarray, err: np.ndarray, rel: float) -> np.ndarray:
    """Collapse points closer than ``rel * max(1, |z|)``; keeps the smallest backward error."""
    if z.size == 0:
        return z
    order = np.argsort(err, kind="stable")
    z = z[order]
    tree = cKDTree(np.c_[z.real, z.imag])
    radius = rel * max(1.0, float(np.max(np.abs(z))))
    taken = np.zeros(z.size, bool)
    keep = []
    for i in range(z.size):
        if taken[i]:
            continue
        keep.append(i)
        for j in tree.query_ball_point([z[i].real, z[i].imag], radius):
            if abs(z[j] - z[i]) <= rel * max(1.0, abs(z[i])):
                taken[j] = True
    return z[np.array(keep)]


def _merge_with_err(z, err, rel):
    kept = _merge(z, err, rel)
    lookup = {complex(v): e for v, e in zip(z, err)}
    return kept, np.array([lookup[complex(v)] for v in kept])


def _refine(F: PlanarHarmonicField, seeds: np.ndarray, opts, limit: float):
    """Newton from ``seeds``; keep points at rounding-level backward error that stay put."""
    z = _newton(F, seeds, opts.newton_steps, limit)
    fin = np.isfinite(z)
    err = np.full(z.shape, np.inf)
    err[fin] = _backward_error(F, z[fin])
    ok = err <= opts.tol_accept
    z_ok, err_ok = z[ok], err[ok]
    # stability: five more steps must not move the point by a merge radius
    z5 = _newton(F, z_ok, 5, limit)
    with np.errstate(invalid="ignore"):
        stable = np.abs(z5 - z_ok) < opts.merge_rel * np.maximum(1.0, np.abs(z_ok))
    kept, kerr = _merge_with_err(z_ok[stable], err_ok[stable], opts.merge_rel)
    return kept, kerr, int(seeds.size - np.sum(stable))


def _patch_seeds(centers: np.ndarray, size: int) -> np.ndarray:
    if centers.size == 0:
        return centers
    if centers.size == 1:
        rho = np.array([max(1.0, abs(centers[0])) * 0.5])
    else:
        pts = np.c_[centers.real, centers.imag]
        dist, _ = cKDTree(pts).query(pts, k=2)
        rho = dist[:, 1]
    g = np.linspace(-1.0, 1.0, size)
    off = (g[None, :] + 1j * g[:, None]).ravel()
    return np.concatenate([centers, (centers[:, None] + rho[:, None] * off[None, :]).ravel()])


@dataclass
class SolveOptions:
    tol_accept: float = 1e-12  # backward error of (Re s, Im d), relative
    merge_rel: float = 1e-6
    newton_steps: int = 40
    patch: int = 5
    aberth_iter: int = 150
    extra_rounds: int = 3


def _candidates(F: PlanarHarmonicField, opts: SolveOptions, diag: dict) -> np.ndarray:
    G = F if F.n >= F.m else F.conjugate()
    if G.m <= 0:
        # q is constant: the zeros are the roots of p + conj(q_0)
        diag["path"] = "univariate"
        rs = all_roots(G.p + complex(np.conj(G.q.coefficient(0))))
        diag["candidates"] = int(rs.roots.size)
        return rs.roots
    A, B = build_conjugate_system(G.p, G.q)
    try:
        radius = max(1e-3, min(root_bound(G), 1e6))
    except LeadingPartVanishes:
        radius = 1.0
    z, conv = resultant_roots(A, B, radius=radius, max_iter=opts.aberth_iter)
    diag["path"] = "resultant"
    diag["candidates"] = int(z.size)
    diag["candidates_unconverged"] = int(np.sum(~conv))
    return z


def solve(F: PlanarHarmonicField, certify: bool = False, options: SolveOptions | None = None, **kw) -> SolveReport:
    """Locate and classify every zero of ``F``.

    Raises :class:`NonIsolatedZeroSet` when the zeros are not isolated (for
    instance ``p = q = z``, whose zero set is the imaginary axis).  With
    ``certify=True`` the winding number at infinity and a subdivision
    certificate are attached (see :mod:`harmval.certify`).
    """
    opts = options or SolveOptions(**kw)
    if F.p.degree < 1 and F.q.degree < 1:
        raise ConstantPolynomial("p and q are both constant")
    diag: dict = {}
    cand = _candidates(F, opts, diag)
    try:
        limit = 1e3 * max(1.0, root_bound(F))
    except LeadingPartVanishes:
        limit = 1e12
    seeds = _patch_seeds(cand, opts.patch)
    zs, err, dropped = _refine(F, seeds, opts, limit)
    diag["seeds"] = int(seeds.size)
    diag["dropped"] = dropped
    diag["rounds"] = 1
    # zeros come in clusters; seeding around what was found recovers
    # neighbours whose resultant roots were too inaccurate to converge
    for _ in range(opts.extra_rounds):
        if zs.size == 0:
            break
        more = _patch_seeds(zs, opts.patch)[zs.size :]
        z2, e2, dropped = _refine(F, more, opts, limit)
        diag["seeds"] += int(more.size)
        diag["dropped"] += dropped
        merged_z, merged_e = np.concatenate([zs, z2]), np.concatenate([err, e2])
        nz, ne = _merge_with_err(merged_z, merged_e, opts.merge_rel)
        diag["rounds"] += 1
        grew = nz.size > zs.size
        zs, err = nz, ne
        if not grew:
            break
    zs = zs[np.lexsort((zs.imag, zs.real))]
    report = _report(F, zs, diag)
    if report.bounds.theorem_applicable and report.N_F > report.bounds.wilmshurst_theorem:
        raise AssertionError(f"{report.N_F} zeros exceed n^2 = {report.bounds.wilmshurst_theorem}")
    if certify:
        from .certify import certify_report

        certify_report(F, report)
    return report


def _report(F: PlanarHarmonicField, zs: np.ndarray, diag: dict) -> SolveReport:
    zeros = []
    if zs.size:
        s, d, ds, dd = F.parts(zs)
        jac = (ds * np.conj(dd)).real
        cls = _orientation(jac, ds, dd)
        res = np.abs(s.real + 1j * d.imag)
        zeros = [Zero(complex(z), float(j), str(c), float(r), True) for z, j, c, r in zip(zs, jac, cls, res)]
    npl, nmi, nsg = (sum(z.orientation == c for z in zeros) for c in (PRESERVING, REVERSING, SINGULAR))
    table = bounds(max(F.n, 0), max(F.m, 0), len(zeros), nmi, nsg)
    return SolveReport(
        zeros=zeros,
        N_F=len(zeros),
        N_plus=int(npl),
        N_minus=int(nmi),
        N_singular=int(nsg),
        bounds=table,
        diagnostics=diag,
    )
