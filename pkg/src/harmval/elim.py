"""Elimination of the conjugate variable via the Sylvester resultant in ``w``.

Writing ``w`` for ``conj(z)``, the equation ``p(z) + conj(q(z)) = 0`` and its
conjugate become the polynomial system

    A(z, w) = p(z) + qbar(w) = 0,    B(z, w) = q(z) + pbar(w) = 0,

where ``qbar`` has conjugated coefficients.  Every zero ``z`` of the harmonic
field is then a root of ``R(z) = Res_w(A, B)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateElimination, NonIsolatedZeroSet
from .poly import ComplexUnivariate, conj_coefficients
from .roots import aberth

__all__ = [
    "BivariatePoly",
    "build_conjugate_system",
    "sylvester_matrix",
    "resultant_w",
    "resultant_degree",
    "resultant_roots",
    "det_logderiv",
]


@dataclass(frozen=True)
class BivariatePoly:
    """Polynomial in ``(z, w)`` stored as a list of z-polynomials, one per power of ``w``."""

    w_coeffs: tuple

    def __init__(self, w_coeffs: Sequence):
        entries = [c if isinstance(c, ComplexUnivariate) else ComplexUnivariate(c) for c in w_coeffs]
        while len(entries) > 1 and entries[-1].is_zero():
            entries.pop()
        if not entries:
            entries = [ComplexUnivariate.zero()]
        object.__setattr__(self, "w_coeffs", tuple(entries))

    @property
    def deg_w(self) -> int:
        if len(self.w_coeffs) == 1 and self.w_coeffs[0].is_zero():
            return -1
        return len(self.w_coeffs) - 1

    @property
    def deg_z(self) -> int:
        return max(c.degree for c in self.w_coeffs)

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        acc = np.zeros(np.broadcast(z, w).shape, dtype=complex)
        for c in reversed(self.w_coeffs):
            acc = acc * w + c(z)
        return acc


def build_conjugate_system(p: ComplexUnivariate, q: ComplexUnivariate):
    """Return ``(A, B)`` with ``A = p(z) + qbar(w)`` and ``B = q(z) + pbar(w)``."""
    qb = conj_coefficients(q).coeffs
    pb = conj_coefficients(p).coeffs
    a_entries = [p + complex(qb[0])] + [ComplexUnivariate.constant(c) for c in qb[1:]]
    b_entries = [q + complex(pb[0])] + [ComplexUnivariate.constant(c) for c in pb[1:]]
    return BivariatePoly(a_entries), BivariatePoly(b_entries)


class _Sylvester:
    """Vectorized evaluation of the Sylvester matrix (and its z-derivative) at many points."""

    def __init__(self, A: BivariatePoly, B: BivariatePoly):
        da, db = A.deg_w, B.deg_w
        if da < 1 or db < 1:
            raise DegenerateElimination("both polynomials must have positive degree in w")
        self.size = da + db
        self.entries = list(A.w_coeffs) + list(B.w_coeffs)
        self.derivs = [e.derivative() for e in self.entries]
        rows, cols, src = [], [], []
        # db rows of A coefficients, then da rows of B coefficients, highest power first
        for i in range(db):
            for j in range(da + 1):
                rows.append(i)
                cols.append(i + j)
                src.append(da - j)
        for i in range(da):
            for j in range(db + 1):
                rows.append(db + i)
                cols.append(i + j)
                src.append(da + 1 + db - j)
        self.rows = np.array(rows)
        self.cols = np.array(cols)
        self.src = np.array(src)
        self.scale = max(float(np.max(np.abs(e.coeffs))) for e in self.entries)

    def _eval(self, polys, z):
        return np.stack([np.polyval(c.coeffs[::-1], z) for c in polys], axis=-1)

    def matrix(self, z: np.ndarray) -> np.ndarray:
        vals = self._eval(self.entries, z)
        S = np.zeros(z.shape + (self.size, self.size), dtype=complex)
        S[..., self.rows, self.cols] = vals[..., self.src]
        return S

    def derivative(self, z: np.ndarray) -> np.ndarray:
        vals = self._eval(self.derivs, z)
        D = np.zeros(z.shape + (self.size, self.size), dtype=complex)
        D[..., self.rows, self.cols] = vals[..., self.src]
        return D

    def logdet(self, z: np.ndarray):
        return np.linalg.slogdet(self.matrix(z))


def sylvester_matrix(A: BivariatePoly, B: BivariatePoly, z: complex) -> np.ndarray:
    """Numeric Sylvester matrix of ``A`` and ``B`` in ``w`` at a fixed ``z``."""
    return _Sylvester(A, B).matrix(np.asarray(complex(z)))


def _check_not_identically_zero(syl: _Sylvester, logabs: np.ndarray):
    # structural zero: every node gives |det| below 1e-250 * scale**size
    threshold = np.log(1e-250) + syl.size * np.log(max(syl.scale, 1e-300))
    if np.all(logabs < threshold):
        raise NonIsolatedZeroSet("resultant vanishes identically; the zero set is not isolated")


def resultant_w(A: BivariatePoly, B: BivariatePoly, radius: float | None = None) -> ComplexUnivariate:
    """Coefficients of ``R(z) = Res_w(A, B)`` by evaluation and inverse FFT.

    Nodes are ``bound + 1`` scaled roots of unity.  Unless ``radius`` is given,
    it starts at 1 and takes up to three doubling/halving steps to keep the
    spread of ``|det|`` over the nodes under twelve decades.  Trailing
    coefficients below ``64 * eps`` of the largest are interpolation noise and
    are dropped.
    """
    syl = _Sylvester(A, B)
    bound = A.deg_z * B.deg_w + B.deg_z * A.deg_w
    M = bound + 1
    omega = np.exp(2j * np.pi * np.arange(M) / M)

    def sample(rho):
        sign, logabs = syl.logdet(rho * omega)
        finite = np.isfinite(logabs)
        spread = np.ptp(logabs[finite]) / np.log(10) if np.all(finite) else np.inf
        return sign, logabs, spread

    if radius is None:
        rho = 1.0
        sign, logabs, spread = sample(rho)
        for _ in range(3):
            if spread < 12:
                break
            trials = [(rho * f,) + sample(rho * f) for f in (2.0, 0.5)]
            best = min(trials, key=lambda t: t[3])
            if best[3] >= spread:
                break
            rho, sign, logabs, spread = best
    else:
        rho = float(radius)
        sign, logabs, spread = sample(rho)
    _check_not_identically_zero(syl, logabs)
    top = np.max(logabs)
    vals = sign * np.exp(logabs - top)
    spec = np.fft.fft(vals) / M  # c_k rho^k e^{-top}
    k = np.arange(M)
    with np.errstate(over="ignore", under="ignore"):
        coeffs = spec * np.exp(top - k * np.log(rho))
    mags = np.abs(coeffs)
    keep = np.nonzero(mags > 64 * np.finfo(float).eps * mags.max())[0]
    coeffs = coeffs[: keep[-1] + 1] if keep.size else coeffs[:1]
    return ComplexUnivariate(coeffs)


def det_logderiv(A: BivariatePoly, B: BivariatePoly):
    """``z -> R'(z)/R(z)`` computed as ``trace(S(z)^{-1} S'(z))`` (Jacobi's formula)."""
    syl = _Sylvester(A, B)

    def logderiv(z):
        z = np.asarray(z, dtype=complex)
        S = syl.matrix(z)
        D = syl.derivative(z)
        out = np.full(z.shape, np.inf + 0j)
        with np.errstate(all="ignore"):
            ok = np.isfinite(np.linalg.slogdet(S)[1])
            if np.any(ok):
                out[ok] = np.trace(np.linalg.solve(S[ok], D[ok]), axis1=-2, axis2=-1)
        return out

    return logderiv


def _growth(syl: _Sylvester, bound: int, probe: float):
    ang = np.exp(1j * (0.3 + 2 * np.pi * np.arange(5) / 5))
    _, l1 = syl.logdet(probe * ang)
    _, l2 = syl.logdet(2 * probe * ang)
    if not (np.all(np.isfinite(l1)) and np.all(np.isfinite(l2))):
        raise NonIsolatedZeroSet("resultant vanishes identically; the zero set is not isolated")
    slope = float(np.median(l2 - l1) / np.log(2))
    deg = int(min(bound, max(0, round(slope))))
    return deg, float(np.median(l2)) - deg * np.log(2 * probe)


def resultant_degree(A: BivariatePoly, B: BivariatePoly, probe: float = 1e6) -> int:
    """Actual degree of ``R`` read off the growth of ``log|det S(z)|`` at large ``|z|``."""
    bound = A.deg_z * B.deg_w + B.deg_z * A.deg_w
    return _growth(_Sylvester(A, B), bound, probe)[0]


def resultant_roots(
    A: BivariatePoly,
    B: BivariatePoly,
    radius: float = 1.0,
    tol: float = 1e-12,
    max_iter: int = 150,
):
    """Roots of ``R`` found by Aberth iteration directly on ``det S(z)``.

    This never forms the coefficients of ``R``, which lose all accuracy once
    the degree reaches a few hundred.  The starting circle has the geometric
    mean root modulus ``|R(0) / lead|^(1/deg)`` as radius (``R(0)`` is sampled
    slightly off the origin); ``radius`` only sets the scale of the probes.
    Returns ``(roots, converged)``.
    """
    syl = _Sylvester(A, B)
    bound = A.deg_z * B.deg_w + B.deg_z * A.deg_w
    probe = np.exp(1j * (0.1 + 2 * np.pi * np.arange(7) / 7))
    _, la = syl.logdet(probe)
    _, lb = syl.logdet(2.3 * probe)
    _check_not_identically_zero(syl, np.concatenate([la, lb]))
    deg, loglead = _growth(syl, bound, 1e6 * max(1.0, radius))
    if deg == 0:
        return np.zeros(0, complex), np.zeros(0, bool)
    _, l0 = syl.logdet(1e-3 * max(1e-3, radius) * probe)
    l0 = l0[np.isfinite(l0)]
    r0 = np.exp((np.median(l0) - loglead) / deg) if l0.size else radius
    if not np.isfinite(r0) or r0 <= 0:
        r0 = radius
    k = np.arange(deg)
    z0 = r0 * np.exp(1j * (2 * np.pi * k / deg + 0.7071067811865476))
    z, conv, _ = aberth(det_logderiv(A, B), z0, tol=tol, max_iter=max_iter, stall=True)
    return z, conv
