"""Simultaneous root finding (Aberth-Ehrlich) with Newton polishing."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConstantPolynomial
from .poly import ComplexUnivariate

__all__ = ["RootSet", "all_roots", "aberth", "newton_polygon_guesses", "horner_logderiv"]

# fixed rotation that breaks the symmetry of initial circles
_ROTATION = 0.7071067811865476


@dataclass
class RootSet:
    roots: np.ndarray
    error_radii: np.ndarray
    converged: np.ndarray
    iterations: int
    clusters: list = field(default_factory=list)  # (center, multiplicity) for merged groups

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))

    @property
    def not_converged(self) -> bool:
        """True for a partial result (some roots hit the iteration cap)."""
        return not self.all_converged

    def __len__(self):
        return self.roots.size


def newton_polygon_guesses(coeffs: np.ndarray) -> np.ndarray:
    """Starting points on circles read off the upper hull of ``(k, log|c_k|)``."""
    mags = np.abs(coeffs)
    idx = np.nonzero(mags)[0]
    deg = coeffs.size - 1
    pts = [(int(k), float(np.log(mags[k]))) for k in idx]
    hull: list[tuple[int, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    out = []
    for e, ((i, yi), (j, yj)) in enumerate(zip(hull[:-1], hull[1:])):
        m = j - i
        radius = np.exp((yi - yj) / m)
        ang = 2 * np.pi * np.arange(m) / m + 2 * np.pi * e / max(deg, 1) + _ROTATION
        out.append(radius * np.exp(1j * ang))
    return np.concatenate(out) if out else np.zeros(0, complex)


def horner_logderiv(coeffs: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Return ``z -> p'(z)/p(z)``; evaluates the reversed polynomial when |z| > 1."""
    deg = coeffs.size - 1
    rev = coeffs[::-1]

    def _pd(c, z):
        p = np.full(z.shape, c[-1], dtype=complex)
        d = np.zeros(z.shape, dtype=complex)
        for a in c[-2::-1]:
            d = d * z + p
            p = p * z + a
        return p, d

    def logderiv(z):
        out = np.empty(z.shape, dtype=complex)
        inner = np.abs(z) <= 1
        if np.any(inner):
            p, d = _pd(coeffs, z[inner])
            out[inner] = d / p
        if np.any(~inner):
            w = 1.0 / z[~inner]
            p, d = _pd(rev, w)
            out[~inner] = w * (deg - w * d / p)
        return out

    return logderiv


def aberth(
    logderiv: Callable[[np.ndarray], np.ndarray],
    z0: np.ndarray,
    tol: float = 1e-12,
    max_iter: int = 200,
    at_noise: Callable[[np.ndarray], np.ndarray] | None = None,
    stall: bool = False,
):
    """Aberth-Ehrlich iteration driven by a log-derivative oracle.

    A root is frozen once ``|correction| <= tol * max(1, |z|)``, or once
    ``at_noise(z)`` reports its residual is at the rounding level (ill-conditioned
    roots stall above ``tol`` otherwise).  Only unfrozen roots are re-evaluated,
    so the oracle may be expensive (e.g. a determinant).  With ``stall=True`` a
    root is also frozen when its correction is below ``1e-7 * max(1, |z|)`` but
    no longer shrinking, which is how rounding noise shows up without a
    residual test.
    Returns ``(roots, converged, iterations)``.
    """
    z = np.array(z0, dtype=complex)
    n = z.size
    converged = np.zeros(n, dtype=bool)
    prev = np.full(n, np.inf)
    it = 0
    for it in range(1, max_iter + 1):
        act = np.nonzero(~converged)[0]
        if act.size == 0:
            it -= 1
            break
        with np.errstate(all="ignore"):
            ld = logderiv(z[act])
            diff = z[act][:, None] - z[None, :]
            diff[np.arange(act.size), act] = np.inf
            s = np.sum(1.0 / diff, axis=1)
            corr = 1.0 / (ld - s)
        bad = ~np.isfinite(corr)
        corr[bad] = 0.0
        z[act] = z[act] - corr
        done = (np.abs(corr) <= tol * np.maximum(1.0, np.abs(z[act]))) & ~bad
        # an exact hit (p(z) == 0) gives ld = inf and corr = 0
        done |= np.isinf(ld)
        if at_noise is not None:
            done |= at_noise(z[act]) & ~bad
        if stall:
            mag = np.abs(corr)
            done |= (mag <= 1e-7 * np.maximum(1.0, np.abs(z[act]))) & (mag >= 0.5 * prev[act]) & ~bad
            prev[act] = mag
        converged[act[done]] = True
    return z, converged, it


def _newton_polish(coeffs, z, steps=3):
    deg = coeffs.size - 1
    ld = horner_logderiv(coeffs)
    z = z.copy()
    for _ in range(steps):
        with np.errstate(all="ignore"):
            step = 1.0 / ld(z)
        ok = np.isfinite(step)
        z[ok] = z[ok] - step[ok]
    with np.errstate(all="ignore"):
        radii = deg * np.abs(1.0 / ld(z))
    radii[~np.isfinite(radii)] = 0.0
    return z, radii


def _clusters(z, radii):
    order = np.argsort(z.real)
    groups: list[list[int]] = []
    for i in order:
        for g in groups:
            j = g[0]
            if abs(z[i] - z[j]) <= 10 * max(radii[i], radii[j]):
                g.append(i)
                break
        else:
            groups.append([i])
    return [(complex(np.mean(z[g])), len(g)) for g in groups if len(g) > 1]


def _noise_test(coeffs):
    deg = coeffs.size - 1
    rev = coeffs[::-1]
    mags = np.abs(coeffs)

    def test(z):
        out = np.zeros(z.shape, bool)
        r = np.abs(z)
        for c, m, sel, x in ((coeffs, mags, r <= 1, z), (rev, mags[::-1], r > 1, None)):
            if not np.any(sel):
                continue
            pts = z[sel] if x is not None else 1.0 / z[sel]
            v = np.full(pts.shape, c[-1])
            a = np.full(pts.shape, m[-1])
            ap = np.abs(pts)
            for ck, mk in zip(c[-2::-1], m[-2::-1]):
                v = v * pts + ck
                a = a * ap + mk
            out[sel] = np.abs(v) <= 4 * deg * np.finfo(float).eps * a
        return out

    return test


def all_roots(poly: ComplexUnivariate, tol: float = 1e-12, max_iter: int = 200) -> RootSet:
    """All ``deg`` roots of ``poly`` counted with multiplicity."""
    c = poly.coeffs
    deg = poly.degree
    if deg < 1:
        raise ConstantPolynomial("polynomial has degree < 1")
    nz = int(np.nonzero(c)[0][0])  # exact roots at the origin
    core = c[nz:]
    zeros = np.zeros(nz, dtype=complex)
    if core.size == 1:
        z, conv, it, radii = np.zeros(0, complex), np.zeros(0, bool), 0, np.zeros(0)
    elif core.size == 2:
        z = np.array([-core[0] / core[1]])
        conv, it, radii = np.ones(1, bool), 1, np.zeros(1)
    else:
        z0 = newton_polygon_guesses(core)
        z, conv, it = aberth(horner_logderiv(core), z0, tol, max_iter, _noise_test(core))
        z, radii = _newton_polish(core, z)
    roots = np.concatenate([zeros, z])
    radii = np.concatenate([np.zeros(nz), radii])
    conv = np.concatenate([np.ones(nz, bool), conv])
    return RootSet(roots=roots, error_radii=radii, converged=conv, iterations=it, clusters=_clusters(roots, radii))
