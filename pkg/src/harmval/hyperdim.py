"""Harmonic vector fields in ``d = 3`` or ``4`` variables and the explicit 3-D example.

A field ``F = (F_1, ..., F_d)`` of degree ``n`` splits as ``F = F_n + F_L``
with ``F_n`` the degree-``n`` homogeneous parts.  If ``F_n`` does not vanish on
the unit sphere, every zero of ``F`` lies in a ball whose radius is computed by
:func:`coercive_radius_nd`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import LeadingPartVanishes
from .poly import RealMultivariate, eval_multi

__all__ = [
    "HarmonicFieldND",
    "CircleZeroSet",
    "eval_nd",
    "sphere_points",
    "min_leading_on_sphere",
    "coercive_radius_nd",
    "milnor_bound",
    "build_example3d",
    "cone_slopes",
    "circle_zero_sets",
    "example3d_report",
    "MAX_DIMENSION",
]

MAX_DIMENSION = 4
_VANISH = 1e-6


class HarmonicFieldND:
    """Tuple of ``d`` harmonic polynomials in ``d`` real variables (``2 <= d <= 4``)."""

    def __init__(self, components: Sequence[RealMultivariate], check: bool = True):
        comps = tuple(components)
        if not comps:
            raise ValueError("at least one component is required")
        d = comps[0].dimension
        if any(c.dimension != d for c in comps):
            raise ValueError("components live in different dimensions")
        if len(comps) != d:
            raise ValueError(f"a field on R^{d} needs {d} components, got {len(comps)}")
        if not 2 <= d <= MAX_DIMENSION:
            raise ValueError(f"dimension must be between 2 and {MAX_DIMENSION}")
        if check:
            for i, c in enumerate(comps):
                if not c.is_harmonic():
                    raise ValueError(f"component {i} is not harmonic")
        self.components = comps
        self.dimension = d

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    def leading_part(self) -> "HarmonicFieldND":
        n = self.degree
        return HarmonicFieldND([c.homogeneous_part(n) for c in self.components], check=False)

    def lower_part(self) -> "HarmonicFieldND":
        n = self.degree
        return HarmonicFieldND([c - c.homogeneous_part(n) for c in self.components], check=False)

    def __call__(self, x):
        return eval_nd(self, x)

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "components": [c.to_json() for c in self.components]}


def eval_nd(F: HarmonicFieldND, x) -> np.ndarray:
    """Component-wise evaluation at one point ``(d,)`` or a batch ``(..., d)``."""
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1:] != (F.dimension,):
        raise ValueError(f"expected points of dimension {F.dimension}, got shape {pts.shape}")
    return np.stack([eval_multi(c, pts) for c in F.components], axis=-1)


def sphere_points(d: int, samples: int) -> np.ndarray:
    """Deterministic near-uniform points on ``S^(d-1)``.

    Equal angles on the circle, a Fibonacci lattice on ``S^2`` and scrambled
    Sobol points pushed through the normal quantile function for ``d = 4``.
    """
    k = np.arange(samples)
    if d == 2:
        t = 2 * np.pi * (k + 0.5) / samples
        return np.column_stack([np.cos(t), np.sin(t)])
    if d == 3:
        z = 1 - 2 * (k + 0.5) / samples
        r = np.sqrt(1 - z * z)
        phi = np.pi * (3 - math.sqrt(5)) * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    from scipy.special import ndtri

    # draw a power-of-two block so the Sobol balance properties hold, then truncate
    m = max(int(np.ceil(np.log2(samples))), 1)
    u = qmc.Sobol(d, scramble=True, seed=0).random_base2(m)[:samples]
    g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _norm_on_sphere(F: HarmonicFieldND, pts: np.ndarray, shard: int = 20000) -> np.ndarray:
    return np.concatenate([np.linalg.norm(eval_nd(F, pts[s : s + shard]), axis=1) for s in range(0, len(pts), shard)])


def _polish(F: HarmonicFieldND, starts: np.ndarray, sign: float) -> float:
    def obj(x):
        y = x / np.linalg.norm(x)
        return sign * float(np.sum(eval_nd(F, y) ** 2))

    best = []
    for x0 in starts:
        res = minimize(obj, x0, method="Powell", options={"xtol": 1e-10, "ftol": 1e-14, "maxfev": 4000})
        best.append(math.sqrt(max(sign * res.fun, 0.0)))
    return min(best) if sign > 0 else max(best)


def min_leading_on_sphere(F: HarmonicFieldND, samples: int = 100_000, polish: int = 20) -> float:
    """Sampled minimum of ``|F_n|`` over the unit sphere.

    The smallest ``polish`` samples are refined by local minimization.  This is
    numerical evidence for non-vanishing, not a proof.
    """
    if samples < 10_000:
        raise ValueError("use at least 10^4 samples")
    Fn = F.leading_part()
    pts = sphere_points(F.dimension, samples)
    vals = _norm_on_sphere(Fn, pts)
    order = np.argsort(vals, kind="stable")[:polish]
    return float(min(vals[order[0]], _polish(Fn, pts[order], 1.0)))


def _max_on_sphere(F: HarmonicFieldND, pts: np.ndarray, polish: int) -> float:
    vals = _norm_on_sphere(F, pts)
    order = np.argsort(-vals, kind="stable")[:polish]
    return float(max(vals[order[0]], _polish(F, pts[order], -1.0)))


def coercive_radius_nd(F: HarmonicFieldND, samples: int = 100_000, polish: int = 20) -> float:
    """``1.25 * max(1, sum_k max|F_k| / min|F_n|)`` over the unit sphere.

    The sum runs over the homogeneous parts ``F_k`` of ``F_L``; for ``|x| >= 1``
    it bounds ``|F_L(x)| / |x|^(n-1)``, so ``|F| > 0`` outside the radius.
    """
    lo = min_leading_on_sphere(F, samples, polish)
    if lo <= _VANISH:
        raise LeadingPartVanishes(f"leading part nearly vanishes on the sphere (min {lo:.3g})")
    pts = sphere_points(F.dimension, samples)
    top = 0.0
    for k in range(F.degree):
        part = HarmonicFieldND([c.homogeneous_part(k) for c in F.components], check=False)
        if all(c.is_zero() for c in part.components):
            continue
        top += _max_on_sphere(part, pts, polish)
    return 1.25 * max(1.0, top / lo)


def milnor_bound(n: int, d: int) -> int:
    """``n (2n - 1)^(d - 1)``, a cap on the number of connected components of the zero set."""
    if int(n) != n or int(d) != d or n < 1 or d < 1:
        raise ValueError("n and d must be positive integers")
    return int(n) * (2 * int(n) - 1) ** (int(d) - 1)


def build_example3d() -> HarmonicFieldND:
    """The field ``(u, v, w)`` built from fourth-degree spherical harmonics.

    ``u`` and ``v`` share the cone factor ``6 z^2 - x^2 - y^2``; ``w`` is the
    zonal harmonic ``8 rho^4 P_4(cos theta)`` centred at ``(0, 0, 1)``.
    """
    x, y, z = (RealMultivariate.variable(3, i) for i in range(3))
    cone = 6 * z * z - x * x - y * y
    u = x * y * cone
    v = (x * x - y * y) * cone
    zs = z - 1
    r2 = x * x + y * y + zs * zs
    w = 35 * zs**4 - 30 * zs * zs * r2 + 3 * r2 * r2
    return HarmonicFieldND([u, v, w])


def cone_slopes() -> dict:
    """Values of ``cos^2 theta`` on the nodal cones: zeros of ``P_4`` and of ``P_{4,2}``."""
    s = math.sqrt(30)
    return {"P4": ((15 - 2 * s) / 35, (15 + 2 * s) / 35), "P42": (1 / 7,)}


@dataclass
class CircleZeroSet:
    height: float
    radius: float
    max_residual: float

    def points(self, count: int = 100) -> np.ndarray:
        t = 2 * np.pi * np.arange(count) / count
        return np.column_stack([self.radius * np.cos(t), self.radius * np.sin(t), np.full(count, self.height)])

    def to_json(self) -> dict:
        return {"z": self.height, "r": self.radius, "max_residual": self.max_residual}


def circle_zero_sets(samples: int = 100) -> list:
    """The four circles where the cones of ``{w = 0}`` meet ``{u = v = 0}``.

    On ``{w = 0}`` one has ``x^2 + y^2 = k (z - 1)^2`` with ``k = (1 - t^2)/t^2``
    for each nodal slope ``t^2`` of ``P_4``; on the cone ``x^2 + y^2 = 6 z^2``.
    Each ``(6 - k) z^2 + 2 k z - k = 0`` gives two heights.  Circles are sorted
    by height.
    """
    F = build_example3d()
    out = []
    for t2 in cone_slopes()["P4"]:
        k = (1 - t2) / t2
        for h in np.roots([6 - k, 2 * k, -k]).real:
            c = CircleZeroSet(float(h), math.sqrt(6) * abs(float(h)), 0.0)
            res = np.linalg.norm(eval_nd(F, c.points(samples)), axis=1)
            c.max_residual = float(res.max())
            out.append(c)
    return sorted(out, key=lambda c: c.height)


def example3d_report(samples: int = 100_000) -> dict:
    """Verification summary for the 3-D example in a JSON-ready dict."""
    F = build_example3d()
    harmonic = {name: c.laplacian().is_zero() for name, c in zip("uvw", F.components)}
    return {
        "harmonic": harmonic,
        "degree": F.degree,
        "min_F4_on_sphere": min_leading_on_sphere(F, samples),
        "coercive_radius": coercive_radius_nd(F, samples),
        "circles": [c.to_json() for c in circle_zero_sets()],
        "milnor_bound": milnor_bound(F.degree, F.dimension),
    }
