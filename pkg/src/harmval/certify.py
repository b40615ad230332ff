"""Independent checks on solver output.

Everything here evaluates ``F`` directly and never trusts solver locations
for the verdict: the harmonic argument principle says the winding number of
``F`` around a closed curve equals ``N_+ - N_-`` inside it (for fields with no
singular zeros), and the winding is computed from samples of ``F`` alone.
Reported zeros are only used to decide where to split boxes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LeadingPartVanishes, ZeroOnContour
from .planar import (
    PRESERVING,
    REVERSING,
    PlanarHarmonicField,
    SolveReport,
    _backward_error,
    _merge,
    _newton,
    root_bound,
)

__all__ = [
    "Contour",
    "CertBox",
    "winding",
    "coercive_radius",
    "root_bound",
    "subdivision_certify",
    "grid_oracle",
    "certify_report",
    "default_window",
]

MAX_SAMPLES = 2**16
ZERO_DISTANCE = 1e-10


@dataclass(frozen=True)
class Contour:
    """A circle ``(center, radius)`` or an axis-aligned rectangle ``(x0, x1, y0, y1)``."""

    kind: str
    center: complex = 0j
    radius: float = 1.0
    corners: tuple = (0.0, 1.0, 0.0, 1.0)

    def __post_init__(self):
        if self.kind == "circle":
            if not self.radius > 0:
                raise ValueError("circle radius must be positive")
        elif self.kind == "rect":
            x0, x1, y0, y1 = self.corners
            if not (x1 > x0 and y1 > y0):
                raise ValueError("rectangle must have positive width and height")
        else:
            raise ValueError(f"unknown contour kind {self.kind!r}")

    @classmethod
    def circle(cls, center: complex, radius: float) -> "Contour":
        return cls("circle", center=complex(center), radius=float(radius))

    @classmethod
    def rect(cls, x0: float, x1: float, y0: float, y1: float) -> "Contour":
        return cls("rect", corners=(float(x0), float(x1), float(y0), float(y1)))

    def points(self, t: np.ndarray) -> np.ndarray:
        """Positively oriented parametrization over ``t in [0, 1)``."""
        if self.kind == "circle":
            return self.center + self.radius * np.exp(2j * np.pi * t)
        x0, x1, y0, y1 = self.corners
        w, h = x1 - x0, y1 - y0
        s = (t % 1.0) * 2 * (w + h)
        out = np.empty(s.shape, complex)
        e1 = s < w
        e2 = (s >= w) & (s < w + h)
        e3 = (s >= w + h) & (s < 2 * w + h)
        e4 = s >= 2 * w + h
        out[e1] = (x0 + s[e1]) + 1j * y0
        out[e2] = x1 + 1j * (y0 + s[e2] - w)
        out[e3] = (x1 - (s[e3] - w - h)) + 1j * y1
        out[e4] = x0 + 1j * (y1 - (s[e4] - 2 * w - h))
        return out

    def initial_params(self, count: int = 64) -> np.ndarray:
        if self.kind == "circle":
            return np.arange(count) / count
        # make sure the four corners are sampled
        x0, x1, y0, y1 = self.corners
        w, h = x1 - x0, y1 - y0
        per = 2 * (w + h)
        base = np.arange(count) / count
        corners = np.array([0.0, w, w + h, 2 * w + h]) / per
        return np.unique(np.concatenate([base, corners]))


def _perimeter(c: Contour) -> float:
    if c.kind == "circle":
        return 2 * np.pi * c.radius
    x0, x1, y0, y1 = c.corners
    return 2 * ((x1 - x0) + (y1 - y0))


def _half_plane_increment(fa: np.ndarray, fb: np.ndarray):
    """Phase increment across a segment on which one component keeps its sign.

    Returns ``(dphi, ok)``; ``ok`` is False where both components change sign.
    If ``Re F`` keeps its sign the path stays in one half plane ``Re > 0`` or
    ``Re < 0`` and the increment is an ordinary angle difference after
    rotating that half plane onto ``Re > 0``; likewise for ``Im F``.
    """
    keep_re = np.sign(fa.real) * np.sign(fb.real) > 0
    keep_im = np.sign(fa.imag) * np.sign(fb.imag) > 0
    rot = np.where(keep_re, np.sign(fa.real), np.where(keep_im, -1j * np.sign(fa.imag), 1.0))
    dphi = np.angle(fb * rot) - np.angle(fa * rot)
    return dphi, keep_re | keep_im


def winding(F: PlanarHarmonicField, c: Contour, max_samples: int = MAX_SAMPLES) -> int:
    """Winding number of ``F`` along ``c``.

    Samples are refined by bisection until every step changes the phase of
    ``F`` by less than ``pi/2``.  Once a step is shorter than
    ``1e-10 * max(1, |z|)`` bisection stops: if one component of ``F`` keeps
    its sign over the step the increment is read off directly (strongly
    anisotropic fields swing through half a turn over distances far below
    double resolution), and if both change sign the contour passes through a
    zero and :class:`ZeroOnContour` is raised.  Exhausting the sample budget
    also raises.
    """
    t = c.initial_params()
    vals = F(c.points(t))
    fixed = np.zeros(t.size, bool)
    fixed_dphi = np.zeros(t.size)
    per = _perimeter(c)
    while True:
        if np.any(vals == 0):
            raise ZeroOnContour("F vanishes at a contour sample")
        nxt = np.roll(vals, -1)
        with np.errstate(all="ignore"):
            dphi = np.angle(nxt / vals)
        dphi = np.where(fixed, fixed_dphi, dphi)
        bad = np.nonzero(~(np.abs(dphi) < np.pi / 2) & ~fixed)[0]
        if bad.size == 0:
            return int(round(np.sum(dphi) / (2 * np.pi)))
        t_next = np.append(t[1:], 1.0)
        step = (t_next[bad] - t[bad]) * per
        here = np.maximum(1.0, np.abs(c.points(t[bad])))
        tiny = step < ZERO_DISTANCE * here
        if np.any(tiny):
            inc, ok = _half_plane_increment(vals[bad[tiny]], nxt[bad[tiny]])
            if not np.all(ok):
                raise ZeroOnContour("contour passes within 1e-10 of a zero")
            fixed[bad[tiny]] = True
            fixed_dphi[bad[tiny]] = inc
            bad = bad[~tiny]
            if bad.size == 0:
                continue
        if t.size + bad.size > max_samples:
            raise ZeroOnContour("phase could not be resolved within the sample budget")
        mid = 0.5 * (t[bad] + t_next[bad])
        mv = F(c.points(mid))
        t = np.insert(t, bad + 1, mid)
        vals = np.insert(vals, bad + 1, mv)
        fixed = np.insert(fixed, bad + 1, False)
        fixed_dphi = np.insert(fixed_dphi, bad + 1, 0.0)


def coercive_radius(F: PlanarHarmonicField) -> float:
    """Radius beyond which ``|F_N| > |F_L|`` and hence ``F`` has no zeros.

    On the unit circle ``max |F_k| = |p_k| + |q_k|`` for ``k >= 1``,
    ``|F_0| = |p_0 + conj(q_0)|`` and ``min |F_N| = ||p_N| - |q_N||``; the lower
    part is bounded by the sum over degrees of the maxima.  The result is that
    ratio (at least 1) times a safety factor of 1.25.
    """
    N = max(F.n, F.m)
    if N < 1:
        raise LeadingPartVanishes("constant field")
    P, Q = F.p.padded(N + 1), F.q.padded(N + 1)
    lead = abs(abs(P[N]) - abs(Q[N]))
    if lead < 1e-9 * max(1.0, abs(P[N]), abs(Q[N])):
        raise LeadingPartVanishes("leading part vanishes on the unit circle")
    lower = float(np.sum(np.abs(P[1:N]) + np.abs(Q[1:N])) + abs(P[0] + np.conj(Q[0])))
    return 1.25 * max(1.0, lower / lead)


@dataclass
class CertBox:
    rect: tuple
    winding: int | None
    zeros_inside: tuple
    status: str  # consistent | inconsistent | boundary-zero

    def to_json(self) -> dict:
        return {
            "rect": list(self.rect),
            "winding": self.winding,
            "zeros_inside": list(self.zeros_inside),
            "status": self.status,
        }


class _Boundary(Exception):
    pass


def subdivision_certify(
    F: PlanarHarmonicField,
    window: tuple,
    report: SolveReport,
    max_depth: int = 40,
) -> list:
    """Split ``window`` until each box holds at most one reported zero and check windings.

    A box holding a preserving zero must have winding +1, a reversing one -1,
    an empty box 0.  When a box edge runs through a zero, the parent split is
    retried up to three times with the split line jittered by ``1e-3`` of the
    box width; after that the box is flagged ``boundary-zero``.
    """
    if report.N_singular:
        raise ValueError("subdivision certification requires a report without singular zeros")
    locs = report.locations
    orient = np.array([z.orientation for z in report.zeros])

    def inside(rect, idx):
        x0, x1, y0, y1 = rect
        zz = locs[idx]
        return idx[(zz.real > x0) & (zz.real < x1) & (zz.imag > y0) & (zz.imag < y1)]

    def leaf(rect, idx, may_retry):
        npl = int(np.sum(orient[idx] == PRESERVING))
        nmi = int(np.sum(orient[idx] == REVERSING))
        try:
            w = winding(F, Contour.rect(*rect))
        except ZeroOnContour:
            if may_retry:
                raise _Boundary
            return CertBox(rect, None, (npl, nmi), "boundary-zero")
        status = "consistent" if w == npl - nmi else "inconsistent"
        return CertBox(rect, w, (npl, nmi), status)

    def rec(rect, idx, depth, may_retry):
        idx = inside(rect, idx)
        if idx.size <= 1 or depth >= max_depth:
            return [leaf(rect, idx, may_retry)]
        x0, x1, y0, y1 = rect
        vertical = (x1 - x0) >= (y1 - y0)
        lo, hi = (x0, x1) if vertical else (y0, y1)
        width = hi - lo
        coords = locs[idx].real if vertical else locs[idx].imag
        for attempt, jit in enumerate((0.0, 1e-3, -1e-3, 2e-3)):
            cut = 0.5 * (lo + hi) + jit * width
            # avoid cutting straight through a reported zero
            if np.any(np.abs(coords - cut) < 1e-6 * width) and attempt < 3:
                continue
            parts = ((x0, cut, y0, y1), (cut, x1, y0, y1)) if vertical else ((x0, x1, y0, cut), (x0, x1, cut, y1))
            try:
                return rec(parts[0], idx, depth + 1, True) + rec(parts[1], idx, depth + 1, True)
            except _Boundary:
                continue
        npl = int(np.sum(orient[idx] == PRESERVING))
        nmi = int(np.sum(orient[idx] == REVERSING))
        return [CertBox(rect, None, (npl, nmi), "boundary-zero")]

    return rec(tuple(float(v) for v in window), np.arange(locs.size), 0, False)


def default_window(F: PlanarHarmonicField, factor: float = 1.05) -> tuple:
    """Square ``[-h, h]^2`` with ``h = factor * root_bound(F)``; every zero lies inside."""
    h = factor * max(root_bound(F), 1e-3)
    # a slight asymmetry keeps symmetric instances off the window edges
    return (-h * 1.0001, h, -h * 1.0002, h)


def _sign_change_cells(F: PlanarHarmonicField, window: tuple, res: int) -> np.ndarray:
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, res + 1)
    ys = np.linspace(y0, y1, res + 1)
    Z = xs[None, :] + 1j * ys[:, None]
    V = F(Z.ravel()).reshape(Z.shape)
    out = []
    for comp in (V.real, V.imag):
        sg = np.sign(comp)
        corners = np.stack([sg[:-1, :-1], sg[:-1, 1:], sg[1:, :-1], sg[1:, 1:]])
        out.append((corners.max(axis=0) > 0) & (corners.min(axis=0) < 0) | np.any(corners == 0, axis=0))
    cells = np.argwhere(out[0] & out[1])
    hx, hy = (x1 - x0) / res, (y1 - y0) / res
    return (x0 + (cells[:, 1] + 0.5) * hx) + 1j * (y0 + (cells[:, 0] + 0.5) * hy)


def grid_oracle(
    F: PlanarHarmonicField,
    window: tuple,
    resolution: int = 64,
    stabilize: bool = True,
    max_resolution: int = 2048,
    tol: float = 1e-12,
) -> np.ndarray:
    """Zeros found by brute force on a grid.

    Cells where both ``Re F`` and ``Im F`` change sign seed Newton's method
    from their centers; converged points inside the window are deduplicated.
    With ``stabilize`` the resolution doubles until the count has repeated
    twice in a row (or ``max_resolution`` is reached).
    """
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    x0, x1, y0, y1 = window
    limit = 1e3 * max(abs(x0), abs(x1), abs(y0), abs(y1), 1.0)

    def once(res):
        seeds = _sign_change_cells(F, window, res)
        if seeds.size == 0:
            return seeds
        z = _newton(F, seeds, 40, limit)
        z = z[np.isfinite(z)]
        z = z[(z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)]
        err = _backward_error(F, z) if z.size else np.zeros(0)
        z, err = z[err <= tol], err[err <= tol]
        z = _merge(z, err, 1e-6)
        return z[np.lexsort((z.imag, z.real))]

    res = resolution
    found = once(res)
    if not stabilize:
        return found
    history = [found.size]
    while res < max_resolution:
        res *= 2
        nxt = once(res)
        if nxt.size >= found.size:
            found = nxt
        history.append(nxt.size)
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            break
    return found


def certify_report(F: PlanarHarmonicField, report: SolveReport, window: tuple | None = None) -> SolveReport:
    """Attach winding at infinity and a subdivision certificate to ``report`` (in place)."""
    summary: dict = {}
    try:
        R = coercive_radius(F)
        w_inf = winding(F, Contour.circle(0, R))
        summary["coercive_radius"] = R
    except (LeadingPartVanishes, ZeroOnContour):
        w_inf = None
    report.winding_at_infinity = w_inf
    summary["winding_infinity"] = w_inf
    if report.N_singular:
        summary.update(boxes_total=0, boxes_consistent=0, boundary_incomplete=0, consistent_fraction=None)
        report.certification = summary
        report.certified = False
        return report
    if window is None:
        window = default_window(F)
    boxes = subdivision_certify(F, window, report)
    n_ok = sum(b.status == "consistent" for b in boxes)
    n_bd = sum(b.status == "boundary-zero" for b in boxes)
    box_sum = sum(b.winding for b in boxes if b.winding is not None)
    summary.update(
        window=list(window),
        boxes_total=len(boxes),
        boxes_consistent=n_ok,
        boundary_incomplete=n_bd,
        consistent_fraction=n_ok / len(boxes) if boxes else 1.0,
        box_winding_sum=box_sum,
    )
    report.certification = summary
    report.certified = bool(
        w_inf is not None and w_inf == report.N_plus - report.N_minus and n_ok == len(boxes) and box_sum == w_inf
    )
    return report
