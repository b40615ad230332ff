"""Level curves ``Gamma = {Im f = 0}`` and ``Gamma0 = {Re z^n = 0}`` and their crossings.

For the counterexample family the field has ``s = 2 z^n`` and ``d = 2 f``, so
its zeros are exactly the points where both level sets meet.  ``Gamma`` is
extracted by marching squares; ``Gamma0`` is a star of ``2n`` exact rays.
Windows are ``(x0, x1, y0, y1)`` tuples as in :mod:`harmval.certify`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .planar import PlanarHarmonicField, root_bound
from .poly import ComplexUnivariate

__all__ = [
    "LevelSetMesh",
    "Intersections",
    "trace_gamma",
    "gamma0_rays",
    "rays",
    "intersections",
    "count_intersections",
    "default_window",
    "figure_data",
    "MERGE_DISTANCE",
    "TANGENT_ANGLE",
]

MERGE_DISTANCE = 1e-9
TANGENT_ANGLE = 1e-3


@dataclass
class LevelSetMesh:
    polylines: list  # complex arrays of vertices
    window: tuple
    resolution: int = 0  # 0 for meshes built analytically

    def segments(self) -> np.ndarray:
        """All polyline edges as an ``(N, 2)`` complex array."""
        parts = [np.stack([pl[:-1], pl[1:]], axis=1) for pl in self.polylines if len(pl) > 1]
        return np.concatenate(parts) if parts else np.zeros((0, 2), complex)

    def to_json(self) -> list:
        return [[{"re": float(v.real), "im": float(v.imag)} for v in pl] for pl in self.polylines]


def default_window(F: PlanarHarmonicField, factor: float = 1.5) -> tuple:
    """Square of half-width ``factor * root_bound(F)``."""
    h = factor * max(root_bound(F), 1e-3)
    return (-h, h, -h, h)


def _grid(window, resolution):
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, resolution + 1)
    ys = np.linspace(y0, y1, resolution + 1)
    return xs, ys


def trace_gamma(f: ComplexUnivariate, window: tuple, resolution: int = 1024) -> LevelSetMesh:
    """Marching-squares polylines of ``Im f = 0`` on a ``resolution^2`` cell grid.

    Crossing points are linearly interpolated on cell edges.  A saddle cell is
    resolved by the sign of ``Im f`` at its center; when that value is exactly
    zero the four branches are joined at the center point.  Polylines are cut
    at the window edge and at such junctions.
    """
    if resolution < 32:
        raise ValueError("resolution must be at least 32")
    f = f if isinstance(f, ComplexUnivariate) else ComplexUnivariate(f)
    res = int(resolution)
    if f.degree < 1:
        return LevelSetMesh([], tuple(window), res)
    xs, ys = _grid(window, res)
    Z = xs[None, :] + 1j * ys[:, None]  # Z[i, j] = xs[j] + i ys[i]
    V = f(Z).imag
    pos = V > 0
    nx = ny = res

    # crossing points on horizontal edges H[i, j]: (i, j)-(i, j+1)
    def interp(v0, v1, z0, z1):
        with np.errstate(all="ignore"):
            t = v0 / (v0 - v1)
        return z0 + t * (z1 - z0)

    h_cross = pos[:, :-1] != pos[:, 1:]
    v_cross = pos[:-1, :] != pos[1:, :]
    h_pts = np.where(h_cross, interp(V[:, :-1], V[:, 1:], Z[:, :-1], Z[:, 1:]), np.nan)
    v_pts = np.where(v_cross, interp(V[:-1, :], V[1:, :], Z[:-1, :], Z[1:, :]), np.nan)
    n_h = (ny + 1) * nx
    h_id = np.arange(n_h).reshape(ny + 1, nx)
    v_id = n_h + np.arange(ny * (nx + 1)).reshape(ny, nx + 1)

    # cell edges: bottom, right, top, left
    e_id = np.stack([h_id[:-1, :], v_id[:, 1:], h_id[1:, :], v_id[:, :-1]])
    e_on = np.stack([h_cross[:-1, :], v_cross[:, 1:], h_cross[1:, :], v_cross[:, :-1]])
    ncross = e_on.sum(axis=0)

    seg_a, seg_b = [], []
    two = ncross == 2
    if np.any(two):
        on = e_on[:, two]  # (4, k)
        ids = e_id[:, two]
        first = np.argmax(on, axis=0)
        last = 3 - np.argmax(on[::-1], axis=0)
        k = np.arange(ids.shape[1])
        seg_a.append(ids[first, k])
        seg_b.append(ids[last, k])

    centers = []
    four = np.argwhere(ncross == 4)
    if four.size:
        ci, cj = four[:, 0], four[:, 1]
        zc = 0.5 * (Z[ci, cj] + Z[ci + 1, cj + 1])
        vc = f(zc).imag
        bl = pos[ci, cj]
        ids = e_id[:, ci, cj]  # bottom, right, top, left
        same = (vc > 0) == bl
        split = vc != 0
        # center shares the bottom-left sign: the other two corners are cut off
        m = split & same
        seg_a += [ids[0, m], ids[2, m]]
        seg_b += [ids[1, m], ids[3, m]]
        m = split & ~same
        seg_a += [ids[0, m], ids[1, m]]
        seg_b += [ids[3, m], ids[2, m]]
        m = ~split
        if np.any(m):
            cid = n_h + ny * (nx + 1) + np.arange(int(m.sum()))
            centers.append(zc[m])
            for e in range(4):
                seg_a.append(ids[e, m])
                seg_b.append(cid)

    coords = np.concatenate([h_pts.ravel(), v_pts.ravel()] + centers)
    if not seg_a:
        return LevelSetMesh([], tuple(window), res)
    a = np.concatenate(seg_a)
    b = np.concatenate(seg_b)
    return LevelSetMesh([coords[c] for c in _chain(a, b, coords.size)], tuple(window), res)


def _chain(a: np.ndarray, b: np.ndarray, n_nodes: int) -> list:
    """Assemble segment list ``(a[k], b[k])`` into node chains, ordered deterministically."""
    deg = np.bincount(np.concatenate([a, b]), minlength=n_nodes)
    adj: dict[int, list] = {}
    for k, (u, v) in enumerate(zip(a.tolist(), b.tolist())):
        adj.setdefault(u, []).append(k)
        adj.setdefault(v, []).append(k)
    used = np.zeros(a.size, bool)

    def walk(start, k):
        chain = [start]
        node = start
        while True:
            used[k] = True
            node = b[k] if a[k] == node else a[k]
            chain.append(int(node))
            if deg[node] != 2:
                return chain
            nxt = [s for s in adj[node] if not used[s]]
            if not nxt:
                return chain
            k = nxt[0]

    chains = []
    ends = sorted(u for u in adj if deg[u] != 2)
    for u in ends:
        for k in adj[u]:
            if not used[k]:
                chains.append(walk(u, k))
    for k in range(a.size):  # closed loops
        if not used[k]:
            chains.append(walk(int(a[k]), k))
    return chains


def _clip(z0: complex, z1: complex, window: tuple):
    """Liang-Barsky clipping of the segment ``z0 -> z1``; ``None`` if outside."""
    x0, x1, y0, y1 = window
    dx, dy = z1.real - z0.real, z1.imag - z0.imag
    lo, hi = 0.0, 1.0
    for p, q in ((-dx, z0.real - x0), (dx, x1 - z0.real), (-dy, z0.imag - y0), (dy, y1 - z0.imag)):
        if p == 0:
            if q < 0:
                return None
            continue
        t = q / p
        if p < 0:
            lo = max(lo, t)
        else:
            hi = min(hi, t)
    if lo > hi:
        return None
    return z0 + lo * (z1 - z0), z0 + hi * (z1 - z0)


def rays(angles, window: tuple) -> LevelSetMesh:
    """Rays from the origin at the given angles, clipped to ``window``."""
    x0, x1, y0, y1 = window
    far = 2.0 * max(abs(x0), abs(x1), abs(y0), abs(y1), 1.0)
    out = []
    for th in angles:
        seg = _clip(0j, far * complex(math.cos(th), math.sin(th)), window)
        if seg is not None and seg[0] != seg[1]:
            out.append(np.array(seg, dtype=complex))
    return LevelSetMesh(out, tuple(window), 0)


def gamma0_rays(n: int, window: tuple) -> LevelSetMesh:
    """The ``2n`` rays of ``Re z^n = 0`` at angles ``(pi/2 + k pi) / n``."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    return rays([(math.pi / 2 + k * math.pi) / n for k in range(2 * n)], window)


@dataclass
class Intersections:
    points: np.ndarray  # merged transversal crossings
    tangential: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))  # flagged, not counted

    @property
    def count(self) -> int:
        return int(self.points.size)


def _cross(u, v):
    return u.real * v.imag - u.imag * v.real


def _merge_points(pts: np.ndarray, radius: float) -> np.ndarray:
    if pts.size <= 1:
        return pts
    xy = np.column_stack([pts.real, pts.imag])
    pairs = cKDTree(xy).query_pairs(radius, output_type="ndarray")
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(pts.size, pts.size))
    _, lab = connected_components(g, directed=False)
    first = np.unique(lab, return_index=True)[1]
    out = pts[np.sort(first)]
    return out[np.lexsort((out.imag, out.real))]


def intersections(mesh_a: LevelSetMesh, mesh_b: LevelSetMesh, block: int = 64) -> Intersections:
    """Segment crossings between two meshes.

    Points closer than :data:`MERGE_DISTANCE` are merged (shared endpoints of
    consecutive segments, several rays through one point).  Crossings at an
    angle below :data:`TANGENT_ANGLE` are returned separately and not counted.
    """
    A, B = mesh_a.segments(), mesh_b.segments()
    if A.shape[0] == 0 or B.shape[0] == 0:
        return Intersections(np.zeros(0, complex))
    if A.shape[0] < B.shape[0]:
        A, B = B, A
    pa, ra = A[:, 0], A[:, 1] - A[:, 0]
    la = np.abs(ra)
    ax0, ax1 = np.minimum(A[:, 0].real, A[:, 1].real), np.maximum(A[:, 0].real, A[:, 1].real)
    ay0, ay1 = np.minimum(A[:, 0].imag, A[:, 1].imag), np.maximum(A[:, 0].imag, A[:, 1].imag)
    hits, tang = [], []
    eps = 1e-12
    for s in range(0, B.shape[0], block):
        Bb = B[s : s + block]
        qb, sb = Bb[:, 0], Bb[:, 1] - Bb[:, 0]
        bx0, bx1 = np.minimum(Bb[:, 0].real, Bb[:, 1].real), np.maximum(Bb[:, 0].real, Bb[:, 1].real)
        by0, by1 = np.minimum(Bb[:, 0].imag, Bb[:, 1].imag), np.maximum(Bb[:, 0].imag, Bb[:, 1].imag)
        ov = (
            (ax0[None, :] <= bx1[:, None] + eps)
            & (bx0[:, None] <= ax1[None, :] + eps)
            & (ay0[None, :] <= by1[:, None] + eps)
            & (by0[:, None] <= ay1[None, :] + eps)
        )
        ib, ia = np.nonzero(ov)
        if ib.size == 0:
            continue
        r, sv = ra[ia], sb[ib]
        den = _cross(r, sv)
        norm = la[ia] * np.abs(sv)
        ok = (norm > 0) & (den != 0)
        ia, ib, r, sv, den, norm = ia[ok], ib[ok], r[ok], sv[ok], den[ok], norm[ok]
        w = qb[ib] - pa[ia]
        t = _cross(w, sv) / den
        u = _cross(w, r) / den
        inside = (t >= -eps) & (t <= 1 + eps) & (u >= -eps) & (u <= 1 + eps)
        pt = pa[ia] + t * r
        ang = np.arcsin(np.clip(np.abs(den) / norm, 0, 1))
        hits.append(pt[inside & (ang >= TANGENT_ANGLE)])
        tang.append(pt[inside & (ang < TANGENT_ANGLE)])
    pts = np.concatenate(hits) if hits else np.zeros(0, complex)
    tp = np.concatenate(tang) if tang else np.zeros(0, complex)
    pts = _merge_points(pts, MERGE_DISTANCE)
    tp = _merge_points(tp, MERGE_DISTANCE)
    if pts.size and tp.size:
        # a point already counted as transversal is not also flagged
        d, _ = cKDTree(np.column_stack([pts.real, pts.imag])).query(np.column_stack([tp.real, tp.imag]))
        tp = tp[d > MERGE_DISTANCE]
    return Intersections(pts, tp)


def count_intersections(mesh_a: LevelSetMesh, mesh_b: LevelSetMesh) -> int:
    """Number of transversal crossings between two meshes."""
    return intersections(mesh_a, mesh_b).count


def figure_data(f: ComplexUnivariate, n: int, window: tuple, resolution: int = 1024) -> dict:
    """Curves and crossings in a plotter-neutral JSON layout."""
    g = trace_gamma(f, window, resolution)
    g0 = gamma0_rays(n, window)
    hit = intersections(g, g0)

    def pts(z):
        return [{"re": float(v.real), "im": float(v.imag)} for v in z]

    return {
        "window": [float(v) for v in window],
        "resolution": int(resolution),
        "gamma": g.to_json(),
        "gamma0": g0.to_json(),
        "intersections": pts(hit.points),
        "tangential": pts(hit.tangential),
        "count": hit.count,
    }
