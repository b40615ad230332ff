"""Random planar harmonic fields and Monte Carlo estimates of the expected zero count.

Each component is ``F_j = sum_k (xi_{k,0,j} r^k cos k theta + xi_{k,1,j} r^k sin k theta)``
with iid standard normal ``xi`` (unit variance, no degree weighting).  Writing
``g_j = sum_k (xi_{k,0,j} - i xi_{k,1,j}) z^k`` gives ``F_j = Re g_j`` and hence
``F = p + conj(q)`` with ``p = (g_1 + i g_2)/2`` and ``q = (g_1 - i g_2)/2``.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDraw, DegenerateElimination, LeadingPartVanishes, NonIsolatedZeroSet
from .planar import PlanarHarmonicField, solve
from .poly import ComplexUnivariate

__all__ = [
    "EnsembleSpec",
    "TrialResult",
    "MonteCarloResult",
    "draw_coefficients",
    "sample_planar",
    "trig_field",
    "run_trial",
    "expected_zeros",
    "DISCARD_WARNING",
]

DISCARD_WARNING = 0.10


@dataclass(frozen=True)
class EnsembleSpec:
    n: int
    seed: int = 0
    trials: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError("n must be a non-negative integer")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError("trials must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def to_json(self) -> dict:
        return {"n": self.n, "seed": self.seed, "trials": self.trials, "variance": 1.0, "weighting": "flat"}


def draw_coefficients(spec: EnsembleSpec, trial: int = 0) -> np.ndarray:
    """Standard normals ``xi[k, i, j]`` (``i = 0`` cosine, ``i = 1`` sine) for one trial.

    The stream is a Philox generator keyed by ``(seed, trial)``; the array is
    always filled in ``(k, i, j)`` order, so values do not depend on scheduling.
    """
    key = np.random.SeedSequence([int(spec.seed), int(trial)])
    rng = np.random.Generator(np.random.Philox(key))
    xi = rng.standard_normal((spec.n + 1, 2, 2))
    xi[0, 1, :] = 0.0  # sin(0) = 0: a single constant term per component
    return xi


def _field_from_xi(xi: np.ndarray) -> PlanarHarmonicField:
    gamma = xi[:, 0, :] - 1j * xi[:, 1, :]  # (k, j)
    g1, g2 = gamma[:, 0], gamma[:, 1]
    return PlanarHarmonicField(ComplexUnivariate((g1 + 1j * g2) / 2), ComplexUnivariate((g1 - 1j * g2) / 2))


def sample_planar(spec: EnsembleSpec, trial: int = 0) -> PlanarHarmonicField:
    """The random field of one trial."""
    if spec.n == 0:
        raise DegenerateDraw("n = 0 gives a constant field")
    return _field_from_xi(draw_coefficients(spec, trial))


def trig_field(xi: np.ndarray, z) -> np.ndarray:
    """Direct evaluation of the trigonometric sums as ``F_1 + i F_2``."""
    z = np.asarray(z, dtype=complex)
    r, th = np.abs(z), np.angle(z)
    out = np.zeros(z.shape, complex)
    for k in range(xi.shape[0]):
        c, s = r**k * np.cos(k * th), r**k * np.sin(k * th)
        f1 = xi[k, 0, 0] * c + xi[k, 1, 0] * s
        f2 = xi[k, 0, 1] * c + xi[k, 1, 1] * s
        out += f1 + 1j * f2
    return out


@dataclass
class TrialResult:
    trial: int
    N_F: int | None
    N_plus: int | None
    N_minus: int | None
    discarded: str | None = None  # reason, when the draw is not counted


def run_trial(spec: EnsembleSpec, trial: int) -> TrialResult:
    F = sample_planar(spec, trial)
    try:
        rep = solve(F)
    except (NonIsolatedZeroSet, LeadingPartVanishes, DegenerateElimination) as exc:
        return TrialResult(trial, None, None, None, type(exc).__name__)
    if rep.N_singular:
        return TrialResult(trial, None, None, None, "SingularZero")
    return TrialResult(trial, rep.N_F, rep.N_plus, rep.N_minus)


@dataclass
class MonteCarloResult:
    spec: EnsembleSpec
    mean: float
    std_error: float
    counts: list
    discarded: int
    trials: list = field(default_factory=list)  # per-trial records, ordered by trial
    warning: bool = False
    parity_ok: bool = True

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "mean": self.mean,
            "std_error": self.std_error,
            "kept": len(self.counts),
            "discarded": self.discarded,
            "warning": self.warning,
            "parity_ok": self.parity_ok,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "N_F", "N_plus", "N_minus"])
        for t in self.trials:
            if t.discarded is None:
                w.writerow([t.trial, t.N_F, t.N_plus, t.N_minus])
        return buf.getvalue()


def expected_zeros(spec: EnsembleSpec, threads: int | None = 1) -> MonteCarloResult:
    """Monte Carlo mean of ``N_F`` over ``spec.trials`` independent draws.

    Draws with a non-isolated zero set, a vanishing leading part or a singular
    zero are discarded and tallied.  More than 10% discards sets ``warning``.
    ``parity_ok`` records whether ``N_F = n (mod 2)`` held on every kept draw.
    """
    if spec.n < 1:
        raise DegenerateDraw("n must be at least 1")
    workers = max(1, int(threads or 1))
    ids = range(spec.trials)
    if workers == 1:
        results = [run_trial(spec, t) for t in ids]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: run_trial(spec, t), ids))
    results.sort(key=lambda r: r.trial)
    kept = [r for r in results if r.discarded is None]
    counts = [r.N_F for r in kept]
    discarded = len(results) - len(kept)
    if counts:
        arr = np.array(counts, dtype=float)
        mean = float(arr.mean())
        se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    else:
        mean, se = float("nan"), float("nan")
    warn = discarded > DISCARD_WARNING * spec.trials
    if warn:
        warnings.warn(f"{discarded} of {spec.trials} draws discarded", RuntimeWarning, stacklevel=2)
    parity = all((c - spec.n) % 2 == 0 for c in counts)
    return MonteCarloResult(spec, mean, se, counts, discarded, results, warn, parity)
