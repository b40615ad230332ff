"""Polynomial containers: dense complex univariate and sparse real multivariate.

Univariate coefficients are stored in ascending power order.  Evaluation comes
in two flavours: plain Horner (:func:`evaluate`) and compensated Horner
(:func:`evaluate_compensated`), which returns a result as accurate as if it had
been computed in twice the working precision.  The planar solver relies on the
latter near zeros where the monomial expansion cancels catastrophically.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import NonFiniteInput

__all__ = [
    "ComplexUnivariate",
    "RealMultivariate",
    "evaluate",
    "evaluate_compensated",
    "mul",
    "derivative",
    "conj_coefficients",
    "laplacian",
    "eval_multi",
]

_SPLITTER = 134217729.0  # 2**27 + 1


def _as_coeff_array(coeffs) -> np.ndarray:
    arr = np.array(coeffs, dtype=np.complex128).reshape(-1)
    if arr.size == 0:
        arr = np.zeros(1, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput("polynomial coefficients must be finite")
    nz = np.nonzero(arr)[0]
    arr = arr[: nz[-1] + 1] if nz.size else arr[:1]
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ComplexUnivariate:
    """Dense complex polynomial, ``coeffs[k]`` multiplies ``z**k``.

    Trailing coefficients that are exactly zero are trimmed on construction;
    nothing else is.  Use :meth:`trimmed` for a tolerance-based degree.
    """

    coeffs: np.ndarray

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", _as_coeff_array(coeffs))

    # construction helpers
    @classmethod
    def zero(cls) -> "ComplexUnivariate":
        return cls([0.0])

    @classmethod
    def constant(cls, c) -> "ComplexUnivariate":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c=1.0) -> "ComplexUnivariate":
        arr = np.zeros(k + 1, dtype=np.complex128)
        arr[k] = c
        return cls(arr)

    @classmethod
    def from_roots(cls, roots: Iterable[complex], leading=1.0) -> "ComplexUnivariate":
        out = cls([leading])
        for r in roots:
            out = out * cls([-r, 1.0])
        return out

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial reports -1."""
        if self.is_zero():
            return -1
        return self.coeffs.size - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    def trimmed(self, tol: float) -> "ComplexUnivariate":
        """Drop trailing coefficients with modulus ``<= tol * max|coeff|``."""
        c = self.coeffs
        cut = tol * np.max(np.abs(c))
        keep = np.nonzero(np.abs(c) > cut)[0]
        if keep.size == 0:
            return ComplexUnivariate.zero()
        return ComplexUnivariate(c[: keep[-1] + 1])

    def coefficient(self, k: int) -> complex:
        return complex(self.coeffs[k]) if 0 <= k < self.coeffs.size else 0j

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(max(length, self.coeffs.size), dtype=np.complex128)
        out[: self.coeffs.size] = self.coeffs
        return out

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other):
        other = _coerce(other)
        n = max(self.coeffs.size, other.coeffs.size)
        return ComplexUnivariate(self.padded(n) + other.padded(n))

    __radd__ = __add__

    def __neg__(self):
        return ComplexUnivariate(-self.coeffs)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return ComplexUnivariate(self.coeffs * complex(other))
        return mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = ComplexUnivariate([1.0])
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, ComplexUnivariate):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"ComplexUnivariate({self.coeffs.tolist()!r})"

    def derivative(self) -> "ComplexUnivariate":
        return derivative(self)

    def conj_coefficients(self) -> "ComplexUnivariate":
        return conj_coefficients(self)

    def to_json(self) -> dict:
        return {"re": self.coeffs.real.tolist(), "im": self.coeffs.imag.tolist()}

    @classmethod
    def from_json(cls, obj) -> "ComplexUnivariate":
        if isinstance(obj, Mapping):
            re = list(obj.get("re", []))
            im = list(obj.get("im", [0.0] * len(re)))
            if len(im) != len(re):
                raise ValueError("'re' and 'im' must have equal length")
            return cls(np.asarray(re, float) + 1j * np.asarray(im, float))
        raise ValueError(f"cannot decode polynomial from {type(obj).__name__}")


def _coerce(x) -> ComplexUnivariate:
    if isinstance(x, ComplexUnivariate):
        return x
    if isinstance(x, numbers.Number):
        return ComplexUnivariate([x])
    return ComplexUnivariate(x)


def _check_finite(z):
    if not np.all(np.isfinite(z)):
        raise NonFiniteInput("evaluation point is not finite")


def evaluate(poly: ComplexUnivariate, z):
    """Horner evaluation; accepts a scalar or an array of points."""
    z_arr = np.asarray(z, dtype=np.complex128)
    _check_finite(z_arr)
    c = poly.coeffs
    acc = np.full(z_arr.shape, c[-1], dtype=np.complex128)
    for a in c[-2::-1]:
        acc = acc * z_arr + a
    return complex(acc) if acc.ndim == 0 else acc


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def horner_compensated(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Compensated complex Horner on raw ascending coefficients (array input)."""
    xr = z.real
    xi = z.imag
    rr = np.full(z.shape, coeffs[-1].real)
    ri = np.full(z.shape, coeffs[-1].imag)
    er = np.zeros(z.shape)
    ei = np.zeros(z.shape)
    for a in coeffs[-2::-1]:
        p1, e1 = _two_prod(rr, xr)
        p2, e2 = _two_prod(ri, xi)
        p3, e3 = _two_prod(rr, xi)
        p4, e4 = _two_prod(ri, xr)
        s1, e5 = _two_sum(p1, -p2)
        rr, e6 = _two_sum(s1, a.real)
        t1, e7 = _two_sum(p3, p4)
        ri, e8 = _two_sum(t1, a.imag)
        er, ei = (
            er * xr - ei * xi + ((e1 - e2) + (e5 + e6)),
            er * xi + ei * xr + ((e3 + e4) + (e7 + e8)),
        )
    return (rr + er) + 1j * (ri + ei)


def evaluate_compensated(poly: ComplexUnivariate, z):
    """Horner evaluation with error-free transformations.

    The returned value carries roughly twice as many correct bits as plain
    Horner, which matters when ``|p(z)|`` is far below ``sum |c_k| |z|^k``.
    """
    z_arr = np.asarray(z, dtype=np.complex128)
    _check_finite(z_arr)
    out = horner_compensated(poly.coeffs, np.atleast_1d(z_arr))
    return complex(out[0]) if z_arr.ndim == 0 else out.reshape(z_arr.shape)


def magnitude_scale(poly: ComplexUnivariate, z):
    """``sum_k |c_k| |z|^k``, the natural size against which rounding is measured."""
    r = np.abs(np.asarray(z, dtype=np.complex128))
    a = np.abs(poly.coeffs)
    acc = np.full(r.shape, a[-1])
    for c in a[-2::-1]:
        acc = acc * r + c
    return float(acc) if acc.ndim == 0 else acc


def mul(a: ComplexUnivariate, b: ComplexUnivariate) -> ComplexUnivariate:
    if a.is_zero() or b.is_zero():
        return ComplexUnivariate.zero()
    return ComplexUnivariate(np.convolve(a.coeffs, b.coeffs))


def derivative(a: ComplexUnivariate) -> ComplexUnivariate:
    if a.coeffs.size == 1:
        return ComplexUnivariate.zero()
    return ComplexUnivariate(a.coeffs[1:] * np.arange(1, a.coeffs.size))


def conj_coefficients(a: ComplexUnivariate) -> ComplexUnivariate:
    """Polynomial with conjugated coefficients, so that conj(a(z)) = result(conj(z))."""
    return ComplexUnivariate(np.conj(a.coeffs))


# --------------------------------------------------------------------------
# multivariate


def _clean_number(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


@dataclass(frozen=True, eq=False)
class RealMultivariate:
    """Sparse real polynomial in ``dimension`` variables.

    ``terms`` maps exponent tuples to coefficients.  Coefficients may be ints,
    Fractions or floats; exact types stay exact under +, -, * and laplacian.
    """

    dimension: int
    terms: Mapping[tuple, numbers.Real] = field(default_factory=dict)

    def __init__(self, dimension: int, terms: Mapping | Iterable = ()):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[tuple, numbers.Real] = {}
        for exp, c in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != dimension:
                raise ValueError(f"multi-index {exp} does not have length {dimension}")
            if any(e < 0 for e in exp):
                raise ValueError("negative exponent")
            clean[exp] = clean.get(exp, 0) + c
        clean = {e: _clean_number(c) for e, c in clean.items() if c != 0}
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def variable(cls, dimension: int, index: int) -> "RealMultivariate":
        exp = [0] * dimension
        exp[index] = 1
        return cls(dimension, {tuple(exp): 1})

    @classmethod
    def constant(cls, dimension: int, c) -> "RealMultivariate":
        return cls(dimension, {(0,) * dimension: c})

    @property
    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def homogeneous_part(self, k: int) -> "RealMultivariate":
        return RealMultivariate(self.dimension, {e: c for e, c in self.terms.items() if sum(e) == k})

    def _check(self, other: "RealMultivariate"):
        if other.dimension != self.dimension:
            raise ValueError("dimension mismatch")

    def _coerce(self, other) -> "RealMultivariate":
        if isinstance(other, RealMultivariate):
            self._check(other)
            return other
        if isinstance(other, numbers.Real):
            return RealMultivariate.constant(self.dimension, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return RealMultivariate(self.dimension, out)

    __radd__ = __add__

    def __neg__(self):
        return RealMultivariate(self.dimension, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[tuple, numbers.Real] = {}
        for (e1, c1), (e2, c2) in product(self.terms.items(), other.terms.items()):
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
        return RealMultivariate(self.dimension, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = RealMultivariate.constant(self.dimension, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, RealMultivariate):
            return NotImplemented
        return self.dimension == other.dimension and self.terms == other.terms

    def __hash__(self):
        return hash((self.dimension, tuple(self.terms.items())))

    def __repr__(self):
        return f"RealMultivariate({self.dimension}, {self.terms!r})"

    def partial(self, i: int) -> "RealMultivariate":
        out = {}
        for e, c in self.terms.items():
            if e[i] > 0:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return RealMultivariate(self.dimension, out)

    def laplacian(self) -> "RealMultivariate":
        return laplacian(self)

    def is_harmonic(self, rel_tol: float = 1e-12) -> bool:
        """Exact check for int/Fraction coefficients, relative for floats."""
        lap = laplacian(self)
        if lap.is_zero():
            return True
        if all(isinstance(c, (int, Fraction)) for c in self.terms.values()):
            return False
        scale = max((abs(float(c)) for c in self.terms.values()), default=0.0)
        return max(abs(float(c)) for c in lap.terms.values()) <= rel_tol * max(scale, 1.0)

    def __call__(self, x):
        return eval_multi(self, x)

    def to_json(self) -> list:
        return [{"exp": list(e), "c": float(c)} for e, c in self.terms.items()]

    @classmethod
    def from_json(cls, obj: Sequence[Mapping], dimension: int | None = None) -> "RealMultivariate":
        items = [(tuple(t["exp"]), t["c"]) for t in obj]
        if dimension is None:
            if not items:
                raise ValueError("dimension required for an empty term list")
            dimension = len(items[0][0])
        return cls(dimension, items)


def laplacian(a: RealMultivariate) -> RealMultivariate:
    out: dict[tuple, numbers.Real] = {}
    for e, c in a.terms.items():
        for i, ei in enumerate(e):
            if ei >= 2:
                ne = list(e)
                ne[i] -= 2
                key = tuple(ne)
                out[key] = out.get(key, 0) + c * ei * (ei - 1)
    return RealMultivariate(a.dimension, out)


def eval_multi(a: RealMultivariate, x):
    """Evaluate at a point (shape ``(d,)``) or a batch of points (shape ``(..., d)``)."""
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1:] != (a.dimension,):
        raise ValueError(f"expected trailing dimension {a.dimension}, got shape {pts.shape}")
    out = np.zeros(pts.shape[:-1])
    for e, c in a.terms.items():
        term = np.full(pts.shape[:-1], float(c))
        for i, ei in enumerate(e):
            if ei:
                term = term * pts[..., i] ** ei
        out = out + term
    return float(out) if out.ndim == 0 else out
