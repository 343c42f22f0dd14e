"""Complex polynomial and Laurent-polynomial arithmetic, scalar and matrix valued.

Everything downstream (brackets, spectral curves, divisors, flows) is built on
the four value types defined here:

* :class:`Poly` -- scalar polynomial, ``coeffs[k]`` is the coefficient of ``lam**k``.
* :class:`LaurentPoly` -- scalar Laurent polynomial with an explicit exponent window.
* :class:`MatPoly` -- square-matrix-valued polynomial.
* :class:`LaurentMat` -- square-matrix-valued Laurent polynomial.

All values are immutable after construction and every operation is a pure
function, so concurrent use on shared inputs is safe.

Residue convention: ``residue_infinity`` returns the coefficient of
``lam**-1`` with no extra sign.  This choice is pinned by the duality test in
the phase-space layer (the pairing of a coordinate differential with a tangent
vector reproduces the coordinate variation).
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-10

_ROOT_MAX_ITER = 400


class AlgebraError(ValueError):
    """Invalid algebraic input (zero polynomial, bad samples, shape mismatch)."""


class ConvergenceError(AlgebraError):
    """Iteration failed to converge; ``best`` carries the last iterate."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


def _as_complex_array(values, ndmin=1) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, ndmin=ndmin)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# scalar polynomials
# ---------------------------------------------------------------------------

class Poly:
    """Scalar polynomial; ``coeffs[k]`` holds the coefficient of ``lam**k``.

    The zero polynomial is represented by an empty coefficient array and has
    ``degree == -1``.  Trailing exact zeros are trimmed on construction.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[complex] = ()):
        arr = np.asarray(coeffs, dtype=np.complex128).ravel()
        nz = np.nonzero(arr)[0]
        arr = arr[: nz[-1] + 1] if nz.size else arr[:0]
        self.coeffs = _as_complex_array(arr)

    @classmethod
    def zero(cls) -> "Poly":
        return cls(())

    @classmethod
    def one(cls) -> "Poly":
        return cls((1.0,))

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "Poly":
        if k < 0:
            raise AlgebraError("monomial exponent must be >= 0")
        coeffs = np.zeros(k + 1, dtype=np.complex128)
        coeffs[k] = c
        return cls(coeffs)

    @classmethod
    def from_roots(cls, roots: Iterable[complex]) -> "Poly":
        p = cls.one()
        for rho in roots:
            p = p * cls((-rho, 1.0))
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def scale(self) -> float:
        """Largest coefficient magnitude (0 for the zero polynomial)."""
        return float(np.max(np.abs(self.coeffs))) if len(self.coeffs) else 0.0

    def __call__(self, lam: complex) -> complex:
        acc = 0.0 + 0.0j
        for c in self.coeffs[::-1]:
            acc = acc * lam + c
        return complex(acc)

    def eval_many(self, lams: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(np.asarray(lams, dtype=np.complex128))
        for c in self.coeffs[::-1]:
            acc = acc * lams + c
        return acc

    def __add__(self, other):
        other = _coerce_poly(other)
        if other is NotImplemented:
            return NotImplemented
        m = max(len(self.coeffs), len(other.coeffs))
        out = np.zeros(m, dtype=np.complex128)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.coeffs)

    def __sub__(self, other):
        return self + (-_coerce_poly(other))

    def __rsub__(self, other):
        return _coerce_poly(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero() or other.is_zero():
                return Poly.zero()
            return Poly(np.convolve(self.coeffs, other.coeffs))
        if isinstance(other, MatPoly):
            return other.__rmul__(self)
        if isinstance(other, (int, float, complex, np.number)):
            return Poly(self.coeffs * complex(other))
        return NotImplemented

    __rmul__ = __mul__

    def derivative(self) -> "Poly":
        if self.degree < 1:
            return Poly.zero()
        k = np.arange(1, len(self.coeffs))
        return Poly(self.coeffs[1:] * k)

    def divmod(self, divisor: "Poly") -> tuple["Poly", "Poly"]:
        """Euclidean division ``self = q * divisor + r`` with ``deg r < deg divisor``."""
        if divisor.is_zero():
            raise AlgebraError("division by the zero polynomial")
        rem = np.array(self.coeffs, dtype=np.complex128)
        dq = len(rem) - len(divisor.coeffs)
        if dq < 0:
            return Poly.zero(), Poly(rem)
        q = np.zeros(dq + 1, dtype=np.complex128)
        dcoef = divisor.coeffs
        for k in range(dq, -1, -1):
            q[k] = rem[k + len(dcoef) - 1] / dcoef[-1]
            rem[k : k + len(dcoef)] -= q[k] * dcoef
        return Poly(q), Poly(rem[: len(dcoef) - 1])

    def trimmed(self, tol: float) -> "Poly":
        """Drop trailing coefficients with magnitude below ``tol`` (absolute)."""
        keep = len(self.coeffs)
        while keep > 0 and abs(self.coeffs[keep - 1]) < tol:
            keep -= 1
        return Poly(self.coeffs[:keep])

    def as_laurent(self) -> "LaurentPoly":
        return LaurentPoly(0, self.coeffs)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs.shape == other.coeffs.shape \
            and bool(np.all(self.coeffs == other.coeffs))

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"


def _coerce_poly(x):
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return Poly((complex(x),))
    return NotImplemented


# ---------------------------------------------------------------------------
# scalar Laurent polynomials
# ---------------------------------------------------------------------------

class LaurentPoly:
    """Scalar Laurent polynomial: ``coeffs[m]`` is the coefficient of ``lam**(lo+m)``.

    The exponent window is explicit and arithmetic keeps the bookkeeping
    exact; both ends are trimmed of exact zeros.
    """

    __slots__ = ("lo", "coeffs")

    def __init__(self, lo: int, coeffs: Sequence[complex] = ()):
        arr = np.asarray(coeffs, dtype=np.complex128).ravel()
        nz = np.nonzero(arr)[0]
        if nz.size:
            lo = lo + int(nz[0])
            arr = arr[nz[0] : nz[-1] + 1]
        else:
            lo, arr = 0, arr[:0]
        self.lo = lo
        self.coeffs = _as_complex_array(arr)

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls(0, ())

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "LaurentPoly":
        return cls(k, (c,))

    @property
    def hi(self) -> int:
        """Highest exponent present (lo - 1 for the zero element)."""
        return self.lo + len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if len(self.coeffs) else 0.0

    def coefficient(self, k: int) -> complex:
        if self.lo <= k <= self.hi:
            return complex(self.coeffs[k - self.lo])
        return 0.0 + 0.0j

    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        out = np.zeros(hi - lo + 1, dtype=np.complex128)
        out[self.lo - lo : self.lo - lo + len(self.coeffs)] += self.coeffs
        out[other.lo - lo : other.lo - lo + len(other.coeffs)] += other.coeffs
        return LaurentPoly(lo, out)

    def __neg__(self):
        return LaurentPoly(self.lo, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            if self.is_zero() or other.is_zero():
                return LaurentPoly.zero()
            return LaurentPoly(self.lo + other.lo, np.convolve(self.coeffs, other.coeffs))
        if isinstance(other, Poly):
            return self * other.as_laurent()
        if isinstance(other, (int, float, complex, np.number)):
            return LaurentPoly(self.lo, self.coeffs * complex(other))
        return NotImplemented

    __rmul__ = __mul__

    def truncate(self, lo: int, hi: int) -> "LaurentPoly":
        """Restrict to the exponent window ``[lo, hi]`` (inclusive)."""
        if self.is_zero() or lo > self.hi or hi < self.lo:
            return LaurentPoly.zero()
        a = max(lo, self.lo)
        b = min(hi, self.hi)
        return LaurentPoly(a, self.coeffs[a - self.lo : b - self.lo + 1])

    def __call__(self, lam: complex) -> complex:
        return complex(sum(c * lam ** (self.lo + m) for m, c in enumerate(self.coeffs)))

    def __eq__(self, other):
        return isinstance(other, LaurentPoly) and self.lo == other.lo \
            and self.coeffs.shape == other.coeffs.shape and bool(np.all(self.coeffs == other.coeffs))

    def __repr__(self):
        return f"LaurentPoly(lo={self.lo}, {list(self.coeffs)})"


def residue_infinity(f: LaurentPoly) -> complex:
    """Coefficient of ``lam**-1`` of ``f`` (the residue convention of this library)."""
    return f.coefficient(-1)


# ---------------------------------------------------------------------------
# matrix polynomials
# ---------------------------------------------------------------------------

def _as_matrix_stack(coeffs, r: int | None) -> tuple[int, np.ndarray]:
    arr = np.asarray(coeffs, dtype=np.complex128)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise AlgebraError("matrix coefficients must be a stack of square matrices")
    if r is not None and arr.size and arr.shape[1] != r:
        raise AlgebraError(f"coefficient matrices must be {r}x{r}")
    return (arr.shape[1] if arr.size else (r or 0)), arr


class MatPoly:
    """Matrix polynomial: ``coeffs[k]`` is the r x r coefficient of ``lam**k``."""

    __slots__ = ("r", "coeffs")

    def __init__(self, coeffs, r: int | None = None):
        rr, arr = _as_matrix_stack(coeffs, r)
        if rr == 0:
            raise AlgebraError("matrix size r must be positive")
        keep = arr.shape[0]
        while keep > 0 and not arr[keep - 1].any():
            keep -= 1
        self.r = rr
        self.coeffs = _as_complex_array(arr[:keep], ndmin=3)

    @classmethod
    def zero(cls, r: int) -> "MatPoly":
        return cls(np.zeros((0, r, r)), r=r)

    @classmethod
    def identity(cls, r: int) -> "MatPoly":
        return cls(np.eye(r)[None, :, :])

    @classmethod
    def constant(cls, mat) -> "MatPoly":
        return cls(np.asarray(mat, dtype=np.complex128)[None, :, :])

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def is_zero(self) -> bool:
        return self.coeffs.shape[0] == 0

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def coefficient(self, k: int) -> np.ndarray:
        if 0 <= k <= self.degree:
            return np.array(self.coeffs[k])
        return np.zeros((self.r, self.r), dtype=np.complex128)

    def __call__(self, lam: complex) -> np.ndarray:
        acc = np.zeros((self.r, self.r), dtype=np.complex128)
        for k in range(self.degree, -1, -1):
            acc = acc * lam + self.coeffs[k]
        return acc

    def entry(self, i: int, j: int) -> Poly:
        if self.is_zero():
            return Poly.zero()
        return Poly(self.coeffs[:, i, j])

    def trace(self) -> Poly:
        if self.is_zero():
            return Poly.zero()
        return Poly(np.trace(self.coeffs, axis1=1, axis2=2))

    def __add__(self, other):
        if not isinstance(other, MatPoly):
            return NotImplemented
        if self.r != other.r:
            raise AlgebraError("matrix size mismatch")
        m = max(self.coeffs.shape[0], other.coeffs.shape[0])
        out = np.zeros((m, self.r, self.r), dtype=np.complex128)
        out[: self.coeffs.shape[0]] += self.coeffs
        out[: other.coeffs.shape[0]] += other.coeffs
        return MatPoly(out, r=self.r)

    def __neg__(self):
        return MatPoly(-self.coeffs, r=self.r)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MatPoly):
            if self.r != other.r:
                raise AlgebraError("matrix size mismatch")
            if self.is_zero() or other.is_zero():
                return MatPoly.zero(self.r)
            na, nb = self.coeffs.shape[0], other.coeffs.shape[0]
            out = np.zeros((na + nb - 1, self.r, self.r), dtype=np.complex128)
            for ka in range(na):
                out[ka : ka + nb] += self.coeffs[ka] @ other.coeffs
            return MatPoly(out, r=self.r)
        if isinstance(other, Poly):
            return self.__rmul__(other)
        if isinstance(other, (int, float, complex, np.number)):
            return MatPoly(self.coeffs * complex(other), r=self.r)
        if isinstance(other, LaurentMat):
            return self.as_laurent() * other
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Poly):
            if other.is_zero() or self.is_zero():
                return MatPoly.zero(self.r)
            out = np.zeros((other.degree + self.degree + 1, self.r, self.r), dtype=np.complex128)
            for k, c in enumerate(other.coeffs):
                if c:
                    out[k : k + self.coeffs.shape[0]] += c * self.coeffs
            return MatPoly(out, r=self.r)
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def commutator(self, other: "MatPoly") -> "MatPoly":
        return self * other - other * self

    def as_laurent(self) -> "LaurentMat":
        if self.is_zero():
            return LaurentMat.zero(self.r)
        return LaurentMat(0, self.coeffs, r=self.r)

    def __eq__(self, other):
        return isinstance(other, MatPoly) and self.r == other.r \
            and self.coeffs.shape == other.coeffs.shape and bool(np.all(self.coeffs == other.coeffs))

    def __repr__(self):
        return f"MatPoly(r={self.r}, degree={self.degree})"


class LaurentMat:
    """Matrix Laurent polynomial with the same exponent bookkeeping as LaurentPoly."""

    __slots__ = ("r", "lo", "coeffs")

    def __init__(self, lo: int, coeffs, r: int | None = None):
        rr, arr = _as_matrix_stack(coeffs, r)
        if rr == 0:
            raise AlgebraError("matrix size r must be positive")
        nz = [k for k in range(arr.shape[0]) if arr[k].any()]
        if nz:
            lo = lo + nz[0]
            arr = arr[nz[0] : nz[-1] + 1]
        else:
            lo, arr = 0, arr[:0]
        self.r = rr
        self.lo = lo
        self.coeffs = _as_complex_array(arr, ndmin=3)

    @classmethod
    def zero(cls, r: int) -> "LaurentMat":
        return cls(0, np.zeros((0, r, r)), r=r)

    @classmethod
    def monomial(cls, k: int, mat) -> "LaurentMat":
        return cls(k, np.asarray(mat, dtype=np.complex128)[None, :, :])

    @property
    def hi(self) -> int:
        return self.lo + self.coeffs.shape[0] - 1

    def is_zero(self) -> bool:
        return self.coeffs.shape[0] == 0

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def coefficient(self, k: int) -> np.ndarray:
        if self.lo <= k <= self.hi:
            return np.array(self.coeffs[k - self.lo])
        return np.zeros((self.r, self.r), dtype=np.complex128)

    def trace(self) -> LaurentPoly:
        if self.is_zero():
            return LaurentPoly.zero()
        return LaurentPoly(self.lo, np.trace(self.coeffs, axis1=1, axis2=2))

    def __add__(self, other):
        if isinstance(other, MatPoly):
            other = other.as_laurent()
        if not isinstance(other, LaurentMat):
            return NotImplemented
        if self.r != other.r:
            raise AlgebraError("matrix size mismatch")
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        out = np.zeros((hi - lo + 1, self.r, self.r), dtype=np.complex128)
        out[self.lo - lo : self.lo - lo + self.coeffs.shape[0]] += self.coeffs
        out[other.lo - lo : other.lo - lo + other.coeffs.shape[0]] += other.coeffs
        return LaurentMat(lo, out, r=self.r)

    __radd__ = __add__

    def __neg__(self):
        return LaurentMat(self.lo, -self.coeffs, r=self.r)

    def __sub__(self, other):
        return self + (-(other.as_laurent() if isinstance(other, MatPoly) else other))

    def __mul__(self, other):
        if isinstance(other, MatPoly):
            other = other.as_laurent()
        if isinstance(other, LaurentMat):
            if self.r != other.r:
                raise AlgebraError("matrix size mismatch")
            if self.is_zero() or other.is_zero():
                return LaurentMat.zero(self.r)
            na, nb = self.coeffs.shape[0], other.coeffs.shape[0]
            out = np.zeros((na + nb - 1, self.r, self.r), dtype=np.complex128)
            for ka in range(na):
                out[ka : ka + nb] += self.coeffs[ka] @ other.coeffs
            return LaurentMat(self.lo + other.lo, out, r=self.r)
        if isinstance(other, (LaurentPoly, Poly)):
            lp = other.as_laurent() if isinstance(other, Poly) else other
            if self.is_zero() or lp.is_zero():
                return LaurentMat.zero(self.r)
            na, nb = self.coeffs.shape[0], len(lp.coeffs)
            out = np.zeros((na + nb - 1, self.r, self.r), dtype=np.complex128)
            for kb, c in enumerate(lp.coeffs):
                if c:
                    out[kb : kb + na] += c * self.coeffs
            return LaurentMat(self.lo + lp.lo, out, r=self.r)
        if isinstance(other, (int, float, complex, np.number)):
            return LaurentMat(self.lo, self.coeffs * complex(other), r=self.r)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, MatPoly):
            return other.as_laurent() * self
        if isinstance(other, (LaurentPoly, Poly, int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def commutator(self, other) -> "LaurentMat":
        other = other.as_laurent() if isinstance(other, MatPoly) else other
        return self * other - other * self

    def truncate(self, lo: int, hi: int) -> "LaurentMat":
        if self.is_zero() or lo > self.hi or hi < self.lo:
            return LaurentMat.zero(self.r)
        a, b = max(lo, self.lo), min(hi, self.hi)
        return LaurentMat(a, self.coeffs[a - self.lo : b - self.lo + 1], r=self.r)

    def __eq__(self, other):
        return isinstance(other, LaurentMat) and self.r == other.r and self.lo == other.lo \
            and self.coeffs.shape == other.coeffs.shape and bool(np.all(self.coeffs == other.coeffs))

    def __repr__(self):
        return f"LaurentMat(r={self.r}, lo={self.lo}, hi={self.hi})"


# ---------------------------------------------------------------------------
# root finding and interpolation
# ---------------------------------------------------------------------------

def poly_roots(p: Poly, tol: float = DEFAULT_TOL) -> np.ndarray:
    """All complex roots of ``p`` with multiplicity, by Aberth-Ehrlich iteration.

    The polynomial is first stripped of leading (highest-index) coefficients
    smaller than ``tol`` relative to the coefficient scale, then normalized to
    monic form.  Iterates start on a perturbed circle whose radius is the
    Fujiwara root bound.  Each returned root satisfies
    ``|p(root)| / scale < tol`` where ``scale`` is the magnitude of the
    largest coefficient.

    Raises
    ------
    AlgebraError
        If ``p`` is identically zero (or zero after stripping).
    ConvergenceError
        If the iteration does not converge; ``best`` holds the last iterate.
    """
    if p.is_zero():
        raise AlgebraError("poly_roots: polynomial is identically zero")
    scale = p.scale()
    work = p.trimmed(tol * scale)
    if work.is_zero():
        raise AlgebraError("poly_roots: polynomial is identically zero")
    deg = work.degree
    if deg == 0:
        raise AlgebraError("poly_roots: polynomial has no roots (degree 0)")
    c = work.coeffs / work.coeffs[-1]
    if deg == 1:
        return np.array([-c[0]], dtype=np.complex128)
    if deg == 2:
        # stable quadratic formula
        b, a0 = c[1], c[0]
        disc = np.sqrt(b * b - 4.0 * a0 + 0.0j)
        q = -(b + disc) / 2.0 if abs(b + disc) >= abs(b - disc) else -(b - disc) / 2.0
        if q == 0:
            return np.array([0.0, -b], dtype=np.complex128)
        return np.array([q, a0 / q], dtype=np.complex128)

    radius = 1.0 + float(np.max(np.abs(c[:-1]) ** (1.0 / np.arange(deg, 0, -1))))
    angles = 2.0 * np.pi * (np.arange(deg) + 0.378) / deg
    z = radius * np.exp(1j * angles) * (1.0 + 0.05 * np.cos(7.0 * angles))

    mon = Poly(c)
    dmon = mon.derivative()
    pscale = float(np.max(np.abs(c)))
    best = z
    for _ in range(_ROOT_MAX_ITER):
        pv = mon.eval_many(z)
        if np.max(np.abs(pv)) / pscale < tol:
            best = z
            break
        dv = dmon.eval_many(z)
        w = np.where(dv != 0, pv / np.where(dv == 0, 1.0, dv), 0.1 + 0.1j)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - w * s
        step = np.where(np.abs(denom) > 1e-300, w / np.where(denom == 0, 1.0, denom), w)
        z = z - step
        best = z
    else:
        raise ConvergenceError("poly_roots: Aberth iteration did not converge", best=best)
    residual = np.max(np.abs(mon.eval_many(best))) / pscale
    if residual >= tol:
        raise ConvergenceError(
            f"poly_roots: residual {residual:.3e} above tolerance {tol:.3e}", best=best
        )
    return best


def interpolation_nodes(degree: int, scale: float = 1.0) -> np.ndarray:
    """``degree + 1`` scaled roots-of-unity sample nodes (well conditioned)."""
    m = degree + 1
    return scale * np.exp(2j * np.pi * (np.arange(m) + 0.25) / m)


def poly_from_samples(points: Sequence[tuple[complex, complex]], degree: int,
                      tol: float = DEFAULT_TOL) -> Poly:
    """Interpolating polynomial of the stated degree through ``(x, y)`` samples.

    Uses Newton divided differences on the first ``degree + 1`` samples; any
    extra samples are used as a consistency check and an ``AlgebraError`` is
    raised if they deviate beyond ``tol`` relative to the sample scale (this
    signals a wrong degree bound).
    """
    pts = list(points)
    if len(pts) < degree + 1:
        raise AlgebraError(f"need at least {degree + 1} samples for degree {degree}")
    xs = np.array([p[0] for p in pts], dtype=np.complex128)
    ys = np.array([p[1] for p in pts], dtype=np.complex128)
    if degree >= 1:
        sep = np.min(np.abs(xs[:, None] - xs[None, :]) + np.diag(np.full(len(xs), np.inf)))
        xscale = max(float(np.max(np.abs(xs))), 1.0)
        if sep < 1e-13 * xscale:
            raise AlgebraError("poly_from_samples: repeated abscissae")

    # Leja ordering keeps the divided-difference recursion well conditioned.
    order = _leja_order(xs)
    xs, ys = xs[order], ys[order]

    m = degree + 1
    # divided-difference table on the first m samples
    coef = np.array(ys[:m])
    for j in range(1, m):
        coef[j:m] = (coef[j:m] - coef[j - 1 : m - 1]) / (xs[j:m] - xs[: m - j])
    # expand Newton form to monomial coefficients
    poly = Poly((coef[m - 1],))
    for j in range(m - 2, -1, -1):
        poly = poly * Poly((-xs[j], 1.0)) + Poly((coef[j],))

    yscale = max(float(np.max(np.abs(ys))), 1.0)
    for x, y in pts[m:]:
        if abs(poly(x) - y) > tol * yscale * 100.0:
            raise AlgebraError(
                "poly_from_samples: over-determined samples are inconsistent with "
                f"degree {degree} (defect {abs(poly(x) - y):.3e})"
            )
    return poly


def _leja_order(xs: np.ndarray) -> np.ndarray:
    n = len(xs)
    order = np.empty(n, dtype=np.intp)
    order[0] = int(np.argmax(np.abs(xs)))
    logprod = np.full(n, -np.inf)
    chosen = np.zeros(n, dtype=bool)
    chosen[order[0]] = True
    logprod = np.log(np.abs(xs - xs[order[0]]) + 1e-300)
    for k in range(1, n):
        logprod[chosen] = -np.inf
        pick = int(np.argmax(logprod))
        order[k] = pick
        chosen[pick] = True
        logprod = logprod + np.log(np.abs(xs - xs[pick]) + 1e-300)
    return order


def matpoly_eval(m: MatPoly, lam: complex) -> np.ndarray:
    """Horner evaluation of a matrix polynomial at ``lam``."""
    return m(lam)


def matpoly_from_samples(nodes: np.ndarray, values: np.ndarray, degree: int,
                         tol: float = DEFAULT_TOL) -> MatPoly:
    """Entrywise polynomial interpolation of matrix samples ``values[k] = M(nodes[k])``."""
    values = np.asarray(values, dtype=np.complex128)
    r = values.shape[1]
    out = np.zeros((degree + 1, r, r), dtype=np.complex128)
    for i in range(r):
        for j in range(r):
            p = poly_from_samples(list(zip(nodes, values[:, i, j])), degree, tol=tol)
            out[: len(p.coeffs), i, j] = p.coeffs
    return MatPoly(out, r=r)
