"""Rational phase space of matrix polynomials and its pencil of Poisson brackets.

The phase space is the set of r x r complex matrix polynomials phi(lam) of
degree at most n.  Its dual is realized as matrix Laurent polynomials with
exponents -n-1 .. -1 under the trace-residue pairing
``<c, v> = [lam**-1] tr(c v)``.

A Poisson structure is selected by a pencil parameter ``(a, b)`` with ``a`` a
scalar polynomial of degree at most n+1 and ``b`` a constant.  The same
bracket is computed here along three independent routes:

* :func:`poisson_tensor_apply` -- the cocycle-splitting form of the Poisson
  tensor (the master normalization of this library),
* :func:`bracket_r_form` -- the R = P_+ - P_- form, computed purely by
  Laurent algebra,
* :func:`bracket_tensor_form` -- the tensor form built from the rational
  r-matrix ``Pi / (mu - lam)`` (Pi the permutation on the tensor square).

Normalization notes (verified by the test suite):

* ``{f, g} = <df, Lambda_{a,b}(dg)>`` with ``Lambda`` the cocycle-splitting
  tensor.  This normalization is pinned by the divisor-coordinate canonical
  relations ``{lam_mu, z_mu} = a(lam_mu) + b z_mu``.
* The R-form carries a factor 1/2 on its a-term relative to the commonly
  quoted expression ``<phi, [R(a df), dg] + [df, R(a dg)]>``; without it the
  a- and b-parts of the pencil would be normalized inconsistently.
* The r-matrix convention that reproduces the same bracket in tensor form is
  ``r = Pi / (mu - lam)`` together with ``b -> -b`` relative to the usual
  ``Pi / (lam - mu)`` writing; equivalently, the tensor bracket below is the
  negative of the ``Pi/(lam-mu)`` expression with the sign of b flipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    AlgebraError,
    LaurentMat,
    LaurentPoly,
    MatPoly,
    Poly,
    residue_infinity,
)


class PhaseSpaceError(ValueError):
    """Dimension mismatch or invalid phase-space input."""


def unit_matrix(r: int, row: int, col: int) -> np.ndarray:
    """Elementary matrix with a single 1 at (row, col), 0-based."""
    e = np.zeros((r, r), dtype=np.complex128)
    e[row, col] = 1.0
    return e


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhasePoint:
    """A point phi(lam) of the phase space: matrix polynomial of degree <= n."""

    phi: MatPoly
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise PhaseSpaceError("degree bound n must be >= 0")
        if self.phi.degree > self.n:
            raise PhaseSpaceError(f"deg(phi) = {self.phi.degree} exceeds the bound n = {self.n}")

    @property
    def r(self) -> int:
        return self.phi.r

    def coefficient(self, k: int) -> np.ndarray:
        return self.phi.coefficient(k)

    def to_vector(self) -> np.ndarray:
        """Flatten to a complex vector of length (n+1) * r * r, index (k, i, j)."""
        out = np.zeros(((self.n + 1), self.r, self.r), dtype=np.complex128)
        d = self.phi.coeffs.shape[0]
        out[:d] = self.phi.coeffs
        return out.ravel()

    @classmethod
    def from_vector(cls, vec: np.ndarray, r: int, n: int) -> "PhasePoint":
        coeffs = np.asarray(vec, dtype=np.complex128).reshape(n + 1, r, r)
        return cls(MatPoly(coeffs, r=r), n)

    def perturbed(self, i: int, j: int, k: int, delta: complex) -> "PhasePoint":
        """Shift the (i, j) entry of the lam**k coefficient by delta."""
        vec = self.to_vector().reshape(self.n + 1, self.r, self.r).copy()
        vec[k, i, j] += delta
        return PhasePoint(MatPoly(vec, r=self.r), self.n)


@dataclass(frozen=True)
class CotangentElement:
    """Dual-space element: matrix Laurent polynomial on the window [-n-1, -1]."""

    mat: LaurentMat
    n: int

    def __post_init__(self):
        if not self.mat.is_zero() and (self.mat.lo < -self.n - 1 or self.mat.hi > -1):
            raise PhaseSpaceError(
                f"cotangent exponents must lie in [{-self.n - 1}, -1], "
                f"got [{self.mat.lo}, {self.mat.hi}]"
            )

    @property
    def r(self) -> int:
        return self.mat.r

    @classmethod
    def from_gradient(cls, grad: np.ndarray, n: int) -> "CotangentElement":
        """Build sum_k G_k lam**(-k-1) from gradient matrices grad[k][j, i].

        ``grad[k]`` must already be arranged so that its (j, i) entry is the
        partial derivative with respect to the (i, j) entry of the lam**k
        coefficient (i.e. the transpose bookkeeping of the trace pairing).
        """
        grad = np.asarray(grad, dtype=np.complex128)
        return cls(LaurentMat(-n - 1, grad[::-1], r=grad.shape[1]), n)


@dataclass(frozen=True)
class BracketPencil:
    """Pencil parameter (a, b) selecting one Poisson structure from the family.

    ``b`` must be a constant; the subfamily with polynomial ``b`` does not
    satisfy the Jacobi identity and is reachable only through the test-only
    constructor :meth:`unsafe_with_polynomial_b`.
    """

    a: Poly
    b: complex = 0.0
    b_poly: Poly | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.b_poly is not None and not isinstance(self.b_poly, Poly):
            raise PhaseSpaceError("b_poly must be a Poly")

    @classmethod
    def of(cls, a, b: complex = 0.0) -> "BracketPencil":
        if isinstance(a, (int, float, complex)):
            a = Poly((complex(a),))
        elif not isinstance(a, Poly):
            a = Poly(a)
        return cls(a, complex(b))

    @classmethod
    def unsafe_with_polynomial_b(cls, a, b_poly: Poly) -> "BracketPencil":
        """Test-only back door: polynomial b violates the Jacobi identity."""
        if isinstance(a, (int, float, complex)):
            a = Poly((complex(a),))
        return cls(a, 0.0, b_poly=b_poly)

    def validate_for(self, n: int) -> None:
        if self.a.degree > n + 1:
            raise PhaseSpaceError(f"deg(a) = {self.a.degree} exceeds n + 1 = {n + 1}")

    def b_factor(self):
        """The b parameter as a multiplier (complex scalar or Poly)."""
        return self.b_poly if self.b_poly is not None else self.b


_SPANNING_PENCILS = ((Poly((1.0,)), 0.0), (Poly((0.0, 1.0)), 0.0), (Poly(()), 1.0))


def spanning_pencils() -> tuple[BracketPencil, ...]:
    """The three-member spanning set (a=1, b=0), (a=lam, b=0), (a=0, b=1)."""
    return tuple(BracketPencil(a, b) for a, b in _SPANNING_PENCILS)


@dataclass(frozen=True)
class CoordinateFunction:
    """A coordinate function on the phase space (indices are 0-based).

    ``coefficient(i, j, k)`` is the (i, j) entry of the lam**k coefficient;
    ``evaluation(i, j, lam0)`` is the (i, j) entry of phi(lam0).
    """

    kind: str
    i: int
    j: int
    k: int = 0
    lam0: complex = 0.0

    @classmethod
    def coefficient(cls, i: int, j: int, k: int) -> "CoordinateFunction":
        return cls("coefficient", i, j, k=k)

    @classmethod
    def evaluation(cls, i: int, j: int, lam0: complex) -> "CoordinateFunction":
        return cls("evaluation", i, j, lam0=complex(lam0))

    def validate_for(self, r: int, n: int) -> None:
        if not (0 <= self.i < r and 0 <= self.j < r):
            raise PhaseSpaceError(f"matrix indices ({self.i}, {self.j}) out of range for r = {r}")
        if self.kind == "coefficient" and not (0 <= self.k <= n):
            raise PhaseSpaceError(f"coefficient index k = {self.k} out of range for n = {n}")

    def value(self, at: PhasePoint) -> complex:
        self.validate_for(at.r, at.n)
        if self.kind == "coefficient":
            return complex(at.coefficient(self.k)[self.i, self.j])
        return complex(at.phi(self.lam0)[self.i, self.j])


def coordinate_functions(r: int, n: int) -> Iterator[CoordinateFunction]:
    """All coefficient coordinates of the (r, n) phase space, lexicographic in (k, i, j)."""
    for k in range(n + 1):
        for i in range(r):
            for j in range(r):
                yield CoordinateFunction.coefficient(i, j, k)


# ---------------------------------------------------------------------------
# pairing, differentials, splitting
# ---------------------------------------------------------------------------

def pairing(c, v: MatPoly) -> complex:
    """Trace-residue pairing: coefficient of lam**-1 of tr(c * v)."""
    cm = c.mat if isinstance(c, CotangentElement) else c
    if cm.r != v.r:
        raise PhaseSpaceError(f"dimension mismatch: r = {cm.r} vs {v.r}")
    return residue_infinity((cm * v.as_laurent()).trace())


def differential(f: CoordinateFunction, at: PhasePoint) -> CotangentElement:
    """The differential df as a dual element: <df, dphi> = directional derivative.

    coefficient(i, j, k) maps to E_ji lam**(-k-1); evaluation(i, j, lam0) maps
    to E_ji * sum_{k=0..n} lam0**k lam**(-k-1) (truncated Cauchy kernel).
    """
    f.validate_for(at.r, at.n)
    e = unit_matrix(at.r, f.j, f.i)
    if f.kind == "coefficient":
        return CotangentElement(LaurentMat.monomial(-f.k - 1, e), at.n)
    coeffs = np.array([(f.lam0 ** k) * e for k in range(at.n, -1, -1)])
    return CotangentElement(LaurentMat(-at.n - 1, coeffs, r=at.r), at.n)


def split(x: LaurentMat) -> tuple[MatPoly, LaurentMat]:
    """Split into (plus, minus): exponents >= 0 and < 0, with x = plus + minus."""
    plus = x.truncate(0, max(x.hi, 0))
    minus = x.truncate(min(x.lo, -1), -1)
    if plus.is_zero():
        return MatPoly.zero(x.r), minus
    pad = np.zeros((plus.hi + 1, x.r, x.r), dtype=np.complex128)
    pad[plus.lo :] = plus.coeffs
    return MatPoly(pad, r=x.r), minus


def r_apply(x: LaurentMat) -> LaurentMat:
    """R = P_+ - P_- applied to a matrix Laurent polynomial."""
    plus, minus = split(x)
    return plus.as_laurent() - minus


# ---------------------------------------------------------------------------
# the Poisson tensor and the three bracket forms
# ---------------------------------------------------------------------------

def poisson_tensor_apply(c, at: PhasePoint, pencil: BracketPencil,
                         tol: float = DEFAULT_TOL) -> MatPoly:
    """Apply the pencil Poisson tensor Lambda_{a,b} to a cotangent element.

    Cocycle-splitting form:

        Lambda(c) = a P_+([phi, c]) + (b/2)(phi P_+([phi, c]) + P_+([phi, c]) phi)
                    - [phi, P_+(a c + (b/2)(phi c + c phi))]

    The complementary P_- form is evaluated as an internal cross-check, and
    the result is verified to be a polynomial of degree <= n before the
    (identically vanishing) tails are trimmed.
    """
    cm = c.mat if isinstance(c, CotangentElement) else c
    if cm.r != at.r:
        raise PhaseSpaceError(f"dimension mismatch: r = {cm.r} vs {at.r}")
    pencil.validate_for(at.n)
    a, b = pencil.a, pencil.b_factor()
    phi = at.phi.as_laurent()

    x = phi.commutator(cm)
    xp, xm = split(x)
    s = cm * a + (phi * cm + cm * phi) * b * 0.5
    sp, sm = split(s)

    out_plus = xp * a + (at.phi * xp + xp * at.phi) * b * 0.5 - phi.commutator(sp.as_laurent())
    out_minus = (-(xm * a)) - (phi * xm + xm * phi) * b * 0.5 + phi.commutator(sm)

    scale = max(at.phi.scale(), 1.0) * max(cm.scale(), 1.0) * max(a.scale() + _b_scale(b), 1.0)
    diff = out_plus - out_minus
    if diff.scale() > 1e-8 * scale:
        raise PhaseSpaceError("Poisson tensor cross-check failed: P_+ and P_- forms disagree")

    tail = out_plus.truncate(at.n + 1, max(out_plus.hi, at.n + 1))
    low = out_plus.truncate(min(out_plus.lo, -1), -1)
    if tail.scale() > 1e-8 * scale or low.scale() > 1e-8 * scale:
        raise PhaseSpaceError("Poisson tensor image is not a degree <= n polynomial")
    body = out_plus.truncate(0, at.n)
    if body.is_zero():
        return MatPoly.zero(at.r)
    pad = np.zeros((body.hi + 1, at.r, at.r), dtype=np.complex128)
    pad[body.lo :] = body.coeffs
    return MatPoly(pad, r=at.r)


def _b_scale(b) -> float:
    return b.scale() if isinstance(b, Poly) else abs(b)


def bracket(f: CoordinateFunction, g: CoordinateFunction, at: PhasePoint,
            pencil: BracketPencil) -> complex:
    """{f, g}(phi) = <df, Lambda_{a,b}(dg)> -- the master bracket."""
    df = differential(f, at)
    dg = differential(g, at)
    return pairing(df, poisson_tensor_apply(dg, at, pencil))


def bracket_cotangent(df, dg, at: PhasePoint, pencil: BracketPencil) -> complex:
    """Bracket of two functions given directly by their differentials."""
    return pairing(df, poisson_tensor_apply(dg, at, pencil))


def bracket_r_form(f: CoordinateFunction, g: CoordinateFunction, at: PhasePoint,
                   pencil: BracketPencil) -> complex:
    """{f, g}(phi) computed entirely by Laurent algebra in the R-form:

        (1/2) <phi, [R(a df), dg] + [df, R(a dg)]>
        - (b/2) (<R(Df), Dg> + <D'f, R(D'g)>)

    with Df = phi df and D'f = df phi.  Requires constant b.
    """
    if pencil.b_poly is not None:
        raise PhaseSpaceError("bracket_r_form requires constant b")
    pencil.validate_for(at.n)
    a, b = pencil.a, pencil.b
    df = differential(f, at).mat
    dg = differential(g, at).mat
    phi = at.phi.as_laurent()

    comm = r_apply(df * a).commutator(dg) + df.commutator(r_apply(dg * a))
    term_a = 0.5 * residue_infinity((phi * comm).trace())

    term_b = 0.0 + 0.0j
    if b != 0.0:
        dfl, dfr = phi * df, df * phi
        dgl, dgr = phi * dg, dg * phi
        term_b = -0.5 * b * (
            residue_infinity((r_apply(dfl) * dgl).trace())
            + residue_infinity((dfr * r_apply(dgr)).trace())
        )
    return complex(term_a + term_b)


def permutation_operator(r: int) -> np.ndarray:
    """Pi on C^r (x) C^r: Pi (x (x) y) = y (x) x."""
    pi = np.zeros((r * r, r * r), dtype=np.complex128)
    for i in range(r):
        for k in range(r):
            pi[i * r + k, k * r + i] = 1.0
    return pi


def bracket_tensor_form(i: int, j: int, lam0: complex, k: int, l: int, mu0: complex,
                        at: PhasePoint, pencil: BracketPencil,
                        tol: float = 1e-9) -> complex:
    """{phi_ij(lam0), phi_kl(mu0)} via the rational r-matrix (indices 0-based).

    Computes the (i*r+k, j*r+l) component of

        [Pi / (mu0 - lam0),
         phi(lam0) (x) (a(mu0) I + (b/2) phi(mu0))
         + (a(lam0) I + (b/2) phi(lam0)) (x) phi(mu0)]

    which agrees with the master bracket on evaluation coordinates.  The
    coincident-point limit is not implemented: use bracket_r_form instead.
    """
    if pencil.b_poly is not None:
        raise PhaseSpaceError("bracket_tensor_form requires constant b")
    pencil.validate_for(at.n)
    scale = max(abs(lam0), abs(mu0), 1.0)
    if abs(lam0 - mu0) < tol * scale:
        raise PhaseSpaceError("coincident evaluation points; use bracket_r_form")
    r = at.r
    for idx in (i, j, k, l):
        if not 0 <= idx < r:
            raise PhaseSpaceError(f"matrix index {idx} out of range for r = {r}")
    a, b = pencil.a, pencil.b
    x = at.phi(lam0)
    y = at.phi(mu0)
    eye = np.eye(r, dtype=np.complex128)
    rmat = permutation_operator(r) / (mu0 - lam0)
    t = np.kron(x, a(mu0) * eye + 0.5 * b * y) + np.kron(a(lam0) * eye + 0.5 * b * x, y)
    m = rmat @ t - t @ rmat
    return complex(m[i * r + k, j * r + l])


# ---------------------------------------------------------------------------
# Jacobi identity by finite differences
# ---------------------------------------------------------------------------

def _differential_of(func, at: PhasePoint, h: float) -> CotangentElement:
    """Central-difference differential of a scalar function of phi."""
    grad = np.zeros((at.n + 1, at.r, at.r), dtype=np.complex128)
    for k in range(at.n + 1):
        for i in range(at.r):
            for j in range(at.r):
                up = func(at.perturbed(i, j, k, h))
                dn = func(at.perturbed(i, j, k, -h))
                grad[k, j, i] = (up - dn) / (2.0 * h)
    return CotangentElement.from_gradient(grad, at.n)


def jacobi_check(at: PhasePoint, pencil: BracketPencil,
                 triples: Sequence[tuple[CoordinateFunction, CoordinateFunction, CoordinateFunction]],
                 h: float = 1e-5) -> float:
    """Max |{f,{g,k}} + {g,{k,f}} + {k,{f,g}}| over the given triples.

    The outer brackets differentiate the inner bracket's phi-dependence by
    central finite differences with step ``h``; for pencils in the legal
    family the defect decays as O(h^2).
    """
    worst = 0.0
    for (f, g, kfun) in triples:
        total = 0.0 + 0.0j
        for (u, v, w) in ((f, g, kfun), (g, kfun, f), (kfun, f, g)):
            inner = lambda point, _v=v, _w=w: bracket(_v, _w, point, pencil)
            d_inner = _differential_of(inner, at, h)
            du = differential(u, at)
            total += pairing(du, poisson_tensor_apply(d_inner, at, pencil))
        worst = max(worst, abs(total))
    return worst
