"""The Neumann oscillator: motion on the unit sphere in a quadratic potential.

The state is (x, y, alpha) with sum x_i**2 = 1, sum x_i y_i = 0 and distinct
potential coefficients alpha_i.  The model embeds into the matrix-polynomial
phase space as a 2 x 2 point of degree n = len(alpha):

    phi(lam) = a(lam) [[0, -1], [0, 0]]
             + [[-G(lam), -Y(lam)], [X(lam), G(lam)]],

    a = prod (lam - alpha_i),   a_i = prod_{j != i} (lam - alpha_j),
    X = sum x_i**2 a_i,  Y = sum y_i**2 a_i,  G = sum x_i y_i a_i.

Normalization note: the leading block is -a(lam) E_12, not -a(lam)/2 E_12.
Matching the lam**n coefficient of d(phi)/dt = [B, phi] forces the leading
coefficient to be -(sum x_i**2) E_12 for any linear-in-(x, y) equations of
motion, so the -1/2 variant admits no Lax partner on the unit sphere; with
-1 the classical flow

    dx_i/dt = y_i,   dy_i/dt = -alpha_i x_i + (sum alpha_j x_j**2 - sum y_j**2) x_i

is Lax with B = [[0, lam - c], [-1, 0]], c = sum alpha x**2 - sum y**2, and
both residue Hamiltonians below are conserved.  All constraint, energy,
isospectrality and separation checks in the test suite pin this choice.

Residue Hamiltonians: ``hamiltonian`` returns the lam**-1 coefficient of
lam**2 det(phi)/a**2 (computed by polynomial division); the companion reading
with a single power of lam equals exactly twice the classical energy
(1/2) sum y**2 + (1/2) sum alpha x**2 and is exposed for tests as
``residue_energy``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraError, MatPoly, Poly
from .phasespace import PhasePoint
from .sov import DivisorCoordinates, SovError
from .spectral import char_curve

CONSTRAINT_TOL = 1e-9


class NeumannError(ValueError):
    """Invalid state: constraint violation or repeated potential coefficients."""


@dataclass(frozen=True)
class NeumannState:
    """Position x on the unit sphere, momentum y with x . y = 0, potential alpha."""

    x: np.ndarray
    y: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        alpha = np.asarray(self.alpha, dtype=float)
        for name, arr in (("x", x), ("y", y), ("alpha", alpha)):
            object.__setattr__(self, name, arr)
        if not (len(x) == len(y) == len(alpha)):
            raise NeumannError("x, y, alpha must have equal length")
        if len(x) < 2:
            raise NeumannError("need at least two degrees of freedom")
        if abs(np.dot(x, x) - 1.0) > CONSTRAINT_TOL:
            raise NeumannError(f"x is not on the unit sphere: |x|^2 = {np.dot(x, x)}")
        if abs(np.dot(x, y)) > CONSTRAINT_TOL:
            raise NeumannError(f"x . y = {np.dot(x, y)} is not zero")
        diffs = np.abs(alpha[:, None] - alpha[None, :]) + np.eye(len(alpha))
        if np.min(diffs) < 1e-12:
            raise NeumannError("potential coefficients alpha must be pairwise distinct")

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def random(cls, alpha, rng: np.random.Generator, momentum_scale: float = 1.0
               ) -> "NeumannState":
        """A random constraint-satisfying state for the given potential."""
        alpha = np.asarray(alpha, dtype=float)
        x = rng.standard_normal(len(alpha))
        x = x / np.linalg.norm(x)
        y = momentum_scale * rng.standard_normal(len(alpha))
        y = y - np.dot(x, y) * x
        return cls(x, y, alpha)


def _potential_polys(alpha: np.ndarray) -> tuple[Poly, list[Poly]]:
    a = Poly.from_roots(alpha)
    a_parts = [Poly.from_roots(np.delete(alpha, i)) for i in range(len(alpha))]
    return a, a_parts


def _weighted(parts: list[Poly], weights: np.ndarray) -> Poly:
    out = Poly.zero()
    for w, p in zip(weights, parts):
        out = out + p * complex(w)
    return out


def build_phi(s: NeumannState) -> PhasePoint:
    """The degree-n matrix polynomial of the state (r = 2, traceless)."""
    a, parts = _potential_polys(s.alpha)
    xx = _weighted(parts, s.x * s.x)
    yy = _weighted(parts, s.y * s.y)
    xy = _weighted(parts, s.x * s.y)
    n = s.n
    coeffs = np.zeros((n + 1, 2, 2), dtype=np.complex128)
    for k, c in enumerate(a.coeffs):
        coeffs[k, 0, 1] -= c
    for k, c in enumerate(xy.coeffs):
        coeffs[k, 0, 0] -= c
        coeffs[k, 1, 1] += c
    for k, c in enumerate(yy.coeffs):
        coeffs[k, 0, 1] -= c
    for k, c in enumerate(xx.coeffs):
        coeffs[k, 1, 0] += c
    return PhasePoint(MatPoly(coeffs, r=2), n)


def hamiltonian(s: NeumannState) -> float:
    """Residue Hamiltonian: the lam**-1 coefficient of lam**2 det(phi)/a**2.

    Evaluated by polynomial long division (a is monic, so the residue is the
    top remainder coefficient).  Conserved along the flow of ``eom_rhs``.
    """
    return _residue_quotient(s, power=2)


def residue_energy(s: NeumannState) -> float:
    """The companion residue with a single power of lam: equals 2 x classical energy."""
    return _residue_quotient(s, power=1)


def classical_energy(s: NeumannState) -> float:
    """(1/2) sum y**2 + (1/2) sum alpha x**2."""
    return 0.5 * float(np.dot(s.y, s.y) + np.dot(s.alpha, s.x * s.x))


def _residue_quotient(s: NeumannState, power: int) -> float:
    a, _ = _potential_polys(s.alpha)
    phi = build_phi(s).phi
    det = phi.entry(0, 0) * phi.entry(1, 1) - phi.entry(0, 1) * phi.entry(1, 0)
    numer = det * Poly.monomial(power)
    a2 = a * a
    _, rem = numer.divmod(a2)
    # a**2 is monic, so the residue at infinity is the remainder coefficient
    # one below the divisor degree
    idx = a2.degree - 1
    value = complex(rem.coeffs[idx]) if idx < len(rem.coeffs) else 0.0 + 0.0j
    if abs(value.imag) > 1e-9 * (1.0 + abs(value.real)):
        raise NeumannError("residue Hamiltonian came out non-real")
    return value.real


def lax_B(s: NeumannState, lam: complex) -> np.ndarray:
    """The Lax partner of the flow: dphi/dt = [B, phi] with

        B = [[0, lam - c], [-1, 0]],   c = sum alpha x**2 - sum y**2.

    B is traceless and its (2, 1) entry is -1 = -(sum x_i**2) on the
    constraint sphere.
    """
    c = float(np.dot(s.alpha, s.x * s.x) - np.dot(s.y, s.y))
    return np.array([[0.0, lam - c], [-1.0, 0.0]], dtype=np.complex128)


def eom_rhs(s: NeumannState) -> tuple[np.ndarray, np.ndarray]:
    """Equations of motion: dx = y, dy = -alpha x + (sum alpha x**2 - sum y**2) x.

    The multiplier makes the field tangent to both constraints exactly:
    d(sum x**2)/dt = 2 x . y = 0 and d(sum x y)/dt = 0 algebraically.
    """
    c = float(np.dot(s.alpha, s.x * s.x) - np.dot(s.y, s.y))
    return np.array(s.y), -s.alpha * s.x + c * s.x


def phi_time_derivative(s: NeumannState) -> MatPoly:
    """d(phi)/dt along eom_rhs, assembled exactly from the quadratic entries."""
    _, parts = _potential_polys(s.alpha)
    xdot, ydot = eom_rhs(s)
    dxx = _weighted(parts, 2.0 * s.x * xdot)
    dyy = _weighted(parts, 2.0 * s.y * ydot)
    dxy = _weighted(parts, xdot * s.y + s.x * ydot)
    n = s.n
    coeffs = np.zeros((n + 1, 2, 2), dtype=np.complex128)
    for k, c in enumerate(dxy.coeffs):
        coeffs[k, 0, 0] -= c
        coeffs[k, 1, 1] += c
    for k, c in enumerate(dyy.coeffs):
        coeffs[k, 0, 1] -= c
    for k, c in enumerate(dxx.coeffs):
        coeffs[k, 1, 0] += c
    return MatPoly(coeffs, r=2)


def integrate_neumann(s: NeumannState, t_final: float, step: float,
                      save_every: int = 1) -> tuple[np.ndarray, list[NeumannState]]:
    """Classical RK4 on (x, y) without projection; constraint drift is the
    accuracy meter the tests read."""
    if step <= 0:
        raise NeumannError("step must be positive")
    nsteps = max(1, int(round(t_final / step)))
    vec = np.concatenate([s.x, s.y])
    n = s.n

    def rhs(v: np.ndarray) -> np.ndarray:
        x, y = v[:n], v[n:]
        c = float(np.dot(s.alpha, x * x) - np.dot(y, y))
        return np.concatenate([y, -s.alpha * x + c * x])

    times = [0.0]
    states = [s]
    for m in range(1, nsteps + 1):
        k1 = rhs(vec)
        k2 = rhs(vec + 0.5 * step * k1)
        k3 = rhs(vec + 0.5 * step * k2)
        k4 = rhs(vec + step * k3)
        vec = vec + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if m % save_every == 0 or m == nsteps:
            times.append(m * step)
            states.append(_loose_state(vec[:n], vec[n:], s.alpha))
    return np.array(times), states


def _loose_state(x: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> NeumannState:
    """Build a state without re-validating constraints (trajectory snapshots)."""
    obj = object.__new__(NeumannState)
    object.__setattr__(obj, "x", np.asarray(x, dtype=float))
    object.__setattr__(obj, "y", np.asarray(y, dtype=float))
    object.__setattr__(obj, "alpha", np.asarray(alpha, dtype=float))
    return obj


def constraint_defects(s: NeumannState) -> tuple[float, float]:
    """(|sum x**2 - 1|, |sum x y|)."""
    return (abs(float(np.dot(s.x, s.x)) - 1.0), abs(float(np.dot(s.x, s.y))))


def separation_coordinates(s: NeumannState, collision_tol: float = 1e-7,
                           membership_tol: float = 1e-8) -> DivisorCoordinates:
    """Ellipsoidal separation coordinates: lam_mu solve sum x_i**2 a_i(lam) = 0,
    z_mu = sum x_i y_i a_i(lam_mu); the pairs lie on the spectral curve of
    build_phi(s)."""
    from .algebra import poly_roots

    _, parts = _potential_polys(s.alpha)
    xx = _weighted(parts, s.x * s.x)
    xy = _weighted(parts, s.x * s.y)
    if xx.degree < 1:
        raise SovError("separation polynomial is constant (all x_i at a single site)")
    lams = poly_roots(xx, tol=1e-11)
    if len(lams) > 1:
        diff = np.abs(lams[:, None] - lams[None, :]) + np.diag(np.full(len(lams), np.inf))
        if np.min(diff) < collision_tol * (1.0 + float(np.max(np.abs(lams)))):
            raise SovError("collided separation coordinates")
    zs = np.array([xy(l) for l in lams])
    curve = char_curve(build_phi(s))
    for lam, z in zip(lams, zs):
        defect = curve.membership_defect(lam, z)
        if defect > membership_tol:
            raise SovError(f"separation coordinate off the spectral curve: {defect:.3e}")
    div = DivisorCoordinates(lams, zs, len(lams), ())
    return div.sorted()
