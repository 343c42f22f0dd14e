"""Spectral curves, their coefficient Hamiltonians, involution and Casimir checks.

The spectral curve of a phase point is the characteristic locus
``P(lam, z) = det(phi(lam) - z I) = 0``.  Its coefficient table doubles as the
ring of conserved Hamiltonians: the label (j, k) denotes the coefficient of
``z**j lam**k``.  Curve values are computed by determinant evaluation and
interpolation; differentials of the coefficients with respect to phi are
computed analytically from the adjugate identity using a Faddeev-LeVerrier
style recursion, so that the two routes cross-validate each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    AlgebraError,
    LaurentMat,
    LaurentPoly,
    MatPoly,
    Poly,
    interpolation_nodes,
    poly_from_samples,
    residue_infinity,
)
from .phasespace import (
    BracketPencil,
    CoordinateFunction,
    CotangentElement,
    PhasePoint,
    PhaseSpaceError,
    differential,
    pairing,
    poisson_tensor_apply,
)


def genus(r: int, n: int) -> int:
    """Genus value for the rational family: -r**2 + r(r-1)n/2 + 1.

    Degenerate small (r, n) give non-positive values; these are returned
    verbatim and the divisor machinery refuses such inputs on its own terms.
    """
    if r < 1 or n < 0:
        raise AlgebraError("genus requires r >= 1 and n >= 0")
    return -r * r + (r - 1) * r * n // 2 + 1


@dataclass(frozen=True)
class SpectralCurve:
    """Coefficient table of P(lam, z) = det(phi(lam) - z I).

    ``z_coeffs[j]`` is the polynomial-in-lam coefficient of ``z**j``; the
    leading coefficient is the constant ``(-1)**r`` and
    ``deg z_coeffs[j] <= (r - j) n``.
    """

    r: int
    n: int
    z_coeffs: tuple[Poly, ...]
    genus: int

    def coeff(self, j: int, k: int) -> complex:
        if not 0 <= j <= self.r:
            raise AlgebraError(f"z-power {j} out of range")
        c = self.z_coeffs[j].coeffs
        return complex(c[k]) if 0 <= k < len(c) else 0.0 + 0.0j

    def evaluate(self, lam: complex, z: complex) -> complex:
        return complex(sum(p(lam) * z ** j for j, p in enumerate(self.z_coeffs)))

    def z_poly_at(self, lam: complex) -> Poly:
        """P(lam, .) as a polynomial in z (degree exactly r by construction)."""
        return Poly([p(lam) for p in self.z_coeffs])

    def membership_defect(self, lam: complex, z: complex) -> float:
        """|P(lam, z)| relative to the largest term magnitude (cancellation aware).

        Falls back to the curve's coefficient scale when every term is tiny
        (points near the origin), so the measure stays meaningful there.
        """
        terms = [abs(p(lam)) * abs(z) ** j for j, p in enumerate(self.z_coeffs)]
        return abs(self.evaluate(lam, z)) / max(max(terms), self.scale(), 1e-300)

    def scale(self) -> float:
        return max(p.scale() for p in self.z_coeffs)

    def coefficient_table(self) -> dict[tuple[int, int], complex]:
        out = {}
        for j, p in enumerate(self.z_coeffs):
            for k, c in enumerate(p.coeffs):
                out[(j, k)] = complex(c)
        return out


@dataclass(frozen=True)
class InvariantBasis:
    """Labels (j, k) of the curve coefficients that vary with phi.

    Enumerates the coefficient of ``z**j lam**k`` for j = 0..r-1 and
    k = 0..(r-j)n; the leading ``z**r`` coefficient is the constant (-1)**r
    and is excluded.
    """

    r: int
    n: int
    labels: tuple[tuple[int, int], ...]

    @classmethod
    def full(cls, r: int, n: int) -> "InvariantBasis":
        labels = tuple((j, k) for j in range(r) for k in range((r - j) * n + 1))
        return cls(r, n, labels)


def char_curve(at: PhasePoint, tol: float = DEFAULT_TOL) -> SpectralCurve:
    """Spectral curve of a phase point by determinant evaluation-interpolation.

    The determinant's z-coefficients at each lam node come from the
    characteristic polynomial of the evaluated matrix; each is interpolated at
    r*n + 1 nodes, with the surplus samples checking the degree profile
    deg_lam(coefficient of z**j) <= (r - j) n.
    """
    r, n = at.r, at.n
    node_scale = 1.0 + 0.1 / (1.0 + at.phi.scale())
    nodes = interpolation_nodes(r * n, 1.05) if r * n > 0 else np.array([1.0 + 0.0j])
    del node_scale
    samples = np.zeros((len(nodes), r + 1), dtype=np.complex128)
    for idx, lam in enumerate(nodes):
        m = at.phi(lam)
        # char(z) = det(zI - M), monic, highest power first
        char = np.poly(m) if r > 1 else np.array([1.0, -m[0, 0]])
        # [z**j] det(M - zI) = (-1)**r * char[r - j]
        sign = (-1) ** r
        samples[idx] = sign * char[::-1]
    z_coeffs = []
    for j in range(r + 1):
        deg = (r - j) * n
        pts = list(zip(nodes, samples[:, j]))
        z_coeffs.append(poly_from_samples(pts, deg, tol=tol))
    return SpectralCurve(r, n, tuple(z_coeffs), genus(r, n))


def spectral_invariant(omega: LaurentPoly, p: int, at: PhasePoint) -> complex:
    """Residue Hamiltonian: coefficient of lam**-1 of omega * tr(phi**p)."""
    if p < 1:
        raise AlgebraError("power p must be >= 1")
    power = at.phi
    for _ in range(p - 1):
        power = power * at.phi
    return residue_infinity(omega * power.trace().as_laurent())


# ---------------------------------------------------------------------------
# adjugate machinery and coefficient differentials
# ---------------------------------------------------------------------------

def adjugate_z_coefficients(at: PhasePoint) -> list[MatPoly]:
    """Matrix polynomials A_j(lam) with adj(phi(lam) - z I) = sum_j A_j(lam) z**j.

    Uses the Faddeev-LeVerrier recursion on the matrix polynomial itself, so
    the result is exact polynomial data (no interpolation).
    """
    r = at.r
    phi = at.phi
    # FL recursion: M_1 = I, c_k = -tr(phi M_k)/k, M_{k+1} = phi M_k + c_k I
    mats = [MatPoly.identity(r)]
    cs = []
    for k in range(1, r + 1):
        prod = phi * mats[-1]
        ck = prod.trace() * (-1.0 / k)
        cs.append(ck)
        if k < r:
            mats.append(prod + ck * MatPoly.identity(r))
    # adj(zI - phi) = sum_{k=0..r-1} M_{k+1} z**(r-1-k); adj(phi - zI) = (-1)**(r-1) * that
    sign = (-1) ** (r - 1)
    out = [MatPoly.zero(r)] * r
    for k in range(r):
        out[r - 1 - k] = mats[k] * sign
    return out


def curve_coefficient_differential(at: PhasePoint, j: int, k: int,
                                   adj_z: list[MatPoly] | None = None) -> CotangentElement:
    """Differential of the curve coefficient H_{(j,k)} = [z**j lam**k] P with respect to phi.

    From d det = tr(adj . d(.)), the differential is the window of
    ``lam**(-k-1) A_j(lam)`` on the dual exponent range.
    """
    if adj_z is None:
        adj_z = adjugate_z_coefficients(at)
    if not 0 <= j < at.r:
        raise PhaseSpaceError(f"z-power {j} out of range for differentials")
    shifted = LaurentMat(adj_z[j].as_laurent().lo - k - 1, adj_z[j].coeffs, r=at.r) \
        if not adj_z[j].is_zero() else LaurentMat.zero(at.r)
    return CotangentElement(shifted.truncate(-at.n - 1, -1), at.n)


def curve_differentials(at: PhasePoint, basis: InvariantBasis | None = None
                        ) -> dict[tuple[int, int], CotangentElement]:
    """Differentials of every basis label, sharing one adjugate computation."""
    if basis is None:
        basis = InvariantBasis.full(at.r, at.n)
    adj_z = adjugate_z_coefficients(at)
    return {(j, k): curve_coefficient_differential(at, j, k, adj_z) for (j, k) in basis.labels}


# ---------------------------------------------------------------------------
# involution and Casimir checks
# ---------------------------------------------------------------------------

def commutation_table(at: PhasePoint, pencil: BracketPencil,
                      basis: InvariantBasis | None = None) -> float:
    """Max |{H_i, H_j}| over all pairs of curve coefficients (analytic claim: 0)."""
    if basis is None:
        basis = InvariantBasis.full(at.r, at.n)
    diffs = curve_differentials(at, basis)
    images = {lab: poisson_tensor_apply(d, at, pencil) for lab, d in diffs.items()}
    worst = 0.0
    labels = list(basis.labels)
    for ia, la in enumerate(labels):
        for lb in labels[ia + 1 :]:
            worst = max(worst, abs(pairing(diffs[la], images[lb])))
    return worst


def casimir_values(at: PhasePoint, c0: complex) -> np.ndarray:
    """The z-coefficients of det(phi(c0) - z I), ascending in z (length r + 1)."""
    m = at.phi(c0)
    char = np.poly(m) if at.r > 1 else np.array([1.0, -m[0, 0]])
    return ((-1) ** at.r) * char[::-1]


def casimir_differentials(at: PhasePoint, c0: complex) -> list[CotangentElement]:
    """Differentials of the z-coefficients of det(phi(c0) - z I), j = 0..r-1."""
    adj_z = adjugate_z_coefficients(at)
    out = []
    for j in range(at.r):
        aj = adj_z[j](c0)
        coeffs = np.array([(c0 ** k) * aj for k in range(at.n, -1, -1)])
        out.append(CotangentElement(LaurentMat(-at.n - 1, coeffs, r=at.r), at.n))
    return out


def casimir_defect(c0: complex, at: PhasePoint, pencil: BracketPencil,
                   probes: list[CoordinateFunction] | None = None,
                   tol: float = 1e-8) -> float:
    """Max |{C_j, probe}| for the Casimir candidates at a zero c0 of the pencil.

    Requires a(c0) = 0 (within tol, relative to the coefficient scale) and
    b = 0; the candidates are the z-coefficients of det(phi(c0) - z I).
    """
    if pencil.b_poly is not None or pencil.b != 0.0:
        raise PhaseSpaceError("casimir_defect requires a b = 0 pencil")
    ascale = max(pencil.a.scale(), 1.0) * max(1.0, abs(c0)) ** max(pencil.a.degree, 0)
    if abs(pencil.a(c0)) > tol * ascale:
        raise PhaseSpaceError("c0 is not a zero of the pencil polynomial")
    if probes is None:
        probes = list(_default_probes(at))
    dcs = casimir_differentials(at, c0)
    worst = 0.0
    for dc in dcs:
        image = poisson_tensor_apply(dc, at, pencil)
        for probe in probes:
            worst = max(worst, abs(pairing(differential(probe, at), image)))
    return worst


def _default_probes(at: PhasePoint):
    from .phasespace import coordinate_functions

    return coordinate_functions(at.r, at.n)


def casimir_sweep_reconstruction(at: PhasePoint, sweep: np.ndarray | None = None,
                                 tol: float = DEFAULT_TOL) -> float:
    """Reconstruct the full curve table from Casimir values at n*r + 1 sweep points.

    Interpolates each z-coefficient of det(phi(c) - z I) from its values at the
    sweep points and returns the worst relative deviation from the directly
    computed coefficient table.  The analytic claim is that fixing the Casimirs
    over the sweep fixes the whole curve.
    """
    curve = char_curve(at)
    r, n = at.r, at.n
    if sweep is None:
        sweep = interpolation_nodes(n * r, 1.1)
    if len(sweep) < n * r + 1:
        raise AlgebraError(f"sweep needs at least {n * r + 1} points")
    vals = np.array([casimir_values(at, c) for c in sweep])
    worst = 0.0
    scale = max(curve.scale(), 1.0)
    for j in range(r + 1):
        deg = (r - j) * n
        rec = poly_from_samples(list(zip(sweep, vals[:, j])), deg, tol=tol)
        want = curve.z_coeffs[j]
        m = max(len(rec.coeffs), len(want.coeffs))
        pad_rec = np.zeros(m, dtype=np.complex128)
        pad_want = np.zeros(m, dtype=np.complex128)
        pad_rec[: len(rec.coeffs)] = rec.coeffs
        pad_want[: len(want.coeffs)] = want.coeffs
        worst = max(worst, float(np.max(np.abs(pad_rec - pad_want))) / scale)
    return worst
