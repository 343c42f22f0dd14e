"""Separation-of-variables divisor coordinates and their canonical brackets.

A distinguished section V of the trivial rank-r bundle fails to generate the
eigenline cokernel at finitely many points (lam_mu, z_mu) of the spectral
curve; those points are the divisor coordinates.  Two independent routes are
implemented:

* :func:`lambda_coordinates` / :func:`z_coordinates` -- the Krylov
  determinant route: lam_mu are the roots of
  ``det(V, phi V, ..., phi**(r-1) V)`` and z_mu follows from the bordered
  determinants P, R.
* :func:`divisor_via_adjugate` -- direct solution of
  ``adj(phi - z I) V = 0`` by resultants, used as the mutual oracle.

Sign note: with the bordered determinants P, R written with columns
``(W, V, phi V, ...)``, curve membership forces ``z = tr(phi) - R/P``; the
often-quoted prefactor ``(-1)**r`` has the opposite sign at r = 2 (the
r = 2 Neumann separation data confirms the convention used here).  The
resolved sign is validated on every call through the on-curve check.

Derivatives of the divisor coordinates with respect to phi are computed by
central finite differences with nearest-neighbour point matching, which keeps
this module's bracket measurements independent of the analytic machinery they
are used to test.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    AlgebraError,
    LaurentMat,
    MatPoly,
    Poly,
    interpolation_nodes,
    poly_from_samples,
    poly_roots,
)
from .phasespace import (
    BracketPencil,
    CotangentElement,
    PhasePoint,
    PhaseSpaceError,
    pairing,
    poisson_tensor_apply,
)
from .spectral import SpectralCurve, adjugate_z_coefficients, char_curve


class SovError(ValueError):
    """Degenerate section, collided divisor points, or failed z extraction."""


@dataclass(frozen=True)
class SectionChoice:
    """The distinguished section V and the auxiliary vector W (may be None).

    The default section is the first basis vector; W is only needed for the
    bordered-determinant z extraction and is chosen automatically when absent.
    """

    v: np.ndarray
    w: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.v, dtype=np.complex128)
        object.__setattr__(self, "v", v)
        if not np.any(v):
            raise SovError("section V must be nonzero")
        if self.w is not None:
            w = np.asarray(self.w, dtype=np.complex128)
            object.__setattr__(self, "w", w)
            if _parallel(v, w):
                raise SovError("auxiliary W must not be parallel to V")

    @classmethod
    def default(cls, r: int) -> "SectionChoice":
        v = np.zeros(r, dtype=np.complex128)
        v[0] = 1.0
        return cls(v)


def _parallel(v: np.ndarray, w: np.ndarray) -> bool:
    m = np.vstack([v, w])
    s = np.linalg.svd(m, compute_uv=False)
    return s[-1] < 1e-12 * s[0]


@dataclass(frozen=True)
class DivisorCoordinates:
    """The finite divisor points (lam_mu, z_mu) of a section on a spectral curve."""

    lams: np.ndarray
    zs: np.ndarray
    expected_count: int
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "lams", np.asarray(self.lams, dtype=np.complex128))
        object.__setattr__(self, "zs", np.asarray(self.zs, dtype=np.complex128))

    def __len__(self) -> int:
        return len(self.lams)

    @property
    def points(self) -> list[tuple[complex, complex]]:
        return [(complex(l), complex(z)) for l, z in zip(self.lams, self.zs)]

    def sorted(self) -> "DivisorCoordinates":
        order = np.lexsort((self.lams.imag, self.lams.real))
        return DivisorCoordinates(self.lams[order], self.zs[order],
                                  self.expected_count, self.warnings)


def section_determinant(at: PhasePoint, sec: SectionChoice, tol: float = 1e-9) -> Poly:
    """The polynomial det(V, phi V, ..., phi**(r-1) V) by evaluation-interpolation."""
    r, n = at.r, at.n
    if r < 2:
        raise SovError("divisor coordinates need r >= 2")
    bound = n * r * (r - 1) // 2
    nodes = interpolation_nodes(bound, 1.1) if bound > 0 else np.array([1.0 + 0.0j])
    vals = np.empty(len(nodes), dtype=np.complex128)
    hadamard = 0.0
    for idx, lam in enumerate(nodes):
        m = at.phi(lam)
        cols = np.empty((r, r), dtype=np.complex128)
        col = sec.v.copy()
        for c in range(r):
            cols[:, c] = col
            col = m @ col
        vals[idx] = np.linalg.det(cols)
        hadamard = max(hadamard, float(np.prod(np.linalg.norm(cols, axis=0))))
    if np.max(np.abs(vals)) <= tol * max(hadamard, 1e-300):
        raise SovError("degenerate section choice: determinant is identically zero")
    det = poly_from_samples(list(zip(nodes, vals)), bound, tol=tol)
    return det.trimmed(tol * max(det.scale(), 1e-300))


def lambda_coordinates(at: PhasePoint, sec: SectionChoice | None = None,
                       tol: float = 1e-9, separation_tol: float = 1e-7) -> np.ndarray:
    """Divisor lam-coordinates: roots of the section determinant.

    Roots closer than ``separation_tol`` (relative) are rejected: collided
    divisor points sit over the symmetric-product diagonal, which is out of
    scope.
    """
    sec = sec or SectionChoice.default(at.r)
    det = section_determinant(at, sec, tol=tol)
    if det.degree < 1:
        return np.array([], dtype=np.complex128)
    roots = poly_roots(det, tol=tol)
    if len(roots) > 1:
        diff = np.abs(roots[:, None] - roots[None, :]) + np.diag(np.full(len(roots), np.inf))
        scale = 1.0 + float(np.max(np.abs(roots)))
        if np.min(diff) < separation_tol * scale:
            raise SovError("collided divisor points (multiple root of the section determinant)")
    return roots


def _bordered_dets(at: PhasePoint, sec: SectionChoice, w: np.ndarray, lam: complex
                   ) -> tuple[complex, complex]:
    """P(lam), R(lam): bordered Krylov determinants with columns (W, V, phi V, ...)."""
    r = at.r
    m = at.phi(lam)
    krylov = np.empty((r, r), dtype=np.complex128)
    col = sec.v.copy()
    for c in range(r):
        krylov[:, c] = col
        col = m @ col
    # krylov[:, c] = phi**c V, final col = phi**(r-1) V
    pmat = np.column_stack([w] + [krylov[:, c] for c in range(r - 1)])
    rmat = np.column_stack([w] + [krylov[:, c] for c in range(r - 2)] + [col if False else krylov[:, r - 1]])
    return complex(np.linalg.det(pmat)), complex(np.linalg.det(rmat))


def _resolve_w(at: PhasePoint, sec: SectionChoice, lams: np.ndarray,
               rng: np.random.Generator, tol: float, retries: int = 8) -> np.ndarray:
    r = at.r
    candidates = []
    if sec.w is not None:
        candidates.append(np.asarray(sec.w, dtype=np.complex128))
    basis = np.eye(r, dtype=np.complex128)
    candidates.extend(basis[i] for i in range(r - 1, -1, -1))
    while len(candidates) < r + 1 + retries:
        candidates.append(rng.standard_normal(r) + 1j * rng.standard_normal(r))
    for w in candidates:
        if _parallel(sec.v, w):
            continue
        vals = [abs(_bordered_dets(at, sec, w, lam)[0]) for lam in lams]
        scale = float(np.linalg.norm(w) * np.linalg.norm(sec.v)) \
            * max(1.0, at.phi.scale()) ** max(r - 2, 0)
        if min(vals, default=1.0) > tol * max(scale, 1e-300):
            return w
    raise SovError("no admissible auxiliary vector W (P vanishes at a divisor point)")


def z_coordinates(lams: np.ndarray, at: PhasePoint, sec: SectionChoice | None = None,
                  curve: SpectralCurve | None = None, membership_tol: float = 1e-8,
                  seed: int = 0) -> DivisorCoordinates:
    """Pair each lam_mu with its z_mu via the bordered determinants.

    ``z_mu = tr(phi(lam_mu)) - R(lam_mu) / P(lam_mu)``; every returned pair is
    checked to satisfy the curve equation within ``membership_tol``.
    """
    sec = sec or SectionChoice.default(at.r)
    lams = np.asarray(lams, dtype=np.complex128)
    curve = curve or char_curve(at)
    rng = np.random.default_rng(seed)
    warnings: list[str] = []
    if len(lams) == 0:
        return DivisorCoordinates(lams, np.array([], dtype=np.complex128), 0, ())
    w = _resolve_w(at, sec, lams, rng, tol=1e-10)
    zs = np.empty(len(lams), dtype=np.complex128)
    tr = at.phi.trace()
    for idx, lam in enumerate(lams):
        p, rr = _bordered_dets(at, sec, w, lam)
        zs[idx] = tr(lam) - rr / p
        defect = curve.membership_defect(lam, zs[idx])
        if defect > membership_tol:
            raise SovError(
                f"z extraction failed curve membership at point {idx}: defect {defect:.3e}"
            )
    bound = at.n * at.r * (at.r - 1) // 2
    if len(lams) != bound:
        warnings.append(
            f"finite divisor count {len(lams)} below the generic bound {bound}: "
            "points at infinity are excluded"
        )
    return DivisorCoordinates(lams, zs, len(lams), tuple(warnings))


def compute_divisor(at: PhasePoint, sec: SectionChoice | None = None,
                    tol: float = 1e-9, membership_tol: float = 1e-8,
                    curve: SpectralCurve | None = None) -> DivisorCoordinates:
    """Full divisor pipeline: lam roots, z pairing, membership validation."""
    sec = sec or SectionChoice.default(at.r)
    lams = lambda_coordinates(at, sec, tol=tol)
    return z_coordinates(lams, at, sec, curve=curve, membership_tol=membership_tol).sorted()


# ---------------------------------------------------------------------------
# adjugate-kernel route (the independent oracle)
# ---------------------------------------------------------------------------

def divisor_via_adjugate(at: PhasePoint, sec: SectionChoice | None = None,
                         tol: float = 1e-8) -> DivisorCoordinates:
    """Divisor points from adj(phi(lam) - z I) V = 0, solved by resultants.

    The r component equations are bivariate polynomials; the lam locus comes
    from the resultant in z of the two largest components, and candidate z
    values are filtered by requiring all components and the curve equation to
    vanish.
    """
    sec = sec or SectionChoice.default(at.r)
    r, n = at.r, at.n
    if r < 2:
        raise SovError("divisor coordinates need r >= 2")
    adj_z = adjugate_z_coefficients(at)
    curve = char_curve(at)
    # comp[m][j]: Poly-in-lam coefficient of z**j in the m-th component
    comp: list[list[Poly]] = []
    for m in range(r):
        row = []
        for j in range(r):
            vec_poly = _matpoly_times_vector(adj_z[j], sec.v)
            row.append(vec_poly[m])
        comp.append(row)

    def zdeg(row):
        return max((j for j, p in enumerate(row) if not p.is_zero()), default=-1)

    order = sorted(range(r), key=lambda m: (zdeg(comp[m]),
                                            max(p.scale() for p in comp[m])), reverse=True)
    nonzero = [m for m in order if zdeg(comp[m]) >= 0]
    if len(nonzero) < 2:
        raise SovError("degenerate section choice: adjugate system has < 2 active components")
    m1, m2 = nonzero[0], nonzero[1]
    res = _resultant_in_z(comp[m1], comp[m2], tol=tol)
    if res.degree < 1:
        return DivisorCoordinates(np.array([]), np.array([]), 0, ())
    lam_candidates = poly_roots(res, tol=max(tol, 1e-10))

    scale_all = max(max(p.scale() for row in comp for p in row), 1e-300)
    found_l, found_z = [], []
    for lam in lam_candidates:
        g1 = Poly([p(lam) for p in comp[m1]])
        if g1.degree < 1:
            continue
        for z in poly_roots(g1, tol=1e-8):
            resid = max(abs(sum(p(lam) * z ** j for j, p in enumerate(comp[m]))) for m in range(r))
            zsc = max(1.0, abs(z)) ** (r - 1)
            if resid > 1e-7 * scale_all * zsc * max(1.0, abs(lam)) ** ((r - 1) * n):
                continue
            if curve.membership_defect(lam, z) > tol:
                continue
            if any(abs(lam - l0) < 1e-7 * (1 + abs(lam)) and abs(z - z0) < 1e-6 * (1 + abs(z))
                   for l0, z0 in zip(found_l, found_z)):
                continue
            found_l.append(complex(lam))
            found_z.append(complex(z))
    div = DivisorCoordinates(np.array(found_l), np.array(found_z), len(found_l), ())
    return div.sorted()


def _matpoly_times_vector(m: MatPoly, v: np.ndarray) -> list[Poly]:
    """Entries of M(lam) v as scalar polynomials."""
    if m.is_zero():
        return [Poly.zero() for _ in range(len(v))]
    prod = np.einsum("kij,j->ki", m.coeffs, v)
    return [Poly(prod[:, i]) for i in range(len(v))]


def _resultant_in_z(g1: list[Poly], g2: list[Poly], tol: float) -> Poly:
    """Resultant in z of two bivariate polynomials given by z-coefficient lists."""
    d1 = max(j for j, p in enumerate(g1) if not p.is_zero())
    d2 = max(j for j, p in enumerate(g2) if not p.is_zero())
    if d1 == 0 and d2 == 0:
        raise SovError("resultant needs a z-dependent component")
    deg1 = max(p.degree for p in g1 if not p.is_zero())
    deg2 = max(p.degree for p in g2 if not p.is_zero())
    bound = max(d2, 0) * max(deg1, 0) + max(d1, 0) * max(deg2, 0)
    if bound == 0:
        # resultant is a constant power; treat the z-free component as the locus
        return (g2[0] if d2 == 0 else g1[0])
    nodes = interpolation_nodes(bound, 1.15)
    vals = np.empty(len(nodes), dtype=np.complex128)
    for idx, lam in enumerate(nodes):
        a = [p(lam) for p in g1[: d1 + 1]]
        b = [p(lam) for p in g2[: d2 + 1]]
        vals[idx] = _sylvester_det(a, b)
    res = poly_from_samples(list(zip(nodes, vals)), bound, tol=1e-8)
    return res.trimmed(1e-10 * max(res.scale(), 1e-300))


def _sylvester_det(a: list[complex], b: list[complex]) -> complex:
    """Determinant of the Sylvester matrix of two scalar polynomials (ascending coeffs)."""
    d1, d2 = len(a) - 1, len(b) - 1
    if d1 == 0:
        return a[0] ** d2
    if d2 == 0:
        return b[0] ** d1
    size = d1 + d2
    syl = np.zeros((size, size), dtype=np.complex128)
    for row in range(d2):
        syl[row, row : row + d1 + 1] = a[::-1]
    for row in range(d1):
        syl[d2 + row, row : row + d2 + 1] = b[::-1]
    return complex(np.linalg.det(syl))


# ---------------------------------------------------------------------------
# divisor differentials and canonical relations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DivisorDifferentials:
    """Divisor points plus d(lam_mu), d(z_mu) as cotangent elements."""

    divisor: DivisorCoordinates
    dlams: tuple[CotangentElement, ...]
    dzs: tuple[CotangentElement, ...]


def divisor_differentials(at: PhasePoint, sec: SectionChoice | None = None,
                          h: float = 1e-6, tol: float = 1e-9) -> DivisorDifferentials:
    """Central-difference differentials of every divisor coordinate.

    Perturbed divisors are matched to the base divisor by nearest lam; two
    base points closer than 10 h raise the collision error since matching
    would be ambiguous.
    """
    sec = sec or SectionChoice.default(at.r)
    r, n = at.r, at.n
    curve = char_curve(at)
    base = compute_divisor(at, sec, tol=tol, curve=curve)
    g = len(base)
    if g == 0:
        raise SovError("empty divisor: nothing to differentiate")
    if g > 1:
        diff = np.abs(base.lams[:, None] - base.lams[None, :]) \
            + np.diag(np.full(g, np.inf))
        if np.min(diff) < 10.0 * h * (1.0 + float(np.max(np.abs(base.lams)))):
            raise SovError("divisor collision; reduce h or perturb phi")
    sec_fixed = SectionChoice(sec.v, _resolve_w(at, sec, base.lams,
                                                np.random.default_rng(0), tol=1e-10))

    grad_l = np.zeros((g, n + 1, r, r), dtype=np.complex128)
    grad_z = np.zeros((g, n + 1, r, r), dtype=np.complex128)
    for k in range(n + 1):
        for i in range(r):
            for j in range(r):
                up = compute_divisor(at.perturbed(i, j, k, h), sec_fixed, tol=tol)
                dn = compute_divisor(at.perturbed(i, j, k, -h), sec_fixed, tol=tol)
                lu, zu = _match_to(base, up)
                ld, zd = _match_to(base, dn)
                grad_l[:, k, j, i] = (lu - ld) / (2.0 * h)
                grad_z[:, k, j, i] = (zu - zd) / (2.0 * h)
    dlams = tuple(CotangentElement.from_gradient(grad_l[mu], n) for mu in range(g))
    dzs = tuple(CotangentElement.from_gradient(grad_z[mu], n) for mu in range(g))
    return DivisorDifferentials(base, dlams, dzs)


def _match_to(base: DivisorCoordinates, other: DivisorCoordinates
              ) -> tuple[np.ndarray, np.ndarray]:
    if len(other) != len(base):
        raise SovError(
            f"divisor count changed under perturbation ({len(base)} -> {len(other)})"
        )
    lams = np.empty(len(base), dtype=np.complex128)
    zs = np.empty(len(base), dtype=np.complex128)
    taken: set[int] = set()
    for mu, lam in enumerate(base.lams):
        dist = np.abs(other.lams - lam)
        for idx in np.argsort(dist):
            if int(idx) not in taken:
                taken.add(int(idx))
                lams[mu] = other.lams[idx]
                zs[mu] = other.zs[idx]
                break
    return lams, zs


def measured_bracket_matrices(diffs: DivisorDifferentials, at: PhasePoint,
                              pencils: list[BracketPencil]
                              ) -> list[np.ndarray]:
    """Measured bracket matrices of (lam_1..lam_g, z_1..z_g) for each pencil.

    Row/column order is lams first, then zs; entry (p, q) is {x_p, x_q}
    measured through the phase-space Poisson tensor acting on the
    finite-difference differentials.
    """
    covs = list(diffs.dlams) + list(diffs.dzs)
    out = []
    for pencil in pencils:
        images = [poisson_tensor_apply(c, at, pencil) for c in covs]
        m = np.empty((len(covs), len(covs)), dtype=np.complex128)
        for p, cp in enumerate(covs):
            for q in range(len(covs)):
                m[p, q] = pairing(cp, images[q])
        out.append(m)
    return out


@dataclass(frozen=True)
class CanonicalDefects:
    """Max-modulus defects of the canonical divisor-coordinate relations."""

    lam_lam: float
    lam_z_diag: float
    lam_z_off: float
    z_z: float

    def max(self) -> float:
        return max(self.lam_lam, self.lam_z_diag, self.lam_z_off, self.z_z)


def canonical_relations_defect(at: PhasePoint, pencil: BracketPencil,
                               sec: SectionChoice | None = None,
                               h: float = 1e-6) -> CanonicalDefects:
    """Defects of {lam_mu, lam_nu} = 0, {lam_mu, z_nu} = delta (a(lam_mu) + b z_mu),
    {z_mu, z_nu} = 0, measured through the matrix-level Poisson tensor."""
    diffs = divisor_differentials(at, sec, h=h)
    return canonical_relations_from(diffs, at, pencil)


def canonical_relations_from(diffs: DivisorDifferentials, at: PhasePoint,
                             pencil: BracketPencil) -> CanonicalDefects:
    (m,) = measured_bracket_matrices(diffs, at, [pencil])
    g = len(diffs.divisor)
    bll = m[:g, :g]
    blz = m[:g, g:]
    bzz = m[g:, g:]
    target = pencil.a.eval_many(diffs.divisor.lams) + pencil.b * diffs.divisor.zs
    off = np.abs(blz - np.diag(np.diag(blz)))
    return CanonicalDefects(
        lam_lam=float(np.max(np.abs(bll))),
        lam_z_diag=float(np.max(np.abs(np.diag(blz) - target))),
        lam_z_off=float(np.max(off)) if g > 1 else 0.0,
        z_z=float(np.max(np.abs(bzz))),
    )
