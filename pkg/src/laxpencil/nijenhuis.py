"""Multi-Hamiltonian diagnostics in divisor coordinates.

In divisor coordinates every member of the Poisson pencil is block diagonal,
``Lambda = sum_mu f(lam_mu, z_mu) d/dlam_mu ^ d/dz_mu`` with
``f(lam, z) = a(lam) + b z``.  The recursion operator of a pair of members is
therefore block scalar, its eigenvalues are the pointwise ratios
``f1(p_mu) / f2(p_mu)`` with multiplicity two, and the coordinate
differentials are its eigenvectors.  This module realizes those statements as
matrices on the 2g-dimensional coordinate space (ordering
``dlam_1, dz_1, dlam_2, dz_2, ...``) and checks them against brackets
measured through the matrix-level Poisson tensor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phasespace import BracketPencil, PhasePoint
from .sov import (
    DivisorCoordinates,
    DivisorDifferentials,
    SectionChoice,
    SovError,
    divisor_differentials,
    measured_bracket_matrices,
)

RHO_SEPARATION_TOL = 1e-8


class NijenhuisError(ValueError):
    """Degenerate second structure or failed lemma hypothesis."""


@dataclass(frozen=True)
class CoordinatePencilTensor:
    """One pencil member in divisor coordinates: f(p_mu) = a(lam_mu) + b z_mu per point.

    Represents ``sum_mu f(p_mu) d/dlam_mu ^ d/dz_mu`` as a block-diagonal
    2g x 2g matrix in the interleaved basis (lam_1, z_1, lam_2, z_2, ...).
    """

    points: DivisorCoordinates
    f_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f_values", np.asarray(self.f_values, dtype=np.complex128))
        if len(self.f_values) != len(self.points):
            raise NijenhuisError("f_values length must match the number of divisor points")

    @classmethod
    def from_pencil(cls, points: DivisorCoordinates, pencil: BracketPencil
                    ) -> "CoordinatePencilTensor":
        if pencil.b_poly is not None:
            raise NijenhuisError("coordinate tensors require constant b")
        f = pencil.a.eval_many(points.lams) + pencil.b * points.zs
        return cls(points, f)

    @property
    def g(self) -> int:
        return len(self.points)

    def matrix(self) -> np.ndarray:
        """The 2g x 2g Poisson matrix: antisymmetric 2x2 blocks [[0, f], [-f, 0]]."""
        m = np.zeros((2 * self.g, 2 * self.g), dtype=np.complex128)
        for mu, f in enumerate(self.f_values):
            m[2 * mu, 2 * mu + 1] = f
            m[2 * mu + 1, 2 * mu] = -f
        return m


def recursion_matrix(t1: CoordinatePencilTensor, t2: CoordinatePencilTensor) -> np.ndarray:
    """N = Lambda2^{-1} Lambda1 on covectors: block diagonal with blocks rho_mu I_2.

    The eigenvalue of the mu-th block is rho_mu = f1(p_mu) / f2(p_mu); both
    dlam_mu and dz_mu are eigenvectors.
    """
    if t1.g != t2.g or not np.allclose(t1.points.lams, t2.points.lams):
        raise NijenhuisError("tensors must share the same divisor points")
    for mu, f2 in enumerate(t2.f_values):
        if abs(f2) < RHO_SEPARATION_TOL * max(1.0, float(np.max(np.abs(t2.f_values)))):
            raise NijenhuisError(f"second structure degenerate at point {mu}")
    rho = t1.f_values / t2.f_values
    return np.kron(np.diag(rho), np.eye(2, dtype=np.complex128))


def eigenvalues(t1: CoordinatePencilTensor, t2: CoordinatePencilTensor) -> np.ndarray:
    """The per-point recursion eigenvalues rho_mu = f1(p_mu) / f2(p_mu)."""
    recursion_matrix(t1, t2)  # degeneracy guard
    return t1.f_values / t2.f_values


def orthogonality_defect(t1: CoordinatePencilTensor, t2: CoordinatePencilTensor,
                         i: int, j: int) -> float:
    """max(|<w_i, Lambda1 w_j>|, |<w_i, Lambda2 w_j>|) for canonical eigenforms.

    Index convention: the canonical eigenforms are ordered
    (dlam_1, dz_1, dlam_2, dz_2, ...); the recursion eigenvalue of index p is
    rho_{p // 2}.  Requires distinct eigenvalues (the orthogonality statement
    fails inside a block, where the pairing equals f(p_mu) itself).
    """
    rho = eigenvalues(t1, t2)
    if not (0 <= i < 2 * t1.g and 0 <= j < 2 * t1.g):
        raise NijenhuisError("eigenform index out of range")
    scale = max(1.0, float(np.max(np.abs(rho))))
    if abs(rho[i // 2] - rho[j // 2]) < RHO_SEPARATION_TOL * scale:
        raise NijenhuisError("same eigenvalue; lemma hypothesis fails")
    m1 = t1.matrix()
    m2 = t2.matrix()
    return float(max(abs(m1[i, j]), abs(m2[i, j])))


def normal_form_check(at: PhasePoint, pencils: list[BracketPencil],
                      sec: SectionChoice | None = None, h: float = 1e-6,
                      diffs: DivisorDifferentials | None = None) -> float:
    """Max deviation of the measured brackets from the simultaneous normal form.

    For every pencil in the family the measured coordinate brackets must be
    block diagonal with skew 2x2 blocks, the diagonal bracket {lam_mu, z_mu}
    must equal a_k(lam_mu) + b_k z_mu, and the recursion ratios measured
    between any two pencils must match the closed-form ratios pointwise.
    """
    if len(pencils) < 2:
        raise NijenhuisError("need at least two pencils for the normal-form check")
    if diffs is None:
        diffs = divisor_differentials(at, sec, h=h)
    g = len(diffs.divisor)
    measured = measured_bracket_matrices(diffs, at, pencils)
    tensors = [CoordinatePencilTensor.from_pencil(diffs.divisor, p) for p in pencils]

    worst = 0.0
    diag_vals = []
    for m, t in zip(measured, tensors):
        bll, blz, bzz = m[:g, :g], m[:g, g:], m[g:, g:]
        worst = max(worst, float(np.max(np.abs(bll))), float(np.max(np.abs(bzz))))
        off = blz - np.diag(np.diag(blz))
        if g > 1:
            worst = max(worst, float(np.max(np.abs(off))))
        worst = max(worst, float(np.max(np.abs(np.diag(blz) - t.f_values))))
        # antisymmetry of the measured 2x2 blocks
        worst = max(worst, float(np.max(np.abs(np.diag(m[g:, :g]) + np.diag(blz)))))
        diag_vals.append(np.diag(blz))

    ref = diag_vals[0]
    ref_closed = tensors[0].f_values
    for vals, t in zip(diag_vals[1:], tensors[1:]):
        ok = np.abs(ref_closed) > RHO_SEPARATION_TOL
        measured_rho = np.where(ok, vals / np.where(ok, ref, 1.0), 0.0)
        closed_rho = np.where(ok, t.f_values / np.where(ok, ref_closed, 1.0), 0.0)
        worst = max(worst, float(np.max(np.abs(measured_rho - closed_rho))))
    return worst
