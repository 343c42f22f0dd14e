import numpy as np
import pytest

from laxpencil.algebra import LaurentPoly, MatPoly, Poly
from laxpencil.phasespace import (
    BracketPencil,
    CoordinateFunction,
    PhasePoint,
    PhaseSpaceError,
    coordinate_functions,
    differential,
    pairing,
    spanning_pencils,
)
from laxpencil.spectral import (
    InvariantBasis,
    adjugate_z_coefficients,
    casimir_defect,
    casimir_sweep_reconstruction,
    casimir_values,
    char_curve,
    commutation_table,
    curve_differentials,
    genus,
    spectral_invariant,
)

from conftest import poly_coeffs_padded, random_phase_point


def _cofactor_det(m):
    """3x3 determinant by explicit cofactor expansion (independent oracle)."""
    return (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))


# ---------------------------------------------------------------------------
# genus
# ---------------------------------------------------------------------------

def test_genus_values():
    assert genus(2, 4) == 1
    assert genus(2, 5) == 2
    assert genus(3, 3) == 1


def test_genus_degenerate_values_returned_verbatim():
    assert genus(2, 1) == -2
    assert genus(1, 5) == 0


# ---------------------------------------------------------------------------
# characteristic curve
# ---------------------------------------------------------------------------

def test_curve_for_scalar_case(rng):
    at = random_phase_point(rng, 1, 2)
    curve = char_curve(at)
    # P(lam, z) = phi(lam) - z
    assert np.allclose(curve.z_coeffs[1].coeffs, [-1.0])
    entry = at.phi.entry(0, 0)
    assert np.allclose(poly_coeffs_padded(curve.z_coeffs[0], 3),
                       poly_coeffs_padded(entry, 3))


def test_curve_for_diagonal_matrix(rng):
    p = Poly(rng.standard_normal(3))
    q = Poly(rng.standard_normal(3))
    coeffs = np.zeros((3, 2, 2), dtype=np.complex128)
    coeffs[: len(p.coeffs), 0, 0] = p.coeffs
    coeffs[: len(q.coeffs), 1, 1] = q.coeffs
    at = PhasePoint(MatPoly(coeffs, r=2), 2)
    curve = char_curve(at)
    # (p - z)(q - z) = pq - (p + q) z + z^2
    lam = 0.7 - 0.3j
    assert curve.evaluate(lam, 0.2) == pytest.approx((p(lam) - 0.2) * (q(lam) - 0.2))


def test_curve_matches_cofactor_determinant(rng):
    at = random_phase_point(rng, 3, 2)
    curve = char_curve(at)
    for _ in range(20):
        lam = complex(*rng.standard_normal(2))
        z = complex(*rng.standard_normal(2))
        direct = _cofactor_det(at.phi(lam) - z * np.eye(3))
        assert abs(curve.evaluate(lam, z) - direct) < 1e-9 * max(1.0, abs(direct))


def test_curve_leading_coefficient_and_degree_profile(rng):
    at = random_phase_point(rng, 3, 3)
    curve = char_curve(at)
    assert np.allclose(curve.z_coeffs[3].coeffs, [(-1.0) ** 3])
    for j in range(4):
        assert curve.z_coeffs[j].degree <= (3 - j) * 3


def test_curve_invariant_under_conjugation(rng):
    at = random_phase_point(rng, 3, 2)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    gi = np.linalg.inv(g)
    conj = PhasePoint(MatPoly(np.array([g @ c @ gi for c in at.phi.coeffs]), r=3), 2)
    c1, c2 = char_curve(at), char_curve(conj)
    scale = max(c1.scale(), 1.0)
    for p, q in zip(c1.z_coeffs, c2.z_coeffs):
        size = max(len(p.coeffs), len(q.coeffs), 1)
        assert np.max(np.abs(poly_coeffs_padded(p, size) - poly_coeffs_padded(q, size))) \
            < 1e-9 * scale


# ---------------------------------------------------------------------------
# residue invariants
# ---------------------------------------------------------------------------

def test_spectral_invariant_trace_constant():
    a0 = np.array([[2.0, 1.0], [0.0, 3.0]])
    at = PhasePoint(MatPoly.constant(a0), 0)
    assert spectral_invariant(LaurentPoly.monomial(-1), 1, at) == pytest.approx(5.0)
    assert spectral_invariant(LaurentPoly.monomial(-2), 1, at) == 0.0


def test_spectral_invariant_matches_expansion(rng):
    at = random_phase_point(rng, 2, 2)
    omega = LaurentPoly(-3, rng.standard_normal(3))
    sq = (at.phi * at.phi).trace()
    expect = 0.0 + 0.0j
    for k, c in enumerate(sq.coeffs):
        expect += omega.coefficient(-k - 1) * c
    assert spectral_invariant(omega, 2, at) == pytest.approx(expect)


# ---------------------------------------------------------------------------
# adjugate differentials
# ---------------------------------------------------------------------------

def test_adjugate_identity(rng):
    at = random_phase_point(rng, 3, 2)
    adj = adjugate_z_coefficients(at)
    curve = char_curve(at)
    lam, z = 0.4 - 0.9j, 1.2 + 0.3j
    total = sum(adj[j](lam) * z ** j for j in range(3))
    m = at.phi(lam) - z * np.eye(3)
    assert np.max(np.abs(total @ m - curve.evaluate(lam, z) * np.eye(3))) < 1e-10


def test_curve_differentials_match_finite_differences(rng):
    at = random_phase_point(rng, 2, 3)
    diffs = curve_differentials(at)
    h = 1e-6
    for label in ((0, 2), (1, 1), (0, 5)):
        d = diffs[label]
        for (i, j, k) in ((0, 1, 0), (1, 1, 2)):
            up = char_curve(at.perturbed(i, j, k, h)).coeff(*label)
            dn = char_curve(at.perturbed(i, j, k, -h)).coeff(*label)
            fd = (up - dn) / (2.0 * h)
            coeffs = np.zeros((k + 1, 2, 2), dtype=np.complex128)
            coeffs[k, i, j] = 1.0
            assert abs(pairing(d, MatPoly(coeffs, r=2)) - fd) < 1e-7


# ---------------------------------------------------------------------------
# involution and Casimirs
# ---------------------------------------------------------------------------

def test_commutation_scalar_case(rng):
    at = random_phase_point(rng, 1, 3)
    assert commutation_table(at, spanning_pencils()[0]) == 0.0


def test_commutation_of_curve_coefficients(rng):
    at = random_phase_point(rng, 2, 3)
    assert commutation_table(at, BracketPencil(Poly([1.0]), 0.0)) < 1e-8
    assert commutation_table(at, BracketPencil(Poly([1.0, 0.0, 1.0]), 1.0)) < 1e-8


def test_casimir_defect_at_pencil_zero(rng):
    at = random_phase_point(rng, 2, 2)
    pencil = BracketPencil(Poly([-1.0, 1.0]), 0.0)  # a = lam - 1
    assert casimir_defect(1.0, at, pencil) < 1e-8


def test_casimir_defect_scalar_case(rng):
    at = random_phase_point(rng, 1, 2)
    pencil = BracketPencil(Poly([-0.5, 1.0]), 0.0)
    assert casimir_defect(0.5, at, pencil) < 1e-14


def test_trace_at_zero_is_casimir(rng):
    # tr phi(c0) = -(coefficient of z^(r-1)); covered by the j = r-1 candidate
    at = random_phase_point(rng, 2, 2)
    pencil = BracketPencil(Poly([-1.0, 1.0]), 0.0)
    from laxpencil.spectral import casimir_differentials
    from laxpencil.phasespace import poisson_tensor_apply

    dtr = casimir_differentials(at, 1.0)[1]
    image = poisson_tensor_apply(dtr, at, pencil)
    worst = max(abs(pairing(differential(f, at), image))
                for f in coordinate_functions(2, 2))
    assert worst < 1e-8


def test_casimir_requires_zero_of_pencil(rng):
    at = random_phase_point(rng, 2, 2)
    pencil = BracketPencil(Poly([-1.0, 1.0]), 0.0)
    with pytest.raises(PhaseSpaceError, match="not a zero"):
        casimir_defect(2.0, at, pencil)


def test_casimir_requires_b_zero(rng):
    at = random_phase_point(rng, 2, 2)
    pencil = BracketPencil(Poly([-1.0, 1.0]), 1.0)
    with pytest.raises(PhaseSpaceError, match="b = 0"):
        casimir_defect(1.0, at, pencil)


def test_casimir_values_match_curve(rng):
    at = random_phase_point(rng, 2, 3)
    curve = char_curve(at)
    c0 = 0.7 - 0.2j
    vals = casimir_values(at, c0)
    for j in range(3):
        assert vals[j] == pytest.approx(
            sum(curve.coeff(j, k) * c0 ** k for k in range((2 - j) * 3 + 1)), abs=1e-9)


def test_casimir_sweep_reconstructs_curve(rng):
    at = random_phase_point(rng, 2, 3)
    assert casimir_sweep_reconstruction(at) < 1e-8
    at3 = random_phase_point(rng, 3, 2)
    assert casimir_sweep_reconstruction(at3) < 1e-8
