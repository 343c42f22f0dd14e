import numpy as np
import pytest

from laxpencil.algebra import MatPoly, Poly
from laxpencil.flows import (
    FlowsError,
    branch_points,
    branch_track,
    curve_point_at,
    divisor_trajectory,
    hamiltonian_vector_field,
    integrate,
    isospectral_drift,
    linear_fit_residual,
    linearizing_coordinates,
    linearizing_increment,
    linearizing_trajectory,
)
from laxpencil.flows import _track_along
from laxpencil.phasespace import (
    BracketPencil,
    CoordinateFunction,
    PhasePoint,
    bracket_r_form,
    differential,
    pairing,
)
from laxpencil.spectral import InvariantBasis, SpectralCurve, char_curve
from laxpencil.spectral import casimir_differentials
from laxpencil.phasespace import poisson_tensor_apply

from conftest import random_phase_point

A1 = BracketPencil(Poly([1.0]), 0.0)
ALAM = BracketPencil(Poly([0.0, 1.0]), 0.0)


def _field_matpoly(label, at, pencil):
    vec = hamiltonian_vector_field(label, at, pencil)
    return MatPoly(vec.reshape(at.n + 1, at.r, at.r), r=at.r)


def _sqrt_curve():
    # z**2 = lam, i.e. P = z**2 - lam
    return SpectralCurve(2, 1, (Poly([0.0, -1.0]), Poly(()), Poly([1.0])), genus=0)


# ---------------------------------------------------------------------------
# Hamiltonian vector fields
# ---------------------------------------------------------------------------

def test_scalar_case_field_vanishes(rng):
    at = random_phase_point(rng, 1, 2)
    assert np.max(np.abs(hamiltonian_vector_field((0, 1), at, A1))) < 1e-14


def test_trace_labels_are_casimirs_of_b_zero_pencils(rng):
    # scalar-matrix differentials commute with phi, so every a-pencil kills
    # them; the quadratic (b) part does not, and its Casimirs are different
    at = random_phase_point(rng, 2, 3)
    for pencil in (A1, ALAM):
        assert np.max(np.abs(hamiltonian_vector_field((1, 2), at, pencil))) < 1e-12
    assert np.max(np.abs(hamiltonian_vector_field(
        (1, 2), at, BracketPencil(Poly(()), 1.0)))) > 1e-3


def test_casimir_combination_has_zero_field(rng):
    at = random_phase_point(rng, 2, 3)
    c0 = 0.4 - 0.2j
    pencil = BracketPencil(Poly([-c0, 1.0]), 0.0)
    for dc in casimir_differentials(at, c0):
        image = poisson_tensor_apply(dc, at, pencil)
        assert image.scale() < 1e-10


def test_field_matches_bracket_oracle(rng):
    at = random_phase_point(rng, 2, 3)
    label = (0, 2)
    field = _field_matpoly(label, at, A1)
    h = 1e-6
    for _ in range(5):
        i, j, k = (int(v) for v in rng.integers(0, (2, 2, 4)))
        probe = CoordinateFunction.coefficient(i, j, k)
        direct = pairing(differential(probe, at), field)
        total = 0.0 + 0.0j
        for kk in range(4):
            for ii in range(2):
                for jj in range(2):
                    up = char_curve(at.perturbed(ii, jj, kk, h)).coeff(*label)
                    dn = char_curve(at.perturbed(ii, jj, kk, -h)).coeff(*label)
                    dh = (up - dn) / (2.0 * h)
                    total += bracket_r_form(
                        probe, CoordinateFunction.coefficient(ii, jj, kk), at, A1) * dh
        assert abs(direct - total) < 1e-7


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

def test_stationary_trajectory_for_casimir(rng):
    at = random_phase_point(rng, 2, 2)
    traj = integrate((1, 1), at, A1, t_final=0.2, step=1e-2)
    assert isospectral_drift(traj) < 1e-13
    assert np.max(np.abs(traj.states[-1].to_vector() - at.to_vector())) < 1e-13


def test_rk4_order_by_richardson(rng):
    at = random_phase_point(rng, 2, 3)
    y1 = integrate((0, 2), at, A1, 0.5, 2e-2).states[-1].to_vector()
    y2 = integrate((0, 2), at, A1, 0.5, 1e-2).states[-1].to_vector()
    y3 = integrate((0, 2), at, A1, 0.5, 5e-3).states[-1].to_vector()
    e1 = np.max(np.abs(y1 - y3))
    e2 = np.max(np.abs(y2 - y3))
    # (16 h^4 - h^4) / (h^4 - h^4/16): fourth order gives ratio 16/(15/16) = 17.07
    assert 12.0 < e1 / e2 < 24.0


def test_isospectral_drift_small(rng):
    at = random_phase_point(rng, 2, 3)
    traj = integrate((0, 1), at, A1, t_final=1.0, step=1e-3, save_every=100)
    assert isospectral_drift(traj) < 1e-10


def test_flow_commutativity(rng):
    at = random_phase_point(rng, 2, 3, scale=0.7)
    t, st = 0.4, 1e-3
    ab = integrate((0, 2), integrate((0, 1), at, A1, t, st).states[-1], A1, t, st)
    ba = integrate((0, 1), integrate((0, 2), at, A1, t, st).states[-1], A1, t, st)
    assert np.max(np.abs(ab.states[-1].to_vector() - ba.states[-1].to_vector())) < 1e-9


# ---------------------------------------------------------------------------
# branch tracking
# ---------------------------------------------------------------------------

def test_single_sheet_tracking(rng):
    at = random_phase_point(rng, 1, 2)
    curve = char_curve(at)
    entry = at.phi.entry(0, 0)
    br = branch_track(curve, 0.0, 1.0, entry(0.0), samples=30)
    assert np.max(np.abs(br.z_values - entry.eval_many(br.path))) < 1e-9


def test_sqrt_continuation():
    br = branch_track(_sqrt_curve(), 1.0, 4.0, 1.0, samples=80)
    assert br.z_values[-1] == pytest.approx(2.0)


def test_sqrt_monodromy_flips_sign():
    theta = np.linspace(0.0, 2.0 * np.pi, 400)
    zs = _track_along(_sqrt_curve(), np.exp(1j * theta), 1.0)
    assert zs[-1] == pytest.approx(-1.0)


def test_branch_point_collision_error():
    with pytest.raises(FlowsError, match="branch point"):
        branch_track(_sqrt_curve(), 1.0, -1.0, 1.0, samples=200)


def test_branch_points_of_sqrt_curve():
    bps = branch_points(_sqrt_curve())
    assert len(bps) == 1 and abs(bps[0]) < 1e-10


def test_off_curve_start_rejected():
    with pytest.raises(FlowsError, match="does not lie on the curve"):
        branch_track(_sqrt_curve(), 1.0, 4.0, 3.0)


# ---------------------------------------------------------------------------
# linearizing coordinates
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def lin_setup():
    rng = np.random.default_rng(34)
    at = PhasePoint(MatPoly(0.6 * rng.standard_normal((5, 2, 2)), r=2), 4)
    curve = char_curve(at)
    basis = InvariantBasis.full(2, 4)
    base = curve_point_at(curve, -3.0 - 2.0j)
    from laxpencil.sov import compute_divisor

    return at, curve, basis, base, compute_divisor(at)


def test_linearizing_requires_b_zero(lin_setup):
    at, curve, basis, base, div = lin_setup
    with pytest.raises(FlowsError, match="b = 0"):
        linearizing_coordinates(div, curve, BracketPencil(Poly([1.0]), 1.0), basis, base)


def test_quadrature_self_consistency(lin_setup):
    at, curve, basis, base, div = lin_setup
    q1 = linearizing_coordinates(div, curve, A1, basis, base, gauss_order=10)
    q2 = linearizing_coordinates(div, curve, A1, basis, base, gauss_order=20)
    assert np.max(np.abs(q1 - q2)) < 1e-9


def test_base_point_shift_is_divisor_independent(lin_setup):
    at, curve, basis, base, div = lin_setup
    traj = integrate((0, 0), at, A1, 0.6, 4e-3, save_every=50)
    div2 = divisor_trajectory(traj)[-1]
    base_b = curve_point_at(curve, -2.5 - 1.5j)
    d1 = linearizing_coordinates(div, curve, A1, basis, base_b) \
        - linearizing_coordinates(div, curve, A1, basis, base)
    d2 = linearizing_coordinates(div2, curve, A1, basis, base_b) \
        - linearizing_coordinates(div2, curve, A1, basis, base)
    assert np.max(np.abs(d1 - d2)) < 1e-9


def test_increment_antisymmetry_for_nearby_points(lin_setup):
    # antisymmetry is a local statement: distant hops may legitimately differ
    # by periods when forward and backward detours are not homotopic
    at, curve, basis, base, div = lin_setup
    traj = integrate((0, 0), at, A1, 0.05, 5e-3)
    divs = divisor_trajectory(traj)
    p0 = (complex(divs[0].lams[0]), complex(divs[0].zs[0]))
    p1 = (complex(divs[-1].lams[0]), complex(divs[-1].zs[0]))
    fwd = linearizing_increment(curve, A1, basis, p0, p1)
    bwd = linearizing_increment(curve, A1, basis, p1, p0)
    assert np.max(np.abs(fwd + bwd)) < 1e-11


def test_q_linear_in_time_for_action_labels(lin_setup):
    at, curve, _, base, _ = lin_setup
    labels = tuple((0, k) for k in range(4))  # action duals of (a = 1, b = 0)
    basis = InvariantBasis(2, 4, labels)
    traj = integrate((0, 0), at, A1, 2.0, 2e-3, save_every=20)
    divs = divisor_trajectory(traj)
    qs = linearizing_trajectory(divs, curve, A1, basis, base)
    assert linear_fit_residual(traj.times, qs) < 1e-6


def test_q_slope_matrix_constant_across_flows(lin_setup):
    at, curve, _, base, _ = lin_setup
    labels = tuple((0, k) for k in range(4))
    basis = InvariantBasis(2, 4, labels)
    slopes = []
    for flow_label in ((0, 0), (0, 1)):
        traj = integrate(flow_label, at, A1, 0.8, 2e-3, save_every=40)
        divs = divisor_trajectory(traj)
        qs = linearizing_trajectory(divs, curve, A1, basis, base)
        half = len(traj.times) // 2
        s1 = np.polyfit(traj.times[:half], qs[:half], 1)[0]
        s2 = np.polyfit(traj.times[half:], qs[half:], 1)[0]
        assert np.max(np.abs(s1 - s2)) < 1e-6  # constant slope within each flow
        slopes.append(np.polyfit(traj.times, qs, 1)[0])
    assert np.max(np.abs(slopes[0] - slopes[1])) > 1e-3  # flows genuinely differ


def test_casimir_dual_labels_are_not_affine(lin_setup):
    """The formal Q of a label conjugate to a Casimir direction of the pencil
    need not be affine in t; this documents the genuine behavior."""
    at, curve, _, base, _ = lin_setup
    basis = InvariantBasis(2, 4, ((0, 0), (0, 8)))
    traj = integrate((0, 0), at, A1, 2.0, 2e-3, save_every=20)
    divs = divisor_trajectory(traj)
    qs = linearizing_trajectory(divs, curve, A1, basis, base)
    assert linear_fit_residual(traj.times, qs[:, :1]) < 1e-6
    assert linear_fit_residual(traj.times, qs[:, 1:]) > 1e-3


def test_divisor_stays_on_curve_along_flow(lin_setup):
    at, curve, _, _, _ = lin_setup
    traj = integrate((0, 1), at, A1, 1.0, 2e-3, save_every=100)
    for div in divisor_trajectory(traj):
        for lam, z in div.points:
            assert curve.membership_defect(lam, z) < 1e-7
