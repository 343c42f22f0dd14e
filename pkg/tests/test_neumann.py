import numpy as np
import pytest

from laxpencil.algebra import MatPoly, Poly
from laxpencil.flows import linear_fit_residual
from laxpencil.neumann import (
    NeumannError,
    NeumannState,
    build_phi,
    classical_energy,
    constraint_defects,
    eom_rhs,
    hamiltonian,
    integrate_neumann,
    lax_B,
    phi_time_derivative,
    residue_energy,
    separation_coordinates,
)
from laxpencil.neumann import _loose_state
from laxpencil.phasespace import BracketPencil, CotangentElement, poisson_tensor_apply
from laxpencil.sov import SectionChoice, compute_divisor
from laxpencil.spectral import char_curve, curve_differentials

ALPHA3 = np.array([0.5, 1.3, 2.4])


@pytest.fixture
def state(rng):
    return NeumannState.random(ALPHA3, rng)


# ---------------------------------------------------------------------------
# state validation and construction
# ---------------------------------------------------------------------------

def test_state_requires_unit_sphere():
    with pytest.raises(NeumannError, match="unit sphere"):
        NeumannState(np.array([1.0, 1.0, 0.0]), np.zeros(3), ALPHA3)


def test_state_requires_orthogonality():
    with pytest.raises(NeumannError, match="not zero"):
        NeumannState(np.array([1.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]), ALPHA3)


def test_state_requires_distinct_alpha():
    with pytest.raises(NeumannError, match="distinct"):
        NeumannState(np.array([1.0, 0.0, 0.0]), np.zeros(3),
                     np.array([1.0, 1.0, 2.0]))


def test_phi_structure(state):
    at = build_phi(state)
    assert at.r == 2 and at.n == 3
    assert at.phi.trace().is_zero()
    assert at.phi.entry(1, 0).coeffs[-1] == pytest.approx(1.0)  # sum x^2 = 1


def test_phi_entries_at_alpha_nodes(state):
    # at lam = alpha_j every a_i with i != j vanishes, and a(alpha_j) = 0
    at = build_phi(state)
    for j in range(3):
        aj = np.prod([ALPHA3[j] - ALPHA3[i] for i in range(3) if i != j])
        x, y = state.x[j], state.y[j]
        want = aj * np.array([[-x * y, -y * y], [x * x, x * y]])
        assert np.max(np.abs(at.phi(ALPHA3[j]) - want)) < 1e-12


# ---------------------------------------------------------------------------
# equations of motion and the Lax form
# ---------------------------------------------------------------------------

def test_equilibrium_at_potential_eigenvector():
    x = np.array([0.0, 1.0, 0.0])
    s = NeumannState(x, np.zeros(3), ALPHA3)
    xdot, ydot = eom_rhs(s)
    assert np.max(np.abs(xdot)) == 0.0
    assert np.max(np.abs(ydot)) < 1e-15


def test_tangency_identities(state):
    xdot, ydot = eom_rhs(state)
    assert abs(np.dot(state.x, xdot)) < 1e-12
    assert abs(np.dot(xdot, state.y) + np.dot(state.x, ydot)) < 1e-12


def test_lax_matrix_shape(state):
    b = lax_B(state, 1.7)
    assert np.trace(b) == 0.0
    assert b[1, 0] == -1.0  # -(sum x_i^2) on the constraint sphere


def test_lax_match_finite_difference(rng):
    # d(phi)/dt along eom_rhs equals [B, phi] entrywise, O(h^2) in the step
    for trial in range(10):
        s = NeumannState.random(ALPHA3, rng)
        xdot, ydot = eom_rhs(s)
        lams = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        res = []
        for h in (1e-4, 5e-5):
            sp = _loose_state(s.x + h * xdot, s.y + h * ydot, ALPHA3)
            sm = _loose_state(s.x - h * xdot, s.y - h * ydot, ALPHA3)
            worst = 0.0
            for lam in lams:
                fd = (build_phi(sp).phi(lam) - build_phi(sm).phi(lam)) / (2.0 * h)
                b = lax_B(s, lam)
                phi = build_phi(s).phi(lam)
                worst = max(worst, float(np.max(np.abs(fd - (b @ phi - phi @ b)))))
            res.append(worst)
        # phi entries are quadratic in (x, y), so central differences are
        # exact up to rounding: the residual sits at the floor for both steps
        # (trivially O(h^2))
        assert res[0] < 1e-8 and res[1] < 1e-8


def test_exact_time_derivative_equals_lax_commutator(state):
    dphi = phi_time_derivative(state)
    at = build_phi(state)
    for lam in (0.3, 1.1 - 0.8j, 2.9):
        b = lax_B(state, lam)
        phi = at.phi(lam)
        assert np.max(np.abs(dphi(lam) - (b @ phi - phi @ b))) < 1e-12


# ---------------------------------------------------------------------------
# conservation along the flow
# ---------------------------------------------------------------------------

def test_conservation_over_long_run(state):
    times, states = integrate_neumann(state, 10.0, 1e-3, save_every=100)
    h0 = hamiltonian(state)
    e0 = classical_energy(state)
    assert max(max(constraint_defects(s)) for s in states) < 1e-8
    assert max(abs(hamiltonian(s) - h0) for s in states) < 1e-8
    assert max(abs(classical_energy(s) - e0) for s in states) < 1e-8


def test_isospectral_coefficient_drift(state):
    times, states = integrate_neumann(state, 5.0, 1e-3, save_every=200)
    table0 = char_curve(build_phi(state)).coefficient_table()
    varying = [(j, k) for (j, k), v in sorted(table0.items()) if j == 0 and k <= 4]
    assert len(varying) == 5  # the five nontrivial coefficients at n = 3
    for s in states:
        table = char_curve(build_phi(s)).coefficient_table()
        for key in varying:
            assert abs(table.get(key, 0.0) - table0[key]) < 1e-8


def test_alpha_shift_shifts_hamiltonian(rng):
    s = NeumannState.random(ALPHA3, rng)
    shifted = NeumannState(s.x, s.y, ALPHA3 + 0.7)
    h1, h2 = hamiltonian(s), hamiltonian(shifted)
    assert abs(h1 - h2) > 1e-6  # the shift changes the value by a computable amount
    # energy reading shifts by exactly the potential shift: 2E picks up 2*0.7/2... = 0.7*sum x^2
    assert residue_energy(shifted) - residue_energy(s) == pytest.approx(0.7, abs=1e-10)


def test_residue_energy_is_twice_classical(rng):
    for _ in range(5):
        s = NeumannState.random(ALPHA3, rng)
        assert residue_energy(s) == pytest.approx(2.0 * classical_energy(s), abs=1e-12)


def test_hamiltonian_regression_value():
    # frozen regression: the lam^2 residue Hamiltonian at a pinned state
    x = np.array([0.6, 0.8, 0.0])
    y = np.array([-0.8, 0.6, 0.5])
    y = y - np.dot(x, y) * x
    s = NeumannState(x / np.linalg.norm(x), y, ALPHA3)
    # value computed once from the validated implementation and frozen;
    # the classical energy at this state is 1.131 and the lam-residue
    # companion equals exactly twice that
    assert hamiltonian(s) == pytest.approx(3.8245999999999967, abs=1e-12)
    assert classical_energy(s) == pytest.approx(1.131, abs=1e-12)


# ---------------------------------------------------------------------------
# separation coordinates
# ---------------------------------------------------------------------------

def test_separation_interlaces_alpha(rng):
    for _ in range(5):
        s = NeumannState.random(ALPHA3, rng)
        if np.min(np.abs(s.x)) < 0.05:
            continue
        sep = separation_coordinates(s)
        lams = np.sort(sep.lams.real)
        assert np.max(np.abs(sep.lams.imag)) < 1e-9
        assert ALPHA3[0] < lams[0] < ALPHA3[1] < lams[1] < ALPHA3[2]


def test_separation_matches_sov_pipeline(state):
    sep = separation_coordinates(state)
    div = compute_divisor(build_phi(state), SectionChoice(np.array([1.0, 0.0])))
    assert np.max(np.abs(sep.lams - div.lams)) < 1e-8
    assert np.max(np.abs(sep.zs - div.zs)) < 1e-8


def test_separation_on_curve(state):
    curve = char_curve(build_phi(state))
    for lam, z in separation_coordinates(state).points:
        assert curve.membership_defect(lam, z) < 1e-9


def test_separation_jacobian_rank(rng):
    # s -> (lam_mu, z_mu) is a local diffeomorphism away from x_i = 0
    s = NeumannState.random(ALPHA3, rng)
    if np.min(np.abs(s.x)) < 0.05:
        s = NeumannState.random(ALPHA3, np.random.default_rng(5))
    h = 1e-6
    base = separation_coordinates(s)
    cols = []
    for idx in range(3):
        for which in ("x", "y"):
            xp, yp = np.array(s.x), np.array(s.y)
            (xp if which == "x" else yp)[idx] += h
            sp = _loose_state(xp, yp, ALPHA3)
            xp2, yp2 = np.array(s.x), np.array(s.y)
            (xp2 if which == "x" else yp2)[idx] -= h
            sm = _loose_state(xp2, yp2, ALPHA3)
            up, dn = separation_coordinates(sp), separation_coordinates(sm)
            cols.append(np.concatenate([(up.lams - dn.lams) / (2 * h),
                                        (up.zs - dn.zs) / (2 * h)]))
    jac = np.array(cols).T  # 4 x 6, rank 4 expected away from x_i = 0
    svals = np.linalg.svd(jac, compute_uv=False)
    assert svals[3] > 1e-6


# ---------------------------------------------------------------------------
# the flow as a pencil Hamiltonian flow (frozen empirical identification)
# ---------------------------------------------------------------------------

def test_flow_is_pencil_hamiltonian_flow_modulo_gauge(rng):
    """Under (a = 1, b = 0), the Neumann field equals the Hamiltonian field of
    the curve coefficient (0, 1) plus a multiple of the conjugation (gauge)
    direction [E12, phi]; the proportionality constant is exactly 1.  The
    gauge direction itself is the (0, 2)-coefficient field.  Frozen from the
    empirical pencil identification."""
    pencil = BracketPencil(Poly([1.0]), 0.0)
    e12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    for seed in (3, 17):
        s = NeumannState.random(ALPHA3, np.random.default_rng(seed))
        at = build_phi(s)
        n = s.n
        diffs = curve_differentials(at)
        x1 = poisson_tensor_apply(diffs[(0, 1)], at, pencil)
        x2 = poisson_tensor_apply(diffs[(0, 2)], at, pencil)
        gauge = MatPoly(np.array([e12 @ c - c @ e12 for c in at.phi.coeffs]), r=2)
        # the (0, 2) field is exactly the gauge direction
        assert (x2 - gauge).scale() < 1e-10 * max(1.0, gauge.scale())
        dphi = phi_time_derivative(s)

        def pad(m):
            out = np.zeros((n + 1, 2, 2), dtype=np.complex128)
            out[: m.coeffs.shape[0]] = m.coeffs
            return out.ravel()

        a = np.array([pad(x1), pad(gauge)]).T
        w, *_ = np.linalg.lstsq(a, pad(dphi), rcond=None)
        resid = np.max(np.abs(a @ w - pad(dphi)))
        assert resid < 1e-10
        assert w[0] == pytest.approx(1.0, abs=1e-10)
