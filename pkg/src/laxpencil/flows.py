"""Isospectral Hamiltonian flows and their linearizing coordinates.

The flow of a spectral Hamiltonian H (a curve coefficient, label (j, k)) is
the vector field ``Lambda_{a,b}(dH)``; trajectories are integrated with
classical fixed-step RK4 and checked for spectral drift.  For b = 0 pencils
the linearizing coordinates are

    Q_i = - sum_mu  int_{lam0}^{lam_mu}  lam**k z**j / (a(lam) dP/dz) dlam,

the H_i-derivative of the generating function obtained by differentiating
under the integral sign (dz/dH_i = -(dP/dH_i)/(dP/dz) with dP/dH_i the
monomial lam**k z**j).  The integrand lives on the spectral curve: z(lam) is
continued along the path by nearest-root branch tracking, and quadrature is
composite Gauss-Legendre per path segment.

Paths run from a fixed base point (lam0, z0) on the curve to each divisor
point.  When the straight-line continuation ends on the wrong sheet, a
correcting loop around a nearby branch point is appended (two-sheeted curves
only); the homotopy class of the path only shifts Q by a constant, which none
of the implemented checks depend on.

The b != 0 companion of the generating function (a log-branch integral) is
not implemented; requesting it raises ``FlowsError``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Poly, poly_roots
from .phasespace import BracketPencil, PhasePoint, PhaseSpaceError
from .spectral import (
    InvariantBasis,
    SpectralCurve,
    char_curve,
    curve_differentials,
)
from .phasespace import poisson_tensor_apply
from .sov import (
    DivisorCoordinates,
    SectionChoice,
    SovError,
    _resultant_in_z,
    compute_divisor,
)


class FlowsError(ValueError):
    """Branch-tracking failure, unreachable sheet, or unsupported pencil."""


# ---------------------------------------------------------------------------
# Hamiltonian vector fields and RK4 trajectories
# ---------------------------------------------------------------------------

def hamiltonian_vector_field(label: tuple[int, int], at: PhasePoint,
                             pencil: BracketPencil) -> np.ndarray:
    """Lambda_{a,b}(dH) for the curve coefficient H = [z**j lam**k] P, flattened.

    Returns the tangent vector in the same (k, i, j) flattening used by
    :meth:`PhasePoint.to_vector`.
    """
    diffs = curve_differentials(at, InvariantBasis(at.r, at.n, (label,)))
    f = poisson_tensor_apply(diffs[label], at, pencil)
    out = np.zeros((at.n + 1, at.r, at.r), dtype=np.complex128)
    out[: f.coeffs.shape[0]] = f.coeffs
    return out.ravel()


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step RK4 trajectory of a spectral-Hamiltonian flow."""

    times: np.ndarray
    states: tuple[PhasePoint, ...]
    label: tuple[int, int]
    pencil: BracketPencil
    step: float
    complete: bool = True

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise FlowsError("trajectory times must be strictly increasing")
        object.__setattr__(self, "times", t)


def integrate(label: tuple[int, int], start: PhasePoint, pencil: BracketPencil,
              t_final: float, step: float, save_every: int = 1) -> Trajectory:
    """Classical RK4 on the coefficient space of phi.

    A field-evaluation failure aborts the run and returns the partial
    trajectory with ``complete=False``.
    """
    if step <= 0:
        raise FlowsError("step must be positive")
    r, n = start.r, start.n
    nsteps = max(1, int(round(t_final / step)))
    y = start.to_vector()
    times = [0.0]
    states = [start]

    def rhs(vec: np.ndarray) -> np.ndarray:
        return hamiltonian_vector_field(label, PhasePoint.from_vector(vec, r, n), pencil)

    complete = True
    for m in range(1, nsteps + 1):
        try:
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * step * k1)
            k3 = rhs(y + 0.5 * step * k2)
            k4 = rhs(y + step * k3)
        except (PhaseSpaceError, ValueError):
            complete = False
            break
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if m % save_every == 0 or m == nsteps:
            times.append(m * step)
            states.append(PhasePoint.from_vector(y, r, n))
    return Trajectory(np.array(times), tuple(states), label, pencil, step, complete)


def isospectral_drift(traj: Trajectory) -> float:
    """Max relative drift of any spectral-curve coefficient along the trajectory."""
    base = char_curve(traj.states[0])
    table0 = base.coefficient_table()
    scale = max(max(abs(v) for v in table0.values()), 1.0)
    worst = 0.0
    for state in traj.states[1:]:
        table = char_curve(state).coefficient_table()
        keys = set(table0) | set(table)
        worst = max(worst, max(abs(table.get(k, 0.0) - table0.get(k, 0.0)) for k in keys) / scale)
    return worst


# ---------------------------------------------------------------------------
# branch tracking on the spectral curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveBranch:
    """One sheet of z(lam) continued along a sampled path."""

    curve: SpectralCurve
    path: np.ndarray
    z_values: np.ndarray


def _z_roots_at(curve: SpectralCurve, lam: complex) -> np.ndarray:
    return poly_roots(curve.z_poly_at(lam), tol=1e-11)


def _all_sheets(curve: SpectralCurve, lams: np.ndarray) -> np.ndarray:
    """All r sheet values over each lam, shape (len(lams), r); vectorized for r = 2."""
    if curve.r == 2:
        p0 = curve.z_coeffs[0].eval_many(lams)
        p1 = curve.z_coeffs[1].eval_many(lams)
        disc = np.sqrt(p1 * p1 - 4.0 * p0 + 0.0j)
        qq = np.where(np.abs(p1 + disc) >= np.abs(p1 - disc),
                      -(p1 + disc) / 2.0, -(p1 - disc) / 2.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            other = np.where(qq != 0, p0 / np.where(qq == 0, 1.0, qq), -p1)
        return np.stack([qq, other], axis=1)
    return np.stack([_z_roots_at(curve, lam) for lam in lams])


def _track_along(curve: SpectralCurve, path: np.ndarray, z_start: complex,
                 membership_tol: float = 1e-7) -> np.ndarray:
    """Nearest-root continuation of the sheet through ``z_start`` along ``path``."""
    if curve.membership_defect(path[0], z_start) > membership_tol:
        raise FlowsError("starting value does not lie on the curve")
    sheets = _all_sheets(curve, path)
    zs = np.empty(len(path), dtype=np.complex128)
    zs[0] = z_start
    for idx in range(1, len(path)):
        pred = zs[idx - 1] if idx == 1 else 2.0 * zs[idx - 1] - zs[idx - 2]
        roots = sheets[idx]
        order = np.argsort(np.abs(roots - pred))
        chosen = roots[order[0]]
        if len(roots) > 1:
            d0 = abs(roots[order[0]] - pred)
            d1 = abs(roots[order[1]] - pred)
            if d0 > 0.5 * d1:
                raise FlowsError("path too close to branch point; perturb path")
        zs[idx] = chosen
    return zs


def branch_track(curve: SpectralCurve, lam0: complex, lam1: complex,
                 z_at_lam0: complex, samples: int = 200) -> CurveBranch:
    """Continue the sheet through (lam0, z_at_lam0) along the straight path to lam1."""
    if samples < 2:
        raise FlowsError("need at least 2 samples")
    path = lam0 + (lam1 - lam0) * np.linspace(0.0, 1.0, samples)
    zs = _track_along(curve, path, z_at_lam0)
    return CurveBranch(curve, path, zs)


def curve_point_at(curve: SpectralCurve, lam0: complex, index: int = 0) -> tuple[complex, complex]:
    """A canonical point of the curve over lam0 (sheets ordered by (re, im))."""
    roots = _z_roots_at(curve, lam0)
    order = np.lexsort((roots.imag, roots.real))
    return complex(lam0), complex(roots[order[index]])


def branch_points(curve: SpectralCurve) -> np.ndarray:
    """lam positions where two sheets collide: roots of the z-discriminant."""
    g1 = list(curve.z_coeffs)
    g2 = [p * float(j) for j, p in enumerate(curve.z_coeffs)][1:]
    disc = _resultant_in_z(g1, g2, tol=1e-9)
    disc = disc.trimmed(1e-9 * max(disc.scale(), 1e-300))
    if disc.degree < 1:
        return np.array([], dtype=np.complex128)
    return poly_roots(disc, tol=1e-8)


# ---------------------------------------------------------------------------
# linearizing coordinates
# ---------------------------------------------------------------------------

_DETOUR_OFFSETS = (0.35j, -0.35j, 0.7j, -0.7j, 0.35, -0.35, 1.1j, -1.1j)


def _path_polyline(waypoints: list[complex], per_segment: int) -> np.ndarray:
    pieces = []
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        seg = a + (b - a) * np.linspace(0.0, 1.0, per_segment)
        pieces.append(seg if not pieces else seg[1:])
    return np.concatenate(pieces)


def _loop_waypoints(center: complex, entry: complex, points: int = 16) -> list[complex]:
    """Closed polygonal loop around ``center`` starting and ending at ``entry``."""
    rho = entry - center
    angles = 2.0 * np.pi * np.arange(1, points) / points
    return [center + rho * np.exp(1j * t) for t in angles] + [entry]


def _anchor_point(curve: SpectralCurve) -> complex:
    """A fixed waypoint clear of the branch locus, determined by the curve alone.

    Routing every path through the anchor makes a base-point shift a shared
    leg, hence a divisor-independent constant.
    """
    bps = branch_points(curve)
    if len(bps) == 0:
        return 1.3 + 1.1j
    c = complex(np.mean(bps))
    spread = float(np.max(np.abs(bps - c)))
    return c + 1.6 * (spread + 1.0) * np.exp(0.93j)


def _chain(curve: SpectralCurve, waypoints: list[complex], z_start: complex,
           per_segment: int = 33, max_refine: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Track the sheet along a polyline, refining globally on ambiguity."""
    err: Exception | None = None
    for attempt in range(max_refine):
        path = _path_polyline(waypoints, per_segment * (2 ** attempt))
        try:
            return path, _track_along(curve, path, z_start)
        except FlowsError as exc:
            err = exc
    raise FlowsError(f"branch tracking failed after refinement: {err}")


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[order]


class _DifferentialSet:
    """Evaluates the label integrands -lam**k z**j / (a(lam) dP/dz) in batch."""

    def __init__(self, curve: SpectralCurve, a_poly: Poly,
                 labels: tuple[tuple[int, int], ...], a_floor: float = 1e-9):
        self.curve = curve
        self.a = a_poly
        self.labels = labels
        self.a_floor = a_floor * max(a_poly.scale(), 1e-300)
        self.pz_coeffs = [p * float(j) for j, p in enumerate(curve.z_coeffs)][1:]

    def __call__(self, lam: np.ndarray, z: np.ndarray) -> np.ndarray:
        a_q = self.a.eval_many(lam)
        if np.min(np.abs(a_q)) < self.a_floor:
            raise FlowsError("pencil polynomial vanishes on the integration path")
        pz = np.zeros_like(lam)
        for jm1, p in enumerate(self.pz_coeffs):
            pz = pz + p.eval_many(lam) * z ** jm1
        base = -1.0 / (a_q * pz)
        out = np.empty((len(self.labels), len(lam)), dtype=np.complex128)
        for idx, (j, k) in enumerate(self.labels):
            out[idx] = base * lam ** k * z ** j
        return out


def _sheets_near(curve: SpectralCurve, lams: np.ndarray, guesses: np.ndarray,
                 margin: float = 0.45) -> np.ndarray:
    """Nearest curve sheet to each guess, with an ambiguity margin check.

    Vectorized for two-sheeted curves (the quadratic formula); higher r falls
    back to per-point root solving.
    """
    if curve.r == 2:
        p0 = curve.z_coeffs[0].eval_many(lams)
        p1 = curve.z_coeffs[1].eval_many(lams)
        # monic z**2 + p1 z + p0 (leading coefficient (-1)**2 = 1)
        disc = np.sqrt(p1 * p1 - 4.0 * p0 + 0.0j)
        qq = np.where(np.abs(p1 + disc) >= np.abs(p1 - disc),
                      -(p1 + disc) / 2.0, -(p1 - disc) / 2.0)
        r1 = qq
        with np.errstate(divide="ignore", invalid="ignore"):
            r2 = np.where(qq != 0, p0 / np.where(qq == 0, 1.0, qq), -p1)
        d1 = np.abs(r1 - guesses)
        d2 = np.abs(r2 - guesses)
        chosen = np.where(d1 <= d2, r1, r2)
        d0 = np.minimum(d1, d2)
        dother = np.maximum(d1, d2)
        if np.any(d0 > margin * dother):
            raise FlowsError("ambiguous sheet assignment near branch point")
        return chosen
    out = np.empty_like(guesses)
    for m, (lam, guess) in enumerate(zip(lams, guesses)):
        roots = _z_roots_at(curve, lam)
        order = np.argsort(np.abs(roots - guess))
        if len(roots) > 1:
            if abs(roots[order[0]] - guess) > margin * abs(roots[order[1]] - guess):
                raise FlowsError("ambiguous sheet assignment near branch point")
        out[m] = roots[order[0]]
    return out


def _sheet_at(curve: SpectralCurve, lam: complex, guess: complex,
              margin: float = 0.45) -> complex:
    return complex(_sheets_near(curve, np.array([lam]), np.array([guess]), margin)[0])


def _panel(diffset: _DifferentialSet, la: complex, lb: complex, za: complex,
           zb: complex, order: int) -> np.ndarray:
    nodes, weights = _gauss_nodes(order)
    lam_q = la + (lb - la) * nodes
    z_q = _sheets_near(diffset.curve, lam_q, za + (zb - za) * nodes)
    vals = diffset(lam_q, z_q)
    return (lb - la) * (vals @ weights)


def _split_sheet(curve: SpectralCurve, la: complex, za: complex, lb: complex,
                 zb: complex, frac: float = 0.5) -> tuple[complex, complex]:
    """A split point of the panel [la, lb] with its sheet value.

    Prefers the interpolated nearest-root guess; falls back to bisection
    tracking from the known start sheet, shifting the split fraction if the
    midpoint lands too close to a branch point.
    """
    lm = la + frac * (lb - la)
    try:
        return lm, _sheet_at(curve, lm, za + frac * (zb - za))
    except FlowsError:
        pass
    for samples in (65, 257, 1025):
        try:
            path = la + (lm - la) * np.linspace(0.0, 1.0, samples)
            zs = _track_along(curve, path, za)
            return lm, complex(zs[-1])
        except FlowsError:
            continue
    if abs(frac - 0.5) < 1e-9:
        return _split_sheet(curve, la, za, lb, zb, frac=0.37)
    raise FlowsError("cannot split integration panel near branch point")


def _adaptive_panel(diffset: _DifferentialSet, la: complex, lb: complex,
                    za: complex, zb: complex, tol: float, order: int = 10,
                    depth: int = 0, max_depth: int = 14) -> np.ndarray:
    lm, zm = _split_sheet(diffset.curve, la, za, lb, zb)
    try:
        whole = _panel(diffset, la, lb, za, zb, order)
        halves = _panel(diffset, la, lm, za, zm, order) \
            + _panel(diffset, lm, lb, zm, zb, order)
        err = float(np.max(np.abs(whole - halves)))
        scale = 1.0 + float(np.max(np.abs(halves)))
        if err < tol * scale:
            return halves
        if depth >= max_depth:
            return halves
    except FlowsError:
        if depth >= max_depth:
            raise
    return _adaptive_panel(diffset, la, lm, za, zm, tol, order, depth + 1, max_depth) \
        + _adaptive_panel(diffset, lm, lb, zm, zb, tol, order, depth + 1, max_depth)


def _integrate_chain(diffset: _DifferentialSet, path: np.ndarray, zs: np.ndarray,
                     tol: float, order: int = 10) -> np.ndarray:
    total = np.zeros(len(diffset.labels), dtype=np.complex128)
    for seg in range(len(path) - 1):
        if path[seg] == path[seg + 1]:
            continue
        total += _adaptive_panel(diffset, path[seg], path[seg + 1],
                                 zs[seg], zs[seg + 1], tol, order=order)
    return total


def _route_candidates(curve: SpectralCurve, start: complex, z_start: complex,
                      lam_mu: complex, z_mu: complex,
                      bps: np.ndarray, sheet_tol: float = 1e-6):
    """Yield tracked paths (start, z_start) -> (lam_mu, z_mu), best first.

    Each candidate is a straight chord or a single-midpoint detour, with a
    branch-point correction loop appended when the plain continuation ends on
    the wrong sheet of a two-sheeted curve.  Every yielded path is verified
    to end on the requested sheet; callers may reject a candidate (e.g. on
    quadrature failure) and fall through to the next.
    """
    zscale = 1.0 + abs(z_mu)
    chord = max(abs(lam_mu - start), 1.0)
    yielded = 0
    for attempt in range(1 + len(_DETOUR_OFFSETS)):
        if attempt == 0:
            waypoints = [start, lam_mu]
        else:
            mid = 0.5 * (start + lam_mu) + _DETOUR_OFFSETS[attempt - 1] * chord
            waypoints = [start, mid, lam_mu]
        try:
            path, zs = _chain(curve, waypoints, z_start)
        except FlowsError:
            continue
        if abs(zs[-1] - z_mu) < sheet_tol * zscale:
            yielded += 1
            yield path, zs
            continue
        if curve.r != 2 or len(bps) == 0:
            continue
        # loop around a nearby branch point; keep the loop small enough to
        # encircle exactly one branch point so it flips the two sheets
        order = np.argsort(np.abs(bps - lam_mu))
        for bi in order[:3]:
            bp = complex(bps[bi])
            others = np.abs(bps - bp)
            others = others[others > 1e-12]
            radius = 0.45 * float(np.min(others)) if len(others) else 0.5 * chord
            radius = min(radius, 0.5 * chord + abs(lam_mu - bp))
            direction = (lam_mu - bp) / abs(lam_mu - bp) if abs(lam_mu - bp) > 1e-12 else 1.0
            entry = bp + radius * direction
            loop = [lam_mu, entry] + _loop_waypoints(bp, entry) + [lam_mu]
            try:
                lpath, lzs = _chain(curve, loop, zs[-1])
            except FlowsError:
                continue
            if abs(lzs[-1] - z_mu) < sheet_tol * zscale:
                yielded += 1
                yield (np.concatenate([path, lpath[1:]]),
                       np.concatenate([zs, lzs[1:]]))
                break
    if yielded == 0:
        raise FlowsError(
            f"no admissible path to divisor point ({lam_mu}, {z_mu})"
        )


def _integrate_to_point(diffset: _DifferentialSet, start: complex, z_start: complex,
                        lam_mu: complex, z_mu: complex, bps: np.ndarray,
                        tol: float, order: int = 10,
                        sheet_tol: float = 1e-6) -> np.ndarray:
    last_err: Exception | None = None
    for path, zs in _route_candidates(diffset.curve, start, z_start,
                                      lam_mu, z_mu, bps, sheet_tol):
        try:
            return _integrate_chain(diffset, path, zs, tol, order=order)
        except FlowsError as exc:
            last_err = exc
    raise FlowsError(
        f"no integrable path to divisor point ({lam_mu}, {z_mu}): {last_err}"
    )


def linearizing_coordinates(div: DivisorCoordinates, curve: SpectralCurve,
                            pencil: BracketPencil, basis: InvariantBasis,
                            base_point: tuple[complex, complex],
                            quad_tol: float = 1e-12, gauss_order: int = 10,
                            a_floor: float = 1e-9) -> np.ndarray:
    """Q_i = -sum_mu int lam**k z**j / (a(lam) dP/dz) dlam along curve paths.

    Requires a b = 0 pencil.  Every path runs base point -> anchor -> divisor
    point, where the anchor is a fixed waypoint determined by the curve; z is
    branch-tracked along the way and each polyline segment is integrated by
    adaptive Gauss-Legendre panels.  Q is defined up to the period lattice
    (the path homotopy class); all implemented checks are insensitive to that
    ambiguity.
    """
    if pencil.b_poly is not None or pencil.b != 0.0:
        raise FlowsError("linearizing coordinates are implemented for b = 0 pencils only")
    lam0, z0 = base_point
    if curve.membership_defect(lam0, z0) > 1e-7:
        raise FlowsError("base point does not lie on the curve")
    diffset = _DifferentialSet(curve, pencil.a, tuple(basis.labels), a_floor)
    anchor = _anchor_point(curve)
    bps = branch_points(curve)

    leg = None
    chord = max(abs(anchor - lam0), 1.0)
    last_err: Exception | None = None
    for attempt in range(1 + len(_DETOUR_OFFSETS)):
        if attempt == 0:
            waypoints = [lam0, anchor]
        else:
            mid = 0.5 * (lam0 + anchor) + _DETOUR_OFFSETS[attempt - 1] * chord
            waypoints = [lam0, mid, anchor]
        try:
            leg_path, leg_zs = _chain(curve, waypoints, z0)
            leg = _integrate_chain(diffset, leg_path, leg_zs, quad_tol, order=gauss_order)
            break
        except FlowsError as exc:
            last_err = exc
    if leg is None:
        raise FlowsError(f"no integrable path from base point to anchor: {last_err}")
    z_anchor = complex(leg_zs[-1])

    q = len(div) * leg
    for lam_mu, z_mu in div.points:
        q = q + _integrate_to_point(diffset, anchor, z_anchor, lam_mu, z_mu, bps,
                                    quad_tol, order=gauss_order)
    return q


def linearizing_increment(curve: SpectralCurve, pencil: BracketPencil,
                          basis: InvariantBasis,
                          p_from: tuple[complex, complex],
                          p_to: tuple[complex, complex],
                          quad_tol: float = 1e-12,
                          sheet_tol: float = 1e-5,
                          bps: np.ndarray | None = None) -> np.ndarray:
    """Integral of the label differentials along a short curve path p_from -> p_to.

    The path is the straight lam segment tracked from the known starting
    sheet, with detours and a branch-point loop when the endpoints sit on
    sheets the straight chord cannot connect (a divisor point reversing at a
    real turning point is the typical case).  Callers supply sufficiently
    close points, e.g. consecutive trajectory samples.
    """
    if pencil.b_poly is not None or pencil.b != 0.0:
        raise FlowsError("linearizing coordinates are implemented for b = 0 pencils only")
    (la, za), (lb, zb) = p_from, p_to
    diffset = _DifferentialSet(curve, pencil.a, tuple(basis.labels))
    if la == lb and abs(za - zb) <= sheet_tol * (1.0 + abs(zb)):
        return np.zeros(len(basis.labels), dtype=np.complex128)
    if bps is None:
        bps = branch_points(curve)
    return _integrate_to_point(diffset, la, za, lb, zb, bps, quad_tol,
                               sheet_tol=sheet_tol)


def linearizing_trajectory(divs: list[DivisorCoordinates], curve: SpectralCurve,
                           pencil: BracketPencil, basis: InvariantBasis,
                           base_point: tuple[complex, complex],
                           quad_tol: float = 1e-12) -> np.ndarray:
    """Q_i along a divisor trajectory, continued incrementally in time.

    The first divisor is integrated from the base point; subsequent values
    accumulate short on-curve increments between consecutive divisor
    positions, so Q(t) is continuous in t by construction (no homotopy
    jumps).  Returns an array of shape (len(divs), len(labels)).
    """
    q0 = linearizing_coordinates(divs[0], curve, pencil, basis, base_point,
                                 quad_tol=quad_tol)
    bps = branch_points(curve)
    out = np.empty((len(divs), len(basis.labels)), dtype=np.complex128)
    out[0] = q0
    for m in range(1, len(divs)):
        step = np.zeros(len(basis.labels), dtype=np.complex128)
        for mu in range(len(divs[m])):
            step += linearizing_increment(
                curve, pencil, basis,
                (complex(divs[m - 1].lams[mu]), complex(divs[m - 1].zs[mu])),
                (complex(divs[m].lams[mu]), complex(divs[m].zs[mu])),
                quad_tol=quad_tol, bps=bps,
            )
        out[m] = out[m - 1] + step
    return out


# ---------------------------------------------------------------------------
# divisor trajectories
# ---------------------------------------------------------------------------

def divisor_trajectory(traj: Trajectory, sec: SectionChoice | None = None,
                       tol: float = 1e-9) -> list[DivisorCoordinates]:
    """Divisor coordinates along a trajectory, consistently ordered in time.

    Points of each successive divisor are matched to the previous one by
    nearest lam, so individual points can be followed through time.
    """
    out: list[DivisorCoordinates] = []
    for state in traj.states:
        div = compute_divisor(state, sec, tol=tol)
        if out:
            prev = out[-1]
            if len(div) != len(prev):
                raise SovError("divisor count changed along trajectory")
            # match jointly in (lam, z): two points on different sheets may
            # pass arbitrarily close in lam alone
            lscale = 1.0 + float(np.max(np.abs(prev.lams)))
            zscale = 1.0 + float(np.max(np.abs(prev.zs)))
            taken: set[int] = set()
            order = np.empty(len(div), dtype=np.intp)
            for mu in range(len(prev)):
                cost = np.abs(div.lams - prev.lams[mu]) / lscale \
                    + np.abs(div.zs - prev.zs[mu]) / zscale
                for idx in np.argsort(cost):
                    if int(idx) not in taken:
                        taken.add(int(idx))
                        order[mu] = idx
                        break
            div = DivisorCoordinates(div.lams[order], div.zs[order],
                                     div.expected_count, div.warnings)
        out.append(div)
    return out


def linear_fit_residual(times: np.ndarray, values: np.ndarray) -> float:
    """Max residual of the best affine fit values ~ c0 + c1 * t (per column)."""
    a = np.column_stack([np.ones_like(times), times])
    sol, *_ = np.linalg.lstsq(a, values, rcond=None)
    resid = values - a @ sol
    return float(np.max(np.abs(resid)))
