import numpy as np
import pytest

from laxpencil.algebra import MatPoly
from laxpencil.phasespace import PhasePoint


def random_phase_point(rng, r, n, scale=1.0, real=False, integer=False):
    if integer:
        coeffs = rng.integers(-3, 4, size=(n + 1, r, r)).astype(np.complex128)
    elif real:
        coeffs = scale * rng.standard_normal((n + 1, r, r)).astype(np.complex128)
    else:
        coeffs = scale * (rng.standard_normal((n + 1, r, r))
                          + 1j * rng.standard_normal((n + 1, r, r)))
    return PhasePoint(MatPoly(coeffs, r=r), n)


def poly_coeffs_padded(p, size):
    out = np.zeros(size, dtype=np.complex128)
    out[: len(p.coeffs)] = p.coeffs
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
