"""Texture measures: grand sum, rugosity, and related functionals.

The grand sum of a density operator is the sum of all its matrix entries in
the computational basis; it equals D times the overlap of the state with the
uniform-superposition ket, so it lies in [0, D]. Rugosity is the negative log
of the normalized grand sum and diverges exactly on states orthogonal to the
uniform ket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import EPS, as_complex_matrix, kron
from .states import DensityOperator

#: Grand sums below this floor are treated as exactly zero (infinite rugosity).
SIGMA_FLOOR = EPS


def _matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityOperator):
        return rho.matrix
    return DensityOperator(as_complex_matrix(rho, name="rho")).matrix


def grand_sum(rho) -> float:
    """Sum of all computational-basis entries of a density operator.

    Hermiticity makes the result real; values land in [0, dim] up to
    numerical noise.
    """
    m = _matrix(rho)
    total = complex(m.sum())
    if abs(total.imag) > 1e-8:
        raise ValueError(f"rho: grand sum has imaginary residue {total.imag!r}")
    return float(total.real)


def projective_probability(rho) -> float:
    """Probability of projecting onto the uniform-superposition ket.

    Equals grand_sum / dim, clamped to [0, 1] against numerical noise.
    """
    m = _matrix(rho)
    p = grand_sum(m) / m.shape[0]
    if p < -EPS or p > 1.0 + EPS:
        raise ValueError(f"rho: projective probability {p!r} outside [0, 1]")
    return float(min(1.0, max(0.0, p)))


def rugosity(rho) -> float:
    """Negative logarithm of the normalized grand sum.

    Returns ``math.inf`` when the grand sum vanishes (below ``SIGMA_FLOOR``).
    The result is clamped to be non-negative against rounding at the
    textureless state.
    """
    m = _matrix(rho)
    sigma = grand_sum(m)
    dim = m.shape[0]
    if sigma < SIGMA_FLOOR:
        return math.inf
    value = -math.log(sigma / dim)
    if value < -1e-12:
        raise ValueError(f"rho: rugosity {value!r} is negative beyond tolerance")
    return max(0.0, value)


def imaginarity_qubit(rho) -> float:
    """Imaginarity measure 2*|y| of a qubit state with Bloch coordinate y.

    Only defined for dim 2.
    """
    m = _matrix(rho)
    if m.shape[0] != 2:
        raise ValueError(f"rho: imaginarity_qubit requires dim 2, got {m.shape[0]}")
    y = 2.0 * m[1, 0].imag
    return float(2.0 * abs(y))


def additivity_check(rhos) -> tuple[float, float]:
    """Rugosity of the tensor product vs the sum of component rugosities.

    Returns ``(lhs, rhs)`` where lhs is the rugosity of the product state and
    rhs the sum over components; the two agree to numerical precision, with
    infinity propagating through both sides.
    """
    matrices = [_matrix(r) for r in rhos]
    if not matrices:
        raise ValueError("rhos: need at least one state")
    product = matrices[0]
    for m in matrices[1:]:
        product = kron(product, m)
    lhs = rugosity(product)
    parts = [rugosity(m) for m in matrices]
    rhs = math.inf if any(math.isinf(p) for p in parts) else float(sum(parts))
    return lhs, rhs


@dataclass(frozen=True)
class TextureReading:
    """Texture functionals of one state."""

    dim: int
    grand_sum: float
    projective_probability: float
    rugosity: float


def texture_report(rho) -> TextureReading:
    """Evaluate all texture functionals of a state."""
    m = _matrix(rho)
    return TextureReading(
        dim=int(m.shape[0]),
        grand_sum=grand_sum(m),
        projective_probability=projective_probability(m),
        rugosity=rugosity(m),
    )
