"""State constructions: Fourier kets, density operators, Bloch coordinates,
Haar-random qubits, and two-state reference bases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_complex_matrix, as_ket

#: Hermiticity / trace tolerances for density-operator validation.
HERMITICITY_ATOL = 1e-10
TRACE_ATOL = 1e-10

#: Most negative eigenvalue a density operator may carry (numerical slack).
EIGENVALUE_FLOOR = -1e-10

#: Slack on the Bloch-ball radius constraint |v| <= 1.
BLOCH_NORM_SLACK = 1e-12

#: Normalization tolerance for two-state basis amplitudes.
BASIS_NORM_ATOL = 1e-10


def fourier_ket(dim: int, index: int) -> np.ndarray:
    """k-th discrete-Fourier basis ket of a ``dim``-level system (1-based).

    Component j (1-based) is exp(2*pi*i*(index-1)*(j-1)/dim) / sqrt(dim).
    ``index=1`` gives the uniform-superposition ket.
    """
    if dim < 1:
        raise ValueError(f"dim: must be a positive integer, got {dim}")
    if not 1 <= index <= dim:
        raise ValueError(f"index: must lie in 1..{dim}, got {index}")
    j = np.arange(dim)
    phases = np.exp(2j * np.pi * (index - 1) * j / dim)
    return phases / np.sqrt(dim)


def fourier_matrix(dim: int) -> np.ndarray:
    """Unitary whose k-th column is ``fourier_ket(dim, k)``."""
    return np.stack([fourier_ket(dim, k) for k in range(1, dim + 1)], axis=1)


@dataclass(frozen=True)
class DensityOperator:
    """Validated density operator (Hermitian, unit trace).

    Positivity is not enforced at construction; call ``validate_positive``
    where the eigenvalue floor matters.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix, name="matrix")
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix: must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_ATOL:
            raise ValueError(
                f"matrix: not Hermitian within {HERMITICITY_ATOL}"
            )
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > TRACE_ATOL:
            raise ValueError(f"matrix: trace {trace!r} is not 1 within {TRACE_ATOL}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate_positive(self) -> np.ndarray:
        """Return the eigenvalues, raising if any falls below the floor."""
        vals = np.linalg.eigvalsh(self.matrix)
        if vals[0] < EIGENVALUE_FLOOR:
            raise ValueError(
                f"matrix: eigenvalue {vals[0]!r} below floor {EIGENVALUE_FLOOR}"
            )
        return vals

    @classmethod
    def from_ket(cls, vector) -> "DensityOperator":
        v = as_ket(vector)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        if dim < 1:
            raise ValueError(f"dim: must be a positive integer, got {dim}")
        return cls(np.eye(dim, dtype=np.complex128) / dim)


@dataclass(frozen=True)
class BlochVector:
    """Real Bloch-ball coordinates of a qubit state (|v| <= 1)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name}: must be finite, got {value!r}")
        norm = float(np.sqrt(self.x**2 + self.y**2 + self.z**2))
        if norm > 1.0 + BLOCH_NORM_SLACK:
            raise ValueError(f"(x, y, z): norm {norm!r} exceeds the Bloch ball")


def qubit_from_bloch(v: BlochVector) -> DensityOperator:
    """Qubit density operator (I + x*sx + y*sy + z*sz) / 2."""
    m = 0.5 * np.array(
        [[1.0 + v.z, v.x - 1j * v.y], [v.x + 1j * v.y, 1.0 - v.z]],
        dtype=np.complex128,
    )
    return DensityOperator(m)


def bloch_of(rho: DensityOperator) -> BlochVector:
    """Bloch coordinates of a qubit density operator."""
    if rho.dim != 2:
        raise ValueError(f"rho: expected a qubit (dim 2), got dim {rho.dim}")
    m = rho.matrix
    return BlochVector(
        x=float(2.0 * m[1, 0].real),
        y=float(2.0 * m[1, 0].imag),
        z=float((m[0, 0] - m[1, 1]).real),
    )


@dataclass(frozen=True)
class HaarQubitSample:
    """Haar-random pure qubit drawn as polar angles.

    theta in [0, pi] with cos(theta) uniform on [-1, 1]; phi uniform on
    [0, 2*pi). The ket relative to a reference basis (|+>, |->) is
    cos(theta/2) |+> + exp(i*phi) sin(theta/2) |->.
    """

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError(f"theta: must lie in [0, pi], got {self.theta!r}")
        if not 0.0 <= self.phi < 2.0 * np.pi:
            raise ValueError(f"phi: must lie in [0, 2*pi), got {self.phi!r}")

    @property
    def amplitude_plus(self) -> float:
        """Real amplitude on the |+> reference ket."""
        return float(np.cos(self.theta / 2.0))

    @property
    def amplitude_minus(self) -> complex:
        """Complex amplitude on the |-> reference ket."""
        return complex(np.exp(1j * self.phi) * np.sin(self.theta / 2.0))


def sample_haar_angles(rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized draw of ``count`` Haar qubit angle pairs (theta, phi).

    Consumes exactly two uniforms per sample, in sample order.
    """
    if count < 0:
        raise ValueError(f"count: must be non-negative, got {count}")
    u = rng.random(size=(count, 2))
    theta = np.arccos(1.0 - 2.0 * u[:, 0])
    phi = 2.0 * np.pi * u[:, 1]
    return theta, phi


def sample_haar_qubit(rng: np.random.Generator) -> HaarQubitSample:
    """Draw a single Haar-random qubit sample."""
    theta, phi = sample_haar_angles(rng, 1)
    return HaarQubitSample(theta=float(theta[0]), phi=float(phi[0]))


@dataclass(frozen=True)
class QubitBasis:
    """Orthonormal two-state basis |+> = alpha|1> + beta|2>,
    |-> = conj(beta)|1> - conj(alpha)|2>.

    The pair (alpha, beta) is normalized within ``BASIS_NORM_ATOL``. Only the
    simultaneous sign flip (alpha, beta) -> (-alpha, -beta) is redundant; any
    other relative phase produces a physically distinct basis.
    """

    alpha: complex
    beta: complex

    def __post_init__(self):
        a = complex(self.alpha)
        b = complex(self.beta)
        if not (np.isfinite(a.real) and np.isfinite(a.imag)):
            raise ValueError(f"alpha: must be finite, got {a!r}")
        if not (np.isfinite(b.real) and np.isfinite(b.imag)):
            raise ValueError(f"beta: must be finite, got {b!r}")
        norm_sq = abs(a) ** 2 + abs(b) ** 2
        if abs(norm_sq - 1.0) > BASIS_NORM_ATOL:
            raise ValueError(
                f"(alpha, beta): |alpha|^2 + |beta|^2 = {norm_sq!r} is not 1 "
                f"within {BASIS_NORM_ATOL}"
            )
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    def plus_ket(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=np.complex128)

    def minus_ket(self) -> np.ndarray:
        return np.array(
            [np.conj(self.beta), -np.conj(self.alpha)], dtype=np.complex128
        )

    def matrix(self) -> np.ndarray:
        """Unitary with columns (|+>, |->); determinant is always -1."""
        return np.stack([self.plus_ket(), self.minus_ket()], axis=1)

    @classmethod
    def computational(cls) -> "QubitBasis":
        return cls(alpha=1.0 + 0.0j, beta=0.0 + 0.0j)

    @classmethod
    def from_plus_ket(cls, vector) -> "QubitBasis":
        v = as_ket(vector, name="plus ket")
        if v.shape != (2,):
            raise ValueError(f"plus ket: expected length 2, got {v.shape}")
        return cls(alpha=complex(v[0]), beta=complex(v[1]))


def ket_in_basis(sample: HaarQubitSample, basis: QubitBasis) -> np.ndarray:
    """Computational-coordinate ket of ``sample`` drawn relative to ``basis``."""
    a = sample.amplitude_plus
    b = sample.amplitude_minus
    return a * basis.plus_ket() + b * basis.minus_ket()


def basis_distance(a: QubitBasis, b: QubitBasis) -> float:
    """Amplitude distance between bases, minimized over the global sign."""
    va = np.array([a.alpha, a.beta])
    vb = np.array([b.alpha, b.beta])
    return float(min(np.linalg.norm(va - vb), np.linalg.norm(va + vb)))
