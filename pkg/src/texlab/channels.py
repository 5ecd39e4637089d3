"""Kraus channels that create no texture, and audits of their action.

A channel is texture-free when every Kraus operator fixes the uniform-
superposition ket up to a scalar. Such channels can never decrease the grand
sum of a state: completeness forces the cross term between the uniform
component and its orthogonal complement to vanish, leaving a non-negative
gain. The constructor implemented here additionally maps the second Fourier
ket onto an arbitrary chosen target state, which makes every state reachable
from that maximally-textured source.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_complex_matrix, as_ket
from .serialize import parse_complex_field
from .states import DensityOperator, fourier_ket

#: Frobenius tolerance on sum(K^dag K) = identity.
COMPLETENESS_ATOL = 1e-10

#: Tolerance used when certifying that operators fix the uniform ket.
FREE_RESIDUAL_ATOL = 1e-10

#: Eigenvalues of a mixed conversion target below this weight are dropped.
TARGET_WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    dim: int
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim: must be a positive integer, got {self.dim}")
        ops = []
        for i, op in enumerate(self.operators):
            m = as_complex_matrix(op, name=f"operators[{i}]")
            if m.shape != (self.dim, self.dim):
                raise ValueError(
                    f"operators[{i}]: shape {m.shape} does not match dim {self.dim}"
                )
            m.setflags(write=False)
            ops.append(m)
        if not ops:
            raise ValueError("operators: need at least one Kraus operator")
        object.__setattr__(self, "operators", tuple(ops))
        residual = self.completeness_residual()
        if residual > COMPLETENESS_ATOL:
            raise ValueError(
                f"operators: completeness residual {residual!r} exceeds "
                f"{COMPLETENESS_ATOL}"
            )

    def completeness_residual(self) -> float:
        """Frobenius distance of sum(K^dag K) from the identity."""
        acc = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for op in self.operators:
            acc += op.conj().T @ op
        return float(np.linalg.norm(acc - np.eye(self.dim)))


def apply_channel(channel: KrausChannel, rho: DensityOperator) -> DensityOperator:
    """Apply the channel: sum over K rho K^dag."""
    if rho.dim != channel.dim:
        raise ValueError(
            f"rho: dim {rho.dim} does not match channel dim {channel.dim}"
        )
    out = np.zeros((channel.dim, channel.dim), dtype=np.complex128)
    for op in channel.operators:
        out += op @ rho.matrix @ op.conj().T
    out = 0.5 * (out + out.conj().T)
    return DensityOperator(out)


@dataclass(frozen=True)
class FreeChannelCertificate:
    """Evidence that every Kraus operator fixes the uniform ket.

    ``weights[n]`` is the scalar by which operator n scales the uniform ket;
    ``max_residual`` is the largest norm of the off-scalar remainder, and
    ``weight_norm_residual`` is |sum |weights|^2 - 1|.
    """

    max_residual: float
    weights: np.ndarray
    weight_norm_residual: float

    @property
    def is_free(self) -> bool:
        return self.max_residual <= FREE_RESIDUAL_ATOL


def texture_free_certificate(channel: KrausChannel) -> FreeChannelCertificate:
    """Certify that the channel's Kraus operators all fix the uniform ket."""
    f1 = fourier_ket(channel.dim, 1)
    weights = np.empty(len(channel.operators), dtype=np.complex128)
    max_residual = 0.0
    for n, op in enumerate(channel.operators):
        image = op @ f1
        weights[n] = np.vdot(f1, image)
        max_residual = max(max_residual, float(np.linalg.norm(image - weights[n] * f1)))
    weight_norm_residual = float(abs(np.sum(np.abs(weights) ** 2) - 1.0))
    return FreeChannelCertificate(
        max_residual=max_residual,
        weights=weights,
        weight_norm_residual=weight_norm_residual,
    )


def _free_operators_for_target(target: np.ndarray) -> list[np.ndarray]:
    """Kraus family fixing the uniform ket and steering the second Fourier
    ket onto ``target``.

    For each cyclic shift l and phase index n the operator is
    (1/D) * (P1 + omega^n / sqrt(D) * S_l), where P1 projects onto the
    uniform ket and S_l couples the shifted target amplitudes to the
    deviation of each column from the uniform average.
    """
    dim = target.shape[0]
    omega = np.exp(2j * np.pi / dim)
    p1 = np.full((dim, dim), 1.0 / dim, dtype=np.complex128)
    i = np.arange(dim)
    column_phases = omega ** (-i)
    ops: list[np.ndarray] = []
    for shift in range(dim):
        rows = (i + shift) % dim
        m1 = np.zeros((dim, dim), dtype=np.complex128)
        m1[rows, i] = column_phases * target[rows]
        w = m1.sum(axis=1)
        s = dim * m1 - np.outer(w, np.ones(dim))
        for n in range(1, dim + 1):
            ops.append((p1 + (omega**n / np.sqrt(dim)) * s) / dim)
    return ops


def build_free_channel(dim: int, target) -> KrausChannel:
    """Texture-free channel with dim^2 operators mapping the second Fourier
    ket onto the pure state ``target``.
    """
    target = as_ket(target, name="target")
    if target.shape != (dim,):
        raise ValueError(f"target: expected length {dim}, got {target.shape}")
    return KrausChannel(dim=dim, operators=tuple(_free_operators_for_target(target)))


def build_free_channel_mixed(dim: int, ensemble) -> KrausChannel:
    """Texture-free channel steering the second Fourier ket onto the mixture
    sum_k q_k |psi_k><psi_k|.

    ``ensemble`` is a sequence of (weight, ket) pairs with weights summing to
    one; each component's operator family is scaled by sqrt(weight).
    """
    pairs = [(float(q), as_ket(psi, name=f"ensemble[{k}] ket")) for k, (q, psi) in enumerate(ensemble)]
    if not pairs:
        raise ValueError("ensemble: need at least one component")
    total = sum(q for q, _ in pairs)
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"ensemble: weights sum to {total!r}, expected 1")
    ops: list[np.ndarray] = []
    for q, psi in pairs:
        if q < 0.0:
            raise ValueError(f"ensemble: negative weight {q!r}")
        if psi.shape != (dim,):
            raise ValueError(f"ensemble: ket length {psi.shape} does not match dim {dim}")
        scale = np.sqrt(q)
        ops.extend(scale * op for op in _free_operators_for_target(psi))
    return KrausChannel(dim=dim, operators=tuple(ops))


def convert_from_f2(target: DensityOperator) -> KrausChannel:
    """Texture-free channel mapping the second Fourier ket's projector onto
    an arbitrary target density operator.

    The target is eigendecomposed; eigenvalues below ``TARGET_WEIGHT_FLOOR``
    are dropped and the remaining weights renormalized. The round trip is
    verified to 1e-8.
    """
    vals, vecs = np.linalg.eigh(target.matrix)
    keep = vals > TARGET_WEIGHT_FLOOR
    if not np.any(keep):
        raise ValueError("target: no eigenvalue above the weight floor")
    weights = vals[keep]
    weights = weights / weights.sum()
    kets = [vecs[:, j].copy() for j in np.nonzero(keep)[0]]
    channel = build_free_channel_mixed(target.dim, list(zip(weights, kets)))
    f2 = DensityOperator.from_ket(fourier_ket(target.dim, 2))
    image = apply_channel(channel, f2)
    err = float(np.linalg.norm(image.matrix - target.matrix))
    if err > 1e-8:
        raise ValueError(f"target: conversion round-trip residual {err!r} exceeds 1e-8")
    return channel


@dataclass(frozen=True)
class F1Decomposition:
    """Split of a ket into its uniform component and orthogonal remainder.

    phi = zeta * f1 + zeta_perp * g_perp with zeta_perp >= 0 real and g_perp
    a unit ket orthogonal to f1 (None when the remainder vanishes). The
    grand sum of phi equals dim * |zeta|^2.
    """

    zeta: complex
    zeta_perp: float
    g_perp: np.ndarray | None
    sigma: float


def decompose_against_f1(phi) -> F1Decomposition:
    """Decompose a pure state against the uniform-superposition ket."""
    phi = as_ket(phi, name="phi")
    dim = phi.shape[0]
    f1 = fourier_ket(dim, 1)
    zeta = complex(np.vdot(f1, phi))
    remainder = phi - zeta * f1
    zeta_perp = float(np.linalg.norm(remainder))
    g_perp = remainder / zeta_perp if zeta_perp > 1e-14 else None
    return F1Decomposition(
        zeta=zeta,
        zeta_perp=zeta_perp,
        g_perp=g_perp,
        sigma=float(dim * abs(zeta) ** 2),
    )


@dataclass(frozen=True)
class MonotonicityAudit:
    """Grand-sum accounting for one (channel, state) pair.

    ``predicted_gain`` is the closed-form non-negative gain computed from the
    channel's action on the orthogonal complement of the uniform ket;
    ``gain_residual`` is |sigma_after - sigma_before - predicted_gain|.
    """

    sigma_before: float
    sigma_after: float
    predicted_gain: float
    gain_residual: float
    completeness_residual: float


def _pure_gain(channel: KrausChannel, phi: np.ndarray) -> float:
    """Closed-form grand-sum gain of a texture-free channel on a pure input."""
    dec = decompose_against_f1(phi)
    if dec.g_perp is None:
        return 0.0
    f1 = fourier_ket(channel.dim, 1)
    total = 0.0
    for op in channel.operators:
        total += abs(np.vdot(f1, op @ dec.g_perp)) ** 2
    return float(channel.dim * dec.zeta_perp**2 * total)


def monotonicity_audit(channel: KrausChannel, rho: DensityOperator) -> MonotonicityAudit:
    """Audit the grand-sum gain identity on one state.

    Mixed states are eigendecomposed and the pure-state gain is averaged with
    the eigenvalue weights (the grand sum is linear in the state).
    """
    from .texture import grand_sum  # local import to avoid a cycle

    sigma_before = grand_sum(rho)
    sigma_after = grand_sum(apply_channel(channel, rho))
    vals, vecs = np.linalg.eigh(rho.matrix)
    predicted = 0.0
    for j, weight in enumerate(vals):
        if weight <= TARGET_WEIGHT_FLOOR:
            continue
        ket = vecs[:, j]
        ket = ket / np.linalg.norm(ket)
        predicted += float(weight) * _pure_gain(channel, ket)
    return MonotonicityAudit(
        sigma_before=sigma_before,
        sigma_after=sigma_after,
        predicted_gain=predicted,
        gain_residual=float(abs(sigma_after - sigma_before - predicted)),
        completeness_residual=channel.completeness_residual(),
    )


def channel_to_json_dict(channel: KrausChannel) -> dict:
    """JSON-ready dict with complex entries as [real, imag] pairs."""
    return {
        "dim": channel.dim,
        "operators": [
            [[[float(z.real), float(z.imag)] for z in row] for row in op]
            for op in channel.operators
        ],
    }


def channel_from_json_dict(data: dict) -> KrausChannel:
    """Parse the dict produced by ``channel_to_json_dict``."""
    if not isinstance(data, dict):
        raise ValueError(f"channel: expected an object, got {type(data).__name__}")
    if "dim" not in data:
        raise ValueError("channel: missing field 'dim'")
    dim = data["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ValueError(f"dim: must be a positive integer, got {dim!r}")
    raw_ops = data.get("operators")
    if not isinstance(raw_ops, list) or not raw_ops:
        raise ValueError("operators: expected a non-empty list")
    ops = []
    for n, raw in enumerate(raw_ops):
        if not isinstance(raw, list) or len(raw) != dim:
            raise ValueError(f"operators[{n}]: expected {dim} rows")
        op = np.zeros((dim, dim), dtype=np.complex128)
        for r, row in enumerate(raw):
            if not isinstance(row, list) or len(row) != dim:
                raise ValueError(f"operators[{n}][{r}]: expected {dim} entries")
            for c, entry in enumerate(row):
                op[r, c] = parse_complex_field(entry, name=f"operators[{n}][{r}][{c}]")
        ops.append(op)
    return KrausChannel(dim=dim, operators=tuple(ops))
