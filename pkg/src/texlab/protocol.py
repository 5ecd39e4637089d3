"""Randomized identification of hidden-basis circuit layers.

The protocol feeds identical Haar-random qubits into every track of an
unknown layer and records each track's mean grand sum in the computational
and in the Fourier measurement basis. Single-qubit tracks average to (1, 1);
the two tracks of a CNOT deviate, and their deviations are functions of the
hidden basis (alpha, beta) = (|alpha| e^{i lambda}, |beta| e^{i chi}):

* control track:  X  = 1 - (Re alpha^2 - Re beta^2) / 3
                  Y  = 1 + 2 Re(alpha beta) / 3
* target track:   X~ = 1 + 2 Re(conj(alpha) beta) / 3
                  Y~ = 1 + (|alpha|^2 - |beta|^2) / 3

The combined deviation of a CNOT pair is bounded below by 1/9, so a
threshold test detects every CNOT. The averages invert to a small family of
candidate bases; deterministic probe runs polish the candidates to machine
precision, select the consistent ones, pair controls with targets, pin the
remaining physical phase of the basis, and classify the single-qubit gates
against the dictionary {I, H, T, S}.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .circuit import (
    CircuitLayer,
    CnotGate,
    GateKind,
    SingleGate,
    gate_matrix,
    run_layer_with_inputs,
    standard_gate_matrix,
)
from .linalg import principal_eigenvector
from .serialize import ARTIFACT_VERSION, format_float
from .states import QubitBasis, basis_distance

DEFAULT_TRIALS = 100_000
DEFAULT_TAU = 0.05

#: Fidelity a probe output must reach to count as "the expected state".
PASS_FIDELITY = 1.0 - 1e-9

#: Frobenius tolerance for matching a reconstructed gate to the dictionary.
GATE_MATCH_ATOL = 1e-8

#: |beta|^2 (or |alpha|^2) below this means the association branch is treated
#: as "hidden basis coincides with the computational one up to relabeling".
DEGENERACY_FLOOR = 0.01

#: Minimum squared overlap between a candidate and its polished fixed point.
#: The spurious fixed rays of a CNOT sit at squared overlap 1/2 from the true
#: basis ket, so 0.7 separates refinement from capture by a wrong fixed point.
BASIN_MIN_OVERLAP = 0.7

#: Worker chunk length for the vectorized trial engine.
_CHUNK = 16_384

#: Key tag of the derived stream used for shot-noise binomials.
_SHOT_TAG = 0x53484F54


class IdentificationError(RuntimeError):
    """Raised when the protocol cannot reach a consistent reconstruction."""


# ---------------------------------------------------------------------------
# expected averages and detection margins


def _expected_averages_arrays(alpha, beta):
    """Vectorized Haar-averaged grand sums (X, X~, Y, Y~) of a CNOT."""
    alpha = np.asarray(alpha, dtype=np.complex128)
    beta = np.asarray(beta, dtype=np.complex128)
    x = 1.0 - ((alpha**2).real - (beta**2).real) / 3.0
    xt = 1.0 + 2.0 * (np.conj(alpha) * beta).real / 3.0
    y = 1.0 + 2.0 * (alpha * beta).real / 3.0
    yt = 1.0 + (np.abs(alpha) ** 2 - np.abs(beta) ** 2) / 3.0
    return x, xt, y, yt


def expected_averages(basis: QubitBasis) -> tuple[float, float, float, float]:
    """Haar-averaged grand sums (X, X~, Y, Y~) of a CNOT in ``basis``."""
    x, xt, y, yt = _expected_averages_arrays(basis.alpha, basis.beta)
    return float(x), float(xt), float(y), float(yt)


def detectability_margin(basis: QubitBasis) -> float:
    """Sum of the squared deviations of all four CNOT averages from 1.

    Writing alpha = a e^{i lambda}, beta = b e^{i chi}, the sum equals
    ((a^2 cos 2 lambda + b^2 cos 2 chi)^2 + 1) / 9, so it is bounded below
    by 1/9 for every basis (equality on the family where the bracket
    vanishes). The worst single-track deviation of a CNOT is therefore at
    least 1/6, comfortably above the default threshold tau.
    """
    x, xt, y, yt = expected_averages(basis)
    return (
        (x - 1.0) ** 2 + (xt - 1.0) ** 2 + (y - 1.0) ** 2 + (yt - 1.0) ** 2
    )


def noise_interval(p: float, q: float) -> tuple[float, float]:
    """Interval that contains every noisy CNOT-track average.

    With input white noise p and CNOT dropout q the deviation of each mean
    from 1 shrinks by (1-p)(1-q), so means lie in 1 +- (1+qp-p-q)/3.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p: must lie in [0, 1], got {p!r}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q: must lie in [0, 1], got {q!r}")
    width = (1.0 + q * p - p - q) / 3.0
    return 1.0 - width, 1.0 + width


# ---------------------------------------------------------------------------
# randomized trial engine


@dataclass(frozen=True)
class TrackStats:
    """Mean grand sums of one track over the randomized trials.

    ``x_like`` is the computational-basis mean, ``y_like`` the Fourier-basis
    mean. With a single trial the standard errors are reported as 0.0.
    """

    track: int
    x_like: float
    y_like: float
    stderr_x: float
    stderr_y: float
    trials: int

    def deviation(self) -> float:
        return max(abs(self.x_like - 1.0), abs(self.y_like - 1.0))


def _thread_count() -> int:
    env = os.environ.get("TEXLAB_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"TEXLAB_THREADS: expected an integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"TEXLAB_THREADS: must be >= 1, got {n}")
        return n
    return min(8, os.cpu_count() or 1)


def master_generator(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by the master seed.

    Trial t of the protocol consumes stream positions 2t and 2t+1, so the
    trial inputs are a pure function of (seed, trial index) independent of
    chunking and worker count.
    """
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ValueError(f"seed: expected an integer, got {seed!r}")
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed: must lie in [0, 2^64), got {seed}")
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _shot_generator(seed: int) -> np.random.Generator:
    key = np.array([np.uint64(seed), np.uint64(_SHOT_TAG)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def run_protocol(
    layer: CircuitLayer,
    *,
    seed: int,
    trials: int = DEFAULT_TRIALS,
    shots: int | None = None,
) -> list[TrackStats]:
    """Estimate every track's mean grand sums over randomized trials.

    Each trial draws one Haar-random qubit (two uniforms from the seeded
    counter-based stream) and feeds identical copies into all tracks; the
    exact per-trial grand sums are computed in both measurement bases, with
    the layer's noise parameters entering as exact per-run mixtures. With
    ``shots`` set, each exact value is replaced by a binomial estimate drawn
    from a second derived stream in fixed track-major order.

    The per-trial work is split into fixed-size chunks executed by a thread
    pool capped by TEXLAB_THREADS; results are byte-identical for any worker
    count because the chunks write disjoint slices of preallocated arrays and
    all randomness is drawn outside the pool.
    """
    if trials < 1:
        raise ValueError(f"trials: must be a positive integer, got {trials}")
    if shots is not None and shots < 1:
        raise ValueError(f"shots: must be a positive integer, got {shots}")
    gen = master_generator(seed)
    u = gen.random(size=(trials, 2))
    cos_theta = 1.0 - 2.0 * u[:, 0]
    phi = 2.0 * np.pi * u[:, 1]
    a = np.sqrt((1.0 + cos_theta) / 2.0)
    b = np.exp(1j * phi) * np.sqrt((1.0 - cos_theta) / 2.0)
    alpha = layer.hidden_basis.alpha
    beta = layer.hidden_basis.beta
    psi = np.empty((trials, 2), dtype=np.complex128)
    psi[:, 0] = a * alpha + b * np.conj(beta)
    psi[:, 1] = a * beta - b * np.conj(alpha)

    p, q = layer.noise
    singles = [
        (track, gate_matrix(kind, layer.hidden_basis))
        for track, kind in sorted(layer.single_assignments().items())
    ]
    pairs = [
        (c, t, gate_matrix(GateKind.CNOT, layer.hidden_basis))
        for c, t in layer.cnot_pairs()
    ]
    comp = np.empty((layer.num_tracks, trials), dtype=np.float64)
    four = np.empty((layer.num_tracks, trials), dtype=np.float64)

    def fill(start: int, stop: int) -> None:
        ps = psi[start:stop]
        s_in_comp = np.abs(ps[:, 0] + ps[:, 1]) ** 2
        s_in_four = 2.0 * np.abs(ps[:, 0]) ** 2
        for track, u2 in singles:
            out = ps @ u2.T
            sc = np.abs(out[:, 0] + out[:, 1]) ** 2
            sf = 2.0 * np.abs(out[:, 0]) ** 2
            comp[track, start:stop] = (1.0 - p) * sc + p
            four[track, start:stop] = (1.0 - p) * sf + p
        for control, target, u4 in pairs:
            joint = np.einsum("ti,tj->tij", ps, ps).reshape(-1, 4)
            out = (joint @ u4.T).reshape(-1, 2, 2)
            col_sums = out.sum(axis=1)
            row_sums = out.sum(axis=2)
            sc_c = (np.abs(col_sums) ** 2).sum(axis=1)
            sf_c = 2.0 * (np.abs(out[:, 0, :]) ** 2).sum(axis=1)
            sc_t = (np.abs(row_sums) ** 2).sum(axis=1)
            sf_t = 2.0 * (np.abs(out[:, :, 0]) ** 2).sum(axis=1)
            keep = (1.0 - q) * (1.0 - p)
            drop = q * (1.0 - p)
            comp[control, start:stop] = keep * sc_c + drop * s_in_comp + p
            four[control, start:stop] = keep * sf_c + drop * s_in_four + p
            comp[target, start:stop] = keep * sc_t + drop * s_in_comp + p
            four[target, start:stop] = keep * sf_t + drop * s_in_four + p

    bounds = [(s, min(s + _CHUNK, trials)) for s in range(0, trials, _CHUNK)]
    workers = _thread_count()
    if workers == 1 or len(bounds) == 1:
        for start, stop in bounds:
            fill(start, stop)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda se: fill(*se), bounds))

    if shots is not None:
        shot_gen = _shot_generator(seed)
        for track in range(layer.num_tracks):
            for arr in (comp, four):
                prob = np.clip(arr[track] / 2.0, 0.0, 1.0)
                arr[track] = 2.0 * shot_gen.binomial(shots, prob) / shots

    stats = []
    for track in range(layer.num_tracks):
        x_vals = comp[track]
        y_vals = four[track]
        if trials > 1:
            se_x = float(np.std(x_vals, ddof=1) / math.sqrt(trials))
            se_y = float(np.std(y_vals, ddof=1) / math.sqrt(trials))
        else:
            se_x = se_y = 0.0
        stats.append(
            TrackStats(
                track=track,
                x_like=float(np.mean(x_vals)),
                y_like=float(np.mean(y_vals)),
                stderr_x=se_x,
                stderr_y=se_y,
                trials=trials,
            )
        )
    return stats


# ---------------------------------------------------------------------------
# detection


def _consistent(s1: TrackStats, s2: TrackStats) -> bool:
    tol_x = 5.0 * math.hypot(s1.stderr_x, s2.stderr_x) + 0.005
    tol_y = 5.0 * math.hypot(s1.stderr_y, s2.stderr_y) + 0.005
    return abs(s1.x_like - s2.x_like) <= tol_x and abs(s1.y_like - s2.y_like) <= tol_y


def _signature_clusters(members: list[TrackStats]) -> list[list[TrackStats]]:
    clusters: list[list[TrackStats]] = []
    for stat in members:
        for cluster in clusters:
            if all(_consistent(stat, other) for other in cluster):
                cluster.append(stat)
                break
        else:
            clusters.append([stat])
    return clusters


def detect_cnot_tracks(
    stats: list[TrackStats], tau: float = DEFAULT_TAU
) -> tuple[list[int], list[int]]:
    """Split tracks into detected CNOT tracks and ambiguous tracks.

    A track is detected when its worst-basis deviation from 1 exceeds
    ``tau``. A sub-threshold track is ambiguous when its deviation plus three
    standard errors still reaches ``tau``, or structurally when the detected
    tracks do not split into two equal-size statistical signature clusters
    (then some partner tracks must be hiding below threshold, and every
    sub-threshold track is flagged for probing).
    """
    if not 0.0 < tau < 1.0 / 3.0:
        raise ValueError(f"tau: must lie in (0, 1/3), got {tau!r}")
    detected = [s for s in stats if s.deviation() > tau]
    sub = [s for s in stats if s.deviation() <= tau]
    detected_ids = sorted(s.track for s in detected)
    structural = False
    if detected:
        clusters = _signature_clusters(detected)
        sizes = sorted(len(c) for c in clusters)
        structural = not (len(clusters) == 2 and sizes[0] == sizes[1])
    if structural:
        ambiguous_ids = sorted(s.track for s in sub)
    else:
        ambiguous_ids = sorted(
            s.track
            for s in sub
            if max(
                abs(s.x_like - 1.0) + 3.0 * s.stderr_x,
                abs(s.y_like - 1.0) + 3.0 * s.stderr_y,
            )
            > tau
        )
    return detected_ids, ambiguous_ids


# ---------------------------------------------------------------------------
# candidate recovery from the averages


@dataclass(frozen=True)
class CandidateBasis:
    """One hidden-basis hypothesis recovered from the track averages.

    ``sign_choice`` records the signs chosen for (sin lambda, sin chi);
    ``swapped`` marks the control/target association branch; ``degenerate``
    marks candidates produced by the coinciding-basis short-circuit.
    """

    basis: QubitBasis
    sign_choice: tuple[int, int]
    swapped: bool
    degenerate: bool = False


def _branch_candidates(
    x: float, xt: float, y: float, yt: float, stderr: float, swapped: bool
) -> list[CandidateBasis]:
    tol_edge = max(10.0 * stderr, 1e-9)
    tol_fit = max(6.0 * stderr, 1e-9)
    r_alpha = 1.5 * yt - 1.0
    if r_alpha < -tol_edge or r_alpha > 1.0 + tol_edge:
        return []
    r_alpha = min(1.0, max(0.0, r_alpha))
    if r_alpha > 1.0 - DEGENERACY_FLOOR:
        return [
            CandidateBasis(
                basis=QubitBasis(alpha=1.0, beta=0.0),
                sign_choice=(1, 1),
                swapped=swapped,
                degenerate=True,
            )
        ]
    if r_alpha < DEGENERACY_FLOOR:
        return [
            CandidateBasis(
                basis=QubitBasis(alpha=0.0, beta=1.0),
                sign_choice=(1, 1),
                swapped=swapped,
                degenerate=True,
            )
        ]
    mag_a = math.sqrt(r_alpha)
    mag_b = math.sqrt(1.0 - r_alpha)
    radius = math.hypot(yt - x, xt + y - 2.0)
    den_l = 4.0 * r_alpha / 3.0
    den_c = 4.0 * (1.0 - r_alpha) / 3.0
    cos_l = math.sqrt(min(1.0, max(0.0, ((yt - x) + radius) / den_l)))
    cos_c_abs = math.sqrt(min(1.0, max(0.0, ((x - yt) + radius) / den_c)))
    sin_l_abs = math.sqrt(max(0.0, 1.0 - cos_l**2))
    sin_c_abs = math.sqrt(max(0.0, 1.0 - cos_c_abs**2))
    scored: list[tuple[float, CandidateBasis]] = []
    for s_cc in (1, -1):
        for s_sl in (1, -1):
            for s_sc in (1, -1):
                alpha = mag_a * complex(cos_l, s_sl * sin_l_abs)
                beta = mag_b * complex(s_cc * cos_c_abs, s_sc * sin_c_abs)
                basis = QubitBasis(alpha=alpha, beta=beta)
                px, pxt, py, pyt = expected_averages(basis)
                err = max(
                    abs(px - x), abs(pxt - xt), abs(py - y), abs(pyt - yt)
                )
                scored.append(
                    (
                        err,
                        CandidateBasis(
                            basis=basis, sign_choice=(s_sl, s_sc), swapped=swapped
                        ),
                    )
                )
    # The inversion amplifies measurement noise by roughly 1/min(|alpha|^2,
    # |beta|^2), so sign combos are pruned relative to the best fit rather
    # than at a fixed multiple of the standard error; downstream probe runs
    # make the rigorous selection.
    best = min(err for err, _ in scored)
    keep = max(3.0 * best, tol_fit)
    cap = max(12.0 * stderr, 0.05)
    found: list[CandidateBasis] = []
    for err, cand in scored:
        if err > keep or err > cap:
            continue
        if all(basis_distance(cand.basis, other.basis) > 1e-9 for other in found):
            found.append(cand)
    return found


def recover_basis(averages, stderr: float = 0.0) -> list[CandidateBasis]:
    """Invert the four averages (X, X~, Y, Y~) into candidate bases.

    Both control/target associations are tried (the direct reading first,
    then the branch with X <-> X~ and Y <-> Y~ swapped), and within each
    branch every sign assignment for (cos chi, sin lambda, sin chi) that
    reproduces the measured averages within ``6 * stderr`` is kept
    (cos lambda >= 0 fixes the redundant global sign). Generic averages give
    two candidates per branch — a basis and its complex conjugate. A branch
    whose |alpha|^2 estimate sits within ``DEGENERACY_FLOOR`` of 0 or 1
    short-circuits to the relabeled computational basis.
    """
    x, xt, y, yt = (float(v) for v in averages)
    if stderr < 0.0:
        raise ValueError(f"stderr: must be non-negative, got {stderr!r}")
    out = _branch_candidates(x, xt, y, yt, stderr, swapped=False)
    for cand in _branch_candidates(xt, x, yt, y, stderr, swapped=True):
        if all(basis_distance(cand.basis, c.basis) > 1e-9 for c in out):
            out.append(cand)
    return out


def _pooled_pair_stats(
    stats: list[TrackStats], detected: list[int], ambiguous: list[int]
) -> tuple[tuple[float, float], tuple[float, float], float]:
    """Pool detected-track statistics into one (control-like, target-like)
    pair of (computational, Fourier) means plus a combined standard error.

    Clusters of identical signatures are pooled together; when only one
    signature is visible the partner slot is filled from the ambiguous
    tracks, or with the featureless point (1, 1) if there are none.
    """
    by_track = {s.track: s for s in stats}
    detected_stats = [by_track[t] for t in detected]
    clusters = _signature_clusters(detected_stats)
    clusters.sort(key=lambda c: (-len(c), min(s.track for s in c)))

    def pool(members: list[TrackStats]) -> tuple[float, float, float]:
        xs = [s.x_like for s in members]
        ys = [s.y_like for s in members]
        ses = [max(s.stderr_x, s.stderr_y) for s in members]
        k = len(members)
        return (
            float(np.mean(xs)),
            float(np.mean(ys)),
            float(math.sqrt(sum(se**2 for se in ses)) / k),
        )

    x1, y1, se1 = pool(clusters[0])
    if len(clusters) >= 2:
        x2, y2, se2 = pool(clusters[1])
    elif ambiguous:
        x2, y2, se2 = pool([by_track[t] for t in ambiguous])
    else:
        fallback = max(max(s.stderr_x, s.stderr_y) for s in detected_stats)
        x2, y2, se2 = 1.0, 1.0, fallback
    return (x1, y1), (x2, y2), max(se1, se2)


# ---------------------------------------------------------------------------
# deterministic probes: polish, selection, pairing, phase pinning


def _track_fidelity(rho: np.ndarray, ket: np.ndarray) -> float:
    return float(np.real(ket.conj() @ rho @ ket))


def _ray_distance(a: QubitBasis, b: QubitBasis) -> float:
    """1 - |<a+|b+>|^2: distance between the |+> rays, phase-insensitive."""
    return 1.0 - abs(np.vdot(a.plus_ket(), b.plus_ket())) ** 2


def _product_test_min_fidelity(
    layer: CircuitLayer, plus: np.ndarray, tracks
) -> float:
    outs = run_layer_with_inputs(layer, [plus] * layer.num_tracks)
    return min(_track_fidelity(outs[t].rho, plus) for t in tracks)


def _polish_candidate(
    layer: CircuitLayer,
    basis: QubitBasis,
    probe_tracks,
    required_tracks,
) -> np.ndarray | None:
    """Refine a candidate |+> ket to a fixed point of the layer's probes.

    Feeding a candidate into all tracks and replacing it with the principal
    eigenvector of a CNOT control output contracts quadratically onto the
    true |+>; target and identity tracks do not contract, so every probe
    track is tried and a result is accepted only if the iteration converges,
    stays inside the candidate's own basin (squared overlap >= 0.7 with the
    start), and then reaches fidelity PASS_FIDELITY on every required track.
    """
    n = layer.num_tracks
    for probe in probe_tracks:
        v = basis.plus_ket()
        v0 = v.copy()
        converged = False
        for _ in range(60):
            rho = run_layer_with_inputs(layer, [v] * n)[probe].rho
            w = principal_eigenvector(rho)
            overlap = np.vdot(v, w)
            if abs(overlap) > 1e-12:
                w = w * (np.conj(overlap) / abs(overlap))
            delta = float(np.linalg.norm(w - v))
            v = w
            if delta < 1e-13:
                converged = True
                break
        if not converged:
            continue
        if abs(np.vdot(v0, v)) ** 2 < BASIN_MIN_OVERLAP:
            continue
        if _product_test_min_fidelity(layer, v, required_tracks) >= PASS_FIDELITY:
            return v
    return None


def disambiguate(
    layer: CircuitLayer,
    candidates,
    cnot_tracks,
    ambiguous_tracks=(),
    *,
    allow_multiple: bool = False,
) -> list[CandidateBasis]:
    """Polish candidates and keep the ones whose |+> passes every detected
    CNOT track's product test at fidelity PASS_FIDELITY.

    Returns the polished passing candidates (duplicates merged). By default
    exactly one candidate must pass; with ``allow_multiple`` the caller is
    expected to resolve survivors with pairing and gate classification.
    """
    candidates = list(candidates)
    if not candidates:
        raise IdentificationError("no candidate bases were supplied")
    cnot_tracks = list(cnot_tracks)
    if not cnot_tracks:
        raise IdentificationError("no detected CNOT tracks to probe against")
    probe_tracks = cnot_tracks + [
        t for t in ambiguous_tracks if t not in cnot_tracks
    ]
    passing: list[CandidateBasis] = []
    for cand in candidates:
        v = _polish_candidate(layer, cand.basis, probe_tracks, cnot_tracks)
        if v is None:
            continue
        polished = replace(cand, basis=QubitBasis.from_plus_ket(v))
        merged = False
        for i, kept in enumerate(passing):
            if _ray_distance(kept.basis, polished.basis) < 1e-9:
                if polished.degenerate and not kept.degenerate:
                    passing[i] = polished
                merged = True
                break
        if not merged:
            passing.append(polished)
    if not passing:
        raise IdentificationError(
            "no candidate basis passes the CNOT product test"
        )
    if len(passing) > 1 and not allow_multiple:
        raise IdentificationError(
            f"{len(passing)} candidate bases pass the CNOT product test"
        )
    return passing


def pairing_probe(
    layer: CircuitLayer, basis: QubitBasis, candidate_tracks
) -> tuple[list[tuple[int, int]], list[int]]:
    """Pair CNOT controls with their targets by single-track |-> probes.

    Each unpaired candidate track receives |-> while every other track
    receives |+>; a unique other track flipping to |-> identifies the probed
    track as the control of that pair. Probing a target (or a non-CNOT
    track) flips nothing and the track is skipped — its control, probed
    later, recovers the pair. Returns (pairs, cleared) where ``cleared``
    are candidate tracks shown not to be CNOT members.
    """
    plus = basis.plus_ket()
    minus = basis.minus_ket()
    n = layer.num_tracks
    order = list(dict.fromkeys(candidate_tracks))
    taken: set[int] = set()
    pairs: list[tuple[int, int]] = []
    for track in order:
        if track in taken:
            continue
        kets = [plus] * n
        kets[track] = minus
        outs = run_layer_with_inputs(layer, kets)
        flips = [
            u
            for u in range(n)
            if u != track and _track_fidelity(outs[u].rho, minus) >= PASS_FIDELITY
        ]
        if len(flips) > 1:
            raise IdentificationError(
                f"pairing probe on track {track}: several tracks flipped ({flips})"
            )
        if len(flips) == 1:
            partner = flips[0]
            if partner in taken:
                raise IdentificationError(
                    f"pairing probe on track {track}: partner {partner} already paired"
                )
            pairs.append((track, partner))
            taken.add(track)
            taken.add(partner)
    cleared = [t for t in order if t not in taken]
    return pairs, cleared


def _pin_basis_phase(
    layer: CircuitLayer, basis: QubitBasis, pair: tuple[int, int]
) -> QubitBasis:
    """Fix the physical phase gamma in (alpha, beta) -> e^{i gamma}(alpha, beta).

    Probe runs only constrain the |+> ray; gamma is measured through the
    CNOT's flip operator: with the control in (|+>+|->)/sqrt(2) and the
    target in (|+>+|->)/sqrt(2) or (|+>+i|->)/sqrt(2), the control-output
    coherence <+|rho|-> equals cos(2 gamma)/2 and sin(2 gamma)/2. The
    returned basis absorbs e^{-i gamma} (gamma is determined up to pi, i.e.
    up to the redundant global sign).
    """
    control, target = pair
    plus = basis.plus_ket()
    minus = basis.minus_ket()
    s_state = (plus + minus) / np.sqrt(2.0)
    i_state = (plus + 1j * minus) / np.sqrt(2.0)
    n = layer.num_tracks

    def coherence(target_ket: np.ndarray) -> float:
        kets = [plus] * n
        kets[control] = s_state
        kets[target] = target_ket
        rho = run_layer_with_inputs(layer, kets)[control].rho
        return float(np.real(plus.conj() @ rho @ minus))

    cos_term = 2.0 * coherence(s_state)
    sin_term = 2.0 * coherence(i_state)
    gamma = 0.5 * math.atan2(sin_term, cos_term)
    phase = np.exp(-1j * gamma)
    pinned = QubitBasis(alpha=phase * basis.alpha, beta=phase * basis.beta)
    check_plus = pinned.plus_ket()
    check_minus = pinned.minus_ket()
    kets = [check_plus] * n
    kets[control] = (check_plus + check_minus) / np.sqrt(2.0)
    kets[target] = (check_plus + check_minus) / np.sqrt(2.0)
    rho = run_layer_with_inputs(layer, kets)[control].rho
    residual = abs(complex(check_plus.conj() @ rho @ check_minus) - 0.5)
    if residual > 1e-9:
        raise IdentificationError(
            f"phase pinning failed: coherence residual {residual:.3e}"
        )
    return pinned


def classify_single_qubit_gates(
    layer: CircuitLayer, basis: QubitBasis, tracks
) -> dict[int, str]:
    """Classify non-CNOT tracks against the dictionary {I, H, T, S}.

    Four probe runs (|+>, |->, their equal superposition, and the
    i-superposition, fed to all tracks at once) determine each track's
    unitary in hidden-basis coordinates up to a global phase: the first two
    probes give the columns as rays, the third fixes their relative phase,
    and the fourth must be consistent with the reconstruction. Tracks whose
    probe outputs are not pure, whose fourth probe disagrees, or whose matrix
    matches no dictionary gate are labeled "unknown".
    """
    plus = basis.plus_ket()
    minus = basis.minus_ket()
    probes = [
        plus,
        minus,
        (plus + minus) / np.sqrt(2.0),
        (plus + 1j * minus) / np.sqrt(2.0),
    ]
    n = layer.num_tracks
    outputs = [run_layer_with_inputs(layer, [p] * n) for p in probes]
    b_matrix = basis.matrix()
    labels: dict[int, str] = {}
    for track in tracks:
        kets = []
        pure = True
        for out in outputs:
            rho = out[track].rho
            purity = float(np.real(np.trace(rho @ rho)))
            if purity < 1.0 - 1e-10:
                pure = False
                break
            kets.append(principal_eigenvector(rho))
        if not pure:
            labels[track] = "unknown"
            continue
        u1, u2, u3, u4 = kets
        a1 = np.vdot(u3, u1)
        a2 = np.vdot(u3, u2)
        delta = np.angle(a1) - np.angle(a2)
        u_tilde = np.column_stack([u1, np.exp(1j * delta) * u2])
        predicted4 = u_tilde @ (np.array([1.0, 1.0j]) / np.sqrt(2.0))
        if abs(np.vdot(u4, predicted4)) ** 2 < PASS_FIDELITY:
            labels[track] = "unknown"
            continue
        m = b_matrix.conj().T @ u_tilde
        label = "unknown"
        for kind in (GateKind.IDENTITY, GateKind.HADAMARD, GateKind.T, GateKind.S):
            g = standard_gate_matrix(kind)
            phase = np.angle(np.trace(g.conj().T @ m))
            if np.linalg.norm(m - np.exp(1j * phase) * g) <= GATE_MATCH_ATOL:
                label = kind.value
                break
        labels[track] = label
    return labels


# ---------------------------------------------------------------------------
# full pipeline


@dataclass(frozen=True)
class ProtocolReport:
    """Complete outcome of one identification run."""

    num_tracks: int
    seed: int
    trials: int
    tau: float
    shots: int | None
    noise: tuple[float, float]
    track_stats: tuple[TrackStats, ...]
    cnot_tracks: tuple[int, ...]
    ambiguous_tracks: tuple[int, ...]
    candidates: tuple[CandidateBasis, ...]
    selected: CandidateBasis | None
    cnot_pairs: tuple[tuple[int, int], ...]
    gates: dict[int, str]
    status: str
    notes: tuple[str, ...]

    def __post_init__(self):
        if self.status not in ("full", "partial"):
            raise ValueError(f"status: expected 'full' or 'partial', got {self.status!r}")
        if self.selected is not None and all(
            self.selected is not c for c in self.candidates
        ):
            raise ValueError("selected: must be drawn from candidates")
        overlap = set(self.cnot_tracks) & set(self.ambiguous_tracks)
        if overlap:
            raise ValueError(f"ambiguous_tracks: overlap with cnot_tracks ({sorted(overlap)})")
        for c, t in self.cnot_pairs:
            for track in (c, t):
                if not 0 <= track < self.num_tracks:
                    raise ValueError(f"cnot_pairs: track {track} out of range")


def identify_layer(
    layer: CircuitLayer,
    *,
    seed: int,
    trials: int = DEFAULT_TRIALS,
    tau: float = DEFAULT_TAU,
    shots: int | None = None,
) -> ProtocolReport:
    """Run the full identification pipeline on one layer.

    Detection always runs. With nonzero noise parameters the pipeline stops
    after detection (basis recovery requires noise characterization) with
    status "partial". Otherwise candidates are recovered from the pooled
    averages, polished and selected by deterministic probes, controls are
    paired with targets, the basis phase is pinned, and the remaining tracks
    are classified. Status is "full" exactly when one reconstruction
    explains everything; remaining ambiguities or unknown gates downgrade
    the status to "partial".
    """
    stats = run_protocol(layer, seed=seed, trials=trials, shots=shots)
    detected, ambiguous = detect_cnot_tracks(stats, tau=tau)
    notes: list[str] = []
    p, q = layer.noise

    def report(candidates=(), selected=None, pairs=(), gates=None, status="partial"):
        return ProtocolReport(
            num_tracks=layer.num_tracks,
            seed=seed,
            trials=trials,
            tau=tau,
            shots=shots,
            noise=layer.noise,
            track_stats=tuple(stats),
            cnot_tracks=tuple(detected),
            ambiguous_tracks=tuple(ambiguous),
            candidates=tuple(candidates),
            selected=selected,
            cnot_pairs=tuple(pairs),
            gates=dict(gates or {}),
            status=status,
            notes=tuple(notes),
        )

    if p > 0.0 or q > 0.0:
        lo, hi = noise_interval(p, q)
        notes.append(
            f"noise active (p={p:g}, q={q:g}): CNOT-track means confined to "
            f"[{lo:.6f}, {hi:.6f}]"
        )
        notes.append(
            "basis recovery requires noise characterization; stopped after detection"
        )
        return report()

    if not detected:
        if ambiguous:
            notes.append(
                "no track deviates beyond tau but some are statistically "
                "unresolved; more trials needed"
            )
        else:
            notes.append(
                "no CNOT signature above tau; the hidden basis leaves no "
                "imprint on single-qubit tracks and cannot be identified"
            )
        return report()

    (x1, y1), (x2, y2), pooled_err = _pooled_pair_stats(stats, detected, ambiguous)
    candidates = recover_basis((x1, x2, y1, y2), stderr=pooled_err)
    if not candidates:
        raise IdentificationError(
            "no self-consistent candidate basis for the measured averages"
        )
    survivors = disambiguate(
        layer, candidates, detected, ambiguous, allow_multiple=True
    )

    results = []
    for index, cand in enumerate(survivors):
        try:
            pairs, _cleared = pairing_probe(
                layer, cand.basis, list(detected) + list(ambiguous)
            )
        except IdentificationError as exc:
            notes.append(f"candidate rejected while pairing: {exc}")
            continue
        paired_tracks = {t for pr in pairs for t in pr}
        missing = [t for t in detected if t not in paired_tracks]
        if missing:
            notes.append(
                f"candidate rejected: detected tracks {missing} found no partner"
            )
            continue
        try:
            pinned_basis = _pin_basis_phase(layer, cand.basis, pairs[0])
        except IdentificationError as exc:
            notes.append(f"candidate rejected while pinning the phase: {exc}")
            continue
        pinned = replace(cand, basis=pinned_basis)
        single_tracks = [
            t for t in range(layer.num_tracks) if t not in paired_tracks
        ]
        gates = classify_single_qubit_gates(layer, pinned.basis, single_tracks)
        results.append((index, pinned, pairs, gates))

    if not results:
        raise IdentificationError(
            "every candidate basis failed the deterministic probe stages"
        )

    deduped: list = []
    for entry in results:
        _, pinned, pairs, gates = entry
        if any(
            basis_distance(pinned.basis, kept[1].basis) < 1e-9
            and sorted(pairs) == sorted(kept[2])
            and gates == kept[3]
            for kept in deduped
        ):
            continue
        deduped.append(entry)
    results = deduped

    complete = [r for r in results if "unknown" not in r[3].values()]
    pool = complete or results
    resolved = True
    if len(pool) > 1:
        degenerate = [r for r in pool if r[1].degenerate]
        if len(degenerate) == 1:
            pool = degenerate
            notes.append(
                "several reconstructions explain all probes; preferring the "
                "coinciding-basis description"
            )
        else:
            resolved = False
            notes.append(
                "several reconstructions explain all probes equally well; "
                "reporting the first (the layer is observationally degenerate)"
            )
    chosen_index, chosen, pairs, gate_labels = pool[0]
    gate_labels = dict(gate_labels)
    for c, t in pairs:
        gate_labels[c] = "CNOT_CONTROL"
        gate_labels[t] = "CNOT_TARGET"
    classified_ok = "unknown" not in gate_labels.values()
    if not classified_ok:
        unknowns = sorted(t for t, g in gate_labels.items() if g == "unknown")
        notes.append(f"tracks {unknowns} match no dictionary gate")
    status = "full" if (classified_ok and resolved) else "partial"

    all_candidates = [
        chosen if i == chosen_index else cand for i, cand in enumerate(survivors)
    ]
    return report(
        candidates=all_candidates,
        selected=chosen,
        pairs=pairs,
        gates=gate_labels,
        status=status,
    )


# ---------------------------------------------------------------------------
# layer generation


def random_layer(
    *,
    num_tracks: int,
    num_cnots: int,
    seed: int,
    noise: tuple[float, float] = (0.0, 0.0),
    min_component: float = 0.0,
) -> CircuitLayer:
    """Draw a reproducible random layer with a hidden basis.

    The basis is drawn as alpha = sqrt(u0) e^{2 pi i u1},
    beta = sqrt(1-u0) e^{2 pi i u2} from the seeded counter-based stream
    (redrawn until both moduli reach ``min_component``); CNOTs occupy
    2 * num_cnots distinct tracks of a random permutation and the remaining
    tracks draw uniformly from {I, H, T, S}.

    When at least one non-CNOT track exists, the draw is repeated until some
    track carries T or S: layers whose single-qubit gates all lie in {I, H}
    admit a second exact description (the superposition basis with every
    control/target pair swapped), so such layers are not uniquely
    identifiable even in principle.
    """
    if num_tracks < 1:
        raise ValueError(f"num_tracks: must be positive, got {num_tracks}")
    if num_cnots < 0 or 2 * num_cnots > num_tracks:
        raise ValueError(
            f"num_cnots: need 0 <= 2 * num_cnots <= num_tracks, got {num_cnots}"
        )
    if not 0.0 <= min_component < math.sqrt(0.5):
        raise ValueError(
            f"min_component: must lie in [0, sqrt(1/2)), got {min_component!r}"
        )
    gen = master_generator(seed)
    while True:
        u0, u1, u2 = gen.random(3)
        mag_a = math.sqrt(u0)
        mag_b = math.sqrt(1.0 - u0)
        if mag_a >= min_component and mag_b >= min_component:
            break
    basis = QubitBasis(
        alpha=mag_a * np.exp(2j * np.pi * u1),
        beta=mag_b * np.exp(2j * np.pi * u2),
    )
    order = [int(t) for t in gen.permutation(num_tracks)]
    gates: list = []
    for k in range(num_cnots):
        gates.append(CnotGate(control=order[2 * k], target=order[2 * k + 1]))
    single_tracks = sorted(order[2 * num_cnots :])
    if single_tracks:
        kinds = (GateKind.IDENTITY, GateKind.HADAMARD, GateKind.T, GateKind.S)
        while True:
            draws = gen.integers(0, len(kinds), size=len(single_tracks))
            chosen = [kinds[int(d)] for d in draws]
            if any(kind in (GateKind.T, GateKind.S) for kind in chosen):
                break
        for track, kind in zip(single_tracks, chosen):
            gates.append(SingleGate(kind=kind, track=track))
    return CircuitLayer(
        num_tracks=num_tracks,
        hidden_basis=basis,
        gates=tuple(gates),
        noise=noise,
    )


# ---------------------------------------------------------------------------
# report serialization


def _candidate_dict(cand: CandidateBasis) -> dict:
    return {
        "alpha": [cand.basis.alpha.real, cand.basis.alpha.imag],
        "beta": [cand.basis.beta.real, cand.basis.beta.imag],
        "sign_choice": [cand.sign_choice[0], cand.sign_choice[1]],
        "swapped": cand.swapped,
        "degenerate": cand.degenerate,
    }


def report_to_json_dict(report: ProtocolReport) -> dict:
    """JSON-ready dict of a protocol report (canonical field order)."""
    return {
        "version": ARTIFACT_VERSION,
        "seed": report.seed,
        "trials": report.trials,
        "tau": report.tau,
        "shots": report.shots,
        "noise": {"p": report.noise[0], "q": report.noise[1]},
        "status": report.status,
        "tracks": [
            {
                "track": s.track,
                "X": s.x_like,
                "stderr_X": s.stderr_x,
                "Y": s.y_like,
                "stderr_Y": s.stderr_y,
                "trials": s.trials,
            }
            for s in report.track_stats
        ],
        "cnot_tracks": list(report.cnot_tracks),
        "ambiguous_tracks": list(report.ambiguous_tracks),
        "cnot_pairs": [[c, t] for c, t in report.cnot_pairs],
        "candidates": [_candidate_dict(c) for c in report.candidates],
        "selected": None if report.selected is None else _candidate_dict(report.selected),
        "gates": {str(t): g for t, g in sorted(report.gates.items())},
        "notes": list(report.notes),
    }


def stats_to_csv(stats) -> str:
    """CSV table of track statistics (17-significant-digit floats)."""
    lines = ["track,X,stderr_X,Y,stderr_Y,trials"]
    for s in stats:
        lines.append(
            ",".join(
                [
                    str(s.track),
                    format_float(s.x_like),
                    format_float(s.stderr_x),
                    format_float(s.y_like),
                    format_float(s.stderr_y),
                    str(s.trials),
                ]
            )
        )
    return "\n".join(lines) + "\n"
