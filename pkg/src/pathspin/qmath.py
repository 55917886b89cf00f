"""Small dense linear-algebra and sampling kernel.

Everything here is physics-agnostic: complex vectors of dimension 2 and 4,
projective (Born-rule) probabilities, a closed-form symmetric 3x3
eigensolver, and a counter-based random generator whose draws depend only
on (seed, stream, counter) so that independently generated streams can be
evaluated in any order, on any platform, with identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import (
    DimensionError,
    InvalidDistributionError,
    InvalidMatrixError,
    InvalidMeasurementError,
    InvalidStateError,
)

NORM_ATOL = 1e-12
UNITARY_ATOL = 1e-10
PROB_CLAMP = -1e-14


def as_state(v: Sequence[complex] | np.ndarray, dim: int | None = None) -> np.ndarray:
    """Coerce to a complex 1-D unit vector, validating norm to 1e-12."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1:
        raise DimensionError(f"state must be a 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {arr.shape[0]}")
    nrm = np.linalg.norm(arr)
    if abs(nrm - 1.0) > NORM_ATOL:
        raise InvalidStateError(f"state is not normalized (|v| = {nrm!r})")
    return arr


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two normalized vectors (first factor is the slow index)."""
    return np.kron(as_state(a), as_state(b))


def _check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"operator must be square, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > UNITARY_ATOL:
        raise InvalidMatrixError(f"operator is not unitary (deviation {err:.3e})")
    return u


def apply(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply a unitary to a state vector."""
    u = _check_unitary(u)
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.shape[0] != u.shape[1]:
        raise DimensionError(f"cannot apply {u.shape} operator to vector of shape {v.shape}")
    return u @ v


def lift_spin(u: np.ndarray) -> np.ndarray:
    """Embed a 2x2 spin operator into the 4-dim spin (x) path space."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise DimensionError(f"spin operator must be 2x2, got {u.shape}")
    return np.kron(u, np.eye(2, dtype=complex))


def lift_path(u: np.ndarray) -> np.ndarray:
    """Embed a 2x2 path operator into the 4-dim spin (x) path space."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise DimensionError(f"path operator must be 2x2, got {u.shape}")
    return np.kron(np.eye(2, dtype=complex), u)


def born(v: np.ndarray, projectors: Sequence[np.ndarray]) -> np.ndarray:
    """Outcome probabilities of a projective measurement on a pure state.

    The projectors must be Hermitian, idempotent and resolve the identity
    (each checked to 1e-10).  Probabilities in [-1e-14, 0) are clamped to
    zero; anything more negative raises, as does a family that fails to
    sum to one within 1e-12.
    """
    v = as_state(v)
    d = v.shape[0]
    total = np.zeros((d, d), dtype=complex)
    probs = np.empty(len(projectors))
    for k, p in enumerate(projectors):
        p = np.asarray(p, dtype=complex)
        if p.shape != (d, d):
            raise DimensionError(f"projector {k} has shape {p.shape}, expected {(d, d)}")
        if np.max(np.abs(p - p.conj().T)) > UNITARY_ATOL:
            raise InvalidMeasurementError(f"projector {k} is not Hermitian")
        if np.max(np.abs(p @ p - p)) > UNITARY_ATOL:
            raise InvalidMeasurementError(f"projector {k} is not idempotent")
        total += p
        probs[k] = np.real(np.vdot(v, p @ v))
    if np.max(np.abs(total - np.eye(d))) > UNITARY_ATOL:
        raise InvalidMeasurementError("projectors do not resolve the identity")
    if np.any(probs < PROB_CLAMP):
        raise InvalidMeasurementError(f"negative probability {probs.min():.3e}")
    probs[probs < 0.0] = 0.0
    if abs(probs.sum() - 1.0) > 1e-12:
        raise InvalidMeasurementError(f"probabilities sum to {probs.sum()!r}")
    return probs


# ---------------------------------------------------------------------------
# symmetric 3x3 eigenvalues


def _jacobi3(a: np.ndarray) -> np.ndarray:
    """Cyclic Jacobi sweeps; used when the closed form is ill-conditioned."""
    a = a.copy()
    for _ in range(64):
        off = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
        if off < 1e-30:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            if a[p, q] == 0.0:
                continue
            theta = 0.5 * (a[q, q] - a[p, p]) / a[p, q]
            t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
            if theta == 0.0:
                t = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
    return np.diagonal(a).copy()


def sym3_eigs(m: np.ndarray) -> tuple[float, float, float]:
    """Eigenvalues of a real symmetric 3x3 matrix, sorted descending.

    Uses the trigonometric closed form of the characteristic cubic.  When
    the depressed cubic's discriminant is nearly zero (repeated roots,
    |disc| < 1e-14) the closed form loses accuracy, so the routine falls
    back to Jacobi rotations.  Diagonal input is returned exactly.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise DimensionError(f"expected a 3x3 matrix, got {m.shape}")
    if np.max(np.abs(m - m.T)) > 1e-12:
        raise InvalidMatrixError("matrix is not symmetric")
    m = 0.5 * (m + m.T)

    if m[0, 1] == 0.0 and m[0, 2] == 0.0 and m[1, 2] == 0.0:
        d = np.sort(np.diagonal(m))[::-1]
        return float(d[0]), float(d[1]), float(d[2])

    # characteristic cubic x^3 - c2 x^2 + c1 x - c0, depressed via x -> x + c2/3
    c2 = m[0, 0] + m[1, 1] + m[2, 2]
    c1 = (
        m[0, 0] * m[1, 1] - m[0, 1] ** 2
        + m[0, 0] * m[2, 2] - m[0, 2] ** 2
        + m[1, 1] * m[2, 2] - m[1, 2] ** 2
    )
    c0 = np.linalg.det(m)
    p = c1 - c2 * c2 / 3.0
    q = -2.0 * c2**3 / 27.0 + c1 * c2 / 3.0 - c0
    disc = -4.0 * p**3 - 27.0 * q * q

    if abs(disc) < 1e-14 or p >= 0.0:
        eigs = np.sort(_jacobi3(m))[::-1]
    else:
        # all roots real: x_k = 2 sqrt(-p/3) cos(theta/3 - 2 pi k / 3)
        rad = np.sqrt(-p / 3.0)
        arg = np.clip(1.5 * q / (p * rad), -1.0, 1.0)
        theta = np.arccos(arg)
        xs = 2.0 * rad * np.cos(theta / 3.0 - 2.0 * np.pi * np.arange(3) / 3.0)
        eigs = np.sort(xs + c2 / 3.0)[::-1]
    return float(eigs[0]), float(eigs[1]), float(eigs[2])


# ---------------------------------------------------------------------------
# counter-based sampling

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STREAM_SALT = 0xD1B54A32D192ED03


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


@dataclass(frozen=True)
class Rng:
    """Counter-based deterministic generator.

    Each (seed, stream) pair owns an independent sequence; ``stream`` is
    conventionally the round index so rounds can be generated in parallel.
    Draws advance functionally: every method returns the value together
    with the successor generator, the receiver is never mutated.
    """

    seed: int
    stream: int = 0
    counter: int = 0

    def _word(self) -> int:
        root = _mix64((_mix64(self.seed & _MASK) ^ (self.stream & _MASK) * _STREAM_SALT) & _MASK)
        return _mix64((root + (self.counter + 1) * _GOLDEN) & _MASK)

    def next_uniform(self) -> tuple[float, "Rng"]:
        """Draw u in [0, 1) with 53 random bits."""
        u = (self._word() >> 11) * 2.0**-53
        return u, replace(self, counter=self.counter + 1)

    def sample(self, weights: Sequence[float]) -> tuple[int, "Rng"]:
        """Draw an index from a finite distribution given by ``weights``."""
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InvalidDistributionError("weights must be a non-empty 1-D sequence")
        if np.any(w < 0.0):
            raise InvalidDistributionError(f"negative weight in {list(w)}")
        if abs(w.sum() - 1.0) > 1e-9:
            raise InvalidDistributionError(f"weights sum to {w.sum()!r}, expected 1")
        u, nxt = self.next_uniform()
        acc = 0.0
        for i in range(w.size - 1):
            acc += w[i]
            if u < acc:
                return i, nxt
        return int(w.size - 1), nxt
