"""Stationary system spectra that survive the measure-and-broadcast channel.

Writing the initial system state in an arbitrary eigenbasis phi turns the
pointer-basis pinching into a unistochastic matrix P_ij = |<phi_i|x_j>|^2.
Any stationary distribution of P, used as the initial spectrum, passes
through decoherence unchanged and is copied into every observed
macrofraction: a classical message that the noisy environment transmits
faithfully.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError

ORTHONORMAL_TOL = 1e-10
FIXED_POINT_TOL = 1e-10


@dataclass(frozen=True)
class StochasticMatrix:
    """Column-stochastic matrix; doubly stochastic when built from two bases."""

    entries: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.entries, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ConfigError("stochastic matrix must be square")
        if np.any(p < -1e-12):
            raise ConfigError("stochastic matrix entries must be >= 0")
        col = p.sum(axis=0)
        if np.max(np.abs(col - 1.0)) > 1e-12:
            raise ConfigError("columns must sum to 1 within 1e-12")
        object.__setattr__(self, "entries", p)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def doubly_stochastic(self) -> bool:
        return bool(np.max(np.abs(self.entries.sum(axis=1) - 1.0)) <= 1e-12)


def _check_orthonormal(vectors: np.ndarray, name: str) -> np.ndarray:
    v = np.asarray(vectors, dtype=complex)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ConfigError(f"{name} must be a square array of column vectors")
    gram = v.conj().T @ v
    if np.max(np.abs(gram - np.eye(v.shape[1]))) > ORTHONORMAL_TOL:
        raise ConfigError(f"{name} is not orthonormal within {ORTHONORMAL_TOL:g}")
    return v


def unistochastic_from_bases(phi_basis, pointer_basis=None) -> StochasticMatrix:
    """P_ij = |<phi_i|x_j>|^2 for two orthonormal bases (columns as vectors)."""
    phi = _check_orthonormal(phi_basis, "phi basis")
    if pointer_basis is None:
        pointer = np.eye(phi.shape[0], dtype=complex)
    else:
        pointer = _check_orthonormal(pointer_basis, "pointer basis")
    if pointer.shape != phi.shape:
        raise ConfigError("bases have mismatched dimensions")
    overlaps = phi.conj().T @ pointer
    return StochasticMatrix(np.abs(overlaps) ** 2)


class StationaryResult(NamedTuple):
    values: np.ndarray
    unique: bool


def stationary_distribution(p: StochasticMatrix) -> StationaryResult:
    """Distribution with P lam = lam, by eigensolve with power-iteration fallback.

    Degenerate fixed-point spaces (e.g. the identity matrix) return the
    uniform distribution and unique=False.
    """
    m = p.entries
    n = p.dim
    w, v = np.linalg.eig(m)
    close = np.abs(w - 1.0) < 1e-9
    unique = int(np.sum(close)) == 1
    candidate = None
    if close.any():
        vec = np.real(v[:, int(np.argmax(close))])
        s = vec.sum()
        if abs(s) > 1e-12:
            vec = vec / s
            if vec.min() >= -1e-10:
                candidate = np.maximum(vec, 0.0)
                candidate /= candidate.sum()
    if candidate is None or _residual(m, candidate) > FIXED_POINT_TOL:
        candidate = _power_iteration(m)
        unique = unique and _residual(m, candidate) <= FIXED_POINT_TOL
    if not unique:
        uniform = np.full(n, 1.0 / n)
        if _residual(m, uniform) <= FIXED_POINT_TOL:
            return StationaryResult(uniform, False)
    return StationaryResult(candidate, unique)


def _residual(m: np.ndarray, lam: np.ndarray) -> float:
    return float(np.max(np.abs(m @ lam - lam)))


def _power_iteration(m: np.ndarray, max_iter: int = 100000, tol: float = 1e-14) -> np.ndarray:
    lam = np.full(m.shape[0], 1.0 / m.shape[0])
    for _ in range(max_iter):
        nxt = m @ lam
        nxt = np.maximum(nxt, 0.0)
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - lam)) < tol:
            return nxt
        lam = nxt
    return lam


@dataclass(frozen=True)
class PfBroadcastReport:
    """Outcome of pushing a stationary spectrum through the broadcast channel."""

    stationary: np.ndarray
    pointer_probs: np.ndarray
    max_deviation: float
    ensemble: object


def verify_pf_broadcast(phi_basis, stationary, channel: Callable) -> PfBroadcastReport:
    """Check that the channel broadcasts the stationary spectrum unchanged.

    ``channel`` maps a system density matrix to an object with a ``probs``
    attribute (the broadcast classical message). The stationary vector must
    satisfy the fixed-point equation of P(phi) within tolerance.
    """
    phi = _check_orthonormal(phi_basis, "phi basis")
    lam = np.asarray(stationary, dtype=float)
    if lam.shape != (phi.shape[0],):
        raise ConfigError("stationary vector length does not match the basis")
    if np.any(lam < -1e-12) or abs(lam.sum() - 1.0) > 1e-9:
        raise ConfigError("stationary vector is not a distribution")
    p = unistochastic_from_bases(phi)
    if _residual(p.entries, lam) > FIXED_POINT_TOL:
        raise ConfigError("vector is not stationary for P(phi) within tolerance")
    rho_s = (phi * lam) @ phi.conj().T
    ensemble = channel(rho_s)
    pointer_probs = np.asarray(ensemble.probs, dtype=float)
    return PfBroadcastReport(
        stationary=lam,
        pointer_probs=pointer_probs,
        max_deviation=float(np.max(np.abs(pointer_probs - lam))),
        ensemble=ensemble,
    )


def pinch_channel(dim: int):
    """Pointer-basis pinching as a plain channel handle (n-dimensional)."""

    class _Pinched(NamedTuple):
        probs: np.ndarray

    def apply(rho_s) -> _Pinched:
        c = np.asarray(rho_s, dtype=complex)
        if c.shape != (dim, dim):
            raise ConfigError(f"system state must be {dim}x{dim}")
        return _Pinched(np.real(np.diagonal(c)).copy())

    return apply
