"""Dense complex-matrix kernel and quantum-information measures.

All entropies are in bits (base-2 logarithms). Matrix square roots go
through Hermitian eigendecomposition; eigenvalues in [-tol, 0] are treated
as numerical noise and clamped to zero, anything more negative is an error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EIG_CLAMP_TOL = 1e-9


def _entries(m) -> np.ndarray:
    if isinstance(m, (DensityMatrix, Operator)):
        return m.entries
    return np.asarray(m, dtype=complex)


def _require_square(a: np.ndarray, what: str = "matrix") -> np.ndarray:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be square, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Operator:
    """Square complex matrix with no structural constraints."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _require_square(np.asarray(self.entries, dtype=complex)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix within `tolerance`."""

    entries: np.ndarray
    tolerance: float = EIG_CLAMP_TOL

    def __post_init__(self):
        a = _require_square(np.asarray(self.entries, dtype=complex), "density matrix")
        object.__setattr__(self, "entries", a)
        self.validate()

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def validate(self) -> None:
        a, tol = self.entries, self.tolerance
        if np.max(np.abs(a - a.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(a).real - 1.0) > tol or abs(np.trace(a).imag) > tol:
            raise ValueError("density matrix trace differs from 1 beyond tolerance")
        w = np.linalg.eigvalsh(a)
        if w.min() < -tol:
            raise ValueError(f"density matrix has eigenvalue {w.min():.3e} < -tolerance")


def _clamped_spectrum(w: np.ndarray, tol: float, what: str) -> np.ndarray:
    if w.min() < -tol:
        raise ValueError(f"{what} has eigenvalue {w.min():.3e} below -{tol:g}")
    return np.maximum(w, 0.0)


def _sqrt_spectrum(w: np.ndarray, tol: float, what: str) -> np.ndarray:
    """Square roots of a PSD spectrum with rank-revealing noise floor.

    Eigenvalues below the solver's relative noise level are zeroed before the
    root; otherwise O(eps) noise turns into O(sqrt(eps)) errors on singular
    states.
    """
    w = _clamped_spectrum(w, tol, what)
    floor = 64.0 * np.finfo(float).eps * max(w.max(), 0.0)
    return np.sqrt(np.where(w > floor, w, 0.0))


def sqrtm_psd(m, tol: float = EIG_CLAMP_TOL) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix via eigendecomposition."""
    a = _require_square(_entries(m))
    w, v = np.linalg.eigh(a)
    s = _sqrt_spectrum(w, tol, "matrix square root input")
    return (v * s) @ v.conj().T


def trace_norm(m) -> float:
    """Sum of singular values of a square matrix."""
    a = _require_square(_entries(m))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def generalized_overlap(rho1, rho2, tol: float = EIG_CLAMP_TOL) -> float:
    """Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)), in [0, 1].

    Equals |<psi1|psi2>| on pure states and 1 exactly when the states
    coincide; 0 means perfectly distinguishable supports. Evaluated as the
    trace norm of sqrt(rho2) sqrt(rho1), which is the same quantity without
    the squared kernel and its noise amplification.
    """
    a, b = _entries(rho1), _entries(rho2)
    _require_square(a, "rho1")
    _require_square(b, "rho2")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    product = sqrtm_psd(b, tol) @ sqrtm_psd(a, tol)
    return float(min(np.sum(np.linalg.svd(product, compute_uv=False)), 1.0))


def partial_trace(rho, dims, keep) -> np.ndarray:
    """Trace out all subsystems not listed in `keep` (kept order preserved)."""
    a = _require_square(_entries(rho))
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != a.shape[0]:
        raise ValueError(f"product of dims {dims} does not match matrix dim {a.shape[0]}")
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(i) for i in keep))
    if any(i < 0 or i >= len(dims) for i in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    drop = [i for i in range(len(dims)) if i not in keep]
    tensor = a.reshape(dims + dims)
    remaining = list(dims)
    for i in sorted(drop, reverse=True):
        tensor = np.trace(tensor, axis1=i, axis2=i + len(remaining))
        remaining.pop(i)
    d_out = int(np.prod(remaining)) if remaining else 1
    return tensor.reshape(d_out, d_out)


def von_neumann_entropy(rho, tol: float = EIG_CLAMP_TOL) -> float:
    """-sum(lambda log2 lambda) with 0 log 0 = 0, in bits."""
    a = _require_square(_entries(rho))
    w = np.linalg.eigvalsh(a)
    w = _clamped_spectrum(w, tol, "entropy input")
    pos = w[w > 0]
    return float(-np.sum(pos * np.log2(pos)))


def mutual_information(rho_ab, dim_a: int, dim_b: int, tol: float = EIG_CLAMP_TOL) -> float:
    """I = S(A) + S(B) - S(AB) in bits."""
    a = _require_square(_entries(rho_ab))
    if dim_a * dim_b != a.shape[0]:
        raise ValueError(f"dim_a*dim_b = {dim_a * dim_b} does not match matrix dim {a.shape[0]}")
    s_a = von_neumann_entropy(partial_trace(a, [dim_a, dim_b], [0]), tol)
    s_b = von_neumann_entropy(partial_trace(a, [dim_a, dim_b], [1]), tol)
    s_ab = von_neumann_entropy(a, tol)
    return s_a + s_b - s_ab


def shannon_entropy(probs) -> float:
    """Shannon entropy of a discrete distribution, in bits."""
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def holevo_chi(probs, states, tol: float = EIG_CLAMP_TOL) -> float:
    """chi = S(sum_i p_i rho_i) - sum_i p_i S(rho_i), in bits."""
    p = np.asarray(probs, dtype=float)
    if len(p) != len(states):
        raise ValueError(f"{len(p)} probabilities for {len(states)} states")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("probabilities are not normalized")
    mats = [_require_square(_entries(s)) for s in states]
    if len({m.shape for m in mats}) > 1:
        raise ValueError("states have mismatched dimensions")
    avg = sum(pi * m for pi, m in zip(p, mats))
    return von_neumann_entropy(avg, tol) - float(
        sum(pi * von_neumann_entropy(m, tol) for pi, m in zip(p, mats))
    )


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase-fixed diagonal."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state from a normalized Wishart factor of the given rank."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real
