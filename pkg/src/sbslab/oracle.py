"""Exact finite-dimensional simulation of the post-scattering joint state.

The interaction is a two-branch controlled unitary: conditioned on the system
sitting at location 1 or 2, every one of the N_t identical environment
subsystems is rotated by U1 or U2. That structure makes the joint state a sum
of two pointer blocks built from (U_i rho_E U_i^dag)^(x observed count) plus a
coherent cross block whose weight carries the decoherence factor
Lambda = Tr(U1 rho_E U2^dag) raised to the number of unobserved subsystems.
Only per-subsystem operators are stored; dense matrices are assembled over
the observed fraction alone, which keeps exact runs at N_t ~ 10-14 cheap.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import qmath
from .errors import CapacityError, ConfigError

DEFAULT_DIMENSION_CAP = 2**14
_INT_TOL = 1e-9


def _as_unitary(u, name: str) -> np.ndarray:
    a = np.asarray(u, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError(f"{name} must be square")
    dev = np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0])))
    if dev > 1e-9:
        raise ConfigError(f"{name} is not unitary: max |U^dag U - 1| = {dev:.3e}")
    return a


def _integral(x: float, name: str) -> int:
    n = round(x)
    if abs(x - n) > _INT_TOL:
        raise ConfigError(f"{name} = {x} must be an integer within {_INT_TOL}")
    return int(n)


def kron_power(m: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return np.eye(1, dtype=complex)
    return reduce(np.kron, [m] * n)


@dataclass(frozen=True)
class OutState:
    """Structured post-scattering state of the system and the observed fraction."""

    system_matrix: np.ndarray
    lam: complex
    n_t: int
    f: float
    m: float
    block_same: tuple[np.ndarray, np.ndarray]
    block_cross: np.ndarray
    photon_dim: int
    dimension_cap: int = DEFAULT_DIMENSION_CAP

    def __post_init__(self):
        c = np.asarray(self.system_matrix, dtype=complex)
        if c.shape != (2, 2):
            raise ConfigError("system matrix must be 2x2")
        qmath.DensityMatrix(c)  # hermitian, unit trace, PSD within tolerance
        if abs(self.lam) > 1.0 + 1e-9:
            raise ConfigError(f"|Lambda| = {abs(self.lam):.6g} > 1")
        for i, b in enumerate(self.block_same):
            qmath.DensityMatrix(b)
            if b.shape != (self.photon_dim, self.photon_dim):
                raise ConfigError(f"block_same[{i}] has wrong dimension")
        tr_cross = complex(np.trace(self.block_cross))
        if abs(tr_cross - self.lam) > 1e-9:
            raise ConfigError("trace of the cross block must equal Lambda")
        object.__setattr__(self, "system_matrix", c)

    @property
    def observed_count(self) -> int:
        return _integral(self.f * self.n_t, "f*N_t")

    @property
    def unobserved_count(self) -> int:
        return self.n_t - self.observed_count

    @property
    def per_macrofraction_count(self) -> int:
        return _integral(self.m * self.n_t, "m*N_t")

    @property
    def pointer_probs(self) -> np.ndarray:
        return np.real(np.diagonal(self.system_matrix)).copy()

    @property
    def assembled_dim(self) -> int:
        return 2 * self.photon_dim**self.observed_count


def evolve_out_state(rho_s, env_state, u1, u2, n_t: int, f: float, m: float,
                     dimension_cap: int = DEFAULT_DIMENSION_CAP) -> OutState:
    """Scatter N_t photons off the two-location system and trace out the rest.

    rho_s is the 2x2 system state in the pointer basis, env_state the
    single-photon initial state, u1/u2 the per-photon branch unitaries.
    f*N_t and m*N_t must be integral; the dense dimension 2*d^(f*N_t) must
    stay within dimension_cap.
    """
    c = np.asarray(rho_s, dtype=complex)
    rho_e = np.asarray(env_state, dtype=complex)
    qmath.DensityMatrix(rho_e)
    d = rho_e.shape[0]
    a1 = _as_unitary(u1, "u1")
    a2 = _as_unitary(u2, "u2")
    if a1.shape != (d, d) or a2.shape != (d, d):
        raise ConfigError("branch unitaries must match the environment dimension")
    if n_t < 0:
        raise ConfigError("n_t must be >= 0")
    observed = _integral(f * n_t, "f*N_t")
    _integral(m * n_t, "m*N_t")
    dim = 2 * d**observed
    if dim > dimension_cap:
        raise CapacityError(
            f"assembled dimension 2*{d}^{observed} = {dim} exceeds cap {dimension_cap}; "
            "reduce f*N_t or the photon dimension",
            parameter="f*N_t",
        )
    lam = complex(np.trace(a1 @ rho_e @ a2.conj().T))
    return OutState(
        system_matrix=c,
        lam=lam,
        n_t=int(n_t),
        f=float(f),
        m=float(m),
        block_same=(a1 @ rho_e @ a1.conj().T, a2 @ rho_e @ a2.conj().T),
        block_cross=a1 @ rho_e @ a2.conj().T,
        photon_dim=d,
        dimension_cap=dimension_cap,
    )


def assemble(state: OutState, part: str = "full") -> np.ndarray:
    """Dense matrix of the joint state over the observed fraction.

    part selects "full", the pointer-"diag"onal blocks, or the coherent
    "offdiag" cross blocks.
    """
    if part not in ("full", "diag", "offdiag"):
        raise ConfigError(f"unknown part {part!r}")
    n_obs = state.observed_count
    d_obs = state.photon_dim**n_obs
    if 2 * d_obs > state.dimension_cap:
        raise CapacityError(
            f"assembled dimension {2 * d_obs} exceeds cap {state.dimension_cap}",
            parameter="f*N_t",
        )
    c = state.system_matrix
    out = np.zeros((2 * d_obs, 2 * d_obs), dtype=complex)
    if part in ("full", "diag"):
        out[:d_obs, :d_obs] = c[0, 0] * kron_power(state.block_same[0], n_obs)
        out[d_obs:, d_obs:] = c[1, 1] * kron_power(state.block_same[1], n_obs)
    if part in ("full", "offdiag"):
        weight = c[0, 1] * state.lam ** state.unobserved_count
        cross = weight * kron_power(state.block_cross, n_obs)
        out[:d_obs, d_obs:] = cross
        out[d_obs:, :d_obs] = cross.conj().T
    return out


def coherent_tail_norm(state: OutState) -> float:
    """Trace norm of the coherent cross part: 2 |c12| |Lambda|^((1-f) N_t).

    Exact, not asymptotic: the cross block S1 rho S2^dag has unit trace norm
    because S1, S2 are unitary.
    """
    c12 = state.system_matrix[0, 1]
    return 2.0 * abs(c12) * abs(state.lam) ** state.unobserved_count


def macro_states(state: OutState) -> tuple[np.ndarray, np.ndarray]:
    """Per-macrofraction conditional records (tensor powers over m*N_t photons)."""
    n = state.per_macrofraction_count
    dim = state.photon_dim**n
    if dim > state.dimension_cap:
        raise CapacityError(
            f"macrofraction dimension {dim} exceeds cap {state.dimension_cap}",
            parameter="m*N_t",
        )
    return kron_power(state.block_same[0], n), kron_power(state.block_same[1], n)


def macro_overlap_exact(state: OutState) -> float:
    """Generalized overlap of the two macrofraction records."""
    r1, r2 = macro_states(state)
    return qmath.generalized_overlap(r1, r2)


def micro_overlap_exact(state: OutState) -> float:
    """Generalized overlap of the two single-photon records."""
    return qmath.generalized_overlap(*state.block_same)


def reduced_system(state: OutState) -> np.ndarray:
    """System marginal: diagonal kept, coherence damped by Lambda^N_t."""
    c = state.system_matrix.copy()
    damp = state.lam**state.n_t
    c[0, 1] = c[0, 1] * damp
    c[1, 0] = np.conj(c[0, 1])
    return c


def mutual_information_bits(state: OutState) -> float:
    """Exact mutual information between the system and the observed fraction."""
    n_obs = state.observed_count
    if n_obs == 0:
        return 0.0
    d_obs = state.photon_dim**n_obs
    joint = assemble(state)
    c = state.system_matrix
    rho_fe = c[0, 0] * kron_power(state.block_same[0], n_obs) + c[1, 1] * kron_power(
        state.block_same[1], n_obs
    )
    s_a = qmath.von_neumann_entropy(reduced_system(state))
    s_b = qmath.von_neumann_entropy(rho_fe)
    s_ab = qmath.von_neumann_entropy(joint)
    return s_a + s_b - s_ab


@dataclass(frozen=True)
class PlateauCurve:
    """Mutual information against observed fraction, with its classical target."""

    f_values: tuple[float, ...]
    i_values: tuple[float, ...]
    h_s: float
    n_t: int
    metadata: dict

    def __post_init__(self):
        if len(self.f_values) != len(self.i_values):
            raise ConfigError("f and I sequences differ in length")
        if len(self.f_values) < 3:
            raise ConfigError("a plateau curve needs at least 3 fraction values")


def mutual_info_curve(rho_s, env_state, u1, u2, n_t: int, f_values, m: float,
                      dimension_cap: int = DEFAULT_DIMENSION_CAP,
                      metadata: dict | None = None) -> PlateauCurve:
    """Exact I(f) over a family of observed fractions of the same instance."""
    f_values = tuple(float(f) for f in f_values)
    i_values = []
    for f in f_values:
        st = evolve_out_state(rho_s, env_state, u1, u2, n_t, f, m, dimension_cap)
        i_values.append(mutual_information_bits(st))
    probs = np.real(np.diagonal(np.asarray(rho_s, dtype=complex)))
    return PlateauCurve(
        f_values=f_values,
        i_values=tuple(i_values),
        h_s=qmath.shannon_entropy(probs),
        n_t=int(n_t),
        metadata=dict(metadata or {}),
    )


def _helstrom_projectors(delta: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(delta)
    plus = v[:, w > tol]
    minus = v[:, w < -tol]
    return plus @ plus.conj().T, minus @ minus.conj().T


def broadcast_distance(state: OutState) -> float:
    """Trace-norm distance to the nearest constructed broadcast candidate.

    The candidate pinches the system in the pointer basis and, per
    macrofraction, projects each conditional record onto the positive/negative
    eigenspace of their difference (Helstrom split), renormalized. A projector
    that captures no weight falls back to the unprojected record, so branches
    with identical records reduce the distance to the coherent tail norm.
    """
    f_m = _integral(state.f / state.m, "f/m (observed macrofractions)")
    r1, r2 = macro_states(state)
    pi_plus, pi_minus = _helstrom_projectors(r1 - r2)
    conds = []
    for rec, proj in ((r1, pi_plus), (r2, pi_minus)):
        projected = proj @ rec @ proj
        tr = float(np.trace(projected).real)
        conds.append(projected / tr if tr > 1e-12 else rec)
    c = state.system_matrix
    d_obs = state.photon_dim**state.observed_count
    candidate = np.zeros((2 * d_obs, 2 * d_obs), dtype=complex)
    candidate[:d_obs, :d_obs] = c[0, 0] * kron_power(conds[0], f_m)
    candidate[d_obs:, d_obs:] = c[1, 1] * kron_power(conds[1], f_m)
    return qmath.trace_norm(assemble(state) - candidate)


PHASE_PRODUCT_THRESHOLD = 0.05
PHASE_PLATEAU_THRESHOLD = 0.1


def classify_phase(i_bits: float, h_s: float,
                   product_threshold: float = PHASE_PRODUCT_THRESHOLD,
                   plateau_threshold: float = PHASE_PLATEAU_THRESHOLD) -> str:
    """Label a point of the information curve: product, broadcasting, or full_information."""
    if i_bits < product_threshold:
        return "product"
    if abs(i_bits - h_s) < plateau_threshold:
        return "broadcasting"
    return "full_information"


@dataclass(frozen=True)
class BroadcastEnsemble:
    """Classical message and conditional records emitted by the broadcast channel."""

    probs: np.ndarray
    records: tuple[np.ndarray, np.ndarray]
    copies: int


def cc_channel_apply(rho_s, state: OutState,
                     overlap_tolerance: float = 1e-6) -> BroadcastEnsemble:
    """Measure-and-broadcast channel of the asymptotic scattering.

    Returns the pointer probabilities of rho_s together with the
    per-macrofraction records replicated over the observed macrofractions.
    Warns when the records are not orthogonal within tolerance.
    """
    c = np.asarray(rho_s, dtype=complex)
    if c.shape != (2, 2):
        raise ConfigError("system state must be 2x2")
    copies = _integral(state.f / state.m, "f/m (observed macrofractions)")
    overlap = macro_overlap_exact(state)
    if overlap > overlap_tolerance:
        warnings.warn(
            f"macrofraction records overlap at {overlap:.3g} > {overlap_tolerance:g}; "
            "the broadcast channel is only asymptotically valid",
            RuntimeWarning,
            stacklevel=2,
        )
    probs = np.real(np.diagonal(c)).copy()
    return BroadcastEnsemble(probs=probs, records=macro_states(state), copies=copies)
