"""Continuity-bound chain and the composite information-gap bound.

For a qubit system coupled to N identical environments through a two-branch
controlled unitary, the gap between the pointer entropy H_S and the exact
mutual information with the observed fraction is bounded by a sum of four
terms: a Fannes-Audenaert term in the system decoherence residue, an
Alicki-Fannes pair in the observed-fraction residue, and a record-overlap
term. All entropies are in bits, which turns the "log 2" of the
conditional-entropy term into exactly 1; slack values depend on this choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle, qmath
from .errors import ConfigError

REGIME_LIMIT = 0.5


def binary_entropy(p: float) -> float:
    """h(p) = -p log2 p - (1-p) log2 (1-p); h(0) = h(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"binary entropy argument {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def fannes_audenaert(eps: float, d: int) -> float:
    """Entropy-continuity bound (eps/2) log2(d-1) + h(eps/2) for trace distance eps."""
    if not 0.0 <= eps <= 2.0:
        raise ConfigError(f"trace-norm distance {eps} outside [0, 2]")
    if d < 2:
        raise ConfigError("dimension must be >= 2")
    return 0.5 * eps * math.log2(d - 1) + binary_entropy(0.5 * eps)


def alicki_fannes(eps: float, d_s: int) -> float:
    """Conditional-entropy continuity bound 4 eps log2 d_S + 2 h(eps)."""
    if not 0.0 <= eps <= 1.0:
        raise ConfigError(f"trace-norm distance {eps} outside [0, 1]")
    if d_s < 2:
        raise ConfigError("system dimension must be >= 2")
    return 4.0 * eps * math.log2(d_s) + 2.0 * binary_entropy(eps)


def imax_lower_bound(p1: float, p2: float, b: float, f_m: float) -> float:
    """H({p}) - 2 sqrt(p1 p2) b^(f_m): extractable-information floor.

    May be negative, in which case it is vacuous.
    """
    if min(p1, p2) < 0 or abs(p1 + p2 - 1.0) > 1e-9:
        raise ConfigError("p1, p2 must form a distribution")
    if not 0.0 <= b <= 1.0 + 1e-12:
        raise ConfigError("overlap b must be in [0, 1]")
    if f_m < 0:
        raise ConfigError("f_m must be >= 0")
    return qmath.shannon_entropy([p1, p2]) - 2.0 * math.sqrt(p1 * p2) * min(b, 1.0) ** f_m


@dataclass(frozen=True)
class BoundInstance:
    """Two-branch controlled-unitary instance for the composite bound."""

    p1: float
    p2: float
    coherence: complex
    u1: np.ndarray
    u2: np.ndarray
    env_state: np.ndarray
    environment_count: int
    observed_fraction: float

    def __post_init__(self):
        if min(self.p1, self.p2) < 0 or abs(self.p1 + self.p2 - 1.0) > 1e-9:
            raise ConfigError("pointer probabilities must form a distribution")
        limit = math.sqrt(max(self.p1 * self.p2, 0.0))
        if abs(self.coherence) > limit + 1e-9:
            raise ConfigError("coherence exceeds sqrt(p1 p2): system state not PSD")
        if self.environment_count < 1:
            raise ConfigError("environment_count must be >= 1")
        n_obs = self.observed_fraction * self.environment_count
        if abs(n_obs - round(n_obs)) > 1e-9:
            raise ConfigError("observed_fraction * environment_count must be integral")

    @property
    def rho_s(self) -> np.ndarray:
        return np.array(
            [[self.p1, self.coherence], [np.conj(self.coherence), self.p2]], dtype=complex
        )

    @property
    def h_s(self) -> float:
        return qmath.shannon_entropy([self.p1, self.p2])


@dataclass(frozen=True)
class BoundReport:
    """Evaluated composite bound; slack >= 0 is the theorem's content."""

    h_s: float
    i_exact: float
    rhs: float
    epsilon_e: float
    epsilon_fe: float
    b_micro: float
    b_macro: float
    out_of_regime: bool

    @property
    def slack(self) -> float:
        return self.rhs - abs(self.h_s - self.i_exact)


def information_gap_bound(inst: BoundInstance,
                          dimension_cap: int = oracle.DEFAULT_DIMENSION_CAP) -> BoundReport:
    """Evaluate |H_S - I| against its composite upper bound on one instance.

    The decoherence residues epsilon are computed from the closed tail
    formula (exact for unitary branches); the record overlap from the
    single-environment states. Inputs with residues above 1/2 are evaluated
    anyway but flagged out of regime, since the continuity bounds are only
    monotone below that point.
    """
    n = inst.environment_count
    f = inst.observed_fraction
    state = oracle.evolve_out_state(
        inst.rho_s, inst.env_state, inst.u1, inst.u2, n, f, 1.0 / n, dimension_cap
    )
    i_exact = oracle.mutual_information_bits(state)
    eps_e = 2.0 * abs(inst.coherence) * abs(state.lam) ** n
    eps_fe = oracle.coherent_tail_norm(state)
    b_micro = oracle.micro_overlap_exact(state)
    observed = state.observed_count
    b_macro = b_micro**observed
    out_of_regime = max(eps_e, eps_fe) > REGIME_LIMIT
    rhs = (
        binary_entropy(0.5 * eps_e)
        + 2.0 * binary_entropy(min(eps_fe, 1.0))
        + 4.0 * eps_fe
        + 2.0 * math.sqrt(inst.p1 * inst.p2) * b_macro
    )
    return BoundReport(
        h_s=inst.h_s,
        i_exact=i_exact,
        rhs=rhs,
        epsilon_e=eps_e,
        epsilon_fe=eps_fe,
        b_micro=b_micro,
        b_macro=b_macro,
        out_of_regime=out_of_regime,
    )


def helstrom_mutual_information(p1: float, p2: float, rho1, rho2) -> float:
    """Classical mutual information of the minimum-error two-outcome measurement."""
    r1 = np.asarray(rho1, dtype=complex)
    r2 = np.asarray(rho2, dtype=complex)
    delta = p1 * r1 - p2 * r2
    w, v = np.linalg.eigh((delta + delta.conj().T) / 2)
    plus = v[:, w >= 0]
    pi_plus = plus @ plus.conj().T
    pi_minus = np.eye(delta.shape[0]) - pi_plus
    joint = np.array(
        [
            [p1 * _prob(pi_plus, r1), p1 * _prob(pi_minus, r1)],
            [p2 * _prob(pi_plus, r2), p2 * _prob(pi_minus, r2)],
        ]
    )
    joint = np.clip(joint, 0.0, None)
    joint /= joint.sum()
    marg_i = joint.sum(axis=1)
    marg_j = joint.sum(axis=0)
    total = 0.0
    for i in range(2):
        for j in range(2):
            if joint[i, j] > 0:
                total += joint[i, j] * math.log2(joint[i, j] / (marg_i[i] * marg_j[j]))
    return total


def _prob(effect: np.ndarray, rho: np.ndarray) -> float:
    return float(np.trace(effect @ rho).real)


def overlap_optimal_mutual_information(p1: float, p2: float, rho1, rho2) -> float:
    """Classical mutual information of the overlap-optimal projective measurement.

    Measuring in the eigenbasis of rho1^(-1/2) sqrt(sqrt(rho1) rho2 sqrt(rho1))
    rho1^(-1/2) attains the generalized overlap as the Bhattacharyya sum of the
    outcome statistics, which is the measurement behind the extractable-
    information floor. Requires rho1 of full rank.
    """
    r1 = np.asarray(rho1, dtype=complex)
    r2 = np.asarray(rho2, dtype=complex)
    w, v = np.linalg.eigh((r1 + r1.conj().T) / 2)
    if w.min() <= 1e-12:
        raise ConfigError("overlap-optimal measurement needs a full-rank first state")
    sqrt1 = (v * np.sqrt(w)) @ v.conj().T
    inv_sqrt1 = (v / np.sqrt(w)) @ v.conj().T
    inner = sqrt1 @ r2 @ sqrt1
    mid = qmath.sqrtm_psd((inner + inner.conj().T) / 2)
    opt = inv_sqrt1 @ mid @ inv_sqrt1
    _, basis = np.linalg.eigh((opt + opt.conj().T) / 2)
    joint = np.empty((2, basis.shape[1]))
    for j in range(basis.shape[1]):
        e = np.outer(basis[:, j], basis[:, j].conj())
        joint[0, j] = p1 * _prob(e, r1)
        joint[1, j] = p2 * _prob(e, r2)
    joint = np.clip(joint, 0.0, None)
    joint /= joint.sum()
    marg_i = joint.sum(axis=1)
    marg_j = joint.sum(axis=0)
    total = 0.0
    for i in range(2):
        for j in range(joint.shape[1]):
            if joint[i, j] > 0 and marg_j[j] > 0:
                total += joint[i, j] * math.log2(joint[i, j] / (marg_i[i] * marg_j[j]))
    return total


def saturation_instance(d: int = 2, n: int = 8, f: float = 0.5,
                        rng: np.random.Generator | None = None) -> BoundInstance:
    """Equal-branch, zero-coherence instance where the bound is tight at 1 bit."""
    rng = np.random.default_rng(0) if rng is None else rng
    u = qmath.random_unitary(d, rng)
    return BoundInstance(
        p1=0.5,
        p2=0.5,
        coherence=0.0,
        u1=u,
        u2=u.copy(),
        env_state=qmath.random_density_matrix(d, rng),
        environment_count=n,
        observed_fraction=f,
    )


def random_instance(rng: np.random.Generator, d: int = 2,
                    count_choices: tuple[int, ...] = (4, 8),
                    fraction_choices: tuple[float, ...] = (0.25, 0.5, 0.75),
                    in_regime: bool = True, max_draws: int = 200) -> BoundInstance:
    """Seeded random instance; resamples until the residues allow the bound regime."""
    for _ in range(max_draws):
        n = int(rng.choice(count_choices))
        f = float(rng.choice(fraction_choices))
        p1 = rng.uniform(0.05, 0.95)
        mag = rng.uniform(0.0, math.sqrt(p1 * (1.0 - p1)))
        phase = rng.uniform(0.0, 2.0 * math.pi)
        inst = BoundInstance(
            p1=p1,
            p2=1.0 - p1,
            coherence=mag * complex(math.cos(phase), math.sin(phase)),
            u1=qmath.random_unitary(d, rng),
            u2=qmath.random_unitary(d, rng),
            env_state=qmath.random_density_matrix(d, rng),
            environment_count=n,
            observed_fraction=f,
        )
        if not in_regime:
            return inst
        lam = abs(np.trace(inst.u1 @ inst.env_state @ inst.u2.conj().T))
        eps_fe = 2.0 * abs(inst.coherence) * lam ** ((1.0 - f) * n)
        if eps_fe <= REGIME_LIMIT:
            return inst
    raise ConfigError(f"no in-regime instance found in {max_draws} draws")
