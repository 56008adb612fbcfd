"""Shared test fixtures: brute-force oracles and canonical instances."""

from __future__ import annotations

import numpy as np

from sbslab import oracle, qmath
from sbslab.config import rotation_y


def brute_force_joint_state(rho_s, rho_e, u1, u2, n_t, f):
    """Full-Hilbert-space evolution followed by a partial trace.

    Independent of the structured assembly: builds the complete controlled
    unitary on 2 * d^n_t dimensions and traces out the unobserved photons.
    Only usable at n_t <= 8.
    """
    d = rho_e.shape[0]
    observed = round(f * n_t)
    big = d**n_t
    u = np.zeros((2 * big, 2 * big), dtype=complex)
    u[:big, :big] = oracle.kron_power(u1, n_t)
    u[big:, big:] = oracle.kron_power(u2, n_t)
    rho0 = np.kron(rho_s, oracle.kron_power(rho_e, n_t))
    rho_t = u @ rho0 @ u.conj().T
    dims = [2] + [d] * n_t
    keep = [0] + list(range(1, observed + 1))
    return qmath.partial_trace(rho_t, dims, keep)


def random_out_state_args(rng, n_t=None, f=None):
    """Seeded random two-branch instance with integral f*N_t."""
    if n_t is None:
        n_t = int(rng.choice([4, 6, 8]))
    if f is None:
        f = float(rng.choice([0.25, 0.5, 0.75]))
        while abs(f * n_t - round(f * n_t)) > 1e-9:
            f = float(rng.choice([0.25, 0.5, 0.75]))
    p1 = rng.uniform(0.2, 0.8)
    mag = rng.uniform(0.0, np.sqrt(p1 * (1 - p1)))
    phase = rng.uniform(0, 2 * np.pi)
    c12 = mag * np.exp(1j * phase)
    rho_s = np.array([[p1, c12], [np.conj(c12), 1 - p1]])
    # keep the environment state well conditioned so tensor-power spectra
    # stay far above solver noise
    rho_e = 0.8 * qmath.random_density_matrix(2, rng) + 0.2 * np.eye(2) / 2
    u1 = qmath.random_unitary(2, rng)
    u2 = qmath.random_unitary(2, rng)
    return rho_s, rho_e, u1, u2, n_t, f


def plateau_instance(theta=1.4, p1=0.5):
    """Strongly-distinguishing rotation instance: pure environment, opposite
    quarter-ish rotations per branch."""
    c12 = np.sqrt(p1 * (1 - p1))
    rho_s = np.array([[p1, c12], [c12, 1 - p1]], dtype=complex)
    rho_e = np.zeros((2, 2), dtype=complex)
    rho_e[0, 0] = 1.0
    return rho_s, rho_e, rotation_y(-theta), rotation_y(theta)


def product_phase_instance(theta=0.9 * np.pi):
    """Noise-dominated instance: branch unitaries scramble phases of a state
    they commute with, so records carry nothing while coherences still decay."""
    rho_s = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    rho_e = np.diag([0.55, 0.45]).astype(complex)
    u1 = np.eye(2, dtype=complex)
    u2 = np.diag([1.0, np.exp(1j * theta)])
    return rho_s, rho_e, u1, u2
