"""Closed-form tier: decoherence factor and time, overlap rates, timescales.

Finite-box expressions are powers of (1 - q) with q = O(1/L^2); the
thermodynamic limit (L to infinity at fixed number density) turns them into
exponentials. Both forms are exposed; the limit is an explicit flag, never an
implicit default. Powers with huge exponents are evaluated through
exp(n*log1p(-q)) so the finite-box/limit comparison is not drowned in
rounding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import qmath
from .errors import ConfigError, RegimeError
from .scatter import PhotonDistribution, ScatteringGeometry, ShellUnitary, environment_state

INTEGRALITY_TOL = 1e-9


@dataclass(frozen=True)
class MacrofractionSpec:
    """Partition of the photon environment into equal macroscopic fractions.

    ``per_fraction`` (m) is the share of all N_t photons in one macrofraction,
    ``observed`` (f) the total observed share; 1/m and f/m must be integral.
    """

    per_fraction: float
    observed: float
    photon_count: float

    def __post_init__(self):
        if not 0 < self.per_fraction <= 1:
            raise ConfigError("per_fraction must be in (0, 1]")
        if not 0 <= self.observed <= 1:
            raise ConfigError("observed fraction must be in [0, 1]")
        if self.photon_count < 0:
            raise ConfigError("photon_count must be >= 0")
        if abs(self.count - round(1.0 / self.per_fraction)) > INTEGRALITY_TOL:
            raise ConfigError("1/per_fraction must be an integer within 1e-9")
        if abs(self.observed_count - round(self.observed * self.count)) > INTEGRALITY_TOL:
            raise ConfigError("observed*count must be an integer within 1e-9")

    @property
    def count(self) -> float:
        """Number of macrofractions M = 1/m."""
        return 1.0 / self.per_fraction

    @property
    def observed_count(self) -> float:
        """Number of observed macrofractions f*M."""
        return self.observed * self.count


@dataclass(frozen=True)
class OverlapReport:
    """Distinguishability rates of the single-photon records.

    alpha is the share of the diagonal deficit not returned by off-diagonal
    scattering; None when undefined (no distinguishing power). Degenerate
    distributions carry the exact-overlap fallback in ``micro_overlap_exact``.
    """

    eta_bar: float
    eta_prime: float
    alpha: float | None
    tau_d: float
    micro_overlap_value: float
    geometry: ScatteringGeometry
    consistency_rel_dev: float
    degenerate: bool = False
    micro_overlap_exact: float | None = None
    alpha_exact: float | None = None
    flags: tuple[str, ...] = ()

    def with_alpha(self, alpha: float) -> "OverlapReport":
        """Copy of the report with a user-supplied scalar alpha."""
        if not 0 <= alpha <= 1:
            raise ConfigError("alpha must be in [0, 1]")
        return replace(self, alpha=alpha, flags=self.flags + ("alpha_override",))


def angular_weighted_k6(dist: PhotonDistribution) -> float:
    """sum_k p(k) k^6 (3 + 11 cos^2 Theta_k) over the distribution."""
    grid = dist.grid
    terms = dist.probs * grid.node_k**6 * (3.0 + 11.0 * grid.cos_theta**2)
    return math.fsum(terms)


def _box_deficit(dist: PhotonDistribution, geom: ScatteringGeometry) -> float:
    """q such that the per-photon decoherence base is 1 - q, q = O(1/L^2)."""
    a6 = geom.effective_radius**6
    return (
        2.0 * math.pi * geom.displacement**2 * a6 / (15.0 * geom.box_edge**2)
    ) * angular_weighted_k6(dist)


def decoherence_factor(dist: PhotonDistribution, geom: ScatteringGeometry,
                       f: float, n_t: float) -> float:
    """(1 - q)^((1-f) N_t): coherence suppression by the unobserved photons."""
    if not 0 <= f <= 1:
        raise ConfigError("observed fraction f must be in [0, 1]")
    if n_t < 0:
        raise ConfigError("photon count must be >= 0")
    q = _box_deficit(dist, geom)
    if q >= 1.0:
        raise RegimeError(f"decoherence base 1 - {q:.3g} is not positive: regime too hard")
    exponent = (1.0 - f) * n_t
    if exponent == 0.0:
        return 1.0
    return math.exp(exponent * math.log1p(-q))


def decoherence_time(dist: PhotonDistribution, geom: ScatteringGeometry) -> float:
    """Coherence decay timescale; infinite for zero displacement."""
    if geom.displacement == 0.0:
        return math.inf
    rate = (
        (2.0 * math.pi / 15.0)
        * geom.number_density
        * geom.displacement**2
        * geom.light_speed
        * geom.effective_radius**6
        * angular_weighted_k6(dist)
    )
    if rate <= 0:
        raise RegimeError("decoherence rate must be positive for nonzero displacement")
    return 1.0 / rate


def _diagonal_deficits(u_rel: ShellUnitary) -> np.ndarray:
    d = u_rel.diagonal
    re, im = d.real, d.imag
    # (1 - re) is exact for re in [0.5, 2], which the soft sector guarantees
    return (1.0 - re) * (1.0 + re) - im * im


def eta_bars(u_rel: ShellUnitary, dist: PhotonDistribution) -> OverlapReport:
    """Distinguishability rates of single-photon records from an explicit unitary.

    eta_bar measures the p-weighted diagonal deficit of the relative
    scattering operator, eta_prime the p-weighted off-diagonal weight; their
    gap (scaled by L^2) is what the macro records can accumulate. For an
    exactly unitary operator the two agree up to rounding, so alpha is
    reported near zero; non-injective (degenerate) distributions additionally
    get the exact generalized-overlap fallback, flagged.
    """
    same_grid = u_rel.grid is dist.grid or (
        np.array_equal(u_rel.grid.node_k, dist.grid.node_k)
        and np.array_equal(u_rel.grid.node_dir, dist.grid.node_dir)
    )
    if not same_grid:
        raise ConfigError("unitary and distribution live on different grids")
    if u_rel.geometry is None:
        raise ConfigError("unitary carries no geometry; build it with build_relative_unitary")
    geom = u_rel.geometry
    l2 = geom.box_edge**2
    p = dist.probs
    deficits = _diagonal_deficits(u_rel)
    eta_bar = 0.5 * l2 * math.fsum(p * deficits)
    off = np.abs(u_rel.entries) ** 2
    np.fill_diagonal(off, 0.0)
    eta_prime = 0.5 * l2 * math.fsum(p * off.sum(axis=1))
    tau_d = decoherence_time(dist, geom)
    flags: tuple[str, ...] = ()
    if eta_bar <= 0.0:
        alpha = None
        flags += ("no_distinguishing_power",)
    else:
        alpha = min(max((eta_bar - eta_prime) / eta_bar, 0.0), 1.0)
    micro = min(max(1.0 - (eta_bar - eta_prime) / l2, 0.0), 1.0)
    if math.isinf(tau_d):
        consistency = math.inf if eta_bar > 0 else 0.0
    else:
        analytic = 1.0 / (tau_d * geom.number_density * geom.light_speed)
        consistency = abs(eta_bar / analytic - 1.0)
    degenerate = _is_degenerate(p)
    exact = exact_alpha = None
    if degenerate:
        flags += ("degenerate_distribution",)
        exact = exact_micro_overlap(u_rel, dist)
        if eta_bar > 0:
            exact_alpha = min(max(l2 * (1.0 - exact) / eta_bar, 0.0), 1.0)
    return OverlapReport(
        eta_bar=eta_bar,
        eta_prime=eta_prime,
        alpha=alpha,
        tau_d=tau_d,
        micro_overlap_value=micro,
        geometry=geom,
        consistency_rel_dev=consistency,
        degenerate=degenerate,
        micro_overlap_exact=exact,
        alpha_exact=exact_alpha,
        flags=flags,
    )


def _is_degenerate(probs: np.ndarray) -> bool:
    """True when the support weights are not pairwise distinct."""
    support = np.sort(probs[probs > 0])
    if len(support) < 2:
        return True
    gaps = np.diff(support)
    return bool(np.any(gaps <= 1e-12 * support[-1]))


def exact_micro_overlap(u_rel: ShellUnitary, dist: PhotonDistribution) -> float:
    """Generalized overlap of the two explicit single-photon records.

    Unitary invariance reduces the pair of scattered states to the initial
    diagonal state and its image under the relative operator.
    """
    rho0 = environment_state(dist)
    rotated = u_rel.entries @ rho0 @ u_rel.entries.conj().T
    return qmath.generalized_overlap(rho0, rotated)


def micro_overlap(report: OverlapReport, box_edge: float | None = None) -> float:
    """Single-photon record overlap 1 - (eta_bar - eta_prime)/L^2."""
    l2 = (report.geometry.box_edge if box_edge is None else box_edge) ** 2
    return 1.0 - (report.eta_bar - report.eta_prime) / l2


def macro_overlap(t: float, m: float, report: OverlapReport,
                  thermodynamic: bool = False) -> float:
    """Record overlap of one macrofraction after time t.

    Finite box: (1 - alpha*eta_bar/L^2)^(m N_t); thermodynamic flag replaces
    it with exp(-alpha m t / tau_d).
    """
    if t < 0:
        raise ConfigError("t must be >= 0")
    alpha = report.alpha
    if alpha is None:
        raise ConfigError(
            "alpha undefined for this report; supply one with OverlapReport.with_alpha"
        )
    if thermodynamic:
        if math.isinf(report.tau_d):
            return 1.0
        return math.exp(-alpha * m * t / report.tau_d)
    geom = report.geometry
    q = alpha * report.eta_bar / geom.box_edge**2
    exponent = m * geom.photons_scattered(t)
    if exponent == 0.0 or q == 0.0:
        return 1.0
    return math.exp(exponent * math.log1p(-q))


def timescales(report: OverlapReport) -> tuple[float, float]:
    """(decoherence timescale, record-orthogonalization timescale)."""
    alpha = report.alpha
    if alpha is None or alpha == 0.0:
        return (report.tau_d, math.inf)
    return (report.tau_d, report.tau_d / alpha)
