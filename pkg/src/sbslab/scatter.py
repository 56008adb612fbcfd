"""Discretized momentum-shell model of the photon environment.

A dielectric sphere of radius ``a`` and relative permittivity ``eps`` sits at
one of two locations separated by ``delta_x`` inside a quantization box of
edge ``L``. Photons live on a discrete shell grid: a few wavenumber
magnitudes, each carrying a set of unit direction vectors. Scattering is
elastic, so the relative scattering operator between the two sphere
locations is block diagonal over magnitudes, with diagonal matrix elements
given by the second-order dipole expansion (valid for k*delta_x << 1) and
off-diagonal entries fixed only up to the unitarity sum rule. The explicit
unitary built here is one admissible, seed-reproducible choice.

Conventions: the displacement points along +z, so cos(Theta) of a grid
direction is its z component. The polar nodes are symmetric and rescaled so
that their plain (equal-weight) average integrates polynomials in cos(Theta)
of degree <= 3 exactly; uniform isotropic node weights then reproduce the
continuum angular averages used by the closed-form tier.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, ConfigError, RegimeError

SOFT_WARN_THRESHOLD = 0.1
SOFT_ERROR_THRESHOLD = 0.5
UNITARITY_TOL = 1e-9
DIRECTION_NORM_TOL = 1e-12


@dataclass(frozen=True)
class ScatteringGeometry:
    """Sphere, displacement, and quantization-box parameters.

    Attributes
    ----------
    radius : sphere radius a (length)
    permittivity : relative permittivity, dimensionless, > 0
    displacement : separation of the two sphere locations (length, >= 0)
    box_edge : quantization box edge L (length, > 0)
    number_density : photon number density N/V (1/volume)
    light_speed : photon speed c (length/time)
    """

    radius: float
    permittivity: float
    displacement: float
    box_edge: float
    number_density: float
    light_speed: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigError("radius must be > 0")
        if self.permittivity <= 0:
            raise ConfigError("permittivity must be > 0")
        if self.displacement < 0:
            raise ConfigError("displacement must be >= 0")
        if self.box_edge <= 0:
            raise ConfigError("box_edge must be > 0")
        if self.number_density <= 0:
            raise ConfigError("number_density must be > 0")
        if self.light_speed <= 0:
            raise ConfigError("light_speed must be > 0")

    @property
    def effective_radius(self) -> float:
        """Dipole-weighted radius a * ((eps-1)/(eps+2))^(1/3) (real cube root)."""
        ratio = (self.permittivity - 1.0) / (self.permittivity + 2.0)
        return self.radius * math.copysign(abs(ratio) ** (1.0 / 3.0), ratio)

    def photons_scattered(self, t: float) -> float:
        """Number of photons scattered up to time t: L^2 (N/V) c t."""
        return self.box_edge**2 * self.number_density * self.light_speed * t


def polar_nodes(n_cos: int) -> np.ndarray:
    """Symmetric cos(Theta) nodes whose equal-weight mean of cos^2 is exactly 1/3.

    Gauss-Legendre nodes rescaled by the factor that enforces
    sum(x^2)/n = 1/3; odd moments vanish by symmetry, so plain averages over
    these nodes integrate polynomials of degree <= 3 exactly.
    """
    if n_cos < 2:
        raise ConfigError("n_cos must be >= 2")
    x, _ = np.polynomial.legendre.leggauss(n_cos)
    scale = math.sqrt(n_cos / (3.0 * float(np.sum(x**2))))
    nodes = scale * x
    if np.max(np.abs(nodes)) >= 1.0:
        raise ConfigError(f"rescaled polar nodes leave (-1, 1) for n_cos={n_cos}")
    return nodes


def _directions(n_cos: int, n_phi: int) -> np.ndarray:
    if n_phi < 1:
        raise ConfigError("n_phi must be >= 1")
    cos_t = polar_nodes(n_cos)
    sin_t = np.sqrt(1.0 - cos_t**2)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    dirs = np.empty((n_cos * n_phi, 3))
    idx = 0
    for c, s in zip(cos_t, sin_t):
        for p in phi:
            dirs[idx] = (s * math.cos(p), s * math.sin(p), c)
            idx += 1
    return dirs


@dataclass(frozen=True)
class ShellGrid:
    """Flattened momentum-shell grid: per node a magnitude and a unit direction."""

    magnitudes: np.ndarray
    node_k: np.ndarray
    node_dir: np.ndarray
    block_bounds: tuple[int, ...]

    def __post_init__(self):
        norms = np.linalg.norm(self.node_dir, axis=1)
        if np.max(np.abs(norms - 1.0)) > DIRECTION_NORM_TOL:
            raise ConfigError("grid directions are not unit-normalized")
        if any(self.degeneracy(i) < 1 for i in range(len(self.magnitudes))):
            raise ConfigError("every magnitude needs at least one direction")

    @property
    def size(self) -> int:
        return len(self.node_k)

    @property
    def cos_theta(self) -> np.ndarray:
        return self.node_dir[:, 2]

    @property
    def wavevectors(self) -> np.ndarray:
        return self.node_k[:, None] * self.node_dir

    def block_slice(self, i: int) -> slice:
        return slice(self.block_bounds[i], self.block_bounds[i + 1])

    def degeneracy(self, i: int) -> int:
        """Number of directions at magnitude i (Omega_k)."""
        return self.block_bounds[i + 1] - self.block_bounds[i]

    def soft_scores(self, delta_x: float) -> np.ndarray:
        """k * delta_x per node; << 1 is the soft-scattering sector."""
        return self.node_k * delta_x


def shell_grid(magnitudes, n_cos: int = 8, n_phi: int = 8) -> ShellGrid:
    """Grid with the same direction set repeated on each magnitude shell."""
    mags = np.atleast_1d(np.asarray(magnitudes, dtype=float))
    if mags.size == 0:
        raise ConfigError("at least one wavenumber magnitude required")
    if np.any(mags <= 0):
        raise ConfigError("wavenumber magnitudes must be > 0")
    if len(np.unique(mags)) != len(mags):
        raise ConfigError("wavenumber magnitudes must be distinct")
    mags = np.sort(mags)
    dirs = _directions(n_cos, n_phi)
    node_k = np.repeat(mags, len(dirs))
    node_dir = np.vstack([dirs] * len(mags))
    bounds = tuple(range(0, (len(mags) + 1) * len(dirs), len(dirs)))
    return ShellGrid(mags, node_k, node_dir, bounds)


def _grid_from_nodes(groups: dict[float, list[tuple[float, float, float]]]) -> ShellGrid:
    mags = np.array(sorted(groups), dtype=float)
    node_k, node_dir, bounds = [], [], [0]
    for m in mags:
        for d in groups[m]:
            node_k.append(m)
            node_dir.append(d)
        bounds.append(len(node_k))
    return ShellGrid(mags, np.array(node_k), np.array(node_dir), tuple(bounds))


@dataclass(frozen=True)
class PhotonDistribution:
    """Discrete momentum measure p(k) on a shell grid."""

    grid: ShellGrid
    probs: np.ndarray
    max_soft_score: float

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (self.grid.size,):
            raise ConfigError("probability vector length does not match grid size")
        if np.any(p < 0):
            raise ConfigError("probabilities must be >= 0")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise ConfigError("probabilities must sum to 1 within 1e-12")
        object.__setattr__(self, "probs", p)

    def mean_wavenumber(self) -> float:
        return float(np.dot(self.probs, self.grid.node_k))


def _check_soft_support(grid: ShellGrid, probs: np.ndarray, delta_x: float) -> float:
    support = probs > 0
    score = float(np.max(grid.soft_scores(delta_x)[support])) if support.any() else 0.0
    if score > SOFT_ERROR_THRESHOLD:
        raise RegimeError(
            f"distribution support has k*delta_x = {score:.3g} > {SOFT_ERROR_THRESHOLD}"
        )
    if score > SOFT_WARN_THRESHOLD:
        warnings.warn(
            f"distribution support has k*delta_x = {score:.3g} > {SOFT_WARN_THRESHOLD}; "
            "dipole truncation error grows as (k*delta_x)^3",
            RuntimeWarning,
            stacklevel=3,
        )
    return score


def dipole_element(k: float, theta: float, geom: ScatteringGeometry) -> complex:
    """Diagonal relative scattering amplitude for a displaced dielectric sphere.

    Second-order expansion in k*delta_x of the matrix element between a plane
    wave and itself, with Theta the angle between the wavevector and the
    displacement axis. Warns above k*delta_x = 0.1 and refuses above 0.5.
    """
    return _dipole_from_cos(k, math.cos(theta), geom)


def _dipole_from_cos(k: float, cos_theta: float, geom: ScatteringGeometry) -> complex:
    score = k * geom.displacement
    if score > SOFT_ERROR_THRESHOLD:
        raise RegimeError(f"k*delta_x = {score:.3g} exceeds hard threshold {SOFT_ERROR_THRESHOLD}")
    if score > SOFT_WARN_THRESHOLD:
        warnings.warn(
            f"k*delta_x = {score:.3g} > {SOFT_WARN_THRESHOLD}; dipole expansion degrades",
            RuntimeWarning,
            stacklevel=3,
        )
    a6 = geom.effective_radius**6
    l2 = geom.box_edge**2
    dx = geom.displacement
    imag = (8.0 * math.pi * dx * k**5 * a6 / (3.0 * l2)) * cos_theta
    real = 1.0 - (2.0 * math.pi * dx**2 * k**6 * a6 / (15.0 * l2)) * (3.0 + 11.0 * cos_theta**2)
    value = complex(real, imag)
    if abs(value) > 1.0 + 1e-9:
        raise RegimeError(
            f"|dipole element| = {abs(value):.12g} > 1: box too small for the expansion"
        )
    return value


@dataclass(frozen=True)
class ShellUnitary:
    """Explicit unitary on the grid, block diagonal over magnitude shells."""

    grid: ShellGrid
    entries: np.ndarray
    label: str
    geometry: ScatteringGeometry | None = None

    def __post_init__(self):
        u = np.asarray(self.entries, dtype=complex)
        n = self.grid.size
        if u.shape != (n, n):
            raise ConfigError("unitary shape does not match grid size")
        dev = np.max(np.abs(u.conj().T @ u - np.eye(n)))
        if dev > UNITARITY_TOL:
            raise ConfigError(f"matrix is not unitary: max |U^dag U - 1| = {dev:.3e}")
        mask = np.ones((n, n), dtype=bool)
        for i in range(len(self.grid.magnitudes)):
            sl = self.grid.block_slice(i)
            mask[sl, sl] = False
        if np.any(u[mask] != 0):
            raise ConfigError("elastic structure violated: nonzero entries across magnitudes")
        object.__setattr__(self, "entries", u)

    @property
    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.entries)


def _polar_factor(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def _skew_phase_pattern(rng: np.random.Generator, n: int) -> np.ndarray:
    """Unit-modulus off-diagonal pattern with W = -W^dag, so 1 + scaled W is
    unitary to second order in the scale."""
    theta = rng.uniform(0.0, 2.0 * np.pi, size=(n, n))
    upper = np.triu(np.exp(1j * theta), 1)
    return upper - upper.conj().T


def _calibrate_block(mags: np.ndarray, deficits: np.ndarray, pattern: np.ndarray,
                     max_iter: int, rel_tol: float) -> tuple[np.ndarray, float]:
    """Iterate per-node off-diagonal weights until the polar factor's diagonal
    magnitudes reproduce the targets; returns (best unitary, deficit error)."""
    weights = deficits.copy()
    floor = 1e-300
    best, best_err = None, np.inf
    for _ in range(max_iter):
        off = np.sqrt(np.outer(weights, weights) / weights.sum()) * pattern
        u = _polar_factor(np.diag(mags.astype(complex)) + off)
        achieved = np.maximum(1.0 - np.abs(np.diagonal(u)) ** 2, floor)
        err = float(np.max(np.abs(achieved - deficits)))
        if err < best_err:
            best, best_err = u, err
        # stop at the requested relative accuracy or the float granularity
        # of deficits computed next to 1
        if err < max(rel_tol * deficits.max(), 1e-14):
            break
        weights = weights * (deficits / achieved)
    return best, best_err


def _unitary_with_diagonal(diag: np.ndarray, rng: np.random.Generator,
                           max_iter: int = 300, rel_tol: float = 1e-10,
                           restarts: int = 4) -> np.ndarray:
    """Exactly unitary block whose diagonal reproduces `diag` to float accuracy.

    Magnitudes come from a fixed-point iteration on the off-diagonal weights
    (the polar factor of target-diagonal plus balanced random off-diagonals);
    diagonal phases are then set exactly by a free diagonal-phase rotation.
    Restarts with fresh off-diagonal phases if a pattern converges poorly.
    """
    n = len(diag)
    mags = np.abs(diag)
    deficits = np.maximum(1.0 - mags**2, 0.0)
    if np.max(deficits) < 1e-30 or n == 1:
        # nothing to scatter into, or a 1x1 block that can only carry a phase
        return np.diag(diag / np.abs(diag))
    goal = max(rel_tol * deficits.max(), 1e-14)
    best, best_err = None, np.inf
    for _ in range(restarts):
        u, err = _calibrate_block(mags, deficits, _skew_phase_pattern(rng, n),
                                  max_iter, rel_tol)
        if err < best_err:
            best, best_err = u, err
        if best_err < goal:
            break
    phase_fix = np.exp(1j * (np.angle(diag) - np.angle(np.diagonal(best))))
    return best * phase_fix[None, :]


def build_relative_unitary(grid: ShellGrid, geom: ScatteringGeometry,
                           seed: int = 0) -> ShellUnitary:
    """Exactly unitary relative scattering operator calibrated to the dipole diagonal.

    Per elastic block the diagonal reproduces the dipole amplitudes (to well
    inside the expansion's own truncation order) and the off-diagonal row
    weight is fixed by unitarity; off-diagonal phases are a seeded random
    admissible choice. Displacement 0 yields the identity exactly.
    """
    n = grid.size
    if n == 0:
        raise ConfigError("grid is empty")
    if geom.displacement == 0.0:
        return ShellUnitary(grid, np.eye(n, dtype=complex), "relative", geom)
    rng = np.random.default_rng(seed)
    entries = np.zeros((n, n), dtype=complex)
    cos_t = grid.cos_theta
    for i in range(len(grid.magnitudes)):
        sl = grid.block_slice(i)
        k = grid.magnitudes[i]
        diag = np.array([_dipole_from_cos(k, c, geom) for c in cos_t[sl]])
        entries[sl, sl] = _unitary_with_diagonal(diag, rng)
    unitary = ShellUnitary(grid, entries, "relative", geom)
    _check_calibration(unitary, geom)
    return unitary


def _check_calibration(unitary: ShellUnitary, geom: ScatteringGeometry) -> None:
    grid = unitary.grid
    target = np.array(
        [_dipole_from_cos(k, c, geom) for k, c in zip(grid.node_k, grid.cos_theta)]
    )
    dev = np.abs(unitary.diagonal - target)
    # truncation-order tolerance of the dipole expansion itself, with a
    # floating-point floor
    scale = (grid.node_k * geom.displacement) ** 3 * grid.node_k**4 * geom.effective_radius**6
    tol = max(10.0 * float(np.max(scale)) / geom.box_edge**2, 1e-12)
    worst = int(np.argmax(dev))
    if dev[worst] > tol:
        raise CalibrationError(
            f"diagonal mismatch {dev[worst]:.3e} > {tol:.3e} at node {worst} "
            f"(k={grid.node_k[worst]:.6g}, cos_theta={grid.cos_theta[worst]:.6g})"
        )


def translate_conjugate(s0: ShellUnitary, x) -> ShellUnitary:
    """Scattering operator for a scatterer displaced by x.

    Conjugation by momentum-space translation phases: entry (k, k') picks up
    exp(-i x.(k_vec - k_vec')); diagonal entries are untouched.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ConfigError("position must be a 3-vector")
    kv = s0.grid.wavevectors
    phase_arg = (kv @ x)[:, None] - (kv @ x)[None, :]
    entries = s0.entries * np.exp(-1j * phase_arg)
    return ShellUnitary(s0.grid, entries, f"{s0.label}@x", s0.geometry)


def make_distribution(kind: str, geom: ScatteringGeometry, **params) -> PhotonDistribution:
    """Build a photon momentum distribution of the given kind.

    Kinds
    -----
    point : all weight on one exact direction node appended to a shell at
        ``k0`` (``cos_theta``, ``phi`` select the direction, default +z).
    isotropic_monochromatic : uniform weight over the directions of a single
        shell at ``k0``.
    thermal : isotropic with a parametric thermal magnitude spectrum
        p(k) ~ k^2 / (exp(k/k_temp) - 1) sampled on Gauss-Legendre magnitude
        nodes up to the soft cutoff ``k_max``.
    custom : explicit ``grid`` and ``probs``.
    """
    if kind == "point":
        k0 = _require_param(params, "k0")
        cos_theta = float(params.pop("cos_theta", 1.0))
        phi = float(params.pop("phi", 0.0))
        n_cos = int(params.pop("n_cos", 8))
        n_phi = int(params.pop("n_phi", 8))
        _reject_extras(params, kind)
        base = shell_grid([k0], n_cos, n_phi)
        sin_theta = math.sqrt(max(1.0 - cos_theta**2, 0.0))
        point_dir = (sin_theta * math.cos(phi), sin_theta * math.sin(phi), cos_theta)
        node_dir = np.vstack([base.node_dir, point_dir])
        node_k = np.append(base.node_k, k0)
        grid = ShellGrid(base.magnitudes, node_k, node_dir, (0, len(node_k)))
        probs = np.zeros(grid.size)
        probs[-1] = 1.0
    elif kind == "isotropic_monochromatic":
        k0 = _require_param(params, "k0")
        n_cos = int(params.pop("n_cos", 8))
        n_phi = int(params.pop("n_phi", 8))
        _reject_extras(params, kind)
        grid = shell_grid([k0], n_cos, n_phi)
        probs = np.full(grid.size, 1.0 / grid.size)
    elif kind == "thermal":
        k_temp = _require_param(params, "k_temp")
        k_max = _require_param(params, "k_max")
        n_k = int(params.pop("n_k", 24))
        n_cos = int(params.pop("n_cos", 8))
        n_phi = int(params.pop("n_phi", 8))
        _reject_extras(params, kind)
        if k_temp <= 0 or k_max <= 0:
            raise ConfigError("k_temp and k_max must be > 0")
        x, w = np.polynomial.legendre.leggauss(n_k)
        ks = 0.5 * k_max * (x + 1.0)
        weights = w * ks**2 / np.expm1(ks / k_temp)
        weights /= math.fsum(weights)
        grid = shell_grid(ks, n_cos, n_phi)
        omega = grid.degeneracy(0)
        probs = np.repeat(weights / omega, omega)
        probs /= math.fsum(probs)
    elif kind == "custom":
        grid = params.pop("grid", None)
        probs = params.pop("probs", None)
        _reject_extras(params, kind)
        if grid is None or probs is None:
            raise ConfigError("custom distribution requires grid and probs")
        probs = np.asarray(probs, dtype=float)
    else:
        raise ConfigError(f"unknown distribution kind {kind!r}")
    score = _check_soft_support(grid, probs, geom.displacement)
    return PhotonDistribution(grid, probs, score)


def _require_param(params: dict, name: str) -> float:
    if name not in params:
        raise ConfigError(f"missing distribution parameter {name!r}")
    return float(params.pop(name))


def _reject_extras(params: dict, kind: str) -> None:
    if params:
        raise ConfigError(f"unexpected parameters for kind {kind!r}: {sorted(params)}")


CSV_COLUMNS = ("k_magnitude", "cos_theta", "phi", "prob")


def distribution_from_csv(path, geom: ScatteringGeometry) -> PhotonDistribution:
    """Load a distribution from CSV with columns k_magnitude, cos_theta, phi, prob."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != CSV_COLUMNS:
            raise ConfigError(f"{path}: header must be {','.join(CSV_COLUMNS)}")
        dirs: dict[float, list[tuple[float, float, float]]] = {}
        weights: dict[float, list[float]] = {}
        for row_idx, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ConfigError(f"{path}:{row_idx}: expected 4 columns")
            try:
                k, c, phi, prob = (float(v) for v in row)
            except ValueError as exc:
                raise ConfigError(f"{path}:{row_idx}: {exc}") from None
            if abs(c) > 1:
                raise ConfigError(f"{path}:{row_idx}: cos_theta outside [-1, 1]")
            s = math.sqrt(max(1.0 - c * c, 0.0))
            dirs.setdefault(k, []).append((s * math.cos(phi), s * math.sin(phi), c))
            weights.setdefault(k, []).append(prob)
    if not weights:
        raise ConfigError(f"{path}: no data rows")
    grid = _grid_from_nodes(dirs)
    p = np.asarray([w for m in sorted(weights) for w in weights[m]], dtype=float)
    score = _check_soft_support(grid, p, geom.displacement)
    return PhotonDistribution(grid, p, score)


def environment_state(dist: PhotonDistribution) -> np.ndarray:
    """Photon density matrix diag(p) in the grid momentum basis."""
    return np.diag(dist.probs.astype(complex))
