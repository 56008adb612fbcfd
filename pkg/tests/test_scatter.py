import math

import numpy as np
import pytest

from sbslab import scatter
from sbslab.errors import ConfigError, RegimeError


def geometry(**overrides):
    params = dict(
        radius=2.0,
        permittivity=4.0,
        displacement=1.0,
        box_edge=100.0,
        number_density=0.01,
        light_speed=1.0,
    )
    params.update(overrides)
    return scatter.ScatteringGeometry(**params)


class TestGeometry:
    def test_effective_radius_formula(self):
        geom = geometry()
        assert geom.effective_radius == pytest.approx(2.0 * (3.0 / 6.0) ** (1 / 3), rel=1e-14)

    def test_sub_unit_permittivity_gives_real_cube_root(self):
        geom = geometry(permittivity=0.5)
        assert geom.effective_radius < 0
        assert geom.effective_radius**6 > 0

    @pytest.mark.parametrize(
        "field,value",
        [
            ("radius", 0.0),
            ("permittivity", -1.0),
            ("displacement", -0.1),
            ("box_edge", 0.0),
            ("number_density", 0.0),
            ("light_speed", 0.0),
        ],
    )
    def test_invalid_fields_rejected(self, field, value):
        with pytest.raises(ConfigError):
            geometry(**{field: value})

    def test_photon_count(self):
        geom = geometry(box_edge=10.0, number_density=0.5, light_speed=2.0)
        assert geom.photons_scattered(3.0) == pytest.approx(10.0**2 * 0.5 * 2.0 * 3.0)


class TestShellGrid:
    def test_directions_unit_normalized(self):
        grid = scatter.shell_grid([0.1, 0.2], n_cos=8, n_phi=8)
        norms = np.linalg.norm(grid.node_dir, axis=1)
        assert np.max(np.abs(norms - 1.0)) < 1e-12

    def test_degeneracy_counts(self):
        grid = scatter.shell_grid([0.1, 0.2], n_cos=4, n_phi=6)
        assert grid.degeneracy(0) == 24
        assert grid.degeneracy(1) == 24
        assert grid.size == 48

    @pytest.mark.parametrize("n_cos", [2, 4, 8, 12])
    def test_equal_weight_nodes_integrate_cos_squared_exactly(self, n_cos):
        grid = scatter.shell_grid([0.1], n_cos=n_cos, n_phi=4)
        assert np.mean(grid.cos_theta**2) == pytest.approx(1.0 / 3.0, abs=1e-14)
        assert abs(np.mean(grid.cos_theta)) < 1e-14

    def test_soft_scores(self):
        grid = scatter.shell_grid([0.1, 0.3])
        scores = grid.soft_scores(2.0)
        assert scores.min() == pytest.approx(0.2)
        assert scores.max() == pytest.approx(0.6)

    def test_duplicate_magnitudes_rejected(self):
        with pytest.raises(ConfigError):
            scatter.shell_grid([0.1, 0.1])


class TestDipoleElement:
    def test_zero_displacement_is_unity(self):
        geom = geometry(displacement=0.0)
        assert scatter.dipole_element(0.1, 0.3, geom) == 1.0 + 0.0j

    def test_equatorial_value(self):
        geom = geometry()
        k = 0.1
        a6 = geom.effective_radius**6
        expected_real = 1.0 - (2 * math.pi * k**6 * a6 / (15 * geom.box_edge**2)) * 3.0
        d = scatter.dipole_element(k, math.pi / 2, geom)
        assert d.real == pytest.approx(expected_real, abs=1e-15)
        assert abs(d.imag) < 1e-20

    def test_forward_value(self):
        geom = geometry()
        k = 0.1
        a6 = geom.effective_radius**6
        l2 = geom.box_edge**2
        expected = complex(
            1.0 - (2 * math.pi * k**6 * a6 / (15 * l2)) * 14.0,
            8 * math.pi * k**5 * a6 / (3 * l2),
        )
        d = scatter.dipole_element(k, 0.0, geom)
        assert abs(d - expected) < 1e-15

    def test_warns_in_marginal_regime(self):
        geom = geometry()
        with pytest.warns(RuntimeWarning, match="dipole expansion"):
            scatter.dipole_element(0.2, 0.0, geom)

    def test_hard_regime_rejected(self):
        geom = geometry()
        with pytest.raises(RegimeError, match="hard threshold"):
            scatter.dipole_element(0.55, 0.0, geom)

    def test_magnitude_below_unity(self):
        geom = geometry(radius=5.0)
        for cos_t in np.linspace(-1, 1, 7):
            d = scatter._dipole_from_cos(0.1, cos_t, geom)
            assert abs(d) <= 1.0 + 1e-9


class TestBuildRelativeUnitary:
    def test_zero_displacement_is_identity(self):
        geom = geometry(displacement=0.0)
        grid = scatter.shell_grid([0.1], n_cos=4, n_phi=4)
        u = scatter.build_relative_unitary(grid, geom)
        assert np.array_equal(u.entries, np.eye(grid.size))

    def test_exactly_unitary(self):
        geom = geometry()
        grid = scatter.shell_grid([0.08, 0.1], n_cos=4, n_phi=4)
        u = scatter.build_relative_unitary(grid, geom, seed=3)
        dev = np.max(np.abs(u.entries.conj().T @ u.entries - np.eye(grid.size)))
        assert dev < 1e-9
        assert dev < 1e-13  # construction lands at solver precision

    def test_diagonal_matches_dipole_within_truncation_order(self):
        geom = geometry()
        grid = scatter.shell_grid([0.1], n_cos=8, n_phi=8)
        u = scatter.build_relative_unitary(grid, geom, seed=0)
        target = np.array(
            [
                scatter._dipole_from_cos(k, c, geom)
                for k, c in zip(grid.node_k, grid.cos_theta)
            ]
        )
        dev = np.max(np.abs(u.diagonal - target))
        scale = (
            (grid.node_k * geom.displacement) ** 3
            * grid.node_k**4
            * geom.effective_radius**6
        )
        assert dev < 10.0 * float(np.max(scale)) / geom.box_edge**2
        assert dev < 1e-13

    def test_elastic_blocks_exactly_zero(self):
        geom = geometry()
        grid = scatter.shell_grid([0.05, 0.1], n_cos=4, n_phi=4)
        u = scatter.build_relative_unitary(grid, geom, seed=1)
        half = grid.degeneracy(0)
        assert np.all(u.entries[:half, half:] == 0)
        assert np.all(u.entries[half:, :half] == 0)

    def test_row_sum_rule(self):
        geom = geometry()
        grid = scatter.shell_grid([0.1], n_cos=8, n_phi=8)
        u = scatter.build_relative_unitary(grid, geom, seed=2)
        row_sums = np.sum(np.abs(u.entries) ** 2, axis=1)
        assert np.max(np.abs(row_sums - 1.0)) < 1e-9

    def test_off_diagonal_weight_tracks_unitarity_deficit(self):
        geom = geometry()
        grid = scatter.shell_grid([0.1], n_cos=4, n_phi=4)
        u = scatter.build_relative_unitary(grid, geom, seed=5)
        off = np.abs(u.entries) ** 2
        np.fill_diagonal(off, 0.0)
        deficits = 1.0 - np.abs(u.diagonal) ** 2
        assert np.max(np.abs(off.sum(axis=1) - deficits)) < 1e-12
        # aggregate off-diagonal weight is set by the box size
        assert off.sum() < 10.0 * grid.size / geom.box_edge**2

    def test_deterministic_given_seed(self):
        geom = geometry()
        grid = scatter.shell_grid([0.1], n_cos=4, n_phi=4)
        u1 = scatter.build_relative_unitary(grid, geom, seed=7)
        u2 = scatter.build_relative_unitary(grid, geom, seed=7)
        assert np.array_equal(u1.entries, u2.entries)

    def test_empty_grid_rejected(self):
        with pytest.raises(ConfigError):
            scatter.shell_grid([])


class TestTranslateConjugate:
    def setup_method(self):
        self.geom = geometry()
        self.grid = scatter.shell_grid([0.1], n_cos=4, n_phi=4)
        self.s0 = scatter.build_relative_unitary(self.grid, self.geom, seed=4)

    def test_zero_translation_is_identity_map(self):
        moved = scatter.translate_conjugate(self.s0, np.zeros(3))
        assert np.array_equal(moved.entries, self.s0.entries)

    def test_diagonal_invariant(self):
        moved = scatter.translate_conjugate(self.s0, np.array([0.3, -1.2, 2.0]))
        assert np.max(np.abs(moved.diagonal - self.s0.diagonal)) == 0.0

    def test_off_diagonal_phases(self):
        x = np.array([0.4, 0.7, -0.2])
        moved = scatter.translate_conjugate(self.s0, x)
        kv = self.grid.wavevectors
        i, j = 1, 6
        expected = self.s0.entries[i, j] * np.exp(-1j * np.dot(x, kv[i] - kv[j]))
        assert abs(moved.entries[i, j] - expected) < 1e-12

    def test_strong_convergence_proxy(self):
        # the two displaced scatterers act identically on soft states as the
        # displacement shrinks, monotonically along a halving sequence
        rng = np.random.default_rng(0)
        phi = rng.normal(size=self.grid.size) + 1j * rng.normal(size=self.grid.size)
        phi /= np.linalg.norm(phi)
        norms = []
        for dx in (0.4, 0.2, 0.1, 0.05, 0.025):
            s2 = scatter.translate_conjugate(self.s0, np.array([0.0, 0.0, dx]))
            norms.append(np.linalg.norm((self.s0.entries - s2.entries) @ phi))
        assert all(a > b for a, b in zip(norms, norms[1:]))
        assert norms[-1] < norms[0] / 8


class TestMakeDistribution:
    def test_point_concentrates_on_exact_direction(self):
        geom = geometry()
        dist = scatter.make_distribution("point", geom, k0=0.1)
        assert np.count_nonzero(dist.probs) == 1
        node = int(np.argmax(dist.probs))
        assert dist.probs[node] == 1.0
        assert np.array_equal(dist.grid.node_dir[node], [0.0, 0.0, 1.0])

    def test_isotropic_26_direction_shell_is_uniform(self):
        geom = geometry()
        dist = scatter.make_distribution(
            "isotropic_monochromatic", geom, k0=0.1, n_cos=2, n_phi=13
        )
        assert dist.grid.size == 26
        assert np.all(dist.probs == 1.0 / 26.0)

    def test_thermal_normalization_and_mean(self):
        quad = pytest.importorskip("scipy.integrate")
        geom = geometry()
        k_temp, k_max = 0.02, 0.1
        dist = scatter.make_distribution("thermal", geom, k_temp=k_temp, k_max=k_max)
        assert abs(math.fsum(dist.probs) - 1.0) < 1e-12
        weight = lambda k: k**2 / math.expm1(k / k_temp)
        norm, _ = quad.quad(weight, 0.0, k_max)
        first, _ = quad.quad(lambda k: k * weight(k), 0.0, k_max)
        assert dist.mean_wavenumber() == pytest.approx(first / norm, rel=1e-9)

    def test_thermal_isotropic_per_shell(self):
        geom = geometry()
        dist = scatter.make_distribution("thermal", geom, k_temp=0.02, k_max=0.1, n_k=6)
        grid = dist.grid
        for i in range(len(grid.magnitudes)):
            block = dist.probs[grid.block_slice(i)]
            assert np.max(np.abs(block - block[0])) < 1e-18

    def test_hard_soft_threshold_enforced(self):
        geom = geometry()
        with pytest.raises(RegimeError, match="k\\*delta_x"):
            scatter.make_distribution("point", geom, k0=0.6)

    def test_soft_warning(self):
        geom = geometry()
        with pytest.warns(RuntimeWarning, match="truncation"):
            scatter.make_distribution("point", geom, k0=0.2)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="unknown"):
            scatter.make_distribution("maxwellian", geometry(), k0=0.1)

    def test_custom(self):
        geom = geometry()
        grid = scatter.shell_grid([0.1], n_cos=2, n_phi=2)
        probs = np.array([0.1, 0.2, 0.3, 0.4])
        dist = scatter.make_distribution("custom", geom, grid=grid, probs=probs)
        assert np.array_equal(dist.probs, probs)

    def test_unnormalized_rejected(self):
        geom = geometry()
        grid = scatter.shell_grid([0.1], n_cos=2, n_phi=2)
        with pytest.raises(ConfigError, match="sum to 1"):
            scatter.make_distribution("custom", geom, grid=grid, probs=[0.1, 0.2, 0.3, 0.3])


class TestCsvImport:
    HEADER = "k_magnitude,cos_theta,phi,prob"

    def test_round_trip(self, tmp_path):
        path = tmp_path / "dist.csv"
        rows = [
            "0.1,0.5,0.0,0.25",
            "0.1,-0.5,1.5707963267948966,0.35",
            "0.05,0.0,3.0,0.4",
        ]
        path.write_text(self.HEADER + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
        dist = scatter.distribution_from_csv(path, geometry())
        assert dist.grid.size == 3
        assert abs(math.fsum(dist.probs) - 1.0) < 1e-12
        # magnitudes sorted ascending; the 0.05 node comes first
        assert dist.grid.node_k[0] == pytest.approx(0.05)
        assert dist.probs[0] == pytest.approx(0.4)

    def test_header_validated(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("k,cos_theta,phi,prob\n0.1,0,0,1\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="header must be"):
            scatter.distribution_from_csv(path, geometry())

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ConfigError, match="empty"):
            scatter.distribution_from_csv(path, geometry())

    def test_no_rows(self, tmp_path):
        path = tmp_path / "norows.csv"
        path.write_text(self.HEADER + "\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="no data rows"):
            scatter.distribution_from_csv(path, geometry())


class TestEnvironmentState:
    def test_diagonal_in_grid_basis(self):
        geom = geometry()
        dist = scatter.make_distribution("isotropic_monochromatic", geom, k0=0.1, n_cos=2, n_phi=2)
        rho = scatter.environment_state(dist)
        assert np.array_equal(np.diagonal(rho).real, dist.probs)
        assert np.all(rho == np.diag(np.diagonal(rho)))
