import numpy as np
import numpy.testing as npt
import pytest

import snodelab as sl
from snodelab.conformal import axis_density
from snodelab.errors import DimensionMismatch, MapSingularity


class TestMoebiusMap:
    def test_center_maps_to_origin(self, moebius):
        assert abs(moebius.to_disk(1j)) <= 1e-15
        assert abs(moebius.to_halfplane(0.0) - 1j) <= 1e-15

    def test_2i_maps_to_third(self, moebius):
        npt.assert_allclose(moebius.to_disk(2j), 1.0 / 3.0, atol=1e-15)

    def test_boundary_theta_pi_is_origin(self, moebius):
        assert abs(moebius.boundary_point(np.pi)) <= 1e-15
        # t(theta) = -cot(theta/2) for z0 = i
        theta = np.array([np.pi / 2, 3 * np.pi / 2, 1.0])
        npt.assert_allclose(moebius.boundary_point(theta), -1.0 / np.tan(theta / 2),
                            atol=1e-12)

    def test_round_trip(self, moebius):
        rng = np.random.default_rng(30)
        z = rng.uniform(-5, 5, 50) + 1j * rng.uniform(1e-3, 5, 50)
        npt.assert_allclose(moebius.to_halfplane(moebius.to_disk(z)), z, atol=1e-12)
        zeta = (rng.uniform(-1, 1, 50) + 1j * rng.uniform(-1, 1, 50)) * 0.7
        npt.assert_allclose(moebius.to_disk(moebius.to_halfplane(zeta)), zeta, atol=1e-12)

    def test_halfplane_disk_correspondence(self, moebius):
        rng = np.random.default_rng(31)
        z = rng.uniform(-5, 5, 100) + 1j * rng.uniform(-5, 5, 100)
        inside = np.abs(moebius.to_disk(z)) < 1
        npt.assert_array_equal(inside, z.imag > 0)

    def test_singularities(self, moebius):
        with pytest.raises(MapSingularity):
            moebius.to_disk(-1j)
        with pytest.raises(MapSingularity):
            moebius.to_halfplane(1.0)
        with pytest.raises(MapSingularity):
            sl.MoebiusMap(1.0 - 2j)


class TestTransport:
    def test_hat_of_e0_c_block(self, e0, moebius):
        # c(z) = -iz transports to (1+zeta)/(1-zeta)
        chat = sl.hat_transport(lambda z: -1j * z, moebius)
        for zeta in (0.0, 0.4, 0.3 - 0.2j):
            npt.assert_allclose(chat(zeta), (1 + zeta) / (1 - zeta), atol=1e-14)

    def test_constant_transports_to_itself(self, moebius):
        M = np.array([[1.0, 2.0], [3.0, 4.0]])
        fhat = sl.hat_transport(lambda z: M, moebius)
        npt.assert_array_equal(fhat(0.3j), M)

    def test_rational_example(self, moebius):
        fhat = sl.hat_transport(lambda z: 1.0 / (z + 1j), moebius)
        for zeta in (0.2, -0.5j, 0.1 + 0.1j):
            npt.assert_allclose(fhat(zeta), (zeta - 1) / (-2j), atol=1e-14)

    def test_breve_inverts_hat(self, moebius):
        f = lambda z: z ** 2 + 1.0 / (z + 3j)
        fb = sl.breve_transport(sl.hat_transport(f, moebius), moebius)
        rng = np.random.default_rng(32)
        for _ in range(20):
            z = complex(rng.uniform(-2, 2) + 1j * rng.uniform(0.05, 2))
            npt.assert_allclose(fb(z), f(z), atol=1e-12)

    def test_grid_transport_matches_direct(self, moebius, grid4096):
        f = lambda z: (z - 0.5) / (z + 2j)
        fhat = sl.hat_transport(f, moebius)
        theta = grid4096.angles[1:]
        t = moebius.boundary_point(theta)
        direct = f(t)
        via_disk = np.array([fhat(np.exp(1j * th)) for th in theta[:64]])
        npt.assert_allclose(via_disk, direct[:64], atol=1e-12)


class TestWeight:
    def test_weight_constant_for_default_center(self, moebius):
        theta = np.linspace(0.1, 2 * np.pi - 0.1, 64)
        npt.assert_allclose(sl.weight_transform(moebius, theta), 0.5, atol=1e-14)

    def test_quadrature_of_one_is_pi(self, moebius, grid4096):
        from snodelab.conformal import axis_quadrature

        total = axis_quadrature(np.ones(grid4096.N), grid4096, moebius)
        npt.assert_allclose(total, np.pi, atol=1e-8)

    def test_offcenter_weight_positive(self):
        m = sl.MoebiusMap(2j)
        theta = np.linspace(0.01, 2 * np.pi - 0.01, 256)
        w = sl.weight_transform(m, theta)
        assert np.all(w > 0)
        zeta = np.exp(1j * theta)
        expected = 4.0 / (np.abs(zeta - 1) ** 2 + np.abs(-2j * zeta - 2j) ** 2)
        npt.assert_allclose(w, expected, atol=1e-14)

    def test_quadrature_offcenter(self):
        from snodelab.conformal import axis_quadrature

        m = sl.MoebiusMap(1 + 2j)
        grid = sl.CircleGrid(4096)
        npt.assert_allclose(axis_quadrature(np.ones(grid.N), grid, m), np.pi, atol=1e-8)

    def test_weight_transform_raises_at_origin(self, moebius):
        with pytest.raises(MapSingularity):
            sl.weight_transform(moebius, 0.0)


class TestCircleGrid:
    def test_size_constraints(self):
        with pytest.raises(DimensionMismatch):
            sl.CircleGrid(100)
        with pytest.raises(DimensionMismatch):
            sl.CircleGrid(3000)
        g = sl.CircleGrid(256)
        assert g.N == 256 and g.excluded_index == 0

    def test_axis_points(self, moebius):
        g = sl.CircleGrid(256)
        t = g.axis_points(moebius)
        assert np.isinf(t[0])
        assert abs(t[128]) <= 1e-12  # theta = pi -> t = 0


class _StubEval:
    def __init__(self, fn, p=1):
        self.fn = fn
        self.p = p

    def eval_many(self, zs):
        return np.array([np.atleast_2d(self.fn(z)) for z in np.atleast_1d(zs)])


class TestExtractDensity:
    def test_e0_cauchy_density(self, e0, moebius, grid4096):
        h = sl.HerglotzEval(node=e0, pair=sl.identity_pair(1))
        d = sl.extract_density(h, grid4096, moebius)
        t = d.axis_points()
        k0 = grid4096.N // 2          # t = 0
        k1 = 3 * grid4096.N // 4      # t = 1
        npt.assert_allclose(d.values[k0, 0, 0], 1 / np.pi, atol=1e-9)
        npt.assert_allclose(t[k1], 1.0, atol=1e-12)
        npt.assert_allclose(d.values[k1, 0, 0], 1 / (2 * np.pi), atol=1e-9)
        assert d.psd_defect <= 1e-8
        assert not d.pole_flags.any()

    def test_constant_herglotz(self, moebius, grid4096):
        h = _StubEval(lambda z: 1j)
        d = sl.extract_density(h, grid4096, moebius)
        npt.assert_allclose(d.values[:, 0, 0], 1 / np.pi, atol=1e-10)

    def test_real_boundary_values_give_zero(self, moebius, grid4096):
        h = _StubEval(lambda z: z)
        d = sl.extract_density(h, grid4096, moebius)
        mask = np.arange(grid4096.N) != grid4096.excluded_index
        assert np.abs(d.values[mask, 0, 0]).max() <= 1e-9

    def test_axis_values_alias(self, e0, moebius, grid4096):
        h = sl.HerglotzEval(node=e0, pair=sl.identity_pair(1))
        d = sl.extract_density(h, grid4096, moebius)
        assert d.axis_values is d.values

    def test_pole_on_axis_flagged(self, moebius):
        # phi with a genuine pole at t = 0: phi(z) = -1/z
        h = _StubEval(lambda z: -1.0 / z)
        grid = sl.CircleGrid(256)
        d = sl.extract_density(h, grid, moebius)
        assert d.pole_flags[grid.N // 2]

    def test_center_invariance_at_matched_points(self, e0, grid4096):
        # transport the evaluator through two different map centers; the
        # extracted axis values must agree at the matched t-points
        map_a = sl.MoebiusMap(1j)
        map_b = sl.MoebiusMap(1 + 2j)
        h = sl.HerglotzEval(node=e0, pair=sl.identity_pair(1))
        d_a = sl.extract_density(h, grid4096, map_a)
        ts = d_a.axis_points()
        mask = np.arange(grid4096.N) != 0
        hat_b = sl.hat_transport(h, map_b)
        breve_b = sl.breve_transport(hat_b, map_b)
        vals_b, _ = axis_density(
            _StubEval(breve_b).eval_many, ts[mask], eps=1e-5
        )
        diff = np.abs(vals_b[:, 0, 0] - d_a.values[mask, 0, 0]).max()
        assert diff <= 1e-8
