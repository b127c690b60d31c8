import numpy as np
import numpy.testing as npt
import pytest

import snodelab as sl
from snodelab.errors import InteriorSingularity, NotContractive, PoleInRegion


class TestDiskFrame:
    def test_e0_at_center(self, e0, moebius):
        d = sl.build_disk_frame(e0, 0.0, moebius)
        npt.assert_allclose(d.calA * np.sqrt(2), [[-1, 1], [0, 2]], atol=1e-14)
        # calA* J calA + j = [[1,-1],[-1,1]] >= 0
        c = e0.constants()
        form = d.calA.conj().T @ c.J @ d.calA + c.j
        npt.assert_allclose(form, [[1, -1], [-1, 1]], atol=1e-14)
        assert d.jform_lmin >= -1e-14

    def test_block_average_identity(self, moment_p2, moebius):
        rng = np.random.default_rng(40)
        for _ in range(10):
            zeta = complex((rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.7)
            d = sl.build_disk_frame(moment_p2, zeta, moebius)
            f = sl.eval_frame(moment_p2, complex(moebius.to_halfplane(zeta)))
            expected = (f.A21 + f.A22) / np.sqrt(2)
            assert np.abs(d.A22 - expected).max() <= 1e-12

    def test_signed_jform_psd_over_random_points(self, moment_p2, moebius):
        from conftest import disk_point

        rng = np.random.default_rng(41)
        for _ in range(100):
            d = sl.build_disk_frame(moment_p2, disk_point(rng), moebius)
            assert d.jform_lmin >= -1e-10 * np.linalg.norm(d.calA, 2) ** 2


class TestChi:
    def test_e0_chi_is_zeta(self, e0, moebius):
        npt.assert_allclose(sl.chi(e0, 0.0, moebius), [[0.0]], atol=1e-14)
        npt.assert_allclose(sl.chi(e0, 0.5, moebius), [[0.5]], atol=1e-12)
        rng = np.random.default_rng(42)
        for _ in range(10):
            zeta = complex((rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.8)
            npt.assert_allclose(sl.chi(e0, zeta, moebius), [[zeta]], atol=1e-12)

    def test_contraction_on_disk(self, moment_p2, moebius):
        rng = np.random.default_rng(43)
        for _ in range(100):
            zeta = complex((rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.85)
            if abs(zeta) >= 1:
                continue
            assert np.linalg.norm(sl.chi(moment_p2, zeta, moebius), 2) < 1.0


class TestDelta:
    def test_e0_center(self, e0, moebius):
        npt.assert_allclose(sl.delta(e0, 0.0, moebius), [[0.5]], atol=1e-12)

    def test_e0_real_radius(self, e0, moebius):
        for r in (0.25, 0.5, 0.75):
            npt.assert_allclose(sl.delta(e0, r, moebius),
                                [[(1 - r) / (2 * (1 + r))]], atol=1e-12)

    def test_identity_with_rho_p2(self, moment_p2, moebius):
        rng = np.random.default_rng(44)
        for _ in range(20):
            zeta = complex((rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.7)
            d = sl.delta(moment_p2, zeta, moebius)  # raises if identity off by >1e-9
            z = complex(moebius.to_halfplane(zeta))
            ref = sl.rho_inverse(moment_p2, z)
            assert np.linalg.norm(d - ref, 2) <= 1e-9 * (1 + np.linalg.norm(ref, 2))


class TestDiskLft:
    def test_e0_zero_parameter(self, e0, moebius):
        f0 = sl.disk_lft(e0, np.zeros((1, 1)), 0.0, moebius)
        npt.assert_allclose(f0, [[0.5]], atol=1e-14)
        phi_i = sl.eval_phi(e0, sl.identity_pair(1), 1j)
        npt.assert_allclose(f0, phi_i / 1j, atol=1e-14)

    def test_real_part_psd(self, moment_p2, moebius):
        rng = np.random.default_rng(45)
        q = np.zeros((2, 2))
        for _ in range(50):
            zeta = complex((rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.7)
            f = sl.disk_lft(moment_p2, q, zeta, moebius)
            assert np.linalg.eigvalsh(0.5 * (f + f.conj().T))[0] >= -1e-10

    def test_transport_consistency(self, moment_p2, moebius):
        # phi built from the transported pair equals i f(zeta) pointwise
        rng = np.random.default_rng(46)
        q = np.zeros((2, 2))
        pair = sl.pair_from_disk_pair(q, np.eye(2), moebius)
        h = sl.HerglotzEval(node=moment_p2, pair=pair)
        for _ in range(20):
            zeta = complex((rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.7)
            f = sl.disk_lft(moment_p2, q, zeta, moebius)
            phi = h(complex(moebius.to_halfplane(zeta)))
            assert np.abs(phi - 1j * f).max() <= 1e-10

    def test_nondegenerate_contraction_b6(self, moment_p2, moebius):
        qm = np.array([[0.3, 0.1], [0.0, -0.4j]])
        pair = sl.pair_from_disk_pair(qm, np.eye(2), moebius)
        h = sl.HerglotzEval(node=moment_p2, pair=pair)
        for zeta in (0.2, -0.3 + 0.4j, 0.6j):
            f = sl.disk_lft(moment_p2, qm, complex(zeta), moebius)
            phi = h(complex(moebius.to_halfplane(zeta)))
            assert np.abs(phi - 1j * f).max() <= 1e-10

    def test_callable_disk_parameter_transport(self, moment_p2, moebius):
        # non-constant holomorphic contraction q(zeta) = zeta/2 I
        q = lambda zeta: 0.5 * zeta * np.eye(2)
        pair = sl.pair_from_disk_pair(q, np.eye(2), moebius, p=2)
        h = sl.HerglotzEval(node=moment_p2, pair=pair)
        rng = np.random.default_rng(48)
        samples = rng.uniform(-2, 2, 30) + 1j * rng.uniform(0.05, 2.0, 30)
        assert sl.check_pair(pair, samples).passed
        assert sl.check_herglotz(h, samples[:10]) >= -1e-10
        for zeta in (0.3, -0.2 + 0.5j):
            f = sl.disk_lft(moment_p2, q, complex(zeta), moebius)
            phi = h(complex(moebius.to_halfplane(zeta)))
            assert np.abs(phi - 1j * f).max() <= 1e-10

    def test_rejects_expansion(self, e0, moebius):
        with pytest.raises(NotContractive):
            sl.disk_lft(e0, 1.5 * np.eye(1), 0.0, moebius)


class TestVerifyInequality:
    def test_e0_identity_pair(self, e0, moebius, grid4096):
        run = sl.verify_inequality(e0, sl.identity_pair(1), [1j, 2j],
                                   grid=grid4096, moebius=moebius)
        assert run.passed and not run.hypothesis_warnings
        at_i, at_2i = run.reports
        npt.assert_allclose(at_i.lhs_min, 0.5, atol=1e-6)
        npt.assert_allclose(at_i.rhs_min, 0.5, atol=1e-12)
        assert at_i.equality
        npt.assert_allclose(at_2i.lhs_min, 2.0 / 9.0, atol=1e-6)
        npt.assert_allclose(at_2i.rhs_min, 0.25, atol=1e-12)
        npt.assert_allclose(at_2i.gap, 1.0 / 36.0, atol=1e-6)
        assert not at_2i.equality
        assert run.boundary_residual <= 1e-6

    def test_equality_pair_mechanism(self, e0, moebius, grid4096):
        rng = np.random.default_rng(47)
        lam = 2j
        pair = sl.equality_pair(e0, lam)
        others = list(rng.uniform(-2, 2, 20) + 1j * rng.uniform(0.1, 2.0, 20))
        run = sl.verify_inequality(e0, pair, [lam] + others, grid=grid4096,
                                   moebius=moebius, skip_diagnostics=True)
        assert run.reports[0].equality
        assert all(r.gap > 0 and not r.equality for r in run.reports[1:])

    def test_disk_equality_parameter(self, e0, moebius, grid4096):
        # q-hat = chi(zeta~)* realizes equality at zeta~ (half-plane z~)
        zeta_t = 1.0 / 3.0
        q = sl.chi(e0, zeta_t, moebius).conj().T
        pair = sl.pair_from_disk_pair(q, np.eye(1), moebius)
        z_t = complex(moebius.to_halfplane(zeta_t))
        run = sl.verify_inequality(e0, pair, [z_t, 1j], grid=grid4096,
                                   moebius=moebius, skip_diagnostics=True)
        assert run.reports[0].equality
        assert not run.reports[1].equality

    def test_p2_pipeline_static_node(self, static_p2, moebius, grid4096):
        pair = sl.constant_pair(np.eye(2), [[2.0, 0.5], [0.5, 1.0]])
        run = sl.verify_inequality(static_p2, pair, [1j, 0.5 + 1.5j],
                                   grid=grid4096, moebius=moebius)
        assert run.passed
        assert run.boundary_residual <= 1e-6
        for r in run.reports:
            assert r.gap >= 0

    def test_p2_equality_pair(self, static_p2, moebius, grid4096):
        lam = 1 + 1j
        pair = sl.equality_pair(static_p2, lam)
        run = sl.verify_inequality(static_p2, pair, [lam, 2j], grid=grid4096,
                                   moebius=moebius, skip_diagnostics=True)
        at_lam = run.reports[0]
        assert abs(at_lam.gap) <= 1e-6 * np.linalg.norm(at_lam.rhs, 2)
        assert run.reports[1].gap > 0

    def test_fast_decay_density_rejected_honestly(self, moment_p2, moebius, grid4096):
        # nilpotent A of index >= 2 makes the extremal densities decay faster
        # than 1/t^2; the samples adjacent to zeta = 1 then sit below the
        # extraction noise floor and the factorization refuses them
        from snodelab.errors import DensityNotPD

        with pytest.raises(DensityNotPD):
            sl.verify_inequality(moment_p2, sl.identity_pair(2), [1j],
                                 grid=grid4096, moebius=moebius,
                                 skip_diagnostics=True)

    @pytest.mark.parametrize("z0", [1 + 2j, 0.5j, -3 + 0.7j])
    def test_equality_survives_offcenter_maps(self, e0, grid4096, z0):
        # exercises the weighted singular Szegő term and the peel at general z0
        mm = sl.MoebiusMap(z0)
        run = sl.verify_inequality(e0, sl.identity_pair(1), [1j, 2j],
                                   grid=grid4096, moebius=mm,
                                   skip_diagnostics=True)
        at_i, at_2i = run.reports
        assert abs(at_i.lhs_min - 0.5) <= 1e-6 and at_i.equality
        assert abs(at_2i.gap - 1.0 / 36.0) <= 1e-6
        target = -2 * np.pi * np.log(2) - np.pi * np.log(np.pi)
        assert abs(run.szego.value - target) <= 1e-4

    def test_counterexample_violation_with_warning(self, ai_node, moebius, grid4096):
        run = sl.verify_inequality(ai_node, sl.identity_pair(1), [2j],
                                   grid=grid4096, moebius=moebius)
        r = run.reports[0]
        npt.assert_allclose(r.lhs_min, 2.0, atol=1e-6)
        npt.assert_allclose(r.rhs_min, 0.25, atol=1e-6)
        assert not r.passed
        assert not run.passed
        assert any("HypothesisFail" in w for w in run.hypothesis_warnings)

    def test_flip_repairs_counterexample(self, ai_node, moebius, grid4096):
        # the sign-flip companion moves spec(A) to the lower half-plane: the
        # same phi = i becomes the extremal solution and the inequality holds
        fl = sl.flip_node(ai_node)
        assert sl.validate_node(fl).passed
        assert sl.spectrum_report(fl, r0=2.0).prop41_ok
        assert sl.smirnov_diagnostics(fl, moebius, grid=grid4096).passed
        assert sl.growth_diagnostics(fl, r0=2.0).passed
        run = sl.verify_inequality(fl, sl.identity_pair(1), [1j, 2j],
                                   grid=grid4096, moebius=moebius,
                                   skip_diagnostics=True)
        at_i, at_2i = run.reports
        npt.assert_allclose(at_i.lhs_min, 2.0, atol=1e-6)
        npt.assert_allclose(at_i.rhs_min, 2.0, atol=1e-6)
        assert at_i.equality
        npt.assert_allclose(at_2i.gap, 0.25, atol=1e-6)
        assert at_2i.passed and not at_2i.equality

    def test_p3_pipeline(self, moebius, grid4096):
        node = sl.SNode(A=np.zeros((3, 3)), S=np.diag([1.0, 2.0, 4.0]),
                        Phi1=np.zeros((3, 3)), Phi2=np.eye(3))
        q0 = [[2.0, 0.5, 0.1], [0.5, 1.5, 0.2], [0.1, 0.2, 1.0]]
        run = sl.verify_inequality(node, sl.constant_pair(np.eye(3), q0),
                                   [1j, 0.3 + 0.8j], grid=grid4096, moebius=moebius)
        assert run.passed and run.boundary_residual <= 1e-6
        lam = 0.5 + 1.2j
        run_eq = sl.verify_inequality(node, sl.equality_pair(node, lam), [lam],
                                      grid=grid4096, moebius=moebius,
                                      skip_diagnostics=True)
        rep = run_eq.reports[0]
        assert abs(rep.gap) <= 1e-6 * np.linalg.norm(rep.rhs, 2)
        assert rep.equality


class TestSmirnov:
    def test_e0_passes(self, e0, moebius, grid4096):
        rep = sl.smirnov_diagnostics(e0, moebius, grid=grid4096)
        assert rep.passed and rep.fwd_converged and rep.inv_converged

    def test_moment_node_passes(self, moment_p2, moebius, grid4096):
        assert sl.smirnov_diagnostics(moment_p2, moebius, grid=grid4096).passed

    def test_ai_node_interior_pole(self, ai_node, moebius, grid4096):
        with pytest.raises(InteriorSingularity):
            sl.smirnov_diagnostics(ai_node, moebius, grid=grid4096)

    def test_block_diagonal_fails(self, moebius, grid4096):
        node = sl.SNode(A=[[0, 0], [0, 1j]], S=np.eye(2),
                        Phi1=[[0, 0], [0, 1]], Phi2=[[1, 0], [0, 1]])
        assert sl.validate_node(node).passed
        with pytest.raises(InteriorSingularity):
            sl.smirnov_diagnostics(node, moebius, grid=grid4096)


class TestGrowth:
    def test_e0_bounded(self, e0):
        rep = sl.growth_diagnostics(e0, r0=0.5)
        assert rep.passed and rep.bounded
        assert np.nanmax(rep.M_upper) <= 1.0 + 1e-9

    def test_jordan_polynomial_growth(self, jordan2):
        rep = sl.growth_diagnostics(jordan2, r0=0.5)
        assert rep.passed and not rep.bounded
        assert rep.kappa <= 0.2
        for prof in (rep.M_upper, rep.M_annulus, rep.M_lower):
            vals = prof[np.isfinite(prof)]
            assert np.all(np.diff(vals) >= -1e-12)

    def test_ai_node_pole_in_region(self, ai_node):
        with pytest.raises(PoleInRegion):
            sl.growth_diagnostics(ai_node, r0=0.5)

    def test_moment_node_passes(self, moment_p2):
        assert sl.growth_diagnostics(moment_p2, r0=0.5).passed
