import cmath
import math

import numpy as np
import pytest

from halfpoisson import companion as comp
from halfpoisson import model as mdl

RNG = np.random.default_rng(12345)


def _random_sector_lambda(phi, rng=RNG):
    ray = rng.uniform(-phi, phi)
    mod = 10.0 ** rng.uniform(0, 4)
    return mod * cmath.exp(1j * ray)


class TestFrequencyPoint:
    def test_rejects_origin(self):
        with pytest.raises(ValueError):
            comp.make_frequency_point(np.zeros(1), 0.0, 1)

    def test_rescaling_normalization(self):
        fp = comp.make_frequency_point(np.array([3.0]), 16.0 + 0j, 1)
        # rho^2 = 1 + |xi'|^2 + |lambda|^{1/m}
        assert fp.rho == pytest.approx(math.sqrt(1 + 9 + 16))
        assert np.allclose(fp.b, 3.0 / fp.rho)
        assert fp.sigma == pytest.approx((16.0 + 0j) / fp.rho ** 2)

    def test_bilaplacian_scaling(self):
        fp = comp.make_frequency_point(np.array([0.0]), 16.0 + 0j, 2)
        assert fp.rho == pytest.approx(math.sqrt(1 + 4))


class TestStableRoots:
    def test_dirichlet_laplacian_root(self):
        p = mdl.dirichlet_laplacian()
        fp = comp.make_frequency_point(np.array([0.0]), 4.0 + 0j, p.m)
        taus = comp.stable_roots(p, fp)
        # lambda + tau^2 = 0 with Im tau > 0: tau = 2i
        assert np.allclose(taus, [2.0j])

    def test_bilaplacian_roots_frozen(self):
        # [DERIVED] tau^4 = -16, stable quartet members at 2 e^{i pi/4}, 2 e^{3 i pi/4}
        p = mdl.clamped_bilaplacian()
        fp = comp.make_frequency_point(np.array([0.0]), 16.0 + 0j, p.m)
        taus = sorted(comp.stable_roots(p, fp), key=lambda z: z.real)
        assert np.allclose(taus[0], -1.414213562373095 + 1.4142135623730951j)
        assert np.allclose(taus[1], 1.4142135623730951 + 1.414213562373095j)

    def test_root_count_matches_m(self):
        for factory in mdl.BUNDLED.values():
            p = factory()
            for _ in range(10):
                lam = _random_sector_lambda(p.phi)
                xi = RNG.uniform(-5, 5, size=p.n - 1)
                fp = comp.make_frequency_point(xi, lam, p.m)
                assert len(comp.stable_roots(p, fp)) == p.m


class TestCompanionSystem:
    @pytest.mark.parametrize("name", sorted(mdl.BUNDLED))
    def test_delta_identity(self, name):
        """Boundary rows applied to M give the identity: Lambda M = I."""
        p = mdl.BUNDLED[name]()
        for _ in range(20):
            lam = _random_sector_lambda(p.phi)
            xi = RNG.uniform(-5, 5, size=p.n - 1)
            fp = comp.make_frequency_point(xi, lam, p.m)
            cs = comp.build_companion(p, fp)
            assert np.allclose(cs.boundary_rows @ cs.M, np.eye(p.m), atol=1e-10)

    def test_projector_idempotent_and_absorbs_m(self):
        p = mdl.clamped_bilaplacian()
        lam = _random_sector_lambda(p.phi)
        fp = comp.make_frequency_point(np.array([1.3]), lam, p.m)
        cs = comp.build_companion(p, fp)
        assert np.allclose(cs.Pminus @ cs.Pminus, cs.Pminus, atol=1e-10)
        assert np.allclose(cs.Pminus @ cs.M, cs.M, atol=1e-10)

    def test_projector_commutes_with_companion(self):
        p = mdl.clamped_bilaplacian()
        fp = comp.make_frequency_point(np.array([0.7]), 9.0 + 3.0j, p.m)
        cs = comp.build_companion(p, fp)
        assert np.allclose(cs.Pminus @ cs.A0, cs.A0 @ cs.Pminus, atol=1e-10)

    def test_projector_rank(self):
        p = mdl.clamped_bilaplacian()
        fp = comp.make_frequency_point(np.array([0.7]), 9.0 + 3.0j, p.m)
        cs = comp.build_companion(p, fp)
        assert np.linalg.matrix_rank(cs.Pminus, tol=1e-8) == p.m

    def test_lopatinskii_error_on_duplicate_rows(self):
        base = mdl.clamped_bilaplacian()
        trace = base.boundary_ops[0]
        p = mdl.ModelProblem(
            n=2, m=2, interior_coeffs=base.interior_coeffs,
            boundary_ops=[trace, trace],
            phi_prime=base.phi_prime, phi=base.phi)
        fp = comp.make_frequency_point(np.array([1.0]), 4.0 + 0j, p.m)
        with pytest.raises(comp.LopatinskiiError):
            comp.build_companion(p, fp)


class TestPropagate:
    def test_dirichlet_closed_form_frozen(self):
        # [DERIVED] kernel e^{-kappa x} at xi'=1.5, lambda=100 e^{i pi/3}, x=0.7
        p = mdl.dirichlet_laplacian()
        lam = 100 * cmath.exp(1j * math.pi / 3)
        fp = comp.make_frequency_point(np.array([1.5]), lam, p.m)
        cs = comp.build_companion(p, fp)
        got = comp.propagate(cs, 0.7, 0)[0, 0]
        assert got == pytest.approx(-0.0020656776311573245 + 0.0006833352477115405j,
                                    rel=1e-10)

    def test_neumann_closed_form_frozen(self):
        # [DERIVED] kernel -(i/kappa) e^{-kappa x} at the same point
        p = mdl.neumann_laplacian()
        lam = 100 * cmath.exp(1j * math.pi / 3)
        fp = comp.make_frequency_point(np.array([1.5]), lam, p.m)
        cs = comp.build_companion(p, fp)
        got = comp.propagate(cs, 0.7, 0)[0, 0]
        assert got == pytest.approx(0.00016014749961047742 + 0.00014545499183182616j,
                                    rel=1e-10)

    def test_derivative_consistency(self):
        """Row k of the propagated state is D_n^k of row 0."""
        p = mdl.clamped_bilaplacian()
        fp = comp.make_frequency_point(np.array([0.4]), 5.0 + 1.0j, p.m)
        cs = comp.build_companion(p, fp)
        x = 0.3
        first_deriv = comp.propagate(cs, x, 1)[0]
        h = 1e-6
        fd = (-1j) * (comp.propagate(cs, x + h, 0)[0]
                      - comp.propagate(cs, x - h, 0)[0]) / (2 * h)
        assert np.allclose(first_deriv, fd, rtol=1e-6, atol=1e-9)

    def test_negative_x_rejected(self):
        p = mdl.dirichlet_laplacian()
        fp = comp.make_frequency_point(np.array([0.0]), 4.0 + 0j, p.m)
        cs = comp.build_companion(p, fp)
        with pytest.raises(ValueError):
            comp.propagate(cs, -0.1)

    @pytest.mark.parametrize("name", sorted(mdl.BUNDLED))
    def test_schur_vs_root_basis(self, name):
        """Dual-route cross-check: ordered-Schur pipeline vs exponential basis."""
        p = mdl.BUNDLED[name]()
        for _ in range(15):
            lam = _random_sector_lambda(p.phi)
            xi = RNG.uniform(-4, 4, size=p.n - 1)
            fp = comp.make_frequency_point(xi, lam, p.m)
            cs = comp.build_companion(p, fp)
            xs = np.array([0.0, 0.2, 1.1])
            for j in range(p.m):
                g = np.zeros(p.m)
                g[j] = 1.0
                rb = comp.root_basis_solution(cs, g, xs)
                sch = np.array([comp.propagate(cs, xv, 0)[0, j] for xv in xs])
                scale = max(np.abs(rb).max(), 1e-30)
                assert np.abs(rb - sch).max() / scale < 1e-8

    def test_decay_along_normal(self):
        p = mdl.dirichlet_laplacian()
        fp = comp.make_frequency_point(np.array([2.0]), 50.0 + 10.0j, p.m)
        cs = comp.build_companion(p, fp)
        v0 = abs(comp.propagate(cs, 0.0)[0, 0])
        v1 = abs(comp.propagate(cs, 1.0)[0, 0])
        assert v1 < v0 * 1e-2


class TestConditioning:
    def test_conditioning_never_raises(self):
        base = mdl.clamped_bilaplacian()
        trace = base.boundary_ops[0]
        p = mdl.ModelProblem(
            n=2, m=2, interior_coeffs=base.interior_coeffs,
            boundary_ops=[trace, trace],
            phi_prime=base.phi_prime, phi=base.phi)
        fp = comp.make_frequency_point(np.array([1.0]), 4.0 + 0j, p.m)
        sv, cond = comp.boundary_map_conditioning(p, fp)
        assert sv < 1e-8

    def test_well_posed_case_well_conditioned(self):
        p = mdl.dirichlet_laplacian()
        fp = comp.make_frequency_point(np.array([1.0]), 4.0 + 0j, p.m)
        sv, cond = comp.boundary_map_conditioning(p, fp)
        assert sv > 1e-2
        assert cond < 1e3
