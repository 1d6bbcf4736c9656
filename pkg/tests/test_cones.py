import numpy as np
import pytest

from decomap import cones, linalg, modular
from decomap.errors import HullNotSupportedHere, LayoutMismatch, UnsupportedKind
from decomap.linalg import TensorLayout

from conftest import SIGMA_X


@pytest.fixture
def md_tensor22():
    return modular.tensor_modular(
        modular.build_modular(np.eye(2) / 2), modular.build_modular(np.eye(2) / 2))


def swap(n=2):
    s = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            s[n * i + j, n * j + i] = 1.0
    return s


class TestSpecValidation:
    def test_vbeta_range(self):
        with pytest.raises(UnsupportedKind):
            cones.ConeSpec(cones.VBETA, beta=0.75)

    def test_tensor_needs_layout(self):
        with pytest.raises(LayoutMismatch):
            cones.ConeSpec(cones.HULL)

    def test_hull_needs_dedicated_test(self, md_tensor22):
        spec = cones.ConeSpec(cones.HULL, layout=TensorLayout((2, 2)))
        with pytest.raises(HullNotSupportedHere):
            cones.cone_membership(md_tensor22, spec, np.eye(4))


class TestMembership:
    def test_psd_in_natural_tracial(self, md_tracial2):
        res = cones.cone_membership(
            md_tracial2, cones.ConeSpec(cones.NATURAL), np.diag([1.0, 0.0]))
        assert res.inside and res.residual == 0.0

    def test_sigma_x_outside_natural_tracial(self, md_tracial2):
        res = cones.cone_membership(md_tracial2, cones.ConeSpec(cones.NATURAL), SIGMA_X)
        assert not res.inside
        # reduction is sqrt(2) * sigma_x, most negative eigenvalue -sqrt(2)
        assert res.residual == pytest.approx(np.sqrt(2.0))
        assert res.witness is not None

    def test_v0_membership_by_construction(self, md_skew):
        xi = linalg.sample_psd(2, 7) @ md_skew.omega_vector
        res = cones.cone_membership(md_skew, cones.ConeSpec(cones.VBETA, beta=0.0), xi)
        assert res.inside

    def test_samples_are_members(self):
        md = modular.build_modular(linalg.sample_density(3, 2))
        for beta in (0.0, 0.125, 0.25, 0.375, 0.5):
            spec = cones.ConeSpec(cones.VBETA, beta=beta)
            xi = cones.sample_cone(md, spec, 5)
            assert cones.cone_membership(md, spec, xi, tol=1e-9).inside

    def test_omega_is_natural_sample_with_identity_seed_matrix(self, md_skew):
        res = cones.cone_membership(
            md_skew, cones.ConeSpec(cones.NATURAL), md_skew.omega_vector)
        assert res.inside

    def test_transposed_sample_reduction(self, md_tensor22):
        layout = TensorLayout((2, 2))
        spec = cones.ConeSpec(cones.TRANSPOSED_TENSOR, layout=layout)
        xi = cones.sample_cone(md_tensor22, spec, 3)
        r = md_tensor22.rho_inv_quarter @ xi @ md_tensor22.rho_inv_quarter
        pt = linalg.partial_transpose(r, layout, 2)
        assert linalg.psd_deficit(pt) <= 1e-10


class TestUMapping:
    def test_u_maps_vbeta_to_complement(self):
        md = modular.build_modular(linalg.sample_density(3, 13))
        for beta in (0.0, 0.125, 0.25, 0.375, 0.5):
            for s in range(5):
                xi = cones.sample_cone(md, cones.ConeSpec(cones.VBETA, beta=beta), 17 + s)
                u_xi = modular.apply_modular(md, modular.TRANSPOSITION_U, xi)
                res = cones.cone_membership(
                    md, cones.ConeSpec(cones.VBETA, beta=0.5 - beta), u_xi, tol=1e-8)
                assert res.inside

    def test_natural_cone_u_invariant(self):
        md = modular.build_modular(linalg.sample_density(4, 19))
        xi = cones.sample_cone(md, cones.ConeSpec(cones.NATURAL), 23)
        u_xi = modular.apply_modular(md, modular.TRANSPOSITION_U, xi)
        assert cones.cone_membership(md, cones.ConeSpec(cones.NATURAL), u_xi).inside


class TestHull:
    def test_psd_member_trivially(self, md_tensor22):
        c = np.eye(4) / 2
        res = cones.hull_membership(md_tensor22, c, TensorLayout((2, 2)))
        assert res.inside

    def test_swap_inside_via_transposed_part(self, md_tensor22):
        # SWAP has PSD partial transpose, so the split a = 0, b = SWAP works
        res = cones.hull_membership(md_tensor22, swap(), TensorLayout((2, 2)))
        assert res.inside

    def test_negative_identity_outside(self, md_tensor22):
        res = cones.hull_membership(md_tensor22, -np.eye(4), TensorLayout((2, 2)))
        assert not res.inside
        assert res.residual >= 1.0
        assert res.witness is not None

    def test_hull_samples_inside(self, md_tensor22):
        layout = TensorLayout((2, 2))
        for s in range(5):
            xi = cones.hull_sample(md_tensor22, layout, 100 + 2 * s, weight=0.3)
            assert cones.hull_membership(md_tensor22, xi, layout).inside


class TestGenerators:
    @pytest.fixture
    def factors(self):
        return (modular.build_modular(linalg.sample_density(2, 31)),
                modular.build_modular(linalg.sample_density(2, 32)))

    def test_generator_in_transposed_cone(self, factors):
        md_a, md_b = factors
        md = modular.tensor_modular(md_a, md_b)
        rng = np.random.default_rng(2)
        terms = [(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)),
                  rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
                 for _ in range(2)]
        gen = cones.transposed_tensor_generator(md_a, md_b, terms)
        spec = cones.ConeSpec(cones.TRANSPOSED_TENSOR, layout=TensorLayout((2, 2)))
        assert cones.cone_membership(md, spec, gen, tol=1e-7).inside

    def test_reverse_fit(self, factors):
        md_a, md_b = factors
        md = modular.tensor_modular(md_a, md_b)
        spec = cones.ConeSpec(cones.TRANSPOSED_TENSOR, layout=TensorLayout((2, 2)))
        for s in range(5):
            xi = cones.sample_cone(md, spec, 41 + s)
            dist, recon = cones.fit_transposed_generator(md_a, md_b, xi)
            assert dist <= 1e-6 * max(1.0, linalg.frobenius(xi))
            assert np.allclose(recon, xi, atol=1e-6)


class TestProbe:
    def test_tracial_two_by_two(self):
        rep = cones.probe_finite_dim_equality(2, 2, 51, 20)
        assert rep.max_residual <= 1e-9

    def test_two_by_three(self):
        rep = cones.probe_finite_dim_equality(2, 3, 52, 20)
        assert rep.max_residual <= 1e-8

    def test_empty(self):
        rep = cones.probe_finite_dim_equality(2, 2, 53, 0)
        assert rep.trials == 0 and rep.residuals == []

    def test_note_mentions_scope(self):
        rep = cones.probe_finite_dim_equality(2, 2, 54, 1)
        assert "open" in rep.note
