import numpy as np
import pytest

from torsionlab import basegrid, charclass, tubefun
from torsionlab.errors import (
    AtlasMismatch,
    EigenvalueGapLost,
    NoLimit,
    SingularZeroLevel,
)


@pytest.fixture(scope="module")
def circle():
    return basegrid.build_base("circle", 32)


@pytest.fixture(scope="module")
def sphere2():
    return basegrid.build_base("sphere2", 16)


class TestAsymptotics:
    def test_exact_quadratic_has_zero_residual(self, circle):
        f = tubefun.preset_standard_quadratic(circle).as_tube_function()
        fa = tubefun.asymptotic_quadratic(f)
        assert fa.asymptotic.residual <= 1e-12

    def test_linear_term_does_not_obstruct(self, circle):
        f = tubefun.TubeFunction(
            circle, 2,
            lambda m, v: v[..., 0] ** 2 - v[..., 1] ** 2 + 3.0 * v[..., 0] - 1.0,
            index=1,
        )
        fa = tubefun.asymptotic_quadratic(f)
        assert fa.asymptotic.residual <= 1e-10

    def test_quartic_growth_raises(self, circle):
        f = tubefun.TubeFunction(
            circle, 2,
            lambda m, v: (v[..., 0] ** 2 + v[..., 1] ** 2) ** 2,
            index=0,
        )
        with pytest.raises(NoLimit):
            tubefun.asymptotic_quadratic(f)


class TestVerification:
    def test_rigid_certifies_all_conditions(self, circle):
        f = tubefun.preset_standard_quadratic(circle).as_tube_function()
        rep = tubefun.verify_tube_type(tubefun.asymptotic_quadratic(f))
        assert rep.condition3 == "Rigid"
        assert rep.conditions_certified == ("(1)", "(2)", "(3)")
        assert rep.homogeneity_residual <= 1e-12

    def test_degenerate_zero_level_raises(self, circle):
        # f = x^2 on R^2: the zero level {x = 0} is critical
        f = tubefun.TubeFunction(circle, 2, lambda m, v: v[..., 0] ** 2, index=0)
        with pytest.raises(SingularZeroLevel):
            tubefun.verify_tube_type(tubefun.asymptotic_quadratic(f))

    def test_caller_certified_reference(self, circle):
        f = tubefun.TubeFunction(
            circle, 2,
            lambda m, v: v[..., 0] ** 2 - v[..., 1] ** 2,
            index=1,
        )
        rep = tubefun.verify_tube_type(
            tubefun.asymptotic_quadratic(f), reference=np.diag([1.0, -1.0])
        )
        assert rep.condition3 == "CallerCertified"


class TestMonoid:
    def test_index_additivity(self, sphere2):
        f1 = tubefun.preset_bott_rigid(sphere2).as_tube_function()
        f2 = tubefun.preset_standard_quadratic(sphere2).as_tube_function()
        s = tubefun.oplus(f1, f2)
        assert s.index == f1.index + f2.index == 3
        assert s.fiber_dim == f1.fiber_dim + f2.fiber_dim

    def test_twisted_stabilization_tag(self, sphere2):
        f1 = tubefun.preset_standard_quadratic(sphere2).as_tube_function()
        f2 = tubefun.preset_bott_rigid(sphere2).as_tube_function()
        s = tubefun.oplus(f1, f2)
        assert any(tag[0] == "twisted-stabilization" for tag in s.tags)

    def test_atlas_mismatch(self, circle, sphere2):
        f1 = tubefun.preset_standard_quadratic(circle).as_tube_function()
        f2 = tubefun.preset_standard_quadratic(sphere2).as_tube_function()
        with pytest.raises(AtlasMismatch):
            tubefun.oplus(f1, f2)

    def test_rigid_oplus(self, sphere2):
        q1 = tubefun.preset_bott_rigid(sphere2)
        q2 = tubefun.preset_standard_quadratic(sphere2)
        qq = q1.oplus(q2)
        assert qq.index == 3 and qq.fiber_dim == 6


class TestRigidFamilies:
    def test_index_jump_rejected(self, circle):
        def q_fn(pts):
            x = np.asarray(pts)[..., 0]
            out = np.zeros(x.shape + (2, 2))
            out[..., 0, 0] = np.where(x > 0.0, 1.0, -1.0)
            out[..., 1, 1] = 1.0
            return out

        with pytest.raises(EigenvalueGapLost):
            tubefun.RigidFamily(circle, 2, q_fn, 0)

    def test_stable_bundle_is_projector(self, sphere2):
        P = tubefun.stable_bundle(tubefun.preset_bott_rigid(sphere2))
        assert P.rank == 1 and P.complexified
        M = P.field[0]
        np.testing.assert_allclose(M @ M, M, atol=1e-12)

    def test_stable_bundle_chern_class(self):
        atlas = basegrid.build_base("sphere2", 32)
        P = tubefun.stable_bundle(tubefun.preset_bott_rigid(atlas))
        ch1 = basegrid.integrate_form(charclass.chern_character_form(P, 1))
        assert abs(abs(ch1) - 1.0) <= 2e-3


class TestOrientability:
    def test_moebius_is_nonorientable(self, circle):
        assert not tubefun.check_orientable(tubefun.preset_moebius(circle))

    def test_constant_family_is_orientable(self, circle):
        assert tubefun.check_orientable(tubefun.preset_standard_quadratic(circle))

    def test_simply_connected_base_is_orientable(self, sphere2):
        assert tubefun.check_orientable(tubefun.preset_bott_rigid(sphere2))
