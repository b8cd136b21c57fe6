import numpy as np
import pytest

from torsionlab import basegrid, charclass
from torsionlab.errors import DomainError, UncancelledBoundary

mpmath = pytest.importorskip("mpmath")


class TestZeta:
    def test_closed_forms(self):
        assert charclass.zeta(2.0) == pytest.approx(np.pi**2 / 6.0, abs=1e-13)
        assert charclass.zeta(4.0) == pytest.approx(np.pi**4 / 90.0, abs=1e-13)

    def test_against_mpmath(self):
        for s in (1.5, 2.0, 3.0, 5.0, 7.0, 11.5):
            assert charclass.zeta(s) == pytest.approx(
                float(mpmath.zeta(s)), abs=1e-12
            )

    def test_domain(self):
        with pytest.raises(DomainError):
            charclass.zeta(1.0)
        with pytest.raises(DomainError):
            charclass.zeta(0.5)


class TestDilog:
    def test_special_points(self):
        assert charclass.dilog(1.0) == pytest.approx(np.pi**2 / 6.0, abs=1e-13)
        assert charclass.dilog(-1.0) == pytest.approx(-np.pi**2 / 12.0, abs=1e-13)
        assert charclass.dilog(0.5) == pytest.approx(
            np.pi**2 / 12.0 - 0.5 * np.log(2.0) ** 2, abs=1e-13
        )

    def test_against_mpmath_all_regions(self):
        # direct series, reflection, and Bernoulli/Debye regions
        pts = [0.3, -0.4 + 0.2j, 0.9, 0.7 + 0.6j, -0.8 - 0.5j,
               np.exp(2j * np.pi / 3), np.exp(2j * np.pi / 6), 1j, -1j]
        for z in pts:
            ref = complex(mpmath.polylog(2, complex(z)))
            assert charclass.dilog(z) == pytest.approx(ref, abs=1e-12)

    def test_imaginary_part_at_omega(self):
        # Im L2(e^{2 pi i/3}) is the Clausen value Cl2(2 pi/3)
        omega = np.exp(2j * np.pi / 3)
        val = float(np.imag(charclass.dilog(omega)))
        assert val == pytest.approx(0.6766277376064356, abs=1e-12)

    def test_conjugation_symmetry(self):
        z = 0.4 + 0.7j
        assert charclass.dilog(np.conj(z)) == pytest.approx(
            np.conj(charclass.dilog(z)), abs=1e-13
        )


class TestChernWeil:
    def test_bott_ch1(self):
        atlas = basegrid.build_base("sphere2", 48)
        proj = charclass.bott_projector(atlas)
        form = charclass.chern_character_form(proj, 1)
        val = basegrid.integrate_form(form)
        assert abs(abs(val) - 1.0) <= 2e-3

    def test_ch0_is_rank(self):
        atlas = basegrid.build_base("sphere2", 16)
        proj = charclass.bott_projector(atlas)
        form = charclass.chern_character_form(proj, 0)
        assert np.allclose(form.comps[0][0], 1.0)

    def test_ch_beyond_dim_is_zero(self):
        atlas = basegrid.build_base("sphere2", 16)
        proj = charclass.bott_projector(atlas)
        form = charclass.chern_character_form(proj, 2)
        assert form.max_norm() == 0.0

    def test_projector_direct_sum_additivity(self):
        atlas = basegrid.build_base("sphere2", 32)
        proj = charclass.bott_projector(atlas)
        v1 = basegrid.integrate_form(charclass.chern_character_form(proj, 1))
        v2 = basegrid.integrate_form(
            charclass.chern_character_form(proj.direct_sum(proj), 1)
        )
        assert v2 == pytest.approx(2.0 * v1, abs=1e-9)

    def test_pontryagin_prefactor(self):
        # p_1 = (1/2)(-1) zeta(3) ch_2 as an exact scalar relation
        from torsionlab import tubefun

        atlas = basegrid.build_base("sphere4", 8)
        proj = tubefun.stable_bundle(tubefun.preset_clifford_rigid(atlas))
        p = basegrid.integrate_form(charclass.pontryagin_character(proj, 1))
        ch2 = basegrid.integrate_form(charclass.chern_character_form(proj, 2))
        assert p == pytest.approx(-0.5 * charclass.zeta(3.0) * ch2, abs=1e-10)


class TestStrata:
    def _atlas(self):
        return basegrid.build_base("torus2", 12)

    def test_pullback_pushdown_euler(self):
        atlas = self._atlas()
        cochain = [np.sin(ch.points[..., 0]) + 2.0 for ch in atlas.charts]
        pulled = charclass.pullback(atlas, cochain, indices=(0, 1, 2))
        assert pulled.euler_characteristic == 1
        pushed = charclass.pushdown(pulled)
        for p, c in zip(pushed, cochain):
            np.testing.assert_array_equal(p, c)

    def test_uncancelled_partial_stratum(self):
        atlas = self._atlas()
        mask = atlas.charts[0].points[..., 0] > 0.0
        stratum = charclass.Stratum(
            index=0,
            values=[np.ones(ch.shape) for ch in atlas.charts],
            mask=[mask] + [np.zeros(ch.shape, dtype=bool) for ch in atlas.charts[1:]],
            pair_id=None,
        )
        with pytest.raises(UncancelledBoundary):
            charclass.StrataCochain(atlas, (stratum,)).validate()

    def test_assemble_framing_sign(self):
        assert charclass.assemble_framing(0.75, 1.5) == -(0.75 + 1.5)
        assert charclass.assemble_framing(0.75, 1.5, unsigned=True) == 0.75 + 1.5
