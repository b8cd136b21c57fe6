import numpy as np
import pytest

from torsionlab import basegrid, chainkit, famtor
from torsionlab.errors import InconsistentStrata, InvalidRoot, UnsupportedKind

OMEGA = np.exp(2j * np.pi / 3)


def _family(n=3, u=OMEGA, res=24):
    return famtor.circle_bundle_family(n, u, res)


class TestChainFamily:
    def test_d_squared_enforced(self):
        atlas = basegrid.build_base("circle", 16)
        shape = atlas.charts[0].shape
        d1 = np.ones(shape + (1, 1), dtype=complex)
        d2 = np.ones(shape + (1, 1), dtype=complex)
        with pytest.raises(UnsupportedKind):
            famtor.ChainFamily(atlas, (1, 1, 1), [[d1, d2]])

    def test_acyclicity_certificate(self):
        fam = _family()
        cert, point = fam.acyclicity_certificate()
        assert cert > 1e-6
        fam.require_acyclic()

    def test_fiber_is_based_complex(self):
        fam = _family()
        fib = fam.fiber(0, (0, 0))
        assert isinstance(fib, chainkit.BasedComplex)
        assert fib.ranks == fam.ranks

    def test_save_load_roundtrip(self, tmp_path):
        fam = _family(res=16)
        path = tmp_path / "fam.json"
        fam.save(path)
        back = famtor.ChainFamily.load(path)
        assert back.ranks == fam.ranks
        for a, b in zip(back.diffs[0], fam.diffs[0]):
            np.testing.assert_array_equal(a, b)

    def test_invalid_roots(self):
        with pytest.raises(InvalidRoot):
            famtor.circle_bundle_family(3, 1.0 + 0.0j, 16)  # u = 1 excluded
        with pytest.raises(InvalidRoot):
            famtor.circle_bundle_family(3, 1j, 16)  # not a cube root
        with pytest.raises(InvalidRoot):
            famtor.circle_bundle_family(1, -1.0 + 0.0j, 16)  # n < 2


class TestTorsionForm:
    def test_degree_zero_matches_scalar_torsion(self):
        fam = _family(res=16)
        res = famtor.torsion_form(fam, 0)
        vals = res.form.comps[0][0]
        rng = np.random.default_rng(2)
        for _ in range(10):
            i = int(rng.integers(vals.shape[0]))
            j = int(rng.integers(vals.shape[1]))
            ref = chainkit.fr_torsion(fam.fiber(0, (i, j)))
            assert vals[i, j] == pytest.approx(ref, abs=1e-12)
        assert res.closedness_residual is None

    def test_zero_section_triviality_quick(self):
        atlas = basegrid.build_base("sphere2", 12)
        tpl = chainkit.BasedComplex((1, 1), (np.array([[2.0]]),))
        res = famtor.torsion_form(famtor.zero_section_family(atlas, tpl), 1)
        assert res.form.max_norm() <= 1e-12

    def test_monomial_invariance(self):
        fam = _family()
        base = famtor.torsion_form(fam, 1).integral
        changed = fam.monomial_change(1, (1, 0), (OMEGA, np.conj(OMEGA)))
        moved = famtor.torsion_form(changed, 1).integral
        assert moved == pytest.approx(base, abs=1e-8)

    def test_direct_sum_additivity(self):
        f1 = _family(3, OMEGA)
        f2 = _family(2, -1.0 + 0.0j)
        i1 = famtor.torsion_form(f1, 1).integral
        i2 = famtor.torsion_form(f2, 1).integral
        i12 = famtor.torsion_form(f1.direct_sum(f2), 1).integral
        assert i12 == pytest.approx(i1 + i2, abs=1e-6)

    def test_conjugate_antisymmetry(self):
        i = famtor.torsion_form(_family(3, OMEGA), 1).integral
        ibar = famtor.torsion_form(_family(3, np.conj(OMEGA)), 1).integral
        assert ibar == pytest.approx(-i, abs=1e-10)

    def test_stabilization_quick(self):
        fam = _family(res=16)
        tpl = chainkit.BasedComplex((1, 1), (np.array([[2.0]]),))
        base = famtor.torsion_form(fam, 1).integral
        stab = famtor.torsion_form(fam.append_constant_summand(tpl), 1).integral
        assert stab == pytest.approx(base, rel=1e-8)


class TestCerf:
    def _atlas(self):
        return basegrid.build_base("circle", 64)

    def test_slide_pair_loop(self):
        base = chainkit.BasedComplex(
            (2, 2), (np.array([[2.0, 0.0], [0.0, 3.0]]),)
        )
        walls = (
            famtor.SlideWall(1.0, 0, 0, 1, OMEGA),
            famtor.SlideWall(4.0, 0, 0, 1, -OMEGA),
        )
        fam = famtor.family_from_cerf(
            famtor.CerfStrata(walls, base), self._atlas()
        )
        cert, _ = fam.acyclicity_certificate()
        assert cert > 1e-6
        # a handle slide leaves the scalar torsion untouched everywhere
        vals = famtor.torsion_form(fam, 0).form.comps[0][0]
        assert np.ptp(vals) <= 1e-10
        assert vals[0] == pytest.approx(np.log(6.0), abs=1e-10)

    def test_figure_eight_with_birth_death(self):
        base = chainkit.BasedComplex(
            (1, 2, 1), (np.array([[1.0, 0.0]]), np.array([[0.0], [1.0]]))
        )
        walls = (
            famtor.BirthDeathWall(0.5, 2, co_orientation=-1),
            famtor.SlideWall(1.5, 1, 1, 0, OMEGA),
            famtor.SlideWall(3.5, 1, 1, 0, -OMEGA),
            famtor.BirthDeathWall(5.0, 2),
        )
        fam = famtor.family_from_cerf(
            famtor.CerfStrata(walls, base), self._atlas()
        )
        cert, _ = fam.acyclicity_certificate()
        assert cert > 1e-6
        vals = famtor.torsion_form(fam, 0).form.comps[0][0]
        # the pair entry runs down to the documented floor near theta = 0
        assert float(np.max(vals)) == pytest.approx(-np.log(1e-3), abs=1e-6)

    def test_uncancelled_slide_rejected(self):
        base = chainkit.BasedComplex(
            (1, 2, 1), (np.array([[1.0, 0.0]]), np.array([[0.0], [1.0]]))
        )
        with pytest.raises(InconsistentStrata):
            famtor.family_from_cerf(
                famtor.CerfStrata(
                    (famtor.SlideWall(1.5, 1, 1, 0, OMEGA),), base
                ),
                self._atlas(),
            )

    def test_empty_walls_constant_family(self):
        base = chainkit.BasedComplex((1, 1), (np.array([[2.0]]),))
        fam = famtor.family_from_cerf(
            famtor.CerfStrata((), base), self._atlas()
        )
        vals = famtor.torsion_form(fam, 0).form.comps[0][0]
        assert np.ptp(vals) <= 1e-12

    def test_non_circle_base_rejected(self):
        base = chainkit.BasedComplex((1, 1), (np.array([[2.0]]),))
        with pytest.raises(UnsupportedKind):
            famtor.family_from_cerf(
                famtor.CerfStrata((), base), basegrid.build_base("torus2", 16)
            )
