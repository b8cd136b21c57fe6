import numpy as np
import pytest

from torsionlab import genfront
from torsionlab.errors import (
    NonpositiveSeparation,
    ProbeFailure,
    TransversalityLost,
)


class TestAdmissibility:
    def test_pure_quadratic(self):
        assert genfront.check_admissible(genfront.preset_zero_section())["admissible"]

    def test_quadratic_plus_compact_bump(self):
        base = genfront.ParamGrid((np.linspace(0.0, 1.0, 8),))

        def bump_grad(v):
            r2 = v[0] ** 2 + v[1] ** 2
            if r2 >= 1.0:
                return np.zeros(2)
            w = np.exp(-1.0 / (1.0 - r2))
            return w * (-2.0 / (1.0 - r2) ** 2) * np.array([v[0], v[1]])

        gf = genfront.GeneratingFunction(
            base, 2,
            value=lambda m, v: v[0] ** 2 - v[1] ** 2,
            grad=lambda m, v: np.array([2.0 * v[0], -2.0 * v[1]]) + bump_grad(v),
            hess=lambda m, v: np.diag([2.0, -2.0]),
            quadratic_signature=(1, 1), seeds=((0.0, 0.0),),
        )
        assert genfront.check_admissible(gf)["admissible"]

    def test_quartic_growth_fails(self):
        base = genfront.ParamGrid((np.linspace(0.0, 1.0, 8),))
        gf = genfront.GeneratingFunction(
            base, 1,
            value=lambda m, v: v[0] ** 4,
            grad=lambda m, v: np.array([4.0 * v[0] ** 3]),
            hess=lambda m, v: np.array([[12.0 * v[0] ** 2]]),
            quadratic_signature=(1, 0), seeds=((0.0,),),
        )
        assert not genfront.check_admissible(gf)["admissible"]

    def test_missing_signature_rejected(self):
        base = genfront.ParamGrid((np.linspace(0.0, 1.0, 4),))
        gf = genfront.GeneratingFunction(
            base, 1, value=None, grad=None, hess=None,
            quadratic_signature=None, seeds=((0.0,),),
        )
        with pytest.raises(ProbeFailure):
            genfront.check_admissible(gf)


class TestCriticalLoci:
    def test_cubic_fold_sheets(self):
        gf = genfront.preset_cubic_fold()
        front = genfront.fiberwise_critical_locus(gf)
        assert len(front.points) == 2 * 100
        for sp in front.points:
            t = sp.m[0]
            pred = -2.0 * t**1.5 if sp.v[0] > 0 else 2.0 * t**1.5
            assert abs(sp.z - pred) <= 1e-6
            assert sp.margin > 1e-6
        assert sorted({sp.index for sp in front.points}) == [0, 1]

    def test_cerf_relation(self):
        gf = genfront.preset_cubic_fold()
        front = genfront.fiberwise_critical_locus(gf)
        worst = max(abs(sp.z**2 - 4.0 * sp.m[0] ** 3) for sp in front.points)
        assert worst <= 1e-9

    def test_base_gradient(self):
        gf = genfront.preset_cubic_fold()
        front = genfront.fiberwise_critical_locus(gf)
        for sp in front.points[:20]:
            assert sp.p[0] == pytest.approx(-3.0 * sp.v[0], abs=1e-9)

    def test_transversality_lost(self):
        base = genfront.ParamGrid((np.linspace(0.0, 1.0, 4),))
        gf = genfront.GeneratingFunction(
            base, 1,
            value=lambda m, v: v[0] ** 4,
            grad=lambda m, v: np.array([4.0 * v[0] ** 3]),
            hess=lambda m, v: np.array([[12.0 * v[0] ** 2]]),
            quadratic_signature=(1, 0), seeds=((0.1,),),
        )
        with pytest.raises(TransversalityLost):
            genfront.fiberwise_critical_locus(gf)


class TestClassification:
    def test_fold_cusp_is_birth_death(self):
        gf = genfront.preset_cubic_fold()
        cls = genfront.classify_moderate(gf, [0.0], [0.0])
        assert isinstance(cls, genfront.BirthDeath)
        assert cls.co_orientation == +1
        assert cls.index == 0

    def test_morse_points(self):
        gf = genfront.preset_cubic_fold()
        assert genfront.classify_moderate(gf, [1.0], [1.0]) == genfront.Morse(0)
        assert genfront.classify_moderate(gf, [1.0], [-1.0]) == genfront.Morse(1)

    def test_quartic_is_not_moderate(self):
        base = genfront.ParamGrid((np.linspace(0.0, 1.0, 4),))
        gf = genfront.GeneratingFunction(
            base, 1,
            value=lambda m, v: v[0] ** 4,
            grad=lambda m, v: np.array([4.0 * v[0] ** 3]),
            hess=lambda m, v: np.array([[12.0 * v[0] ** 2]]),
            quadratic_signature=(1, 0), seeds=((0.0,),),
        )
        assert isinstance(
            genfront.classify_moderate(gf, [0.5], [0.0]), genfront.NotModerate
        )

    def test_find_cusps_on_extended_fold(self):
        gf = genfront.preset_cubic_fold(t_min=0.0, npts=101)
        front = genfront.find_cusps(gf, genfront.fiberwise_critical_locus(gf))
        assert len(front.cusps) == 1
        cusp = front.cusps[0]
        assert cusp.m[0] == 0.0 and abs(cusp.z) <= 1e-9
        assert cusp.co_orientation == +1

    def test_wrinkle_birth_death_ring(self):
        wr = genfront.preset_wrinkle()
        # on-grid points of the ring |m| = 1
        for m in ([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]):
            cls = genfront.classify_moderate(wr, m, [0.0, 0.0, 0.0])
            assert isinstance(cls, genfront.BirthDeath)
        front = genfront.find_cusps(
            wr, genfront.fiberwise_critical_locus(wr)
        )
        assert len(front.cusps) == 4


class TestLiftAndExports:
    def test_zero_section_lift(self):
        zs = genfront.preset_zero_section()
        front = genfront.fiberwise_critical_locus(zs)
        lift = genfront.legendrian_lift(front)
        assert not lift["immersed_only"]
        for s in lift["samples"]:
            assert s["p"] == [0.0] and s["z"] == 0.0

    def test_exports(self, tmp_path):
        gf = genfront.preset_cubic_fold(t_min=0.0, npts=51)
        front = genfront.find_cusps(gf, genfront.fiberwise_critical_locus(gf))
        csv_path = genfront.export_cerf_csv(front, tmp_path / "front.csv")
        svg_path = genfront.export_cerf_svg(front, tmp_path / "cerf.svg")
        assert (tmp_path / "front.csv").stat().st_size > 0
        assert (tmp_path / "cerf.svg").stat().st_size > 0
        header = (tmp_path / "front.csv").read_text().splitlines()[0]
        assert header.split(",") == ["m0", "v0", "z", "index", "margin"]


class TestDoubling:
    def test_zero_section_doubles_to_flat_sheets(self):
        dd = genfront.double(genfront.preset_zero_section(), 1.0)
        front = genfront.fiberwise_critical_locus(dd)
        by_m = {}
        for sp in front.points:
            by_m.setdefault(round(float(sp.m[0]), 10), []).append(sp)
        for sheets in by_m.values():
            zs = sorted(round(sp.z, 8) for sp in sheets)
            assert zs == [-2.0, 2.0]
            assert sorted(sp.index for sp in sheets) == [1, 2]

    def test_sheet_gap_scaling(self):
        sigma = 0.25
        dd = genfront.double(genfront.preset_zero_section(), sigma)
        front = genfront.fiberwise_critical_locus(dd)
        zs = sorted({round(sp.z, 8) for sp in front.points})
        gap = zs[-1] - zs[0]
        assert gap == pytest.approx(4.0 * sigma**1.5, abs=1e-8)

    def test_nonpositive_separation(self):
        with pytest.raises(NonpositiveSeparation):
            genfront.double(genfront.preset_zero_section(), 0.0)
