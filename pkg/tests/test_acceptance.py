"""Acceptance matrix: one test per criterion, each printing a single
[PASS]/[FAIL] line with the measured quantities."""

import numpy as np
import pytest

from torsionlab import basegrid, chainkit, charclass, famtor, genfront, suite, tubefun

OMEGA = np.exp(2j * np.pi / 3)


def _criterion(capsys, name, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_1_fr_torsion_oracle(capsys):
    rng = np.random.default_rng(20240901)
    worst = 0.0
    for _ in range(200):
        c = chainkit.random_acyclic(rng)
        worst = max(
            worst, abs(chainkit.fr_torsion(c) - chainkit.laplacian_torsion(c))
        )
    _criterion(
        capsys, "criterion 1: scalar torsion dual-route agreement",
        worst <= 1e-9,
        f"worst |fr - laplacian| = {worst:.3e} over 200 random complexes (<= 1e-9)",
    )


def test_criterion_2_dilogarithm_anchor(capsys, circle_bundle_integrals):
    cb = circle_bundle_integrals
    i3, i6, i3b, i2m = cb["I3"], cb["I6"], cb["I3bar"], cb["I2m"]
    il2, kappa = cb["im_dilog"], cb["kappa"]
    ratio_err = abs(i6 / i3 - 2.0)
    conj_err = abs(i3b / i3 + 1.0)
    null_err = abs(i2m) / abs(i3)
    calib_err = abs(i6 - kappa * 6.0 * il2) / abs(i6)
    ok = (
        ratio_err <= 0.02 and conj_err <= 0.02
        and null_err <= 0.02 and calib_err <= 0.02
    )
    _criterion(
        capsys, "criterion 2: circle-bundle dilogarithm anchor", ok,
        f"I6/I3 = {i6 / i3:.4f}, I3bar/I3 = {i3b / i3:.4f}, "
        f"|I2(-1)|/|I3| = {null_err:.3e}, kappa = {kappa:.6f}, "
        f"calibration error {calib_err:.3e} (all <= 2e-2)",
    )


def test_criterion_3_zero_section_triviality(capsys):
    tpl = chainkit.BasedComplex((1, 1), (np.array([[2.0]]),))
    m1 = famtor.torsion_form(
        famtor.zero_section_family(basegrid.build_base("sphere2", 24), tpl), 1
    ).form.max_norm()
    m2 = famtor.torsion_form(
        famtor.zero_section_family(basegrid.build_base("sphere4", 10), tpl), 2
    ).form.max_norm()
    ok = max(m1, m2) <= 1e-10
    _criterion(
        capsys, "criterion 3: zero-section triviality", ok,
        f"max-norms {m1:.3e} (sphere2, k=1), {m2:.3e} (sphere4, k=2) (<= 1e-10)",
    )


def test_criterion_4_stabilization_invariance(capsys, circle_bundle_integrals):
    base_i = circle_bundle_integrals["I3"]
    fam = famtor.circle_bundle_family(3, OMEGA, 64)
    tpl = chainkit.BasedComplex((1, 1), (np.array([[2.0]]),))
    stab_i = famtor.torsion_form(fam.append_constant_summand(tpl), 1).integral
    rel = abs(stab_i - base_i) / abs(base_i)
    _criterion(
        capsys, "criterion 4: stabilization invariance", rel <= 1e-4,
        f"relative shift {rel:.3e} after appending a constant acyclic summand "
        f"(<= 1e-4)",
    )


def test_criterion_5_twisted_stabilization_class_side(capsys):
    atlas = basegrid.build_base("sphere4", 16)
    P = tubefun.stable_bundle(tubefun.preset_clifford_rigid(atlas))
    ch2 = basegrid.integrate_form(charclass.chern_character_form(P, 2))
    p1 = basegrid.integrate_form(charclass.pontryagin_character(P, 1))
    ch2_int = round(ch2)
    target = 0.5 * charclass.zeta(3.0) * ch2_int
    shift_err = min(abs(p1 - target), abs(p1 + target))
    p_sum = basegrid.integrate_form(
        charclass.pontryagin_character(P.direct_sum(P), 1)
    )
    add_err = abs(p_sum - 2.0 * p1)
    ok = (
        abs(ch2_int) == 1 and abs(ch2 - ch2_int) <= 1e-2
        and shift_err <= 2e-2 and add_err <= 1e-6
    )
    _criterion(
        capsys, "criterion 5: twisted-stabilization shift (class side)", ok,
        f"p1 = {p1:.6f} vs (zeta(3)/2)*ch2 = {target:.6f} "
        f"(error {shift_err:.3e}), p-additivity error {add_err:.3e}",
    )


def test_criterion_6_framing_assembler(capsys):
    atlas = basegrid.build_base("torus2", 16)
    cochain = [np.cos(ch.points[..., 0]) + 1.0 for ch in atlas.charts]
    pulled = charclass.pullback(atlas, cochain, indices=(0, 1, 2))
    pushed = charclass.pushdown(pulled)
    chi = pulled.euler_characteristic
    exact = all(np.array_equal(p, chi * c) for p, c in zip(pushed, cochain))
    synth = charclass.assemble_framing(0.75, 1.5) == -(0.75 + 1.5)
    ok = exact and synth and chi == 1
    _criterion(
        capsys, "criterion 6: framing assembler algebra", ok,
        f"chi = {chi}, pushdown o pullback = chi * id exact: {exact}, "
        f"synthetic -(a + b): {synth}",
    )


def test_criterion_7_chern_weil_integrality(capsys):
    ch1 = basegrid.integrate_form(
        charclass.chern_character_form(
            charclass.bott_projector(basegrid.build_base("sphere2", 64)), 1
        )
    )
    ch2 = basegrid.integrate_form(
        charclass.chern_character_form(
            charclass.clifford_projector(basegrid.build_base("sphere4", 16)), 2
        )
    )
    ok = abs(abs(ch1) - 1.0) <= 1e-3 and abs(abs(ch2) - 1.0) <= 1e-2
    _criterion(
        capsys, "criterion 7: Chern-Weil integrality", ok,
        f"ch1 = {ch1:.6f} (+-1 within 1e-3), ch2 = {ch2:.6f} (+-1 within 1e-2)",
    )


def test_criterion_8_front_extraction(capsys):
    gf = genfront.preset_cubic_fold()
    front = genfront.fiberwise_critical_locus(gf)
    worst = 0.0
    for sp in front.points:
        t = sp.m[0]
        pred = -2.0 * t**1.5 if sp.v[0] > 0 else 2.0 * t**1.5
        worst = max(worst, abs(sp.z - pred))
    cusp = genfront.classify_moderate(gf, [0.0], [0.0])
    ring_ok = all(
        isinstance(
            genfront.classify_moderate(
                genfront.preset_wrinkle(), m, [0.0, 0.0, 0.0]
            ),
            genfront.BirthDeath,
        )
        for m in ([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0])
    )
    cusp_ok = isinstance(cusp, genfront.BirthDeath) and cusp.co_orientation == +1
    ok = worst <= 1e-6 and cusp_ok and ring_ok
    _criterion(
        capsys, "criterion 8: front extraction", ok,
        f"fold sheet error {worst:.3e} (<= 1e-6), cusp at t = 0: {cusp}, "
        f"wrinkle birth-death ring: {ring_ok}",
    )


def test_criterion_9_doubling(capsys):
    zs = genfront.preset_zero_section()
    original = genfront.fiberwise_critical_locus(zs)
    doubled = genfront.fiberwise_critical_locus(genfront.double(zs, 1.0))
    by_m = {}
    for sp in doubled.points:
        by_m.setdefault(round(float(sp.m[0]), 10), []).append(sp)
    union_err = 0.0
    shape_ok = True
    for sp in original.points:
        sheets = by_m.get(round(float(sp.m[0]), 10), [])
        if sorted(s.index for s in sheets) != [sp.index, sp.index + 1]:
            shape_ok = False
            continue
        lo, hi = sorted(s.z for s in sheets)
        union_err = max(
            union_err, abs(lo - (sp.z - 2.0)), abs(hi - (sp.z + 2.0))
        )
    ok = shape_ok and union_err <= 1e-8
    _criterion(
        capsys, "criterion 9: doubling normal form", ok,
        f"sheets at z -+ 2 with indices (k, k+1): {shape_ok}, "
        f"front-union error {union_err:.3e} (<= 1e-8)",
    )


def test_criterion_10_property_battery(capsys):
    rows = suite.property_battery()
    ok = all(r["passed"] for r in rows)
    detail = "; ".join(
        f"{r['name']}: {'ok' if r['passed'] else 'FAIL (' + r['detail'] + ')'}"
        for r in rows
    )
    _criterion(capsys, "criterion 10: property battery", ok, detail)
