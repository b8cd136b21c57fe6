"""Property battery and acceptance matrix for the `suite` CLI subcommand.

Each check returns a row (name, passed, detail).  The property battery keeps
to small resolutions so the whole matrix stays desk-scale; the documented
closedness/Stokes constants C are per base kind.
"""

from __future__ import annotations

import numpy as np

from . import basegrid, chainkit, charclass, famtor, genfront, tubefun

# documented constants for the O(resolution^-2) residual bounds
CLOSEDNESS_C = {"sphere2": 50.0, "sphere4": 50.0, "torus2": 10.0}
STOKES_C = {"circle": 1.0, "torus2": 1.0, "sphere2": 20.0, "sphere4": 40.0}


def _row(name, passed, detail):
    return {"name": name, "passed": bool(passed), "detail": detail}


def check_monomial_invariance(resolution=24):
    u = np.exp(2j * np.pi / 3)
    fam = famtor.circle_bundle_family(3, u, resolution)
    base = famtor.torsion_form(fam, 1).integral
    changed = fam.monomial_change(1, (1, 0), (u, np.conj(u)))
    moved = famtor.torsion_form(changed, 1).integral
    err = abs(moved - base)
    return _row(
        "monomial-basis invariance", err <= 1e-8,
        f"|delta| = {err:.3e} (integral {base:.6f})",
    )


def check_additivity(resolution=24):
    u = np.exp(2j * np.pi / 3)
    fam1 = famtor.circle_bundle_family(3, u, resolution)
    fam2 = famtor.circle_bundle_family(2, -1.0 + 0.0j, resolution)
    i1 = famtor.torsion_form(fam1, 1).integral
    i2 = famtor.torsion_form(fam2, 1).integral
    i12 = famtor.torsion_form(fam1.direct_sum(fam2), 1).integral
    err = abs(i12 - (i1 + i2))
    return _row(
        "direct-sum additivity", err <= 1e-6,
        f"|{i12:.6f} - ({i1:.6f} + {i2:.6f})| = {err:.3e}",
    )


def _two_parameter_sphere4_family(resolution):
    """Rank-(1,2,1) family on sphere4 factoring through two ambient
    coordinates; its degree-2 torsion form is closed in the continuum."""
    atlas = basegrid.build_base("sphere4", resolution)

    def differentials(points):
        x1, x2 = points[..., 0], points[..., 1]
        s = (0.2 + 0.3 * x1) + 1j * (0.1 + 0.4 * x2)
        # the twist keeps the middle Laplacian non-scalar, so the form is
        # genuinely nonzero and closedness is a real check
        t = (1.2 + 0.3 * x1) + 1j * (0.2 + 0.25 * x2)
        one = np.ones_like(s)
        d2 = np.stack([one, s], axis=-1)[..., :, None]
        d1 = np.stack([-t * s, t * one], axis=-1)[..., None, :]
        return [d1, d2]

    diffs = [differentials(ch.points) for ch in atlas.charts]
    return famtor.ChainFamily(atlas, (1, 2, 1), diffs)


def check_closedness(resolution=12):
    fam = _two_parameter_sphere4_family(resolution)
    res = famtor.torsion_form(fam, 1)
    bound = CLOSEDNESS_C["sphere4"] / resolution**2
    return _row(
        "torsion-form closedness O(res^-2)",
        res.closedness_residual <= bound,
        f"residual {res.closedness_residual:.3e} <= {bound:.3e} at res {resolution}",
    )


def check_stokes(resolution=32):
    rows_ok = True
    details = []
    for kind in ("circle", "torus2", "sphere2"):
        atlas = basegrid.build_base(kind, resolution)
        # eta = f dg for global smooth ambient functions f, g
        f = basegrid.form_from_function(atlas, lambda P: np.sin(P[..., 0]) + 0.3 * P[..., 1])
        g = basegrid.form_from_function(
            atlas, lambda P: np.cos(P[..., 0] + 0.5 * P[..., -1])
        )
        dg = basegrid.exterior_derivative(g)
        eta_comps = tuple(
            tuple(f.comps[ci][0] * arr for arr in dg.comps[ci])
            for ci in range(len(atlas.charts))
        )
        eta = basegrid.SampledForm(atlas, 1, eta_comps)
        if atlas.dim == 1:
            total = basegrid.integrate_form(basegrid.exterior_derivative(f))
        else:
            total = basegrid.integrate_form(basegrid.exterior_derivative(eta))
        bound = STOKES_C[kind] / resolution**2
        ok = abs(total) <= bound
        rows_ok = rows_ok and ok
        details.append(f"{kind}: |{total:.3e}| <= {bound:.3e}")
    return _row("Stokes residual O(res^-2)", rows_ok, "; ".join(details))


def check_index_additivity():
    atlas = basegrid.build_base("sphere2", 16)
    q1 = tubefun.preset_bott_rigid(atlas)
    q2 = tubefun.preset_standard_quadratic(atlas)
    f1 = q1.as_tube_function()
    f2 = q2.as_tube_function()
    s = tubefun.oplus(f1, f2)
    ok = s.index == f1.index + f2.index == 3
    qq = q1.oplus(q2)
    ok = ok and qq.index == q1.index + q2.index
    return _row(
        "index additivity under oplus", ok,
        f"{f1.index} + {f2.index} = {s.index}; rigid {q1.index} + {q2.index} = {qq.index}",
    )


def property_battery():
    return [
        check_monomial_invariance(),
        check_additivity(),
        check_closedness(),
        check_stokes(),
        check_index_additivity(),
    ]


def acceptance_rows(resolution=64):
    """The heavyweight acceptance checks (criteria mirrored by the test suite)."""
    rows = []

    # 1. scalar torsion vs the Laplacian route
    rng = np.random.default_rng(20240901)
    worst = 0.0
    for _ in range(200):
        c = chainkit.random_acyclic(rng)
        worst = max(worst, abs(chainkit.fr_torsion(c) - chainkit.laplacian_torsion(c)))
    rows.append(_row("fr-torsion dual-route agreement", worst <= 1e-9,
                     f"worst |delta| = {worst:.3e} over 200 complexes"))

    # 2. dilogarithm anchor
    u = np.exp(2j * np.pi / 3)
    i3 = famtor.torsion_form(famtor.circle_bundle_family(3, u, resolution), 1).integral
    i6 = famtor.torsion_form(famtor.circle_bundle_family(6, u, resolution), 1).integral
    i3b = famtor.torsion_form(
        famtor.circle_bundle_family(3, np.conj(u), resolution), 1
    ).integral
    i2m = famtor.torsion_form(
        famtor.circle_bundle_family(2, -1.0 + 0.0j, resolution), 1
    ).integral
    il2 = float(np.imag(charclass.dilog(u)))
    kappa = i3 / (3.0 * il2)
    ok = (
        abs(i6 / i3 - 2.0) <= 0.02
        and abs(i3b / i3 + 1.0) <= 0.02
        and abs(i2m) <= 0.02 * abs(i3)
        and abs(i6 - kappa * 6.0 * il2) <= 0.02 * abs(i6)
    )
    rows.append(_row(
        "circle-bundle dilogarithm anchor", ok,
        f"I3 {i3:.6f}, I6 {i6:.6f}, I3bar {i3b:.6f}, I2(-1) {i2m:.2e}, kappa {kappa:.6f}",
    ))

    # 3. zero-section triviality
    tpl = chainkit.BasedComplex((1, 1), (np.array([[2.0]]),))
    m1 = famtor.torsion_form(
        famtor.zero_section_family(basegrid.build_base("sphere2", 24), tpl), 1
    ).form.max_norm()
    m2 = famtor.torsion_form(
        famtor.zero_section_family(basegrid.build_base("sphere4", 10), tpl), 2
    ).form.max_norm()
    rows.append(_row("zero-section triviality", max(m1, m2) <= 1e-10,
                     f"max-norms {m1:.3e} (S2, k=1), {m2:.3e} (S4, k=2)"))

    # 4. stabilization invariance
    fam = famtor.circle_bundle_family(3, u, resolution)
    base_i = famtor.torsion_form(fam, 1).integral
    stab = fam.append_constant_summand(tpl)
    stab_i = famtor.torsion_form(stab, 1).integral
    rel = abs(stab_i - base_i) / abs(base_i)
    rows.append(_row("stabilization invariance", rel <= 1e-4,
                     f"relative shift {rel:.3e}"))

    # 5 + 7. Chern-Weil integrality and the normalized Pontryagin value
    s2 = basegrid.build_base("sphere2", 64)
    s4 = basegrid.build_base("sphere4", 16)
    ch1 = basegrid.integrate_form(
        charclass.chern_character_form(charclass.bott_projector(s2), 1)
    )
    ch2 = basegrid.integrate_form(
        charclass.chern_character_form(charclass.clifford_projector(s4), 2)
    )
    ok7 = abs(abs(ch1) - 1.0) <= 1e-3 and abs(abs(ch2) - 1.0) <= 1e-2
    rows.append(_row("Chern-Weil integrality", ok7,
                     f"ch1 = {ch1:.6f}, ch2 = {ch2:.6f}"))
    clif = tubefun.preset_clifford_rigid(s4)
    P = tubefun.stable_bundle(clif)
    p1 = basegrid.integrate_form(charclass.pontryagin_character(P, 1))
    target = 0.5 * charclass.zeta(3.0) * round(
        basegrid.integrate_form(charclass.chern_character_form(P, 2))
    )
    ok5 = abs(p1 - (-1.0) * target) <= 2e-2 or abs(p1 - target) <= 2e-2
    # additivity of p under direct sum
    p_sum = basegrid.integrate_form(
        charclass.pontryagin_character(P.direct_sum(P), 1)
    )
    ok5 = ok5 and abs(p_sum - 2.0 * p1) <= 1e-6
    rows.append(_row("twisted-stabilization shift (class side)", ok5,
                     f"p1 = {p1:.6f}, +-(zeta(3)/2)*ch2 = {target:.6f}, sum {p_sum:.6f}"))

    # 6. framing assembler algebra
    atlas = basegrid.build_base("torus2", 16)
    cochain = [np.cos(ch.points[..., 0]) + 1.0 for ch in atlas.charts]
    pulled = charclass.pullback(atlas, cochain, indices=(0, 1, 2))
    pushed = charclass.pushdown(pulled)
    chi = pulled.euler_characteristic
    exact = all(np.array_equal(p, chi * c) for p, c in zip(pushed, cochain))
    synth = charclass.assemble_framing(0.75, 1.5) == -(0.75 + 1.5)
    rows.append(_row("framing assembler algebra", exact and synth and chi == 1,
                     f"chi = {chi}, pushdown*pullback exact: {exact}"))

    # 8. front extraction
    gf = genfront.preset_cubic_fold()
    front = genfront.fiberwise_critical_locus(gf)
    worst = 0.0
    for sp in front.points:
        t = sp.m[0]
        pred = -2.0 * t**1.5 if sp.v[0] > 0 else 2.0 * t**1.5
        worst = max(worst, abs(sp.z - pred))
    cusp = genfront.classify_moderate(gf, [0.0], [0.0])
    ring = genfront.classify_moderate(genfront.preset_wrinkle(), [1.0, 0.0], [0.0, 0.0, 0.0])
    ok8 = (
        worst <= 1e-6
        and isinstance(cusp, genfront.BirthDeath) and cusp.co_orientation == +1
        and isinstance(ring, genfront.BirthDeath)
    )
    rows.append(_row("front extraction", ok8,
                     f"fold error {worst:.3e}; cusp {cusp}; ring {ring}"))

    # 9. doubling
    zs = genfront.preset_zero_section()
    dd = genfront.double(zs, 1.0)
    dfront = genfront.fiberwise_critical_locus(dd)
    zvals = sorted({round(sp.z, 8) for sp in dfront.points})
    idx = sorted({sp.index for sp in dfront.points})
    ok9 = zvals == [-2.0, 2.0] and idx == [1, 2]
    rows.append(_row("doubling normal form", ok9,
                     f"sheet levels {zvals}, indices {idx}"))

    return rows


def full_matrix(resolution=64):
    return acceptance_rows(resolution) + property_battery()
