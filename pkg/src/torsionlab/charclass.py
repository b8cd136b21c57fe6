"""Special functions, Chern-Weil forms, push-down operators, and the
framing-principle assembler.

Special values: ``zeta`` uses an Euler-Maclaurin accelerated Dirichlet
series; ``dilog`` uses the direct power series on |z| <= 1/2, the reflection
identity near z = 1, and the Bernoulli series in -log(1-z) elsewhere on the
closed unit disk.

Characteristic forms are computed from projector fields by the standard
curvature recipe F = P dP dP P, with all derivatives taken by the discrete
exterior calculus of :mod:`torsionlab.basegrid`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from . import basegrid, tolerances as tol
from .basegrid import BaseAtlas, SampledForm, chart_derivative
from .errors import (
    DegreeMismatch,
    DomainError,
    ProjectorDrift,
    UncancelledBoundary,
)

# -- special functions ----------------------------------------------------

_BERNOULLI = scipy.special.bernoulli(64)


def zeta(s: float) -> float:
    """Riemann zeta for real s > 1, Euler-Maclaurin accelerated to ~1e-14."""
    s = float(s)
    if not s > 1.0:
        raise DomainError(f"zeta requires s > 1, got {s}")
    N = 20
    total = sum(n ** (-s) for n in range(1, N))
    total += 0.5 * N ** (-s) + N ** (1.0 - s) / (s - 1.0)
    # correction terms B_{2k}/(2k)! * (s)_{2k-1} * N^{-s-2k+1}
    poch = s
    fact = 1.0
    power = N ** (-s - 1.0)
    for k in range(1, 12):
        fact *= (2 * k - 1) * (2 * k)
        total += _BERNOULLI[2 * k] / fact * poch * power
        poch *= (s + 2 * k - 1) * (s + 2 * k)
        power /= N * N
    return total


def _dilog_series(z: complex) -> complex:
    term = z
    total = z
    for k in range(2, 80):
        term *= z
        total += term / (k * k)
        if abs(term) / (k * k) < 1e-17:
            break
    return total


def _dilog_bernoulli(z: complex) -> complex:
    """Series in u = -log(1-z); converges for |u| < 2 pi."""
    u = -np.log(1.0 - z)
    total = 0.0 + 0.0j
    upow = u
    fact = 1.0
    for n in range(0, 60):
        b = _BERNOULLI[n] if n != 1 else -0.5
        term = b * upow / fact / (n + 1)
        total += term
        upow *= u
        fact *= n + 1
        # odd Bernoulli numbers vanish for n >= 3, so test only live terms
        if n > 4 and b != 0.0 and abs(term) < 1e-17 * max(1.0, abs(total)):
            break
    return total


def dilog(z: complex) -> complex:
    """The dilogarithm sum_{k>=1} z^k / k^2 on the closed unit disk."""
    z = complex(z)
    if abs(z) > 1.0 + 1e-12:
        raise DomainError(f"dilog requires |z| <= 1, got |z| = {abs(z):.6f}")
    if abs(z) > 1.0:
        z /= abs(z)
    if z == 1.0:
        return complex(np.pi**2 / 6.0)
    if abs(z) <= 0.5:
        return _dilog_series(z)
    if abs(1.0 - z) <= 0.5:
        return (
            np.pi**2 / 6.0
            - np.log(z) * np.log(1.0 - z)
            - _dilog_series(1.0 - z)
        )
    return _dilog_bernoulli(z)


# -- bundle projectors ----------------------------------------------------


@dataclass(frozen=True)
class BundleProjector:
    """Hermitian idempotent field of constant rank over an atlas."""

    atlas: BaseAtlas
    field: tuple  # per chart, array of shape chart.shape + (n, n)
    rank: int
    complexified: bool = False  # set by the caller for real-bundle data

    def __post_init__(self):
        clean = []
        for ci, chart in enumerate(self.atlas.charts):
            P = np.asarray(self.field[ci], dtype=complex)
            if np.max(np.abs(P - np.conj(np.swapaxes(P, -1, -2)))) > tol.CONSTRUCTION:
                raise ProjectorDrift(f"projector not Hermitian on chart {chart.name}")
            if np.max(np.abs(P @ P - P)) > 1e-10:
                raise ProjectorDrift(f"projector not idempotent on chart {chart.name}")
            tr = np.real(np.trace(P, axis1=-2, axis2=-1))
            if np.max(np.abs(tr - self.rank)) > 1e-8:
                raise ProjectorDrift(
                    f"projector rank varies on chart {chart.name}: "
                    f"trace range [{tr.min():.3f}, {tr.max():.3f}] vs {self.rank}"
                )
            clean.append(P)
        object.__setattr__(self, "field", tuple(clean))

    def direct_sum(self, other: "BundleProjector") -> "BundleProjector":
        if other.atlas is not self.atlas:
            raise DegreeMismatch("projectors live on different atlases")
        field = []
        for ci, chart in enumerate(self.atlas.charts):
            a, b = self.field[ci], other.field[ci]
            n, m = a.shape[-1], b.shape[-1]
            blk = np.zeros(chart.shape + (n + m, n + m), dtype=complex)
            blk[..., :n, :n] = a
            blk[..., n:, n:] = b
            field.append(blk)
        return BundleProjector(
            self.atlas, tuple(field), self.rank + other.rank,
            complexified=self.complexified and other.complexified,
        )


_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def bott_projector(atlas: BaseAtlas) -> BundleProjector:
    """Line-bundle generator on the two-sphere: P = (1 + x . sigma)/2."""
    if atlas.kind != "sphere2":
        raise DomainError("the Bott projector lives on sphere2")
    field = []
    for chart in atlas.charts:
        x = chart.points
        P = 0.5 * (
            np.eye(2, dtype=complex)
            + sum(x[..., a, None, None] * _PAULI[a] for a in range(3))
        )
        field.append(P)
    return BundleProjector(atlas, tuple(field), 1)


def clifford_projector(atlas: BaseAtlas) -> BundleProjector:
    """Rank-2 generator on the four-sphere: P = (1 + x . Gamma)/2 with the
    standard 4x4 Clifford matrices for R^5."""
    if atlas.kind != "sphere4":
        raise DomainError("the Clifford projector lives on sphere4")
    I2 = np.eye(2, dtype=complex)
    gammas = [np.kron(_PAULI[a], _PAULI[0]) for a in range(3)]
    gammas.append(np.kron(I2, _PAULI[1]))
    gammas.append(np.kron(I2, _PAULI[2]))
    field = []
    for chart in atlas.charts:
        x = chart.points
        P = 0.5 * (
            np.eye(4, dtype=complex)
            + sum(x[..., a, None, None] * gammas[a] for a in range(5))
        )
        field.append(P)
    return BundleProjector(atlas, tuple(field), 2)


def _curvature(P_chart, chart):
    """Components F_ab = P dP_a dP_b P - (a <-> b), for a < b."""
    dim = chart.dim
    dP = [chart_derivative(chart, P_chart, a) for a in range(dim)]
    F = {}
    for a, b in itertools.combinations(range(dim), 2):
        F[(a, b)] = P_chart @ (dP[a] @ dP[b] - dP[b] @ dP[a]) @ P_chart
    return F


def _two_form_wedge_power(F, comp, shape, n):
    """Top component of the k-fold wedge of an antisymmetric-indexed
    matrix-valued 2-form, comp a sorted multi-index of length 2k."""
    k = len(comp) // 2
    acc = np.zeros(shape + (n, n), dtype=complex)
    for perm in itertools.permutations(range(2 * k)):
        sign = 1.0
        for a in range(2 * k):
            for b in range(a + 1, 2 * k):
                if perm[a] > perm[b]:
                    sign = -sign
        prod = None
        psign = 1.0
        ok = True
        for t in range(0, 2 * k, 2):
            i, j = comp[perm[t]], comp[perm[t + 1]]
            if i < j:
                m = F[(i, j)]
            else:
                m = F[(j, i)]
                psign = -psign
            prod = m if prod is None else prod @ m
        acc = acc + sign * psign * prod
    return acc / (2.0**k)


def chern_character_form(P: BundleProjector, k: int) -> SampledForm:
    """Degree-2k Chern character form (1/k!) Tr(P ((i/2 pi) F)^k)."""
    atlas = P.atlas
    if k == 0:
        comps = tuple(
            (float(P.rank) * np.ones(ch.shape),) for ch in atlas.charts
        )
        return SampledForm(atlas, 0, comps)
    if 2 * k > atlas.dim:
        comps = tuple(
            tuple(
                np.zeros(ch.shape)
                for _ in itertools.combinations(range(atlas.dim), 2 * k)
            )
            for ch in atlas.charts
        )
        return SampledForm(atlas, 2 * k, comps)
    out = []
    for ci, chart in enumerate(atlas.charts):
        Pc = P.field[ci]
        if np.max(np.abs(Pc @ Pc - Pc)) > 1e-9:
            raise ProjectorDrift(f"idempotency drift on chart {chart.name}")
        F = _curvature(Pc, chart)
        M = {key: (1j / (2.0 * np.pi)) * val for key, val in F.items()}
        per = []
        for comp in itertools.combinations(range(atlas.dim), 2 * k):
            wedge = _two_form_wedge_power(M, comp, chart.shape, Pc.shape[-1])
            tr = np.trace(Pc @ wedge, axis1=-2, axis2=-1)
            per.append(np.real(tr) / math.factorial(k))
        out.append(tuple(per))
    return SampledForm(atlas, 2 * k, tuple(out))


def pontryagin_character(P: BundleProjector, k: int) -> SampledForm:
    """Normalized Pontryagin character: (1/2)(-1)^k zeta(2k+1) ch_{2k}."""
    if k < 1:
        raise DomainError("pontryagin_character requires k >= 1")
    if not P.complexified:
        raise DomainError(
            "projector must be declared as a complexified real bundle"
        )
    coeff = 0.5 * (-1.0) ** k * zeta(2 * k + 1)
    return chern_character_form(P, 2 * k).scale(coeff)


# -- strata cochains and push-down ---------------------------------------


@dataclass(frozen=True)
class Stratum:
    """One fiberwise critical stratum: Morse index, sampled values, domain mask."""

    index: int
    values: tuple  # per-chart arrays
    mask: tuple | None = None  # per-chart boolean arrays; None = everywhere
    pair_id: object = None  # birth-death partner label for partial strata


@dataclass(frozen=True)
class StrataCochain:
    atlas: BaseAtlas
    strata: tuple

    @property
    def euler_characteristic(self) -> int:
        return int(sum((-1) ** s.index for s in self.strata))

    def validate(self):
        """Partial strata must cancel in birth-death pairs of adjacent index."""
        partial = {}
        for s in self.strata:
            if s.mask is None or all(np.all(m) for m in s.mask):
                continue
            partial.setdefault(s.pair_id, []).append(s)
        for pid, group in partial.items():
            if pid is None or len(group) != 2:
                raise UncancelledBoundary(
                    f"partial stratum group {pid!r} is not a birth-death pair"
                )
            a, b = group
            if abs(a.index - b.index) != 1:
                raise UncancelledBoundary(
                    f"pair {pid!r} indices {a.index}, {b.index} are not adjacent"
                )
            for ma, mb in zip(a.mask, b.mask):
                if not np.array_equal(ma, mb):
                    raise UncancelledBoundary(
                        f"pair {pid!r} masks disagree; boundary terms do not cancel"
                    )


def pushdown(s: StrataCochain):
    """Alternating sum sum_i (-1)^i value_i over strata, per chart point."""
    s.validate()
    out = []
    for ci, chart in enumerate(s.atlas.charts):
        acc = np.zeros(chart.shape)
        for st in s.strata:
            contrib = (-1.0) ** st.index * np.asarray(st.values[ci], dtype=float)
            if st.mask is not None:
                contrib = np.where(st.mask[ci], contrib, 0.0)
            acc = acc + contrib
        out.append(acc)
    return out


def pullback(atlas: BaseAtlas, cochain, indices):
    """Pull a base cochain back to one full stratum per requested index."""
    strata = tuple(
        Stratum(i, tuple(np.asarray(c, dtype=float) for c in cochain))
        for i in indices
    )
    return StrataCochain(atlas, strata)


def assemble_framing(tau, gamma, atlas: BaseAtlas | None = None,
                     unsigned: bool = False) -> float:
    """Combine a torsion integral with the push-down of characteristic data.

    ``tau`` may be a TorsionResult or a plain number; ``gamma`` a
    StrataCochain of top-form component values (pushed down and integrated)
    or a plain number.  Returns -(tau + gamma) in the tube convention, or
    +(tau + gamma) when ``unsigned``.
    """
    a = tau if isinstance(tau, (int, float)) else tau.integral
    if a is None:
        raise DegreeMismatch("torsion result carries no integral at this degree")
    if isinstance(gamma, (int, float)):
        b = float(gamma)
    else:
        target = atlas or gamma.atlas
        arrays = pushdown(gamma)
        form = SampledForm(target, target.dim, tuple((arr,) for arr in arrays))
        b = basegrid.integrate_form(form)
    total = float(a) + b
    return total if unsigned else -total
