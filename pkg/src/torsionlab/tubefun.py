"""Functions of tube type over a sampled base: asymptotic quadratic parts,
verification reports, the direct-sum monoid, stable bundles of rigid
families, and determinant-line orientability.

A :class:`TubeFunction` wraps a fiberwise evaluator f(m, v) over a
:class:`~torsionlab.basegrid.BaseAtlas`; a :class:`RigidFamily` is the special
case of a nondegenerate quadratic form per base point, stored through an
evaluator so it can be sampled both on chart grids and along loops.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .basegrid import BaseAtlas
from .charclass import BundleProjector
from .errors import (
    AtlasMismatch,
    EigenvalueGapLost,
    FrameTransportUnstable,
    NoLimit,
    SingularZeroLevel,
)

PROBE_DIRECTIONS = 48  # fixed quasi-random sphere directions per fiber dim
PROBE_SUBSAMPLE = 4  # base-grid stride for asymptotic sampling
ZERO_BAND_EPS = 0.05  # |h| band half-width for the regular-value scan
ZERO_BAND_DELTA = 1e-2  # required spherical gradient norm on the band


def _sphere_directions(n_dim: int, count: int = PROBE_DIRECTIONS) -> np.ndarray:
    rng = np.random.default_rng(20240915)
    v = rng.normal(size=(count, n_dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _subsample_points(atlas: BaseAtlas):
    """Deterministic probe set: a strided subsample of every chart grid."""
    pts = []
    for chart in atlas.charts:
        sl = tuple(slice(None, None, PROBE_SUBSAMPLE) for _ in chart.shape)
        pts.append(chart.points[sl].reshape(-1, chart.points.shape[-1]))
    return np.concatenate(pts, axis=0)


@dataclass(frozen=True)
class SphereSamples:
    """Asymptotic quadratic part sampled on probe directions and base points."""

    directions: np.ndarray  # (ndir, N)
    base_points: np.ndarray  # (npts, ambient)
    values: np.ndarray  # (npts, ndir)
    residual: float


@dataclass(frozen=True)
class TubeFunction:
    atlas: BaseAtlas
    fiber_dim: int
    evaluator: object  # callable (base_points, v) -> values; v shape (..., N)
    index: int
    verified: str = "Unverified"  # Rigid | QuadraticVerified | Unverified
    asymptotic: SphereSamples | None = None
    tags: tuple = ()

    def __call__(self, m, v):
        return self.evaluator(m, v)


@dataclass(frozen=True)
class VerificationReport:
    homogeneity_residual: float
    regular_value_margin: float
    condition3: str  # Rigid | CallerCertified | Unverified
    index: int

    @property
    def conditions_certified(self):
        certified = ["(1)", "(2)"]
        if self.condition3 != "Unverified":
            certified.append("(3)")
        return tuple(certified)


def asymptotic_quadratic(f: TubeFunction, radii=(4.0, 8.0, 16.0, 32.0)) -> TubeFunction:
    """Richardson-extrapolated limit g(v) = lim f(lambda v)/lambda^2.

    Fits g + a/lambda + b/lambda^2 through the first three probe radii and
    scores the fit by its prediction error at the fourth; decaying correction
    terms (for example a linear growth term, which contributes a/lambda) are
    fitted exactly and do not obstruct the limit.
    """
    dirs = _sphere_directions(f.fiber_dim)
    base = _subsample_points(f.atlas)
    lams = [float(r) for r in radii]
    ys = [
        np.asarray(f(base[:, None, :], lam * dirs[None, :, :])) / lam**2
        for lam in lams
    ]
    A = np.array([[1.0, 1.0 / lam, 1.0 / lam**2] for lam in lams[:3]])
    rhs = np.stack([np.ravel(y) for y in ys[:3]])
    coeff = np.linalg.solve(A, rhs).reshape((3,) + ys[0].shape)  # g, a, b
    g = coeff[0]
    l4 = lams[3]
    predicted = coeff[0] + coeff[1] / l4 + coeff[2] / l4**2
    scale = max(1.0, float(np.max(np.abs(g))))
    residual = float(np.max(np.abs(predicted - ys[3]))) / scale
    if residual > 1e-3:
        raise NoLimit(
            f"asymptotic quadratic limit does not settle: residual {residual:.3e}"
        )
    samples = SphereSamples(dirs, base, g, residual)
    return replace(f, asymptotic=samples)


def verify_tube_type(f: TubeFunction, reference=None) -> VerificationReport:
    """Certify the tube-type conditions that are checkable by sampling.

    Homogeneity and existence of the asymptotic part come from the Richardson
    residual; regularity of the zero level of the sphere function is checked
    on the band |h| <= ZERO_BAND_EPS by a tangential finite-difference
    gradient.  The homotopy-to-quadratic condition is global data: it is
    certified automatically for Rigid input, recorded as CallerCertified when
    a reference quadratic is supplied, and reported Unverified otherwise.
    """
    if f.asymptotic is None:
        f = asymptotic_quadratic(f)
    s = f.asymptotic
    scale = max(1.0, float(np.max(np.abs(s.values))))
    band = np.abs(s.values) <= ZERO_BAND_EPS * scale
    margin = np.inf
    worst = None
    if np.any(band):
        lam = 16.0
        eta = 1e-4
        h = lambda pts, v: np.asarray(f(pts, lam * v)) / lam**2

        def tangential_gradient(base, v):
            grad = np.zeros(f.fiber_dim)
            for axis in range(f.fiber_dim):
                t = np.zeros(f.fiber_dim)
                t[axis] = 1.0
                t -= np.dot(t, v) * v
                nt = np.linalg.norm(t)
                if nt < 1e-8:
                    continue
                t /= nt
                vp = (v + eta * t) / np.linalg.norm(v + eta * t)
                vm = (v - eta * t) / np.linalg.norm(v - eta * t)
                d = (h(base, vp[None, :]) - h(base, vm[None, :])) / (2 * eta)
                grad += float(np.squeeze(d)) * t
            return grad

        for pi, di in zip(*np.nonzero(band)):
            base = s.base_points[pi][None, :]
            v = s.directions[di]
            # drive the probe onto the zero level by spherical Newton steps;
            # at a regular value the gradient stays bounded below there, so
            # probing only near the level cannot hide a degeneracy
            for _ in range(12):
                val = float(np.squeeze(h(base, v[None, :])))
                grad = tangential_gradient(base, v)
                g2 = float(np.dot(grad, grad))
                if g2 < 1e-24 or abs(val) < 1e-14:
                    break
                v = v - (val / g2) * grad
                v = v / np.linalg.norm(v)
            gnorm = float(np.linalg.norm(tangential_gradient(base, v)))
            if gnorm < margin:
                margin = gnorm
                worst = (int(pi), int(di))
        if margin < ZERO_BAND_DELTA * scale:
            raise SingularZeroLevel(
                f"zero level of the sphere function is not regular "
                f"(gradient {margin:.3e} at probe {worst})",
                point=worst,
            )
    cond3 = (
        "Rigid"
        if f.verified == "Rigid"
        else ("CallerCertified" if reference is not None else "Unverified")
    )
    return VerificationReport(
        homogeneity_residual=s.residual,
        regular_value_margin=float(margin if np.isfinite(margin) else np.inf),
        condition3=cond3,
        index=f.index,
    )


def oplus(f1: TubeFunction, f2: TubeFunction) -> TubeFunction:
    """Fiberwise direct sum; rigid second summands tag a twisted stabilization."""
    if f1.atlas is not f2.atlas:
        raise AtlasMismatch("oplus requires a common base atlas")
    n1 = f1.fiber_dim

    def ev(m, v):
        return f1(m, v[..., :n1]) + f2(m, v[..., n1:])

    tags = f1.tags
    if f2.verified == "Rigid":
        tags = tags + (("twisted-stabilization", f2),)
    verified = "Rigid" if (f1.verified == "Rigid" and f2.verified == "Rigid") else "Unverified"
    return TubeFunction(
        f1.atlas, f1.fiber_dim + f2.fiber_dim, ev,
        index=f1.index + f2.index, verified=verified, tags=tags,
    )


# -- rigid families -------------------------------------------------------


@dataclass(frozen=True)
class RigidFamily:
    """Family of nondegenerate quadratic forms of constant index.

    ``q_fn(points)`` returns Hermitian matrices of shape ``(..., N, N)`` for
    ambient base points of shape ``(..., ambient)``.
    """

    atlas: BaseAtlas
    fiber_dim: int
    q_fn: object
    index: int

    def __post_init__(self):
        for chart in self.atlas.charts:
            Q = np.asarray(self.q_fn(chart.points))
            ww = np.linalg.eigvalsh(Q)
            if np.min(np.abs(ww)) < 1e-9:
                raise EigenvalueGapLost(
                    f"quadratic family has a near-zero eigenvalue on {chart.name}"
                )
            neg = np.sum(ww < 0.0, axis=-1)
            if np.min(neg) != self.index or np.max(neg) != self.index:
                raise EigenvalueGapLost(
                    f"index varies over {chart.name}: "
                    f"[{int(np.min(neg))}, {int(np.max(neg))}] vs {self.index}"
                )

    def as_tube_function(self) -> TubeFunction:
        def ev(m, v):
            Q = np.asarray(self.q_fn(m))
            return np.real(
                np.einsum("...i,...ij,...j->...", np.conj(v), Q, v)
            )

        return TubeFunction(self.atlas, self.fiber_dim, ev,
                            index=self.index, verified="Rigid")

    def oplus(self, other: "RigidFamily") -> "RigidFamily":
        if other.atlas is not self.atlas:
            raise AtlasMismatch("oplus requires a common base atlas")
        n1 = self.fiber_dim

        def q_fn(pts):
            a = np.asarray(self.q_fn(pts))
            b = np.asarray(other.q_fn(pts))
            n, m = a.shape[-1], b.shape[-1]
            out = np.zeros(a.shape[:-2] + (n + m, n + m), dtype=np.result_type(a, b))
            out[..., :n, :n] = a
            out[..., n:, n:] = b
            return out

        return RigidFamily(self.atlas, self.fiber_dim + other.fiber_dim, q_fn,
                           self.index + other.index)


def stable_bundle(q: RigidFamily) -> BundleProjector:
    """Spectral projector onto the negative eigenspace of Q(m)."""
    field = []
    for chart in q.atlas.charts:
        Q = np.asarray(q.q_fn(chart.points)).astype(complex)
        ww, V = np.linalg.eigh(Q)
        gap = float(np.min(np.abs(ww)))
        if gap < 1e-9:
            raise EigenvalueGapLost(f"spectral gap {gap:.3e} on {chart.name}")
        neg = (ww < 0.0).astype(float)
        P = (V * neg[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))
        field.append(P)
    return BundleProjector(q.atlas, tuple(field), q.index, complexified=True)


def check_orientable(q: RigidFamily, samples_per_loop: int | None = None) -> bool:
    """Determinant-line holonomy of the negative eigenframe around each
    fundamental loop of the base; orientable iff every holonomy sign is +1."""
    loops = q.atlas.fundamental_loops()
    for loop in loops:
        pts = loop if samples_per_loop is None else loop[:: max(1, len(loop) // samples_per_loop)]
        Q = np.asarray(q.q_fn(pts))
        if np.iscomplexobj(Q) and np.max(np.abs(Q.imag)) > 1e-12:
            raise FrameTransportUnstable(
                "determinant-line holonomy needs a real symmetric family"
            )
        ww, V = np.linalg.eigh(np.real(Q))
        frames = V[..., :, : q.index]  # negative eigenvalues come first in eigh
        sign = 1.0
        prev = frames[0]
        for t in range(1, len(pts)):
            ov = np.linalg.det(prev.T @ frames[t])
            if abs(ov) < 1e-6:
                raise FrameTransportUnstable(
                    f"frame overlap degenerates at loop sample {t} (|det| = {abs(ov):.3e})"
                )
            sign *= np.sign(ov)
            prev = frames[t]
        ov = np.linalg.det(prev.T @ frames[0])
        if abs(ov) < 1e-6:
            raise FrameTransportUnstable("frame overlap degenerates at loop closure")
        sign *= np.sign(ov)
        if sign < 0:
            return False
    return True


# -- presets --------------------------------------------------------------


def preset_standard_quadratic(atlas: BaseAtlas) -> RigidFamily:
    """Constant split form x1^2 + x2^2 - y1^2 - y2^2 (index 2 on R^4)."""
    Q = np.diag([1.0, 1.0, -1.0, -1.0])

    def q_fn(pts):
        return np.broadcast_to(Q, np.asarray(pts).shape[:-1] + (4, 4))

    return RigidFamily(atlas, 4, q_fn, 2)


def preset_bott_rigid(atlas: BaseAtlas) -> RigidFamily:
    """Q(m) = 1 - 2 P_Bott(m): index-1 family whose stable bundle is the
    sphere2 line-bundle generator."""
    from .charclass import bott_projector

    P = bott_projector(atlas)
    lookup = {id(ch.points): P.field[ci] for ci, ch in enumerate(atlas.charts)}

    def q_fn(pts):
        cached = lookup.get(id(pts))
        if cached is not None:
            return np.eye(2) - 2.0 * cached
        x = np.asarray(pts)
        from .charclass import _PAULI

        B = 0.5 * (
            np.eye(2, dtype=complex)
            + sum(x[..., a, None, None] * _PAULI[a] for a in range(3))
        )
        return np.eye(2) - 2.0 * B

    return RigidFamily(atlas, 2, q_fn, 1)


def preset_clifford_rigid(atlas: BaseAtlas) -> RigidFamily:
    """Q(m) = 1 - 2 P_Clifford(m): index-2 family over sphere4."""
    from .charclass import clifford_projector

    P = clifford_projector(atlas)
    lookup = {id(ch.points): P.field[ci] for ci, ch in enumerate(atlas.charts)}

    def q_fn(pts):
        cached = lookup.get(id(pts))
        if cached is not None:
            return np.eye(4) - 2.0 * cached
        from .charclass import _PAULI

        I2 = np.eye(2, dtype=complex)
        gammas = [np.kron(_PAULI[a], _PAULI[0]) for a in range(3)]
        gammas.append(np.kron(I2, _PAULI[1]))
        gammas.append(np.kron(I2, _PAULI[2]))
        x = np.asarray(pts)
        C = 0.5 * (
            np.eye(4, dtype=complex)
            + sum(x[..., a, None, None] * gammas[a] for a in range(5))
        )
        return np.eye(4) - 2.0 * C

    return RigidFamily(atlas, 4, q_fn, 2)


def preset_moebius(atlas: BaseAtlas) -> RigidFamily:
    """Eigenframe rotating by pi around the circle: holonomy -1."""

    def q_fn(pts):
        x = np.asarray(pts)
        th = np.arctan2(x[..., 1], x[..., 0])
        a = th / 2.0
        c, s = np.cos(a), np.sin(a)
        R = np.stack(
            [np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)], axis=-2
        )
        D = np.diag([-1.0, 1.0])
        return R @ D @ np.swapaxes(R, -1, -2)

    return RigidFamily(atlas, 2, q_fn, 1)


PRESETS = {
    "standard-quadratic": preset_standard_quadratic,
    "bott-rigid-s2": preset_bott_rigid,
    "clifford-rigid-s4": preset_clifford_rigid,
    "moebius-circle": preset_moebius,
}
