"""Sampled closed oriented base manifolds as chart atlases.

Four fixed base kinds are supported:

=========  ===  ======================  =====================================
kind       dim  charts                  layout
=========  ===  ======================  =====================================
circle     1    1 periodic              theta in [0, 2pi), uniform
torus2     2    1 periodic              (theta1, theta2) in [0, 2pi)^2
sphere2    2    2 stereographic         north/south squares [-1.4, 1.4]^2,
                                        overlap annulus r in [0.8, 1.25]
sphere4    4    2 stereographic         same radial layout in R^4
=========  ===  ======================  =====================================

Stereographic transitions are inversions composed with one reflection so that
both charts carry orientation sign +1.  Partition-of-unity weights follow a
quintic smoothstep in log-radius, which makes w(r) + w(1/r) = 1 exact.
Derivatives use 4th-order central differences in chart interiors (one-sided
2nd-order at non-periodic edges, which carry zero partition weight).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import tolerances as tol
from .errors import DegreeMismatch, DegreeOverflow, ResolutionTooSmall, UnsupportedKind

CHART_HALFWIDTH = 1.4
OVERLAP_LO = 1.0 / 1.25
OVERLAP_HI = 1.25
SPHERE4_DEFAULT_RESOLUTION = 16  # documented ceiling for desk-scale runtimes


def smoothstep5(t):
    """Quintic smoothstep: C^2 ramp from 0 at t<=0 to 1 at t>=1."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def _radial_weight(r):
    """Partition weight for a stereographic chart: 1 inside the overlap band,
    0 outside, and w(r) + w(1/r) = 1 identically on the band."""
    t = (np.log(OVERLAP_HI) - np.log(np.maximum(r, 1e-300))) / (
        np.log(OVERLAP_HI) - np.log(OVERLAP_LO)
    )
    return smoothstep5(t)


@dataclass(frozen=True)
class Chart:
    name: str
    axes: tuple  # per-axis sample coordinates
    spacing: float
    periodic: bool
    orientation: int
    points: np.ndarray  # embedded manifold points, shape grid + (ambient_dim,)
    weight: np.ndarray  # partition-of-unity values on the grid
    density: np.ndarray  # canonical volume density in chart coordinates

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    @property
    def dim(self):
        return len(self.axes)


@dataclass(frozen=True)
class BaseAtlas:
    kind: str
    resolution: int
    dim: int
    charts: tuple
    volume: float  # closed-form volume of the canonical metric

    def sample(self, fn):
        """Evaluate fn(points) on every chart; points has shape grid + (ambient,)."""
        return [fn(ch.points) for ch in self.charts]

    def fundamental_loops(self):
        """Generators of pi_1 as sampled ambient-point loops (closed arrays)."""
        loops = []
        if self.kind == "circle":
            th = np.linspace(0.0, 2 * np.pi, 4 * self.resolution + 1)
            loops.append(np.stack([np.cos(th), np.sin(th)], axis=-1))
        elif self.kind == "torus2":
            th = np.linspace(0.0, 2 * np.pi, 4 * self.resolution + 1)
            z = np.zeros_like(th)
            one = np.ones_like(th)
            loops.append(
                np.stack([np.cos(th), np.sin(th), one, z], axis=-1)
            )
            loops.append(
                np.stack([one, z, np.cos(th), np.sin(th)], axis=-1)
            )
        return loops


def _grid_axes(res, dim):
    x = np.linspace(-CHART_HALFWIDTH, CHART_HALFWIDTH, res)
    return tuple(x.copy() for _ in range(dim)), float(x[1] - x[0])


def _stereo_chart(name, res, dim, south):
    """Stereographic chart of S^dim in R^{dim+1}.

    North chart: P = (2x, 1 - r^2)/(1 + r^2).  South chart composes the
    inversion with a reflection of the last grid axis so the transition
    preserves orientation on the overlap.
    """
    axes, h = _grid_axes(res, dim)
    grids = np.meshgrid(*axes, indexing="ij")
    X = np.stack(grids, axis=-1)
    if south:
        X = X.copy()
        X[..., -1] *= -1.0
    r2 = np.sum(X**2, axis=-1)
    P = np.concatenate(
        [2 * X / (1 + r2)[..., None], ((1 - r2) / (1 + r2))[..., None]], axis=-1
    )
    if south:
        P[..., -1] *= -1.0
    r = np.sqrt(r2)
    w = _radial_weight(r)
    density = (2.0 / (1.0 + r2)) ** dim  # conformal factor of the round metric
    return Chart(name, axes, h, False, +1, P, w, density)


def build_base(kind: str, resolution: int) -> BaseAtlas:
    kind = kind.lower()
    if resolution < 8:
        raise ResolutionTooSmall(f"resolution {resolution} < 8")
    if kind == "circle":
        th = np.arange(resolution) * (2 * np.pi / resolution)
        pts = np.stack([np.cos(th), np.sin(th)], axis=-1)
        ch = Chart(
            "main", (th,), float(th[1] - th[0]), True, +1, pts,
            np.ones_like(th), np.ones_like(th),
        )
        return BaseAtlas(kind, resolution, 1, (ch,), 2 * np.pi)
    if kind == "torus2":
        th = np.arange(resolution) * (2 * np.pi / resolution)
        T1, T2 = np.meshgrid(th, th, indexing="ij")
        pts = np.stack([np.cos(T1), np.sin(T1), np.cos(T2), np.sin(T2)], axis=-1)
        ones = np.ones_like(T1)
        ch = Chart("main", (th, th.copy()), float(th[1] - th[0]), True, +1, pts, ones, ones)
        return BaseAtlas(kind, resolution, 2, (ch,), (2 * np.pi) ** 2)
    if kind == "sphere2":
        charts = (
            _stereo_chart("north", resolution, 2, south=False),
            _stereo_chart("south", resolution, 2, south=True),
        )
        return BaseAtlas(kind, resolution, 2, charts, 4 * np.pi)
    if kind == "sphere4":
        charts = (
            _stereo_chart("north", resolution, 4, south=False),
            _stereo_chart("south", resolution, 4, south=True),
        )
        return BaseAtlas(kind, resolution, 4, charts, 8 * np.pi**2 / 3)
    raise UnsupportedKind(f"unknown base kind {kind!r}")


# -- discrete derivatives -------------------------------------------------


def _deriv(f, h, axis, periodic):
    """4th-order central difference along one axis (2nd-order at open edges)."""
    if periodic:
        return (
            -np.roll(f, -2, axis) + 8 * np.roll(f, -1, axis)
            - 8 * np.roll(f, 1, axis) + np.roll(f, 2, axis)
        ) / (12.0 * h)
    g = np.gradient(f, h, axis=axis)
    n = f.shape[axis]

    def sl(k):
        s = [slice(None)] * f.ndim
        s[axis] = slice(2 + k, n - 2 + k if n - 2 + k != 0 else None)
        return tuple(s)

    core = [slice(None)] * f.ndim
    core[axis] = slice(2, -2)
    g[tuple(core)] = (
        -f[sl(2)] + 8 * f[sl(1)] - 8 * f[sl(-1)] + f[sl(-2)]
    ) / (12.0 * h)
    return g


def chart_derivative(chart: Chart, f, axis):
    """Partial derivative of a per-chart sample array along a grid axis.

    Trailing non-grid dimensions (matrix indices) pass through unchanged.
    """
    return _deriv(np.asarray(f), chart.spacing, axis, chart.periodic)


# -- sampled forms --------------------------------------------------------


@dataclass(frozen=True)
class SampledForm:
    """Degree-p form: per chart, one array per increasing component multi-index."""

    atlas: BaseAtlas
    degree: int
    comps: tuple  # comps[chart_idx][component_idx] -> ndarray on the chart grid

    @property
    def component_indices(self):
        return list(itertools.combinations(range(self.atlas.dim), self.degree))

    def max_norm(self) -> float:
        worst = 0.0
        for ci, chart in enumerate(self.atlas.charts):
            for arr in self.comps[ci]:
                vals = np.abs(arr) * (chart.weight > 0)
                if vals.size:
                    worst = max(worst, float(np.max(vals)))
        return worst

    def scale(self, a) -> "SampledForm":
        return SampledForm(
            self.atlas,
            self.degree,
            tuple(tuple(a * arr for arr in per) for per in self.comps),
        )

    def add(self, other: "SampledForm") -> "SampledForm":
        if other.degree != self.degree or other.atlas is not self.atlas:
            raise DegreeMismatch("forms live on different atlases or degrees")
        return SampledForm(
            self.atlas,
            self.degree,
            tuple(
                tuple(a + b for a, b in zip(pa, pb))
                for pa, pb in zip(self.comps, other.comps)
            ),
        )


def form_from_function(atlas: BaseAtlas, fn) -> SampledForm:
    """Sample a 0-form given as a function of ambient coordinates."""
    vals = atlas.sample(fn)
    return SampledForm(atlas, 0, tuple((np.asarray(v, dtype=float),) for v in vals))


def zero_form(atlas: BaseAtlas, degree: int) -> SampledForm:
    ncomp = len(list(itertools.combinations(range(atlas.dim), degree)))
    comps = tuple(
        tuple(np.zeros(ch.shape) for _ in range(ncomp)) for ch in atlas.charts
    )
    return SampledForm(atlas, degree, comps)


def exterior_derivative(omega: SampledForm) -> SampledForm:
    atlas = omega.atlas
    p = omega.degree
    if p >= atlas.dim:
        raise DegreeOverflow(f"cannot differentiate a degree-{p} form on a {atlas.dim}-manifold")
    src_idx = {J: i for i, J in enumerate(itertools.combinations(range(atlas.dim), p))}
    out_indices = list(itertools.combinations(range(atlas.dim), p + 1))
    comps = []
    for ci, chart in enumerate(atlas.charts):
        per = []
        for J in out_indices:
            acc = np.zeros(chart.shape, dtype=np.result_type(*[
                a.dtype for a in omega.comps[ci]
            ]) if omega.comps[ci] else float)
            for t, jt in enumerate(J):
                sub = J[:t] + J[t + 1 :]
                arr = omega.comps[ci][src_idx[sub]]
                acc = acc + (-1.0) ** t * chart_derivative(chart, arr, jt)
            per.append(acc)
        comps.append(tuple(per))
    return SampledForm(atlas, p + 1, tuple(comps))


def integrate_form(omega: SampledForm) -> float:
    atlas = omega.atlas
    if omega.degree != atlas.dim:
        raise DegreeMismatch(
            f"can only integrate top forms (degree {atlas.dim}), got {omega.degree}"
        )
    total = 0.0
    for ci, chart in enumerate(atlas.charts):
        arr = omega.comps[ci][0]
        total += chart.orientation * float(
            np.sum(chart.weight * np.real(arr)) * chart.spacing**chart.dim
        )
    return total


def volume_form(atlas: BaseAtlas) -> SampledForm:
    """Canonical (round/flat) volume density as a top form in chart coordinates."""
    comps = tuple((ch.density.astype(float),) for ch in atlas.charts)
    return SampledForm(atlas, atlas.dim, comps)


def overlap_residual(omega: SampledForm) -> float:
    """Cross-chart consistency of a 0-form on the overlap band (diagnostic).

    Each chart's samples on the band are compared against an interpolation of
    the partner chart through the transition map.  Returns the max mismatch;
    single-chart atlases return 0.
    """
    from scipy.interpolate import RegularGridInterpolator

    atlas = omega.atlas
    if omega.degree != 0:
        raise DegreeMismatch("overlap diagnostic is defined for 0-forms")
    if len(atlas.charts) < 2:
        return 0.0
    worst = 0.0
    for ci, cj in ((0, 1), (1, 0)):
        src = atlas.charts[ci]
        interp = RegularGridInterpolator(
            atlas.charts[cj].axes, np.real(omega.comps[cj][0]),
            bounds_error=False, fill_value=np.nan,
        )
        X = np.stack(np.meshgrid(*src.axes, indexing="ij"), axis=-1)
        r2 = np.sum(X**2, axis=-1)
        band = (r2 >= OVERLAP_LO**2) & (r2 <= OVERLAP_HI**2)
        Y = X[band] / r2[band][..., None]  # inversion ...
        Y[..., -1] *= -1.0  # ... composed with the orientation reflection
        other = interp(Y)
        ok = np.isfinite(other)
        if np.any(ok):
            worst = max(
                worst,
                float(np.max(np.abs(np.real(omega.comps[ci][0])[band][ok] - other[ok]))),
            )
    return worst


def partition_residual(atlas: BaseAtlas) -> float:
    """Max deviation of the summed partition weights from 1 (diagnostic).

    Evaluated on the analytic weight profile: for stereographic pairs the
    opposite chart sees radius 1/r, so the sum is w(r) + w(1/r).
    """
    worst = 0.0
    for chart in atlas.charts:
        if atlas.kind in ("circle", "torus2"):
            worst = max(worst, float(np.max(np.abs(chart.weight - 1.0))))
        else:
            r = np.sqrt(np.sum(
                np.stack(np.meshgrid(*chart.axes, indexing="ij"), axis=-1) ** 2,
                axis=-1,
            ))
            inside = r > 1e-9
            total = chart.weight + _radial_weight(np.where(inside, 1.0 / np.maximum(r, 1e-9), np.inf))
            worst = max(worst, float(np.max(np.abs(total[inside] - 1.0))))
    return worst
