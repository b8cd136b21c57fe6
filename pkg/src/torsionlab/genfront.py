"""Generating functions on parameter grids: admissibility probes, fiberwise
critical loci with transversality certificates, moderate-singularity
classification, Legendrian lifts / Cerf diagrams, and the doubling
construction.

Fronts are extracted over rectangular parameter patches (1- or 2-dimensional
grids of base coordinates); sheets are found by Newton iteration seeded per
preset and continued across the grid by re-using neighboring solutions as
predictors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    NewtonDivergence,
    NonpositiveSeparation,
    ProbeFailure,
    TransversalityLost,
)

TRANSVERSALITY_FLOOR = 1e-6
NEWTON_TOL = 1e-11
HESS_ZERO_BAND = 1e-6
CUBIC_FLOOR = 1e-6


@dataclass(frozen=True)
class ParamGrid:
    """Rectangular base patch: one coordinate array per axis."""

    axes: tuple

    @property
    def dim(self):
        return len(self.axes)

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    def points(self):
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(grids, axis=-1).reshape(-1, self.dim)


@dataclass(frozen=True)
class GeneratingFunction:
    """Evaluator bundle for f(m, v) on base x fiber.

    ``value``, ``grad`` (fiber gradient), ``hess`` (fiber Hessian) are
    callables of (m, v) with m a base coordinate vector and v a fiber vector.
    The mixed block d_m d_v f and the base gradient are differenced from
    ``grad``/``value`` when analytic callables are absent.
    """

    base: ParamGrid
    fiber_dim: int
    value: object
    grad: object
    hess: object
    base_grad: object = None
    d3: object = None  # cubic contraction d^3 f(w, w, w) along a fiber direction
    quadratic_signature: tuple = (0, 0)  # (x-block, y-block) of the shape at infinity
    admissible_radius: float = 4.0
    seeds: tuple = ((),)

    def mixed_block(self, m, v, step=1e-5):
        """d_m d_v f by central differences in the base coordinates."""
        m = np.asarray(m, dtype=float)
        cols = []
        for a in range(len(m)):
            e = np.zeros_like(m)
            e[a] = step
            cols.append((np.asarray(self.grad(m + e, v)) - np.asarray(self.grad(m - e, v))) / (2 * step))
        return np.stack(cols, axis=-1)  # (N, dim M)

    def base_gradient(self, m, v, step=1e-6):
        if self.base_grad is not None:
            return np.asarray(self.base_grad(m, v), dtype=float)
        m = np.asarray(m, dtype=float)
        out = np.zeros_like(m)
        for a in range(len(m)):
            e = np.zeros_like(m)
            e[a] = step
            out[a] = (self.value(m + e, v) - self.value(m - e, v)) / (2 * step)
        return out

    def cubic(self, m, v, w, step=1e-3):
        """d^3 f(w, w, w) at (m, v), by differencing the Hessian if needed."""
        if self.d3 is not None:
            return float(self.d3(m, v, w))
        scale = step * max(1.0, float(np.linalg.norm(v)))
        hp = np.asarray(self.hess(m, v + scale * w))
        hm = np.asarray(self.hess(m, v - scale * w))
        return float(w @ ((hp - hm) / (2 * scale)) @ w)


@dataclass(frozen=True)
class SheetPoint:
    m: np.ndarray
    v: np.ndarray
    z: float
    index: int
    margin: float
    p: np.ndarray  # base gradient (Legendrian momentum)


@dataclass(frozen=True)
class CuspPoint:
    m: np.ndarray
    v: np.ndarray
    z: float
    co_orientation: int


@dataclass(frozen=True)
class FrontDiagram:
    gf: GeneratingFunction
    points: tuple  # SheetPoint, flattened over the base grid
    cusps: tuple = ()


# -- admissibility --------------------------------------------------------


def check_admissible(gf: GeneratingFunction, radii=None) -> dict:
    """Probe shells outside the declared compact radius for the split-quadratic
    shape at infinity; returns a report dict with the residual bound."""
    if gf.quadratic_signature is None:
        raise ProbeFailure("no quadratic signature declared for the shape at infinity")
    nx, ny = gf.quadratic_signature
    if nx + ny != gf.fiber_dim:
        raise ProbeFailure("quadratic signature does not fill the fiber dimension")
    radii = radii or (gf.admissible_radius, 2 * gf.admissible_radius, 3 * gf.admissible_radius)
    rng = np.random.default_rng(7071)
    dirs = rng.normal(size=(32, gf.fiber_dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    base_pts = gf.base.points()[:: max(1, len(gf.base.points()) // 16)]
    sign = np.concatenate([np.ones(nx), -np.ones(ny)])
    per_shell = []
    for r in radii:
        worst = 0.0
        for m in base_pts:
            for d in dirs:
                v = r * d
                g = np.asarray(gf.grad(m, v))
                worst = max(worst, float(np.linalg.norm(g - 2.0 * sign * v)))
        per_shell.append(worst)
    # the perturbation term of the admissible shape has a bounded gradient,
    # so its residual must not grow from shell to shell
    admissible = bool(
        np.isfinite(per_shell[-1]) and per_shell[-1] <= per_shell[0] + 1e-9
    )
    return {
        "admissible": admissible,
        "residual_bound": max(per_shell),
        "per_shell": per_shell,
        "radii": list(radii),
    }


# -- critical loci --------------------------------------------------------


def _newton(gf, m, v0, max_iter=60):
    v = np.array(v0, dtype=float)
    for _ in range(max_iter):
        g = np.asarray(gf.grad(m, v), dtype=float)
        if np.linalg.norm(g) < NEWTON_TOL:
            return v
        H = np.asarray(gf.hess(m, v), dtype=float)
        try:
            step = np.linalg.lstsq(H, -g, rcond=None)[0]
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)) or np.linalg.norm(step) > 1e3:
            return None
        v = v + step
    g = np.asarray(gf.grad(m, v), dtype=float)
    if np.linalg.norm(g) < 1e-7:  # linear-rate convergence near folds
        return v
    return None


def fiberwise_critical_locus(gf: GeneratingFunction, seeds=None,
                             require_margin=True) -> FrontDiagram:
    """Newton-solve d_v f = 0 over the base grid, continuing solutions from
    neighboring grid points, and certify transversality per sheet point."""
    seeds = [np.asarray(s, dtype=float) for s in (seeds or gf.seeds) if len(s) == gf.fiber_dim]
    if not seeds:
        seeds = [np.zeros(gf.fiber_dim)]
    pts = gf.base.points()
    points = []
    carried = []  # predictor pool from previously solved base points
    for m in pts:
        roots = []
        for v0 in list(carried) + seeds:
            v = _newton(gf, m, v0)
            if v is None:
                continue
            if any(np.linalg.norm(v - r) < 1e-6 * (1 + np.linalg.norm(v)) for r in roots):
                continue
            roots.append(v)
        carried = list(roots)
        for v in roots:
            H = np.asarray(gf.hess(m, v), dtype=float)
            block = np.concatenate([H, gf.mixed_block(m, v)], axis=1)
            margin = float(np.linalg.svd(block, compute_uv=False)[-1])
            if require_margin and margin <= TRANSVERSALITY_FLOOR:
                raise TransversalityLost(
                    f"transversality margin {margin:.3e} at m = {m}", point=(m, v)
                )
            index = int(np.sum(np.linalg.eigvalsh(H) < 0.0))
            points.append(
                SheetPoint(
                    m=np.array(m), v=v, z=float(gf.value(m, v)),
                    index=index, margin=margin, p=gf.base_gradient(m, v),
                )
            )
    return FrontDiagram(gf, tuple(points))


@dataclass(frozen=True)
class Morse:
    index: int


@dataclass(frozen=True)
class BirthDeath:
    index: int
    co_orientation: int


@dataclass(frozen=True)
class NotModerate:
    reason: str


def classify_moderate(gf: GeneratingFunction, m, v, band=HESS_ZERO_BAND):
    """Classify a critical point as Morse, birth-death, or neither."""
    m = np.asarray(m, dtype=float)
    v = np.asarray(v, dtype=float)
    H = np.asarray(gf.hess(m, v), dtype=float)
    ww, V = np.linalg.eigh(H)
    small = np.abs(ww) <= band
    if not np.any(small):
        return Morse(int(np.sum(ww < 0.0)))
    if np.sum(small) == 1:
        w = V[:, int(np.argmax(small))]
        cubic = gf.cubic(m, v, w)
        if abs(cubic) > CUBIC_FLOOR:
            index = int(np.sum(ww < -HESS_ZERO_BAND))
            return BirthDeath(index, +1 if cubic > 0 else -1)
        return NotModerate("degenerate direction with vanishing cubic term")
    return NotModerate(f"{int(np.sum(small))}-dimensional Hessian kernel")


def find_cusps(gf: GeneratingFunction, front: FrontDiagram) -> FrontDiagram:
    """Scan sheet points for birth-death classification and record cusps.

    Newton roots of folds stop within sqrt(NEWTON_TOL) of the degenerate
    fiber point, so the scan band is widened accordingly; the two branches
    converging onto one cusp are deduplicated by position and level.
    """
    scan_band = max(HESS_ZERO_BAND, 10.0 * np.sqrt(NEWTON_TOL))
    cusps = []
    seen = set()
    for sp in front.points:
        cls = classify_moderate(gf, sp.m, sp.v, band=scan_band)
        if isinstance(cls, BirthDeath):
            key = (tuple(np.round(sp.m, 6)), round(sp.z, 6), cls.co_orientation)
            if key in seen:
                continue
            seen.add(key)
            cusps.append(CuspPoint(sp.m, sp.v, sp.z, cls.co_orientation))
    return replace(front, cusps=tuple(cusps))


# -- lifts, exports, doubling --------------------------------------------


def legendrian_lift(front: FrontDiagram):
    """(q, p, z) samples per sheet point, with an embeddedness diagnostic."""
    samples = [
        {"q": sp.m.tolist(), "p": sp.p.tolist(), "z": sp.z, "index": sp.index}
        for sp in front.points
    ]
    immersed_only = False
    seen = {}
    for s, sp in zip(samples, front.points):
        key = (
            tuple(round(x, 8) for x in s["q"]),
            tuple(round(x, 8) for x in s["p"]),
            round(s["z"], 8),
        )
        vkey = tuple(round(float(x), 8) for x in sp.v)
        if key in seen and seen[key] != vkey:
            immersed_only = True  # distinct critical points share (q, p, z)
        seen[key] = vkey
    return {"samples": samples, "immersed_only": immersed_only}


def export_cerf_csv(front: FrontDiagram, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        dim = front.gf.base.dim
        writer.writerow([f"m{a}" for a in range(dim)]
                        + [f"v{a}" for a in range(front.gf.fiber_dim)]
                        + ["z", "index", "margin"])
        for sp in front.points:
            writer.writerow(
                [f"{x:.12g}" for x in sp.m]
                + [f"{x:.12g}" for x in sp.v]
                + [f"{sp.z:.12g}", sp.index, f"{sp.margin:.6g}"]
            )
    return path


def export_cerf_svg(front: FrontDiagram, path):
    """Cerf diagram (m, z) for 1-dimensional bases."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if front.gf.base.dim != 1:
        raise ProbeFailure("SVG Cerf diagrams are drawn for 1-dimensional bases")
    fig, ax = plt.subplots(figsize=(5, 4))
    by_index = {}
    for sp in front.points:
        by_index.setdefault(sp.index, []).append((sp.m[0], sp.z))
    for idx, pts in sorted(by_index.items()):
        arr = np.array(sorted(pts))
        ax.plot(arr[:, 0], arr[:, 1], ".", markersize=2, label=f"index {idx}")
    for cp in front.cusps:
        ax.plot([cp.m[0]], [cp.z], "k^", markersize=6)
    ax.set_xlabel("base coordinate")
    ax.set_ylabel("critical value z")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def double(gf: GeneratingFunction, separation: float) -> GeneratingFunction:
    """Append one fiber coordinate s with potential s^3 - 3 sigma s: every
    sheet splits into two copies at z -+ 2 sigma^{3/2} with indices k, k+1."""
    sigma = float(separation)
    if sigma <= 0.0:
        raise NonpositiveSeparation(f"separation must be positive, got {sigma}")
    N = gf.fiber_dim

    def value(m, v):
        return gf.value(m, v[:N]) + v[N] ** 3 - 3.0 * sigma * v[N]

    def grad(m, v):
        g = np.asarray(gf.grad(m, v[:N]), dtype=float)
        return np.concatenate([g, [3.0 * v[N] ** 2 - 3.0 * sigma]])

    def hess(m, v):
        H = np.asarray(gf.hess(m, v[:N]), dtype=float)
        out = np.zeros((N + 1, N + 1))
        out[:N, :N] = H
        out[N, N] = 6.0 * v[N]
        return out

    def base_grad(m, v):
        return gf.base_gradient(m, v[:N])

    root = np.sqrt(sigma)
    seeds = tuple(
        tuple(list(s) + [sgn * root]) for s in gf.seeds if len(s) == N
        for sgn in (1.0, -1.0)
    )
    if not seeds:
        seeds = ((0.0,) * N + (root,), (0.0,) * N + (-root,))
    return GeneratingFunction(
        base=gf.base, fiber_dim=N + 1, value=value, grad=grad, hess=hess,
        base_grad=base_grad, quadratic_signature=gf.quadratic_signature,
        admissible_radius=gf.admissible_radius, seeds=seeds,
    )


# -- presets --------------------------------------------------------------


def preset_zero_section(nx: int = 1, ny: int = 1, npts: int = 41) -> GeneratingFunction:
    """Pure split quadratic |x|^2 - |y|^2 over an interval: one flat sheet."""
    base = ParamGrid((np.linspace(0.0, 1.0, npts),))
    N = nx + ny
    sign = np.concatenate([np.ones(nx), -np.ones(ny)])

    def value(m, v):
        return float(np.sum(sign * np.asarray(v) ** 2))

    def grad(m, v):
        return 2.0 * sign * np.asarray(v)

    def hess(m, v):
        return np.diag(2.0 * sign)

    return GeneratingFunction(
        base=base, fiber_dim=N, value=value, grad=grad, hess=hess,
        base_grad=lambda m, v: np.zeros(1),
        quadratic_signature=(nx, ny), seeds=((0.0,) * N,),
    )


def preset_cubic_fold(t_min: float = 0.01, t_max: float = 1.0,
                      npts: int = 100) -> GeneratingFunction:
    """f(t, v) = v^3 - 3 t v: two sheets v = +-sqrt(t) with z = -+2 t^{3/2}."""
    base = ParamGrid((np.linspace(t_min, t_max, npts),))

    def value(m, v):
        return float(v[0] ** 3 - 3.0 * m[0] * v[0])

    def grad(m, v):
        return np.array([3.0 * v[0] ** 2 - 3.0 * m[0]])

    def hess(m, v):
        return np.array([[6.0 * v[0]]])

    def d3(m, v, w):
        return 6.0 * w[0] ** 3

    return GeneratingFunction(
        base=base, fiber_dim=1, value=value, grad=grad, hess=hess, d3=d3,
        base_grad=lambda m, v: np.array([-3.0 * v[0]]),
        quadratic_signature=(1, 0), seeds=((1.0,), (-1.0,)),
    )


def preset_wrinkle(npts: int = 25) -> GeneratingFunction:
    """Wrinkle model z^3 + 3(|y|^2 - 1) z - x1^2 + x2^2 over a disk patch:
    the fiber is (z, x1, x2); birth-death points ring the circle |y| = 1."""
    ax = np.linspace(-1.5, 1.5, npts)
    base = ParamGrid((ax, ax.copy()))

    def value(m, v):
        r2 = m[0] ** 2 + m[1] ** 2
        return float(v[0] ** 3 + 3.0 * (r2 - 1.0) * v[0] - v[1] ** 2 + v[2] ** 2)

    def grad(m, v):
        r2 = m[0] ** 2 + m[1] ** 2
        return np.array([3.0 * v[0] ** 2 + 3.0 * (r2 - 1.0), -2.0 * v[1], 2.0 * v[2]])

    def hess(m, v):
        return np.diag([6.0 * v[0], -2.0, 2.0])

    def d3(m, v, w):
        return 6.0 * w[0] ** 3

    def base_grad(m, v):
        return np.array([6.0 * m[0] * v[0], 6.0 * m[1] * v[0]])

    return GeneratingFunction(
        base=base, fiber_dim=3, value=value, grad=grad, hess=hess, d3=d3,
        base_grad=base_grad, quadratic_signature=(2, 1),
        seeds=((0.8, 0.0, 0.0), (-0.8, 0.0, 0.0), (0.0, 0.0, 0.0)),
    )


PRESETS = {
    "zero-section": preset_zero_section,
    "cubic-fold": preset_cubic_fold,
    "wrinkle": preset_wrinkle,
}
