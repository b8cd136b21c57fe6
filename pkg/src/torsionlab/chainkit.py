"""Finite based chain complexes over C and scalar Franz-Reidemeister torsion.

A :class:`BasedComplex` is a finite graded complex with a preferred basis in
each degree, stored as explicit differential matrices.  The module provides
the elementary moves (handle slides, monomial changes of basis,
expansion/collapse of cancelling pairs, suspension), mapping cones, and the
degree-0 torsion ``log|tau|`` computed by chain contraction, together with an
independent Hodge-Laplacian route used for cross-checking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from . import tolerances as tol
from .errors import (
    DegreeMismatch,
    IndexOutOfRange,
    IoFailure,
    MalformedComplex,
    NotAcyclic,
    NotChainMap,
)


@dataclass(frozen=True)
class UnitTag:
    """Coefficient unit group: the cyclic group generated by u = e^{2 pi i/order}."""

    order: int

    @property
    def generator(self) -> complex:
        return np.exp(2j * np.pi / self.order)


def _as_matrix(a, rows, cols):
    m = np.asarray(a, dtype=complex)
    if m.size == 0:
        m = np.zeros((rows, cols), dtype=complex)
    if m.shape != (rows, cols):
        raise MalformedComplex(f"differential shape {m.shape} != ({rows}, {cols})")
    return m


def _in_unit_ring(z: complex, order: int) -> bool:
    """Test membership of z in the integer span of the powers of e^{2 pi i/order}.

    Solved as an integer least-squares problem over the power basis; entries of
    interest have small coordinates, so rounding the minimum-norm solution and
    checking the residual is reliable.
    """
    powers = np.exp(2j * np.pi * np.arange(order) / order)
    A = np.stack([powers.real, powers.imag])
    b = np.array([z.real, z.imag])
    coeffs, *_ = np.linalg.lstsq(A, b, rcond=None)
    rounded = np.round(coeffs)
    if np.max(np.abs(coeffs - rounded)) > 1e-6:
        return False
    return np.linalg.norm(A @ rounded - b) <= tol.CONSTRUCTION


@dataclass(frozen=True)
class BasedComplex:
    """A based complex ... -> C_{q+1} -> C_q -> ... -> C_0 with explicit matrices.

    ``ranks[q]`` is the number of generators in degree q and ``diffs[q]`` is the
    matrix of d_{q+1}: C_{q+1} -> C_q (shape ``ranks[q] x ranks[q+1]``), so
    ``len(diffs) == len(ranks) - 1``.
    """

    ranks: tuple
    diffs: tuple
    filtration: tuple | None = None
    unit_tag: UnitTag | None = None
    check_ring: bool = field(default=True, repr=False)

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        if any(r < 0 for r in ranks):
            raise MalformedComplex("negative generator count")
        diffs = tuple(
            _as_matrix(d, ranks[q], ranks[q + 1]) for q, d in enumerate(self.diffs)
        )
        if len(diffs) != max(len(ranks) - 1, 0):
            raise MalformedComplex(
                f"expected {len(ranks) - 1} differentials, got {len(diffs)}"
            )
        for q in range(len(diffs) - 1):
            prod = diffs[q] @ diffs[q + 1]
            if prod.size and np.max(np.abs(prod)) > tol.CONSTRUCTION:
                raise MalformedComplex(
                    f"d o d != 0 between degrees {q + 2} and {q}: "
                    f"max entry {np.max(np.abs(prod)):.3e}"
                )
        if self.filtration is not None:
            filt = tuple(float(v) for v in self.filtration)
            if len(filt) != sum(ranks):
                raise MalformedComplex("filtration length != total rank")
            object.__setattr__(self, "filtration", filt)
        if self.unit_tag is not None and self.check_ring:
            for d in diffs:
                for z in d.flat:
                    if not _in_unit_ring(complex(z), self.unit_tag.order):
                        raise MalformedComplex(
                            f"entry {z} not in the unit ring of order {self.unit_tag.order}"
                        )
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "diffs", diffs)

    # -- basic structure -------------------------------------------------

    @property
    def top_degree(self) -> int:
        return len(self.ranks) - 1

    @property
    def total_rank(self) -> int:
        return sum(self.ranks)

    def differential(self, q: int) -> np.ndarray:
        """Matrix of d_q: C_q -> C_{q-1} (empty matrices at the ends)."""
        if 1 <= q <= self.top_degree:
            return self.diffs[q - 1]
        lo = self.ranks[q - 1] if 0 <= q - 1 <= self.top_degree else 0
        hi = self.ranks[q] if 0 <= q <= self.top_degree else 0
        return np.zeros((lo, hi), dtype=complex)

    def direct_sum(self, other: "BasedComplex") -> "BasedComplex":
        n = max(len(self.ranks), len(other.ranks))
        ranks = tuple(
            (self.ranks[q] if q < len(self.ranks) else 0)
            + (other.ranks[q] if q < len(other.ranks) else 0)
            for q in range(n)
        )
        diffs = []
        for q in range(1, n):
            a = self.differential(q)
            b = other.differential(q)
            diffs.append(scipy.linalg.block_diag(a, b).astype(complex))
        return BasedComplex(ranks, tuple(diffs), unit_tag=self.unit_tag, check_ring=False)

    # -- io ---------------------------------------------------------------

    def to_dict(self) -> dict:
        def encode(mat):
            return [[[float(z.real), float(z.imag)] for z in row] for row in mat]

        return {
            "degrees": list(self.ranks),
            "differentials": [encode(d) for d in self.diffs],
            "filtration": list(self.filtration) if self.filtration else None,
            "unit_tag": {"order": self.unit_tag.order} if self.unit_tag else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BasedComplex":
        try:
            ranks = tuple(data["degrees"])
            diffs = []
            for q, mat in enumerate(data["differentials"]):
                rows = ranks[q]
                cols = ranks[q + 1] if q + 1 < len(ranks) else 0
                m = np.zeros((rows, cols), dtype=complex)
                for i, row in enumerate(mat):
                    for j, (re, im) in enumerate(row):
                        m[i, j] = re + 1j * im
                diffs.append(m)
            filt = data.get("filtration")
            tag = data.get("unit_tag")
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise IoFailure(f"malformed complex file: {exc}") from exc
        return cls(
            ranks,
            tuple(diffs),
            filtration=tuple(filt) if filt else None,
            unit_tag=UnitTag(tag["order"]) if tag else None,
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "BasedComplex":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise IoFailure(f"cannot read complex file {path}: {exc}") from exc
        return cls.from_dict(data)


# -- moves ----------------------------------------------------------------


@dataclass(frozen=True)
class HandleSlide:
    """Basis change b_i <- b_i + coefficient * b_j in degree q (i != j)."""

    degree: int
    i: int
    j: int
    coefficient: complex


@dataclass(frozen=True)
class MonomialChange:
    """Permute the degree-q basis and rescale by unit scalars."""

    degree: int
    permutation: tuple
    units: tuple


@dataclass(frozen=True)
class Expansion:
    """Append a cancelling generator pair in degrees q, q-1 with entry 1."""

    degree: int


@dataclass(frozen=True)
class Collapse:
    """Remove the trailing cancelling pair in degrees q, q-1."""

    degree: int


@dataclass(frozen=True)
class Suspension:
    """Shift every degree up by one and negate the differentials."""


def _change_basis(c: BasedComplex, q: int, G: np.ndarray) -> BasedComplex:
    """Replace the degree-q basis by the columns of G (new vectors in old coords)."""
    diffs = list(c.diffs)
    if q >= 1:
        diffs[q - 1] = diffs[q - 1] @ G
    if q < c.top_degree:
        diffs[q] = np.linalg.solve(G, diffs[q])
    return replace(c, diffs=tuple(diffs), check_ring=False)


def apply_move(c: BasedComplex, move) -> BasedComplex:
    if isinstance(move, HandleSlide):
        q = move.degree
        if not 0 <= q <= c.top_degree:
            raise DegreeMismatch(f"no degree {q} in complex")
        n = c.ranks[q]
        if move.i == move.j:
            raise IndexOutOfRange("handle slide requires i != j")
        if not (0 <= move.i < n and 0 <= move.j < n):
            raise IndexOutOfRange(f"slide indices ({move.i}, {move.j}) exceed rank {n}")
        G = np.eye(n, dtype=complex)
        G[move.j, move.i] = move.coefficient
        return _change_basis(c, q, G)

    if isinstance(move, MonomialChange):
        q = move.degree
        if not 0 <= q <= c.top_degree:
            raise DegreeMismatch(f"no degree {q} in complex")
        n = c.ranks[q]
        perm = tuple(move.permutation)
        if sorted(perm) != list(range(n)) or len(move.units) != n:
            raise IndexOutOfRange("permutation/units do not match the degree rank")
        units = np.asarray(move.units, dtype=complex)
        if np.max(np.abs(np.abs(units) - 1.0)) > tol.CONSTRUCTION:
            raise IndexOutOfRange("monomial scalars must have unit modulus")
        G = np.zeros((n, n), dtype=complex)
        for new, old in enumerate(perm):
            G[old, new] = units[new]
        return _change_basis(c, q, G)

    if isinstance(move, Expansion):
        q = move.degree
        if not 1 <= q <= c.top_degree + 1:
            raise DegreeMismatch(f"cannot expand in degree {q}")
        ranks = list(c.ranks)
        while len(ranks) <= q:
            ranks.append(0)
        diffs = [c.differential(p) for p in range(1, len(ranks))]
        for p in (q - 1, q):
            ranks[p] += 1
        # re-embed with the new pair appended as the last generators
        new_diffs = []
        for p in range(1, len(ranks)):
            m = np.zeros((ranks[p - 1], ranks[p]), dtype=complex)
            old = diffs[p - 1]
            m[: old.shape[0], : old.shape[1]] = old
            if p == q:
                m[-1, -1] = 1.0
            new_diffs.append(m)
        return BasedComplex(tuple(ranks), tuple(new_diffs), unit_tag=c.unit_tag, check_ring=False)

    if isinstance(move, Collapse):
        q = move.degree
        if not 1 <= q <= c.top_degree or c.ranks[q] < 1 or c.ranks[q - 1] < 1:
            raise DegreeMismatch(f"no cancelling pair to collapse in degree {q}")
        d = c.differential(q)
        col = d[:, -1]
        row = d[-1, :]
        if (
            abs(col[-1] - 1.0) > tol.CONSTRUCTION
            or np.max(np.abs(col[:-1]), initial=0.0) > tol.CONSTRUCTION
            or np.max(np.abs(row[:-1]), initial=0.0) > tol.CONSTRUCTION
        ):
            raise DegreeMismatch(
                "trailing generators do not form a cancelling pair with entry 1"
            )
        ranks = list(c.ranks)
        ranks[q] -= 1
        ranks[q - 1] -= 1
        diffs = []
        for p in range(1, len(ranks)):
            m = c.differential(p)
            if p == q - 1 or p == q + 1:
                m = m[: ranks[p - 1], : ranks[p]]
            elif p == q:
                m = m[: ranks[p - 1], : ranks[p]]
            diffs.append(m[: ranks[p - 1], : ranks[p]])
        while len(ranks) > 1 and ranks[-1] == 0:
            ranks.pop()
            diffs.pop()
        return BasedComplex(tuple(ranks), tuple(diffs), unit_tag=c.unit_tag, check_ring=False)

    if isinstance(move, Suspension):
        ranks = (0,) + c.ranks
        diffs = (np.zeros((0, c.ranks[0]), dtype=complex),) + tuple(-d for d in c.diffs)
        return BasedComplex(ranks, diffs, unit_tag=c.unit_tag, check_ring=False)

    raise IndexOutOfRange(f"unknown move {move!r}")


# -- chain maps and cones -------------------------------------------------


@dataclass(frozen=True)
class ChainMap:
    """Degree-preserving map between complexes, one matrix per degree."""

    source: BasedComplex
    target: BasedComplex
    components: tuple

    def __post_init__(self):
        n = max(len(self.source.ranks), len(self.target.ranks))
        comps = []
        for q in range(n):
            rs = self.source.ranks[q] if q < len(self.source.ranks) else 0
            rt = self.target.ranks[q] if q < len(self.target.ranks) else 0
            given = self.components[q] if q < len(self.components) else np.zeros((rt, rs))
            comps.append(_as_matrix(given, rt, rs))
        for q in range(1, n):
            lhs = comps[q - 1] @ self.source.differential(q)
            rhs = self.target.differential(q) @ comps[q]
            if lhs.size and np.max(np.abs(lhs - rhs)) > tol.CONSTRUCTION:
                raise NotChainMap(
                    f"f d != d f in degree {q}: residual {np.max(np.abs(lhs - rhs)):.3e}"
                )
        object.__setattr__(self, "components", tuple(comps))


def mapping_cone(f: ChainMap) -> BasedComplex:
    """Cone(f) with Cone_q = T_q + S_{q-1} and d = [[d_T, f], [0, -d_S]]."""
    src, tgt = f.source, f.target
    n = max(len(src.ranks) + 1, len(tgt.ranks))
    ranks = tuple(
        (tgt.ranks[q] if q < len(tgt.ranks) else 0)
        + (src.ranks[q - 1] if 0 <= q - 1 < len(src.ranks) else 0)
        for q in range(n)
    )
    diffs = []
    for q in range(1, n):
        rt, rs = (tgt.ranks[q] if q < len(tgt.ranks) else 0), (
            src.ranks[q - 1] if q - 1 < len(src.ranks) else 0
        )
        m = np.zeros((ranks[q - 1], ranks[q]), dtype=complex)
        dT = tgt.differential(q)
        m[: dT.shape[0], : dT.shape[1]] = dT
        fq = f.components[q - 1] if q - 1 < len(f.components) else np.zeros((0, 0))
        m[: fq.shape[0], rt : rt + fq.shape[1]] = fq
        dS = src.differential(q - 1)
        m[
            ranks[q - 1] - dS.shape[0] :, rt : rt + dS.shape[1]
        ] = -dS
        diffs.append(m)
    return BasedComplex(ranks, tuple(diffs), unit_tag=tgt.unit_tag, check_ring=False)


# -- acyclicity and torsion ----------------------------------------------


def _hodge_operator(c: BasedComplex) -> np.ndarray:
    """The full operator d + d^dagger on the total graded space."""
    n = c.total_rank
    D = np.zeros((n, n), dtype=complex)
    offs = np.concatenate([[0], np.cumsum(c.ranks)])
    for q in range(1, len(c.ranks)):
        blk = c.differential(q)
        D[offs[q - 1] : offs[q], offs[q] : offs[q + 1]] = blk
        D[offs[q] : offs[q + 1], offs[q - 1] : offs[q]] = blk.conj().T
    return D


def is_acyclic(c: BasedComplex):
    """Return (acyclic, certificate) where the certificate is min sv of d + d^dagger."""
    if c.total_rank == 0:
        return True, np.inf
    sv = np.linalg.svd(_hodge_operator(c), compute_uv=False)
    cert = float(sv[-1])
    return cert > tol.INVERTIBILITY, cert


def _contraction_subsets(c: BasedComplex):
    """Pick pivot generator subsets S_q with C_q = d(span S_{q+1}) + span S_q.

    Boundary ranks are forced by acyclicity (b_q = rank d_q satisfies
    b_q + b_{q+1} = rank C_q); subsets are chosen by column-pivoted QR for
    conditioning.
    """
    top = c.top_degree
    b = [0] * (top + 2)
    for q in range(top, 0, -1):
        b[q] = c.ranks[q] - b[q + 1]
        if b[q] < 0 or b[q] > min(c.ranks[q], c.ranks[q - 1]):
            raise NotAcyclic(f"rank bookkeeping fails in degree {q}")
    if b[1] != c.ranks[0]:
        raise NotAcyclic("degree-0 homology does not vanish")
    subsets = [np.array([], dtype=int)] * (top + 1)
    for q in range(1, top + 1):
        d = c.differential(q)
        if b[q] == 0:
            continue
        _, _, piv = scipy.linalg.qr(d, pivoting=True)
        subsets[q] = np.sort(piv[: b[q]])
    return subsets, b


def fr_torsion_signed(c: BasedComplex):
    """Chain-contraction torsion: returns (log|tau|, phase)."""
    ok, cert = is_acyclic(c)
    if not ok:
        raise NotAcyclic(f"complex is not acyclic (certificate {cert:.3e})")
    if c.total_rank == 0:
        return 0.0, 1.0 + 0.0j
    subsets, b = _contraction_subsets(c)
    log_abs = 0.0
    phase = 1.0 + 0.0j
    for q in range(c.top_degree + 1):
        cols = []
        if q + 1 <= c.top_degree and b[q + 1]:
            cols.append(c.differential(q + 1)[:, subsets[q + 1]])
        if len(subsets[q]):
            cols.append(np.eye(c.ranks[q], dtype=complex)[:, subsets[q]])
        if not cols:
            continue
        M = np.concatenate(cols, axis=1)
        sign, logdet = np.linalg.slogdet(M)
        if not np.isfinite(logdet):
            raise NotAcyclic(f"degenerate contraction matrix in degree {q}")
        if q % 2 == 0:
            log_abs += logdet
            phase *= sign
        else:
            log_abs -= logdet
            phase /= sign
    return float(log_abs), complex(phase)


def fr_torsion(c: BasedComplex) -> float:
    """log|tau(c)| of an acyclic based complex."""
    return fr_torsion_signed(c)[0]


def laplacian_torsion(c: BasedComplex) -> float:
    """Independent route: 1/2 sum_q (-1)^{q+1} q log det Laplacian_q."""
    ok, cert = is_acyclic(c)
    if not ok:
        raise NotAcyclic(f"complex is not acyclic (certificate {cert:.3e})")
    total = 0.0
    for q in range(c.top_degree + 1):
        if c.ranks[q] == 0:
            continue
        dq = c.differential(q)
        dq1 = c.differential(q + 1)
        lap = dq.conj().T @ dq + dq1 @ dq1.conj().T
        sign, logdet = np.linalg.slogdet(lap)
        total += 0.5 * (-1.0) ** (q + 1) * q * logdet
    return float(total)


# -- generators for tests and the suite ----------------------------------


def random_acyclic(rng: np.random.Generator, max_total_rank: int = 12) -> BasedComplex:
    """Random acyclic complex: cancelling pairs dressed by triangular basis changes.

    Start from a direct sum of two-term complexes with random nonzero entries
    (acyclic by construction), then conjugate each degree by a random
    unit-diagonal triangular matrix, which preserves acyclicity.
    """
    top = int(rng.integers(1, 4))
    ranks = [0] * (top + 1)
    pairs = []
    budget = max_total_rank
    while budget >= 2:
        q = int(rng.integers(1, top + 1))
        pairs.append(q)
        ranks[q] += 1
        ranks[q - 1] += 1
        budget -= 2
        if rng.random() < 0.3:
            break
    while ranks and ranks[-1] == 0:
        ranks.pop()
        top -= 1
    # each generator is used by exactly one pair (in one role), so d o d = 0
    counters = [0] * (top + 1)
    diffs = [np.zeros((ranks[q - 1], ranks[q]), dtype=complex) for q in range(1, top + 1)]
    for q in pairs:
        i = counters[q - 1]
        j = counters[q]
        counters[q - 1] += 1
        counters[q] += 1
        entry = (0.25 + 1.5 * rng.random()) * np.exp(2j * np.pi * rng.random())
        diffs[q - 1][i, j] = entry
    c = BasedComplex(tuple(ranks), tuple(diffs), check_ring=False)
    for q in range(top + 1):
        n = ranks[q]
        if n < 2:
            continue
        G = np.eye(n, dtype=complex)
        for i in range(n):
            for j in range(i + 1, n):
                G[i, j] = (rng.random() - 0.5) + 1j * (rng.random() - 0.5)
        c = _change_basis(c, q, G)
    return c
