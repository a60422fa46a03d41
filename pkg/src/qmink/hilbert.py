"""Sectors, quantum-number ranges, basis enumeration and the (t, r) lattice.

States are labeled |j, m, n, M> with j the angular momentum, m its third
component, and (n, M) indexing the eigenvalues of the time operator and the
radius-squared operator.  Three sector families exist:

* space-like  (invariant length s^2 = -(l0 q^M)^2):  n, M integer, j >= 0
* time-like   (s^2 = +(t0 q^M)^2, forward/backward): n >= 0, 0 <= j <= n
* light-like  (s^2 = 0): n integer, j >= 0, no M quantum number

Truncation windows cut finite blocks out of these lattices; the interior
machinery identifies the states far enough from the cut that operator
products of a given reach are uncorrupted.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .qnum import DeformationParams, bracket, curly


class SectorKind(Enum):
    SPACE = "space"
    TIME_FORWARD = "time+"
    TIME_BACKWARD = "time-"
    LIGHT = "light"

    @property
    def is_time(self) -> bool:
        return self in (SectorKind.TIME_FORWARD, SectorKind.TIME_BACKWARD)


SECTOR_BY_NAME = {k.value: k for k in SectorKind}


@dataclass(frozen=True)
class Sector:
    """One irreducible-family choice: kind plus the scale inside [1, q).

    ``scale`` is l0 (space-like), |t0| (time-like) or tau0 (light-like);
    the time-like sign lives in the kind.
    """

    kind: SectorKind
    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError(f"sector scale must be positive, got {self.scale}")

    @property
    def sign(self) -> int:
        return -1 if self.kind is SectorKind.TIME_BACKWARD else +1

    @property
    def signed_scale(self) -> float:
        return self.sign * self.scale

    def check_scale(self, p: DeformationParams):
        """Scales for massive sectors label inequivalent families in [1, q)."""
        if self.kind is SectorKind.LIGHT:
            return
        if not (1.0 <= self.scale < p.q):
            raise ValueError(
                f"sector scale must lie in [1, q) = [1, {p.q}), got {self.scale}"
            )


@dataclass(frozen=True, order=True)
class BasisLabel:
    j: int
    m: int
    n: int
    M: int = 0

    def shifted(self, dj=0, dm=0, dn=0, dM=0) -> "BasisLabel":
        return BasisLabel(self.j + dj, self.m + dm, self.n + dn, self.M + dM)


@dataclass(frozen=True)
class TruncationWindow:
    """Finite block of the quantum-number lattice, plus a base interior margin."""

    j_max: int
    n_lo: int
    n_hi: int
    M_lo: int = 0
    M_hi: int = 0
    margin: int = 0

    def __post_init__(self):
        if self.j_max < 0 or self.n_lo > self.n_hi or self.M_lo > self.M_hi:
            raise ValueError(f"empty truncation window {self}")
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")

    def contains(self, j: int, n: int, M: int) -> bool:
        return (
            0 <= j <= self.j_max
            and self.n_lo <= n <= self.n_hi
            and self.M_lo <= M <= self.M_hi
        )


def default_window(kind: SectorKind, margin: int = 0) -> TruncationWindow:
    """Desk-scale defaults: every relation check finishes in seconds."""
    if kind is SectorKind.SPACE:
        return TruncationWindow(5, -8, 8, -4, 4, margin)
    if kind.is_time:
        return TruncationWindow(5, 0, 12, -4, 4, margin)
    return TruncationWindow(5, -8, 8, 0, 0, margin)


def sector_valid(kind: SectorKind, j: int, m: int, n: int, M: int) -> bool:
    """Is |j,m,n,M> a state of the (untruncated) sector lattice?"""
    if j < 0 or abs(m) > j:
        return False
    if kind.is_time:
        return 0 <= j <= n
    if kind is SectorKind.LIGHT:
        return M == 0
    return True


class BasisMap:
    """Deterministically ordered bijection between labels and dense indices."""

    def __init__(self, sector: Sector, window: TruncationWindow,
                 labels: list[BasisLabel]):
        self.sector = sector
        self.window = window
        self.labels = tuple(labels)
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self._interior_cache: dict[tuple, np.ndarray] = {}

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def index_of(self, label: BasisLabel) -> int:
        return self.index[label]

    def get(self, label: BasisLabel, default=None):
        return self.index.get(label, default)

    def valid(self, j, m, n, M) -> bool:
        return sector_valid(self.sector.kind, j, m, n, M)

    def in_window(self, j, n, M) -> bool:
        return self.window.contains(j, n, M)

    def sites(self):
        """Distinct (n, M) pairs present in the basis, sorted."""
        return sorted({(lab.n, lab.M) for lab in self.labels})

    def interior_indices(self, budget: tuple[int, int, int, int]) -> np.ndarray:
        """Indices whose labels cannot reach a valid out-of-window state.

        ``budget`` bounds the per-quantum-number displacement (|dj|, |dm|,
        |dn|, |dM|) an operator expression can produce, including the
        intermediate states of products.  Shifts that leave the sector
        lattice itself are harmless (those matrix elements vanish exactly);
        only shifts landing on valid states outside the window disqualify a
        label.  Enlarging any budget component can only shrink the set.
        """
        key = tuple(int(b) for b in budget)
        cached = self._interior_cache.get(key)
        if cached is not None:
            return cached
        bj, bm, bn, bM = key
        w = self.window
        kind = self.sector.kind
        keep = []
        for i, lab in enumerate(self.labels):
            if bM and not (w.M_lo + bM <= lab.M <= w.M_hi - bM):
                continue
            if kind.is_time:
                if lab.n + bn > w.n_hi:
                    continue
                # below: only already-valid n (>= 0) can fall out of the window
                if bn and lab.n >= 1 and max(lab.n - bn, 0) < w.n_lo:
                    continue
                if bj and lab.j + bj > w.j_max and lab.n + bn >= w.j_max + 1:
                    continue
            else:
                if bn and not (w.n_lo + bn <= lab.n <= w.n_hi - bn):
                    continue
                if bj and lab.j + bj > w.j_max:
                    continue
            keep.append(i)
        out = np.asarray(keep, dtype=np.int64)
        self._interior_cache[key] = out
        return out


def enumerate_basis(sector: Sector, window: TruncationWindow) -> BasisMap:
    """All sector-valid labels inside the window, ordered by (M, n, j, m)."""
    labels = []
    for M in range(window.M_lo, window.M_hi + 1):
        if sector.kind is SectorKind.LIGHT and M != 0:
            continue
        for n in range(window.n_lo, window.n_hi + 1):
            if sector.kind.is_time and n < 0:
                continue
            jtop = min(window.j_max, n) if sector.kind.is_time else window.j_max
            for j in range(0, jtop + 1):
                for m in range(-j, j + 1):
                    labels.append(BasisLabel(j, m, n, M))
    if not labels:
        raise ValueError(f"window {window} contains no states of sector {sector}")
    return BasisMap(sector, window, labels)


# ---------------------------------------------------------------------------
# spectra


def x0_eigenvalue(p: DeformationParams, sector: Sector, n: int, M: int) -> float:
    """Time-operator eigenvalue t at lattice site (n, M)."""
    k = sector.kind
    if k is SectorKind.SPACE:
        return sector.scale * p.qpow(M) * p.lam * bracket(n, p) / bracket(2, p)
    if k.is_time:
        return sector.signed_scale * p.qpow(M) * curly(n + 1, p) / bracket(2, p)
    return sector.scale * p.qpow(n)


def xcircx_eigenvalue(p: DeformationParams, sector: Sector, n: int, M: int) -> float:
    """Radius-squared eigenvalue r^2 at lattice site (n, M)."""
    k = sector.kind
    if k is SectorKind.SPACE:
        pref = (sector.scale * p.qpow(M) / bracket(2, p)) ** 2
        return pref * curly(n + 1, p) * curly(n - 1, p)
    if k.is_time:
        pref = (sector.scale * p.qpow(M) * p.lam / bracket(2, p)) ** 2
        return pref * bracket(n + 2, p) * bracket(n, p)
    return (sector.scale * p.qpow(n)) ** 2


def invariant_s2(p: DeformationParams, sector: Sector, M: int) -> float:
    """s^2 = t^2 - r^2: positive time-like, negative space-like, zero light-like."""
    k = sector.kind
    if k is SectorKind.SPACE:
        return -((sector.scale * p.qpow(M)) ** 2)
    if k.is_time:
        return (sector.scale * p.qpow(M)) ** 2
    return 0.0


@dataclass(frozen=True)
class SpectrumPoint:
    sector: SectorKind
    n: int
    M: int
    t: float
    r: float


def spectrum_points(p: DeformationParams, sector: Sector,
                    n_range: tuple[int, int],
                    M_range: tuple[int, int] = (0, 0)) -> list[SpectrumPoint]:
    """Admissible (t, r) values for the requested block of lattice sites."""
    n_lo, n_hi = n_range
    M_lo, M_hi = M_range
    if sector.kind.is_time and n_lo < 0:
        raise ValueError("time-like sectors have n >= 0")
    if sector.kind is SectorKind.LIGHT:
        M_lo = M_hi = 0
    pts = []
    for M in range(M_lo, M_hi + 1):
        for n in range(n_lo, n_hi + 1):
            t = x0_eigenvalue(p, sector, n, M)
            r2 = xcircx_eigenvalue(p, sector, n, M)
            pts.append(SpectrumPoint(sector.kind, n, M, t, math.sqrt(max(r2, 0.0))))
    return pts


def check_spectral_condition(t: float, t_prime: float, r_prime: float,
                             s2: float, p: DeformationParams) -> float:
    """Relative residual of the adjacency condition linking t to t'.

    Two time eigenvalues can be connected by the n-shifting generators only
    if the determinant of the homogeneous system for the U and X o R matrix
    elements vanishes:

        (t - (2/[2]) t')(t - ({2}/[2]) t') = (lam/[2])^2 r'^2

    (the first bracket carries 2/[2]: expanding reproduces the quadratic
    with root sum [2] t' and root product t'^2 + (lam/[2])^2 s^2, whose
    solutions are exactly the neighbouring lattice values).  Returns
    |lhs - rhs| / (1 + t'^2 + |s^2|); zero to rounding for spectrally
    adjacent pairs, with r'^2 = t'^2 - s^2 on consistent inputs.
    """
    two = bracket(2, p)
    r2 = r_prime * r_prime
    expr = (t - 2.0 / two * t_prime) * (t - curly(2, p) / two * t_prime) \
        - (p.lam / two) ** 2 * r2
    return abs(expr) / (1.0 + t_prime * t_prime + abs(s2))
