"""Generators of the deformed Minkowski algebra as sparse matrices.

Every generator is built from its reduced-matrix-element table on a truncated
basis.  Vector operators (X, R, S, P) share one assembly routine that attaches
the m-dependent ladder factors to the reduced elements; scalar generators
(X0, X o X, U, P0, the scaling operator) are written down directly.

Phase conventions, fixed once:
  * <j+1||X-||j> is real and nonnegative (positive square root of -rho),
  * the j=0 diagonal reduced element vanishes,
  * the n-chain elements of U are the positive constant family with
    |<0,0,n|U|0,0,n+1>| = 1/[2],
  * light-like scaling phases default to zero but are configurable.

Rotation generators (L, W, T, tau) are *derived*: they are assembled from
matrix products of U, R, S, so their entries near the truncation boundary are
corrupted by missing intermediate states.  Builders therefore restrict them to
the reliable interior and record a `halo`, the margin they consumed; relation
checks add halos into their interior budgets.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .qnum import DeformationParams, bracket, curly
from .hilbert import (
    BasisLabel,
    BasisMap,
    Sector,
    SectorKind,
    TruncationWindow,
    default_window,
    enumerate_basis,
    x0_eigenvalue,
    xcircx_eigenvalue,
)
from . import tensors

COMPONENTS3 = ("+", "-", "3")


class ConstructionError(RuntimeError):
    """An operator build produced something structurally impossible."""


class NoRepresentationError(RuntimeError):
    """Requested operators admit no matrix realization on this sector."""


# ---------------------------------------------------------------------------
# sparse operator wrapper


@dataclass(frozen=True)
class SparseOperator:
    """Named immutable sparse complex matrix over a basis.

    ``shifts`` is the set of (dj, dm, dn, dM) displacements the operator
    realizes; ``halo`` is the per-quantum-number window margin consumed by the
    construction (nonzero only for operators assembled from matrix products).
    """

    name: str
    basis: BasisMap
    mat: sp.csr_matrix
    shifts: frozenset
    halo: tuple = (0, 0, 0, 0)

    @property
    def dim(self) -> int:
        return self.basis.size

    @property
    def shift_bound(self) -> tuple:
        if not self.shifts:
            return (0, 0, 0, 0)
        return tuple(max(abs(s[k]) for s in self.shifts) for k in range(4))

    @property
    def reach(self) -> tuple:
        """shift bound + halo, the window margin a single factor needs."""
        return tuple(b + h for b, h in zip(self.shift_bound, self.halo))

    def entries(self):
        """Iterate (row label, col label, value) over the nonzeros."""
        coo = self.mat.tocoo()
        for r, c, v in zip(coo.row, coo.col, coo.data):
            yield self.basis.labels[r], self.basis.labels[c], v


def _csr(entries, dim) -> sp.csr_matrix:
    if not entries:
        return sp.csr_matrix((dim, dim), dtype=complex)
    rows, cols, vals = zip(*entries)
    m = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=complex)
    return m.tocsr()


def adjoint(op: SparseOperator) -> SparseOperator:
    """Conjugate transpose; realizes bar-conjugation in the orthonormal basis."""
    mat = op.mat.conjugate().transpose().tocsr()
    shifts = frozenset(tuple(-x for x in s) for s in op.shifts)
    return SparseOperator(f"adj({op.name})", op.basis, mat, shifts, op.halo)


def prune(mat: sp.csr_matrix, rel_tol: float = 1e-12) -> sp.csr_matrix:
    """Drop entries below rel_tol times the largest magnitude."""
    m = mat.tocsr().copy()
    if m.nnz == 0:
        return m
    cut = rel_tol * np.abs(m.data).max()
    m.data[np.abs(m.data) <= cut] = 0.0
    m.eliminate_zeros()
    return m


def restrict(mat: sp.csr_matrix, keep: np.ndarray, dim: int) -> sp.csr_matrix:
    """Zero all rows and columns outside ``keep`` (size preserved)."""
    mask = np.zeros(dim, dtype=bool)
    mask[keep] = True
    coo = mat.tocoo()
    sel = mask[coo.row] & mask[coo.col]
    return sp.coo_matrix(
        (coo.data[sel], (coo.row[sel], coo.col[sel])), shape=(dim, dim), dtype=complex
    ).tocsr()


def audit_shifts(op: SparseOperator) -> list:
    """Nonzero entries whose label displacement is outside the declared set."""
    bad = []
    for rl, cl, v in op.entries():
        d = (rl.j - cl.j, rl.m - cl.m, rl.n - cl.n, rl.M - cl.M)
        if d not in op.shifts:
            bad.append((rl, cl, v, d))
    return bad


def op_circ(avec: dict, bvec: dict, p: DeformationParams,
            name: str = "circ") -> SparseOperator:
    """Noncommutative invariant product g_AB A^A B^B, A-then-B factor order."""
    a, b = avec, bvec
    basis = a["+"].basis
    mat = (
        a["3"].mat @ b["3"].mat
        - p.q * (a["+"].mat @ b["-"].mat)
        - (1.0 / p.q) * (a["-"].mat @ b["+"].mat)
    )
    shifts = frozenset(
        tuple(x + y for x, y in zip(s, t))
        for A in COMPONENTS3
        for s in a[A].shifts
        for t in b[_conj_component(A)].shifts
    )
    halo = tuple(
        max(a[A].halo[k] + b[A].halo[k] + b[A].shift_bound[k] for A in COMPONENTS3)
        for k in range(4)
    )
    return SparseOperator(name, basis, mat.tocsr(), shifts, halo)


def _conj_component(A: str) -> str:
    return {"+": "-", "-": "+", "3": "3"}[A]


# ---------------------------------------------------------------------------
# rho and the reduced X table


def rho_site(p: DeformationParams, sector: Sector, n: int, M: int, jp1: int) -> float:
    """Closed-form rho at lattice site (n, M) for target level j+1 = jp1.

    rho is the signed product of the two off-diagonal reduced X- elements
    between levels j and j+1; it is nonpositive on admissible states and its
    zeros truncate the allowed j range (time-like sectors).
    """
    if jp1 < 1:
        raise ValueError("rho is defined for target level >= 1")
    j = jp1 - 1
    q, lam = p.q, p.lam
    two = bracket(2, p)
    cj = curly(jp1, p) ** 2
    k = sector.kind
    if k is SectorKind.SPACE:
        l2 = (sector.scale * p.qpow(M)) ** 2
        return -l2 * curly(n - j - 1, p) * curly(n + j + 1, p) / (two * q * q * cj)
    if k.is_time:
        s2 = (sector.scale * p.qpow(M)) ** 2
        return -s2 * lam * lam * bracket(n - j, p) * bracket(n + j + 2, p) / (
            two * q * q * cj
        )
    tau2 = sector.scale**2
    return -two * tau2 * p.qpow(2 * n) / (q * q * cj)


def rho_from_rt(p: DeformationParams, r2: float, t: float, jp1: int) -> float:
    """rho(j+1) written in terms of the site invariants r^2 and t."""
    j = jp1 - 1
    q = p.q
    val = -r2 + bracket(j, p) * bracket(j + 2, p) * p.lam**2 * t * t / curly(jp1, p) ** 2
    return val / (q * q * bracket(2, p))


def rho_partial_sum(p: DeformationParams, r2: float, t: float, jp1: int) -> float:
    """rho(j+1) via the telescoped recursion: rho(1) plus a partial sum."""
    j = jp1 - 1
    q = p.q
    rho1 = -r2 / (q * q * bracket(2, p))
    acc = sum(
        bracket(2 * l + 1, p) / (curly(l, p) ** 2 * curly(l + 1, p) ** 2)
        for l in range(1, j + 1)
    )
    return rho1 + p.lam**2 * bracket(2, p) * t * t * acc / (q * q)


def xminus_diag_reduced(p: DeformationParams, t: float, j: int) -> float:
    """<j||X-||j> for j >= 1; proportional to the time eigenvalue t."""
    if j < 1:
        return 0.0
    return (
        -p.lam / p.q * math.sqrt(bracket(2, p))
        * bracket(j, p) * bracket(j + 1, p)
        / (bracket(2 * j, p) * bracket(2 * j + 2, p)) * t
    )


@dataclass
class ReducedElementTable:
    """Reduced matrix elements <j', n', M' || O- || j, n, M> of a vector operator."""

    op_name: str
    sector: Sector
    data: dict = field(default_factory=dict)

    def get(self, jp, np_, Mp, j, n, M) -> complex:
        return self.data.get((jp, np_, Mp, j, n, M), 0.0)

    def put(self, jp, np_, Mp, j, n, M, value):
        if value != 0.0:
            self.data[(jp, np_, Mp, j, n, M)] = value

    def items(self):
        return self.data.items()


def _site_ok(basis: BasisMap, j: int, n: int, M: int) -> bool:
    return basis.valid(j, 0, n, M) and basis.in_window(j, n, M)


def reduced_x_table(p: DeformationParams, sector: Sector,
                    basis: BasisMap) -> ReducedElementTable:
    """Reduced X- elements from rho: diagonal from the solved recursion,
    off-diagonal from the square root of -rho.

    The off-diagonal square root is real; its overall sign is the gauge in
    which the closed R/S tables are written, which on the backward cone means
    the sign of t0 multiplies the up-link (so both X routes and the
    t0-independent R/S tables share one convention).
    """
    tab = ReducedElementTable("X-", sector)
    jmax = basis.window.j_max
    sgn = sector.sign if sector.kind.is_time else 1
    for n, M in basis.sites():
        t = x0_eigenvalue(p, sector, n, M)
        jtop = min(jmax, n) if sector.kind.is_time else jmax
        for j in range(jtop + 1):
            if j >= 1:
                tab.put(j, n, M, j, n, M, xminus_diag_reduced(p, t, j))
            if _site_ok(basis, j + 1, n, M):
                mr = max(-rho_site(p, sector, n, M, j + 1), 0.0)
                v = sgn * math.sqrt(mr / (bracket(2 * j + 1, p) * bracket(2 * j + 3, p)))
                tab.put(j + 1, n, M, j, n, M, p.qpow(j + 1) * v)
                tab.put(j, n, M, j + 1, n, M, -p.qpow(-(j + 1)) * v)
    return tab


def reduced_x_table_closed(p: DeformationParams, sector: Sector,
                           basis: BasisMap) -> ReducedElementTable:
    """Reduced X- elements from the per-sector closed tables (signed t0)."""
    if sector.kind is SectorKind.LIGHT:
        raise ValueError("no closed table for the light-like sector")
    tab = ReducedElementTable("X-", sector)
    q, lam = p.q, p.lam
    br = lambda a: bracket(a, p)
    cu = lambda a: curly(a, p)
    jmax = basis.window.j_max
    for n, M in basis.sites():
        scale = sector.signed_scale if sector.kind.is_time else sector.scale
        jtop = min(jmax, n) if sector.kind.is_time else jmax
        for j in range(jtop + 1):
            if j >= 1:
                if sector.kind is SectorKind.SPACE:
                    d = -(1 / q) * sector.scale * p.qpow(M) * br(n) * lam**2 \
                        / (math.sqrt(br(2)) * cu(j) * cu(j + 1))
                else:
                    d = -(1 / q) * lam * sector.signed_scale * p.qpow(M) * cu(n + 1) \
                        / (math.sqrt(br(2)) * cu(j) * cu(j + 1))
                tab.put(j, n, M, j, n, M, d)
            if _site_ok(basis, j + 1, n, M):
                den = cu(j + 1) * math.sqrt(br(2) * br(2 * j + 1) * br(2 * j + 3))
                if sector.kind is SectorKind.SPACE:
                    rad = math.sqrt(max(cu(n + j + 1) * cu(n - j - 1), 0.0))
                    up = scale * p.qpow(M + j) * rad / den
                    dn = -scale * p.qpow(M - j - 2) * rad / den
                else:
                    rad = math.sqrt(max(br(n - j) * br(n + j + 2), 0.0))
                    up = scale * p.qpow(M + j) * lam * rad / den
                    dn = -scale * p.qpow(M - j - 2) * lam * rad / den
                tab.put(j + 1, n, M, j, n, M, up)
                tab.put(j, n, M, j + 1, n, M, dn)
    return tab


# ---------------------------------------------------------------------------
# reduced R and S tables


def reduced_r_table(p: DeformationParams, sector: Sector,
                    basis: BasisMap) -> ReducedElementTable:
    """Reduced R- elements: closed tables for the massive sectors, the
    iterated level recursion seeded by the explicit (1,0)/(0,1) elements for
    the light-like sector."""
    if sector.kind is SectorKind.LIGHT:
        return _reduced_r_light(p, sector, basis)
    return _reduced_rs_closed(p, sector, basis, which="R")


def reduced_s_table(p: DeformationParams, sector: Sector,
                    basis: BasisMap,
                    r_table: ReducedElementTable | None = None) -> ReducedElementTable:
    """Reduced S- elements.  Massive sectors use the closed tables; the
    light-like table is generated from R via the conjugation pairing
    (adjoint of R^A equals -g_AB S^B at the reduced level)."""
    if sector.kind is SectorKind.LIGHT:
        if r_table is None:
            r_table = reduced_r_table(p, sector, basis)
        return _s_from_r_conjugation(p, r_table)
    return _reduced_rs_closed(p, sector, basis, which="S")


def _reduced_rs_closed(p, sector, basis, which):
    tab = ReducedElementTable(which + "-", sector)
    q, lam = p.q, p.lam
    br = lambda a: bracket(a, p)
    cu = lambda a: curly(a, p)
    time = sector.kind.is_time
    jmax = basis.window.j_max

    def rad_pair(a, b, n, npp):
        if time:
            num = br(a + 1) * br(b + 1)
            den = br(n + 1) * br(npp + 1)
        else:
            num = cu(a) * cu(b)
            den = cu(n) * cu(npp)
        return math.sqrt(max(num, 0.0) / den)

    for n, M in basis.sites():
        for d in (+1, -1):
            npp = n + d
            jtop = min(jmax, max(n, npp)) if time else jmax
            for j in range(jtop + 1):
                den_off = cu(j + 1) * br(2) ** 1.5 * lam * math.sqrt(
                    br(2 * j + 1) * br(2 * j + 3)
                )
                # (j+1 <- j)
                if _site_ok(basis, j, n, M) and _site_ok(basis, j + 1, npp, M):
                    r = rad_pair(d * (j + 1) + npp, d * j + npp, n, npp)
                    if which == "R":
                        val = d * p.qpow(2 * j - 1) / den_off * r
                    else:
                        val = d * p.qpow(-3) / den_off * r
                    tab.put(j + 1, npp, M, j, n, M, val)
                # (j <- j) for j >= 1
                if j >= 1 and _site_ok(basis, j, n, M) and _site_ok(basis, j, npp, M):
                    r = rad_pair(d * j + npp, n - d * j, n, npp)
                    val = p.qpow(-3) / (cu(j + 1) * cu(j) * br(2) ** 1.5) * r
                    if which == "S":
                        val = -val
                    tab.put(j, npp, M, j, n, M, val)
                # (j <- j+1)
                if _site_ok(basis, j + 1, n, M) and _site_ok(basis, j, npp, M):
                    r = rad_pair(npp - d * (j + 1), n - d * (j + 1), n, npp)
                    if which == "R":
                        val = -d * p.qpow(-2 * j - 5) / den_off * r
                    else:
                        val = -d * p.qpow(-3) / den_off * r
                    tab.put(j, npp, M, j + 1, n, M, val)
    return tab


def _light_seed(p: DeformationParams, kind: str, d: int) -> float:
    """Explicit light-like (1<-0) and (0<-1) reduced R- elements, d = n'-n."""
    q = p.q
    base = 1.0 / (bracket(2, p) ** 2.5 * math.sqrt(bracket(3, p)) * p.lam)
    if kind == "up":  # <1, n+d || R- || 0, n>
        return base if d == +1 else -base / q**2
    # <0, n+d || R- || 1, n>
    return -base / q**6 if d == +1 else base / q**4


def _reduced_r_light(p, sector, basis):
    tab = ReducedElementTable("R-", sector)
    br = lambda a: bracket(a, p)
    cu = lambda a: curly(a, p)
    jmax = basis.window.j_max

    def rho_prod(n, k_lo, k_hi):
        out = 1.0
        for k in range(k_lo, k_hi + 1):
            out *= rho_site(p, sector, n, 0, k)
        return out

    for n, M in basis.sites():
        t_n = x0_eigenvalue(p, sector, n, M)
        r_n = math.sqrt(xcircx_eigenvalue(p, sector, n, M))
        for d in (+1, -1):
            npp = n + d
            if not _site_ok(basis, 0, npp, M):
                continue
            t_np = x0_eigenvalue(p, sector, npp, M)
            for j in range(jmax + 1):
                # (j+1 <- j): ratio of rho products between the two sites
                if _site_ok(basis, j + 1, npp, M):
                    ratio = math.sqrt(
                        br(3) / (br(2 * j + 1) * br(2 * j + 3))
                    ) * p.qpow(2 * j)
                    if j >= 1:
                        ratio *= math.sqrt(
                            rho_prod(npp, 2, j + 1) / rho_prod(n, 1, j)
                        )
                    tab.put(j + 1, npp, M, j, n, M, _light_seed(p, "up", d) * ratio)
                # (j <- j+1)
                if _site_ok(basis, j + 1, n, M) and _site_ok(basis, j, npp, M):
                    ratio = math.sqrt(
                        br(3) / (br(2 * j + 1) * br(2 * j + 3))
                    ) * p.qpow(-2 * j)
                    if j >= 1:
                        ratio *= math.sqrt(
                            rho_prod(n, 2, j + 1) / rho_prod(npp, 1, j)
                        )
                    tab.put(j, npp, M, j + 1, n, M, _light_seed(p, "down", d) * ratio)
                # (j <- j) for j >= 1
                if j >= 1 and _site_ok(basis, j, n, M) and _site_ok(basis, j, npp, M):
                    ratio = 1.0
                    if j >= 2:
                        ratio = math.sqrt(rho_prod(npp, 2, j) / rho_prod(n, 2, j))
                    val = (
                        _light_seed(p, "up", d)
                        * (1.0 / r_n)
                        * (t_np * cu(j) - t_n * cu(j + 1)) / (cu(j) * cu(j + 1))
                        * br(2) * math.sqrt(br(3)) / p.q**2
                        * ratio
                    )
                    tab.put(j, npp, M, j, n, M, val)
    return tab


def _s_from_r_conjugation(p, r_table):
    """Reduced S- from reduced R-:  S(j+1<-j) = q^{2j+2} R(j<-j+1) with sites
    swapped, S(j<-j) = -R(j<-j) with sites swapped, and the mirror of both."""
    s = ReducedElementTable("S-", r_table.sector)
    for (jp, npp, Mp, j, n, M), val in r_table.items():
        if jp == j + 1:
            s.put(j, n, M, jp, npp, Mp, val * p.qpow(-2 * j - 2))
        elif jp == j - 1:
            s.put(j, n, M, jp, npp, Mp, val * p.qpow(2 * (j - 1) + 2))
        else:
            s.put(j, n, M, j, npp, Mp, -val)
    return s


def reduced_r_table_recursive(p: DeformationParams, sector: Sector,
                              basis: BasisMap, j_cap: int) -> ReducedElementTable:
    """Level-recursion route for massive sectors, used as a cross-check.

    Seeds are the (1<-0)/(0<-1) entries of the closed table; only levels whose
    rho factors are nonzero are generated (the time-like rho vanishes at the
    lattice edge, where the closed table is authoritative).
    """
    closed = _reduced_rs_closed(p, sector, basis, which="R")
    tab = ReducedElementTable("R-", sector)
    br = lambda a: bracket(a, p)
    cu = lambda a: curly(a, p)
    # the level-diagonal route carries the same gauge sign as the X up-links
    sgn = sector.sign if sector.kind.is_time else 1

    def rho_prod(n, M, k_lo, k_hi):
        out = 1.0
        for k in range(k_lo, k_hi + 1):
            out *= rho_site(p, sector, n, M, k)
        return out

    for n, M in basis.sites():
        t_n = x0_eigenvalue(p, sector, n, M)
        r_n = math.sqrt(xcircx_eigenvalue(p, sector, n, M))
        for d in (+1, -1):
            npp = n + d
            if not _site_ok(basis, 0, npp, M):
                continue
            t_np = x0_eigenvalue(p, sector, npp, M)
            seed_up = closed.get(1, npp, M, 0, n, M)
            seed_dn = closed.get(0, npp, M, 1, n, M)
            for j in range(1, j_cap + 1):
                if _site_ok(basis, j + 1, npp, M) and _site_ok(basis, j, n, M):
                    num = rho_prod(npp, M, 2, j + 1)
                    den = rho_prod(n, M, 1, j)
                    if den != 0.0 and num / den >= 0:
                        ratio = p.qpow(2 * j) * math.sqrt(
                            br(3) / (br(2 * j + 1) * br(2 * j + 3))
                        ) * math.sqrt(num / den)
                        tab.put(j + 1, npp, M, j, n, M, seed_up * ratio)
                if _site_ok(basis, j, npp, M) and _site_ok(basis, j, n, M) and r_n > 0:
                    num = rho_prod(npp, M, 2, j)
                    den = rho_prod(n, M, 2, j)
                    if den != 0.0 and num / den >= 0:
                        val = (
                            sgn * seed_up / r_n
                            * (t_np * cu(j) - t_n * cu(j + 1)) / (cu(j) * cu(j + 1))
                            * br(2) * math.sqrt(br(3)) / p.q**2
                            * math.sqrt(num / den)
                        )
                        tab.put(j, npp, M, j, n, M, val)
                if _site_ok(basis, j + 1, n, M) and _site_ok(basis, j, npp, M):
                    num = rho_prod(n, M, 2, j + 1)
                    den = rho_prod(npp, M, 1, j)
                    if den != 0.0 and num / den >= 0:
                        ratio = p.qpow(-2 * j) * math.sqrt(
                            br(3) / (br(2 * j + 1) * br(2 * j + 3))
                        ) * math.sqrt(num / den)
                        tab.put(j, npp, M, j + 1, n, M, seed_dn * ratio)
    return tab


# ---------------------------------------------------------------------------
# reduced P table and P0


def reduced_p_table(p: DeformationParams, sector: Sector,
                    basis: BasisMap) -> ReducedElementTable:
    """Reduced P- elements; complex, shifting n and M simultaneously."""
    if sector.kind is SectorKind.LIGHT:
        raise NoRepresentationError(
            "momentum operators admit no matrix realization on the light-like "
            "sector alone"
        )
    tab = ReducedElementTable("P-", sector)
    q, lam = p.q, p.lam
    br = lambda a: bracket(a, p)
    cu = lambda a: curly(a, p)
    time = sector.kind.is_time
    jmax = basis.window.j_max
    ihalf = 0.5j

    for n, M in basis.sites():
        scale = (sector.signed_scale if time else sector.scale) * p.qpow(M)
        for dM in (+1, -1):
            Mp = M + dM
            for dn in (+1, -1):
                npp = n + dn
                jtop = min(jmax, max(n, npp)) if time else jmax
                for j in range(jtop + 1):
                    pref_off = (1.0 / (cu(j + 1) * lam * scale)) * math.sqrt(
                        br(2) / (br(2 * j + 1) * br(2 * j + 3))
                    )
                    # (j+1, n+dn, M+dM  <-  j, n, M)
                    if _site_ok(basis, j, n, M) and _site_ok(basis, j + 1, npp, Mp):
                        if time:
                            if dn == +1:
                                coef = q ** (1 + 2 * j - n) if dM == 1 else q ** (3 + n)
                                sgn = +1.0
                                rad = br(n + j + 3) * br(n + j + 2) / (br(n + 2) * br(n + 1))
                            else:
                                coef = q ** (3 + 2 * j + n) if dM == 1 else q ** (1 - n)
                                sgn = -1.0
                                rad = br(n - j - 1) * br(n - j) / (br(n) * br(n + 1))
                        else:
                            if dn == +1:
                                coef = q ** (2 + 2 * j - n) if dM == 1 else -q ** (2 + n)
                                sgn = +1.0
                                rad = cu(n + j + 2) * cu(n + j + 1) / (cu(n) * cu(n + 1))
                            else:
                                coef = q ** (2 + 2 * j + n) if dM == 1 else -q ** (2 - n)
                                sgn = +1.0
                                rad = cu(n - j - 2) * cu(n - j - 1) / (cu(n) * cu(n - 1))
                        val = ihalf * sgn * coef * pref_off * math.sqrt(max(rad, 0.0))
                        tab.put(j + 1, npp, Mp, j, n, M, val)
                    # (j, n+dn, M+dM <- j, n, M), j >= 1.  The prefactor is
                    # sqrt([2])/(2 {j}{j+1} scale): the level-diagonal entries
                    # must carry [2]/lam relative to the lam/sqrt([2]) form or
                    # the quadratic momentum relations fail; fixed against the
                    # covariant exchange relation and hermiticity.
                    if j >= 1 and _site_ok(basis, j, n, M) and _site_ok(basis, j, npp, Mp):
                        pref_d = math.sqrt(br(2)) / (2.0 * cu(j) * cu(j + 1) * scale)
                        if time:
                            if dn == +1:
                                coef = q ** (-1 - n) if dM == 1 else -q ** (3 + n)
                                sgn = +1.0
                                rad = br(n + j + 2) * br(n - j + 1) / (br(n + 2) * br(n + 1))
                            else:
                                coef = q ** (1 + n) if dM == 1 else -q ** (1 - n)
                                sgn = +1.0
                                rad = br(n + j + 1) * br(n - j) / (br(n) * br(n + 1))
                        else:
                            if dn == +1:
                                coef = q ** (-n) if dM == 1 else q ** (2 + n)
                                sgn = +1.0
                                rad = cu(n + j + 1) * cu(n - j) / (cu(n) * cu(n + 1))
                            else:
                                coef = q**n if dM == 1 else q ** (2 - n)
                                sgn = -1.0
                                rad = cu(n - j - 1) * cu(n + j) / (cu(n) * cu(n - 1))
                        val = 1j * sgn * coef * pref_d * math.sqrt(max(rad, 0.0))
                        tab.put(j, npp, Mp, j, n, M, val)
                    # (j, n+dn, M+dM <- j+1, n, M)
                    if _site_ok(basis, j + 1, n, M) and _site_ok(basis, j, npp, Mp):
                        if time:
                            if dn == +1:
                                coef = q ** (-3 - 2 * j - n) if dM == 1 else q ** (3 + n)
                                sgn = -1.0
                                rad = br(n - j + 1) * br(n - j) / (br(n + 2) * br(n + 1))
                            else:
                                coef = q ** (-1 - 2 * j + n) if dM == 1 else q ** (1 - n)
                                sgn = +1.0
                                rad = br(n + j + 2) * br(n + j + 1) / (br(n) * br(n + 1))
                        else:
                            if dn == +1:
                                coef = q ** (-2 - 2 * j - n) if dM == 1 else -q ** (2 + n)
                                sgn = -1.0
                                rad = cu(n - j) * cu(n - j - 1) / (cu(n) * cu(n + 1))
                            else:
                                coef = q ** (-2 - 2 * j + n) if dM == 1 else -q ** (2 - n)
                                sgn = -1.0
                                rad = cu(n + j + 1) * cu(n + j) / (cu(n) * cu(n - 1))
                        val = ihalf * sgn * coef * pref_off * math.sqrt(max(rad, 0.0))
                        tab.put(j, npp, Mp, j + 1, n, M, val)
    return tab


def build_p0(p: DeformationParams, sector: Sector, basis: BasisMap) -> SparseOperator:
    """Time component of the momentum: diagonal in (j, m), shifts n and M."""
    if sector.kind is SectorKind.LIGHT:
        raise NoRepresentationError(
            "momentum operators admit no matrix realization on the light-like "
            "sector alone"
        )
    q, lam = p.q, p.lam
    br = lambda a: bracket(a, p)
    cu = lambda a: curly(a, p)
    time = sector.kind.is_time
    entries = []
    for i, lab in enumerate(basis.labels):
        j, m, n, M = lab.j, lab.m, lab.n, lab.M
        scale = (sector.signed_scale if time else sector.scale) * p.qpow(M)
        pref = 1.0 / (2.0 * lam * scale)
        for dM in (+1, -1):
            for dn in (+1, -1):
                tgt = lab.shifted(dn=dn, dM=dM)
                k = basis.get(tgt)
                if k is None or not basis.valid(tgt.j, tgt.m, tgt.n, tgt.M):
                    continue
                if time:
                    if dn == +1:
                        coef = q ** (-n) if dM == 1 else -q ** (4 + n)
                        sgn = -1.0
                        rad = br(n - j + 1) * br(n + j + 2) / (br(n + 1) * br(n + 2))
                    else:
                        coef = q ** (2 + n) if dM == 1 else -q ** (2 - n)
                        sgn = -1.0
                        rad = br(n - j) * br(n + j + 1) / (br(n) * br(n + 1))
                else:
                    if dn == +1:
                        coef = q ** (1 - n) if dM == 1 else q ** (3 + n)
                        sgn = -1.0
                        rad = cu(n - j) * cu(n + j + 1) / (cu(n) * cu(n + 1))
                    else:
                        coef = q ** (1 + n) if dM == 1 else q ** (3 - n)
                        sgn = +1.0
                        rad = cu(n - j - 1) * cu(n + j) / (cu(n) * cu(n - 1))
                val = 1j * sgn * coef * pref * math.sqrt(max(rad, 0.0))
                if val != 0.0:
                    entries.append((k, i, val))
    shifts = frozenset((0, 0, dn, dM) for dn in (1, -1) for dM in (1, -1))
    return SparseOperator("P0", basis, _csr(entries, basis.size), shifts)


# ---------------------------------------------------------------------------
# U and the scaling operator


def build_u(p: DeformationParams, sector: Sector, basis: BasisMap) -> SparseOperator:
    """Symmetric real n-chain operator tied to the boost Casimirs."""
    br = lambda a: bracket(a, p)
    cu = lambda a: curly(a, p)
    two = br(2)
    entries = []
    for i, lab in enumerate(basis.labels):
        j, m, n, M = lab.j, lab.m, lab.n, lab.M
        up = basis.get(lab.shifted(dn=+1))
        if up is None:
            continue
        if sector.kind is SectorKind.SPACE:
            val = math.sqrt(max(cu(n - j) * cu(n + j + 1), 0.0) / (cu(n) * cu(n + 1))) / two
        elif sector.kind.is_time:
            val = math.sqrt(
                max(br(n - j + 1) * br(n + j + 2), 0.0) / (br(n + 1) * br(n + 2))
            ) / two
        else:
            val = 1.0 / two
        if val != 0.0:
            entries.append((up, i, val))
            entries.append((i, up, val))
    shifts = frozenset({(0, 0, 1, 0), (0, 0, -1, 0)})
    return SparseOperator("U", basis, _csr(entries, basis.size), shifts)


def build_lambda(p: DeformationParams, sector: Sector, basis: BasisMap,
                 phases: dict | None = None,
                 inverse: bool = False) -> SparseOperator:
    """Square root of the scaling operator (or its inverse).

    Massive sectors: pure M-shift with entry q^2.  Light-like: n-shift with
    entry e^{i alpha_n} q^2; the phases alpha_n cannot be normalized away once
    the U chain is fixed positive, so they stay configurable (default 0).
    """
    q2 = p.q * p.q
    phases = phases or {}
    entries = []
    light = sector.kind is SectorKind.LIGHT
    for i, lab in enumerate(basis.labels):
        if light:
            step = -1 if inverse else +1
            tgt = basis.get(lab.shifted(dn=step))
            if tgt is None:
                continue
            alpha = phases.get(lab.n if step == 1 else lab.n - 1, 0.0)
            val = cmath.exp(1j * alpha) * q2 if not inverse \
                else cmath.exp(-1j * alpha) / q2
            entries.append((tgt, i, val))
        else:
            step = -1 if inverse else +1
            tgt = basis.get(lab.shifted(dM=step))
            if tgt is None:
                continue
            entries.append((tgt, i, q2 if not inverse else 1.0 / q2))
    if light:
        shifts = frozenset({(0, 0, -1 if inverse else 1, 0)})
    else:
        shifts = frozenset({(0, 0, 0, -1 if inverse else 1)})
    name = "LamInv" if inverse else "Lam"
    return SparseOperator(name, basis, _csr(entries, basis.size), shifts)


# ---------------------------------------------------------------------------
# vector-operator assembly (the shared m-factor machinery)


def _ladder_factors(p: DeformationParams, dj: int, j: int, m: int):
    """(minus, plus, three) m-factors for a vector operator component.

    Returns the factor multiplying the reduced element for the component that
    lowers m (target m-1), raises m (target m+1), and keeps m, respectively.
    """
    q = p.q
    br = lambda a: bracket(a, p)
    s = lambda x: math.sqrt(max(x, 0.0))
    if dj == 0:
        minus = p.qpow(m) * s(br(j + m) * br(j - m + 1))
        plus = -p.qpow(m + 2) * s(br(j + m + 1) * br(j - m))
        three = (
            p.qpow(1.5) * math.sqrt(1 + q * q) / (q * q - 1.0)
            * (p.qpow(2 * m) - (p.qpow(2 * j + 1) + p.qpow(-2 * j - 1)) / (q + 1 / q))
        )
    elif dj == +1:
        minus = p.qpow(m) * s(br(j - m + 1) * br(j - m + 2))
        plus = p.qpow(m - 2 * j) * s(br(j + m + 1) * br(j + m + 2))
        three = p.qpow(m - j - 0.5) * math.sqrt(1 + q * q) * s(br(j - m + 1) * br(j + m + 1))
    elif dj == -1:
        minus = p.qpow(m) * s(br(j + m) * br(j + m - 1))
        plus = p.qpow(m + 2 * j + 2) * s(br(j - m) * br(j - m - 1))
        three = -p.qpow(m + j + 0.5) * math.sqrt(1 + q * q) * s(br(j - m) * br(j + m))
    else:
        raise ValueError(f"vector operators connect adjacent levels only, dj={dj}")
    return minus, plus, three


def assemble_vector_operator(p: DeformationParams, table: ReducedElementTable,
                             basis: BasisMap, prefix: str) -> dict:
    """Full matrix elements of a vector operator from its reduced table.

    Returns the component dict {"+": O+, "-": O-, "3": O3}.
    """
    ent = {"+": [], "-": [], "3": []}
    sig = {"+": set(), "-": set(), "3": set()}
    for (jp, npp, Mp, j, n, M), red in table.items():
        dj = jp - j
        dn, dM = npp - n, Mp - M
        for m in range(-j, j + 1):
            src = basis.get(BasisLabel(j, m, n, M))
            if src is None:
                continue
            minus, plus, three = _ladder_factors(p, dj, j, m)
            for comp, fac, dm in (("-", minus, -1), ("+", plus, +1), ("3", three, 0)):
                if fac == 0.0:
                    continue
                tl = BasisLabel(jp, m + dm, npp, Mp)
                if not basis.valid(tl.j, tl.m, tl.n, tl.M):
                    continue
                tgt = basis.get(tl)
                if tgt is None:
                    continue
                ent[comp].append((tgt, src, fac * red))
                sig[comp].add((dj, dm, dn, dM))
    out = {}
    for comp in COMPONENTS3:
        out[comp] = SparseOperator(
            prefix + comp, basis, _csr(ent[comp], basis.size), frozenset(sig[comp])
        )
    return out


def diag_x0_xcircx(p: DeformationParams, sector: Sector,
                   basis: BasisMap) -> tuple[SparseOperator, SparseOperator]:
    """Diagonal time operator and radius-squared operator."""
    t = np.array([x0_eigenvalue(p, sector, lab.n, lab.M) for lab in basis.labels])
    r2 = np.array([xcircx_eigenvalue(p, sector, lab.n, lab.M) for lab in basis.labels])
    dshift = frozenset({(0, 0, 0, 0)})
    x0 = SparseOperator("X0", basis, sp.diags(t.astype(complex)).tocsr(), dshift)
    xx = SparseOperator("XcircX", basis, sp.diags(r2.astype(complex)).tocsr(), dshift)
    return x0, xx


# ---------------------------------------------------------------------------
# derived generators: boosts in Pauli form, rotations, the compact T algebra


def build_v(rvec: dict, svec: dict, p: DeformationParams) -> dict:
    """Boost components V^{ab} in the R/S (Pauli) parametrization."""
    basis = rvec["+"].basis
    eluu = tensors.epsilon3(p, "luu")
    q2 = p.q * p.q
    out = {}
    for i, A in enumerate(COMPONENTS3):
        out[(A, "0")] = _combine(f"V{A}0", basis, [(1.0, rvec[A]), (q2, svec[A])])
        out[("0", A)] = _combine(f"V0{A}", basis, [(-q2, rvec[A]), (-1.0, svec[A])])
    for ia, A in enumerate(COMPONENTS3):
        for ib, B in enumerate(COMPONENTS3):
            parts = []
            for ic, C in enumerate(COMPONENTS3):
                c = eluu[ic, ia, ib]
                if c != 0.0:
                    parts.append((c, rvec[C]))
                    parts.append((-c, svec[C]))
            out[(A, B)] = _combine(f"V{A}{B}", basis, parts)
    zero = SparseOperator(
        "V00", basis, sp.csr_matrix((basis.size, basis.size), dtype=complex),
        frozenset()
    )
    out[("0", "0")] = zero
    return out


def _combine(name, basis, weighted_ops):
    mat = sp.csr_matrix((basis.size, basis.size), dtype=complex)
    shifts = set()
    halo = (0, 0, 0, 0)
    for c, op in weighted_ops:
        mat = mat + c * op.mat
        shifts |= set(op.shifts)
        halo = tuple(max(h, g) for h, g in zip(halo, op.halo))
    return SparseOperator(name, basis, mat.tocsr(), frozenset(shifts), halo)


_COMPOSITE_HALO = (1, 0, 1, 0)


def build_l_w(p: DeformationParams, basis: BasisMap, rvec: dict, svec: dict,
              u: SparseOperator) -> tuple[dict, SparseOperator]:
    """Rotation generators L^A and the scalar W from U, R, S products.

    Both are assembled from operator products, so their entries one step from
    the j/n truncation boundary are unreliable; the returned operators are
    zeroed outside that interior and carry halo (1, 0, 1, 0).
    """
    q = p.q
    ellu = tensors.epsilon3(p, "llu")
    pref = (q * q + 1.0) / (q * q)
    keep = basis.interior_indices(_COMPOSITE_HALO)
    lvec = {}
    for ia, A in enumerate(COMPONENTS3):
        mat = u.mat @ svec[A].mat - u.mat @ rvec[A].mat
        for ib, B in enumerate(COMPONENTS3):
            for ic, C in enumerate(COMPONENTS3):
                c = ellu[ic, ib, ia]
                if c != 0.0:
                    mat = mat + (q**4 - 1.0) * c * (rvec[B].mat @ svec[C].mat)
        mat = prune(restrict(pref * mat, keep, basis.size))
        dm = {"+": 1, "-": -1, "3": 0}[A]
        lvec[A] = SparseOperator(
            "L" + A, basis, mat, frozenset({(0, dm, 0, 0)}), _COMPOSITE_HALO
        )
    rs = op_circ(rvec, svec, p, "RcircS")
    wmat = u.mat @ u.mat - q * q * (q**4 - 1.0) ** 2 * rs.mat
    wmat = prune(restrict(wmat, keep, basis.size))
    w = SparseOperator("W", basis, wmat, frozenset({(0, 0, 0, 0)}), _COMPOSITE_HALO)
    return lvec, w


def build_t(p: DeformationParams, basis: BasisMap, lvec: dict,
            w: SparseOperator) -> dict:
    """Compact-subalgebra generators T+, T-, tau3 and the quadratic Casimir.

    N = W + q^2 (1 - q^2) L3 must come out numerically diagonal and positive
    on the reliable interior; anything else signals an upstream table bug.
    """
    q, lam = p.q, p.lam
    keep = basis.interior_indices(_COMPOSITE_HALO)
    nmat = (w.mat + q * q * (1.0 - q * q) * lvec["3"].mat).tocsr()
    sub = nmat[keep][:, keep]
    diag_scale = float(np.abs(sub.diagonal()).max()) if keep.size else 0.0
    off = sub - sp.diags(sub.diagonal())
    off_max = float(np.abs(off.data).max()) if off.nnz else 0.0
    if off_max > 1e-10 * (1.0 + diag_scale):
        raise ConstructionError(
            f"tau^(-1/2) candidate is not diagonal on the interior "
            f"(max off-diagonal {off_max:.3e})"
        )
    d_full = np.real(nmat.diagonal()).copy()
    mask = np.zeros(basis.size, dtype=bool)
    mask[keep] = True
    if np.any(d_full[mask] <= 0.0):
        raise ConstructionError("tau^(-1/2) candidate has nonpositive interior entries")
    inv = np.zeros(basis.size)
    inv[mask] = 1.0 / d_full[mask]
    d = np.where(mask, d_full, 0.0)

    dshift = frozenset({(0, 0, 0, 0)})
    tauhalf = SparseOperator(
        "tauhalf", basis, sp.diags(inv.astype(complex)).tocsr(), dshift,
        _COMPOSITE_HALO,
    )
    tau3 = SparseOperator(
        "tau3", basis, sp.diags((inv * inv).astype(complex)).tocsr(), dshift,
        _COMPOSITE_HALO,
    )
    root = math.sqrt(1.0 + q * q)
    tp_mat = prune(q * q * root * (tauhalf.mat @ lvec["+"].mat))
    tm_mat = prune(-(q**3) * root * (tauhalf.mat @ lvec["-"].mat))
    tp = SparseOperator("T+", basis, tp_mat, frozenset({(0, 1, 0, 0)}), _COMPOSITE_HALO)
    tm = SparseOperator("T-", basis, tm_mat, frozenset({(0, -1, 0, 0)}), _COMPOSITE_HALO)
    # quadratic Casimir: q tau3^(-1/2) T- T+ + (q/lam^2) tau3^(-1/2)
    #                    + (1/(q lam^2)) (tau3^(1/2) - q^2 - 1).
    # The tau3^(-1/2) weight on the ladder product is required for the
    # Casimir to commute with T+- given the ladder relation; without it the
    # combination is not level-diagonal.
    ident = np.where(mask, 1.0, 0.0)
    t2_mat = (
        q * (sp.diags(d.astype(complex)) @ (tm.mat @ tp.mat))
        + (q / lam**2) * sp.diags(d.astype(complex))
        + (1.0 / (q * lam**2))
        * (sp.diags(inv.astype(complex)) - (q * q + 1.0) * sp.diags(ident.astype(complex)))
    )
    t2_mat = prune(restrict(t2_mat.tocsr(), keep, basis.size))
    t2 = SparseOperator("T2", basis, t2_mat, dshift, _COMPOSITE_HALO)
    return {"T+": tp, "T-": tm, "tau3": tau3, "tauhalf": tauhalf, "T2": t2}


# ---------------------------------------------------------------------------
# the full generator set


class OperatorSet(dict):
    """Dict of named SparseOperators plus the build context."""

    def __init__(self, p, sector, basis, ops):
        super().__init__(ops)
        self.p = p
        self.sector = sector
        self.basis = basis

    @property
    def has_momenta(self) -> bool:
        return "P0" in self

    def vector(self, prefix: str) -> dict:
        return {c: self[prefix + c] for c in COMPONENTS3}


def build_operators(p: DeformationParams, sector: Sector,
                    window: TruncationWindow | None = None,
                    phases: dict | None = None,
                    include_momenta: bool | None = None,
                    include_rotations: bool = True) -> OperatorSet:
    """Build every generator of the algebra on a truncated basis.

    ``include_momenta`` defaults to True on massive sectors and False on the
    light-like sector (where requesting them raises NoRepresentationError).
    """
    if window is None:
        window = default_window(sector.kind)
    sector.check_scale(p)
    basis = enumerate_basis(sector, window)
    light = sector.kind is SectorKind.LIGHT
    if include_momenta is None:
        include_momenta = not light

    ops = {}
    x0, xx = diag_x0_xcircx(p, sector, basis)
    ops["X0"], ops["XcircX"] = x0, xx
    xtab = reduced_x_table(p, sector, basis)
    xvec = assemble_vector_operator(p, xtab, basis, "X")
    ops.update({"X" + c: xvec[c] for c in COMPONENTS3})

    rtab = reduced_r_table(p, sector, basis)
    rvec = assemble_vector_operator(p, rtab, basis, "R")
    stab = reduced_s_table(p, sector, basis, r_table=rtab if light else None)
    svec = assemble_vector_operator(p, stab, basis, "S")
    ops.update({"R" + c: rvec[c] for c in COMPONENTS3})
    ops.update({"S" + c: svec[c] for c in COMPONENTS3})

    ops["U"] = build_u(p, sector, basis)
    ops["Lam"] = build_lambda(p, sector, basis, phases=phases)
    ops["LamInv"] = build_lambda(p, sector, basis, phases=phases, inverse=True)

    for (a, b), op in build_v(rvec, svec, p).items():
        ops[f"V{a}{b}"] = op

    if include_momenta:
        ptab = reduced_p_table(p, sector, basis)
        pvec = assemble_vector_operator(p, ptab, basis, "P")
        ops.update({"P" + c: pvec[c] for c in COMPONENTS3})
        ops["P0"] = build_p0(p, sector, basis)

    if include_rotations:
        lvec, w = build_l_w(p, basis, rvec, svec, ops["U"])
        ops.update({"L" + c: lvec[c] for c in COMPONENTS3})
        ops["W"] = w
        ops.update(build_t(p, basis, lvec, w))

    ident = sp.identity(basis.size, dtype=complex, format="csr")
    dshift = frozenset({(0, 0, 0, 0)})
    ops["I"] = SparseOperator("I", basis, ident, dshift)
    t2ref = np.array(
        [bracket(l.j, p) * bracket(l.j + 1, p) for l in basis.labels], dtype=complex
    )
    tau3ref = np.array([p.qpow(-4 * l.m) for l in basis.labels], dtype=complex)
    ops["T2ref"] = SparseOperator("T2ref", basis, sp.diags(t2ref).tocsr(), dshift)
    ops["tau3ref"] = SparseOperator("tau3ref", basis, sp.diags(tau3ref).tocsr(), dshift)
    return OperatorSet(p, sector, basis, ops)
