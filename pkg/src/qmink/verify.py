"""Declarative catalog of the algebra relations and a residual engine.

Every identity is stored as ``lhs == rhs`` where both sides are sums of
scalar-weighted products of named generators (adjoints allowed).  Evaluation
forms lhs - rhs as a sparse matrix, restricts rows and columns to the interior
subspace the relation's reach allows (so truncation artifacts cannot leak in),
and reports the max-entry residual normalized by the largest term magnitude.

The light-cone obstruction probe lives here too: it assembles, from measured
matrix elements, the two-equation linear system that would determine the
momentum matrix elements on a light-like lattice, and exhibits its rank
deficiency against a nonvanishing inhomogeneity.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .qnum import DeformationParams, bracket, curly
from .hilbert import (
    BasisLabel,
    Sector,
    SectorKind,
    TruncationWindow,
    default_window,
)
from .operators import OperatorSet, build_operators, op_circ
from . import tensors

ALL_SECTORS = frozenset(SectorKind)
MASSIVE = frozenset(
    {SectorKind.SPACE, SectorKind.TIME_FORWARD, SectorKind.TIME_BACKWARD}
)

SPATIAL = ("+", "-", "3")
SPACETIME = ("+", "-", "3", "0")


def _gname(prefix: str, a: str) -> str:
    return prefix + ("0" if a == "0" else a)


@dataclass(frozen=True)
class Term:
    coef: complex
    factors: tuple  # of (name, adjoint_flag)


def T(coef, *names) -> Term:
    return Term(complex(coef), tuple((nm, False) for nm in names))


def TA(coef, *factors) -> Term:
    return Term(complex(coef), tuple(factors))


@dataclass(frozen=True)
class RelationSpec:
    """One scalar operator identity lhs == rhs with its applicability."""

    name: str
    group: str
    description: str
    lhs: tuple
    rhs: tuple
    sectors: frozenset
    momentum: bool = False  # momentum-bearing identities get a 10x allowance
    budget_extra: tuple = (0, 0, 0, 0)

    def all_terms(self):
        return tuple(self.lhs) + tuple(self.rhs)

    def names(self):
        return {nm for t in self.all_terms() for nm, _ in t.factors}


@dataclass
class ResidualReport:
    relation: str
    group: str
    sector: str
    status: str  # pass | fail | inconclusive | not-representable
    interior_dim: int = 0
    max_residual: float = math.nan
    fro_residual: float = math.nan
    normalization: float = math.nan
    tol: float = math.nan

    @property
    def passed(self) -> bool:
        return self.status == "pass"


# ---------------------------------------------------------------------------
# evaluation engine


class RelationEngine:
    """Evaluates relation specs against a built operator set, caching products."""

    def __init__(self, ops: OperatorSet):
        self.ops = ops
        self._cache: dict = {}

    def _factor_mat(self, name, adj):
        op = self.ops[name]
        return op.mat.conjugate().transpose().tocsr() if adj else op.mat

    def _product(self, factors) -> sp.csr_matrix:
        if factors in self._cache:
            return self._cache[factors]
        mat = self._factor_mat(*factors[0])
        for f in factors[1:]:
            mat = mat @ self._factor_mat(*f)
        mat = mat.tocsr()
        self._cache[factors] = mat
        return mat

    def term_matrix(self, term: Term) -> sp.csr_matrix:
        return term.coef * self._product(term.factors)

    def relation_matrix(self, spec: RelationSpec) -> sp.csr_matrix:
        basis = self.ops.basis
        mat = sp.csr_matrix((basis.size, basis.size), dtype=complex)
        for t in spec.lhs:
            mat = mat + self.term_matrix(t)
        for t in spec.rhs:
            mat = mat - self.term_matrix(t)
        return mat.tocsr()

    def budget(self, spec: RelationSpec) -> tuple:
        out = [0, 0, 0, 0]
        for t in spec.all_terms():
            reach = [0, 0, 0, 0]
            for nm, _ in t.factors:
                r = self.ops[nm].reach
                for k in range(4):
                    reach[k] += r[k]
            for k in range(4):
                out[k] = max(out[k], reach[k])
        margin = self.ops.basis.window.margin
        return tuple(out[k] + spec.budget_extra[k] + margin for k in range(4))

    def evaluate(self, spec: RelationSpec, tol: float = 1e-10) -> ResidualReport:
        sector = self.ops.sector.kind
        rep = ResidualReport(spec.name, spec.group, sector.value, "fail")
        missing = [nm for nm in spec.names() if nm not in self.ops]
        if missing:
            rep.status = "not-representable"
            return rep
        idx = self.ops.basis.interior_indices(self.budget(spec))
        rep.interior_dim = int(idx.size)
        tol_eff = tol * (10.0 if spec.momentum else 1.0)
        rep.tol = tol_eff
        if idx.size == 0:
            rep.status = "inconclusive"
            return rep

        def _block_max(mat):
            sub = mat[idx][:, idx]
            return (float(np.abs(sub.data).max()) if sub.nnz else 0.0), sub

        diff = self.relation_matrix(spec)
        rep.max_residual, sub = _block_max(diff)
        rep.fro_residual = float(np.sqrt((np.abs(sub.data) ** 2).sum())) if sub.nnz else 0.0
        term_mats = [self.term_matrix(t) for t in spec.all_terms()]
        rep.normalization = max(
            (_block_max(m)[0] for m in term_mats), default=0.0
        )
        if rep.normalization == 0.0 and any(m.nnz for m in term_mats):
            # every term vanished on the interior although the relation has
            # content: the window is too narrow to test it
            rep.status = "inconclusive"
            return rep
        rep.status = (
            "pass" if rep.max_residual <= tol_eff * (1.0 + rep.normalization) else "fail"
        )
        return rep


# ---------------------------------------------------------------------------
# the catalog


def _gpairs(p):
    return (("3", "3", 1.0), ("+", "-", -p.q), ("-", "+", -1.0 / p.q))


def _circ_terms(p, coef, aname, bname, left=(), right=()):
    """Terms of coef * (A o B), optionally sandwiched between named factors."""
    out = []
    for A, B, w in _gpairs(p):
        out.append(T(coef * w, *left, aname + A, bname + B, *right))
    return out


def relation_catalog(p: DeformationParams) -> list:
    """Every relation of the algebra as independently evaluable components."""
    q, lam = p.q, p.lam
    two = bracket(2, p)
    c2 = curly(2, p)
    three = bracket(3, p)
    ellu = tensors.epsilon3(p, "llu")
    eluu = tensors.epsilon3(p, "luu")
    euuu = tensors.epsilon3(p, "uuu")
    elll = tensors.epsilon3(p, "lll")
    g3 = tensors.metric3(p)
    eta = tensors.metric4(p)
    rhat3 = tensors.build_rhat3(p)
    rinv = tensors.build_rmatrix4_inverse(p)
    # contracted coefficient arrays used by the mixed relations
    ee_sx = np.einsum("abg,stg->abst", euuu, elll)          # eps^{ABG} eps_{STG}
    ee_lx = np.einsum("kca,dkb->abcd", ellu, eluu)          # eps_{KC}^A eps_D^{KB}
    ee_xp = np.einsum("dce,eab->abcd", ellu, eluu)          # eps_{DC}^E eps_E^{AB}
    i3 = {c: i for i, c in enumerate(SPATIAL)}
    i4 = {c: i for i, c in enumerate(SPACETIME)}
    cat: list[RelationSpec] = []

    def add(name, group, desc, lhs, rhs, sectors, momentum=False, extra=(0, 0, 0, 0)):
        cat.append(
            RelationSpec(name, group, desc, tuple(lhs), tuple(rhs),
                         frozenset(sectors), momentum, tuple(extra))
        )

    def eps_quadratic(vname, A):
        """Terms of eps_{CB}^A V^B V^C (first slot pairs with the right factor)."""
        out = []
        for B in SPATIAL:
            for C in SPATIAL:
                c = ellu[i3[C], i3[B], i3[A]]
                if c != 0.0:
                    out.append(T(c, vname + B, vname + C))
        return out

    # -- 1/2: coordinate and momentum noncommutativity ----------------------
    for vec, sectors, mom in (("X", ALL_SECTORS, False), ("P", MASSIVE, True)):
        for A in SPATIAL:
            add(f"{vec.lower()}{vec.lower()}-eps[{A}]", f"{vec.lower()}{vec.lower()}-noncommutativity",
                f"epsilon-contracted {vec} bilinear reduces to the time component",
                eps_quadratic(vec, A), [T(1.0 - q * q, vec + "0", vec + A)],
                sectors, momentum=mom)
        for A in SPATIAL:
            add(f"{vec.lower()}0-central[{A}]", f"{vec.lower()}{vec.lower()}-noncommutativity",
                f"{vec}0 commutes with the spatial components",
                [T(1, vec + "0", vec + A)], [T(1, vec + A, vec + "0")],
                sectors, momentum=mom)

    # -- 3: boost-generator algebra -----------------------------------------
    for A in SPATIAL:
        add(f"rr-eps[{A}]", "boost-algebra", "R bilinear closes on U R",
            eps_quadratic("R", A), [T(1.0 / (1 + q * q), "U", "R" + A)], ALL_SECTORS)
        add(f"ss-eps[{A}]", "boost-algebra", "S bilinear closes on U S",
            eps_quadratic("S", A), [T(-1.0 / (1 + q * q), "U", "S" + A)], ALL_SECTORS)
        add(f"u-central-r[{A}]", "boost-algebra", "U is central among the boosts",
            [T(1, "U", "R" + A)], [T(1, "R" + A, "U")], ALL_SECTORS)
        add(f"u-central-s[{A}]", "boost-algebra", "U is central among the boosts",
            [T(1, "U", "S" + A)], [T(1, "S" + A, "U")], ALL_SECTORS)
    for A in SPATIAL:
        for B in SPATIAL:
            rhs = []
            for C in SPATIAL:
                for D in SPATIAL:
                    c = rhat3[i3[A], i3[B], i3[C], i3[D]]
                    if c != 0.0:
                        rhs.append(T(q * q * c, "S" + C, "R" + D))
            add(f"rs-braid[{A}{B}]", "boost-algebra",
                "R S reorders through the 3d R-matrix",
                [T(1, "R" + A, "S" + B)], rhs, ALL_SECTORS)

    # -- 4: U Casimir normalizations ----------------------------------------
    coef = 0.5 * (q**4 - 1.0) ** 2
    add("u-casimir-sym", "u-casimir", "U^2 against the symmetric Casimir combination",
        [T(1, "U", "U")],
        [T(1, "I")] + _circ_terms(p, coef, "R", "R") + _circ_terms(p, coef, "S", "S"),
        ALL_SECTORS)
    add("u-casimir-rr", "u-casimir", "U^2 - 1 fixes the length of R o R",
        [T(1, "U", "U"), T(-1, "I")],
        _circ_terms(p, (q**4 - 1.0) ** 2, "R", "R"), ALL_SECTORS)

    # -- 5/6: reordering of coordinates (and momenta) through R, S, U -------
    def reorder_relations(vec, sectors, mom):
        v = vec
        c_main = (q**4 + 1.0) / (q * (q * q + 1.0))
        for A in SPATIAL:
            lhs = [T(1, "R" + A, v + "0")]
            rhs = [T(c_main, v + "0", "R" + A),
                   T(-q / (1 + q * q) ** 2, v + A, "U")]
            for L in SPATIAL:
                for M in SPATIAL:
                    c = ellu[i3[L], i3[M], i3[A]]
                    if c != 0.0:
                        rhs.append(T(c * (q * q - 1.0) / (q * (q * q + 1.0)),
                                     v + M, "R" + L))
            add(f"r{v.lower()}0[{A}]", f"reorder-{v.lower()}",
                "R through the time component", lhs, rhs, sectors, mom)

            lhs = [T(1, "S" + A, v + "0")]
            rhs = [T(c_main, v + "0", "S" + A),
                   T(-1.0 / (q * (1 + q * q) ** 2), v + A, "U")]
            for L in SPATIAL:
                for M in SPATIAL:
                    c = ellu[i3[L], i3[M], i3[A]]
                    if c != 0.0:
                        rhs.append(T(c * (q * q - 1.0) / (q * (q * q + 1.0)),
                                     v + M, "S" + L))
            add(f"s{v.lower()}0[{A}]", f"reorder-{v.lower()}",
                "S through the time component", lhs, rhs, sectors, mom)

        for A in SPATIAL:
            for B in SPATIAL:
                pref = 1.0 / (1 + q * q)
                # R^A V^B
                rhs = [T(pref * q * (1 + q * q), v + A, "R" + B)]
                for C in SPATIAL:
                    c = eluu[i3[C], i3[A], i3[B]]
                    if c != 0.0:
                        rhs.append(T(-pref * (q * q - 1.0) / q * c, v + "0", "R" + C))
                gab = g3[i3[A], i3[B]]
                if gab != 0.0:
                    for M in SPATIAL:
                        for C in SPATIAL:
                            gmc = g3[i3[M], i3[C]]
                            if gmc != 0.0:
                                rhs.append(T(-pref * (q * q - 1.0) / q * gab * gmc,
                                             v + M, "R" + C))
                    rhs.append(T(-pref / (q * (1 + q * q)) * gab, v + "0", "U"))
                for Sx in SPATIAL:
                    for Tx in SPATIAL:
                        c = ee_sx[i3[A], i3[B], i3[Sx], i3[Tx]]
                        if c != 0.0:
                            rhs.append(T(-pref * 2.0 / q * c, v + Tx, "R" + Sx))
                for M in SPATIAL:
                    c = eluu[i3[M], i3[A], i3[B]]
                    if c != 0.0:
                        rhs.append(T(pref / (q * (1 + q * q)) * c, v + M, "U"))
                add(f"r{v.lower()}[{A}{B}]", f"reorder-{v.lower()}",
                    "R through a spatial component",
                    [T(1, "R" + A, v + B)], rhs, sectors, mom)

                # S^A V^B
                rhs = [T(pref * (1 + q * q) / q, v + A, "S" + B)]
                for C in SPATIAL:
                    c = eluu[i3[C], i3[A], i3[B]]
                    if c != 0.0:
                        rhs.append(T(-pref * (q * q - 1.0) / q * c, v + "0", "S" + C))
                if gab != 0.0:
                    for M in SPATIAL:
                        for C in SPATIAL:
                            gmc = g3[i3[M], i3[C]]
                            if gmc != 0.0:
                                rhs.append(T(pref * q * (q * q - 1.0) * gab * gmc,
                                             v + M, "S" + C))
                    rhs.append(T(-pref * q / (1 + q * q) * gab, v + "0", "U"))
                for Sx in SPATIAL:
                    for Tx in SPATIAL:
                        c = ee_sx[i3[A], i3[B], i3[Sx], i3[Tx]]
                        if c != 0.0:
                            rhs.append(T(-pref * 2.0 / q * c, v + Tx, "S" + Sx))
                for M in SPATIAL:
                    c = eluu[i3[M], i3[A], i3[B]]
                    if c != 0.0:
                        rhs.append(T(-pref / (q * (1 + q * q)) * c, v + M, "U"))
                add(f"s{v.lower()}[{A}{B}]", f"reorder-{v.lower()}",
                    "S through a spatial component",
                    [T(1, "S" + A, v + B)], rhs, sectors, mom)

        # U through components
        add(f"u{v.lower()}0", f"reorder-{v.lower()}", "U through the time component",
            [T(1, "U", v + "0")],
            [T(c_main, v + "0", "U")] + _circ_terms(p, -(q * q - 1.0) ** 2 / q, v, "R"),
            sectors, mom)
        for A in SPATIAL:
            rhs = [T(c_main, v + A, "U"), T(-q * (q * q - 1.0) ** 2, v + "0", "R" + A)]
            for B in SPATIAL:
                for C in SPATIAL:
                    c = ellu[i3[C], i3[B], i3[A]]
                    if c != 0.0:
                        rhs.append(T(-(q * q - 1.0) ** 2 / q * c, v + B, "R" + C))
            add(f"u{v.lower()}[{A}]", f"reorder-{v.lower()}",
                "U through a spatial component",
                [T(1, "U", v + A)], rhs, sectors, mom)
        # the derived scalar reordering (consequence used by the spectral analysis)
        add(f"{v.lower()}r-{v.lower()}0", f"reorder-{v.lower()}",
            "scalar V o R through the time component",
            _circ_terms(p, 1.0, v, "R", right=(v + "0",)),
            _circ_terms(p, 2 * q / (1 + q * q), v, "R", left=(v + "0",))
            + ([T(-q / (1 + q * q) ** 2, "XcircX", "U")] if v == "X"
               else _circ_terms(p, -q / (1 + q * q) ** 2, "P", "P", right=("U",))),
            sectors, mom)

    reorder_relations("X", ALL_SECTORS, False)
    reorder_relations("P", MASSIVE, True)

    # -- 7: scaling operator ------------------------------------------------
    for a in SPACETIME:
        add(f"lam-x[{a}]", "scaling", "scaling operator contracts coordinates",
            [T(1, "Lam", _gname("X", a))], [T(1.0 / q, _gname("X", a), "Lam")],
            ALL_SECTORS)
        add(f"lam-p[{a}]", "scaling", "scaling operator dilates momenta",
            [T(1, "Lam", _gname("P", a))], [T(q, _gname("P", a), "Lam")],
            MASSIVE, momentum=True)
    for a in SPACETIME:
        for b in SPACETIME:
            add(f"lam-v[{a}{b}]", "scaling", "scaling operator commutes with boosts",
                [T(1, "Lam", f"V{a}{b}")], [T(1, f"V{a}{b}", "Lam")], ALL_SECTORS)
    add("lam-u", "scaling", "scaling operator commutes with U",
        [T(1, "Lam", "U")], [T(1, "U", "Lam")], ALL_SECTORS)

    # -- 8: covariant commutation rule for momenta and coordinates ----------
    for a in SPACETIME:
        for b in SPACETIME:
            lhs = [T(1, _gname("P", a), _gname("X", b))]
            for c in SPACETIME:
                for d in SPACETIME:
                    w = rinv[i4[a], i4[b], i4[c], i4[d]]
                    if w != 0.0:
                        lhs.append(T(-w / (q * q), _gname("X", c), _gname("P", d)))
            rhs = [T(-0.5j * (1 + q**4) * eta[i4[a], i4[b]], "LamInv", "U"),
                   T(-0.5j * q * q * (1 - q**4), "LamInv", f"V{a}{b}")]
            add(f"heisenberg[{a}{b}]", "heisenberg-covariant",
                "covariant momentum-coordinate exchange relation",
                lhs, rhs, MASSIVE, momentum=True, extra=(0, 0, 0, 1))

    # -- 9: orthogonality of the boost bilinears to coordinates/momenta -----
    for vec, sectors, mom in (("X", ALL_SECTORS, False), ("P", MASSIVE, True)):
        add(f"ortho-scalar-{vec.lower()}", "orthogonality",
            "rotation bilinear is orthogonal to the position vector",
            _circ_terms(p, 1.0, vec, "R") + _circ_terms(p, -q * q, vec, "S"),
            [], sectors, momentum=mom)
        for A in SPATIAL:
            lhs = [T(1, vec + "0", "S" + A), T(-q * q, vec + "0", "R" + A)]
            for B in SPATIAL:
                for C in SPATIAL:
                    c = ellu[i3[C], i3[B], i3[A]]
                    if c != 0.0:
                        lhs.append(T(-c, vec + B, "R" + C))
                        lhs.append(T(-c, vec + B, "S" + C))
            add(f"ortho-vector-{vec.lower()}[{A}]", "orthogonality",
                "vector part of the orthogonality identity",
                lhs, [], sectors, momentum=mom)

    # -- 10: equality of the two boost Casimir lengths -----------------------
    add("rr-equals-ss", "casimir-equality", "R o R equals S o S",
        _circ_terms(p, 1.0, "R", "R"), _circ_terms(p, 1.0, "S", "S"), ALL_SECTORS)

    # -- 11: conjugation table as adjoint identities -------------------------
    gmap = {"+": ("-", -q), "-": ("+", -1.0 / q), "3": ("3", 1.0)}
    for vec, sectors, mom in (("X", ALL_SECTORS, False), ("P", MASSIVE, True)):
        add(f"star-{vec.lower()}0", "conjugation", "time component is self-adjoint",
            [TA(1, (vec + "0", True))], [T(1, vec + "0")], sectors, momentum=mom)
        for A in SPATIAL:
            B, w = gmap[A]
            add(f"star-{vec.lower()}[{A}]", "conjugation",
                "spatial components conjugate through the metric",
                [TA(1, (vec + A, True))], [T(w, vec + B)], sectors, momentum=mom)
    for A in SPATIAL:
        B, w = gmap[A]
        add(f"star-r[{A}]", "conjugation", "R conjugates into S",
            [TA(1, ("R" + A, True))], [T(-w, "S" + B)], ALL_SECTORS)
        add(f"star-s[{A}]", "conjugation", "S conjugates into R",
            [TA(1, ("S" + A, True))], [T(-w, "R" + B)], ALL_SECTORS)
    add("star-u", "conjugation", "U is self-adjoint",
        [TA(1, ("U", True))], [T(1, "U")], ALL_SECTORS)
    add("star-lam", "conjugation", "scaling operator conjugate",
        [TA(1, ("Lam", True))], [T(q**4, "LamInv")], ALL_SECTORS)

    # -- 12: rotation generators commute with the scalars --------------------
    for A in SPATIAL:
        add(f"l-x0[{A}]", "rotation-invariants", "rotations commute with time",
            [T(1, "L" + A, "X0")], [T(1, "X0", "L" + A)], ALL_SECTORS)
        add(f"l-xx[{A}]", "rotation-invariants", "rotations commute with the radius",
            [T(1, "L" + A, "XcircX")], [T(1, "XcircX", "L" + A)], ALL_SECTORS)
        add(f"l-p0[{A}]", "rotation-invariants", "rotations commute with energy",
            [T(1, "L" + A, "P0")], [T(1, "P0", "L" + A)], MASSIVE, momentum=True)
        add(f"l-pp[{A}]", "rotation-invariants",
            "rotations commute with the momentum square",
            _circ_terms(p, 1.0, "P", "P", left=("L" + A,)),
            _circ_terms(p, 1.0, "P", "P", right=("L" + A,)),
            MASSIVE, momentum=True)

    # -- 13: the rotation algebra itself --------------------------------------
    for A in SPATIAL:
        lhs = []
        for B in SPATIAL:
            for C in SPATIAL:
                c = ellu[i3[B], i3[C], i3[A]]
                if c != 0.0:
                    lhs.append(T(c, "L" + C, "L" + B))
        add(f"ll-eps[{A}]", "rotation-algebra", "L bilinear closes on W L",
            lhs, [T(-1.0 / (q * q), "W", "L" + A)], ALL_SECTORS)
    add("ll-casimir", "rotation-algebra", "length of L o L against W^2 - 1",
        _circ_terms(p, q**4 * (q * q - 1.0) ** 2, "L", "L"),
        [T(1, "W", "W"), T(-1, "I")], ALL_SECTORS)

    # -- 14: the compact T algebra -------------------------------------------
    add("tt-ladder", "t-algebra", "deformed ladder commutator",
        [T(1.0 / q, "T+", "T-"), T(-q, "T-", "T+")],
        [T(1.0 / lam, "I"), T(-1.0 / lam, "tau3")], ALL_SECTORS)
    add("tt-tau-plus", "t-algebra", "tau3 reorders through T+",
        [T(1, "tau3", "T+")], [T(q**-4, "T+", "tau3")], ALL_SECTORS)
    add("tt-tau-minus", "t-algebra", "tau3 reorders through T-",
        [T(1, "tau3", "T-")], [T(q**4, "T-", "tau3")], ALL_SECTORS)
    add("t-casimir-diag", "t-algebra", "quadratic Casimir is the level diagonal",
        [T(1, "T2")], [T(1, "T2ref")], ALL_SECTORS)
    add("tau3-diag", "t-algebra", "tau3 is the magnetic diagonal",
        [T(1, "tau3")], [T(1, "tau3ref")], ALL_SECTORS)
    add("t-conj-plus", "t-algebra", "T+ conjugate",
        [TA(1, ("T+", True))], [T(q**-2, "T-")], ALL_SECTORS)
    add("t-conj-minus", "t-algebra", "T- conjugate",
        [TA(1, ("T-", True))], [T(q * q, "T+")], ALL_SECTORS)
    add("t-conj-tau", "t-algebra", "tau3 is self-adjoint",
        [TA(1, ("tau3", True))], [T(1, "tau3")], ALL_SECTORS)

    # -- 15: how the coordinate vector transforms under L and W ---------------
    for A in SPATIAL:
        for B in SPATIAL:
            gab = g3[i3[A], i3[B]]
            rhs = []
            if gab != 0.0:
                rhs += _circ_terms(p, gab, "X", "L")
            for C in SPATIAL:
                for D in SPATIAL:
                    c = ee_lx[i3[A], i3[B], i3[C], i3[D]]
                    if c != 0.0:
                        rhs.append(T(-c / (q * q), "X" + C, "L" + D))
            for C in SPATIAL:
                c = eluu[i3[C], i3[A], i3[B]]
                if c != 0.0:
                    rhs.append(T(-c / q**4, "X" + C, "W"))
            add(f"lx[{A}{B}]", "rotation-action", "L moves through the coordinates",
                [T(1, "L" + A, "X" + B)], rhs, ALL_SECTORS)
    for A in SPATIAL:
        rhs = [T(q * q + q**-2 - 1.0, "X" + A, "W")]
        for C in SPATIAL:
            for D in SPATIAL:
                c = ellu[i3[D], i3[C], i3[A]]
                if c != 0.0:
                    rhs.append(T((q * q - 1.0) ** 2 * c, "X" + C, "L" + D))
        add(f"wx[{A}]", "rotation-action", "W moves through the coordinates",
            [T(1, "W", "X" + A)], rhs, ALL_SECTORS)
    add("wx0", "rotation-action", "W commutes with time",
        [T(1, "W", "X0")], [T(1, "X0", "W")], ALL_SECTORS)

    # -- 16: T action on the coordinate vector --------------------------------
    root = math.sqrt(1.0 + q * q)
    add("tx-tau-3", "t-action", "tau3 commutes with X3",
        [T(1, "tau3", "X3")], [T(1, "X3", "tau3")], ALL_SECTORS)
    add("tx-tau-plus", "t-action", "tau3 reorders through X+",
        [T(1, "tau3", "X+")], [T(q**-4, "X+", "tau3")], ALL_SECTORS)
    add("tx-tau-minus", "t-action", "tau3 reorders through X-",
        [T(1, "tau3", "X-")], [T(q**4, "X-", "tau3")], ALL_SECTORS)
    add("tx-m3", "t-action", "T- through X3",
        [T(1, "T-", "X3")], [T(1, "X3", "T-"), T(q * root, "X-")], ALL_SECTORS)
    add("tx-pm", "t-action", "T+ through X-",
        [T(1, "T+", "X-")], [T(q * q, "X-", "T+"), T(root / q, "X3")], ALL_SECTORS)
    add("tx-mm", "t-action", "T- through X-",
        [T(1, "T-", "X-")], [T(q * q, "X-", "T-")], ALL_SECTORS)
    add("tx-p3", "t-action", "T+ through X3",
        [T(1, "T+", "X3")], [T(1, "X3", "T+"), T(root / (q * q), "X+")], ALL_SECTORS)
    add("tx-pp", "t-action", "T+ through X+",
        [T(1, "T+", "X+")], [T(q**-2, "X+", "T+")], ALL_SECTORS)
    add("tx-mp", "t-action", "T- through X+",
        [T(1, "T-", "X+")], [T(q**-2, "X+", "T-"), T(root, "X3")], ALL_SECTORS)

    # -- 17: the complete commuting set ---------------------------------------
    commuting = ("X0", "XcircX", "T2", "tau3")
    for i, a in enumerate(commuting):
        for b in commuting[i + 1:]:
            add(f"commuting[{a},{b}]", "commuting-set",
                "members of the complete commuting set commute",
                [T(1, a, b)], [T(1, b, a)], ALL_SECTORS)

    # -- 18: explicit momentum-coordinate relations ---------------------------
    add("xp-time", "heisenberg-explicit", "time-time exchange relation",
        [T(q * q * two, "P0", "X0"), T(-q * c2, "X0", "P0")]
        + _circ_terms(p, -lam, "X", "P"),
        [T(0.5j * two * c2 * q**4, "LamInv", "U")],
        MASSIVE, momentum=True, extra=(0, 0, 0, 1))
    for A in SPATIAL:
        lhs = [T(q * q * two, "P0", "X" + A), T(-q * c2, "X" + A, "P0"),
               T(-lam * q * q, "X0", "P" + A)]
        for C in SPATIAL:
            for D in SPATIAL:
                c = ellu[i3[D], i3[C], i3[A]]
                if c != 0.0:
                    lhs.append(T(-lam * c, "X" + C, "P" + D))
        add(f"xp-mixed-b[{A}]", "heisenberg-explicit",
            "energy through a spatial coordinate",
            lhs,
            [T(-0.5j * two**2 * q**6 * lam * q * q, "LamInv", "R" + A),
             T(-0.5j * two**2 * q**6 * lam, "LamInv", "S" + A)],
            MASSIVE, momentum=True, extra=(0, 0, 0, 1))
        lhs = [T(q * q * two, "P" + A, "X0"), T(-q * c2, "X0", "P" + A),
               T(-lam * q * q, "X" + A, "P0")]
        for C in SPATIAL:
            for D in SPATIAL:
                c = ellu[i3[D], i3[C], i3[A]]
                if c != 0.0:
                    lhs.append(T(-lam * c, "X" + C, "P" + D))
        add(f"xp-mixed-c[{A}]", "heisenberg-explicit",
            "spatial momentum through time",
            lhs,
            [T(0.5j * two**2 * q**6 * lam, "LamInv", "R" + A),
             T(0.5j * two**2 * q**6 * lam * q * q, "LamInv", "S" + A)],
            MASSIVE, momentum=True, extra=(0, 0, 0, 1))
    for A in SPATIAL:
        for B in SPATIAL:
            gab = g3[i3[A], i3[B]]
            lhs = [T(two, "P" + A, "X" + B), T(-two, "X" + A, "P" + B)]
            for C in SPATIAL:
                for D in SPATIAL:
                    c = ee_xp[i3[A], i3[B], i3[C], i3[D]]
                    if c != 0.0:
                        lhs.append(T(2.0 / q**3 * c, "X" + C, "P" + D))
            if gab != 0.0:
                lhs += _circ_terms(p, lam / (q * q) * gab, "X", "P")
                lhs.append(T(-lam / (q * q) * gab, "X0", "P0"))
            for C in SPATIAL:
                c = eluu[i3[C], i3[A], i3[B]]
                if c != 0.0:
                    lhs.append(T(lam / (q * q) * c, "X" + C, "P0"))
                    lhs.append(T(lam / (q * q) * c, "X0", "P" + C))
            rhs = []
            if gab != 0.0:
                rhs.append(T(-0.5j * two * q * q * c2 * gab, "LamInv", "U"))
            for C in SPATIAL:
                c = eluu[i3[C], i3[A], i3[B]]
                if c != 0.0:
                    rhs.append(T(0.5j * two * q * q * q * q * lam * two * c,
                                 "LamInv", "R" + C))
                    rhs.append(T(-0.5j * two * q * q * q * q * lam * two * c,
                                 "LamInv", "S" + C))
            add(f"xp-spatial[{A}{B}]", "heisenberg-explicit",
                "spatial momentum-coordinate exchange",
                lhs, rhs, MASSIVE, momentum=True, extra=(0, 0, 0, 1))
    add("xp-contracted", "heisenberg-explicit", "metric contraction of the exchange set",
        _circ_terms(p, 1.0, "P", "X")
        + _circ_terms(p, -c2 / (q**3 * two), "X", "P")
        + [T(-lam * three / (q * q * two), "X0", "P0")],
        [T(-0.5j * q * q * c2 * three, "LamInv", "U")],
        MASSIVE, momentum=True, extra=(0, 0, 0, 1))
    add("px2-time", "heisenberg-rearranged", "time commutator in closed form",
        [T(1, "P0", "X0"), T(-1, "X0", "P0")],
        [T(0.5j * q**4, "LamInv", "U"), T(0.5j, "Lam", "U")],
        MASSIVE, momentum=True, extra=(0, 0, 0, 1))
    add("px2-scalar", "heisenberg-rearranged", "scalar commutator in closed form",
        _circ_terms(p, 1.0, "P", "X") + _circ_terms(p, -1.0, "X", "P"),
        [T(-0.5j * three * q**4, "LamInv", "U"), T(-0.5j * three, "Lam", "U")],
        MASSIVE, momentum=True, extra=(0, 0, 0, 1))
    add("px2-mixed", "heisenberg-rearranged", "mixed scalar relation in closed form",
        _circ_terms(p, lam, "X", "P") + [T(-lam, "X0", "P0")],
        [T(0.5j * q * q * two, "Lam", "U"), T(-0.5j * q * q * two, "LamInv", "U")],
        MASSIVE, momentum=True, extra=(0, 0, 0, 1))
    add("xpx0", "heisenberg-rearranged",
        "scalar momentum bilinear against time and radius",
        _circ_terms(p, 1.0, "X", "P", right=("X0",))
        + _circ_terms(p, -2.0 / (q * two), "X", "P", left=("X0",))
        + [T(-lam / two, "XcircX", "P0")],
        _circ_terms(p, 1j * q**4 * lam * two, "X", "R", right=("LamInv",)),
        MASSIVE, momentum=True, extra=(0, 0, 0, 1))
    return cat


def run_suite(ops: OperatorSet, tol: float = 1e-10,
              catalog: list | None = None) -> list:
    """Evaluate the full catalog against a built operator set.

    Relations whose generators do not exist on the sector (the momentum set
    on the light-like lattice) are reported as not-representable rather than
    silently dropped.
    """
    if catalog is None:
        catalog = relation_catalog(ops.p)
    eng = RelationEngine(ops)
    out = []
    for spec in catalog:
        if ops.sector.kind not in spec.sectors:
            out.append(ResidualReport(spec.name, spec.group,
                                      ops.sector.kind.value, "not-representable"))
            continue
        out.append(eng.evaluate(spec, tol))
    return out


# ---------------------------------------------------------------------------
# the two-formulation consistency check for the momentum relations


def heisenberg_formulation_gap(ops: OperatorSet) -> float:
    """Max relative gap between the covariant exchange relation and its
    explicit component form.

    The component identities are fixed scalar multiples of the covariant ones
    (q^2 [2] for rows touching the time index, [2] for the purely spatial
    block; the contracted identity is the metric trace of the spatial block),
    so the difference of the lhs-rhs matrices must vanish identically, with
    no interior restriction at all.
    """
    p = ops.p
    q = p.q
    two = bracket(2, p)
    g3 = tensors.metric3(p)
    cat = {s.name: s for s in relation_catalog(p)}
    eng = RelationEngine(ops)

    def relmat(name):
        return eng.relation_matrix(cat[name])

    gap = 0.0

    def compare(ma, mb):
        nonlocal gap
        diff = ma - mb
        num = float(np.abs(diff.data).max()) if diff.nnz else 0.0
        den = 1.0 + (float(np.abs(ma.data).max()) if ma.nnz else 0.0)
        gap = max(gap, num / den)

    compare(relmat("xp-time"), q * q * two * relmat("heisenberg[00]"))
    for A in SPATIAL:
        compare(relmat(f"xp-mixed-b[{A}]"), q * q * two * relmat(f"heisenberg[0{A}]"))
        compare(relmat(f"xp-mixed-c[{A}]"), q * q * two * relmat(f"heisenberg[{A}0]"))
    for A in SPATIAL:
        for B in SPATIAL:
            compare(relmat(f"xp-spatial[{A}{B}]"), two * relmat(f"heisenberg[{A}{B}]"))
    # contracted identity == metric trace of the spatial block / [2]
    i3 = {c: i for i, c in enumerate(SPATIAL)}
    acc = None
    for A in SPATIAL:
        for B in SPATIAL:
            w = g3[i3[A], i3[B]]
            if w != 0.0:
                m = w * relmat(f"xp-spatial[{A}{B}]")
                acc = m if acc is None else acc + m
    compare(relmat("xp-contracted"), acc / two)
    return gap


# ---------------------------------------------------------------------------
# light-cone obstruction probe


@dataclass
class ObstructionRow:
    n: int
    t: float
    sv_ratio: float
    det: float
    u_element: float
    inhomogeneity: float
    inhomogeneity_over_u: float
    inconsistency: float
    solvable: bool


@dataclass
class ObstructionReport:
    q: float
    tau0: float
    rows: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        bad = all((not r.solvable) and r.sv_ratio <= 1e-10 for r in self.rows)
        return "no solution exists" if bad else "solvable"


def _momentum_system(p: DeformationParams, t, t_prime, r_prime_sq):
    """Coefficient matrix of the two linear equations for (P0, X o P) elements.

    Row 1 is the mixed scalar relation, row 2 the radius-weighted one; the
    unknown vector is (<P0>, <X o P>).
    """
    q, lam = p.q, p.lam
    two = bracket(2, p)
    return np.array([
        [-lam * t_prime, lam],
        [-(lam / two) * r_prime_sq, t - (2.0 / (q * two)) * t_prime],
    ])


def _momentum_rhs(p: DeformationParams, ops: OperatorSet, bra: int, ket: int):
    q, lam = p.q, p.lam
    two = bracket(2, p)
    lam_u = (ops["Lam"].mat @ ops["U"].mat) - (ops["LamInv"].mat @ ops["U"].mat)
    xr = op_circ(ops.vector("X"), ops.vector("R"), p).mat @ ops["LamInv"].mat
    b1 = 0.5j * q * q * two * lam_u[bra, ket]
    b2 = 1j * q**4 * lam * two * xr[bra, ket]
    return np.array([b1, b2])


def lightcone_obstruction(ops: OperatorSet) -> ObstructionReport:
    """Rank-deficiency probe for the momentum system on the light-like lattice.

    For each interior chain site n the homogeneous 2x2 system for the diagonal
    matrix elements of P0 and X o P is singular (both rows are proportional
    because r^2 = t^2 on the cone), while the inhomogeneity, fed by the
    nonvanishing U chain element 1/[2], has a component outside the column
    space: no solution exists, so the momenta cannot be represented.
    """
    if ops.sector.kind is not SectorKind.LIGHT:
        raise ValueError("the obstruction probe runs on the light-like sector only")
    p = ops.p
    basis = ops.basis
    rep = ObstructionReport(p.q, ops.sector.scale)
    interior = set(basis.interior_indices((0, 0, 2, 0)).tolist())
    for i, lab in enumerate(basis.labels):
        if lab.j != 0 or lab.m != 0 or i not in interior:
            continue
        t = float(ops["X0"].mat.diagonal()[i].real)
        r2 = float(ops["XcircX"].mat.diagonal()[i].real)
        a = _momentum_system(p, t, t, r2)
        b = _momentum_rhs(p, ops, i, i)
        sv = np.linalg.svd(a, compute_uv=False)
        sv_ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
        # scale-free form: unknowns (t <P0>, <X o P>), second row divided by t
        a_hat = np.array([[a[0, 0] / t, a[0, 1]],
                          [a[1, 0] / (t * t), a[1, 1] / t]])
        b_hat = np.array([b[0], b[1] / t])
        u_mat, s, _ = np.linalg.svd(a_hat)
        null_dir = u_mat[:, -1]
        inconsistency = abs(null_dir.conj() @ b_hat)
        up = basis.get(lab.shifted(dn=1))
        u_el = abs(ops["U"].mat[up, i]) if up is not None else math.nan
        inhom = float(np.linalg.norm(b_hat))
        rep.rows.append(ObstructionRow(
            n=lab.n, t=t, sv_ratio=sv_ratio, det=float(np.linalg.det(a)),
            u_element=float(u_el), inhomogeneity=inhom,
            inhomogeneity_over_u=inhom / u_el if u_el else math.inf,
            inconsistency=float(inconsistency),
            solvable=bool(inconsistency <= 1e-8 * (1.0 + inhom)),
        ))
    return rep


def solve_momentum_pair(ops: OperatorSet, bra: BasisLabel, ket: BasisLabel):
    """Solve the two-equation system for (<P0>, <X o P>) between two states.

    On massive sectors the system is regular and the solution must reproduce
    the directly built momentum operators; that is the positive control for
    the light-cone obstruction.
    """
    p = ops.p
    basis = ops.basis
    i, k = basis.index_of(bra), basis.index_of(ket)
    t = float(ops["X0"].mat.diagonal()[k].real)
    t_prime = float(ops["X0"].mat.diagonal()[i].real)
    r2_prime = float(ops["XcircX"].mat.diagonal()[i].real)
    a = _momentum_system(p, t, t_prime, r2_prime)
    b = _momentum_rhs(p, ops, i, k)
    return np.linalg.solve(a, b)


# ---------------------------------------------------------------------------
# classical-limit probe and sector-inequivalence smoke check


def q_limit_probe(q_values, j_max: int = 2, n_half: int = 4) -> dict:
    """Normalized residual of the undeformed coordinate commutator per q.

    The deformed coordinates stop commuting at order (q - 1); the probe
    reports max-entry residuals of [X^A, X^B] on a small space-like window so
    the scaling with q - 1 can be checked.
    """
    out = {}
    window = TruncationWindow(j_max, -n_half, n_half, -1, 1)
    for qv in q_values:
        p = DeformationParams(qv)
        ops = build_operators(
            p, Sector(SectorKind.SPACE, 1.0), window,
            include_momenta=False, include_rotations=False,
        )
        idx = ops.basis.interior_indices((2, 2, 0, 0))
        worst = 0.0
        for a, b in (("X+", "X-"), ("X+", "X3"), ("X-", "X3")):
            comm = ops[a].mat @ ops[b].mat - ops[b].mat @ ops[a].mat
            sub = comm[idx][:, idx]
            num = float(np.abs(sub.data).max()) if sub.nnz else 0.0
            ref = ops[a].mat @ ops[b].mat
            subref = ref[idx][:, idx]
            den = 1.0 + (float(np.abs(subref.data).max()) if subref.nnz else 0.0)
            worst = max(worst, num / den)
        out[qv] = worst
    return out


def x0_spectrum_gap(p: DeformationParams) -> float:
    """Smallest distance between the time-like-forward and space-like time
    spectra on the default windows (positive gap backs sector inequivalence)."""
    from .hilbert import enumerate_basis, x0_eigenvalue

    vals = {}
    for kind in (SectorKind.TIME_FORWARD, SectorKind.SPACE):
        sec = Sector(kind, 1.0)
        basis = enumerate_basis(sec, default_window(kind))
        vals[kind] = sorted({x0_eigenvalue(p, sec, n, M) for n, M in basis.sites()})
    a = np.array(vals[SectorKind.TIME_FORWARD])
    b = np.array(vals[SectorKind.SPACE])
    return float(np.abs(a[:, None] - b[None, :]).min())
