"""Constant tensors of the deformed 3d Euclidean / 4d Minkowski geometry.

Component order is fixed project-wide: space indices ("+", "-", "3"), spacetime
indices ("+", "-", "3", "0").  Four-index tensors T^{ab}_{cd} are stored as
ndarrays of shape (d,d,d,d) indexed [a,b,c,d]; the matrix view flattens the
pair indices row-major, so rows/columns line up with nested-array JSON dumps.

The metric is not symmetric, so the contraction order in raising/lowering
matters.  The convention, applied slot by slot, is "new index first":

    T^A = g^{AB} T_B        T_A = g_{AB} T^B

which round-trips exactly because g_{AB} g^{BC} = delta_A^C.
"""

from functools import lru_cache

import numpy as np

from .qnum import DeformationParams

IDX3 = ("+", "-", "3")
IDX4 = ("+", "-", "3", "0")
C3 = {"+": 0, "-": 1, "3": 2}
C4 = {"+": 0, "-": 1, "3": 2, "0": 3}


def metric3(p: DeformationParams) -> np.ndarray:
    """Euclidean metric g_AB; the contravariant g^AB has identical entries."""
    q = p.q
    g = np.zeros((3, 3))
    g[C3["+"], C3["-"]] = -q
    g[C3["-"], C3["+"]] = -1.0 / q
    g[C3["3"], C3["3"]] = 1.0
    return g


def metric4(p: DeformationParams) -> np.ndarray:
    """Minkowski metric eta_ab (= eta^ab)."""
    q = p.q
    e = np.zeros((4, 4))
    e[C4["+"], C4["-"]] = -q
    e[C4["-"], C4["+"]] = -1.0 / q
    e[C4["3"], C4["3"]] = 1.0
    e[C4["0"], C4["0"]] = -1.0
    return e


def _epsilon3_base(p: DeformationParams) -> np.ndarray:
    """eps[A,B,C] = eps_{AB}^C, the native (lower, lower, upper) components."""
    q = p.q
    P, M, T = C3["+"], C3["-"], C3["3"]
    e = np.zeros((3, 3, 3))
    e[P, M, T] = q
    e[M, P, T] = -q
    e[T, T, T] = 1.0 - q * q
    e[P, T, P] = 1.0
    e[T, P, P] = -q * q
    e[M, T, M] = -q * q
    e[T, M, M] = 1.0
    return e


def _move_slot(t: np.ndarray, slot: int, g: np.ndarray) -> np.ndarray:
    """Contract metric g into tensor slot `slot` with the new index first."""
    return np.tensordot(g, t, axes=([1], [slot])).transpose(
        _restore_order(t.ndim, slot)
    )


def _restore_order(ndim, slot):
    # tensordot puts the new index first; rotate it back into position `slot`.
    order = list(range(1, ndim))
    order.insert(slot, 0)
    return order


@lru_cache(maxsize=None)
def _epsilon3_cached(q: float, pattern: str) -> np.ndarray:
    p = DeformationParams(q)
    g = metric3(p)
    t = _epsilon3_base(p)
    native = "llu"
    for slot, (want, have) in enumerate(zip(pattern, native)):
        if want != have:
            t = _move_slot(t, slot, g)  # g_AB and g^AB coincide numerically
    t.setflags(write=False)
    return t


def epsilon3(p: DeformationParams, pattern: str = "llu") -> np.ndarray:
    """epsilon tensor with the requested variance per slot ('l' or 'u').

    pattern "llu" is the native form eps_{AB}^C; any other combination is
    produced by raising/lowering with the metric.
    """
    if len(pattern) != 3 or any(c not in "lu" for c in pattern):
        raise ValueError(f"bad variance pattern {pattern!r}")
    return _epsilon3_cached(p.q, pattern)


def circ3(x, y, p: DeformationParams):
    """Invariant 3d product x o y = g_AB x^A y^B = x3 y3 - q x+ y- - (1/q) x- y+.

    Components are ordered (+, -, 3).  Works for numbers and for operators
    (square matrices), preserving the x-then-y factor order.
    """
    xp, xm, x3 = x
    yp, ym, y3 = y
    if hasattr(xp, "ndim") and getattr(xp, "ndim", 0) == 2:
        return x3 @ y3 - p.q * (xp @ ym) - (1.0 / p.q) * (xm @ yp)
    return x3 * y3 - p.q * xp * ym - (1.0 / p.q) * xm * yp


def dot4(x, y, p: DeformationParams):
    """4d product x.y = x0 y0 - x3 y3 + q x+ y- + (1/q) x- y+ = -eta_ab x^a y^b."""
    xp, xm, x3, x0 = x
    yp, ym, y3, y0 = y
    return x0 * y0 - x3 * y3 + p.q * xp * ym + (1.0 / p.q) * xm * yp


def pair_matrix(t: np.ndarray) -> np.ndarray:
    """Flatten T[a,b,c,d] to a matrix on pair indices, row-major."""
    d = t.shape[0]
    return t.reshape(d * d, d * d)


def from_pair_matrix(m: np.ndarray, d: int) -> np.ndarray:
    return m.reshape(d, d, d, d)


def build_rhat3(p: DeformationParams) -> np.ndarray:
    """3d R-hat, shape (3,3,3,3):

    R^{AB}_{CD} = delta^A_C delta^B_D - q^-4 eps^{FAB} eps_{FDC}
                  - q^-4 (q^2-1) g^{AB} g_{CD}
    """
    q = p.q
    g = metric3(p)
    euuu = epsilon3(p, "uuu")
    elll = epsilon3(p, "lll")
    delta = np.einsum("ac,bd->abcd", np.eye(3), np.eye(3))
    term2 = np.einsum("fab,fdc->abcd", euuu, elll)
    term3 = np.einsum("ab,cd->abcd", g, g)
    return delta - q**-4 * term2 - q**-4 * (q * q - 1.0) * term3


def _identity4() -> np.ndarray:
    return np.einsum("ac,bd->abcd", np.eye(4), np.eye(4))


def build_projectors4(p: DeformationParams) -> dict[str, np.ndarray]:
    """Projectors P_plus, P_minus, P_T, P_S, P_A on 4d index pairs.

    P_plus / P_minus / P_T are transcribed from their block tables (blocks
    00, A0, 0B, AB over rows and 00, C0, 0D, CD over columns); P_S is the
    completeness remainder and P_A = P_plus + P_minus.  Idempotence,
    orthogonality and completeness are numeric invariants of the test suite,
    which is what guards the transcription.
    """
    q = p.q
    z = C4["0"]
    D = (1.0 + q * q) ** 2
    g3 = metric3(p)
    ellu = epsilon3(p, "llu")
    elll = epsilon3(p, "lll")
    # w[A,B,C] = g^{EB} g^{FA} eps_{FEC}
    w = np.einsum("eb,fa,fec->abc", g3, g3, elll)
    # zt[A,B,C,D] = eps_{DC}^E g^{SB} g^{RA} eps_{RSE}
    zt = np.einsum("dce,sb,ra,rse->abcd", ellu, g3, g3, elll)

    pp = np.zeros((4, 4, 4, 4))
    pm = np.zeros((4, 4, 4, 4))
    for A in range(3):
        for C in range(3):
            pp[A, z, C, z] = (q * q / D) * (A == C)
            pp[A, z, z, C] = (-1.0 / D) * (A == C)
            pp[z, A, C, z] = (-(q**4) / D) * (A == C)
            pp[z, A, z, C] = (q * q / D) * (A == C)
            pm[A, z, C, z] = (q * q / D) * (A == C)
            pm[A, z, z, C] = (-(q**4) / D) * (A == C)
            pm[z, A, C, z] = (-1.0 / D) * (A == C)
            pm[z, A, z, C] = (q * q / D) * (A == C)
            for B in range(3):
                pp[A, z, C, B] = ellu[B, C, A] / D  # column pair (C,D): D->B here
                pm[A, z, C, B] = -q * q * ellu[B, C, A] / D
                pp[z, A, C, B] = -q * q * ellu[B, C, A] / D
                pm[z, A, C, B] = ellu[B, C, A] / D
    # blocks with row pair (A,B) spatial
    for A in range(3):
        for B in range(3):
            for C in range(3):
                pp[A, B, C, z] = (q * q / D) * w[A, B, C]
                pp[A, B, z, C] = (-1.0 / D) * w[A, B, C]
                pm[A, B, C, z] = (-1.0 / D) * w[A, B, C]
                pm[A, B, z, C] = (q * q / D) * w[A, B, C]
                for Dd in range(3):
                    pp[A, B, C, Dd] = zt[A, B, C, Dd] / D
                    pm[A, B, C, Dd] = zt[A, B, C, Dd] / D

    pt = np.zeros((4, 4, 4, 4))
    c = q * q / D
    pt[z, z, z, z] = c
    for C in range(3):
        for Dd in range(3):
            pt[z, z, C, Dd] = -c * g3[C, Dd]
            pt[C, Dd, z, z] = -c * g3[C, Dd]
            for A in range(3):
                for B in range(3):
                    pt[A, B, C, Dd] = c * g3[A, B] * g3[C, Dd]

    ps = _identity4() - pt - pp - pm
    return {
        "P_plus": pp,
        "P_minus": pm,
        "P_T": pt,
        "P_S": ps,
        "P_A": pp + pm,
    }


def build_rmatrix4(p: DeformationParams, variant: str) -> np.ndarray:
    """4d R-hat, variant "I" or "II", from the projector decomposition."""
    pr = build_projectors4(p)
    q2 = p.q * p.q
    if variant == "I":
        return pr["P_S"] + pr["P_T"] - q2 * pr["P_plus"] - pr["P_minus"] / q2
    if variant == "II":
        return pr["P_S"] / q2 + q2 * pr["P_T"] - pr["P_plus"] - pr["P_minus"]
    raise ValueError(f"unknown R-matrix variant {variant!r}")


def build_rmatrix4_inverse(p: DeformationParams, variant: str = "II") -> np.ndarray:
    """Inverse of the variant-II R-hat (reciprocal eigenvalues on each projector)."""
    if variant != "II":
        raise ValueError("only the variant-II inverse is provided")
    pr = build_projectors4(p)
    q2 = p.q * p.q
    return q2 * pr["P_S"] + pr["P_T"] / q2 - pr["P_plus"] - pr["P_minus"]


def epsilon4(p: DeformationParams) -> np.ndarray:
    """4d epsilon tensor eps^{ab}_{cd} = P_plus - P_minus."""
    pr = build_projectors4(p)
    return pr["P_plus"] - pr["P_minus"]


def braid_residual(rhat: np.ndarray) -> float:
    """Max-entry residual of (R x 1)(1 x R)(R x 1) - (1 x R)(R x 1)(1 x R)."""
    d = rhat.shape[0]
    m = pair_matrix(rhat)
    eye = np.eye(d)
    r12 = np.kron(m, eye)
    r23 = np.kron(eye, m)
    return float(np.abs(r12 @ r23 @ r12 - r23 @ r12 @ r23).max())


def named_tensor(p: DeformationParams, name: str) -> np.ndarray:
    """Lookup used by the CLI dump command."""
    simple = {
        "g3": lambda: metric3(p),
        "eta": lambda: metric4(p),
        "epsilon3": lambda: np.asarray(epsilon3(p, "llu")),
        "rhat3": lambda: build_rhat3(p),
        "R_I": lambda: build_rmatrix4(p, "I"),
        "R_II": lambda: build_rmatrix4(p, "II"),
        "R_II_inv": lambda: build_rmatrix4_inverse(p),
        "epsilon4": lambda: epsilon4(p),
    }
    if name in simple:
        return simple[name]()
    projectors = build_projectors4(p)
    if name in projectors:
        return projectors[name]
    raise KeyError(f"unknown tensor {name!r}; choose from "
                   f"{sorted(simple) + sorted(projectors)}")
