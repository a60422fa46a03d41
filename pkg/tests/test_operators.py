import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qmink.qnum import DeformationParams, bracket, curly
from qmink.hilbert import (
    BasisLabel,
    Sector,
    SectorKind,
    TruncationWindow,
    enumerate_basis,
    x0_eigenvalue,
    xcircx_eigenvalue,
)
from qmink.operators import (
    NoRepresentationError,
    adjoint,
    audit_shifts,
    build_operators,
    build_p0,
    op_circ,
    reduced_p_table,
    reduced_r_table,
    reduced_r_table_recursive,
    reduced_s_table,
    reduced_x_table,
    reduced_x_table_closed,
    rho_from_rt,
    rho_partial_sum,
    rho_site,
)

P = DeformationParams(1.1)

MASSIVE = [SectorKind.SPACE, SectorKind.TIME_FORWARD, SectorKind.TIME_BACKWARD]


def small_basis(kind, jmax=3, nspan=5, Mspan=2):
    n_lo = 0 if kind.is_time else -nspan
    M_lo, M_hi = (0, 0) if kind is SectorKind.LIGHT else (-Mspan, Mspan)
    sec = Sector(kind, 1.0)
    return sec, enumerate_basis(sec, TruncationWindow(jmax, n_lo, nspan, M_lo, M_hi))


# ---------------------------------------------------------------------------
# rho and the X table


@pytest.mark.parametrize("kind", MASSIVE)
def test_x_table_two_routes_agree(kind):
    sec, basis = small_basis(kind)
    a = reduced_x_table(P, sec, basis)
    b = reduced_x_table_closed(P, sec, basis)
    keys = set(a.data) | set(b.data)
    assert keys
    for k in keys:
        assert abs(a.get(*k) - b.get(*k)) <= 1e-12


@pytest.mark.parametrize("kind", list(SectorKind))
def test_rho_partial_sum_matches_closed_form(kind):
    sec, basis = small_basis(kind, jmax=1)
    for n, M in basis.sites():
        t = x0_eigenvalue(P, sec, n, M)
        r2 = xcircx_eigenvalue(P, sec, n, M)
        for jp1 in range(1, 11):
            a = rho_partial_sum(P, r2, t, jp1)
            b = rho_from_rt(P, r2, t, jp1)
            c = rho_site(P, sec, n, M, jp1)
            assert abs(a - b) <= 1e-12 * (1.0 + abs(a))
            assert abs(b - c) <= 1e-12 * (1.0 + abs(b))


@pytest.mark.parametrize("kind", list(SectorKind))
def test_rho_nonpositive_on_admissible_levels(kind):
    sec, basis = small_basis(kind)
    for n, M in basis.sites():
        jtop = min(n, 6) if kind.is_time else 6
        for jp1 in range(1, jtop + 1):
            assert rho_site(P, sec, n, M, jp1) <= 1e-15


def test_time_like_top_rung_emits_no_uplink():
    sec, basis = small_basis(SectorKind.TIME_FORWARD)
    tab = reduced_x_table(P, sec, basis)
    # j = n: the (j+1 <- j) element would leave the lattice
    assert tab.get(3, 2, 0, 2, 2, 0) == 0.0
    assert abs(rho_site(P, sec, 2, 0, 3)) <= 1e-15


# ---------------------------------------------------------------------------
# R and S tables


def test_r_table_space_like_explicit_entry():
    sec, basis = small_basis(SectorKind.SPACE)
    tab = reduced_r_table(P, sec, basis)
    q, lam = P.q, P.lam
    br = lambda a: bracket(a, P)
    cu = lambda a: curly(a, P)
    n = 1
    want = (
        1.0 / (q * br(2) ** 2.5 * math.sqrt(br(3)) * lam)
        * math.sqrt(cu(n + 2) / cu(n))
    )
    got = tab.get(1, n + 1, 0, 0, n, 0)
    assert_allclose(got, want, rtol=1e-13)


def test_r_table_light_like_seeds():
    sec, basis = small_basis(SectorKind.LIGHT)
    tab = reduced_r_table(P, sec, basis)
    q, lam = P.q, P.lam
    base = 1.0 / (bracket(2, P) ** 2.5 * math.sqrt(bracket(3, P)) * lam)
    assert_allclose(tab.get(1, 0, 0, 0, -1, 0), base, rtol=1e-13)
    assert_allclose(tab.get(1, 0, 0, 0, 1, 0), -base / q**2, rtol=1e-13)
    assert_allclose(tab.get(0, 0, 0, 1, -1, 0), -base / q**6, rtol=1e-13)
    assert_allclose(tab.get(0, 0, 0, 1, 1, 0), base / q**4, rtol=1e-13)


def test_r_table_time_like_lattice_edge_vanishes():
    sec, basis = small_basis(SectorKind.TIME_FORWARD)
    tab = reduced_r_table(P, sec, basis)
    # <0, n=1 || R- || 1, n=2> down-link exists; the reverse down-link from
    # n=1 to a j=1, n=0 state does not (j <= n fails)
    assert tab.get(1, 0, 0, 0, 1, 0) == 0.0


@pytest.mark.parametrize("kind", MASSIVE)
def test_r_recursion_route_matches_closed_tables(kind):
    sec, basis = small_basis(kind, jmax=4, nspan=5)
    closed = reduced_r_table(P, sec, basis)
    rec = reduced_r_table_recursive(P, sec, basis, j_cap=3)
    assert rec.data
    for key, val in rec.items():
        assert abs(val - closed.get(*key)) <= 1e-11 * (1.0 + abs(val))


def test_s_table_light_conjugation_pairing(ops_light):
    p = ops_light.p
    g = {"+": ("-", -p.q), "-": ("+", -1.0 / p.q), "3": ("3", 1.0)}
    idx = ops_light.basis.interior_indices((1, 1, 1, 0))
    for A in "+-3":
        B, w = g[A]
        diff = adjoint(ops_light["R" + A]).mat + w * ops_light["S" + B].mat
        sub = abs(diff[idx][:, idx].toarray()).max() if len(idx) else 0.0
        assert sub <= 1e-12


# ---------------------------------------------------------------------------
# scalars, U, the scaling operator, P


def test_x0_examples(ops_time, ops_light):
    d = ops_time["X0"].mat.diagonal()
    i = ops_time.basis.index_of(BasisLabel(0, 0, 0, 0))
    assert_allclose(d[i], 1.0, rtol=1e-14)
    d = ops_light["X0"].mat.diagonal()
    i = ops_light.basis.index_of(BasisLabel(0, 0, -1, 0))
    assert_allclose(d[i], 1.0 / 1.1, rtol=1e-14)


@pytest.mark.parametrize("fixture", ["ops_space", "ops_time", "ops_light"])
def test_u_chain_normalization(fixture, request):
    ops = request.getfixturevalue(fixture)
    basis = ops.basis
    two = bracket(2, P)
    for lab in basis.labels:
        if lab.j != 0 or lab.m != 0:
            continue
        up = basis.get(lab.shifted(dn=1))
        if up is None:
            continue
        val = ops["U"].mat[up, basis.index_of(lab)]
        assert abs(abs(val) ** 2 - 1.0 / two**2) <= 1e-12


def test_u_time_like_top_rung_value(ops_time):
    basis = ops_time.basis
    br = lambda a: bracket(a, P)
    j = n = 2
    lab = BasisLabel(j, 0, n, 0)
    up = basis.index_of(lab.shifted(dn=1))
    want = math.sqrt(br(1) * br(2 * n + 2) / (br(n + 1) * br(n + 2))) / br(2)
    assert_allclose(ops_time["U"].mat[up, basis.index_of(lab)], want, rtol=1e-13)


def test_u_symmetric(ops_space):
    diff = ops_space["U"].mat - ops_space["U"].mat.T
    assert abs(diff.toarray()).max() <= 1e-14


@pytest.mark.parametrize("fixture", ["ops_space", "ops_time", "ops_light"])
def test_lambda_magnitude_everywhere(fixture, request):
    ops = request.getfixturevalue(fixture)
    vals = ops["Lam"].mat.tocoo().data
    assert len(vals)
    assert np.abs(np.abs(vals) - P.q**2).max() <= 1e-13


def test_lambda_adjoint_identity(ops_space):
    idx = ops_space.basis.interior_indices((0, 0, 0, 1))
    diff = adjoint(ops_space["Lam"]).mat - P.q**4 * ops_space["LamInv"].mat
    assert abs(diff[idx][:, idx].toarray()).max() <= 1e-13


def test_light_like_phases_keep_magnitude():
    sec = Sector(SectorKind.LIGHT, 1.0)
    win = TruncationWindow(1, -2, 2, 0, 0)
    ops = build_operators(P, sec, win, phases={n: 0.3 for n in range(-2, 2)},
                          include_rotations=False)
    vals = ops["Lam"].mat.tocoo().data
    assert np.abs(np.abs(vals) - P.q**2).max() <= 1e-13
    assert np.abs(vals.imag).max() > 0.1  # the phase is really there


def test_p0_time_like_example(ops_time):
    # j=0, n=0 -> 1 entry: -(i / 2 lam t0) (delta_{M+1} - delta_{M-1} q^4)
    basis = ops_time.basis
    ket = basis.index_of(BasisLabel(0, 0, 0, 0))
    up = basis.index_of(BasisLabel(0, 0, 1, 1))
    dn = basis.index_of(BasisLabel(0, 0, 1, -1))
    want_up = -0.5j / P.lam
    want_dn = 0.5j * P.q**4 / P.lam
    assert_allclose(ops_time["P0"].mat[up, ket], want_up, rtol=1e-13)
    assert_allclose(ops_time["P0"].mat[dn, ket], want_dn, rtol=1e-13)


def test_p0_space_like_no_j_truncation(ops_space):
    # {a} never vanishes: the up-link exists at every j
    basis = ops_space.basis
    ket = basis.index_of(BasisLabel(3, 0, 0, 0))
    up = basis.index_of(BasisLabel(3, 0, 1, 1))
    assert abs(ops_space["P0"].mat[up, ket]) > 0


def test_light_like_momenta_rejected(ops_light):
    assert not ops_light.has_momenta
    with pytest.raises(NoRepresentationError):
        reduced_p_table(P, ops_light.sector, ops_light.basis)
    with pytest.raises(NoRepresentationError):
        build_p0(P, ops_light.sector, ops_light.basis)
    with pytest.raises(NoRepresentationError):
        build_operators(P, ops_light.sector, ops_light.basis.window,
                        include_momenta=True)


# ---------------------------------------------------------------------------
# adjoints, products, shift audits


def test_adjoint_involution_and_x_conjugation(ops_space):
    xp = ops_space["X+"]
    assert abs((adjoint(adjoint(xp)).mat - xp.mat).toarray()).max() == 0.0
    assert abs((adjoint(ops_space["X0"]).mat - ops_space["X0"].mat).toarray()).max() \
        <= 1e-14
    diff = adjoint(xp).mat + P.q * ops_space["X-"].mat
    assert abs(diff.toarray()).max() <= 1e-13


def test_xcircx_consistency(ops_space):
    built = op_circ(ops_space.vector("X"), ops_space.vector("X"), P)
    idx = ops_space.basis.interior_indices((2, 2, 0, 0))
    diff = (built.mat - ops_space["XcircX"].mat)[idx][:, idx]
    assert abs(diff.toarray()).max() <= 1e-12


@pytest.mark.parametrize("kind", list(SectorKind))
def test_ground_radius_equals_rho(kind):
    sec, basis = small_basis(kind, jmax=2, nspan=3, Mspan=1)
    ops = build_operators(P, sec, basis.window, include_momenta=False,
                          include_rotations=False)
    xx = op_circ(ops.vector("X"), ops.vector("X"), P)
    for lab in basis.labels:
        if lab.j or lab.m or lab.M:
            continue
        if not basis.interior_indices((1, 1, 0, 0)).size:
            continue
        i = basis.index_of(lab)
        want = -P.q**2 * bracket(2, P) * rho_site(P, sec, lab.n, 0, 1)
        got = xx.mat[i, i]
        assert abs(got - want) <= 1e-11 * (1.0 + abs(want))


def test_rr_equals_ss(ops_time):
    rr = op_circ(ops_time.vector("R"), ops_time.vector("R"), P)
    ss = op_circ(ops_time.vector("S"), ops_time.vector("S"), P)
    idx = ops_time.basis.interior_indices((2, 2, 2, 0))
    diff = (rr.mat - ss.mat)[idx][:, idx]
    assert abs(diff.toarray()).max() <= 1e-10


def test_matprod_expansion_matches_operator_product(ops_space):
    # scalar product decomposition over reduced elements, diagonal in (j, m)
    p = P
    q = p.q
    basis = ops_space.basis
    xt = reduced_x_table(p, ops_space.sector, basis)
    rt = reduced_r_table(p, ops_space.sector, basis)
    xr = op_circ(ops_space.vector("X"), ops_space.vector("R"), p)
    br = lambda a: bracket(a, p)
    idx = set(basis.interior_indices((2, 2, 1, 0)).tolist())
    checked = 0
    for i in sorted(idx):
        lab = basis.labels[i]
        for dn in (1, -1):
            tgt = lab.shifted(dn=dn)
            k = basis.get(tgt)
            if k is None or k not in idx:
                continue
            j = lab.j
            mu = (tgt.n, tgt.M)
            nu = (lab.n, lab.M)
            want = (
                xt.get(j, *mu, j, *mu) * rt.get(j, *mu, j, *nu)
                * q * q * br(2 * j + 2) * br(2 * j) / br(2)
                - xt.get(j, *mu, j + 1, *mu) * rt.get(j + 1, *mu, j, *nu)
                * q * q * br(2 * j + 2) * br(2 * j + 3)
            )
            if j >= 1:
                want -= (
                    xt.get(j, *mu, j - 1, *mu) * rt.get(j - 1, *mu, j, *nu)
                    * q * q * br(2 * j) * br(2 * j - 1)
                )
            got = xr.mat[k, i]
            assert abs(got - want) <= 1e-10 * (1.0 + abs(want))
            checked += 1
    assert checked > 50


@pytest.mark.parametrize("fixture", ["ops_space", "ops_time", "ops_time_back",
                                     "ops_light"])
def test_shift_signature_audit(fixture, request):
    ops = request.getfixturevalue(fixture)
    for name, op in ops.items():
        bad = audit_shifts(op)
        assert not bad, f"{name}: {bad[:3]}"


# ---------------------------------------------------------------------------
# boosts in Pauli form, rotations, the compact algebra


def test_v_zero_component_and_sum_rule(ops_space):
    assert ops_space["V00"].mat.nnz == 0
    lhs = ops_space["V30"].mat + ops_space["V03"].mat
    rhs = (1 - P.q**2) * (ops_space["R3"].mat - ops_space["S3"].mat)
    assert abs((lhs - rhs).toarray()).max() <= 1e-12


def test_v_classical_limit_coefficients():
    p = DeformationParams(1.001)
    sec = Sector(SectorKind.SPACE, 1.0)
    ops = build_operators(p, sec, TruncationWindow(1, -2, 2, 0, 0),
                          include_momenta=False, include_rotations=False)
    diff = ops["V+0"].mat - (ops["R+"].mat + ops["S+"].mat)
    scale = max(abs(ops["V+0"].mat.toarray()).max(), 1.0)
    assert abs(diff.toarray()).max() <= 0.01 * scale


def test_tau3_and_t2_diagonals(ops_space):
    basis = ops_space.basis
    idx = basis.interior_indices((1, 0, 1, 0))
    tau3 = ops_space["tau3"].mat.diagonal()
    t2 = ops_space["T2"].mat.diagonal()
    for i in idx:
        lab = basis.labels[i]
        assert abs(tau3[i] - P.qpow(-4 * lab.m)) <= 1e-12 * (1 + P.qpow(-4 * lab.m))
        want = bracket(lab.j, P) * bracket(lab.j + 1, P)
        assert abs(t2[i] - want) <= 1e-10 * (1.0 + abs(want))


def test_n_gate_is_diagonal_and_positive(ops_space):
    # reconstruct the gate quantity and check it on the interior
    q = P.q
    n = ops_space["W"].mat + q * q * (1 - q * q) * ops_space["L3"].mat
    idx = ops_space.basis.interior_indices((1, 0, 1, 0))
    sub = n[idx][:, idx]
    off = sub - __import__("scipy.sparse", fromlist=["x"]).diags(sub.diagonal())
    assert (abs(off.data).max() if off.nnz else 0.0) <= 1e-10
    assert np.real(sub.diagonal()).min() > 0
