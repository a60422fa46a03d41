import numpy as np
import pytest
from numpy.testing import assert_allclose

from qmink.qnum import DeformationParams
from qmink import tensors as T

QS = [1.01, 1.1, 1.5]


def mat(t):
    return T.pair_matrix(t)


@pytest.mark.parametrize("q", QS)
def test_metric_inverse_both_orders(q):
    p = DeformationParams(q)
    g = T.metric3(p)
    assert_allclose(g @ g, np.eye(3), atol=1e-14)
    eta = T.metric4(p)
    assert_allclose(eta @ eta, np.eye(4), atol=1e-14)


def test_epsilon_components():
    p = DeformationParams(1.1)
    q = p.q
    e = T.epsilon3(p, "llu")
    i = T.C3
    expected = {
        ("+", "-", "3"): q,
        ("-", "+", "3"): -q,
        ("3", "3", "3"): 1 - q * q,
        ("+", "3", "+"): 1.0,
        ("3", "+", "+"): -q * q,
        ("-", "3", "-"): -q * q,
        ("3", "-", "-"): 1.0,
    }
    for a in "+-3":
        for b in "+-3":
            for c in "+-3":
                want = expected.get((a, b, c), 0.0)
                assert_allclose(e[i[a], i[b], i[c]], want, atol=1e-15)


@pytest.mark.parametrize("pattern", ["lll", "uuu", "luu", "ulu", "uul", "llu"])
def test_epsilon_raise_lower_round_trip(pattern):
    p = DeformationParams(1.3)
    g = T.metric3(p)
    e = np.asarray(T.epsilon3(p, pattern))
    for slot in range(3):
        down = T._move_slot(e, slot, g)
        back = T._move_slot(down, slot, g)
        assert_allclose(back, e, atol=1e-14)


def test_epsilon_lowering_matches_definition():
    # eps_ABC = g_CD eps_AB^D
    p = DeformationParams(1.2)
    g = T.metric3(p)
    e_llu = np.asarray(T.epsilon3(p, "llu"))
    e_lll = np.asarray(T.epsilon3(p, "lll"))
    manual = np.einsum("cd,abd->abc", g, e_llu)
    assert_allclose(e_lll, manual, atol=1e-15)


def test_circ3_scalar_values():
    p = DeformationParams(1.1)
    assert_allclose(T.circ3((0, 0, 1), (0, 0, 1), p), 1.0)
    assert_allclose(T.circ3((1, 0, 0), (0, 1, 0), p), -p.q)


def test_dot4_values():
    p = DeformationParams(1.1)
    assert_allclose(T.dot4((0, 0, 0, 1), (0, 0, 0, 1), p), 1.0)
    assert_allclose(T.dot4((0, 0, 1, 0), (0, 0, 1, 0), p), -1.0)
    assert_allclose(T.dot4((1, 0, 0, 0), (0, 1, 0, 0), p), p.q)


def test_rhat3_entry_and_braid():
    p = DeformationParams(1.1)
    q = p.q
    r = T.build_rhat3(p)
    want = 1 - q**-4 * (1 - q * q) ** 2 - q**-4 * (q * q - 1)
    assert_allclose(r[2, 2, 2, 2], want, rtol=1e-14)
    assert T.braid_residual(r) <= 1e-12


def test_rhat3_spectral_structure():
    # three distinct eigenvalues, eigenspace dimensions summing to 9; the
    # specific values are recorded, not asserted
    p = DeformationParams(1.1)
    ev = np.linalg.eigvals(mat(T.build_rhat3(p)))
    clusters = sorted(set(np.round(ev.real, 9)))
    assert len(clusters) == 3
    counts = [int(np.sum(np.isclose(ev.real, c, atol=1e-8))) for c in clusters]
    assert sum(counts) == 9


def test_rhat3_classical_limit_is_involutive():
    p = DeformationParams(1.0 + 1e-9)
    m = mat(T.build_rhat3(p))
    assert np.abs(m @ m - np.eye(9)).max() <= 1e-6


@pytest.mark.parametrize("q", QS)
def test_projector_identities(q):
    p = DeformationParams(q)
    pr = {k: mat(v) for k, v in T.build_projectors4(p).items()}
    names = ("P_plus", "P_minus", "P_T", "P_S")
    for nm in names:
        m = pr[nm]
        assert np.abs(m @ m - m).max() <= 1e-13
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            assert np.abs(pr[a] @ pr[b]).max() <= 1e-13
    total = sum(pr[nm] for nm in names)
    assert np.abs(total - np.eye(16)).max() <= 1e-13


def test_projector_traces_and_block_entry():
    p = DeformationParams(1.1)
    q = p.q
    pr = T.build_projectors4(p)
    for nm, rank in (("P_T", 1), ("P_plus", 3), ("P_minus", 3), ("P_S", 9)):
        assert_allclose(np.trace(mat(pr[nm])), rank, atol=1e-12)
    z = T.C4["0"]
    assert_allclose(pr["P_T"][z, z, z, z], q * q / (1 + q * q) ** 2, rtol=1e-14)


@pytest.mark.parametrize("q", QS)
def test_rmatrix4_braid_and_inverse(q):
    p = DeformationParams(q)
    r1 = T.build_rmatrix4(p, "I")
    r2 = T.build_rmatrix4(p, "II")
    assert T.braid_residual(r1) <= 1e-12
    assert T.braid_residual(r2) <= 1e-12
    prod = mat(r2) @ mat(T.build_rmatrix4_inverse(p))
    assert np.abs(prod - np.eye(16)).max() <= 1e-13


def test_rmatrix4_I_eigenvalues():
    p = DeformationParams(1.1)
    q = p.q
    ev = np.sort(np.linalg.eigvals(mat(T.build_rmatrix4(p, "I"))).real)
    expected = np.sort([1.0] * 10 + [-q * q] * 3 + [-1 / (q * q)] * 3)
    assert_allclose(ev, expected, atol=1e-12)


def test_epsilon4_properties():
    p = DeformationParams(1.1)
    pr = T.build_projectors4(p)
    e = mat(T.epsilon4(p))
    assert np.abs(e @ e - mat(pr["P_A"])).max() <= 1e-13
    assert abs(np.trace(e)) <= 1e-13
    assert np.abs(e @ mat(pr["P_T"])).max() <= 1e-13


def test_named_tensor_lookup():
    p = DeformationParams(1.1)
    assert T.named_tensor(p, "g3").shape == (3, 3)
    assert T.named_tensor(p, "P_T").shape == (4, 4, 4, 4)
    with pytest.raises(KeyError):
        T.named_tensor(p, "nope")
