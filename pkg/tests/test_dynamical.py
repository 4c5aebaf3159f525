import numpy as np
import pytest
from hypothesis import given, strategies as st

from dynframe.dynamical import (
    OperatorTuple,
    OrbitClass,
    classify_orbit,
    orbit_frame,
    random_commuting_tuple,
    rep_apply,
    rep_matrix,
    tail_mass,
)
from dynframe.errors import CommutationViolated, NotCertifiable
from dynframe.frames import frame_operator
from dynframe.semigroup import FreeAbelian, NumericalSG, enumerate_window

from conftest import cgauss


def test_rep_apply_examples():
    T = OperatorTuple.single(np.array([[0.5]]))
    assert rep_apply(T, 3, [1.0])[0] == pytest.approx(0.125)
    T2 = OperatorTuple.free(np.diag([0.5, 0.3]), np.diag([0.2, 0.4]))
    np.testing.assert_allclose(rep_apply(T2, (1, 2), [1, 1]), [0.02, 0.048])
    np.testing.assert_allclose(rep_apply(T2, (0, 0), [1j, 2]), [1j, 2])
    with pytest.raises(ValueError):
        rep_apply(T2, (-1, 0), [1, 1])


def test_orbit_frame_examples():
    T = OperatorTuple.single(np.array([[0.5]]))
    F = orbit_frame(T, [1.0], enumerate_window(T.descriptor, "box:2"))
    np.testing.assert_allclose(F.vectors[:, 0], [1, 0.5, 0.25])
    T2 = OperatorTuple.single(np.diag([0.5, 0.3]))
    F2 = orbit_frame(T2, [1, 1], enumerate_window(T2.descriptor, "box:1"))
    np.testing.assert_allclose(F2.vectors, [[1, 1], [0.5, 0.3]])
    with pytest.raises(ValueError):
        orbit_frame(T2, [0, 0], enumerate_window(T2.descriptor, "box:1"))
    with pytest.raises(ValueError):
        orbit_frame(T2, [1, 1], enumerate_window(FreeAbelian(2), "box:1"))


def test_tuple_validation():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(CommutationViolated):
        OperatorTuple.free(A, A.T)
    with pytest.raises(ValueError, match="U\\^3"):
        OperatorTuple.hybrid([np.diag([1.0, 1j])], [3], [np.eye(2) * 0.5])
    with pytest.raises(ValueError):
        OperatorTuple.free(np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        OperatorTuple(FreeAbelian(2), (np.eye(2),))
    T = OperatorTuple.hybrid([np.diag([1.0, -1.0])], [2], [np.diag([0.5, 0.3])])
    assert T.orders == (2,) and len(T.A) == 1 and len(T.U) == 1


def test_hybrid_representation_uses_group_modulus():
    U = np.diag([1.0, 1j, -1.0])
    A = np.diag([0.5, 0.4, 0.3])
    T = OperatorTuple.hybrid([U], [4], [A])
    np.testing.assert_allclose(rep_matrix(T, (3, 2)), np.linalg.matrix_power(U, 3) @ A @ A)
    W = enumerate_window(T.descriptor, "box:3")
    F = orbit_frame(T, np.ones(3), W)
    for pos, w in enumerate(W.elements):
        np.testing.assert_allclose(F.vectors[pos], rep_apply(T, w, np.ones(3)), atol=1e-14)


def test_numerical_representation():
    A = np.array([[0.5, 1.0], [0.0, 0.4]])
    T = OperatorTuple.numerical(A, (2, 3))
    np.testing.assert_allclose(rep_matrix(T, 7), np.linalg.matrix_power(A, 7), atol=1e-14)
    with pytest.raises(ValueError):
        rep_matrix(T, 1)
    W = enumerate_window(T.descriptor, "cap:12")
    F = orbit_frame(T, [1.0, 1.0], W)
    for pos, (n,) in enumerate(W.elements):
        np.testing.assert_allclose(F.vectors[pos], np.linalg.matrix_power(A, n) @ [1, 1], atol=1e-14)
    with pytest.raises(CommutationViolated):
        OperatorTuple(NumericalSG((2, 3)), (np.diag([0.25, 0.16]), np.diag([0.125, 0.1])))


@pytest.mark.parametrize("N", [0, 3, 10, 25])
def test_tail_mass_geometric(N):
    T = OperatorTuple.single(np.array([[0.5]]))
    W = enumerate_window(T.descriptor, {"box": N})
    assert tail_mass(T, [1.0], W).tau == pytest.approx(4 / 3 * 4.0 ** -(N + 1), rel=1e-12)


def test_tail_mass_nilpotent_and_identity():
    J = np.eye(3, k=-1)
    T = OperatorTuple.single(J)
    assert tail_mass(T, [1, 0, 0], enumerate_window(T.descriptor, "box:3")).tau == 0.0
    T1 = OperatorTuple.single(np.eye(1))
    with pytest.raises(NotCertifiable):
        tail_mass(T1, [1.0], enumerate_window(T1.descriptor, "box:50"))


def test_tail_mass_numerical_cap_too_small():
    T = OperatorTuple.numerical(np.array([[0.5]]), (3, 5))
    with pytest.raises(NotCertifiable):
        tail_mass(T, [1.0], enumerate_window(T.descriptor, "cap:8"))
    tau = tail_mass(T, [1.0], enumerate_window(T.descriptor, "cap:12")).tau
    true = sum(0.25**n for n in range(13, 400))
    assert tau >= true * (1 - 1e-12)


def test_tail_mass_finite_group_only():
    from dynframe.semigroup import FiniteAbelian

    T = OperatorTuple(FiniteAbelian((3,)), (np.diag(np.exp(2j * np.pi * np.arange(3) / 3)),))
    W = enumerate_window(T.descriptor, "box:0")
    assert tail_mass(T, np.ones(3), W).tau == 0.0
    assert classify_orbit(T, np.ones(3), W).classification is OrbitClass.FRAME


def test_classify_diagonal_closed_form():
    a = np.array([0.5, 0.3])
    xi = np.array([1.0, 1.0])
    T = OperatorTuple.single(np.diag(a))
    W = enumerate_window(T.descriptor, "box:40")
    diag = classify_orbit(T, xi, W)
    assert diag.classification is OrbitClass.FRAME
    S = frame_operator(orbit_frame(T, xi, W))
    closed = np.outer(xi, xi.conj()) / (1 - np.outer(a, a.conj()))
    np.testing.assert_allclose(S, closed, atol=1e-10)
    assert diag.spectral_radii == pytest.approx((0.5,))


def test_classify_examples():
    T = OperatorTuple.single(np.diag([0.5, 0.5]))
    d = classify_orbit(T, [1, 0], enumerate_window(T.descriptor, "box:40"))
    assert d.classification is OrbitClass.BESSEL_NOT_COMPLETE and d.krylov_rank == 1
    T1 = OperatorTuple.single(np.eye(1))
    d1 = classify_orbit(T1, [1.0], enumerate_window(T1.descriptor, "box:20"))
    assert d1.classification is OrbitClass.NOT_BESSEL and d1.upper == np.inf
    T2 = OperatorTuple.single(np.eye(2))
    d2 = classify_orbit(T2, [1, 1], enumerate_window(T2.descriptor, "box:5"))
    assert d2.classification is OrbitClass.UNDECIDED


def test_random_tuple_properties():
    for scheme in ("poly", "triangular", "diagonal"):
        for k in (1, 2, 3):
            T = random_commuting_tuple(5, k, 0.8, scheme, seed=11)
            T2 = random_commuting_tuple(5, k, 0.8, scheme, seed=11)
            for A, B in zip(T.matrices, T2.matrices):
                np.testing.assert_array_equal(A, B)
            for A in T.A:
                assert np.max(np.abs(np.linalg.eigvals(A))) <= 0.8 * (1 + 1e-12)
            for i in range(k):
                for j in range(i):
                    Ai, Aj = T.matrices[i], T.matrices[j]
                    gap = np.linalg.norm(Ai @ Aj - Aj @ Ai, 2)
                    assert gap <= 1e-12 * np.linalg.norm(Ai, 2) * np.linalg.norm(Aj, 2)
    D = random_commuting_tuple(4, 1, 0.7, "diagonal", seed=1).A[0]
    np.testing.assert_array_equal(D, np.diag(np.diag(D)))
    assert np.all(np.abs(np.diag(D)) <= 0.7)
    with pytest.raises(ValueError):
        random_commuting_tuple(3, 1, 1.0)
    with pytest.raises(ValueError):
        random_commuting_tuple(3, 1, 0.5, scheme="jordan")


def test_random_hybrid_tuple():
    T = random_commuting_tuple(6, 2, 0.8, "poly", seed=3, group_orders=(3,))
    (U,) = T.U
    np.testing.assert_allclose(np.linalg.matrix_power(U, 3), np.eye(6), atol=1e-12)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(6), atol=1e-12)
    for A in T.A:
        assert np.linalg.norm(A @ U - U @ A, 2) <= 1e-12 * np.linalg.norm(A, 2)


@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_orbit_dp_matches_direct_powers(d, k, seed):
    T = random_commuting_tuple(d, k, 0.9, "poly", seed=seed)
    W = enumerate_window(T.descriptor, {"total_degree": 5})
    xi = cgauss(np.random.default_rng(seed), d)
    F = orbit_frame(T, xi, W)
    for pos, w in enumerate(W.elements):
        direct = rep_apply(T, w, xi)
        assert np.linalg.norm(F.vectors[pos] - direct) <= 1e-12 * max(np.linalg.norm(direct), 1e-300) + 1e-15


@given(st.integers(1, 4), st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_tail_mass_is_an_upper_bound(d, k, seed):
    T = random_commuting_tuple(d, k, 0.7, "poly", seed=seed)
    xi = cgauss(np.random.default_rng(seed), d)
    cap = 8 if k == 1 else 4
    W = enumerate_window(T.descriptor, {"box": cap})
    try:
        tau = tail_mass(T, xi, W).tau
    except NotCertifiable:
        return
    big = enumerate_window(T.descriptor, {"box": 160 if k == 1 else 60})
    F = orbit_frame(T, xi, big)
    outside = [i for i, w in enumerate(big.elements) if max(w) > cap]
    partial = float(np.sum(np.abs(F.vectors[outside]) ** 2))
    assert tau >= partial * (1 - 1e-9)


def _gram_partial_sum(A, terms_log2):
    G = np.eye(A.shape[0], dtype=complex)
    P = A.copy()
    for _ in range(terms_log2):
        with np.errstate(over="ignore", invalid="ignore"):
            G = G + P.conj().T @ G @ P
            P = P @ P
        if not np.all(np.isfinite(G)) or np.abs(G).max() > 1e200:
            return None
    return G


def test_single_operator_criterion_against_partial_sums():
    rng = np.random.default_rng(7)
    agree = 0
    for trial in range(100):
        d = 1 + trial % 6
        A = cgauss(rng, d, d)
        radius = rng.choice([0.3, 0.6, 0.9, 1.0, 1.1])
        A *= radius / np.max(np.abs(np.linalg.eigvals(A)))
        xi = cgauss(rng, d)
        if trial % 4 == 3 and d > 1:
            xi = np.linalg.eig(A)[1][:, 0]
        T = OperatorTuple.single(A)
        diag = classify_orbit(T, xi, enumerate_window(T.descriptor, "box:60"))
        krylov = np.linalg.matrix_rank(np.stack([np.linalg.matrix_power(A, j) @ xi for j in range(d)], 1), tol=1e-9 * np.linalg.norm(xi))
        # 2^17 > 10^5 terms by doubling
        G16, G17 = _gram_partial_sum(A, 16), _gram_partial_sum(A, 17)
        converged = (
            G16 is not None and G17 is not None
            and abs(np.vdot(xi, G17 @ xi) - np.vdot(xi, G16 @ xi)) <= 1e-9 * abs(np.vdot(xi, G17 @ xi))
        )
        complete_and_summable = krylov == d and converged
        assert (diag.classification is OrbitClass.FRAME) == complete_and_summable, (trial, diag, krylov, converged)
        agree += 1
    assert agree == 100
