import numpy as np
import pytest
from hypothesis import given, strategies as st

from dynframe.errors import IndexMismatch, NonConvergence, NotAFrame
from dynframe.frames import (
    Frame,
    FrameClass,
    analysis_matrix,
    canonical_dual,
    frame_bounds,
    frame_operator,
    frames_equivalent,
    inverse_frame_operator,
    iteration_rate,
    range_basis,
    range_projector,
    reconstruct,
    synthesis_matrix,
)

from conftest import MERCEDES, cgauss


def random_frame(rng, d, n):
    return Frame(cgauss(rng, n, d))


def test_analysis_matrix_conjugates_rows():
    F = Frame([[1j, 0.0], [0.0, 1.0]])
    x = np.array([2.0, 3j])
    np.testing.assert_allclose(analysis_matrix(F) @ x, [np.vdot(f, x) for f in F.vectors])
    np.testing.assert_allclose(synthesis_matrix(F), analysis_matrix(F).conj().T)


def test_standard_basis():
    F = Frame(np.eye(2))
    np.testing.assert_array_equal(analysis_matrix(F), np.eye(2))
    rep = frame_bounds(F)
    assert (rep.lower, rep.upper) == pytest.approx((1.0, 1.0), abs=1e-15)
    assert rep.classification is FrameClass.PARSEVAL
    np.testing.assert_allclose(canonical_dual(F).vectors, np.eye(2))
    np.testing.assert_allclose(range_projector(F), np.eye(2), atol=1e-15)


def test_mercedes_frame():
    F = Frame(MERCEDES)
    np.testing.assert_allclose(frame_operator(F), 1.5 * np.eye(2), atol=1e-15)
    rep = frame_bounds(F)
    assert rep.lower == pytest.approx(1.5, abs=1e-12)
    assert rep.upper == pytest.approx(1.5, abs=1e-12)
    assert rep.classification is FrameClass.FRAME
    np.testing.assert_allclose(canonical_dual(F).vectors, MERCEDES * 2 / 3, atol=1e-15)
    theta = analysis_matrix(F)
    np.testing.assert_allclose(range_projector(F), (2 / 3) * theta @ theta.conj().T, atol=1e-14)
    c = theta @ np.array([1.0, 0.0])
    np.testing.assert_allclose(c, [0.0, -np.sqrt(3) / 2, np.sqrt(3) / 2], atol=1e-15)
    np.testing.assert_allclose(reconstruct(F, c), [1.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(reconstruct(F, c, method="iterative"), [1.0, 0.0], atol=1e-12)
    scaled = Frame(MERCEDES * np.sqrt(2 / 3))
    assert frame_bounds(scaled).classification is FrameClass.PARSEVAL


def test_geometric_orbit_frame_operator():
    N = 12
    F = Frame(0.5 ** np.arange(N + 1)[:, None])
    assert frame_operator(F)[0, 0].real == pytest.approx(4 / 3 * (1 - 4.0 ** -(N + 1)), rel=1e-14)
    P = range_projector(F)
    v = 0.5 ** np.arange(N + 1)
    np.testing.assert_allclose(P, np.outer(v, v) / (v @ v), atol=1e-15)


def test_incomplete_and_bessel_only():
    rep = frame_bounds(Frame([[1.0, 0.0], [1.0, 0.0]]))
    assert rep.classification is FrameClass.INCOMPLETE
    assert rep.lower == pytest.approx(0.0, abs=1e-15) and rep.upper == pytest.approx(2.0)
    assert rep.condition == float("inf")
    nearly = frame_bounds(Frame([[1.0, 0.0], [0.0, 1e-12]]))
    assert nearly.classification is FrameClass.BESSEL_ONLY
    with pytest.raises(NotAFrame):
        canonical_dual(Frame([[1.0, 0.0]]))
    with pytest.raises(NotAFrame):
        reconstruct(Frame([[1.0, 0.0], [2.0, 0.0]]), [1.0, 2.0])


def test_lower_bound_keeps_relative_accuracy():
    F = Frame(np.diag([1.0, 1e-7]))
    rep = frame_bounds(F)
    assert rep.classification is FrameClass.FRAME
    assert rep.lower == pytest.approx(1e-14, rel=1e-12)


def test_frame_index_labels():
    F = Frame(np.eye(2), index=[(0,), (1,)])
    assert F.index == ((0,), (1,))
    with pytest.raises(IndexMismatch):
        Frame(np.eye(2), index=[0])
    with pytest.raises(IndexMismatch):
        reconstruct(Frame(np.eye(2)), [1.0, 2.0, 3.0])


def test_iterative_reconstruction_nonconvergence(rng):
    F = random_frame(rng, 3, 8)
    with pytest.raises(NonConvergence):
        reconstruct(F, analysis_matrix(F) @ np.ones(3), method="iterative", max_iter=2)
    with pytest.raises(ValueError):
        reconstruct(F, np.zeros(8), method="magic")


def test_iteration_rate_controls_error(rng):
    F = random_frame(rng, 3, 10)
    rep = frame_bounds(F)
    rate = iteration_rate(rep)
    assert rate == pytest.approx((rep.upper - rep.lower) / (rep.upper + rep.lower))
    x = cgauss(rng, 3)
    c = analysis_matrix(F) @ x
    relax = 2 / (rep.lower + rep.upper)
    xj = np.zeros(3, dtype=complex)
    for j in range(1, 15):
        xj = xj + relax * (synthesis_matrix(F) @ (c - analysis_matrix(F) @ xj))
        assert np.linalg.norm(xj - x) <= rate**j * np.linalg.norm(x) * (1 + 1e-9) + 1e-14


def test_equivalence_examples(rng):
    F = random_frame(rng, 3, 7)
    res = frames_equivalent(F, canonical_dual(F))
    assert res.equivalent
    np.testing.assert_allclose(res.witness, inverse_frame_operator(F), atol=1e-10)
    res2 = frames_equivalent(F, Frame(2 * F.vectors))
    np.testing.assert_allclose(res2.witness, 2 * np.eye(3), atol=1e-12)
    G = F.vectors.copy()
    G[0] = 0.0
    res3 = frames_equivalent(F, Frame(G))
    assert not res3.equivalent and not res3.witness_verdict and not res3.projector_verdict
    with pytest.raises(IndexMismatch):
        frames_equivalent(F, Frame(F.vectors, index=[f"w{i}" for i in range(7)]))
    with pytest.raises(NotAFrame):
        frames_equivalent(F, Frame(np.zeros((7, 3))))


def test_equivalence_across_dimensions(rng):
    F = random_frame(rng, 2, 6)
    G = random_frame(rng, 3, 6)
    res = frames_equivalent(F, G)
    assert not res.equivalent
    assert res.witness.shape == (3, 2)
    U = np.linalg.qr(cgauss(rng, 2, 2))[0]
    res2 = frames_equivalent(F, Frame(F.vectors @ U.T))
    assert res2.equivalent and res2.projector_distance < 1e-12


def test_range_basis_is_orthonormal(rng):
    F = random_frame(rng, 3, 9)
    Q = range_basis(F)
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(3), atol=1e-12)
    theta = analysis_matrix(F)
    qr_basis = np.linalg.qr(theta)[0]
    np.testing.assert_allclose(Q @ Q.conj().T, qr_basis @ qr_basis.conj().T, atol=1e-12)


frames = st.builds(
    lambda d, extra, seed: random_frame(np.random.default_rng(seed), d, d + extra),
    st.integers(1, 5),
    st.integers(0, 6),
    st.integers(0, 2**32 - 1),
)


@given(frames)
def test_trace_identity(F):
    S = frame_operator(F)
    outer_sum = sum(np.outer(f, f.conj()) for f in F.vectors)
    np.testing.assert_allclose(S, outer_sum, atol=1e-12)
    total = np.sum(np.abs(F.vectors) ** 2)
    assert np.trace(S).real == pytest.approx(total, rel=1e-12)
    assert np.sum(np.linalg.eigvalsh(S)) == pytest.approx(total, rel=1e-12)


@given(frames, st.integers(0, 2**32 - 1))
def test_frame_inequality_pointwise(F, seed):
    rep = frame_bounds(F)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        x = cgauss(rng, F.dim)
        x /= np.linalg.norm(x)
        energy = np.sum(np.abs(analysis_matrix(F) @ x) ** 2)
        assert rep.lower - 1e-9 <= energy <= rep.upper + 1e-9


@given(frames, st.integers(0, 2**32 - 1))
def test_reconstruction_methods_agree(F, seed):
    rep = frame_bounds(F)
    if not rep.classification.is_frame or rep.condition > 1e6:
        return
    x = cgauss(np.random.default_rng(seed), F.dim)
    c = analysis_matrix(F) @ x
    xd = reconstruct(F, c)
    xi = reconstruct(F, c, method="iterative", max_iter=200_000)
    assert np.linalg.norm(xd - x) <= 1e-8 * np.linalg.norm(x)
    assert np.linalg.norm(xi - xd) <= 1e-8 * np.linalg.norm(x)


@given(frames)
def test_projector_is_hermitian_idempotent(F):
    if not frame_bounds(F).classification.is_frame:
        return
    P = range_projector(F)
    assert np.linalg.norm(P @ P - P, 2) <= 1e-10
    assert np.linalg.norm(P - P.conj().T, 2) <= 1e-12
    assert round(np.trace(P).real) == F.dim


@given(frames, st.integers(0, 2**32 - 1))
def test_equivalence_witnesses_compose(F, seed):
    if frame_bounds(F).condition > 1e6:
        return
    rng = np.random.default_rng(seed)
    d = F.dim
    A, B = cgauss(rng, d, d) + 3 * np.eye(d), cgauss(rng, d, d) + 3 * np.eye(d)
    G = Frame(F.vectors @ A.T)
    H = Frame(G.vectors @ B.T)
    tfg = frames_equivalent(F, G).witness
    tgh = frames_equivalent(G, H).witness
    tfh = frames_equivalent(F, H).witness
    np.testing.assert_allclose(tgh @ tfg, tfh, atol=1e-6 * np.linalg.norm(tfh))
