import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dynframe.errors import EmptyWindow
from dynframe.semigroup import (
    FiniteAbelian,
    FreeAbelian,
    NumericalSG,
    Product,
    Window,
    conductor,
    descriptor_from_json,
    enumerate_window,
    generator_shifts,
    interior,
    left_regular_adjoint,
    left_regular_matrix,
    multiplication_table,
    parse_window_spec,
    product,
    representable,
)


def brute_semigroup(gens, upto):
    out = {0}
    for n in range(1, upto + 1):
        if any(n - g in out for g in gens if n >= g):
            out.add(n)
    return out


@pytest.mark.parametrize(
    "gens, cond",
    [((2, 3), 2), ((3, 5), 8), ((6, 9, 20), 44), ((1,), 0), ((4, 6), 4), ((5, 7), 24)],
)
def test_conductor(gens, cond):
    assert conductor(gens) == cond


def test_representable_matches_brute_force():
    table = representable((3, 7, 11), 80)
    assert set(np.nonzero(table)[0]) == brute_semigroup((3, 7, 11), 80)


def test_box_and_total_degree_windows():
    d = FreeAbelian(2)
    W = enumerate_window(d, "box:3")
    assert len(W) == 16 and W.elements[0] == (0, 0)
    assert W.elements[:4] == ((0, 0), (0, 1), (1, 0), (0, 2))
    assert len(enumerate_window(d, {"total_degree": 3})) == 10
    assert len(enumerate_window(d, "box:2,4")) == 15
    with pytest.raises(ValueError):
        enumerate_window(d, {"box": [1, 2, 3]})


def test_numerical_window():
    W = enumerate_window(NumericalSG((2, 3)), "cap:10")
    assert [e[0] for e in W.elements] == [0, 2, 3, 4, 5, 6, 7, 8, 9, 10]


def test_product_window_enumerates_full_group():
    desc = Product(FiniteAbelian((3,)), FreeAbelian(1))
    W = enumerate_window(desc, "box:4")
    assert len(W) == 15
    assert W.elements[:5] == ((0, 0), (0, 1), (0, 2), (0, 3), (0, 4))


def test_window_validation():
    d = FreeAbelian(1)
    with pytest.raises(ValueError, match="lower set"):
        Window(d, ((0,), (2,)))
    with pytest.raises(EmptyWindow):
        Window(d, ((1,), (0,)))
    with pytest.raises(EmptyWindow):
        Window(d, ())
    with pytest.raises(ValueError):
        Window(d, ((0,), (0,)))
    W = Window.from_elements(d, [2, 0, 1])
    assert W.elements == ((0,), (1,), (2,))


def test_parse_window_spec():
    assert parse_window_spec("box:3,5") == {"box": [3, 5]}
    assert parse_window_spec("total-degree:6") == {"total_degree": 6}
    assert parse_window_spec({"cap": 30}) == {"cap": 30}
    for bad in ("ball:3", "box:", {"box": 1, "cap": 2}, 7):
        with pytest.raises(ValueError):
            parse_window_spec(bad)


def test_descriptor_json_roundtrip():
    desc = product(FiniteAbelian((2, 3)), FreeAbelian(2))
    assert descriptor_from_json(desc.to_json()) == desc
    assert descriptor_from_json({"kind": "numerical", "generators": [2, 3]}) == NumericalSG((2, 3))
    with pytest.raises(ValueError):
        descriptor_from_json({"kind": "free_group"})


def test_numerical_factorize_recomposes():
    d = NumericalSG((3, 5, 7))
    for n in range(0, 40):
        if representable((3, 5, 7), n)[n]:
            assert sum(c * g for c, g in zip(d.factorize((n,)), (3, 5, 7))) == n


def test_shift_on_z_plus():
    W = enumerate_window(FreeAbelian(1), "box:3")
    L = left_regular_matrix((1,), W)
    np.testing.assert_array_equal(L, np.eye(4, k=-1))
    assert list(interior(W, (1,))) == [0, 1, 2]


def test_finite_group_shift_is_cyclic_permutation():
    W = enumerate_window(FiniteAbelian((4,)), "box:0")
    L = left_regular_matrix((1,), W)
    np.testing.assert_array_equal(np.linalg.matrix_power(L, 4), np.eye(4))


def test_product_shift_is_kronecker():
    g, f = FiniteAbelian((3,)), FreeAbelian(1)
    W = enumerate_window(Product(g, f), "box:4")
    Wg, Wf = enumerate_window(g, "box:0"), enumerate_window(f, "box:4")
    for a, n in itertools.product(range(3), range(5)):
        np.testing.assert_array_equal(
            left_regular_matrix((a, n), W),
            np.kron(left_regular_matrix((a,), Wg), left_regular_matrix((n,), Wf)),
        )


def windows():
    free = st.builds(
        lambda k, cap: enumerate_window(FreeAbelian(k), {"box": cap}), st.integers(1, 2), st.integers(0, 4)
    )
    tdeg = st.builds(
        lambda k, n: enumerate_window(FreeAbelian(k), {"total_degree": n}), st.integers(1, 3), st.integers(0, 4)
    )
    num = st.builds(
        lambda gens, cap: enumerate_window(NumericalSG(gens), {"cap": cap}),
        st.sampled_from([(2, 3), (3, 5), (2, 5, 7)]),
        st.integers(0, 14),
    )
    hybrid = st.builds(
        lambda n, cap: enumerate_window(Product(FiniteAbelian((n,)), FreeAbelian(1)), {"box": cap}),
        st.integers(2, 3),
        st.integers(0, 3),
    )
    return st.one_of(free, tdeg, num, hybrid)


@given(windows(), st.data())
def test_truncated_shifts_are_multiplicative(W, data):
    s = data.draw(st.sampled_from(W.elements))
    t = data.draw(st.sampled_from(W.elements))
    st_ = W.descriptor.mult(s, t)
    lhs = left_regular_matrix(s, W) @ left_regular_matrix(t, W)
    np.testing.assert_array_equal(lhs, left_regular_matrix(st_, W))


@given(windows(), st.data())
def test_adjoint_is_transpose(W, data):
    s = data.draw(st.sampled_from(W.elements))
    np.testing.assert_array_equal(left_regular_adjoint(s, W), left_regular_matrix(s, W).T)


@given(windows())
def test_multiplication_table_matches_dictionary_lookup(W):
    table = multiplication_table(W)
    for i, a in enumerate(W.elements):
        for j, b in enumerate(W.elements):
            assert table[i, j] == W.index.get(W.descriptor.mult(a, b), -1)


@given(windows())
def test_predecessor_chain(W):
    gens = W.descriptor.generators()
    for w in W.elements[1:]:
        i, v = W.predecessor(w)
        assert W.descriptor.mult(gens[i], v) == w
        assert W.position(v) < W.position(w)
    assert len(generator_shifts(W)) == len(gens)
