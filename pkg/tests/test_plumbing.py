from __future__ import annotations

import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qtop.compare import CORPUS, corpus_graph
from qtop.plumbing import (
    DegenerateMatrixError,
    GraphError,
    determinant,
    enumerate_omegas,
    enumerate_spin_spinc,
    h1_key,
    linking_pairing,
    load_graph,
    make_graph,
    mat_vec,
    omega_pairing,
    presentation,
    rational_inverse,
    rokhlin_mod4,
    signature,
    smith_form,
    weakly_negative_definite,
)

E8_FRAMINGS = (-2,) * 8
E8_EDGES = ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (2, 7))


def _matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def test_graph_examples():
    assert make_graph([-1]).B == [[-1]]
    g = make_graph([-2, -3], [[0, 1]])
    assert g.B == [[-2, 1], [1, -3]] and determinant(g.B) == 5
    with pytest.raises(GraphError, match="not a tree"):
        make_graph([-2, -2, -2], [[0, 1], [1, 2], [2, 0]])
    with pytest.raises(DegenerateMatrixError):
        make_graph([0])


def test_load_graph_round_trip_and_errors():
    g = corpus_graph("star2223")
    assert load_graph(g.to_json()) == g
    with pytest.raises(GraphError):
        load_graph("{not json")
    with pytest.raises(GraphError):
        load_graph(json.dumps({"vertices": [{"id": 1, "framing": -1}], "edges": []}))


def test_signature_examples():
    assert signature([[-1]]) == (0, 1)
    assert signature([[-2, 1], [1, -3]]) == (0, 2)
    assert signature([[3]]) == (1, 0)
    assert presentation([[0, 1], [1, 0]]).sigma == 0


def test_weakly_negative_definite():
    assert weakly_negative_definite(corpus_graph("chain322"))
    assert weakly_negative_definite(make_graph(E8_FRAMINGS, E8_EDGES))
    # central +1 vertex with three -1 legs: (B^{-1})_{00} = 1/4 > 0
    assert not weakly_negative_definite(make_graph([1, -1, -1, -1], [[0, 1], [0, 2], [0, 3]]))


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_smith_form_round_trip(name):
    B = corpus_graph(name).B
    U, D, W = smith_form(B)
    prod = _matmul(_matmul(U, B), W)
    assert prod == [[D[i] if i == j else 0 for j in range(len(B))] for i in range(len(B))]
    assert all(D[i + 1] % D[i] == 0 for i in range(len(D) - 1))


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_spinc_enumeration_counts_and_parity(name):
    g = corpus_graph(name)
    data = enumerate_spin_spinc(g.B)
    det = abs(determinant(g.B))
    assert len(data.h1) == len(data.spinc) == len(data.spinc_labels) == det
    assert len(enumerate_omegas(g.B, 2)) == det
    for b, s in data.spinc_labels:
        l = [2 * x + y for x, y in zip(b, mat_vec(g.B, [si - 1 for si in s]))]
        assert all((lv - d) % 2 == 0 for lv, d in zip(l, g.degrees))


def test_h1_closed_under_addition():
    B = corpus_graph("star2223").B
    h1 = enumerate_spin_spinc(B).h1
    keys = {h1_key(B, x) for x in h1}
    assert all(h1_key(B, [a + b for a, b in zip(x, y)]) in keys for x, y in itertools.product(h1, h1))


def test_small_spin_examples():
    d1 = enumerate_spin_spinc([[-1]])
    assert len(d1.spin) == 1 and len(d1.h1) == 1 and len(d1.spinc) == 1
    d2 = enumerate_spin_spinc([[-2]])
    assert len(d2.spin) == 2 and len(d2.spinc) == 2


def test_linking_and_rokhlin_examples():
    assert linking_pairing([[-2]], [1], [0]) == 0
    assert linking_pairing([[-2]], [1], [1]) == Fraction(1, 2)
    # S^3: sigma - s^t B s = -1 - (-1) = 0
    assert rokhlin_mod4([[-1]], [1]) == 0
    assert rokhlin_mod4([[-2, 1], [1, -3]], [1, 1]) == (-2 - (-3)) % 4


def test_enumerate_omegas_lens5():
    got = sorted(x[0] for x in enumerate_omegas([[-5]], 2))
    assert got == sorted(Fraction(-2 * k, 5) % 2 for k in range(5))
    assert enumerate_omegas([[-5]], 2)[0] == (0,)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(CORPUS)), st.data())
def test_linking_pairing_descends_to_homology(name, data):
    B = corpus_graph(name).B
    n = len(B)
    vec = st.lists(st.integers(-6, 6), min_size=n, max_size=n)
    a, b, m = data.draw(vec), data.draw(vec), data.draw(vec)
    shifted = [x + y for x, y in zip(a, mat_vec(B, m))]
    assert linking_pairing(B, shifted, b) == linking_pairing(B, a, b)
    assert linking_pairing(B, a, b) == linking_pairing(B, b, a)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(CORPUS)), st.data())
def test_omega_pairing_well_defined_mod_2(name, data):
    B = corpus_graph(name).B
    n = len(B)
    vec = st.lists(st.integers(-5, 5), min_size=n, max_size=n)
    a, m = data.draw(vec), data.draw(vec)
    for phi in enumerate_omegas(B, 2):
        assert all(x.denominator == 1 and x % 2 == 0 for x in mat_vec(B, phi))
        shifted = [x + y for x, y in zip(a, mat_vec(B, m))]
        assert (omega_pairing(phi, shifted) - omega_pairing(phi, a)) % 2 == 0


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(CORPUS)), st.randoms(use_true_random=False))
def test_relabel_preserves_invariants(name, rnd):
    g = corpus_graph(name)
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = g.relabel(perm)
    assert determinant(h.B) == determinant(g.B)
    assert signature(h.B) == signature(g.B)
    assert sorted(h.degrees) == sorted(g.degrees)
    inv_g, inv_h = rational_inverse(g.B), rational_inverse(h.B)
    assert all(inv_h[perm[i]][perm[j]] == inv_g[i][j] for i in range(g.n) for j in range(g.n))
