import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import assume, given, settings, strategies as st

from conezeta import exactlin as el
from conezeta.cones import Cone, star_split, verify_subdivision
from conezeta.decorated import DecoratedClosedCone, algebraic_subdivide
from conezeta.errors import PreconditionError
from conezeta.relations import (ConePair, Relation, decorated_to_mzv, double_subdivision_relation,
                                pair_of, quasi_shuffles, reduce_over_chen, shuffle_decomposition, split_relation,
                                stuffle_subdivision, transpose, verify_mzv_form, verify_relation)
from conezeta.zeta import DecoratedOpenCone, eval_lzv, eval_open_czv, is_convergent_sufficient

F = Fraction
ZETA4 = math.pi ** 4 / 90


def doc(gens, s):
    return DecoratedOpenCone.of(gens, s, len(s))


def chen_open(s):
    k = len(s)
    gens = [[1] * (i + 1) + [0] * (k - i - 1) for i in range(k)]
    return doc(gens, s)


# ---------------------------------------------------------------- word-shuffle oracle

def word(index):
    w = []
    for s in index:
        w += ["x0"] * (s - 1) + ["x1"]
    return tuple(w)


def index_of(w):
    out, run = [], 0
    for a in w:
        run += 1
        if a == "x1":
            out.append(run)
            run = 0
    return tuple(out)


def shuffle_words(u, v):
    if not u:
        return {v: 1}
    if not v:
        return {u: 1}
    out = {}
    for w, c in shuffle_words(u[1:], v).items():
        out[(u[0],) + w] = out.get((u[0],) + w, 0) + c
    for w, c in shuffle_words(u, v[1:]).items():
        out[(v[0],) + w] = out.get((v[0],) + w, 0) + c
    return out


def compositions(total):
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in compositions(total - first):
            yield (first,) + rest


# ---------------------------------------------------------------- cone pairs and transposes

def test_cone_pair_sides():
    P = ConePair.make([[1, 1], [0, 1]], [2, 1])
    assert P.open_side == doc([[1, 0], [1, 1]], [2, 1])
    assert P.closed_side == DecoratedClosedCone.make([[1, 1], [0, 1]], [2, 1])
    Q = ConePair.make([[1, 1], [0, 1]], [2, 0])
    assert Q.closed_side == DecoratedClosedCone.make([[1, 1]], [2], 2)
    with pytest.raises(PreconditionError):
        ConePair.make([[2, 1], [0, 1]], [2, 2])
    with pytest.raises(PreconditionError):
        ConePair.make([[1, -1], [0, 1]], [2, 2])
    assert ConePair.from_json(P.to_json()) == P


def test_transpose_examples():
    assert transpose(DecoratedClosedCone.make([[1, 1], [0, 1]], [2, 1])) == doc([[1, 0], [1, 1]], [2, 1])
    for a, b in [(2, 3), (3, 2), (1, 1)]:
        assert transpose(DecoratedClosedCone.make([[1, 0], [0, 1]], [a, b])) == doc([[1, 0], [0, 1]], [a, b])


def test_transpose_gives_valid_pair():
    D = DecoratedClosedCone.make([[1, 0], [1, 1]], [2, 1])
    T = transpose(D)
    P = pair_of(D)
    assert P.open_side == T and P.closed_side == D
    # both sides diverge here: e1+e2 carries exponent 1 and covers the free variable
    assert not is_convergent_sufficient(T)
    assert not eval_lzv(D, 50).certified


def test_transpose_completes_lower_rank():
    D = DecoratedClosedCone.make([[1, 1, 0]], [3], 3)
    T = transpose(D)
    assert T.cone.ambient_dim == 2 and T.s == (3, 0)
    D2 = DecoratedClosedCone.make([[2, 3], [1, 1]], [2, 2])
    assert pair_of(D2).closed_side == D2
    assert pair_of(DecoratedClosedCone.make([[1, 1], [0, 1]], [2, 1])).open_side == doc([[1, 0], [1, 1]], [2, 1])


# ---------------------------------------------------------------- stuffle

def test_stuffle_examples():
    S = stuffle_subdivision(1, 1)
    O = lambda g: Cone.make(g, 2, open=True)
    assert set(S.pieces) == {O([[1, 0], [1, 1]]), O([[0, 1], [1, 1]]), O([[1, 1]])}
    assert verify_subdivision(S, 20)
    S21 = stuffle_subdivision(2, 1)
    assert len(S21.pieces) == 5
    assert verify_subdivision(S21, 15)


def _brute_quasi_shuffles(k, l):
    count = 0
    for m in range(max(k, l), k + l + 1):
        for phi in product(range(m), repeat=k):
            for psi in product(range(m), repeat=l):
                inc = all(a < b for a, b in zip(phi, phi[1:])) and all(a < b for a, b in zip(psi, psi[1:]))
                if inc and set(phi) | set(psi) == set(range(m)):
                    count += 1
    return count


@pytest.mark.parametrize("k,l", [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)])
def test_stuffle_piece_count(k, l):
    assert len(quasi_shuffles(k, l)) == _brute_quasi_shuffles(k, l)
    assert len(stuffle_subdivision(k, l).pieces) == _brute_quasi_shuffles(k, l)


def test_stuffle_partitions_in_3d():
    assert verify_subdivision(stuffle_subdivision(1, 2), 15)


@pytest.mark.parametrize("s", [(2, 2), (2, 3), (3, 2)])
def test_quasi_shuffle_identity_2d(s):
    S = stuffle_subdivision(1, 1)
    parent = eval_open_czv(DecoratedOpenCone.make(S.parent, s), 500)
    vals = [eval_open_czv(DecoratedOpenCone.make(P, s), 500) for P in S.pieces]
    err = parent.error_estimate + sum(v.error_estimate for v in vals)
    assert abs(parent.value - math.fsum(v.value for v in vals)) <= err


def test_quasi_shuffle_identity_3d():
    s = (2, 2, 2)
    S = stuffle_subdivision(2, 1)
    parent = eval_open_czv(DecoratedOpenCone.make(S.parent, s), 500)
    vals = [eval_open_czv(DecoratedOpenCone.make(P, s), 500) for P in S.pieces]
    err = parent.error_estimate + sum(v.error_estimate for v in vals)
    assert abs(parent.value - math.fsum(v.value for v in vals)) <= err


# ---------------------------------------------------------------- shuffle

def test_shuffle_examples():
    assert decorated_to_mzv(shuffle_decomposition([2], [2])) == {(2, 2): 2, (3, 1): 4}
    assert decorated_to_mzv(shuffle_decomposition([1], [1])) == {(1, 1): 2}
    assert decorated_to_mzv(shuffle_decomposition([2], [1])) == {(1, 2): 1, (2, 1): 2}


def test_shuffle_matches_word_oracle():
    for w in range(2, 7):
        for a in range(1, w):
            for s in compositions(a):
                for t in compositions(w - a):
                    want = {}
                    for u, c in shuffle_words(word(s), word(t)).items():
                        want[index_of(u)] = want.get(index_of(u), 0) + c
                    got = decorated_to_mzv(shuffle_decomposition(s, t))
                    assert got == {k: F(v) for k, v in sorted(want.items())}, (s, t)


def test_double_shuffle_zeta2_squared():
    z2sq = eval_lzv(DecoratedClosedCone.make([[1, 0], [0, 1]], [2, 2]), 2000).value
    z22 = eval_open_czv(chen_open((2, 2)), 2000).value
    z31 = eval_open_czv(chen_open((3, 1)), 2000).value
    z4 = eval_open_czv(doc([[1]], [4]), 2000).value
    assert abs(z2sq - 2 * z22 - z4) < 1e-8
    assert abs(z2sq - 4 * z31 - 2 * z22) < 1e-8


# ---------------------------------------------------------------- double subdivision relations

def test_double_subdivision_examples():
    P = ConePair.make([[1, 1], [0, 1]], [2, 2])
    R = split_relation(P, [[2, 1]], [[1, 2]])
    want = Relation({doc([[2, 1]], [2, 2]): 1, doc([[1, 1], [2, 1]], [3, 1]): -2, doc([[1, 0], [2, 1]], [3, 1]): -2})
    assert R.terms == want.terms
    P = ConePair.make([[1, 1], [0, 1]], [2, 1])
    R = split_relation(P, [[2, 1]], [[1, 2]])
    assert R.terms == {doc([[2, 1]], [2, 1]): 1, doc([[1, 1], [1, 2]], [2, 1]): -1}
    assert not split_relation(P, [], []).terms


def test_double_subdivision_explicit_inputs():
    P = ConePair.make([[1, 1], [0, 1]], [2, 2])
    C = P.open_side.cone.closure()
    pieces = star_split([C], [[2, 1]])
    closed = algebraic_subdivide(P.closed_side, star_split([P.closed_side.cone], [[1, 2]]))
    R = double_subdivision_relation(P, pieces, closed)
    assert R.terms == split_relation(P, [[2, 1]], [[1, 2]]).terms
    assert set(R.provenance) == {"pair", "open_subdivision_used", "closed_subdivision_used"}
    with pytest.raises(PreconditionError):
        double_subdivision_relation(P, [Cone.make([[1, 0], [0, 1]])], closed)
    with pytest.raises(PreconditionError):
        double_subdivision_relation(P, pieces, closed * 2)


def test_reduce_over_chen_examples():
    P = ConePair.make([[1, 1], [0, 1]], [2, 2])
    R = split_relation(P, [[2, 1]], [[1, 2]])
    assert reduce_over_chen(R) == {(4,): 1, (3, 1): -4}
    euler = split_relation(ConePair.make([[1, 1], [0, 1]], [2, 1]), [[2, 1]], [[1, 2]])
    assert reduce_over_chen(euler) is None
    direct = Relation({chen_open((2, 1)): 1, doc([[1]], [3]): -1})
    assert reduce_over_chen(direct) == {(3,): 1, (2, 1): -1}
    assert reduce_over_chen(Relation({})) == {}


def test_verify_relation_examples():
    P = ConePair.make([[1, 1], [0, 1]], [2, 2])
    R = split_relation(P, [[2, 1]], [[1, 2]])
    assert verify_relation(R, 2000, 1e-6)
    assert verify_mzv_form({(4,): F(1), (3, 1): F(-4)}, 2000, 1e-6)
    assert verify_relation(Relation({}), 2000, 1e-6)
    bad = Relation({T: (c * 3 if c < 0 else c) for T, c in R.terms.items()})
    assert not verify_relation(bad, 2000, 1e-6)
    with pytest.raises(PreconditionError):
        verify_relation(Relation({doc([[1, 0], [0, 1]], [1, 1]): 1}), 100)


def test_relation_json_round_trip():
    P = ConePair.make([[1, 1], [0, 1]], [2, 2])
    R = split_relation(P, [[2, 1]], [[1, 2]])
    R.mzv_form = reduce_over_chen(R)
    back = Relation.from_json(R.to_json())
    assert back.terms == R.terms and back.mzv_form == R.mzv_form
    assert R.to_json()["terms"][0] == {"coeff": "-2/1", "cone": {"ambient_dim": 2, "open": True,
                                                                  "generators": [[1, 0], [2, 1]]}, "s": [3, 1]}


# ---------------------------------------------------------------- invariants

@st.composite
def nonneg_unimodular(draw, n):
    M = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(draw(st.integers(1, 4))):
        i, j = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        c = draw(st.integers(1, 2))
        if i != j:
            M[i] = [a + c * b for a, b in zip(M[i], M[j])]
    perm = draw(st.permutations(range(n)))
    return [M[p] for p in perm]


@settings(max_examples=6)
@given(nonneg_unimodular(2), st.lists(st.integers(1, 3), min_size=2, max_size=2))
def test_cone_pair_values_agree(M, s):
    P = ConePair.make(M, s)
    assume(is_convergent_sufficient(P.open_side))
    a = eval_open_czv(P.open_side, 500)
    b = eval_lzv(P.closed_side, 500)
    assert a.certified and b.certified
    assert abs(a.value - b.value) <= a.error_estimate + b.error_estimate


@settings(max_examples=6)
@given(nonneg_unimodular(2), st.lists(st.integers(1, 3), min_size=2, max_size=2),
       st.tuples(st.integers(1, 2), st.integers(1, 2)), st.tuples(st.integers(1, 2), st.integers(1, 2)))
def test_generated_relations_verify(M, s, a, b):
    P = ConePair.make(M, s)
    # divergent members may cancel formally, so only convergent pairs qualify
    assume(is_convergent_sufficient(P.open_side))
    u, v = el.transpose(P.matrix)
    p = [a[0] * x + a[1] * y for x, y in zip(u, v)]
    g, h = P.closed_side.generators
    q = [b[0] * x + b[1] * y for x, y in zip(g, h)]
    pieces = star_split([P.closed_side.cone], [q])
    assume(all(abs(el.determinant(C.generators)) == 1 for C in pieces))
    R = split_relation(P, [p], [q])
    assert verify_relation(R, 500, 1e-6)
