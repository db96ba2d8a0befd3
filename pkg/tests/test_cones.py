import pytest
from hypothesis import assume, given, strategies as st

from conezeta.cones import (Cone, Subdivision, barycentric_subdivision, box_points, common_refinement,
                            contains_line, contains_point, dimension, extreme_rays, faces,
                            is_simplicial, is_smooth, is_strongly_convex, membership_mask,
                            open_subdivision, pulling_triangulation, simplicialize, smooth_subdivide,
                            smooth_subdivision_of, star_split, verify_subdivision)
from conezeta.errors import PreconditionError

C = Cone.make


def O(gens, k=None):
    return Cone.make(gens, k, open=True)


# ---------------------------------------------------------------- examples

def test_dimension_examples():
    assert dimension(C([[1, 0], [0, 1]])) == 2
    assert dimension(C([[1, 1]])) == 1
    assert dimension(Cone(2)) == 0


def test_is_smooth_examples():
    ok, gens = is_smooth(C([[1, 0], [1, 1]]))
    assert ok and gens == ((1, 0), (1, 1))
    assert not is_smooth(C([[1, 0], [1, 2]]))[0]
    assert is_smooth(C([[1, 1]])) == (True, ((1, 1),))


def test_contains_point_examples():
    assert contains_point(C([[1, 0], [0, 1]]), (0, 0))
    assert not contains_point(O([[1, 0], [0, 1]]), (1, 0))
    assert contains_point(O([[1, 0], [1, 1]]), (3, 2))


def test_contains_line_examples():
    L, Cp = contains_line(C([[1, 0], [-1, 0]]))
    assert L == [(1, 0)] and Cp.generators == ()
    assert contains_line(C([[1, 0], [0, 1]])) is None
    L, Cp = contains_line(C([[1, 0], [-1, 0], [0, 1]]))
    assert L == [(1, 0)] and Cp.generators == ((0, 1),)


def test_simplicialize_examples():
    # the quadrant is simplicial and stays whole; the barycentric split gives the Chen pieces
    Q = C([[1, 0], [0, 1]])
    assert simplicialize(Q).pieces == (Q,)
    assert set(barycentric_subdivision(Q).pieces) == {C([[1, 0], [1, 1]]), C([[0, 1], [1, 1]])}
    S = simplicialize(C([[1, 0], [0, 1], [1, 1]]))
    assert set(S.pieces) == {C([[1, 0], [1, 1]]), C([[0, 1], [1, 1]])}
    assert verify_subdivision(S, 10)


def test_smooth_subdivide_examples():
    S = smooth_subdivide(C([[1, 0], [1, 2]]))
    assert set(S.pieces) == {C([[1, 0], [1, 1]]), C([[1, 1], [1, 2]])}
    assert verify_subdivision(S, 20)
    P = C([[1, 0], [1, 1]])
    assert smooth_subdivide(P).pieces == (P,)
    S = smooth_subdivide(C([[0, 1], [2, 1]]))
    assert set(S.pieces) == {C([[0, 1], [1, 1]]), C([[1, 1], [2, 1]])}


def test_common_refinement_examples():
    A, B = C([[1, 0], [0, 1]]), C([[1, 0], [1, 1]])
    RA, RB = common_refinement([A, B])
    assert set(RA.pieces) == {C([[1, 0], [1, 1]]), C([[1, 1], [0, 1]])}
    assert RB.pieces == (B,)
    (R,) = common_refinement([B])
    assert R.pieces == (B,)
    X, Y = C([[1, 0], [1, 1]]), C([[0, 1], [1, 1]])
    RX, RY = common_refinement([X, Y])
    assert RX.pieces == (X,) and RY.pieces == (Y,)


def test_open_subdivision_examples():
    Q = O([[1, 0], [0, 1]])
    S = open_subdivision(Q, [C([[1, 0], [1, 1]]), C([[0, 1], [1, 1]])])
    assert set(S.pieces) == {O([[1, 0], [1, 1]]), O([[0, 1], [1, 1]]), O([[1, 1]])}
    assert open_subdivision(Q, [Q.closure()]).pieces == (Q,)
    ch = C([[1, 0], [1, 1]])
    S = open_subdivision(ch.interior(), star_split([ch], [[2, 1]]))
    assert set(S.pieces) == {O([[1, 0], [2, 1]]), O([[2, 1], [1, 1]]), O([[2, 1]])}
    assert verify_subdivision(S, 30)


def test_verify_subdivision_examples():
    Q = C([[1, 0], [0, 1]])
    good = Subdivision(Q, (C([[1, 0], [1, 1]]), C([[0, 1], [1, 1]])))
    assert verify_subdivision(good, 20)
    assert not verify_subdivision(Subdivision(Q, good.pieces[:1]), 20)
    Qo = Q.interior()
    S = open_subdivision(Qo, good.pieces)
    assert verify_subdivision(S, 20)
    assert not verify_subdivision(Subdivision(Qo, S.pieces[1:], "open"), 20)


def test_zero_cone_and_errors():
    Z = Cone(3)
    assert smooth_subdivide(Z).pieces == (Z,)
    assert faces(Z) == [Z]
    with pytest.raises(PreconditionError):
        star_split([C([[1, 0], [1, 1]])], [[0, 1]])


def test_json_round_trip():
    for K in [C([[2, 2], [0, 3]]), O([[1, 0, 0]], 3), Cone(2)]:
        assert Cone.from_json(K.to_json()) == K
    assert C([[2, 2]]).to_json() == {"ambient_dim": 2, "open": False, "generators": [[1, 1]]}


def test_faces_of_square_cone():
    K = C([[1, 0, 1], [0, 1, 1], [-1, 0, 1], [0, -1, 1]])
    assert len(extreme_rays(K)) == 4
    F = faces(K)
    assert sum(1 for f in F if dimension(f) == 2) == 4
    assert sum(1 for f in F if dimension(f) == 1) == 4
    assert not is_simplicial(K)
    S = simplicialize(K)
    assert all(is_simplicial(P) and dimension(P) == 3 for P in S.pieces)
    assert verify_subdivision(S, 8)
    T = pulling_triangulation(K)
    # only the non-simplicial 3-face is starred at its ray sum
    assert len(T.pieces) == 4 and all(is_simplicial(P) for P in T.pieces)
    assert verify_subdivision(T, 8)


# ---------------------------------------------------------------- invariants

vec2 = st.lists(st.integers(0, 5), min_size=2, max_size=2)
vec3 = st.lists(st.integers(0, 4), min_size=3, max_size=3)


def full_cone(gens, k):
    gens = [g for g in gens if any(g)]
    assume(gens)
    K = C(gens, k)
    assume(dimension(K) == k)
    return K


@given(st.lists(vec2, min_size=2, max_size=4))
def test_smooth_subdivide_2d(gens):
    K = full_cone(gens, 2)
    S = Subdivision(K, tuple(smooth_subdivision_of(K)))
    assert all(is_smooth(P)[0] for P in S.pieces)
    assert verify_subdivision(S, 25)


@given(st.lists(vec3, min_size=3, max_size=3))
def test_smooth_subdivide_3d_simplicial(gens):
    K = full_cone(gens, 3)
    S = smooth_subdivide(K)
    assert all(is_smooth(P)[0] for P in S.pieces)
    assert verify_subdivision(S, 9)


@given(st.lists(vec3, min_size=3, max_size=5))
def test_simplicialize_3d(gens):
    K = full_cone(gens, 3)
    S = simplicialize(K)
    assert all(is_simplicial(P) and dimension(P) == 3 for P in S.pieces)
    assert verify_subdivision(S, 8)


@given(st.lists(vec3, min_size=3, max_size=4))
def test_open_subdivision_partition(gens):
    K = full_cone(gens, 3)
    S = open_subdivision(K.interior(), simplicialize(K))
    assert verify_subdivision(S, 8)


@given(st.lists(vec2, min_size=2, max_size=3), st.lists(vec2, min_size=2, max_size=3))
def test_common_refinement_meets_in_faces(g1, g2):
    A, B = full_cone(g1, 2), full_cone(g2, 2)
    RA, RB = common_refinement([A, B])
    assert verify_subdivision(RA, 15) and verify_subdivision(RB, 15)
    pts = box_points(2, 0, 15)
    for P in RA.pieces:
        for Q in RB.pieces:
            shared = set(P.generators) & set(Q.generators)
            both = pts[membership_mask(P, pts) & membership_mask(Q, pts)]
            F = C(shared, 2) if shared else Cone(2)
            assert membership_mask(F, both).all()


@given(st.lists(st.lists(st.integers(-3, 3), min_size=2, max_size=2), min_size=1, max_size=4))
def test_strong_convexity_vs_lines(gens):
    gens = [g for g in gens if any(g)]
    assume(gens)
    K = C(gens, 2)
    assert is_strongly_convex(K) == (contains_line(K) is None)
