"""Rational polyhedral cones and their subdivisions.

A cone is stored by primitive integer generators (sorted, deduplicated)
plus an open/closed flag. Open cones are the relative interiors of the
closed cone on the same generators. Facet functionals are found by
enumerating generator subsets, which is adequate for the small dimensions
this library targets.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import floor
from typing import Iterable, Optional, Sequence

import numpy as np

from . import exactlin as el
from .errors import PreconditionError, ShapeError


@dataclass(frozen=True, order=True)
class Cone:
    ambient_dim: int
    generators: tuple = ()
    open: bool = False

    @classmethod
    def make(cls, generators: Iterable[Sequence], ambient_dim: Optional[int] = None, open: bool = False) -> "Cone":
        gens = [tuple(g) for g in generators]
        if ambient_dim is None:
            if not gens:
                raise ShapeError("ambient_dim is required for the zero cone")
            ambient_dim = len(gens[0])
        if ambient_dim < 1:
            raise ShapeError("ambient_dim must be positive")
        prim = set()
        for g in gens:
            if len(g) != ambient_dim:
                raise ShapeError(f"generator {list(g)} does not have length {ambient_dim}")
            if all(Fraction(x) == 0 for x in g):
                continue
            prim.add(el.primitive(g))
        return cls(ambient_dim, tuple(sorted(prim)), bool(open))

    def closure(self) -> "Cone":
        return Cone(self.ambient_dim, self.generators, False)

    def interior(self) -> "Cone":
        return Cone(self.ambient_dim, self.generators, True)

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "open": self.open,
                "generators": [list(g) for g in self.generators]}

    @classmethod
    def from_json(cls, obj: dict) -> "Cone":
        return cls.make(obj["generators"], obj["ambient_dim"], obj.get("open", False))

    def __repr__(self):
        gens = ",".join("(" + ",".join(map(str, g)) + ")" for g in self.generators)
        return f"{'o' if self.open else ''}<{gens}>"

    # cached geometry; frozen dataclass still allows cached_property via __dict__
    @cached_property
    def _geom(self) -> "_Geometry":
        return _Geometry(self.generators, self.ambient_dim)

    @cached_property
    def _bary(self):
        """Integer data for barycentric coordinates of a simplicial cone:
        (pivot coords, adjugate rows, positive det, span equations)."""
        piv = self._geom.piv
        G = [[g[p] for g in self.generators] for p in piv]  # columns are generators
        det = el.determinant(G)
        inv = el.inverse(G)
        sign = 1 if det > 0 else -1
        adj = [[int(x * det * sign) for x in row] for row in inv]
        eqs = span_equations(self) if len(piv) < self.ambient_dim else []
        return piv, adj, int(det * sign), eqs


@dataclass(frozen=True)
class Subdivision:
    parent: Cone
    pieces: tuple
    kind: str = "closed"

    def to_json(self) -> dict:
        return {"kind": self.kind, "parent": self.parent.to_json(),
                "pieces": [p.to_json() for p in self.pieces]}


class _Geometry:
    """Span coordinates, facets and faces of a closed cone."""

    def __init__(self, gens, k):
        self.k = k
        self.gens = gens
        if gens:
            R, piv = el.rref(gens)
            self.basis = R[:len(piv)]
            self.piv = piv
        else:
            self.basis, self.piv = (), ()
        self.d = len(self.piv)
        self.local = [tuple(Fraction(g[p]) for p in self.piv) for g in gens]
        self._facets = None
        self._faces = None

    def to_local(self, x) -> Optional[tuple]:
        """Coordinates of x in the span basis, or None when x is outside the span."""
        c = tuple(Fraction(x[p]) for p in self.piv)
        back = [sum((ci * b[j] for ci, b in zip(c, self.basis)), Fraction(0)) for j in range(self.k)]
        if any(Fraction(a) != b for a, b in zip(x, back)):
            return None
        return c

    def to_ambient(self, c) -> tuple:
        return tuple(sum((ci * b[j] for ci, b in zip(c, self.basis)), Fraction(0)) for j in range(self.k))

    @property
    def facets(self) -> list[tuple]:
        """Inward facet normals in local coordinates (integer, primitive)."""
        if self._facets is None:
            self._facets = _facets_local(self.local, self.d)
        return self._facets

    def in_closed(self, x) -> bool:
        c = self.to_local(x)
        return c is not None and all(el.dot(u, c) >= 0 for u in self.facets)

    def in_open(self, x) -> bool:
        c = self.to_local(x)
        return c is not None and all(el.dot(u, c) > 0 for u in self.facets)

    @property
    def faces(self) -> dict:
        """Map from generator-index frozensets to face dimension (strongly convex cones)."""
        if self._faces is None:
            n = len(self.gens)
            on = [frozenset(i for i in range(n) if el.dot(u, self.local[i]) == 0) for u in self.facets]
            faces = {frozenset(range(n))}
            frontier = set(on)
            faces |= frontier
            while frontier:
                new = set()
                for F in frontier:
                    for G in on:
                        H = F & G
                        if H not in faces:
                            new.add(H)
                faces |= new
                frontier = new
            faces.add(frozenset())
            self._faces = {F: el.rank([self.local[i] for i in F]) if F else 0 for F in faces}
        return self._faces


def _facets_local(local, d) -> list[tuple]:
    if d == 0:
        return []
    found = []
    seen = set()
    for sub in combinations(range(len(local)), d - 1):
        rows = [local[i] for i in sub]
        if rows and el.rank(rows) != d - 1:
            continue
        ns = el.nullspace(rows, d)
        if len(ns) != 1:
            continue
        u = ns[0]
        vals = [el.dot(u, g) for g in local]
        if all(v >= 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals):
            u = tuple(-x for x in u)
        else:
            continue
        u = el.primitive(u)
        if u not in seen:
            seen.add(u)
            found.append(u)
    return sorted(found)


def _cone_from(gens, k, open=False) -> Cone:
    return Cone.make(gens, k, open)


# ---------------------------------------------------------------- basic queries

def dimension(C: Cone) -> int:
    return C._geom.d


def is_simplicial(C: Cone) -> bool:
    return dimension(C) == len(C.generators)


def is_smooth(C: Cone) -> tuple[bool, tuple]:
    """(smoothness flag, primary generating set)."""
    if not is_simplicial(C):
        return False, ()
    if not C.generators:
        return True, ()
    ok = el.lattice_index(C.generators) == 1
    return ok, (C.generators if ok else ())


def lattice_index(C: Cone) -> int:
    if not is_simplicial(C):
        raise PreconditionError("lattice index is defined for simplicial cones")
    return el.lattice_index(C.generators) if C.generators else 1


def contains_point(C: Cone, x: Sequence) -> bool:
    if len(x) != C.ambient_dim:
        raise ShapeError("point dimension differs from ambient dimension")
    if not C.generators:
        return all(Fraction(v) == 0 for v in x)
    return C._geom.in_open(x) if C.open else C._geom.in_closed(x)


def facet_functionals(C: Cone) -> list[tuple]:
    """Inward facet normals as ambient covectors valid on the span of C."""
    g = C._geom
    out = []
    for u in g.facets:
        amb = [0] * C.ambient_dim
        for ui, p in zip(u, g.piv):
            amb[p] = ui
        out.append(tuple(amb))
    return out


def span_equations(C: Cone) -> list[tuple]:
    """Integer covectors cutting out the linear span of C."""
    if not C.generators:
        return [tuple(int(i == j) for j in range(C.ambient_dim)) for i in range(C.ambient_dim)]
    return [el.primitive(v) for v in el.nullspace(C.generators, C.ambient_dim)]


def is_strongly_convex(C: Cone) -> bool:
    return contains_line(C) is None


def contains_line(C: Cone) -> Optional[tuple[list, Cone]]:
    """None if strongly convex, else (basis of the lineality space, projected cone)."""
    g = C._geom
    if not C.generators:
        return None
    if g.facets:
        Lloc = el.nullspace(g.facets, g.d)
    else:
        Lloc = [tuple(Fraction(int(i == j)) for j in range(g.d)) for i in range(g.d)]
    if not Lloc:
        return None
    L = [el.primitive(g.to_ambient(v)) for v in Lloc]
    # project generators onto the orthogonal complement of L
    Lq = el.as_matrix(L)
    G = el.matmul(Lq, el.transpose(Lq))
    Ginv = el.inverse(G)
    proj = []
    for v in C.generators:
        coef = el.matmul(Ginv, [[el.dot(l, v)] for l in Lq])
        w = tuple(Fraction(v[j]) - sum((coef[i][0] * Lq[i][j] for i in range(len(Lq))), Fraction(0))
                  for j in range(C.ambient_dim))
        if any(w):
            proj.append(el.primitive(w))
    return L, Cone.make(proj, C.ambient_dim)


# ---------------------------------------------------------------- faces

def faces(C: Cone) -> list[Cone]:
    """All faces of a strongly convex closed cone, as cones on their extreme rays."""
    _require_pointed(C)
    g = C._geom
    out = []
    for F, dim in g.faces.items():
        out.append(Cone.make(_extreme_in(C, F), C.ambient_dim))
    return sorted(set(out), key=lambda c: (dimension(c), c.generators))


def extreme_rays(C: Cone) -> tuple:
    _require_pointed(C)
    return tuple(sorted(C.generators[i] for F, d in C._geom.faces.items() if d == 1 for i in F))


def _extreme_in(C: Cone, F) -> list:
    faces_ = C._geom.faces
    return [C.generators[i] for G, d in faces_.items() if d == 1 and G <= F for i in G]


def _require_pointed(C: Cone):
    if contains_line(C) is not None:
        raise PreconditionError(f"cone {C!r} contains a line")


def _face_tree(C: Cone):
    """Faces keyed by frozenset, with dims, extreme-ray sums and facet children."""
    fl = C._geom.faces
    ext = {}
    for F in fl:
        ext[F] = sorted(C.generators[i] for G, d in fl.items() if d == 1 and G <= F for i in G)
    children = {F: [G for G in fl if G < F and fl[G] == fl[F] - 1] for F in fl}
    return fl, ext, children


def _vsum(vs, k):
    return el.primitive([sum(v[j] for v in vs) for j in range(k)])


def barycentric_subdivision(C: Cone) -> Subdivision:
    """Full barycentric subdivision: one simplicial piece per maximal face flag."""
    C = C.closure()
    _require_pointed(C)
    k = C.ambient_dim
    if not C.generators:
        return Subdivision(C, (C,), "closed")
    fl, ext, children = _face_tree(C)
    top = max(fl, key=lambda F: (fl[F], len(F)))
    memo = {}

    def chains(F):
        if F in memo:
            return memo[F]
        if fl[F] == 0:
            res = [()]
        else:
            vF = _vsum(ext[F], k)
            res = []
            for G in children[F]:
                for ch in chains(G):
                    res.append(ch + (vF,))
        memo[F] = res
        return res

    pieces = sorted({Cone.make(ch, k) for ch in chains(top)})
    return Subdivision(C, tuple(pieces), "closed")


def pulling_triangulation(C: Cone) -> Subdivision:
    """Triangulation that only splits non-simplicial faces (face-intrinsic)."""
    C = C.closure()
    _require_pointed(C)
    k = C.ambient_dim
    if not C.generators:
        return Subdivision(C, (C,), "closed")
    fl, ext, children = _face_tree(C)
    top = max(fl, key=lambda F: (fl[F], len(F)))
    memo = {}

    def tri(F):
        if F in memo:
            return memo[F]
        if fl[F] == 0:
            res = [()]
        elif len(ext[F]) == fl[F]:
            res = [tuple(ext[F])]
        else:
            vF = _vsum(ext[F], k)
            res = [s + (vF,) for G in children[F] for s in tri(G)]
        memo[F] = res
        return res

    pieces = sorted({Cone.make(s, k) for s in tri(top)})
    return Subdivision(C, tuple(pieces), "closed")


def simplicialize(C: Cone) -> Subdivision:
    """Simplicial subdivision; simplicial cones are returned unchanged.

    Strongly convex cones use the barycentric construction. Cones with a
    lineality space L are split as L + C' with the orthants of a basis of L.
    """
    C = C.closure()
    if is_simplicial(C):
        return Subdivision(C, (C,), "closed")
    line = contains_line(C)
    if line is None:
        return barycentric_subdivision(C)
    L, Cp = line
    sub = simplicialize(Cp).pieces
    pieces = set()
    for signs in product((1, -1), repeat=len(L)):
        base = [tuple(s * x for x in v) for s, v in zip(signs, L)]
        for P in sub:
            pieces.add(Cone.make(base + list(P.generators), C.ambient_dim))
    return Subdivision(C, tuple(sorted(pieces)), "closed")


# ---------------------------------------------------------------- smooth subdivision

def _coeffs(gens, p):
    """Coefficients of p in the independent generators, or None outside the span."""
    return el.solve(el.transpose(gens), p)


def _saturation_basis(gens):
    k = len(gens[0])
    d = len(gens)
    if d == k:
        return [tuple(int(i == j) for j in range(k)) for i in range(k)]
    normals = [el.primitive(v) for v in el.nullspace(gens, k)]
    return [tuple(int(x) for x in v) for v in el.integer_kernel(normals, k)]


def parallelepiped_points(C: Cone) -> list[tuple[tuple, tuple]]:
    """Nonzero lattice points of the half-open fundamental parallelepiped.

    Returns pairs (point, barycentric coefficients) for a simplicial cone.
    """
    gens = C.generators
    if not is_simplicial(C):
        raise PreconditionError("fundamental parallelepiped needs a simplicial cone")
    if not gens:
        return []
    S = _saturation_basis(gens)
    W = [el.solve(el.transpose(S), g) for g in gens]
    H, _ = el.hermite_normal_form(W)
    diag = [int(H[i][i]) for i in range(len(H))]
    Winv = el.inverse(W)
    out = []
    for y in product(*[range(h) for h in diag]):
        if not any(y):
            continue
        lam = [sum((Fraction(y[i]) * Winv[i][j] for i in range(len(y))), Fraction(0)) for j in range(len(y))]
        lam = tuple(x - floor(x) for x in lam)
        if not any(lam):
            continue
        p = tuple(int(sum(l * g[j] for l, g in zip(lam, gens))) for j in range(C.ambient_dim))
        out.append((p, lam))
    return out


def _int_coeffs(P: Cone, p) -> Optional[list]:
    """det * barycentric coordinates of integer p in simplicial P, or None off the span."""
    piv, adj, det, eqs = P._bary
    for e in eqs:
        if sum(a * b for a, b in zip(e, p)):
            return None
    loc = [p[i] for i in piv]
    return [sum(a * b for a, b in zip(row, loc)) for row in adj]


def _star(pieces, p, k):
    """Stellar subdivision of a simplicial fan at p."""
    out = []
    for P in pieces:
        c = _int_coeffs(P, p) if P.generators else None
        if c is None or any(x < 0 for x in c) or not any(c):
            out.append(P)
            continue
        for i, ci in enumerate(c):
            if ci > 0:
                gens = list(P.generators)
                gens[i] = p
                out.append(Cone.make(gens, k))
    return sorted(set(out))


def smooth_refine(pieces: Sequence[Cone]) -> list[Cone]:
    """Refine a face-compatible simplicial fan until every piece is smooth."""
    if not pieces:
        return []
    k = pieces[0].ambient_dim
    cur = sorted(set(p.closure() for p in pieces))
    while True:
        bad = next((P for P in cur if not is_smooth(P)[0]), None)
        if bad is None:
            return cur
        cands = []
        for p, lam in parallelepiped_points(bad):
            if el.primitive(p) != p:
                continue
            cands.append((max(lam), p))
        _, p = min(cands)
        cur = _star(cur, p, k)


def smooth_subdivide(C: Cone) -> Subdivision:
    C = C.closure()
    if not is_simplicial(C):
        raise PreconditionError("smooth_subdivide needs a simplicial cone")
    return Subdivision(C, tuple(smooth_refine([C])), "closed")


def smooth_subdivision_of(C: Cone) -> list[Cone]:
    """Smooth closed pieces covering an arbitrary strongly convex cone."""
    C = C.closure()
    if is_simplicial(C):
        return smooth_refine([C])
    return smooth_refine(list(pulling_triangulation(C).pieces))


def star_split(pieces: Sequence[Cone], points: Sequence[Sequence]) -> list[Cone]:
    """Apply successive stellar subdivisions at the given points."""
    cur = sorted(set(p.closure() for p in pieces))
    if not cur:
        return cur
    k = cur[0].ambient_dim
    for p in points:
        p = el.primitive(p)
        if not any(contains_point(P, p) for P in cur):
            raise PreconditionError(f"split point {list(p)} is outside the cone")
        cur = _star(cur, p, k)
    return cur


# ---------------------------------------------------------------- common refinement

def common_refinement(Cs: Sequence[Cone]) -> list[Subdivision]:
    Cs = [C.closure() for C in Cs]
    if not Cs:
        return []
    k = Cs[0].ambient_dim
    span0 = el.rref(Cs[0].generators)[0] if Cs[0].generators else ()
    for C in Cs:
        sp = el.rref(C.generators)[0] if C.generators else ()
        if tuple(r for r in sp if any(r)) != tuple(r for r in span0 if any(r)):
            raise PreconditionError("cones do not span the same subspace")
        _require_pointed(C)
    geo = Cs[0]._geom
    d = geo.d
    if d == 0:
        return [Subdivision(C, (C,), "closed") for C in Cs]
    # facets of every cone in the shared local coordinates
    cone_facets = []
    hyper = {}
    for C in Cs:
        fs = []
        for u in facet_functionals(C):
            # restrict the ambient covector to the shared span
            ul = el.primitive([el.dot(u, b) for b in geo.basis])
            fs.append(ul)
            key = ul if ul[next(i for i, x in enumerate(ul) if x)] > 0 else tuple(-x for x in ul)
            hyper[key] = True
        cone_facets.append(fs)
    H = sorted(hyper)
    rays = {}
    for sub in combinations(range(len(H)), d - 1):
        rows = [H[i] for i in sub]
        if rows and el.rank(rows) != d - 1:
            continue
        ns = el.nullspace(rows, d)
        if len(ns) != 1:
            continue
        for sgn in (1, -1):
            r = el.primitive([sgn * x for x in ns[0]])
            amb = el.primitive(geo.to_ambient(r))
            rays[amb] = tuple(el.dot(h, r) for h in H)
    out = []
    for C, fs in zip(Cs, cone_facets):
        fixed = {}
        for u in fs:
            i = H.index(u) if u in H else H.index(tuple(-x for x in u))
            fixed[i] = 1 if u in H else -1
        free = [i for i in range(len(H)) if i not in fixed]
        cells = set()
        for signs in product((1, -1), repeat=len(free)):
            nu = dict(fixed)
            nu.update(zip(free, signs))
            members = [r for r, sv in rays.items() if all(nu[i] * sv[i] >= 0 for i in range(len(H)))]
            if members and el.rank(members) == d:
                cells.add(Cone.make(members, k))
        pieces = set()
        for cell in cells:
            pieces.update(pulling_triangulation(cell).pieces)
        out.append(Subdivision(C, tuple(sorted(pieces)), "closed"))
    return out


# ---------------------------------------------------------------- open subdivisions

def open_subdivision(C: Cone, closed_pieces) -> Subdivision:
    """Relative interiors of the faces of the closed pieces lying inside open C."""
    Co = C.interior()
    pieces = closed_pieces.pieces if isinstance(closed_pieces, Subdivision) else tuple(closed_pieces)
    k = C.ambient_dim
    if not C.generators:
        return Subdivision(Co, (Co,), "open")
    dC = dimension(C)
    simp = []
    for P in pieces:
        P = P.closure()
        if P.ambient_dim != k or dimension(P) != dC:
            raise PreconditionError(f"piece {P!r} has the wrong dimension")
        if not all(contains_point(C.closure(), g) for g in P.generators):
            raise PreconditionError(f"piece {P!r} is not contained in the parent")
        simp.extend([P] if is_simplicial(P) else pulling_triangulation(P).pieces)
    out = set()
    for P in simp:
        g = P.generators
        for r in range(1, len(g) + 1):
            for sub in combinations(g, r):
                pt = tuple(sum(v[j] for v in sub) for j in range(k))
                if contains_point(Co, pt):
                    out.add(Cone(k, tuple(sorted(sub)), True))
    return Subdivision(Co, tuple(sorted(out, key=lambda c: (-len(c.generators), c.generators))), "open")


# ---------------------------------------------------------------- lattice oracle

def _int_rows(vs):
    out = []
    for v in vs:
        den = 1
        for x in v:
            den = den * Fraction(x).denominator
        out.append([int(Fraction(x) * den) for x in v])
    return np.array(out, dtype=np.int64).reshape(len(out), -1)


def membership_mask(C: Cone, pts: np.ndarray) -> np.ndarray:
    """Vectorized exact membership test for integer points (rows of pts)."""
    if not C.generators:
        return np.all(pts == 0, axis=1)
    mask = np.ones(len(pts), dtype=bool)
    eq = span_equations(C)
    if eq:
        mask &= np.all(pts @ _int_rows(eq).T == 0, axis=1)
    fs = facet_functionals(C)
    if fs:
        vals = pts @ _int_rows(fs).T
        mask &= np.all(vals > 0 if C.open else vals >= 0, axis=1)
    return mask


def box_points(k: int, lo: int, hi: int) -> np.ndarray:
    axes = [np.arange(lo, hi + 1, dtype=np.int64)] * k
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)


def verify_subdivision(S: Subdivision, box_bound: int) -> bool:
    parent = S.parent
    k = parent.ambient_dim
    if not S.pieces:
        return False
    lo = 0 if all(x >= 0 for g in parent.generators for x in g) else -box_bound
    pts = box_points(k, lo, box_bound)
    pm = membership_mask(parent, pts)
    masks = [membership_mask(P, pts) for P in S.pieces]
    cnt = np.sum(masks, axis=0)
    if S.kind == "open":
        if np.any(cnt[~pm] > 0):
            return False
        return bool(np.all(cnt[pm] == 1))
    dP = dimension(parent)
    for P in S.pieces:
        if dimension(P) != dP or not all(contains_point(parent.closure(), g) for g in P.generators):
            return False
    if np.any(cnt[~pm] > 0) or not np.all(cnt[pm] >= 1):
        return False
    # pieces must meet in common faces: shared points lie in the cone of shared generators
    simp = all(is_simplicial(P) for P in S.pieces)
    for i, j in combinations(range(len(S.pieces)), 2):
        both = masks[i] & masks[j]
        if not np.any(both):
            continue
        if simp:
            common = set(S.pieces[i].generators) & set(S.pieces[j].generators)
            F = Cone(k, tuple(sorted(common)), False)
            if not np.all(membership_mask(F, pts[both])):
                return False
    return True
