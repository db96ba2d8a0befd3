"""Cone pairs, transposes, stuffle and shuffle generators, double subdivision relations.

A cone pair is a nonnegative unimodular matrix M with exponents s. Read by
columns it is the decorated open cone (o<columns>; s); read by rows it is the
decorated closed cone prod [row_i]^{s_i}. Both sides have the same zeta
value, since n = M m is a bijection between Z_{>=1}^r and the lattice points
of the open cone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Optional, Sequence

from . import exactlin as el
from .cones import Cone, Subdivision, dimension, open_subdivision, star_split
from .decorated import DecoratedClosedCone, DecoratedSum, algebraic_subdivide, phi_dm
from .errors import PreconditionError, ShapeError
from .fractions import equals
from .zeta import DecoratedOpenCone, eval_open_czv, is_convergent_sufficient, mzv

MZVForm = dict  # index tuple -> Fraction


def _frac_str(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------- cone pairs

@dataclass(frozen=True)
class ConePair:
    matrix: tuple
    s: tuple

    @classmethod
    def make(cls, matrix: Sequence[Sequence[int]], s: Sequence[int]) -> "ConePair":
        M = tuple(tuple(int(x) for x in row) for row in matrix)
        r = len(M)
        if any(len(row) != r for row in M):
            raise ShapeError("cone pair matrix must be square")
        if len(s) != r:
            raise ShapeError(f"s has length {len(s)} but the matrix has {r} rows")
        if any(x < 0 for row in M for x in row):
            raise PreconditionError("cone pair matrix must be nonnegative")
        if abs(el.determinant(M)) != 1:
            raise PreconditionError("cone pair matrix must be unimodular")
        s = tuple(int(x) for x in s)
        if any(x < 0 for x in s):
            raise PreconditionError("exponents must be nonnegative")
        return cls(M, s)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @property
    def open_side(self) -> DecoratedOpenCone:
        return DecoratedOpenCone.of(el.transpose(self.matrix), self.s, self.dim)

    @property
    def closed_side(self) -> DecoratedClosedCone:
        rows = [row for row, x in zip(self.matrix, self.s) if x > 0]
        return DecoratedClosedCone.make(rows, [x for x in self.s if x > 0], self.dim)

    def to_json(self) -> dict:
        return {"matrix": [list(r) for r in self.matrix], "s": list(self.s)}

    @classmethod
    def from_json(cls, obj: dict) -> "ConePair":
        return cls.make(obj["matrix"], obj["s"])


def _is_basis_part(rows) -> bool:
    return el.rank(rows) == len(rows) and el.lattice_index(rows) == 1


def _complete_basis(rows: Sequence[tuple], r: int, bound: int = 4) -> list[tuple]:
    """Nonnegative integer vectors extending rows to a Z-basis of Z^r.

    Candidates are tried smallest first: unit vectors, then by (max entry, lex).
    """
    rows = [tuple(x) for x in rows]
    if rows and not _is_basis_part(rows):
        raise PreconditionError("generators are not part of a Z-basis")
    need = r - len(rows)
    if need == 0:
        return []
    units = [tuple(int(i == j) for i in range(r)) for j in range(r)]
    others = sorted((v for v in product(range(bound + 1), repeat=r) if any(v) and v not in units
                     and math.gcd(*v) == 1), key=lambda v: (max(v), v))
    cands = units + others

    def search(cur, start):
        if len(cur) == r:
            return cur
        for i in range(start, len(cands)):
            nxt = cur + [cands[i]]
            if _is_basis_part(nxt):
                got = search(nxt, i + 1)
                if got is not None:
                    return got
        return None

    full = search(rows, 0)
    if full is None:
        raise PreconditionError("no nonnegative completion to a Z-basis was found")
    return full[len(rows):]


def _row_key(row, e):
    lead = next(i for i, x in enumerate(row) if x)
    return (lead, -e, row)


def _open_from_rows(rows, exps) -> DecoratedOpenCone:
    return DecoratedOpenCone.of(el.transpose(rows), exps, len(rows))


def transpose(D: DecoratedClosedCone) -> DecoratedOpenCone:
    """Open side of a cone pair whose closed side is D, in the coordinates D uses.

    Rows are ordered by leading coordinate, then by decreasing exponent, and
    the completion rows (exponent 0) follow.
    """
    if any(x < 0 for g in D.generators for x in g):
        raise PreconditionError("transpose needs nonnegative generators")
    used = [j for j in range(D.ambient_dim) if any(g[j] for g in D.generators)]
    rows = [tuple(g[j] for j in used) for g in D.generators]
    order = sorted(range(len(rows)), key=lambda i: _row_key(rows[i], D.exponents[i]))
    rows = [rows[i] for i in order]
    exps = [D.exponents[i] for i in order]
    comp = _complete_basis(rows, len(used))
    return _open_from_rows(rows + comp, exps + [0] * len(comp))


def transpose_candidates(D: DecoratedClosedCone) -> list[DecoratedOpenCone]:
    """All open sides (in the full ambient space of D) obtained by ordering the
    rows of a fixed completion; the default order comes first."""
    if any(x < 0 for g in D.generators for x in g):
        raise PreconditionError("transpose needs nonnegative generators")
    r = D.ambient_dim
    rows = list(D.generators)
    comp = _complete_basis(rows, r)
    order = sorted(range(len(rows)), key=lambda i: _row_key(rows[i], D.exponents[i]))
    allrows = [rows[i] for i in order] + comp
    allexps = [D.exponents[i] for i in order] + [0] * len(comp)
    out, seen = [], set()
    for perm in permutations(range(r)):
        T = _open_from_rows([allrows[i] for i in perm], [allexps[i] for i in perm])
        if T not in seen:
            seen.add(T)
            out.append(T)
    return out


def pair_of(D: DecoratedClosedCone) -> ConePair:
    """Cone pair with open side transpose(D) and, when D spans its ambient
    space, closed side exactly D.

    The open side fixes the pair matrix only up to the order of its columns,
    so the order reproducing D is searched for.
    """
    T = transpose(D)
    cols = T.cone.generators
    first = None
    for perm in permutations(range(len(cols))):
        P = ConePair.make(el.transpose([cols[i] for i in perm]), T.s)
        if P.closed_side == D:
            return P
        first = first or P
    return first


# ---------------------------------------------------------------- relations

@dataclass
class Relation:
    terms: dict
    provenance: dict = field(default_factory=dict)
    mzv_form: Optional[dict] = None

    def __post_init__(self):
        t = {}
        for T, c in self.terms.items():
            t[T] = t.get(T, Fraction(0)) + Fraction(c)
        self.terms = {T: t[T] for T in sorted(t) if t[T]}

    @property
    def combination(self) -> list:
        return list(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def to_json(self) -> dict:
        return {
            "terms": [{"coeff": _frac_str(c), **T.to_json()} for T, c in self.terms.items()],
            "provenance": self.provenance,
            "mzv_form": mzv_form_to_json(self.mzv_form) if self.mzv_form is not None else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Relation":
        terms = {}
        for t in obj["terms"]:
            T = DecoratedOpenCone.from_json(t)
            terms[T] = terms.get(T, Fraction(0)) + Fraction(t["coeff"])
        form = obj.get("mzv_form")
        return cls(terms, obj.get("provenance", {}),
                   {tuple(e["index"]): Fraction(e["coeff"]) for e in form} if form is not None else None)

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{T!r}" for T, c in self.terms.items())


def mzv_form_to_json(form: dict) -> list:
    return [{"index": list(k), "coeff": _frac_str(c)} for k, c in form.items()]


def mzv_form_repr(form: dict) -> str:
    if not form:
        return "0"
    parts = []
    for k, c in form.items():
        z = "1" if not k else f"zeta({','.join(map(str, k))})"
        parts.append(z if c == 1 else f"{c}*{z}")
    return " + ".join(parts) + " = 0"


def _open_pieces(C: Cone, open_div) -> Subdivision:
    Co = C.interior()
    if isinstance(open_div, Subdivision):
        if open_div.kind == "open":
            if open_div.parent.interior() != Co:
                raise PreconditionError(f"open subdivision of {open_div.parent!r}, expected {Co!r}")
            return open_div
        if open_div.parent.closure() != Co.closure():
            raise PreconditionError(f"subdivision of {open_div.parent!r}, expected {C.closure()!r}")
        return open_subdivision(Co, open_div.pieces)
    return open_subdivision(Co, list(open_div))


def double_subdivision_relation(pair: ConePair, open_div, closed_div: DecoratedSum) -> Relation:
    """sum_i (C_i; s) - sum_j c_j transpose(D_j), with identical cones cancelled.

    For each closed piece the row order of its transpose is chosen so that it
    cancels a term already present when possible.
    """
    S = _open_pieces(pair.open_side.cone, open_div)
    closed = pair.closed_side
    for D, _ in closed_div.items():
        if D.ambient_dim != pair.dim:
            raise PreconditionError(f"closed piece {D!r} lives in the wrong dimension")
    if not equals(phi_dm(closed), phi_dm(closed_div)):
        raise PreconditionError("closed_div is not an algebraic subdivision of the closed side")
    acc: dict = {}
    for P in S.pieces:
        T = DecoratedOpenCone.make(P, pair.s)
        acc[T] = acc.get(T, Fraction(0)) + 1
    for D, c in closed_div.items():
        cands = transpose_candidates(D)
        T = next((X for X in cands if acc.get(X)), cands[0])
        acc[T] = acc.get(T, Fraction(0)) - c
    prov = {
        "pair": pair.to_json(),
        "open_subdivision_used": [P.to_json() for P in S.pieces],
        "closed_subdivision_used": closed_div.to_json(),
    }
    return Relation(acc, prov)


def split_relation(pair: ConePair, open_points: Sequence[Sequence[int]],
                   closed_points: Sequence[Sequence[int]]) -> Relation:
    """Double subdivision relation from stellar splits of both sides at the given points."""
    C = pair.open_side.cone.closure()
    open_pieces = star_split([C], open_points) if open_points else [C]
    D = pair.closed_side
    closed_pieces = star_split([D.cone], closed_points) if closed_points else [D.cone]
    return double_subdivision_relation(pair, open_pieces, algebraic_subdivide(D, closed_pieces))


# ---------------------------------------------------------------- stuffle and shuffle

def _unit(n, i):
    v = [0] * n
    v[i] = 1
    return v


def _chen_gens(n: int, coords: Sequence[int]) -> list:
    gens, v = [], [0] * n
    for i in coords:
        v = list(v)
        v[i] = 1
        gens.append(v)
    return gens


def quasi_shuffles(k: int, l: int) -> list[tuple[tuple, tuple]]:
    """Pairs of order-preserving maps phi:[k]->[m], psi:[l]->[m] with joint image [m].

    Maps are given by their (0-based) images."""
    out = []
    for m in range(max(k, l), k + l + 1):
        for A in combinations(range(m), k):
            for B in combinations(range(m), l):
                if len(set(A) | set(B)) == m:
                    out.append((A, B))
    return out


def stuffle_subdivision(k: int, l: int) -> Subdivision:
    """Open subdivision of (open Chen cone in Q^k) x (open Chen cone in Q^l) into Chen-type cones."""
    if k < 1 or l < 1:
        raise PreconditionError("k and l must be at least 1")
    n = k + l
    parent = Cone.make(_chen_gens(n, range(k)) + _chen_gens(n, range(k, n)), n, open=True)
    pieces = []
    for A, B in quasi_shuffles(k, l):
        m = len(set(A) | set(B))
        w = [[0] * n for _ in range(m)]
        for i, q in enumerate(A):
            w[q][i] = 1
        for j, q in enumerate(B):
            w[q][k + j] = 1
        gens, acc = [], [0] * n
        for p in range(m):
            acc = [a + b for a, b in zip(acc, w[p])]
            gens.append(acc)
        pieces.append(Cone.make(gens, n, open=True))
    return Subdivision(parent, tuple(sorted(pieces, key=lambda c: (-len(c.generators), c.generators))), "open")


def _suffix_gens(n: int, order: Sequence[int]) -> list:
    """Suffix sums e_{o_p} + ... + e_{o_n}, p = 1..n."""
    gens = []
    for p in range(len(order)):
        v = [0] * n
        for i in order[p:]:
            v[i] = 1
        gens.append(v)
    return gens


def shuffles(k: int, l: int) -> list[tuple]:
    """(k,l)-shuffles as orderings of 0..k+l-1 keeping 0..k-1 and k..k+l-1 in order."""
    out = []
    for A in combinations(range(k + l), k):
        order, a, b = [], iter(range(k)), iter(range(k, k + l))
        for p in range(k + l):
            order.append(next(a) if p in A else next(b))
        out.append(tuple(order))
    return out


def shuffle_decomposition(s: Sequence[int], t: Sequence[int]) -> DecoratedSum:
    """[e1+..+ek]^{s1}..[ek]^{sk} [e_{k+1}+..]^{t1}.. as a sum of decorated Chen cones."""
    s, t = list(s), list(t)
    if not s or not t or min(s + t) < 1:
        raise PreconditionError("exponents must be at least 1")
    k, l = len(s), len(t)
    n = k + l
    right = []
    for p in range(l):
        v = [0] * n
        for i in range(k + p, n):
            v[i] = 1
        right.append(v)
    left = []
    for p in range(k):
        v = [0] * n
        for i in range(p, k):
            v[i] = 1
        left.append(v)
    D = DecoratedClosedCone.make(left + right, s + t, n)
    pieces = [Cone.make(_suffix_gens(n, order), n) for order in shuffles(k, l)]
    return algebraic_subdivide(D, pieces)


def chen_index_closed(D: DecoratedClosedCone) -> Optional[tuple]:
    """MZV index of a decorated closed Chen cone [e_S1]^{a1}[e_S2]^{a2}.. with
    nested supports S1 > S2 > ... of sizes n, n-1, ..., or None."""
    pairs = sorted(zip(D.generators, D.exponents), key=lambda p: -sum(p[0]))
    if any(x not in (0, 1) for g, _ in pairs for x in g):
        return None
    n = len(pairs)
    prev = None
    for i, (g, _) in enumerate(pairs):
        sup = {j for j, x in enumerate(g) if x}
        if len(sup) != n - i or (prev is not None and not sup < prev):
            return None
        prev = sup
    return tuple(e for _, e in pairs)


def decorated_to_mzv(S: DecoratedSum) -> Optional[dict]:
    out: dict = {}
    for D, c in S.items():
        idx = chen_index_closed(D)
        if idx is None:
            return None
        out[idx] = out.get(idx, Fraction(0)) + c
    return {k: out[k] for k in sorted(out) if out[k]}


# ---------------------------------------------------------------- reduction over Chen cones

def chen_index_open(T: DecoratedOpenCone) -> Optional[tuple]:
    """MZV index of an open Chen cone o<e_i1, e_i1+e_i2, ...> with s >= 1 on the chain."""
    gens = T.cone.generators
    if any(x not in (0, 1) for g in gens for x in g):
        return None
    sups = sorted(({j for j, x in enumerate(g) if x} for g in gens), key=len)
    prev: set = set()
    order = []
    for i, sup in enumerate(sups):
        if len(sup) != i + 1 or not prev < sup:
            return None
        (new,) = sup - prev
        order.append(new)
        prev = sup
    idx = tuple(T.s[j] for j in order)
    if any(x < 1 for x in idx):
        return None
    return idx


def atom_value(T: DecoratedOpenCone) -> Optional[dict]:
    """Exact reading of T as a rational multiple of one MZV, or None."""
    gens = T.cone.generators
    if not gens:
        return {(): Fraction(1)}
    idx = chen_index_open(T)
    if idx is not None:
        return {idx: Fraction(1)} if idx[0] >= 2 else None
    if len(gens) == 1:
        v = gens[0]
        w = sum(sj for vj, sj in zip(v, T.s) if vj)
        if w < 2:
            return None
        c = Fraction(1)
        for vj, sj in zip(v, T.s):
            if vj:
                c /= Fraction(vj) ** sj
        return {(w,): c}
    return None


def _chen_cones(k: int, d: int) -> list[Cone]:
    out = []
    for sigma in permutations(range(k), d):
        out.append(Cone.make(_chen_gens(k, sigma), k))
    return out


def _star_points(C: Cone) -> list[tuple]:
    pts = []
    g = C.generators
    for r in range(2, len(g) + 1):
        for sub in combinations(g, r):
            pts.append(el.primitive([sum(v[j] for v in sub) for j in range(C.ambient_dim)]))
    return sorted(set(pts))


def _subdivision_relations(k: int, s: tuple, dims: set, max_depth: int):
    """Levels of open star-subdivision relations of convergent Chen cones."""
    conv: dict = {}

    def ok(T):
        if T not in conv:
            conv[T] = is_convergent_sufficient(T)
        return conv[T]

    frontier = []
    for d in sorted(dims):
        for C in _chen_cones(k, d):
            if ok(DecoratedOpenCone.make(C.interior(), s)):
                frontier.append(C)
    seen = set(frontier)
    for _ in range(max_depth):
        rels, nxt = [], []
        for C in frontier:
            for p in _star_points(C):
                pieces = star_split([C], [p])
                S = open_subdivision(C.interior(), pieces)
                row = {DecoratedOpenCone.make(C.interior(), s): Fraction(1)}
                for P in S.pieces:
                    T = DecoratedOpenCone.make(P, s)
                    row[T] = row.get(T, Fraction(0)) - 1
                if all(ok(T) for T in row):
                    rels.append(row)
                    for P in pieces:
                        if P not in seen:
                            seen.add(P)
                            nxt.append(P)
        yield rels
        frontier = nxt


def _reduce(target: dict, rows: list[dict]) -> Optional[dict]:
    """Eliminate non-atom terms of target using rows; None if some remain."""
    cols = sorted({T for r in rows for T in r} | set(target),
                  key=lambda T: (atom_value(T) is not None, T))
    index = {T: i for i, T in enumerate(cols)}
    natom = sum(1 for T in cols if atom_value(T) is None)
    M = [[Fraction(0)] * len(cols) for _ in rows]
    for i, r in enumerate(rows):
        for T, c in r.items():
            M[i][index[T]] = c
    R, piv = el.rref(M) if M else ((), ())
    vec = [Fraction(0)] * len(cols)
    for T, c in target.items():
        vec[index[T]] = c
    for row, p in zip(R, piv):
        if p < natom and vec[p]:
            f = vec[p]
            vec = [a - f * b for a, b in zip(vec, row)]
    if any(vec[:natom]):
        return None
    return {cols[i]: vec[i] for i in range(natom, len(cols)) if vec[i]}


def _atoms_to_mzv(terms: dict) -> dict:
    out: dict = {}
    for T, c in terms.items():
        for idx, a in atom_value(T).items():
            out[idx] = out.get(idx, Fraction(0)) + c * a
    return {k: out[k] for k in sorted(out, key=lambda x: (sum(x), len(x), x)) if out[k]}


def normalize_mzv_form(form: dict) -> dict:
    keys = sorted(form, key=lambda x: (sum(x), len(x), x))
    if not keys:
        return {}
    lead = form[keys[0]]
    return {k: form[k] / lead for k in keys}


def reduce_over_chen(rel: Relation, max_depth: int = 3, normalize: bool = True) -> Optional[dict]:
    """Rewrite rel as a relation among MZVs, or None when the bounded search fails.

    Chen cones and rays are read off directly. Other cones are eliminated with
    open star-subdivision relations of convergent Chen cones (stars at sums of
    generators, nested up to max_depth levels).
    """
    terms = dict(rel.terms)
    if not terms:
        return {}
    pending = [T for T in terms if atom_value(T) is None]
    if pending:
        groups: dict = {}
        for T in pending:
            groups.setdefault((T.cone.ambient_dim, T.s), set()).add(dimension(T.cone))
        gens = {key: _subdivision_relations(key[0], key[1], dims, max_depth) for key, dims in groups.items()}
        rows: list = []
        reduced = None
        active = dict(gens)
        while active and reduced is None:
            for key in list(active):
                level = next(active[key], None)
                if level is None:
                    del active[key]
                else:
                    rows.extend(level)
            reduced = _reduce(terms, rows)
        if reduced is None:
            return None
        terms = reduced
    form = _atoms_to_mzv(terms)
    return normalize_mzv_form(form) if normalize else form


# ---------------------------------------------------------------- numerical verification

def verify_relation(rel: Relation, depth: int = 1000, tol: float = 1e-6) -> bool:
    """|sum c zeta°(T)| <= tol + sum |c| err(T), refusing uncertified cones."""
    vals, errs = [], []
    for T, c in rel.terms.items():
        if not is_convergent_sufficient(T):
            raise PreconditionError(f"{T!r} is not certified convergent")
        res = eval_open_czv(T, depth)
        vals.append(float(c) * res.value)
        errs.append(abs(float(c)) * res.error_estimate)
    return abs(math.fsum(vals)) <= tol + math.fsum(errs)


def verify_mzv_form(form: dict, depth: int = 1000, tol: float = 1e-6) -> bool:
    vals, errs = [], []
    for idx, c in form.items():
        if not idx:
            vals.append(float(c))
            continue
        res = mzv(idx, depth)
        vals.append(float(c) * res.value)
        errs.append(abs(float(c)) * res.error_estimate)
    return abs(math.fsum(vals)) <= tol + math.fsum(errs)
