"""Fractions with linear-form poles.

A term is c / (L_1^{s_1} ... L_k^{s_k}) with primitive integer forms L_i whose
first nonzero coefficient is positive. A FracSum maps pole keys (sorted
tuples of (form, multiplicity)) to nonzero rational coefficients.

Equality is decided by an iterated partial-fraction normal form: expand in
z_n over Q(z_1..z_{n-1}), then recurse on the coefficients. The result is a
unique sum of triangular pure terms.
"""
from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Mapping, Optional, Sequence

from . import exactlin as el
from .cones import Cone, contains_line, is_simplicial, simplicialize
from .errors import PoleError, PreconditionError, ShapeError

Key = tuple  # tuple of (form, mult), sorted by form


def normalize_form(v: Sequence) -> tuple[tuple, Fraction]:
    """Split v = scale * L with L primitive and leading coefficient positive."""
    v = el.as_vec(v)
    p = el.primitive(v)
    lead = next(i for i, x in enumerate(p) if x)
    if p[lead] < 0:
        p = tuple(-x for x in p)
    return p, v[lead] / p[lead]


def make_term(coeff, poles: Iterable[tuple[Sequence, int]]) -> tuple[Key, Fraction]:
    """Normalize a term c / prod(v^m); proportional forms are merged."""
    c = Fraction(coeff)
    mults: dict = {}
    for v, m in poles:
        if m == 0:
            continue
        L, scale = normalize_form(v)
        c /= scale ** m
        mults[L] = mults.get(L, 0) + m
    return tuple(sorted((L, m) for L, m in mults.items() if m)), c


def _key_degree(key: Key) -> int:
    return sum(m for _, m in key)


def _sort_key(key: Key):
    return (_key_degree(key), key)


class FracSum:
    """Formal Q-combination of pole terms, kept in canonical order."""

    __slots__ = ("_terms", "nvars")

    def __init__(self, terms: Optional[Mapping[Key, Fraction]] = None, nvars: Optional[int] = None):
        t = {}
        for k, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                t[k] = t.get(k, Fraction(0)) + c
        self._terms = {k: t[k] for k in sorted(t, key=_sort_key) if t[k]}
        if nvars is None:
            for k in self._terms:
                if k:
                    nvars = len(k[0][0])
                    break
        self.nvars = nvars

    @classmethod
    def term(cls, coeff, poles, nvars=None) -> "FracSum":
        key, c = make_term(coeff, poles)
        return cls({key: c}, nvars)

    @classmethod
    def one(cls, nvars=None) -> "FracSum":
        return cls({(): Fraction(1)}, nvars)

    def items(self):
        return self._terms.items()

    def keys(self):
        return self._terms.keys()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __eq__(self, other):
        return isinstance(other, FracSum) and self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __add__(self, other: "FracSum") -> "FracSum":
        t = dict(self._terms)
        for k, c in other._terms.items():
            t[k] = t.get(k, Fraction(0)) + c
        return FracSum(t, self.nvars if self.nvars is not None else other.nvars)

    def __neg__(self):
        return FracSum({k: -c for k, c in self._terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, a):
        a = Fraction(a)
        return FracSum({k: c * a for k, c in self._terms.items()}, self.nvars)

    __rmul__ = __mul__

    def degree_set(self) -> set:
        return {_key_degree(k) for k in self._terms}

    def to_json(self) -> list:
        return [{"coeff": f"{c.numerator}/{c.denominator}",
                 "poles": [{"form": list(L), "mult": m} for L, m in k]} for k, c in self._terms.items()]

    @classmethod
    def from_json(cls, arr, nvars=None) -> "FracSum":
        out = cls({}, nvars)
        for t in arr:
            out = out + cls.term(Fraction(t["coeff"]), [(p["form"], p["mult"]) for p in t["poles"]], nvars)
        return out

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for k, c in self._terms.items():
            den = "*".join(_fmt_form(L) + (f"^{m}" if m > 1 else "") for L, m in k)
            parts.append(f"{c}" + (f"/({den})" if den else ""))
        return " + ".join(parts)


def _fmt_form(L) -> str:
    out = []
    for i, a in enumerate(L):
        if a:
            out.append(("" if a == 1 else "-" if a == -1 else f"{a}") + f"z{i + 1}")
    return "(" + "+".join(out).replace("+-", "-") + ")"


def sum_all(fs: Iterable[FracSum], nvars=None) -> FracSum:
    t: dict = {}
    for f in fs:
        nvars = nvars if nvars is not None else f.nvars
        for k, c in f.items():
            t[k] = t.get(k, Fraction(0)) + c
    return FracSum(t, nvars)


# ---------------------------------------------------------------- Phi

def phi_simplicial(gens: Sequence[Sequence], k: int) -> FracSum:
    if not gens:
        return FracSum.one(k)
    w = el.minor_weight(el.transpose(el.as_matrix(gens)))
    return FracSum.term(w, [(g, 1) for g in gens], k)


def phi(C: Cone) -> FracSum:
    """Phi of a closed cone: w(v)/prod L_v on simplicial pieces, 0 on cones with lines."""
    C = C.closure()
    k = C.ambient_dim
    if not C.generators:
        return FracSum.one(k)
    if is_simplicial(C):
        return phi_simplicial(C.generators, k)
    if contains_line(C) is not None:
        return FracSum({}, k)
    return sum_all((phi_simplicial(P.generators, k) for P in simplicialize(C).pieces), k)


# ---------------------------------------------------------------- evaluation

def evaluate(f: FracSum, x: Sequence) -> Fraction:
    x = el.as_vec(x)
    total = Fraction(0)
    for key, c in f.items():
        val = c
        for L, m in key:
            if len(L) != len(x):
                raise ShapeError("point dimension differs from form length")
            lx = el.dot(L, x)
            if lx == 0:
                raise PoleError(f"form {list(L)} vanishes at {[str(v) for v in x]}")
            val /= lx ** m
        total += val
    return total


def _forms(f: FracSum) -> set:
    return {L for k in f.keys() for L, _ in k}


def random_points(f: FracSum, count: int, seed: int = 0, nvars: Optional[int] = None) -> list[tuple]:
    """Seeded random rational points avoiding every pole of f."""
    n = nvars or f.nvars or 1
    rng = random.Random(seed)
    forms = _forms(f)
    pts = []
    while len(pts) < count:
        x = tuple(Fraction(rng.randint(-60, 60), rng.randint(1, 13)) for _ in range(n))
        if all(el.dot(L, x) != 0 for L in forms):
            pts.append(x)
    return pts


# ---------------------------------------------------------------- purity and GenFrac

def is_pure(key_or_term) -> bool:
    key = key_or_term[0] if isinstance(key_or_term, tuple) and len(key_or_term) == 2 \
        and isinstance(key_or_term[1], Fraction) else key_or_term
    forms = [L for L, _ in key]
    return not forms or el.rank(forms) == len(forms)


def _circuits(forms: list) -> list[tuple[int, tuple, tuple]]:
    """All (index of L, independent subset T, coefficients) with L = sum a_j T_j minimal."""
    out = []
    for i, L in enumerate(forms):
        others = [j for j in range(len(forms)) if j != i]
        for size in range(1, len(others) + 1):
            hit = []
            for T in combinations(others, size):
                rows = [forms[j] for j in T]
                if el.rank(rows) != size:
                    continue
                a = el.solve(el.transpose(rows), L)
                if a is not None:
                    hit.append((i, T, a))
            if hit:
                out.extend(hit)
                break
    return out


def _first_circuit(forms: list):
    """First form (in sorted order) dependent on its predecessors, expressed
    through the lexicographically smallest independent subset of them."""
    for i in range(1, len(forms)):
        if el.rank(forms[:i + 1]) > el.rank(forms[:i]):
            continue
        for size in range(1, i + 1):
            for T in combinations(range(i), size):
                rows = [forms[j] for j in T]
                if el.rank(rows) != size:
                    continue
                a = el.solve(el.transpose(rows), forms[i])
                if a is not None:
                    return i, T, a
    return None


def _key_dict(key: Key) -> dict:
    return dict(key)


def _dict_key(d: dict) -> Key:
    return tuple(sorted((L, m) for L, m in d.items() if m))


def _add(acc: dict, key: Key, c: Fraction):
    v = acc.get(key, Fraction(0)) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


def _substitute(key: Key, L, Ts, a, out_stack, c):
    """One application of 1 = sum a_j T_j / L to the term c/key."""
    d = _key_dict(key)
    for Tj, aj in zip(Ts, a):
        nd = dict(d)
        nd[Tj] -= 1
        nd[L] = nd.get(L, 0) + 1
        out_stack.append((_dict_key(nd), c * aj))


@lru_cache(maxsize=None)
def _pure_expand(key: Key) -> tuple:
    if is_pure(key):
        return ((key, Fraction(1)),)
    forms = [L for L, _ in key]
    i, T, a = _first_circuit(forms)
    L = forms[i]
    Ts = [forms[j] for j in T]
    acc: dict = {}
    stack = [(key, Fraction(1))]
    while stack:
        k, c = stack.pop()
        d = _key_dict(k)
        if all(d.get(t, 0) > 0 for t in Ts):
            _substitute(k, L, Ts, a, stack, c)
        else:
            for kk, cc in _pure_expand(k):
                _add(acc, kk, c * cc)
    return tuple(sorted(acc.items(), key=lambda kv: _sort_key(kv[0])))


def decompose_pure(f: FracSum) -> FracSum:
    """Rewrite f as a combination of pure terms by repeated linear substitutions."""
    acc: dict = {}
    for key, c in f.items():
        for kk, cc in _pure_expand(key):
            _add(acc, kk, c * cc)
    return FracSum(acc, f.nvars)


@lru_cache(maxsize=None)
def _positive_expand(key: Key) -> tuple:
    if is_pure(key):
        return ((key, Fraction(1)),)
    forms = [L for L, _ in key]
    circ = _circuits(forms)
    i, T, a = min(circ, key=lambda t: (sum(1 for x in t[2] if x < 0), t[0], t[1]))
    L = forms[i]
    Ts = [forms[j] for j in T]
    acc: dict = {}
    neg = [j for j, x in enumerate(a) if x < 0]
    if not neg:
        stack = [(key, Fraction(1))]
        while stack:
            k, c = stack.pop()
            d = _key_dict(k)
            if all(d.get(t, 0) > 0 for t in Ts):
                _substitute(k, L, Ts, a, stack, c)
            else:
                for kk, cc in _positive_expand(k):
                    _add(acc, kk, c * cc)
    else:
        j = neg[0]
        L1, a1 = Ts[j], a[j]
        M, scale = normalize_form([-a1 * x + y for x, y in zip(L1, L)])
        # 1/(L1 L) = (1/scale)/(L1 M) + (-a1/scale)/(M L)
        stack = [(key, Fraction(1))]
        while stack:
            k, c = stack.pop()
            d = _key_dict(k)
            if d.get(L1, 0) > 0 and d.get(L, 0) > 0:
                d1 = dict(d)
                d1[L] -= 1
                d1[M] = d1.get(M, 0) + 1
                d2 = dict(d)
                d2[L1] -= 1
                d2[M] = d2.get(M, 0) + 1
                stack.append((_dict_key(d1), c / scale))
                stack.append((_dict_key(d2), c * (-a1) / scale))
            else:
                for kk, cc in _positive_expand(k):
                    _add(acc, kk, c * cc)
    return tuple(sorted(acc.items(), key=lambda kv: _sort_key(kv[0])))


def decompose_pure_positive(t) -> FracSum:
    """Positive pure decomposition of a term whose forms have nonnegative coefficients."""
    f = t if isinstance(t, FracSum) else FracSum({t[0]: t[1]})
    acc: dict = {}
    for key, c in f.items():
        if c <= 0:
            raise PreconditionError("term coefficient must be positive")
        for L, _ in key:
            if any(x < 0 for x in L):
                raise PreconditionError(f"form {list(L)} has a negative coefficient")
        for kk, cc in _positive_expand(key):
            _add(acc, kk, c * cc)
    return FracSum(acc, f.nvars)


# ---------------------------------------------------------------- derivations

def derive(f: FracSum, i: int) -> FracSum:
    """The derivation -d/dz_i (0-based index i)."""
    if f.nvars is not None and not 0 <= i < f.nvars:
        raise ShapeError(f"variable index {i} out of range")
    acc: dict = {}
    for key, c in f.items():
        d = _key_dict(key)
        for L, m in key:
            if L[i]:
                nd = dict(d)
                nd[L] = m + 1
                _add(acc, _dict_key(nd), c * m * L[i])
    return FracSum(acc, f.nvars)


def derive_dual(f: FracSum, forms: Sequence[Sequence], target: int, order: int = 1) -> FracSum:
    """Apply the dual derivation sum_j c_j d_j, with c the target row of dual_rows(forms)."""
    D = el.dual_rows(forms)
    c = D[target]
    for _ in range(order):
        f = sum_all((derive(f, j) * cj for j, cj in enumerate(c) if cj), f.nvars)
    return f


def homogeneous_components(f: FracSum) -> dict[int, FracSum]:
    comps: dict = {}
    for key, c in f.items():
        comps.setdefault(_key_degree(key), {})[key] = c
    return {deg: FracSum(t, f.nvars) for deg, t in sorted(comps.items())}


# ---------------------------------------------------------------- canonical form

def _level(L) -> int:
    return max(i for i, x in enumerate(L) if x)


def _neg_binom(s: int, m: int) -> int:
    """binom(-s, m)."""
    return (-1) ** m * comb(s + m - 1, m)


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _times(key: Key, extra: dict) -> Key:
    d = _key_dict(key)
    for L, m in extra.items():
        d[L] = d.get(L, 0) + m
    return _dict_key(d)


@lru_cache(maxsize=None)
def _canon(key: Key) -> tuple:
    """Iterated partial fraction expansion of 1/key."""
    if not key:
        return (((), Fraction(1)),)
    v = max(_level(L) for L, _ in key)
    top = [(L, m) for L, m in key if _level(L) == v]
    rest = [(L, m) for L, m in key if _level(L) != v]
    acc: dict = {}
    if len(top) == 1:
        L, m = top[0]
        for kk, cc in _canon(tuple(rest)):
            _add(acc, _times(kk, {L: m}), cc)
        return tuple(acc.items())
    const = Fraction(1)
    poles = []
    for L, m in top:
        a = Fraction(L[v])
        const /= a ** m
        p = tuple(-Fraction(x) / a for x in L[:v]) + (Fraction(0),) * (len(L) - v)
        poles.append((L, m, a, p))
    for i, (Li, si, ai, pi) in enumerate(poles):
        others = [(j, pl) for j, pl in enumerate(poles) if j != i]
        dvecs = [tuple(x - y for x, y in zip(pi, pl[3])) for _, pl in others]
        for r in range(1, si + 1):
            for comp in _compositions(si - r, len(others)):
                coef = const * ai ** r
                dpoles = []
                for (j, pl), mj, dv in zip(others, comp, dvecs):
                    coef *= _neg_binom(pl[1], mj)
                    dpoles.append((dv, pl[1] + mj))
                lower_key, lower_c = make_term(coef, dpoles + rest)
                for kk, cc in _canon(lower_key):
                    _add(acc, _times(kk, {Li: r}), lower_c * cc)
    return tuple(acc.items())


def canonical_form(f: FracSum) -> FracSum:
    acc: dict = {}
    for key, c in f.items():
        for kk, cc in _canon(key):
            _add(acc, kk, c * cc)
    return FracSum(acc, f.nvars)


def equals(f: FracSum, g: FracSum, seed: int = 0) -> bool:
    """Exact equality as rational functions via the canonical form."""
    diff = f - g
    same = not canonical_form(diff)
    if same and diff:
        # secondary guard: the normal form must agree with evaluation
        n = diff.nvars or 1
        for x in random_points(diff, 2, seed, n):
            if evaluate(diff, x) != 0:
                raise AssertionError("canonical form disagrees with evaluation")
    return same
