"""Decorated smooth closed cones [v_1]^{s_1}...[v_k]^{s_k} and conical derivations."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Mapping, Optional, Sequence

from . import exactlin as el
from .cones import Cone, Subdivision, dimension, is_smooth
from .errors import PreconditionError, ShapeError
from .fractions import FracSum, sum_all


@dataclass(frozen=True, order=True)
class DecoratedClosedCone:
    ambient_dim: int
    generators: tuple
    exponents: tuple

    @classmethod
    def make(cls, generators: Sequence[Sequence], exponents: Sequence[int],
             ambient_dim: Optional[int] = None, check: bool = True) -> "DecoratedClosedCone":
        if len(generators) != len(exponents):
            raise ShapeError("generators and exponents differ in length")
        if ambient_dim is None:
            if not generators:
                raise ShapeError("ambient_dim is required for the empty decorated cone")
            ambient_dim = len(generators[0])
        pairs = {}
        for g, s in zip(generators, exponents):
            g = tuple(int(x) for x in g)
            if len(g) != ambient_dim:
                raise ShapeError(f"generator {list(g)} does not have length {ambient_dim}")
            if int(s) < 1:
                raise PreconditionError("exponents must be at least 1")
            if g in pairs:
                raise PreconditionError(f"generator {list(g)} repeated")
            pairs[g] = int(s)
        gens = tuple(sorted(pairs))
        D = cls(ambient_dim, gens, tuple(pairs[g] for g in gens))
        if check and not is_smooth(D.cone)[0]:
            raise PreconditionError(f"{D!r} is not on a smooth cone")
        if check and any(el.primitive(g) != g for g in gens):
            raise PreconditionError("generators must be primitive")
        return D

    @property
    def cone(self) -> Cone:
        return Cone(self.ambient_dim, self.generators, False)

    @property
    def weight(self) -> int:
        return sum(self.exponents)

    def bump(self, j: int, by: int = 1) -> "DecoratedClosedCone":
        e = list(self.exponents)
        e[j] += by
        return DecoratedClosedCone(self.ambient_dim, self.generators, tuple(e))

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "generators": [list(g) for g in self.generators],
                "exponents": list(self.exponents)}

    @classmethod
    def from_json(cls, obj: dict) -> "DecoratedClosedCone":
        return cls.make(obj["generators"], obj["exponents"], obj.get("ambient_dim"))

    def __repr__(self):
        if not self.generators:
            return "[]"
        return "".join("[" + ",".join(map(str, g)) + "]" + (f"^{s}" if s > 1 else "")
                       for g, s in zip(self.generators, self.exponents))


class DecoratedSum:
    """Formal Q-combination of decorated closed cones."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[DecoratedClosedCone, Fraction]] = None):
        t: dict = {}
        for D, c in (terms or {}).items():
            t[D] = t.get(D, Fraction(0)) + Fraction(c)
        self._terms = {D: t[D] for D in sorted(t) if t[D]}

    @classmethod
    def of(cls, D: DecoratedClosedCone, c=1) -> "DecoratedSum":
        return cls({D: Fraction(c)})

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __eq__(self, other):
        return isinstance(other, DecoratedSum) and self._terms == other._terms

    def __add__(self, other):
        t = dict(self._terms)
        for D, c in other._terms.items():
            t[D] = t.get(D, Fraction(0)) + c
        return DecoratedSum(t)

    def __neg__(self):
        return DecoratedSum({D: -c for D, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, a):
        a = Fraction(a)
        return DecoratedSum({D: c * a for D, c in self._terms.items()})

    __rmul__ = __mul__

    def to_json(self) -> list:
        return [{"coeff": f"{c.numerator}/{c.denominator}", **D.to_json()} for D, c in self._terms.items()]

    def __repr__(self):
        if not self._terms:
            return "0"
        return " + ".join((f"{c}*" if c != 1 else "") + repr(D) for D, c in self._terms.items())


def _as_sum(D) -> DecoratedSum:
    return D if isinstance(D, DecoratedSum) else DecoratedSum.of(D)


def conical_derive(D, i: int) -> DecoratedSum:
    """delta_i([v_1]^{s_1}...) = sum_j s_j (e_i*, v_j) [..v_j^{s_j+1}..]."""
    acc: dict = {}
    for T, c in _as_sum(D).items():
        if not 0 <= i < T.ambient_dim:
            raise ShapeError(f"coordinate index {i} out of range")
        for j, (v, s) in enumerate(zip(T.generators, T.exponents)):
            if v[i]:
                B = T.bump(j)
                acc[B] = acc.get(B, Fraction(0)) + c * s * v[i]
    return DecoratedSum(acc)


def conical_derive_dual(D, basis: Sequence[Sequence], target: int, order: int = 1) -> DecoratedSum:
    """Iterated delta_{v*} with v* the target row of dual_rows(basis)."""
    coef = el.dual_rows(basis)[target]
    out = _as_sum(D)
    for _ in range(order):
        acc = DecoratedSum()
        for j, cj in enumerate(coef):
            if cj:
                acc = acc + conical_derive(out, j) * cj
        out = acc
    return out


def algebraic_subdivide(D: DecoratedClosedCone, geo) -> DecoratedSum:
    """prod 1/(s_i-1)! delta_{v_i*}^{s_i-1} applied to the sum of undecorated pieces."""
    pieces = geo.pieces if isinstance(geo, Subdivision) else tuple(geo)
    k = D.ambient_dim
    dim = len(D.generators)
    base = {}
    for P in pieces:
        ok, gens = is_smooth(P)
        if not ok:
            raise PreconditionError(f"piece {P!r} is not smooth")
        if P.ambient_dim != k or dimension(P) != dim:
            raise PreconditionError(f"piece {P!r} does not match the decorated cone")
        T = DecoratedClosedCone(k, gens, (1,) * len(gens))
        base[T] = base.get(T, Fraction(0)) + 1
    out = DecoratedSum(base)
    for i, s in enumerate(D.exponents):
        if s > 1:
            out = conical_derive_dual(out, D.generators, i, s - 1) * Fraction(1, factorial(s - 1))
    return out


def decorated_product(A: DecoratedClosedCone, B: DecoratedClosedCone) -> DecoratedClosedCone:
    """[v]^a * [v]^b = [v]^(a+b) on a common primary set; other products are rejected."""
    if A.ambient_dim != B.ambient_dim or A.generators != B.generators:
        raise PreconditionError("decorated cones on different generator sets cannot be multiplied")
    return DecoratedClosedCone(A.ambient_dim, A.generators,
                               tuple(a + b for a, b in zip(A.exponents, B.exponents)))


def product_sum(X, Y) -> DecoratedSum:
    """Bilinear extension of decorated_product."""
    acc: dict = {}
    for A, a in _as_sum(X).items():
        for B, b in _as_sum(Y).items():
            P = decorated_product(A, B)
            acc[P] = acc.get(P, Fraction(0)) + a * b
    return DecoratedSum(acc)


def undecorated(D: DecoratedClosedCone) -> DecoratedClosedCone:
    return DecoratedClosedCone(D.ambient_dim, D.generators, (1,) * len(D.generators))


def reconstruct(D: DecoratedClosedCone) -> DecoratedSum:
    """Raise exponents of the undecorated cone by dual derivations (factorially normalized)."""
    out = DecoratedSum.of(undecorated(D))
    for i, s in enumerate(D.exponents):
        if s > 1:
            out = conical_derive_dual(out, D.generators, i, s - 1) * Fraction(1, factorial(s - 1))
    return out


def phi_dm(D) -> FracSum:
    """[v_1]^{s_1}...[v_k]^{s_k} -> w(v_1..v_k) / prod L_{v_i}^{s_i}."""
    parts = []
    nvars = None
    for T, c in _as_sum(D).items():
        nvars = T.ambient_dim
        if not T.generators:
            parts.append(FracSum.one(nvars) * c)
            continue
        w = el.minor_weight(el.transpose(el.as_matrix(T.generators)))
        parts.append(FracSum.term(c * w, list(zip(T.generators, T.exponents)), nvars))
    return sum_all(parts, nvars)
