"""Numerical conical, Shintani-type and multiple zeta values.

Every evaluation reduces to sums
    S(n) = sum over m in {1..n}^r of prod_j L_j(m)^(-s_j)
with nonnegative integer forms L_j. The sums are accumulated shell by shell
(all m with max(m) = n), and the limit is estimated by a least-squares fit
of S(n) against 1, log(n)^a / n^b. The fit is an empirical acceleration; the
reported error estimate is the change of the fitted limit between depth N/2
and N, not a proven bound.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Optional, Sequence

import numpy as np

from .cones import (Cone, contains_point, membership_mask, open_subdivision,
                    smooth_subdivision_of)
from .decorated import DecoratedClosedCone
from .errors import PoleError, PreconditionError, ShapeError

EPS = np.finfo(float).eps


def thread_count() -> int:
    """Parallelism cap from CONEZETA_THREADS; evaluation is single-threaded, so
    results never depend on it."""
    try:
        return max(1, int(os.environ.get("CONEZETA_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


@dataclass(frozen=True, order=True)
class DecoratedOpenCone:
    cone: Cone
    s: tuple

    @classmethod
    def make(cls, cone: Cone, s: Sequence[int]) -> "DecoratedOpenCone":
        cone = cone.interior()
        s = tuple(int(x) for x in s)
        if len(s) != cone.ambient_dim:
            raise ShapeError(f"s has length {len(s)} but the cone lives in dimension {cone.ambient_dim}")
        if any(x < 0 for x in s):
            raise PreconditionError("exponents must be nonnegative")
        if any(x < 0 for g in cone.generators for x in g):
            raise PreconditionError("decorated open cones must lie in the first orthant")
        return cls(cone, s)

    @classmethod
    def of(cls, generators: Sequence[Sequence[int]], s: Sequence[int], ambient_dim: Optional[int] = None):
        return cls.make(Cone.make(generators, ambient_dim or len(s), True), s)

    def to_json(self) -> dict:
        return {"cone": self.cone.to_json(), "s": list(self.s)}

    @classmethod
    def from_json(cls, obj: dict) -> "DecoratedOpenCone":
        return cls.make(Cone.from_json({**obj["cone"], "open": True}), obj["s"])

    def __repr__(self):
        return f"({self.cone!r};{','.join(map(str, self.s))})"


@dataclass(frozen=True)
class ZetaResult:
    value: float
    depth: int
    error_estimate: float
    certified: bool
    partial_sum: float

    def to_json(self) -> dict:
        return {"value": self.value, "N": self.depth, "error_estimate": self.error_estimate,
                "certified": self.certified, "partial_sum": self.partial_sum}


# ---------------------------------------------------------------- pieces and convergence

@lru_cache(maxsize=4096)
def smooth_open_pieces(C: Cone) -> tuple:
    """Smooth open cones partitioning the open cone C."""
    C = C.interior()
    if not C.generators:
        return (C,)
    closed = smooth_subdivision_of(C.closure())
    return open_subdivision(C, closed).pieces


def piece_forms(gens: Sequence[Sequence[int]], s: Sequence[int]) -> tuple[list, list]:
    """Forms L_j(m) = sum_i m_i v_ij for coordinates with s_j > 0 not vanishing on the piece."""
    forms, exps = [], []
    for j, sj in enumerate(s):
        if sj == 0:
            continue
        row = [int(g[j]) for g in gens]
        if any(row):
            forms.append(row)
            exps.append(int(sj))
    return forms, exps


def forms_converge(forms: Sequence[Sequence[int]], s: Sequence[int], r: int) -> bool:
    """Convergence of sum_{m >= 1} prod L_j(m)^(-s_j) for nonnegative forms.

    Holds iff for every nonempty set T of variables, the exponents of the
    forms involving T add up to more than |T|.
    """
    supp = [frozenset(i for i, a in enumerate(L) if a) for L in forms]
    for size in range(1, r + 1):
        for T in combinations(range(r), size):
            Ts = set(T)
            if sum(sj for sp, sj in zip(supp, s) if sp & Ts) <= size:
                return False
    return True


def is_convergent_sufficient(doc: DecoratedOpenCone) -> bool:
    for P in smooth_open_pieces(doc.cone):
        forms, exps = piece_forms(P.generators, doc.s)
        if not forms_converge(forms, exps, len(P.generators)):
            return False
    return True


# ---------------------------------------------------------------- summation kernel

class _Compensated:
    """Neumaier-compensated accumulation of equal-length vectors."""

    def __init__(self, n: int):
        self.s = np.zeros(n)
        self.c = np.zeros(n)

    def add(self, x: np.ndarray):
        t = self.s + x
        big = np.abs(self.s) >= np.abs(x)
        self.c += np.where(big, (self.s - t) + x, (x - t) + self.s)
        self.s = t

    def total(self) -> np.ndarray:
        return self.s + self.c


def _cumsum(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    s = c = 0.0
    for i, v in enumerate(x.tolist()):
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i] = s + c
    return out


def _term_values(base, grids, A, s):
    val = None
    for j in range(len(s)):
        L = base[j] + sum(A[j][i] * g for i, g in enumerate(grids) if A[j][i])
        term = np.power(L, -float(s[j])) if not np.isscalar(L) else np.full(grids[0].shape, float(L) ** -s[j])
        val = term if val is None else val * term
    return val


def shell_sums(A: Sequence[Sequence[int]], s: Sequence[int], r: int, N: int) -> np.ndarray:
    """Shell sums h[n], n = 0..N, of prod_j (A_j . m)^(-s_j) over max(m) = n, m in {1..N}^r."""
    h = np.zeros(N + 1)
    if r == 0:
        h[0] = 1.0
        return h
    A = [[int(x) for x in row] for row in A]
    if not A:
        # empty product: count lattice points of each shell
        n = np.arange(N + 1, dtype=float)
        h[1:] = n[1:] ** r - (n[1:] - 1) ** r
        return h
    m = np.arange(1, N + 1, dtype=float)
    if r == 1:
        vals = np.ones(N)
        for row, sj in zip(A, s):
            vals = vals * np.power(row[0] * m, -float(sj))
        h[1:] = vals
        return h
    M1, M2 = np.meshgrid(m, m, indexing="ij")
    K2 = np.maximum(M1, M2).astype(np.int64).ravel()
    acc = _Compensated(N + 1)
    outer_ranges = [range(1, N + 1)] * (r - 2)
    for outer in product(*outer_ranges):
        base = [float(sum(row[i] * outer[i] for i in range(r - 2))) for row in A]
        sub = [[row[r - 2], row[r - 1]] for row in A]
        vals = np.ones_like(M1)
        for j, sj in enumerate(s):
            L = base[j] + sub[j][0] * M1 + sub[j][1] * M2
            vals *= np.power(L, -float(sj))
        om = max(outer) if outer else 0
        K = np.maximum(K2, om) if om else K2
        acc.add(np.bincount(K, weights=vals.ravel(), minlength=N + 1))
    return acc.total()


def _basis(n: np.ndarray, logs: int) -> np.ndarray:
    cols = [np.ones_like(n)]
    ln = np.log(n)
    for b in (1, 2, 3):
        for a in range(logs + 1):
            cols.append(ln ** a / n ** b)
    return np.stack(cols, axis=1)


def _fit_limit(S: np.ndarray, N: int, logs: int) -> float:
    lo = max(4, N // 8)
    n = np.arange(lo, N + 1, dtype=float)
    X = _basis(n, logs)
    scale = np.max(np.abs(X), axis=0)
    coef, *_ = np.linalg.lstsq(X / scale, S[lo:N + 1], rcond=None)
    return float(coef[0] / scale[0])


def extrapolate(shells: np.ndarray, N: int, rmax: int, certified: bool) -> tuple[float, float, float]:
    """(value, error estimate, raw partial sum) from shell sums h[0..N]."""
    S = _cumsum(shells)
    raw = float(S[N])
    half = max(1, N // 2)
    if not certified or N < 64:
        return raw, float(abs(raw - float(S[half]))), raw
    logs = min(max(rmax - 1, 1), 2)
    v = _fit_limit(S, N, logs)
    v_half = _fit_limit(S, half, logs)
    err = float(abs(v - v_half) + 8 * EPS * abs(v))
    return v, err, raw


def _evaluate_pieces(pieces: Sequence[tuple[list, list, int]], N: int, certified: bool) -> ZetaResult:
    acc = _Compensated(N + 1)
    rmax = 0
    for forms, exps, r in pieces:
        rmax = max(rmax, r)
        acc.add(shell_sums(forms, exps, r, N))
    v, err, raw = extrapolate(acc.total(), N, rmax, certified)
    return ZetaResult(v, N, err, certified, raw)


# ---------------------------------------------------------------- public evaluators

def eval_open_czv(doc: DecoratedOpenCone, depth: int = 1000, method: str = "auto") -> ZetaResult:
    """zeta°(C; s) = sum over lattice points of open C of prod n_j^(-s_j), with 0^s = 1."""
    certified = is_convergent_sufficient(doc)
    k = doc.cone.ambient_dim
    if method == "box" or (method == "auto" and k * depth <= 60):
        return _eval_box(doc, depth, certified)
    pieces = []
    for P in smooth_open_pieces(doc.cone):
        forms, exps = piece_forms(P.generators, doc.s)
        pieces.append((forms, exps, len(P.generators)))
    return _evaluate_pieces(pieces, depth, certified)


def _eval_box(doc: DecoratedOpenCone, N: int, certified: bool) -> ZetaResult:
    """Direct enumeration of lattice points, shells by largest coordinate."""
    k = doc.cone.ambient_dim
    s = np.array(doc.s, dtype=float)
    acc = _Compensated(N + 1)
    grid = np.arange(0, N + 1, dtype=np.int64)
    if k == 1:
        slabs = [np.zeros((0,), dtype=np.int64)]
    else:
        slabs = list(product(range(N + 1), repeat=k - 1))
    for outer in slabs:
        pts = np.column_stack([np.full(N + 1, x, dtype=np.int64) for x in outer] + [grid])
        mask = membership_mask(doc.cone, pts)
        if not np.any(mask):
            continue
        P = pts[mask].astype(float)
        with np.errstate(divide="ignore"):
            vals = np.prod(np.where(P > 0, P ** (-s), 1.0), axis=1)
        K = pts[mask].max(axis=1)
        acc.add(np.bincount(K, weights=vals, minlength=N + 1))
    shells = acc.total()
    v, err, raw = extrapolate(shells, N, k, certified)
    return ZetaResult(v, N, err, certified, raw)


def lzv_forms(D: DecoratedClosedCone) -> tuple[list, list, int]:
    """Rows of D restricted to the coordinates its generators use."""
    used = [j for j in range(D.ambient_dim) if any(g[j] for g in D.generators)]
    forms = [[g[j] for j in used] for g in D.generators]
    return forms, list(D.exponents), len(used)


def eval_lzv(D: DecoratedClosedCone, depth: int = 1000) -> ZetaResult:
    """zeta^c([v_1]^{s_1}...) = sum_{m >= 1} prod (v_i . m)^(-s_i)."""
    if any(x < 0 for g in D.generators for x in g):
        raise PreconditionError("LZV generators must be nonnegative")
    forms, exps, r = lzv_forms(D)
    certified = forms_converge(forms, exps, r) if r else True
    return _evaluate_pieces([(forms, exps, r)], depth, certified)


def eval_shintani(M: Sequence[Sequence[int]], s: Sequence[int], depth: int = 1000) -> ZetaResult:
    """sum_{m in Z_{>=1}^r} prod_i (M_i . m)^(-s_i) for a nonnegative integer matrix M."""
    M = [[int(x) for x in row] for row in M]
    if len(M) != len(s):
        raise ShapeError("matrix rows and exponents differ in length")
    if any(x < 0 for row in M for x in row):
        raise PreconditionError("Shintani forms must have nonnegative coefficients")
    r = len(M[0]) if M else 0
    forms, exps = [], []
    for row, si in zip(M, s):
        if si == 0:
            continue
        if not any(row):
            raise PoleError(f"row {row} vanishes identically but carries exponent {si}")
        forms.append(row)
        exps.append(int(si))
    certified = forms_converge(forms, exps, r)
    return _evaluate_pieces([(forms, exps, r)], depth, certified)


def chen_cone(k: int, sigma: Optional[Sequence[int]] = None, ambient_dim: Optional[int] = None) -> Cone:
    """Closed Chen cone <e_s1, e_s1+e_s2, ...> (sigma 0-based, defaults to identity)."""
    n = ambient_dim or k
    sigma = list(sigma) if sigma is not None else list(range(k))
    gens = []
    v = [0] * n
    for i in sigma[:k]:
        v = list(v)
        v[i] = 1
        gens.append(v)
    return Cone.make(gens, n)


def mzv(s: Sequence[int], depth: int = 1000) -> ZetaResult:
    """zeta(s_1,...,s_k) = sum_{n_1 > ... > n_k > 0} prod n_i^(-s_i), via the open Chen cone."""
    k = len(s)
    return eval_open_czv(DecoratedOpenCone.make(chen_cone(k).interior(), s), depth, method="param")


# ---------------------------------------------------------------- exact oracles

def exact_partial_box(doc: DecoratedOpenCone, B: int) -> Fraction:
    """Exact sum over lattice points of the open cone in [0, B]^k."""
    total = Fraction(0)
    for x in product(range(B + 1), repeat=doc.cone.ambient_dim):
        if contains_point(doc.cone, x):
            total += _exact_term(x, doc.s)
    return total


def exact_partial_param(doc: DecoratedOpenCone, B: int) -> Fraction:
    """The same sum through the smooth open pieces and their parametrizations."""
    total = Fraction(0)
    k = doc.cone.ambient_dim
    for P in smooth_open_pieces(doc.cone):
        r = len(P.generators)
        if r == 0:
            total += 1
            continue
        for m in product(range(1, B + 1), repeat=r):
            x = [sum(mi * g[j] for mi, g in zip(m, P.generators)) for j in range(k)]
            if max(x) <= B:
                total += _exact_term(x, doc.s)
    return total


def _exact_term(x, s) -> Fraction:
    t = Fraction(1)
    for xj, sj in zip(x, s):
        if xj and sj:
            t /= Fraction(xj) ** sj
    return t
