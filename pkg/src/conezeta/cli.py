"""conezeta command line: JSON in, JSON out.

Exit codes: 0 success, 2 malformed input, 3 precondition failure,
4 numerical verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, Optional

import jsonschema

from . import cones as cn
from . import fractions as fr
from . import relations as rl
from . import zeta as zt
from .cones import Cone
from .decorated import DecoratedClosedCone, DecoratedSum, conical_derive
from .errors import ConezetaError, SchemaError

EXIT_OK, EXIT_SCHEMA, EXIT_PRECONDITION, EXIT_VERIFY = 0, 2, 3, 4

# ---------------------------------------------------------------- schemas

_INT_VEC = {"type": "array", "items": {"type": "integer"}}
_INT_MAT = {"type": "array", "items": _INT_VEC}
_RAT = {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+)?$"}

CONE = {
    "type": "object",
    "required": ["ambient_dim", "generators"],
    "properties": {"ambient_dim": {"type": "integer", "minimum": 1},
                   "open": {"type": "boolean"}, "generators": _INT_MAT},
    "additionalProperties": False,
}
FRACTION = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["coeff", "poles"],
        "properties": {
            "coeff": _RAT,
            "poles": {"type": "array", "items": {
                "type": "object", "required": ["form", "mult"],
                "properties": {"form": _INT_VEC, "mult": {"type": "integer", "minimum": 1}},
                "additionalProperties": False}},
        },
        "additionalProperties": False,
    },
}
DECORATED = {
    "type": "object",
    "required": ["generators", "exponents"],
    "properties": {"ambient_dim": {"type": "integer", "minimum": 1},
                   "generators": _INT_MAT, "exponents": _INT_VEC},
    "additionalProperties": False,
}
DECORATED_SUM = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["coeff", "generators", "exponents"],
        "properties": {"coeff": _RAT, "ambient_dim": {"type": "integer", "minimum": 1},
                       "generators": _INT_MAT, "exponents": _INT_VEC},
        "additionalProperties": False,
    },
}
PAIR = {
    "type": "object",
    "required": ["matrix", "s"],
    "properties": {"matrix": _INT_MAT, "s": _INT_VEC},
    "additionalProperties": False,
}
SUBDIVISION = {
    "type": "object",
    "required": ["kind", "parent", "pieces"],
    "properties": {"kind": {"enum": ["closed", "open"]}, "parent": CONE,
                   "pieces": {"type": "array", "items": CONE}},
    "additionalProperties": False,
}
ZETA_RESULT = {
    "type": "object",
    "required": ["value", "N", "error_estimate", "certified"],
    "properties": {"value": {"type": "number"}, "N": {"type": "integer"},
                   "error_estimate": {"type": "number"}, "certified": {"type": "boolean"},
                   "partial_sum": {"type": "number"}},
    "additionalProperties": False,
}
MZV_FORM = {
    "type": "array",
    "items": {"type": "object", "required": ["index", "coeff"],
              "properties": {"index": _INT_VEC, "coeff": _RAT}, "additionalProperties": False},
}
RELATION = {
    "type": "object",
    "required": ["terms"],
    "properties": {
        "terms": {"type": "array", "items": {
            "type": "object", "required": ["coeff", "cone", "s"],
            "properties": {"coeff": _RAT, "cone": CONE, "s": _INT_VEC},
            "additionalProperties": False}},
        "provenance": {"type": "object"},
        "mzv_form": {"anyOf": [MZV_FORM, {"type": "null"}]},
    },
    "additionalProperties": False,
}
PAIR_RESULT = {
    "type": "object",
    "required": ["pair", "open_side", "closed_side"],
    "properties": {
        "pair": PAIR,
        "open_side": {"type": "object", "required": ["cone", "s"],
                      "properties": {"cone": CONE, "s": _INT_VEC}, "additionalProperties": False},
        "closed_side": DECORATED,
    },
    "additionalProperties": False,
}
VERIFY_RESULT = {
    "type": "object",
    "required": ["verified", "N", "tol"],
    "properties": {"verified": {"type": "boolean"}, "N": {"type": "integer"}, "tol": {"type": "number"},
                   "mzv_verified": {"type": ["boolean", "null"]}},
    "additionalProperties": False,
}
DERIVE_RESULT = {"anyOf": [FRACTION, DECORATED_SUM]}

OUTPUT_SCHEMAS = {
    "subdivide": SUBDIVISION, "phi": FRACTION, "decompose": FRACTION, "derive": DERIVE_RESULT,
    "eval": ZETA_RESULT, "pair": PAIR_RESULT, "relation": RELATION, "verify": VERIFY_RESULT,
}


def _load(text: str, schema: dict, what: str) -> Any:
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    elif text == "-":
        text = sys.stdin.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{what}: invalid JSON ({exc.msg})") from exc
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"{what}: {exc.message}") from exc
    return obj


def _need(args, name: str):
    val = getattr(args, name)
    if val is None:
        raise SchemaError(f"--{name.replace('_', '-')} is required for '{args.verb}'")
    return val


def _fraction_arg(args) -> fr.FracSum:
    arr = _load(_need(args, "fraction"), FRACTION, "--fraction")
    nvars = args.nvars
    if nvars is None:
        lens = {len(p["form"]) for t in arr for p in t["poles"]}
        if len(lens) > 1:
            raise SchemaError("--fraction: forms of unequal length")
        nvars = lens.pop() if lens else 1
    return fr.FracSum.from_json(arr, nvars)


def _decorated_arg(args) -> DecoratedClosedCone:
    return DecoratedClosedCone.from_json(_load(_need(args, "decorated"), DECORATED, "--decorated"))


def _points_arg(text: Optional[str], what: str) -> list:
    return _load(text, _INT_MAT, what) if text is not None else []


# ---------------------------------------------------------------- verbs

def _subdivide(args):
    C = Cone.from_json(_load(_need(args, "cone"), CONE, "--cone"))
    method = args.method
    if method == "open":
        return cn.open_subdivision(C, cn.smooth_subdivision_of(C.closure())).to_json()
    op = {"smooth": cn.smooth_subdivide, "simplicial": cn.simplicialize,
          "barycentric": cn.barycentric_subdivision, "pulling": cn.pulling_triangulation}[method]
    return op(C.closure()).to_json()


def _phi(args):
    C = Cone.from_json(_load(_need(args, "cone"), CONE, "--cone"))
    return fr.phi(C).to_json()


def _decompose(args):
    f = _fraction_arg(args)
    if args.positive:
        out = fr.sum_all([fr.decompose_pure_positive((k, c)) for k, c in f.items()], f.nvars)
    else:
        out = fr.decompose_pure(f)
    for x in fr.random_points(f, 5, args.seed):
        if fr.evaluate(f, x) != fr.evaluate(out, x):
            raise ConezetaError(f"decomposition disagrees with the input at {list(x)}")
    return out.to_json()


def _derive(args):
    i = _need(args, "index")
    if args.decorated is not None:
        return conical_derive(_decorated_arg(args), i).to_json()
    return fr.derive(_fraction_arg(args), i).to_json()


def _eval(args):
    kind = args.type
    if kind == "open":
        C = Cone.from_json(_load(_need(args, "cone"), CONE, "--cone"))
        s = _load(_need(args, "s"), _INT_VEC, "--s")
        res = zt.eval_open_czv(zt.DecoratedOpenCone.make(C, s), args.depth)
    elif kind == "lzv":
        res = zt.eval_lzv(_decorated_arg(args), args.depth)
    elif kind == "mzv":
        res = zt.mzv(_load(_need(args, "s"), _INT_VEC, "--s"), args.depth)
    else:
        M = _load(_need(args, "matrix"), _INT_MAT, "--matrix")
        s = _load(_need(args, "s"), _INT_VEC, "--s")
        res = zt.eval_shintani(M, s, args.depth)
    return res.to_json()


def _pair(args):
    if args.decorated is not None:
        P = rl.pair_of(_decorated_arg(args))
    else:
        P = rl.ConePair.from_json(_load(_need(args, "pair"), PAIR, "--pair"))
    return {"pair": P.to_json(), "open_side": P.open_side.to_json(), "closed_side": P.closed_side.to_json()}


def _build_relation(args) -> rl.Relation:
    P = rl.ConePair.from_json(_load(_need(args, "pair"), PAIR, "--pair"))
    opens = _points_arg(args.open_split, "--open-split")
    closeds = _points_arg(args.closed_split, "--closed-split")
    if args.closed_div is not None:
        arr = _load(args.closed_div, DECORATED_SUM, "--closed-div")
        div = DecoratedSum({DecoratedClosedCone.make(t["generators"], t["exponents"], t.get("ambient_dim", P.dim)):
                            Fraction(t["coeff"]) for t in arr})
        C = P.open_side.cone.closure()
        rel = rl.double_subdivision_relation(P, cn.star_split([C], opens) if opens else [C], div)
    else:
        rel = rl.split_relation(P, opens, closeds)
    rel.mzv_form = rl.reduce_over_chen(rel)
    return rel


def _relation(args):
    return _build_relation(args).to_json()


def _verify(args):
    if args.relation is not None:
        rel = rl.Relation.from_json(_load(args.relation, RELATION, "--relation"))
    else:
        rel = _build_relation(args)
    ok = rl.verify_relation(rel, args.depth, args.tol)
    mzv_ok = None
    if rel.mzv_form is not None:
        mzv_ok = rl.verify_mzv_form(rel.mzv_form, args.depth, args.tol)
    out = {"verified": ok, "N": args.depth, "tol": args.tol, "mzv_verified": mzv_ok}
    return out, (ok and mzv_ok is not False)


VERBS = {
    "subdivide": _subdivide, "phi": _phi, "decompose": _decompose, "derive": _derive,
    "eval": _eval, "pair": _pair, "relation": _relation, "verify": _verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conezeta", description=__doc__.splitlines()[0])
    p.add_argument("verb", choices=sorted(VERBS))
    p.add_argument("--cone", help="cone JSON")
    p.add_argument("--fraction", help="fraction JSON (array of terms)")
    p.add_argument("--nvars", type=int, help="number of variables of --fraction")
    p.add_argument("--decorated", help="decorated closed cone JSON")
    p.add_argument("--s", help="exponent vector JSON")
    p.add_argument("--matrix", help="Shintani matrix JSON")
    p.add_argument("--type", choices=["open", "lzv", "shintani", "mzv"], default="open")
    p.add_argument("--method", choices=["smooth", "simplicial", "barycentric", "pulling", "open"],
                   default="smooth")
    p.add_argument("--index", type=int, help="0-based coordinate for derive")
    p.add_argument("--positive", action="store_true", help="positive decomposition")
    p.add_argument("--pair", help='cone pair JSON {"matrix": ..., "s": ...}')
    p.add_argument("--open-split", help="star points for the open side")
    p.add_argument("--closed-split", help="star points for the closed side")
    p.add_argument("--closed-div", help="algebraic subdivision of the closed side (decorated sum JSON)")
    p.add_argument("--relation", help="relation JSON")
    p.add_argument("--depth", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "pretty"], default="json")
    return p


def _dump(obj, fmt: str) -> str:
    if fmt == "pretty":
        return json.dumps(obj, sort_keys=True, indent=2)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def run(argv: Optional[list] = None) -> tuple[int, str, str]:
    """Run one command; returns (exit code, stdout text, stderr text)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_SCHEMA if exc.code else EXIT_OK), "", ""
    if args.depth < 1:
        return EXIT_SCHEMA, "", "conezeta: --depth must be positive\n"
    try:
        out = VERBS[args.verb](args)
    except SchemaError as exc:
        return EXIT_SCHEMA, "", f"conezeta: {exc}\n"
    except (ConezetaError, ZeroDivisionError) as exc:
        return EXIT_PRECONDITION, "", f"conezeta: {exc}\n"
    except OSError as exc:
        return EXIT_SCHEMA, "", f"conezeta: {exc}\n"
    code = EXIT_OK
    if isinstance(out, tuple):
        out, ok = out
        code = EXIT_OK if ok else EXIT_VERIFY
    return code, _dump(out, args.format) + "\n", ""


def main(argv: Optional[list] = None) -> int:
    code, out, err = run(argv)
    if out:
        sys.stdout.write(out)
    if err:
        sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
