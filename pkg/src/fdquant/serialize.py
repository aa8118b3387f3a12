"""JSON encodings for algebras, functionals, modules, representations and bimodules.

Every number is exact: Scalars are arrays of [re_num, re_den, im_num, im_den]
per lambda-power.  Where a Scalar is expected a plain integer or a rational
string such as "-3/2" is accepted as a constant.
"""

from __future__ import annotations

import json
from pathlib import Path

from gmpy2 import mpq

from . import linalg as la
from .modrep import BimoduleSpec, InnerProductModule, PreHilbertModule, Representation
from .morita import EquivalenceBimoduleSpec, identity_equivalence, standard_equivalence
from .positivity import LinearFunctional, trace_functional
from .scalars import Scalar, scalar_from_json, scalar_to_json, to_mpq
from .staralg import (FiniteStarAlgebra, FunctionAlgebra, Kind, Observable, PhaseSpaceSignature,
                      StarProductRule, diagonal_algebra, matrix_algebra, scalars_algebra)


class InputError(ValueError):
    """Malformed or inconsistent input data."""


def load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _need(data, key, what):
    if not isinstance(data, dict) or key not in data:
        raise InputError(f"{what}: missing field {key!r}")
    return data[key]


# -- scalars and matrices ------------------------------------------------------

def scalar_in(data, order: int) -> Scalar:
    if isinstance(data, bool):
        raise InputError("booleans are not scalars")
    if isinstance(data, (int, str)):
        try:
            return Scalar.constant(to_mpq(data), order)
        except (ValueError, TypeError) as exc:
            raise InputError(f"bad rational {data!r}") from exc
    try:
        return scalar_from_json(data, order)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def scalar_out(s: Scalar) -> list:
    return scalar_to_json(s)


def matrix_in(data, order: int) -> la.Matrix:
    if not isinstance(data, list) or any(not isinstance(r, list) for r in data):
        raise InputError("matrix must be an array of rows")
    m = [[scalar_in(x, order) for x in row] for row in data]
    if any(len(r) != len(m) for r in m):
        raise InputError("matrix must be square")
    return m


def matrix_out(m: la.Matrix) -> list:
    return [[scalar_out(x) for x in row] for row in m]


# -- algebras ----------------------------------------------------------------------

def signature_in(data) -> PhaseSpaceSignature:
    try:
        return PhaseSpaceSignature(Kind(_need(data, "kind", "signature")), int(_need(data, "dof", "signature")))
    except ValueError as exc:
        raise InputError(f"bad signature: {exc}") from exc


def signature_out(sig: PhaseSpaceSignature) -> dict:
    return {"kind": sig.kind.value, "dof": sig.dof}


def rule_in(name: str) -> StarProductRule:
    table = {"moyal": StarProductRule.moyal, "wick": StarProductRule.wick,
             "pointwise": StarProductRule.pointwise}
    if name not in table:
        raise InputError(f"unknown star-product rule {name!r}")
    return table[name]()


def custom_rule_in(data) -> StarProductRule:
    """{"table": [[{"coeff": q or [re, im], "left": [...], "right": [...]}, ...], ...]}."""
    rows = []
    for r, terms in enumerate(_need(data, "table", "custom rule")):
        row = []
        for t in terms:
            c = _need(t, "coeff", "custom term")
            coeff = (to_mpq(c[0]), to_mpq(c[1])) if isinstance(c, list) else to_mpq(c)
            row.append((coeff, tuple(_need(t, "left", "custom term")), tuple(_need(t, "right", "custom term"))))
        rows.append(row)
    return StarProductRule.custom(rows)


def algebra_in(data, order: int):
    """Explicit structure constants or one of the shorthands
    "scalars", {"matrix_algebra": n, "over": ...}, {"diagonal": n},
    {"function_algebra": {"rule": ..., "signature": ...}}."""
    if data == "scalars":
        return scalars_algebra(order)
    if not isinstance(data, dict):
        raise InputError("algebra must be an object or \"scalars\"")
    if "matrix_algebra" in data:
        base = algebra_in(data.get("over", "scalars"), order)
        if not isinstance(base, FiniteStarAlgebra):
            raise InputError("matrix algebras need a finite base algebra")
        return matrix_algebra(base, int(data["matrix_algebra"]))
    if "diagonal" in data:
        return diagonal_algebra(int(data["diagonal"]), order)
    if "function_algebra" in data:
        fa = data["function_algebra"]
        rule = rule_in(_need(fa, "rule", "function algebra"))
        sig = signature_in(_need(fa, "signature", "function algebra"))
        try:
            return FunctionAlgebra(rule, sig, order)
        except Exception as exc:
            raise InputError(str(exc)) from exc
    dim = int(_need(data, "dim", "algebra"))
    unit = [scalar_in(x, order) for x in _need(data, "unit", "algebra")]
    mult_in = _need(data, "mult", "algebra")
    inv_in = _need(data, "involution", "algebra")
    if len(unit) != dim or len(mult_in) != dim or len(inv_in) != dim:
        raise InputError("algebra tables do not match dim")
    mult = []
    for row in mult_in:
        if len(row) != dim:
            raise InputError("mult must be dim x dim")
        cells = []
        for vec in row:
            if len(vec) != dim:
                raise InputError("structure-constant vectors must have length dim")
            cells.append({u: scalar_in(c, order) for u, c in enumerate(vec)})
        mult.append(cells)
    involution = []
    for vec in inv_in:
        if len(vec) != dim:
            raise InputError("involution must be dim x dim")
        involution.append({u: scalar_in(c, order) for u, c in enumerate(vec)})
    positions = data.get("positions")
    alg = FiniteStarAlgebra(dim, mult, involution, unit, order, data.get("labels"),
                            [tuple(p) for p in positions] if positions else None,
                            data.get("matrix_size"), data.get("name"))
    return alg


def algebra_out(A: FiniteStarAlgebra) -> dict:
    zero = Scalar.zero(A.order)
    out = {
        "dim": A.dim,
        "unit": [scalar_out(x) for x in A.unit],
        "mult": [[[scalar_out(cell.get(u, zero)) for u in range(A.dim)] for cell in row] for row in A.mult],
        "involution": [[scalar_out(d.get(u, zero)) for u in range(A.dim)] for d in A.involution],
        "labels": A.labels,
        "name": A.name,
    }
    if A.positions is not None:
        out["positions"] = [list(p) for p in A.positions]
        out["matrix_size"] = A.matrix_size
    return out


def element_in(data, A, order: int):
    if isinstance(A, FunctionAlgebra):
        return observable_in(data, order, A.signature)
    if not isinstance(data, list) or len(data) != A.dim:
        raise InputError(f"algebra element must have {A.dim} coordinates")
    return tuple(scalar_in(x, order) for x in data)


def element_out(a, A):
    if isinstance(A, FunctionAlgebra):
        return observable_out(a)
    return [scalar_out(x) for x in a]


def observable_in(data, order: int, signature=None) -> Observable:
    sig = signature_in(_need(data, "signature", "observable")) if "signature" in data else signature
    if sig is None:
        raise InputError("observable: missing signature")
    terms = {}
    for t in _need(data, "terms", "observable"):
        e = tuple(int(v) for v in _need(t, "exponents", "term"))
        if len(e) != sig.nvars:
            raise InputError("exponent vector length != 2*dof")
        terms[e] = scalar_in(_need(t, "coeff", "term"), order)
    return Observable(sig, terms, order)


def observable_out(f: Observable) -> dict:
    return {"signature": signature_out(f.signature),
            "terms": [{"exponents": list(e), "coeff": scalar_out(c)} for e, c in sorted(f.terms.items())]}


# -- functionals ------------------------------------------------------------------

def functional_in(data, A, order: int) -> LinearFunctional:
    kind = _need(data, "kind", "functional")
    if kind == "covector":
        if not isinstance(A, FiniteStarAlgebra):
            raise InputError("covector functionals need a finite algebra")
        coords = [scalar_in(x, order) for x in _need(data, "coords", "functional")]
        if len(coords) != A.dim:
            raise InputError("covector length != algebra dimension")
        return LinearFunctional.covector(A, coords)
    if kind == "trace":
        return trace_functional(A, normalized=data.get("normalized", True))
    if kind == "point":
        if not isinstance(A, FunctionAlgebra):
            raise InputError("point evaluations need a function algebra")
        point = [scalar_in(x, order) for x in _need(data, "point", "functional")]
        if len(point) != A.signature.nvars:
            raise InputError("point has the wrong number of coordinates")
        smoothing = data.get("smoothing")
        s = scalar_in(smoothing, order) if smoothing is not None else None
        return LinearFunctional.point_evaluation(A, point, s)
    raise InputError(f"unknown functional kind {kind!r}")


def functional_out(omega: LinearFunctional) -> dict:
    if omega.kind == "covector":
        return {"kind": "covector", "coords": [scalar_out(x) for x in omega.coords]}
    if omega.kind == "point":
        return {"kind": "point", "point": [scalar_out(x) for x in omega.point],
                "smoothing": scalar_out(omega.smoothing)}
    raise InputError("monomial covectors have no JSON form")


# -- modules and representations ----------------------------------------------------------

def amatrix_in(data, A, p: int, order: int):
    if not isinstance(data, list) or len(data) != p or any(len(r) != p for r in data):
        raise InputError(f"expected a {p}x{p} matrix over the algebra")
    return [[element_in(x, A, order) for x in row] for row in data]


def amatrix_out(X, A):
    return [[element_out(x, A) for x in row] for row in X]


def module_in(data, order: int, algebra=None) -> InnerProductModule:
    A = algebra if algebra is not None else algebra_in(_need(data, "algebra", "module"), order)
    p = int(_need(data, "rank", "module"))
    P = amatrix_in(data["projection"], A, p, order) if "projection" in data else None
    Q = amatrix_in(data["metric"], A, p, order) if "metric" in data else None
    try:
        return InnerProductModule(A, p, P, Q)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def module_out(E: InnerProductModule) -> dict:
    return {"algebra": algebra_out(E.algebra), "rank": E.p,
            "projection": amatrix_out(E.P, E.algebra), "metric": amatrix_out(E.Q, E.algebra)}


def bimodule_in(data, order: int) -> BimoduleSpec:
    """{"module": ..., "left_algebra": ..., "left_action": [p x p matrix per basis element]}
    or the shorthands {"standard": {"algebra": ..., "n": n}} and {"identity": algebra}."""
    if "standard" in data or "identity" in data:
        return equivalence_in(data, order).bimodule
    E = module_in(_need(data, "module", "bimodule"), order)
    B = algebra_in(_need(data, "left_algebra", "bimodule"), order)
    if not isinstance(B, FiniteStarAlgebra):
        raise InputError("left algebras must be finite")
    acts = _need(data, "left_action", "bimodule")
    if len(acts) != B.dim:
        raise InputError("left_action needs one matrix per basis element of the left algebra")
    mats = [amatrix_in(X, E.algebra, E.p, order) for X in acts]
    return BimoduleSpec(E, B, left_matrices=mats)


def representation_in(data, order: int) -> Representation:
    A = algebra_in(_need(data, "algebra", "representation"), order)
    if not isinstance(A, FiniteStarAlgebra):
        raise InputError("representation files need a finite algebra")
    G = matrix_in(_need(data, "gram", "representation"), order)
    acts = _need(data, "action", "representation")
    if len(acts) != A.dim:
        raise InputError("action needs one matrix per basis element")
    mats = []
    for M in acts:
        m = [[scalar_in(x, order) for x in row] for row in M]
        if len(m) != len(G) or any(len(r) != len(G) for r in m):
            raise InputError("action matrices must match the Gram size")
        mats.append(m)
    try:
        return Representation(A, PreHilbertModule(G, order), actions=mats)
    except Exception as exc:
        raise InputError(str(exc)) from exc


def representation_out(pi) -> dict:
    A = pi.algebra
    out = {"gram": matrix_out(pi.gram)}
    if isinstance(A, FiniteStarAlgebra):
        out["algebra"] = algebra_out(A)
        out["action"] = [matrix_out(pi.matrix(b)) for b in A.basis()]
    else:
        out["algebra"] = {"function_algebra": {"rule": A.rule.variant.value,
                                               "signature": signature_out(A.signature)}}
        out["action"] = None
    return out


def equivalence_in(data, order: int) -> EquivalenceBimoduleSpec:
    if "standard" in data:
        st = data["standard"]
        A = algebra_in(st.get("algebra", "scalars"), order)
        return standard_equivalence(A, int(_need(st, "n", "standard bimodule")))
    if "identity" in data:
        return identity_equivalence(algebra_in(data["identity"], order))
    bim = bimodule_in(data, order)
    A, B = bim.algebra, bim.left_algebra
    p = bim.module.p
    Mp = matrix_algebra(A, p)
    table = data.get("left_inner_product")
    if table is None:
        if B.dim != Mp.dim:
            raise InputError("left_inner_product is required unless the left algebra is M_p(A)")
        images = [B.basis_element(k) for k in range(B.dim)]
    else:
        if len(table) != Mp.dim:
            raise InputError("left_inner_product needs one left-algebra element per basis element of M_p(A)")
        images = [element_in(v, B, order) for v in table]

    def left_inner(x, y):
        # T(x y*) for the linear map T: M_p(A) -> B given by the table
        grid = [[A.mul(x[i], A.adjoint(y[j])) for j in range(p)] for i in range(p)]
        coords = Mp.from_grid(grid)
        acc = B.zero()
        for c, img in zip(coords, images):
            if not c.is_zero():
                acc = B.add(acc, B.scale(c, img))
        return acc

    return EquivalenceBimoduleSpec(bim, left_inner, name=data.get("name", "E"))


def dump(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n")
    return text


__all__ = [
    "InputError", "algebra_in", "algebra_out", "bimodule_in", "custom_rule_in", "dump",
    "element_in", "element_out", "equivalence_in", "functional_in", "functional_out", "load_json",
    "matrix_in", "matrix_out", "module_in", "module_out", "observable_in", "observable_out",
    "representation_in", "representation_out", "rule_in", "scalar_in", "scalar_out", "signature_in",
]
