"""Dense matrices over truncated series: products, Hermitian LDL*, ring solves.

Matrices are plain lists of row lists of ``Scalar``.  Every elimination picks
pivots of minimal lambda-valuation and only divides by a pivot when the
dividend has at least the pivot's valuation, so results are exact modulo
lambda**(N+1) and never depend on the torsion of the truncated ring (a vector
like lambda**N * e is never mistaken for a null vector).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from .errors import NotAdjointable, NotHermitian
from .scalars import Scalar, Sign, ordered_sign

Matrix = list  # list[list[Scalar]]


def zeros(rows: int, cols: int, order: int) -> Matrix:
    z = Scalar.zero(order)
    return [[z] * cols for _ in range(rows)]


def identity(n: int, order: int) -> Matrix:
    m = zeros(n, n, order)
    one = Scalar.one(order)
    for i in range(n):
        m[i][i] = one
    return m


def from_rationals(rows, order: int) -> Matrix:
    """Matrix of constant series from nested rationals or ``(re, im)`` pairs."""
    return [[Scalar.constant(x, order) for x in row] for row in rows]


def shape(m: Matrix) -> tuple[int, int]:
    return len(m), (len(m[0]) if m else 0)


def adjoint(m: Matrix) -> Matrix:
    """Conjugate transpose."""
    if not m:
        return []
    return [[m[i][j].conj() for i in range(len(m))] for j in range(len(m[0]))]


def transpose(m: Matrix) -> Matrix:
    if not m:
        return []
    return [[m[i][j] for i in range(len(m))] for j in range(len(m[0]))]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    n, k = len(a), len(a[0])
    if len(b) != k:
        raise ValueError(f"shape mismatch {len(a)}x{k} @ {len(b)}x?")
    m = len(b[0]) if b else 0
    order = a[0][0].order if k else (b[0][0].order if b and m else 0)
    out = zeros(n, m, order)
    for i in range(n):
        row = a[i]
        acc = list(out[i])
        for t in range(k):
            x = row[t]
            if x.is_zero():
                continue
            brow = b[t]
            for j in range(m):
                y = brow[j]
                if not y.is_zero():
                    acc[j] = acc[j] + x * y
        out[i] = acc
    return out


def matvec(a: Matrix, v: list) -> list:
    return [col[0] for col in matmul(a, [[x] for x in v])] if a else []


def add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(s: Scalar, a: Matrix) -> Matrix:
    return [[s * x for x in row] for row in a]


def equal(a: Matrix, b: Matrix) -> bool:
    return shape(a) == shape(b) and all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def is_zero_matrix(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


def is_hermitian(a: Matrix) -> bool:
    n = len(a)
    if any(len(r) != n for r in a):
        return False
    return all(a[i][j] == a[j][i].conj() for i in range(n) for j in range(i, n))


def inner(u: list, g: Matrix, v: list) -> Scalar:
    """u* G v."""
    order = g[0][0].order if g else (u[0].order if u else 0)
    acc = Scalar.zero(order)
    for i, ui in enumerate(u):
        if ui.is_zero():
            continue
        cu = ui.conj()
        for j, vj in enumerate(v):
            gij = g[i][j]
            if not vj.is_zero() and not gij.is_zero():
                acc = acc + cu * gij * vj
    return acc


def column(m: Matrix, j: int) -> list:
    return [row[j] for row in m]


def columns_to_matrix(cols: list[list]) -> Matrix:
    if not cols:
        return []
    return [[c[i] for c in cols] for i in range(len(cols[0]))]


def block(blocks: list[list[Matrix]]) -> Matrix:
    """Assemble a block matrix from a grid of equally sized blocks."""
    out = []
    for brow in blocks:
        for r in range(len(brow[0])):
            out.append([x for b in brow for x in b[r]])
    return out


# -- Hermitian LDL* ------------------------------------------------------

@dataclass
class LDLResult:
    """Congruence ``W* H W = diag(pivot values) (+) 0`` with ``W Winv = 1``.

    ``pivots`` lists the indices carrying the nonzero diagonal entries of the
    reduced form, in elimination order; ``kernel`` lists the remaining
    indices, whose columns of ``W`` span the radical of H.  When the run was
    stopped at an indefiniteness witness, ``witness`` holds a column vector v
    with v* H v negative.
    """

    W: Matrix
    Winv: Matrix
    diagonal: list
    pivots: list = field(default_factory=list)
    kernel: list = field(default_factory=list)
    witness: list | None = None
    witness_value: Scalar | None = None


def _valuation_min(S, active):
    best = None
    for i in active:
        row = S[i]
        for j in active:
            v = row[j].valuation()
            if v is not None and (best is None or v < best):
                best = v
    return best


def hermitian_ldl(H: Matrix, stop_on_indefinite: bool = False) -> LDLResult:
    """Pivoted Hermitian LDL* over truncated series.

    Each round takes the minimal valuation r0 of the active block.  A diagonal
    entry of valuation r0 is a pivot; if none exists an off-diagonal leading
    entry m is folded into a diagonal by the basis change e_i <- e_i + conj(m) e_j
    (leading term 2|m|^2 > 0).  With ``stop_on_indefinite`` the run stops at the
    first negative leading diagonal or purely off-diagonal leading block and
    records a witness vector instead.
    """
    if not is_hermitian(H):
        raise NotHermitian("matrix is not equal to its conjugate transpose")
    n = len(H)
    order = H[0][0].order if n else 0
    S = [list(r) for r in H]
    W = identity(n, order)
    Winv = identity(n, order)
    zero = Scalar.zero(order)
    active = list(range(n))
    pivots = []

    def col_op(k, p, t):
        # basis change e_k <- e_k + t e_p, applied as a congruence
        for a in active:
            sap = S[a][p]
            if not sap.is_zero():
                S[a][k] = S[a][k] + sap * t
        ct = t.conj()
        for b in active:
            spb = S[p][b]
            if not spb.is_zero():
                S[k][b] = S[k][b] + ct * spb
        for a in range(n):
            wap = W[a][p]
            if not wap.is_zero():
                W[a][k] = W[a][k] + wap * t
        for b in range(n):
            wkb = Winv[k][b]
            if not wkb.is_zero():
                Winv[p][b] = Winv[p][b] - t * wkb

    while active:
        r0 = _valuation_min(S, active)
        if r0 is None:
            break
        p = None
        for i in active:
            if S[i][i].valuation() == r0:
                lead_re, _ = S[i][i].leading()
                if lead_re > 0:
                    p = i
                    break
                if stop_on_indefinite:
                    w = column(W, i)
                    return LDLResult(W, Winv, [], pivots, [], w, S[i][i])
                if p is None:
                    p = i
        if p is None:
            # leading block has zero diagonal: fold an off-diagonal entry in
            i, j = next((i, j) for i in active for j in active
                        if i != j and S[i][j].valuation() == r0)
            mr, mi = S[i][j].coefficient(r0)
            if stop_on_indefinite:
                t = Scalar.constant((-mr, mi), order)  # -conj(m)
                w = [W[a][i] + W[a][j] * t for a in range(n)]
                value = inner(w, H, w)
                return LDLResult(W, Winv, [], pivots, [], w, value)
            col_op(i, j, Scalar.constant((mr, -mi), order))
            continue
        d = S[p][p]
        for k in active:
            if k == p or S[p][k].is_zero():
                continue
            q = S[p][k].divide_by(d)
            col_op(k, p, -q)
            S[p][k] = zero
            S[k][p] = zero
        active.remove(p)
        pivots.append(p)
    diagonal = [S[i][i] for i in range(n)]
    return LDLResult(W, Winv, diagonal, pivots, active)


# -- solving over the series ring ------------------------------------------

def solve(M: Matrix, rhs: list) -> list | None:
    """Find x with M x = rhs exactly, or None when no ring solution exists.

    Gaussian elimination with full pivoting by minimal valuation; free
    variables are set to zero.  A system solvable only after inverting a
    non-unit (e.g. dividing by lambda) returns None.
    """
    rows = len(M)
    cols = len(M[0]) if rows else 0
    if rows == 0:
        return []
    order = M[0][0].order if cols else rhs[0].order
    A = [list(r) + [b] for r, b in zip(M, rhs)]
    pivot_cols = []
    r = 0
    col_perm_free = set(range(cols))
    while r < rows:
        best = None
        for i in range(r, rows):
            for j in col_perm_free:
                v = A[i][j].valuation()
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        A[r], A[i] = A[i], A[r]
        piv = A[r][j]
        # rhs must be divisible by the pivot valuation for a ring solution
        bv = A[r][cols].valuation()
        if bv is not None and bv < v:
            return None
        A[r] = [x.divide_by(piv) if not x.is_zero() else x for x in A[r]]
        for i2 in range(rows):
            if i2 != r and not A[i2][j].is_zero():
                f = A[i2][j]
                A[i2] = [x - f * y for x, y in zip(A[i2], A[r])]
        pivot_cols.append((r, j))
        col_perm_free.discard(j)
        r += 1
    for i in range(r, rows):
        if not A[i][cols].is_zero():
            return None
    x = [Scalar.zero(order)] * cols
    for rr, j in pivot_cols:
        x[j] = A[rr][cols]
    if any(lhs != b for lhs, b in zip(matvec(M, x), rhs)):
        return None
    return x


def rank(M: Matrix) -> int:
    """Rank over the fraction field of lambda-polynomials (entries read as polynomials)."""
    A = [list(r) for r in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    rk = 0
    free = set(range(cols))
    for r in range(rows):
        best = None
        for i in range(r, rows):
            for j in free:
                v = A[i][j].valuation()
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        _, i, j = best
        A[r], A[i] = A[i], A[r]
        piv = A[r][j]
        for i2 in range(r + 1, rows):
            if not A[i2][j].is_zero():
                f = A[i2][j].divide_by(piv)
                A[i2] = [x - f * y for x, y in zip(A[i2], A[r])]
        free.discard(j)
        rk += 1
    return rk


def adjoint_of(T: Matrix, G: Matrix) -> Matrix:
    """The operator T* with G T* = T^H G, raising NotAdjointable when it needs a non-unit."""
    rhs = matmul(adjoint(T), G)
    n = len(G)
    cols = []
    for j in range(n):
        x = solve(G, column(rhs, j))
        if x is None:
            raise NotAdjointable(f"no adjoint within the coefficient ring (column {j})")
        cols.append(x)
    return columns_to_matrix(cols)


def leading_negative(s: Scalar) -> bool:
    return ordered_sign(s) is Sign.NEGATIVE


__all__ = [
    "LDLResult", "Matrix", "add", "adjoint", "adjoint_of", "block", "column",
    "columns_to_matrix", "equal", "from_rationals", "hermitian_ldl", "identity",
    "inner", "is_hermitian", "is_zero_matrix", "matmul", "matvec", "rank", "scale",
    "shape", "solve", "sub", "transpose", "zeros", "mpq",
]
