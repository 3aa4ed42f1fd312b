"""Exact rational linear algebra.

Scalars are :class:`fractions.Fraction` (arbitrary precision, always in lowest
terms).  Vectors are tuples of fractions and matrices are tuples of row tuples,
so every value is immutable and hashable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Sequence, Tuple, Union

RationalLike = Union[int, str, Fraction]
Vector = Tuple[Fraction, ...]
Matrix = Tuple[Vector, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_rational(value: RationalLike) -> Fraction:
    """Parse an int, a ``Fraction`` or a ``"p/q"`` string.

    Floats are rejected: a binary float is never what the caller meant.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(c in text for c in ".eE"):
            raise ValueError(f"malformed rational {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def format_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def vec(values: Iterable[RationalLike]) -> Vector:
    return tuple(as_rational(v) for v in values)


def mat(rows: Iterable[Iterable[RationalLike]]) -> Matrix:
    return tuple(vec(r) for r in rows)


def zeros(n: int) -> Vector:
    return (ZERO,) * n


def identity(n: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return sum((a * b for a, b in zip(u, v)), ZERO)


def add(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def scale(c: RationalLike, v: Sequence[Fraction]) -> Vector:
    c = Fraction(c)
    return tuple(c * a for a in v)


def is_zero(v: Sequence[Fraction]) -> bool:
    return all(a == 0 for a in v)


def transpose(a: Sequence[Sequence[Fraction]]) -> Matrix:
    return tuple(zip(*a)) if a else ()


def matvec(a: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    return tuple(dot(row, v) for row in a)


def matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def columns(a: Sequence[Sequence[Fraction]], ncols: int) -> Matrix:
    """Columns of ``a``; ``ncols`` disambiguates the shape of an empty matrix."""
    if not a:
        return tuple(() for _ in range(ncols))
    return transpose(a)


def from_columns(cols: Sequence[Sequence[Fraction]], nrows: int) -> Matrix:
    if not cols:
        return tuple(() for _ in range(nrows))
    return transpose(cols)


def _rref(rows: Sequence[Sequence[Fraction]], ncols: int):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    return len(_rref(rows, len(rows[0]))[1])


def solve_linear(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Optional[Vector]:
    """One exact solution of ``a @ x = b``, or ``None`` when inconsistent.

    ``a`` may be rectangular or rank deficient; free variables are set to 0.
    An empty ``a`` has no columns, so the system is consistent iff ``b`` is 0
    and the solution is the empty vector.
    """
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} rows vs rhs of length {len(b)}")
    if not a:
        return ()
    n = len(a[0])
    if any(len(row) != n for row in a):
        raise ValueError("ragged matrix")
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    red, pivots = _rref(aug, n + 1)
    if n in pivots:
        return None
    x = [ZERO] * n
    for row, c in zip(red, pivots):
        x[c] = row[n]
    return tuple(x)


def kernel_basis(a: Sequence[Sequence[Fraction]], ncols: int) -> Matrix:
    """Rational basis (list of vectors) of ``{x : a @ x = 0}``."""
    if not a:
        return identity(ncols)
    red, pivots = _rref(a, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [ZERO] * ncols
        x[f] = ONE
        for row, c in zip(red, pivots):
            x[c] = -row[f]
        basis.append(tuple(x))
    return tuple(basis)


def independent_subset(vectors: Sequence[Sequence[Fraction]]) -> list:
    """Indices of a maximal linearly independent subset, greedy in input order."""
    chosen: list = []
    rows: list = []
    for i, v in enumerate(vectors):
        if rank(rows + [v]) > len(rows):
            rows.append(v)
            chosen.append(i)
    return chosen


def inverse(a: Sequence[Sequence[Fraction]]) -> Matrix:
    n = len(a)
    aug = [list(row) + list(e) for row, e in zip(a, identity(n))]
    red, pivots = _rref(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ValueError("singular matrix")
    return tuple(tuple(row[n:]) for row in red)


def det(a: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [list(r) for r in a]
    n = len(m)
    d = ONE
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return ZERO
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return d


def integer_primitive(v: Sequence[Fraction]) -> Tuple[int, ...]:
    """Smallest integer vector positively proportional to ``v``."""
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for k in ints:
        g = gcd(g, k)
    return tuple(k // g for k in ints) if g else tuple(ints)


def _column_reduce(a: list, ncols: int):
    """Integer column operations bringing ``a`` to lower echelon form.

    Returns ``(h, u, rank)`` with ``h = a @ u``, ``u`` unimodular, and the
    first ``rank`` columns of ``h`` carrying the pivots.
    """
    h = [list(row) for row in a]
    u = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def colop(j, k, p, q, r, s):
        # (col_j, col_k) <- (p*col_j + q*col_k, r*col_j + s*col_k)
        for mtx in (h, u):
            for row in mtx:
                x, y = row[j], row[k]
                row[j], row[k] = p * x + q * y, r * x + s * y

    piv = 0
    for i in range(len(h)):
        if piv == ncols:
            break
        for k in range(piv + 1, ncols):
            x, y = h[i][piv], h[i][k]
            if y == 0:
                continue
            g, s, t = _xgcd(x, y)
            # [s t; -y/g x/g] has determinant 1
            colop(piv, k, s, t, -y // g, x // g)
        if h[i][piv] != 0:
            if h[i][piv] < 0:
                _negate_col(h, u, piv)
            piv += 1
    return h, u, piv


def _negate_col(h, u, j):
    for mtx in (h, u):
        for row in mtx:
            row[j] = -row[j]


def _xgcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def lattice_kernel_basis(rows: Sequence[Sequence[Fraction]], ncols: int) -> Tuple[Tuple[int, ...], ...]:
    """Z-basis of the saturated lattice ``{y in Z^n : rows @ y = 0}``.

    Rows are first scaled to primitive integer vectors; the result spans a
    direct summand of ``Z^n``, so its transpose is a surjection onto
    ``Z^(n - rank)``.
    """
    a = [list(integer_primitive(r)) for r in rows if not is_zero(r)]
    if not a:
        return tuple(tuple(1 if i == j else 0 for j in range(ncols)) for i in range(ncols))
    _, u, r = _column_reduce(a, ncols)
    return tuple(tuple(u[i][j] for i in range(ncols)) for j in range(r, ncols))


def is_surjective_integer(a: Sequence[Sequence[int]], ncols: int) -> bool:
    """Whether the integer matrix ``a`` maps ``Z^ncols`` onto ``Z^len(a)``."""
    if not a:
        return True
    h, _, r = _column_reduce([list(map(int, row)) for row in a], ncols)
    if r != len(a):
        return False
    return all(abs(h[i][i]) == 1 for i in range(r))


@dataclass(frozen=True)
class InnerProduct:
    """Rational inner product given by its Gram matrix.

    Symmetry and positive-definiteness are checked on construction with exact
    leading principal minors.
    """

    gram: Matrix

    def __post_init__(self):
        g = mat(self.gram)
        object.__setattr__(self, "gram", g)
        n = len(g)
        if any(len(row) != n for row in g):
            raise ValueError("Gram matrix must be square")
        for i in range(n):
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise ValueError(f"Gram matrix not symmetric at ({i}, {j})")
        for k in range(1, n + 1):
            if det([row[:k] for row in g[:k]]) <= 0:
                raise ValueError(f"Gram matrix not positive-definite (leading minor {k} <= 0)")

    @classmethod
    def standard(cls, n: int) -> "InnerProduct":
        return cls(identity(n))

    @property
    def dim(self) -> int:
        return len(self.gram)

    def scaled(self, c: RationalLike) -> "InnerProduct":
        c = as_rational(c)
        return InnerProduct(tuple(tuple(c * x for x in row) for row in self.gram))

    def restrict(self, embedding: Sequence[Sequence[Fraction]]) -> "InnerProduct":
        """Pull back along the linear map whose matrix (columns) is ``embedding``."""
        k = len(embedding[0]) if embedding else 0
        if k == 0:
            return InnerProduct(())
        et = transpose(embedding)
        return InnerProduct(matmul(matmul(et, self.gram), embedding))


def _check_dim(g: InnerProduct, *vs: Sequence[Fraction]) -> None:
    for v in vs:
        if len(v) != g.dim:
            raise ValueError(f"dimension mismatch: vector of length {len(v)} for a rank {g.dim} inner product")


def inner(g: InnerProduct, u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    _check_dim(g, u, v)
    return dot(u, matvec(g.gram, v))


def norm_sq(g: InnerProduct, u: Sequence[Fraction]) -> Fraction:
    return inner(g, u, u)


def sharp(g: InnerProduct, chi: Sequence[Fraction]) -> Vector:
    """Covector ``u`` with ``inner(g, u, v) == <v, chi>`` for every ``v``."""
    _check_dim(g, chi)
    u = solve_linear(g.gram, tuple(chi))
    assert u is not None  # g is nondegenerate
    return u


def flat(g: InnerProduct, u: Sequence[Fraction]) -> Vector:
    """Inverse of :func:`sharp`: the character ``gram @ u``."""
    _check_dim(g, u)
    return matvec(g.gram, u)


def orthogonal_complement(g: InnerProduct, basis: Sequence[Sequence[Fraction]]) -> Matrix:
    """Basis of the g-orthogonal complement of ``span(basis)``."""
    rows = [flat(g, b) for b in basis]
    return kernel_basis(rows, g.dim)


def project_orthogonal(g: InnerProduct, basis: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    """g-orthogonal projection of ``v`` onto the complement of ``span(basis)``.

    Raises ``ValueError`` when ``basis`` is linearly dependent.
    """
    _check_dim(g, v, *basis)
    if not basis:
        return tuple(v)
    k = len(basis)
    if rank(basis) < k:
        raise ValueError("basis vectors are linearly dependent")
    gram_b = [[inner(g, basis[i], basis[j]) for j in range(k)] for i in range(k)]
    rhs = [inner(g, basis[i], v) for i in range(k)]
    coeffs = solve_linear(gram_b, rhs)
    assert coeffs is not None
    out = list(v)
    for c, b in zip(coeffs, basis):
        for i in range(len(out)):
            out[i] -= c * b[i]
    return tuple(out)
