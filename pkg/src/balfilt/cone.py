"""Exact simplex method and polyhedral cone predicates."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import inf
from typing import List, Optional, Sequence, Tuple, Union

from .exactq import ONE, ZERO, Vector, as_rational, is_zero

LE, EQ, GE = "<=", "=", ">="


@dataclass(frozen=True)
class LpProblem:
    """maximize ``objective @ x`` subject to ``rows[i] @ x (sense[i]) rhs[i]``.

    ``free[j]`` marks variable ``j`` as sign-unrestricted; otherwise ``x[j] >= 0``.
    """

    objective: Vector
    rows: Tuple[Vector, ...]
    rhs: Vector
    senses: Tuple[str, ...]
    free: Tuple[bool, ...]

    def __post_init__(self):
        n = len(self.objective)
        if len(self.free) != n:
            raise ValueError("free flags must match the number of variables")
        if not (len(self.rows) == len(self.rhs) == len(self.senses)):
            raise ValueError("rows, rhs and senses must have equal length")
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise ValueError(f"row {i} has length {len(row)}, expected {n}")
        for s in self.senses:
            if s not in (LE, EQ, GE):
                raise ValueError(f"unknown constraint sense {s!r}")


@dataclass(frozen=True)
class LpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Optional[Fraction] = None
    witness: Optional[Vector] = None


def _pivot(tab: List[list], z: list, basis: List[int], r: int, c: int) -> None:
    row = tab[r]
    p = row[c]
    if p != 1:
        tab[r] = row = [x / p for x in row]
    for i, other in enumerate(tab):
        if i != r:
            f = other[c]
            if f:
                tab[i] = [x - f * y for x, y in zip(other, row)]
    f = z[c]
    if f:
        z[:] = [x - f * y for x, y in zip(z, row)]
    basis[r] = c


def _bland(tab: List[list], z: list, basis: List[int], allowed: int) -> str:
    """Maximise with Bland's rule; ``z`` holds reduced costs plus -value in the last slot."""
    while True:
        enter = next((j for j in range(allowed) if z[j] > 0), None)
        if enter is None:
            return "optimal"
        best = None
        for i, row in enumerate(tab):
            a = row[enter]
            if a > 0:
                key = (row[-1] / a, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return "unbounded"
        _pivot(tab, z, basis, best[1], enter)


def lp_solve(p: LpProblem) -> LpOutcome:
    """Two-phase exact simplex with Bland's anti-cycling rule."""
    n = len(p.objective)
    # columns: split free variables into positive and negative parts
    colmap = []  # (original index, sign)
    for j in range(n):
        colmap.append((j, 1))
        if p.free[j]:
            colmap.append((j, -1))
    nstruct = len(colmap)

    rows, rhs = [], []
    slack_signs = []
    for row, b, s in zip(p.rows, p.rhs, p.senses):
        coeffs = [row[j] * sgn for j, sgn in colmap]
        if b < 0:
            coeffs = [-x for x in coeffs]
            b = -b
            s = {LE: GE, GE: LE, EQ: EQ}[s]
        rows.append(coeffs)
        rhs.append(b)
        slack_signs.append({LE: 1, GE: -1, EQ: 0}[s])

    m = len(rows)
    slack_cols = [i for i in range(m) if slack_signs[i]]
    nslack = len(slack_cols)
    ncols = nstruct + nslack + m  # structural, slack/surplus, artificial
    tab = []
    for i in range(m):
        line = rows[i] + [ZERO] * (nslack + m) + [rhs[i]]
        if slack_signs[i]:
            line[nstruct + slack_cols.index(i)] = Fraction(slack_signs[i])
        line[nstruct + nslack + i] = ONE
        tab.append(line)
    basis = [nstruct + nslack + i for i in range(m)]

    # phase I: maximise -(sum of artificials)
    z = [ZERO] * (ncols + 1)
    for line in tab:
        for j in range(nstruct + nslack):
            z[j] += line[j]
        z[-1] += line[-1]
    _bland(tab, z, basis, ncols)
    if z[-1] != 0:
        return LpOutcome("infeasible")

    # drive zero-level artificials out of the basis; drop redundant rows
    art0 = nstruct + nslack
    i = 0
    while i < len(tab):
        if basis[i] >= art0:
            c = next((j for j in range(art0) if tab[i][j] != 0), None)
            if c is None:
                del tab[i]
                del basis[i]
                continue
            _pivot(tab, [ZERO] * (ncols + 1), basis, i, c)
        i += 1
    tab = [line[:art0] + [line[-1]] for line in tab]

    # phase II
    cost = [p.objective[j] * sgn for j, sgn in colmap] + [ZERO] * nslack
    z = cost + [ZERO]
    for line, b in zip(tab, basis):
        cb = cost[b]
        if cb:
            z = [x - cb * y for x, y in zip(z, line)]
    status = _bland(tab, z, basis, art0)

    values = [ZERO] * art0
    for line, b in zip(tab, basis):
        values[b] = line[-1]
    x = [ZERO] * n
    for (j, sgn), v in zip(colmap, values[:nstruct]):
        x[j] += sgn * v
    witness = tuple(x)
    if status == "unbounded":
        return LpOutcome("unbounded", None, witness)
    value = sum((c * v for c, v in zip(p.objective, witness)), ZERO)
    return LpOutcome("optimal", value, witness)


def _check_same_length(vectors: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> None:
    for v in vectors:
        if len(v) != len(target):
            raise ValueError(f"dimension mismatch: {len(v)} vs {len(target)}")


def _combination_problem(generators, target, objective=None, extra_rows=(), extra_rhs=()):
    n = len(generators)
    d = len(target)
    rows = tuple(tuple(Fraction(g[k]) for g in generators) for k in range(d)) + tuple(extra_rows)
    rhs = tuple(Fraction(t) for t in target) + tuple(extra_rhs)
    return LpProblem(
        objective=tuple(objective) if objective is not None else (ZERO,) * n,
        rows=rows,
        rhs=rhs,
        senses=(EQ,) * len(rows),
        free=(False,) * n,
    )


def cone_witness(generators: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> Optional[Vector]:
    """Nonnegative coefficients ``c`` with ``sum(c_i g_i) == target``, or ``None``."""
    _check_same_length(generators, target)
    if not generators:
        return () if is_zero(target) else None
    out = lp_solve(_combination_problem(generators, target))
    return out.witness if out.status == "optimal" else None


def in_cone(generators: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> bool:
    return cone_witness(generators, target) is not None


def face_lp_value(generators: Sequence[Sequence[Fraction]], alpha: Sequence[Fraction], i: int) -> Union[Fraction, float]:
    """``sup{mu >= 0 : alpha - mu * g_i in cone(generators)}``; ``math.inf`` if unbounded."""
    n = len(generators)
    gens = list(generators) + [generators[i]]
    objective = (ZERO,) * n + (ONE,)
    out = lp_solve(_combination_problem(gens, alpha, objective))
    if out.status == "infeasible":
        raise ValueError("target is not in the cone")
    if out.status == "unbounded":
        return inf
    return out.value


def face_indices(generators: Sequence[Sequence[Fraction]], alpha: Sequence[Fraction]) -> Tuple[int, ...]:
    """Indices of the generators lying in the smallest face containing ``alpha``."""
    _check_same_length(generators, alpha)
    if not in_cone(generators, alpha):
        raise ValueError("target is not in the cone")
    return tuple(i for i in range(len(generators)) if face_lp_value(generators, alpha, i) > 0)


def smallest_face(generators: Sequence[Sequence[Fraction]], alpha: Sequence[Fraction]) -> List[Tuple]:
    """Generators contained in the smallest face of ``cone(generators)`` containing ``alpha``."""
    return [tuple(generators[i]) for i in face_indices(generators, alpha)]


def in_relative_interior(generators: Sequence[Sequence[Fraction]], alpha: Sequence[Fraction]) -> bool:
    _check_same_length(generators, alpha)
    if not in_cone(generators, alpha):
        return False
    return len(face_indices(generators, alpha)) == len(generators)


def in_convex_hull(points: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> bool:
    if not points:
        raise ValueError("convex hull of an empty set")
    _check_same_length(points, target)
    n = len(points)
    problem = _combination_problem(points, target, extra_rows=[(ONE,) * n], extra_rhs=[ONE])
    return lp_solve(problem).status == "optimal"


def lp(objective, rows, rhs, senses, free=None) -> LpOutcome:
    """Convenience wrapper accepting ints and ``"p/q"`` strings."""
    obj = tuple(as_rational(x) for x in objective)
    return lp_solve(
        LpProblem(
            objective=obj,
            rows=tuple(tuple(as_rational(x) for x in r) for r in rows),
            rhs=tuple(as_rational(x) for x in rhs),
            senses=tuple(senses),
            free=tuple(free) if free is not None else (False,) * len(obj),
        )
    )
