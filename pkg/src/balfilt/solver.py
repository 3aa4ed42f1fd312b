"""Balanced filtration of a semistable state.

The balanced filtration is the minimum-norm covector pairing to at least 1
with every sliced character.  :func:`min_norm_point` solves that problem
exactly with a primal active-set method; :func:`oracle_balanced` solves it a
second way by enumerating candidate active sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence, Tuple

from . import cone
from .exactq import (
    Matrix,
    ONE,
    Vector,
    ZERO,
    add,
    dot,
    flat,
    independent_subset,
    inverse,
    is_zero,
    matvec,
    norm_sq,
    scale,
    solve_linear,
    sub,
    zeros,
)
from .states import (
    PolarisedState,
    SliceResult,
    complementedness,
    is_semistable,
    q_filt_contains,
    slice_state,
)

ORACLE_MAX_CHARACTERS = 12


class CertificationError(RuntimeError):
    """An exact optimality certificate failed where theory says it cannot."""


@dataclass(frozen=True)
class QPSolution:
    point: Vector
    active: Tuple[int, ...]
    multipliers: Tuple[Fraction, ...]
    iterations: int


def _eqp(q_inv: Matrix, cons: Sequence[Vector], working: Sequence[int], dim: int):
    """Minimum of ``x^T Q x`` on ``{a_i . x = 1, i in working}`` and its multipliers."""
    if not working:
        return zeros(dim), ()
    qa = [matvec(q_inv, cons[i]) for i in working]
    k = len(working)
    m = [[dot(cons[working[i]], qa[j]) for j in range(k)] for i in range(k)]
    mu = solve_linear(m, (ONE,) * k)
    if mu is None:
        raise ArithmeticError("working set is not linearly independent")
    x = zeros(dim)
    for c, v in zip(mu, qa):
        x = add(x, scale(c, v))
    return x, tuple(mu)


def min_norm_point(gram: Sequence[Sequence[Fraction]], cons: Sequence[Vector], max_iter: int = 10_000) -> QPSolution:
    """Exact minimiser of ``x^T gram x`` subject to ``a . x >= 1`` for every ``a`` in ``cons``.

    Primal active-set method started from an LP vertex.  Ties are broken by the
    lowest constraint index.  Raises ``ValueError`` if the constraints are
    infeasible.
    """
    dim = len(gram)
    if not cons:
        return QPSolution(zeros(dim), (), (), 0)
    out = cone.lp_solve(
        cone.LpProblem(
            objective=zeros(dim),
            rows=tuple(tuple(a) for a in cons),
            rhs=(ONE,) * len(cons),
            senses=(cone.GE,) * len(cons),
            free=(True,) * dim,
        )
    )
    if out.status != "optimal":
        raise ValueError("constraints are infeasible")
    x = out.witness
    q_inv = inverse(gram)
    tight = [i for i, a in enumerate(cons) if dot(a, x) == 1]
    working = [tight[i] for i in independent_subset([cons[i] for i in tight])]

    for it in range(max_iter):
        y, mu = _eqp(q_inv, cons, working, dim)
        p = sub(y, x)
        if is_zero(p):
            negative = [(m, w) for m, w in zip(mu, working) if m < 0]
            if not negative:
                order = sorted(range(len(working)), key=working.__getitem__)
                return QPSolution(x, tuple(working[i] for i in order), tuple(mu[i] for i in order), it)
            _, drop = min(negative)
            working.remove(drop)
            continue
        step, block = ONE, None
        for i, a in enumerate(cons):
            if i in working:
                continue
            ap = dot(a, p)
            if ap < 0:
                t = (1 - dot(a, x)) / ap
                if t < step:  # strict: the lowest blocking index wins ties
                    step, block = t, i
        x = add(x, scale(step, p))
        if block is not None:
            working.append(block)
    raise RuntimeError("active-set iteration limit reached")


@dataclass(frozen=True)
class BalancedResult:
    """Balanced filtration with its optimality certificate.

    ``intrinsic`` is the filtration in the coordinates of ``slice.sliced``;
    ``filtration`` is the same covector in the state's own coordinates.
    ``kkt`` expresses the metric dual of ``intrinsic`` as a nonnegative
    combination of the ``active`` sliced characters.
    """

    filtration: Vector
    intrinsic: Vector
    active: Tuple[Tuple[int, ...], ...]
    active_indices: Tuple[int, ...]
    kkt: Tuple[Fraction, ...]
    norm_sq: Fraction
    slice: SliceResult


def _require_semistable(s: PolarisedState) -> None:
    if not is_semistable(s):
        raise ValueError("state is not semistable")


def balanced_filtration(s: PolarisedState) -> BalancedResult:
    _require_semistable(s)
    sl = slice_state(s)
    sliced = sl.sliced
    chars = [tuple(Fraction(x) for x in c) for c in sliced.characters]
    if not chars:
        lam = zeros(sliced.rank)
        return BalancedResult(zeros(s.rank), lam, (), (), (), ZERO, sl)
    sol = min_norm_point(sliced.metric.gram, chars)
    lam = sol.point
    # G lam = sum(mu_i chi_i) over the working set; other tight characters get 0
    weights = dict(zip(sol.active, sol.multipliers))
    tight = tuple(i for i, c in enumerate(chars) if dot(lam, c) == 1)
    return BalancedResult(
        filtration=sl.embed(lam),
        intrinsic=lam,
        active=tuple(sliced.characters[i] for i in tight),
        active_indices=tight,
        kkt=tuple(weights.get(i, ZERO) for i in tight),
        norm_sq=norm_sq(sliced.metric, lam),
        slice=sl,
    )


def verify_balanced(s: PolarisedState, lam) -> bool:
    """Exact recognition test: feasible and the metric dual lies in the cone of tight characters."""
    lam = tuple(Fraction(x) for x in lam)
    if not q_filt_contains(s, lam):
        raise ValueError("not a filtration of the state")
    if complementedness(s, lam) < 1:
        return False
    sl = slice_state(s)
    lam_s = sl.pullback(lam)
    sliced = sl.sliced
    tight = [c for c in sliced.characters if dot(lam_s, c) == 1]
    dual = flat(sliced.metric, lam_s) if sliced.rank else ()
    return cone.in_cone(tight, dual)


def kkt_residual(result: BalancedResult) -> Vector:
    """``G lam - sum(c_chi chi)`` over the active set; zero for a valid certificate."""
    sliced = result.slice.sliced
    if not sliced.rank:
        return ()
    r = flat(sliced.metric, result.intrinsic)
    for c, chi in zip(result.kkt, result.active):
        r = sub(r, scale(c, chi))
    return r


def oracle_balanced(s: PolarisedState, max_characters: int = ORACLE_MAX_CHARACTERS) -> Vector:
    """Brute-force balanced filtration over all candidate active sets.

    For every subset ``S`` of sliced characters, the least-norm covector with
    ``<lam, chi> = 1`` on ``S`` is computed from a linear system; the feasible
    candidate of smallest norm wins (first found on ties, subsets ordered by
    size then lexicographically).
    """
    _require_semistable(s)
    sl = slice_state(s)
    sliced = sl.sliced
    chars = [tuple(Fraction(x) for x in c) for c in sliced.characters]
    if len(chars) > max_characters:
        raise ValueError(f"oracle limited to {max_characters} sliced characters, got {len(chars)}")
    if not chars:
        return zeros(s.rank)
    g = sliced.metric
    g_inv = inverse(g.gram)
    best, best_norm = None, None
    for k in range(1, len(chars) + 1):
        for subset in combinations(range(len(chars)), k):
            rows = [chars[i] for i in subset]
            cols = [matvec(g_inv, a) for a in rows]
            m = [[dot(a, c) for c in cols] for a in rows]
            mu = solve_linear(m, (ONE,) * k)
            if mu is None:
                continue
            lam = zeros(sliced.rank)
            for c, v in zip(mu, cols):
                lam = add(lam, scale(c, v))
            if any(dot(lam, a) < 1 for a in chars):
                continue
            n = norm_sq(g, lam)
            if best_norm is None or n < best_norm:
                best, best_norm = lam, n
    if best is None:
        raise CertificationError("no feasible candidate among the active sets")
    return sl.embed(best)
