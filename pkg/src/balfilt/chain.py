"""Balancing chain and iterated balanced filtration.

Two independent routes compute the same sequence:

* :func:`balancing_chain` slices lattices: each step balances the current
  state, keeps the characters pairing to 1, and passes to the quotient by the
  face containing the dual of the filtration.
* :func:`iterate_projected` never leaves the ambient dual space: characters
  are moved there with the metric and faces are split off by orthogonal
  projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from . import cone
from .exactq import (
    Matrix,
    Vector,
    independent_subset,
    inner,
    is_zero,
    matmul,
    matvec,
    orthogonal_complement,
    project_orthogonal,
    sharp,
    transpose,
    zeros,
)
from .solver import BalancedResult, CertificationError, balanced_filtration, min_norm_point, verify_balanced
from .states import (
    PolarisedState,
    SequentialFiltration,
    StateMorphism,
    grad,
    is_semistable,
    lambda_state,
    q_filt_contains,
    slice_state,
    validate_morphism,
)


@dataclass(frozen=True)
class ChainStep:
    """One step of the balancing chain.

    ``embedding`` maps the dual space of ``state`` into the dual space of the
    original state; ``lambda_state``/``next_state`` are ``None`` on the
    terminal step.
    """

    index: int
    state: PolarisedState
    balanced: BalancedResult
    embedding: Matrix
    filtration: Vector  # balanced filtration in original coordinates
    lambda_state: Optional[PolarisedState] = None
    next_state: Optional[PolarisedState] = None
    face: Tuple[Tuple[int, ...], ...] = ()
    link: Optional[StateMorphism] = None


@dataclass(frozen=True)
class ChainTrace:
    steps: Tuple[ChainStep, ...]
    terminal: bool
    sequence: SequentialFiltration
    initial_slice_embedding: Matrix = field(default=())


def _compose(a: Matrix, b: Matrix, rows: int) -> Matrix:
    if not b or not b[0]:
        return tuple(() for _ in range(rows))
    return matmul(a, b)


def balancing_chain(s: PolarisedState) -> ChainTrace:
    if not is_semistable(s):
        raise ValueError("state is not semistable")
    r = s.rank
    sl0 = slice_state(s)
    state = sl0.sliced
    emb = sl0.embedding
    steps: List[ChainStep] = []
    sequence: List[Vector] = []
    for n in range(len(s.characters) + 2):
        res = balanced_filtration(state)
        if not verify_balanced(state, res.filtration):
            raise CertificationError(f"balanced filtration of step {n} failed its certificate")
        lam_orig = matvec(emb, res.filtration) if state.rank else zeros(r)
        if is_zero(res.filtration):
            steps.append(ChainStep(n, state, res, emb, lam_orig))
            return ChainTrace(tuple(steps), True, tuple(sequence), sl0.embedding)
        lam_st = lambda_state(state, res.filtration)
        nxt = slice_state(lam_st)
        # link u_n: quotient M_n -> M_n' (own slice) -> M_{n+1}
        own = res.slice
        quotient = matmul(transpose(nxt.embedding), transpose(own.embedding)) if nxt.sliced.rank else ()
        link = StateMorphism(
            tuple(tuple(int(x) for x in row) for row in quotient),
            nxt.sliced,
            grad(state, res.filtration),
        )
        check = validate_morphism(link)
        if not check:
            raise CertificationError(f"link morphism of step {n} invalid: {check.violations}")
        if len(nxt.sliced.characters) >= len(state.characters):
            raise CertificationError(f"character count did not decrease at step {n}")
        steps.append(ChainStep(n, state, res, emb, lam_orig, lam_st, nxt.sliced, nxt.face, link))
        sequence.append(lam_orig)
        emb = _compose(emb, _compose(own.embedding, nxt.embedding, state.rank), r)
        state = nxt.sliced
    raise CertificationError("balancing chain did not terminate within #characters steps")


def iterated_balanced(s: PolarisedState) -> SequentialFiltration:
    """Nonzero terms of the iterated balanced filtration, in the coordinates of ``s``."""
    return balancing_chain(s).sequence


@dataclass(frozen=True)
class ProjectedStep:
    vectors: Tuple[Vector, ...]  # current character images in the ambient dual space
    anchor: Vector  # point whose smallest face is split off
    face: Tuple[Vector, ...]
    filtration: Optional[Vector]


def iterate_projected(s: PolarisedState, trace: Optional[list] = None) -> SequentialFiltration:
    """Iterated balanced filtration computed by orthogonal projections.

    Characters are identified with covectors through the metric.  At each
    stage the smallest face containing the anchor (the polarisation first,
    then the previous filtration) is split off, the minimum-norm covector
    orthogonal to everything split off so far and pairing to at least 1 with
    the remaining vectors is taken, and the vectors pairing exactly to 1 are
    projected onto the new orthogonal complement.  Passing a list as
    ``trace`` records each stage.
    """
    if not is_semistable(s):
        raise ValueError("state is not semistable")
    g = s.metric
    vectors = _dedupe([sharp(g, tuple(Fraction(x) for x in c)) for c in s.characters])
    anchor = sharp(g, s.polarisation)
    split: List[Vector] = []  # independent vectors spanning everything split off
    sequence: List[Vector] = []
    for _ in range(len(s.characters) + 2):
        if not cone.in_cone(vectors, anchor):
            raise CertificationError("anchor left the cone of the surviving vectors")
        idx = cone.face_indices(vectors, anchor)
        face = [vectors[i] for i in idx]
        for v in face:
            cand = split + [v]
            if len(independent_subset(cand)) == len(cand):
                split = cand
        rest = [v for i, v in enumerate(vectors) if i not in idx]
        if not rest:
            if trace is not None:
                trace.append(ProjectedStep(tuple(vectors), anchor, tuple(face), None))
            return tuple(sequence)
        basis = orthogonal_complement(g, split)  # vectors spanning the current subspace
        if not basis:
            raise CertificationError("no room left for a filtration")
        reduced = tuple(tuple(inner(g, b1, b2) for b2 in basis) for b1 in basis)
        cons = [tuple(inner(g, b, v) for b in basis) for v in rest]
        sol = min_norm_point(reduced, cons)
        lam = tuple(sum(c * b[k] for c, b in zip(sol.point, basis)) for k in range(s.rank))
        if trace is not None:
            trace.append(ProjectedStep(tuple(vectors), anchor, tuple(face), lam))
        sequence.append(lam)
        tight = [v for v in rest if inner(g, lam, v) == 1]
        vectors = _dedupe([project_orthogonal(g, split, v) for v in tight])
        anchor = lam
    raise CertificationError("projected iteration did not terminate")


def _dedupe(items):
    out = []
    for it in items:
        if it not in out:
            out.append(it)
    return out


def is_sequential_filtration(s: PolarisedState, seq) -> bool:
    """Whether each term is a filtration of the graded state produced by the previous terms."""
    current = s
    for lam in seq:
        lam = tuple(Fraction(x) for x in lam)
        if not q_filt_contains(current, lam):
            return False
        current = grad(current, lam)
    return True
