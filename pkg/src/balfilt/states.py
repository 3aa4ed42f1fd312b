"""Polarised states and their combinatorial constructions.

A state lives in ``M = Z^r`` (torsion is dropped).  Characters are integer
vectors in ``M``; filtrations are rational covectors in the dual space, paired
with characters by the plain dot product.  The metric is an inner product on
the dual space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import inf
from typing import List, Optional, Sequence, Tuple, Union

from . import cone
from .exactq import (
    InnerProduct,
    Matrix,
    Vector,
    as_rational,
    dot,
    flat,
    independent_subset,
    is_surjective_integer,
    is_zero,
    lattice_kernel_basis,
    matmul,
    matvec,
    solve_linear,
    transpose,
    vec,
    zeros,
)

Character = Tuple[int, ...]
Filtration = Vector
SequentialFiltration = Tuple[Vector, ...]
ExtendedRational = Union[Fraction, float]  # float only ever holds math.inf

INFINITY = inf


def _as_character(chi, r: int) -> Character:
    if len(chi) != r:
        raise ValueError(f"character {list(chi)} has length {len(chi)}, expected rank {r}")
    out = []
    for x in chi:
        q = as_rational(x) if not isinstance(x, int) else Fraction(x)
        if q.denominator != 1:
            raise ValueError(f"character {list(chi)} is not integral")
        out.append(int(q))
    return tuple(out)


def _dedupe(items):
    seen = set()
    out = []
    for it in items:
        if it not in seen:
            seen.add(it)
            out.append(it)
    return tuple(out)


@dataclass(frozen=True)
class PolarisedState:
    """Normed polarised state ``(Z^rank, characters, polarisation)`` with a metric.

    Characters are deduplicated (first occurrence kept); a zero character is
    an error.  ``polarisation`` defaults to 0 and ``metric`` to the standard
    inner product.
    """

    rank: int
    characters: Tuple[Character, ...]
    polarisation: Optional[Vector] = None
    metric: Optional[InnerProduct] = field(default=None)

    def __post_init__(self):
        r = int(self.rank)
        if r < 0:
            raise ValueError("rank must be nonnegative")
        chars = tuple(_as_character(c, r) for c in self.characters)
        for c in chars:
            if not any(c):
                raise ValueError("zero character in state")
        object.__setattr__(self, "characters", _dedupe(chars))
        pol = zeros(r) if self.polarisation is None else vec(self.polarisation)
        if len(pol) != r:
            raise ValueError(f"polarisation has length {len(pol)}, expected rank {r}")
        object.__setattr__(self, "polarisation", pol)
        metric = InnerProduct.standard(r) if self.metric is None else self.metric
        if not isinstance(metric, InnerProduct):
            metric = InnerProduct(metric)
        if metric.dim != r:
            raise ValueError(f"metric has dimension {metric.dim}, expected rank {r}")
        object.__setattr__(self, "metric", metric)

    def with_characters(self, chars) -> "PolarisedState":
        return PolarisedState(self.rank, tuple(chars), self.polarisation, self.metric)


def state_of_point(weights, coordinates, polarisation=None, metric=None) -> PolarisedState:
    """State of a point of a diagonalisable-group representation.

    ``weights[i]`` is the character by which the group acts on coordinate
    ``i``.  Characters with a nonzero coordinate are kept; zero characters are
    dropped and duplicates collapsed.
    """
    if len(weights) != len(coordinates):
        raise ValueError("one weight row per coordinate required")
    if not weights:
        raise ValueError("cannot infer the rank from an empty weight matrix")
    r = len(weights[0])
    chars = []
    for w, x in zip(weights, coordinates):
        chi = _as_character(w, r)
        if as_rational(x) != 0 and any(chi):
            chars.append(chi)
    return PolarisedState(r, tuple(chars), polarisation, metric)


def is_semistable(s: PolarisedState) -> bool:
    return cone.in_cone(s.characters, s.polarisation)


def is_polystable(s: PolarisedState) -> bool:
    return cone.in_relative_interior(s.characters, s.polarisation)


def _require_semistable(s: PolarisedState) -> None:
    if not is_semistable(s):
        raise ValueError("state is not semistable")


def q_filt_contains(s: PolarisedState, lam: Sequence[Fraction]) -> bool:
    """Whether ``lam`` is a rational filtration of the semistable state ``s``."""
    _require_semistable(s)
    if len(lam) != s.rank:
        raise ValueError(f"filtration has length {len(lam)}, expected rank {s.rank}")
    return all(dot(lam, c) >= 0 for c in s.characters) and dot(lam, s.polarisation) == 0


def _require_filtration(s: PolarisedState, lam) -> Vector:
    lam = vec(lam)
    if not q_filt_contains(s, lam):
        raise ValueError("not a filtration of the state")
    return lam


def grad(s: PolarisedState, lam) -> PolarisedState:
    """Associated graded state: keep the characters on the hyperplane ``<lam, -> = 0``."""
    lam = _require_filtration(s, lam)
    return s.with_characters(c for c in s.characters if dot(lam, c) == 0)


@dataclass(frozen=True)
class SliceResult:
    face: Tuple[Character, ...]
    kernel_basis: Tuple[Vector, ...]
    sliced: PolarisedState
    embedding: Matrix  # rank x sliced.rank, columns span the annihilator of the face

    @property
    def quotient(self) -> Tuple[Tuple[int, ...], ...]:
        """Integer matrix of the quotient map ``M -> M'``."""
        return tuple(tuple(int(x) for x in row) for row in transpose(self.embedding))

    def embed(self, lam_sliced: Sequence[Fraction]) -> Vector:
        if not lam_sliced:
            return zeros(len(self.embedding))
        return matvec(self.embedding, lam_sliced)

    def pullback(self, lam: Sequence[Fraction]) -> Vector:
        """Coordinates in the sliced dual space of a covector annihilating the face."""
        if self.sliced.rank == 0:
            if not is_zero(lam):
                raise ValueError("covector does not annihilate the face")
            return ()
        y = solve_linear(self.embedding, tuple(lam))
        if y is None:
            raise ValueError("covector does not annihilate the face")
        return y


@lru_cache(maxsize=8192)
def slice_state(s: PolarisedState) -> SliceResult:
    """Quotient of ``s`` by the smallest face of its cone containing the polarisation."""
    _require_semistable(s)
    r = s.rank
    idx = cone.face_indices(s.characters, s.polarisation)
    face = tuple(s.characters[i] for i in idx)
    face_q = [vec(c) for c in face]
    kernel = tuple(face_q[i] for i in independent_subset(face_q))
    basis = lattice_kernel_basis(kernel, r)
    embedding = tuple(tuple(Fraction(b[i]) for b in basis) for i in range(r))
    quotient = tuple(tuple(b) for b in basis)  # rows of the quotient matrix
    rest = [c for i, c in enumerate(s.characters) if i not in idx]
    sliced_chars = []
    for c in rest:
        image = tuple(sum(q[k] * c[k] for k in range(r)) for q in quotient)
        assert any(image), "a character outside the face cannot die in the quotient"
        sliced_chars.append(image)
    r2 = len(basis)
    sliced = PolarisedState(r2, tuple(sliced_chars), zeros(r2), s.metric.restrict(embedding))
    return SliceResult(face, kernel, sliced, embedding)


def complementedness(s: PolarisedState, lam) -> ExtendedRational:
    """Minimum pairing of ``lam`` with the sliced characters (``inf`` if there are none)."""
    lam = _require_filtration(s, lam)
    face = set(slice_state(s).face)
    values = [dot(lam, c) for c in s.characters if c not in face]
    return min(values) if values else INFINITY


def lambda_state(s: PolarisedState, lam) -> PolarisedState:
    """State on the slice with the characters pairing to 1 and polarisation dual to ``lam``."""
    c = complementedness(s, lam)
    if c < 1:
        raise ValueError(f"complementedness {c} < 1")
    sl = slice_state(s)
    lam_s = sl.pullback(vec(lam))
    sliced = sl.sliced
    tight = [chi for chi in sliced.characters if dot(lam_s, chi) == 1]
    pol = flat(sliced.metric, lam_s) if sliced.rank else ()
    return PolarisedState(sliced.rank, tuple(tight), pol, sliced.metric)


@dataclass(frozen=True)
class StateMorphism:
    """Morphism ``source -> target`` given by an integer map of lattices ``M_target -> M_source``."""

    matrix: Tuple[Tuple[int, ...], ...]  # source.rank x target.rank
    source: PolarisedState
    target: PolarisedState

    def apply(self, chi) -> Tuple[int, ...]:
        return tuple(sum(row[k] * chi[k] for k in range(len(chi))) for row in self.matrix)

    def dual(self) -> Matrix:
        """Matrix of the injection of dual spaces ``M_source^v -> M_target^v``."""
        phi = tuple(tuple(Fraction(x) for x in row) for row in self.matrix)
        return tuple(tuple(phi[i][j] for i in range(self.source.rank)) for j in range(self.target.rank))


@dataclass
class MorphismCheck:
    ok: bool
    violations: List[str]

    def __bool__(self):
        return self.ok


def identity_morphism(s: PolarisedState) -> StateMorphism:
    r = s.rank
    return StateMorphism(tuple(tuple(int(i == j) for j in range(r)) for i in range(r)), s, s)


def slice_morphism(s: PolarisedState) -> StateMorphism:
    """The quotient map as a morphism from the slice to ``s``."""
    sl = slice_state(s)
    return StateMorphism(sl.quotient, sl.sliced, s)


def validate_morphism(m: StateMorphism) -> MorphismCheck:
    problems = []
    src, tgt = m.source, m.target
    if len(m.matrix) != src.rank or any(len(row) != tgt.rank for row in m.matrix):
        return MorphismCheck(False, ["matrix shape does not match the states"])
    if not all(isinstance(x, int) for row in m.matrix for x in row):
        problems.append("matrix is not integral")
    elif not is_surjective_integer(m.matrix, tgt.rank):
        problems.append("lattice map is not surjective")
    for st, name in ((src, "source"), (tgt, "target")):
        if not is_semistable(st):
            problems.append(f"{name} is not semistable")
    src_chars = set(src.characters)
    kernel_chars = []
    for chi in tgt.characters:
        image = m.apply(chi)
        if not any(image):
            kernel_chars.append(chi)
        elif image not in src_chars:
            problems.append(f"character {list(chi)} maps to {list(image)}, not a source character")
    if not cone.in_cone(kernel_chars, tgt.polarisation):
        problems.append("target polarisation not in the cone of characters killed by the map")
    phi = tuple(tuple(Fraction(x) for x in row) for row in m.matrix)
    if src.rank:
        restricted = matmul(matmul(phi, tgt.metric.gram), transpose(phi))
    else:
        restricted = ()
    if restricted != src.metric.gram:
        problems.append("source metric is not the restriction of the target metric")
    return MorphismCheck(not problems, problems)


def push_filtration(m: StateMorphism, lam) -> Vector:
    """Image of a source filtration in the target dual space."""
    lam = _require_filtration(m.source, lam)
    if m.source.rank == 0:
        return zeros(m.target.rank)
    return matvec(m.dual(), lam)


def grad_morphism(m: StateMorphism, lam) -> StateMorphism:
    pushed = push_filtration(m, lam)
    return StateMorphism(m.matrix, grad(m.source, lam), grad(m.target, pushed))
