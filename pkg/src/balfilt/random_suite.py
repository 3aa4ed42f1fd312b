"""Reproducible random semistable states, plus a small exhaustive rank-2 suite."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, product
from typing import Iterator, List, Optional

from .exactq import InnerProduct, matmul, transpose
from .states import PolarisedState

DEFAULT_SEED = 20240611


def random_gram(rng: random.Random, r: int) -> InnerProduct:
    """``L L^T`` for a random lower-triangular rational ``L`` with positive diagonal."""
    if r == 0:
        return InnerProduct(())
    if rng.random() < 0.25:
        return InnerProduct.standard(r)
    low = []
    for i in range(r):
        row = []
        for j in range(r):
            if j < i:
                row.append(Fraction(rng.randint(-2, 2), rng.randint(1, 2)))
            elif j == i:
                row.append(Fraction(rng.randint(1, 3), rng.randint(1, 2)))
            else:
                row.append(Fraction(0))
        low.append(tuple(row))
    low = tuple(low)
    return InnerProduct(matmul(low, transpose(low)))


def random_character(rng: random.Random, r: int, bound: int = 3):
    while True:
        c = tuple(rng.randint(-bound, bound) for _ in range(r))
        if any(c):
            return c


def random_state(rng: random.Random, max_rank: int = 4, max_chars: int = 6, bound: int = 3) -> PolarisedState:
    r = rng.randint(1, max_rank)
    n = rng.randint(1, max_chars)
    # mostly the characters lie in an open half-space, so the cone is pointed;
    # small nonnegative entries give the degenerate ties that lengthen chains
    mode = rng.random()
    w = random_character(rng, r, 2) if mode < 0.5 else None
    chars = []
    for _ in range(50 * n):  # a small half-space may hold fewer than n characters
        if len(chars) == n:
            break
        if mode >= 0.75:
            c = tuple(rng.randint(0, bound - 1) for _ in range(r))
            if not any(c):
                continue
        else:
            c = random_character(rng, r, bound)
        if w is not None:
            side = sum(a * b for a, b in zip(w, c))
            if side == 0:
                continue
            if side < 0:
                c = tuple(-x for x in c)
        if c not in chars:
            chars.append(c)
    pol = [Fraction(0)] * r
    if rng.random() < 0.5:
        # nonnegative combination of a random subset keeps the state semistable
        for c in rng.sample(chars, rng.randint(1, len(chars))):
            w = Fraction(rng.randint(0, 3), rng.randint(1, 3))
            pol = [p + w * x for p, x in zip(pol, c)]
    return PolarisedState(r, tuple(chars), tuple(pol), random_gram(rng, r))


def random_suite(n: int, seed: Optional[int] = None, **kwargs) -> List[PolarisedState]:
    rng = random.Random(DEFAULT_SEED if seed is None else seed)
    return [random_state(rng, **kwargs) for _ in range(n)]


MICRO_GRAMS = (
    ((1, 0), (0, 1)),
    ((2, 1), (1, 1)),
    ((1, Fraction(1, 2)), (Fraction(1, 2), 3)),
)


def micro_suite() -> Iterator[PolarisedState]:
    """Every set of at most three characters from ``{-1,0,1}^2``, zero polarisation, three metrics."""
    box = [c for c in product((-1, 0, 1), repeat=2) if any(c)]
    for gram in MICRO_GRAMS:
        metric = InnerProduct(gram)
        for k in (1, 2, 3):
            for chars in combinations(box, k):
                yield PolarisedState(2, chars, None, metric)
