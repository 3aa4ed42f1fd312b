import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from balfilt.exactq import InnerProduct, dot, vec
from balfilt.random_suite import random_state
from balfilt.solver import (
    CertificationError,
    balanced_filtration,
    kkt_residual,
    min_norm_point,
    oracle_balanced,
    verify_balanced,
)
from balfilt.states import PolarisedState, is_polystable, slice_state

F = Fraction
seeds = st.integers(0, 2**32 - 1)


def S(chars, pol=None, gram=None):
    return PolarisedState(len(chars[0]), tuple(chars), vec(pol) if pol is not None else None, gram)


def test_balanced_two_characters(two_chars):
    res = balanced_filtration(two_chars)
    assert res.filtration == (1, 0)
    assert set(res.active) == {(1, 0), (1, 1)}
    assert res.norm_sq == 1
    assert all(c >= 0 for c in res.kkt)
    assert not any(kkt_residual(res))


def test_balanced_rank_one_slice():
    # the slice reached after the first step on the two-character state
    s = S([(1, 0), (1, 1)], pol=(1, 0))
    res = balanced_filtration(s)
    assert abs(res.intrinsic[0]) == 1
    assert res.filtration == (0, 1)


def test_balanced_single_character():
    assert balanced_filtration(S([(2, 0)])).filtration == (F(1, 2), 0)


def test_balanced_polystable_is_zero():
    res = balanced_filtration(S([(1, 0), (-1, 0)]))
    assert res.filtration == (0, 0) and res.active == () and res.norm_sq == 0


def test_balanced_rejects_unstable():
    with pytest.raises(ValueError, match="semistable"):
        balanced_filtration(S([(1, 0), (0, 1)], pol=(1, -1)))


def test_balanced_non_standard_metric():
    # G = [[2,1],[1,1]]: min lam^T G lam with lam_1 >= 1 is lam = (1, -1)
    s = S([(1, 0)], gram=InnerProduct(((2, 1), (1, 1))))
    res = balanced_filtration(s)
    assert res.filtration == (1, -1) and res.norm_sq == 1


def test_verify_examples(two_chars):
    assert verify_balanced(two_chars, vec((1, 0)))
    assert not verify_balanced(two_chars, vec((1, 1)))
    assert not verify_balanced(two_chars, vec(("1/2", 0)))  # infeasible
    assert verify_balanced(S([(1, 0), (-1, 0)]), vec((0, 0)))
    with pytest.raises(ValueError):
        verify_balanced(two_chars, vec((0, -1)))


def test_oracle_examples(two_chars):
    assert oracle_balanced(two_chars) == (1, 0)
    assert oracle_balanced(S([(1, 0), (-1, 0)])) == (0, 0)
    assert oracle_balanced(S([(1, 0), (0, 1)])) == (1, 1)


def test_oracle_budget():
    s = PolarisedState(1, tuple((k,) for k in range(1, 6)))
    with pytest.raises(ValueError, match="limited"):
        oracle_balanced(s, max_characters=4)


def test_min_norm_point_infeasible():
    with pytest.raises(ValueError):
        min_norm_point(((1, 0), (0, 1)), [vec((1, 0)), vec((-1, 0))])


def test_min_norm_point_degenerate_constraints():
    # many constraints tight at the optimum, some redundant
    cons = [vec(c) for c in [(1, 0), (1, 1), (1, -1), (2, 0), (1, 0)]]
    sol = min_norm_point(((1, 0), (0, 1)), cons)
    assert sol.point == (1, 0)
    assert all(m >= 0 for m in sol.multipliers)


def test_certification_error_is_runtime_error():
    assert issubclass(CertificationError, RuntimeError)


@given(seeds)
def test_solver_properties(seed):
    s = random_state(random.Random(seed))
    res = balanced_filtration(s)
    lam = res.filtration
    assert verify_balanced(s, lam)
    assert oracle_balanced(s) == lam
    assert all(c >= 0 for c in res.kkt)
    assert not any(kkt_residual(res))
    chars = slice_state(s).sliced.characters
    if chars:
        assert min(dot(res.intrinsic, c) for c in chars) == 1
    assert (not any(lam)) == is_polystable(s)


@given(seeds, st.fractions(F(1, 5), 5).filter(lambda c: c > 0))
def test_scale_invariance(seed, c):
    s = random_state(random.Random(seed))
    scaled = PolarisedState(s.rank, s.characters, s.polarisation, s.metric.scaled(c))
    assert balanced_filtration(scaled).filtration == balanced_filtration(s).filtration
