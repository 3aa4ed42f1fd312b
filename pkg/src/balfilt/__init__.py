"""Balanced filtrations of polarised torus states, computed exactly.

The core works over the rationals: a state is a lattice ``Z^r``, a finite set
of nonzero characters, a polarisation and an inner product on the dual space.
From it we compute the balanced filtration, the balancing chain and the
iterated balanced filtration, each with a checkable certificate.  ``flow``
holds a floating-point harness for the gradient-flow asymptotics.
"""

from .chain import balancing_chain, is_sequential_filtration, iterate_projected, iterated_balanced
from .exactq import InnerProduct, as_rational, format_rational
from .solver import CertificationError, balanced_filtration, oracle_balanced, verify_balanced
from .states import (
    PolarisedState,
    complementedness,
    grad,
    is_polystable,
    is_semistable,
    lambda_state,
    slice_state,
    state_of_point,
)

__version__ = "0.1.0"

__all__ = [
    "CertificationError",
    "InnerProduct",
    "PolarisedState",
    "as_rational",
    "balanced_filtration",
    "balancing_chain",
    "complementedness",
    "format_rational",
    "grad",
    "is_polystable",
    "is_semistable",
    "is_sequential_filtration",
    "iterate_projected",
    "iterated_balanced",
    "lambda_state",
    "oracle_balanced",
    "slice_state",
    "state_of_point",
    "verify_balanced",
]
