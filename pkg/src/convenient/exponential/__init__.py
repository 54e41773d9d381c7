"""The exponential modality ``!E`` as finite-order derivative-of-Dirac distributions."""

from .elements import Distribution, Pair, Tensor, as_tensor, atoms, from_atoms, residual, space_of
from .structure import (
    SmoothMap,
    coder,
    comul_delta,
    comultiplication_rho,
    conv_nabla,
    counit_e,
    derive_dA,
    dirac,
    dirac_map,
    eps,
    eps_map,
    lift,
    lower,
    push,
    pushforward,
    seely_merge,
    seely_split,
    unit_nu,
)
from .testfunctional import TestFunctional, pair, pair_tensor

__all__ = [
    "Distribution", "Pair", "Tensor", "as_tensor", "atoms", "from_atoms", "residual", "space_of",
    "SmoothMap", "coder", "comul_delta", "comultiplication_rho", "conv_nabla", "counit_e",
    "derive_dA", "dirac", "dirac_map", "eps", "eps_map", "lift", "lower", "push", "pushforward",
    "seely_merge", "seely_split", "unit_nu", "TestFunctional", "pair", "pair_tensor",
]
