"""Hecke eigenbases of quantized cat maps on Z/pZ and their sup norms."""

__version__ = "0.1.0"

from .errors import QuantCatError
from .finite_field import CatMap, Kind, PrimeContext, classify_prime, legendre, prime_context
from .weil import LinearOperator, QuantumState, build_unitary, delta_action, inner_product
from .hecke import (
    EigenspaceResult,
    HeckeGroup,
    centralizer,
    characters,
    eigenbasis,
    eigenspaces,
    projection_operator,
    ramified_closed_form,
    split_closed_form,
)
from .exp_sums import ExpSumContext, projection_via_exp_sum, verify_bounds
from .composite import CompositeContext, composite_eigenbasis, tensor_operator, tensor_state

__all__ = [
    "QuantCatError", "CatMap", "Kind", "PrimeContext", "classify_prime", "legendre",
    "prime_context", "LinearOperator", "QuantumState", "build_unitary", "delta_action",
    "inner_product", "EigenspaceResult", "HeckeGroup", "centralizer", "characters",
    "eigenbasis", "eigenspaces", "projection_operator", "ramified_closed_form",
    "split_closed_form", "ExpSumContext", "projection_via_exp_sum", "verify_bounds",
    "CompositeContext", "composite_eigenbasis", "tensor_operator", "tensor_state",
]
