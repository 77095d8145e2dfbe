"""Symbolic lambda-bracket engine for the localized bc-beta-gamma system."""

from .engine import (
    LambdaPolynomial,
    b,
    beta,
    c,
    gamma,
    lambda_bracket,
    log_generator_names,
    log_generators,
    log_volume_element,
    nop,
    nth_product,
    topological_generators,
)
from .states import VState

__all__ = [
    "LambdaPolynomial",
    "VState",
    "b",
    "beta",
    "c",
    "gamma",
    "lambda_bracket",
    "log_generator_names",
    "log_generators",
    "log_volume_element",
    "nop",
    "nth_product",
    "topological_generators",
]
