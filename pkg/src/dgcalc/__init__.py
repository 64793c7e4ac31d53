"""dgcalc: exact-arithmetic calculus on shifted-line bundles over CDGA models."""

from .graded import Element, GradedError, GradedGenerator, Model, Monomial, format_element
from .derivations import (
    BundleError,
    Derivation,
    DerivationError,
    DgBundle,
    commutator,
    gauge_transform,
    homologous_shift,
    maurer_cartan_check,
    model_differential,
)

__all__ = [
    "Element",
    "GradedError",
    "GradedGenerator",
    "Model",
    "Monomial",
    "format_element",
    "BundleError",
    "Derivation",
    "DerivationError",
    "DgBundle",
    "commutator",
    "gauge_transform",
    "homologous_shift",
    "maurer_cartan_check",
    "model_differential",
]

__version__ = "0.1.0"
