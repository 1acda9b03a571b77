"""Rational Gottlieb groups, evaluation subgroups and obstruction groups of Sullivan models."""

from .cdga import (
    Generator,
    KsExtension,
    Morphism,
    Polynomial,
    SullivanAlgebra,
    cohomology,
    compose_ks,
    product_extension,
    pullback_model,
    trivial_extension,
)
from .derivation import PhiDerivation, delta, elementary
from .errors import (
    DomainMismatchError,
    ModelError,
    ParseError,
    PreconditionError,
    SplittingError,
    SullivanError,
)
from .gottlieb import (
    classify_generator,
    evaluation_subgroup,
    gottlieb_group,
    gottlieb_homology,
    homotopy_center,
    is_rg_map,
    is_w_map,
    morphism_obstruction,
    obstruction_group,
)
from .modelfile import load, parse, serialize
from .splitting import associated_pullback, split, verify_certificate

__version__ = "0.1.0"

__all__ = [
    "DomainMismatchError",
    "Generator",
    "KsExtension",
    "ModelError",
    "Morphism",
    "ParseError",
    "PhiDerivation",
    "Polynomial",
    "PreconditionError",
    "SplittingError",
    "SullivanAlgebra",
    "SullivanError",
    "associated_pullback",
    "classify_generator",
    "cohomology",
    "compose_ks",
    "delta",
    "elementary",
    "evaluation_subgroup",
    "gottlieb_group",
    "gottlieb_homology",
    "homotopy_center",
    "is_rg_map",
    "is_w_map",
    "load",
    "morphism_obstruction",
    "obstruction_group",
    "parse",
    "product_extension",
    "pullback_model",
    "serialize",
    "split",
    "trivial_extension",
    "verify_certificate",
]
