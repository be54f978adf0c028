"""Finite sampled Lorentzian pre-length spaces and their metric invariants."""
from .kernels import BACKEND
from .core import (AxiomReport, CausalityError, FiniteLorentzianSpace, SpaceInputError,
                   chain_tau, derive_relations, validate_axioms)
from .generators import GenerationError, GeneratorSpec, Oracle, generate

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AxiomReport", "CausalityError", "FiniteLorentzianSpace", "SpaceInputError",
    "chain_tau", "derive_relations", "validate_axioms", "GenerationError", "GeneratorSpec",
    "Oracle", "generate", "__version__",
]
