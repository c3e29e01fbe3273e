"""Privacy amplification toolkit: hash ensembles, conditional Renyi
quantities, one-shot secrecy bounds, exponents and exhaustive checks."""

from . import bounds, classical_info, finite_field, hash_ensembles, keygen, pauli, quantum_info, verifier

__version__ = "0.1.0"

__all__ = [
    "bounds",
    "classical_info",
    "finite_field",
    "hash_ensembles",
    "keygen",
    "pauli",
    "quantum_info",
    "verifier",
]
