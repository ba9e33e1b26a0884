"""Exact p-adic orbital integrals on linear and unitary symmetric spaces,
with a verifier for the matching identities between them at small rank."""

__version__ = "0.1.0"
