"""focklab: numerics for weighted Fock spaces and Hankel operators."""

__version__ = "0.1.0"
