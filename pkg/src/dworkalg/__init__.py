"""Exact p-adic kernel for Dwork operators, Frobenius descent and Weyl-algebra division."""

__version__ = "0.1.0"
