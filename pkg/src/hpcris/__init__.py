"""Exact Hochschild, periodic cyclic and crystalline periodic cyclic homology of free DGAs over Z/p^n."""

__version__ = "0.1.0"
