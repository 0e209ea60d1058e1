"""Exact-arithmetic simulator for the thermodynamics of computation.

Computational states are blocks of a partition of a finite microstate space,
operations are realized by bijective microstate dynamics, and the entropy
bookkeeping (Landauer's principle, the decomposition
S(Phi) = H(C) + S(Phi|C), correlation loss under thermalization) is checked
by direct enumeration with exact rational probabilities.
"""
from .infomath import BIT, NAT, Distribution, JointDistribution, LogUnit

__all__ = ["BIT", "NAT", "Distribution", "JointDistribution", "LogUnit"]
__version__ = "0.1.0"
