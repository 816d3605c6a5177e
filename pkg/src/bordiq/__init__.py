"""Quantitative PL bordism toolkit: transversality, bar constructions, chain null-homotopies and bordism assembly."""

__version__ = "0.1.0"
