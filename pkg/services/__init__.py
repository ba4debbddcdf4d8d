"""
Services package for the domain-range algebra engine.

This package contains all the computational services including:
- Term parsing, printing and join normal forms
- Angelic and demonic relational semantics
- Term graphs and the angelic decision procedure
- Axiom catalogs, soundness scans and saturation stages
- Finite algebra enumeration and Wagner-Preston representations
"""
