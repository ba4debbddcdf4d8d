"""
Utilities package for the domain-range algebra engine.

This package contains validators, the error hierarchy and small shared data structures.
"""
