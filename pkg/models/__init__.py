"""
Models package for the domain-range algebra engine.

Immutable domain types (terms, relations, term graphs) are frozen dataclasses;
everything that is read from or written to a file is a Pydantic model.
"""
