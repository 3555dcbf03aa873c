"""Measure the accountability of RDF knowledge graphs from their metadata."""

__version__ = "0.1.0"
