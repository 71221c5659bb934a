"""Multilingual RAG strategies and evaluation."""
__version__ = "0.1.0"
