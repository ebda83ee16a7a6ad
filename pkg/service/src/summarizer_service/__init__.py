"""Summarizer microservice speaking the pipeline's wire protocol."""

__version__ = "0.1.0"
