"""Offline image/text encoder producing DVXE/DVXR corpus files."""

from .extract import ExtractError, ExtractJob, extract

__version__ = "0.1.0"
