"""Shared error type carrying stable machine-readable codes."""

from __future__ import annotations


class DvxError(Exception):
    """Raised for any contract violation the library can name.

    ``code`` is a stable upper-snake identifier (e.g. ``COUNT_MISMATCH``,
    ``STEP_LIMIT``) suitable for programmatic handling; ``message`` is
    human-readable context.
    """

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
