"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should
raise the most specific one that applies rather than bare ValueError.
"""


class InvalidInput(ValueError):
    """Malformed or out-of-domain argument (exit code 2)."""


class InvariantViolation(RuntimeError):
    """A checked internal invariant failed to hold (exit code 3)."""


class CapExceeded(ValueError):
    """Requested computation is beyond a documented size cap (exit code 4)."""
