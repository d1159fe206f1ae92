"""Exception types shared across the package.

Plain domain violations (bad argument values) raise ValueError; the classes
here mark failures of numerical procedures, which callers may want to catch
and report with diagnostics.
"""


class LiwaveError(Exception):
    """Base class for package-specific failures."""


class ConfigError(LiwaveError):
    """A configuration file is missing, malformed, or inconsistent."""


class ConvergenceError(LiwaveError):
    """A numerical procedure did not reach its tolerance.

    Carries a ``diagnostics`` dict (offending l, last residual, grid size...)
    so failures are actionable rather than opaque.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})

    def __str__(self):
        base = super().__str__()
        if self.diagnostics:
            details = ", ".join(f"{k}={v}" for k, v in sorted(self.diagnostics.items()))
            return f"{base} [{details}]"
        return base


class NoMinimumError(LiwaveError):
    """The potential has no unique interior minimum."""
