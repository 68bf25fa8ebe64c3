"""Exception hierarchy shared by every module."""


class HardyLorentzError(Exception):
    """Base class for all library errors."""


class ParseError(HardyLorentzError):
    """Malformed configuration text or weight literal."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ValidationError(HardyLorentzError):
    """A structurally valid object violates a documented invariant."""

    def __init__(self, message: str, violations: list[str] | None = None):
        self.violations = list(violations or [message])
        super().__init__(message)


class DomainError(HardyLorentzError):
    """An argument lies outside the domain where an operation is defined."""


class InconclusiveDivergence(DomainError):
    """Quadrature could not decide whether an integral is finite."""


class AdmissibilityError(HardyLorentzError):
    """A weight fails the finiteness or non-degeneracy requirements."""


class NonDegeneracyError(AdmissibilityError):
    """Non-degeneracy hypotheses on a weight triple fail."""


class RegimeError(HardyLorentzError):
    """Exponents fall outside every case handled by the requested formula."""


class UncoveredRegion(RegimeError):
    """Exponents lie in a region for which no characterization is known."""


class ShapeError(HardyLorentzError):
    """Structural conditions on b or phi (doubling, monotonicity, Q_r) fail."""

    def __init__(self, message: str, failed: list[str] | None = None):
        self.failed = list(failed or [])
        super().__init__(message)


class DisagreementError(HardyLorentzError):
    """Two evaluation paths that must coincide disagree beyond tolerance."""
