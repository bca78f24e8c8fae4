"""Exception hierarchy shared by every fracopt module."""


class FracoptError(Exception):
    """Base class for all errors raised by fracopt."""


class ExprSyntaxError(FracoptError, ValueError):
    """Malformed expression text.

    ``offset`` is the 0-based character position where parsing failed.
    """

    def __init__(self, message, offset, text=""):
        self.message = message
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownVariable(FracoptError, ValueError):
    def __init__(self, name, offset=None):
        self.name = name
        self.offset = offset
        where = "" if offset is None else f" at offset {offset}"
        super().__init__(f"unknown variable {name!r}{where}")


class DomainError(FracoptError, ArithmeticError):
    """Evaluation left the real domain (log/sqrt of a negative, 0 divisor, NaN/Inf)."""


class EvaluationFailure(FracoptError):
    """An integrand could not be evaluated at some point."""


class DenominatorSignViolation(FracoptError):
    """A denominator value contradicts the declared sign of B or is numerically zero."""


class SignViolation(FracoptError):
    """The sampled sign check of B failed; carries the offending SignReport."""

    def __init__(self, report):
        self.report = report
        first = report.violations[0] if report.violations else None
        msg = f"B violates its declared sign at {len(report.violations)} of {report.samples_checked} samples"
        if first is not None:
            alpha, u, value = first
            msg += f"; e.g. alpha={list(alpha)}, u={list(u)}, B={value!r}"
        super().__init__(msg)


class IllPosedProblem(FracoptError):
    pass


class NotApplicable(FracoptError):
    pass


class OutOfDomain(FracoptError, ValueError):
    pass


class UnboundedSpace(FracoptError, ValueError):
    pass


class TooLarge(FracoptError, ValueError):
    pass


class InvalidCosts(FracoptError, ValueError):
    pass


class UnknownEntry(FracoptError, KeyError):
    def __str__(self):
        return f"unknown catalog entry {self.args[0]!r}"


class SchemaError(FracoptError, ValueError):
    """A problem or report file does not follow the documented schema."""
