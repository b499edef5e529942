"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for configuration problems, 3 for bad input data, 4 for failures inside
the numerical pipeline.
"""

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PIPELINE = 4


class CombalanceError(Exception):
    exit_code = EXIT_PIPELINE
    module = "combalance"

    def __str__(self):
        return f"{self.module}: {super().__str__()}"


# -- configuration ---------------------------------------------------------

class ConfigError(CombalanceError, ValueError):
    exit_code = EXIT_CONFIG
    module = "config"


# -- anthro ----------------------------------------------------------------

class DomainError(CombalanceError, ValueError):
    """A numeric argument lies outside the domain of a formula."""

    exit_code = EXIT_DATA
    module = "domain"

    def __init__(self, field, value, reason="must be positive and finite"):
        self.field = field
        self.value = value
        super().__init__(f"{field}={value!r} {reason}")


class ImplausibleBodyFatWarning(UserWarning):
    """Body-fat estimate outside the physiologically plausible band."""


# -- bsip ------------------------------------------------------------------

class SegmentTableError(CombalanceError, ValueError):
    exit_code = EXIT_DATA
    module = "bsip"


class SchemaError(SegmentTableError):
    pass


class SumError(SegmentTableError):
    def __init__(self, total):
        self.total = total
        super().__init__(f"segment mass fractions sum to {total!r}, expected 1 +/- 1e-9")


class UnknownJointError(SegmentTableError):
    def __init__(self, joint, where=""):
        self.joint = joint
        super().__init__(f"unknown joint name {joint!r}{where}")


class SegmentUnavailable(CombalanceError):
    module = "bsip"

    def __init__(self, segment, joint=None):
        self.segment = segment
        self.joint = joint
        msg = f"segment {segment!r} unavailable"
        if joint is not None:
            msg += f" (joint {joint!r} missing or not tracked)"
        super().__init__(msg)


class FrameUnusable(CombalanceError):
    module = "bsip"


# -- signal ----------------------------------------------------------------

class SignalError(CombalanceError):
    module = "signal"


class NoLoad(SignalError):
    exit_code = EXIT_DATA


class CalibrationError(SignalError):
    exit_code = EXIT_DATA


class InsufficientData(SignalError):
    pass


class DegenerateSignal(SignalError):
    pass


class AlignmentError(SignalError):
    pass


# -- correction ------------------------------------------------------------

class CorrectionError(CombalanceError):
    module = "correction"


class ProfileIncomplete(CorrectionError):
    exit_code = EXIT_DATA


class IllConditioned(CorrectionError):
    exit_code = EXIT_CONFIG

    def __init__(self, condition_number):
        self.condition_number = condition_number
        super().__init__(
            f"design matrix is rank deficient (condition number {condition_number:.3g}); "
            "add BFP levels or use a positive ridge"
        )


class InsufficientDiversity(CorrectionError):
    exit_code = EXIT_CONFIG


class ModelSchemaError(CorrectionError, ValueError):
    exit_code = EXIT_DATA


# -- io --------------------------------------------------------------------

class DataFileError(CombalanceError):
    exit_code = EXIT_DATA
    module = "io"

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class MalformedRow(DataFileError):
    pass


class NonMonotonicTime(DataFileError):
    pass


class UnknownJointName(DataFileError):
    pass


class ManifestError(DataFileError):
    pass
