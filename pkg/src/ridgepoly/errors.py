"""Exception types shared across the package."""


class GrowthExhaustedError(RuntimeError):
    """Adding a block was requested but the network already has the maximum
    number of blocks."""


class NumericDivergenceError(ArithmeticError):
    """Training or evaluation produced a non-finite or overflowing value.

    ``step_index`` is the 0-based position of the offending pattern within
    the sequence being processed; ``history`` carries the growth history
    accumulated up to the failure when the error escapes a full fit.
    """

    def __init__(self, message, step_index=None, history=None):
        super().__init__(message)
        self.step_index = step_index
        self.history = history


class DegenerateRangeError(ValueError):
    """Normalization bounds collapsed (observed max equals observed min)."""


class ConfigError(ValueError):
    """A config file is missing, malformed, or holds an out-of-range value.

    ``line_no`` is the 1-based line of the offending entry when known.
    """

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no
