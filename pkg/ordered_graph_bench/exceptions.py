class GraphBenchError(Exception):
    pass


class GraphFormatError(GraphBenchError):
    """
    Malformed graph or coordinate file
    """

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = "line {}: {}".format(line_number, message)
        super(GraphFormatError, self).__init__(message)
        self.line_number = line_number


class DomainError(GraphBenchError, ValueError):
    pass


class ConfigurationError(GraphBenchError):
    pass


class ScheduleError(ConfigurationError):

    def __init__(self, diagnostics):
        super(ScheduleError, self).__init__("invalid schedule: " + "; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


class VerificationError(GraphBenchError):
    pass


class TuneError(GraphBenchError):
    pass


class TimeLimitExceeded(GraphBenchError):
    """
    A run went past its time limit and was abandoned
    """

    def __init__(self, limit_ms, rounds):
        super(TimeLimitExceeded, self).__init__("time limit of {:.0f} ms exceeded after {} rounds".format(
            limit_ms, rounds))
        self.limit_ms = limit_ms
        self.rounds = rounds
