"""Exception hierarchy.

Everything raised on bad input derives from :class:`RelSeqError`; the CLI maps
these to exit code 2.
"""


class RelSeqError(Exception):
    pass


class ParseError(RelSeqError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class MalformedSequenceError(RelSeqError):
    pass


class EvaluationError(RelSeqError):
    pass


class VocabularyError(RelSeqError):
    pass


class FitError(RelSeqError):
    pass


class StratificationError(RelSeqError):
    pass
