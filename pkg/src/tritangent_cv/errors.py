"""Exception types shared by the library and the command line."""


class TritangentError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(TritangentError):
    """A mathematically meaningful refusal (reducible locus, singular system, ...).

    ``kind`` is a short machine-readable tag; ``details`` carries any extra
    diagnostic values (e.g. a rank estimate) and is emitted verbatim by the CLI.
    """

    def __init__(self, kind, message=None, **details):
        self.kind = kind
        self.details = details
        super().__init__(message or kind)


class InputError(TritangentError):
    """Malformed user input (bad JSON, wrong shapes, unknown subcommand)."""

    kind = "malformed-input"
