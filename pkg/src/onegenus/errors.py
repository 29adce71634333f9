"""Exception types shared across modules."""


class CheckpointMismatch(RuntimeError):
    """Resume attempted against a checkpoint written by a different config."""


class InternalCheckError(RuntimeError):
    """A built-in cross check failed; indicates a bug, not bad input."""
