"""Exception hierarchy. CLI exit codes key off these classes."""


class MlragError(Exception):
    exit_code = 2


class DataError(MlragError):
    """Malformed input data or a violated data invariant."""

    exit_code = 2


class ScopeError(DataError):
    """A retrieval scope resolved to no documents."""


class ProviderError(MlragError):
    """An external (or mock) provider call failed."""

    exit_code = 3

    def __init__(self, message: str, *, request_hash: str = "", status: int | None = None,
                 stage: str = ""):
        super().__init__(message)
        self.request_hash = request_hash
        self.status = status
        self.stage = stage


class OfflineError(ProviderError):
    """A network call was required while running offline."""
