"""Exception type shared by every module of the sieve."""


class SieveError(ValueError):
    """A rejected input or failed operation, tagged with a stable ``code``.

    Codes in use: L_OUT_OF_RANGE, N_OUT_OF_RANGE, F_ZERO_OR_OVERLAP, OVERFLOW,
    INDEX_OUT_OF_RANGE, NOT_ADMISSIBLE, ALLOC_LIMIT, IO_ERROR,
    LIMIT_TOO_LARGE, RANGE_TOO_LARGE.
    """

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
