class NltError(Exception):
    pass


class NltGridError(NltError):
    pass


class NltFieldError(NltError):
    pass


class NltParameterError(NltError):
    pass


class NltEmptyShellError(NltParameterError):
    def __init__(self, j: int):
        self.message = f"Dyadic shell {j} carries no energy so the ratio is undefined"

    def __str__(self):
        return self.message


class NltDegenerateError(NltError):
    pass


class NltOperatorError(NltError):
    pass


class NltResolutionError(NltError):
    def __init__(self, what: str = "field"):
        self.message = f"Non-finite values encountered in {what}"

    def __str__(self):
        return self.message


class NltInapplicableError(NltError):
    pass


class NltConfigError(NltError):
    def __init__(self, message):
        self.message = message

    def __str__(self):
        return self.message


class NltCheckpointError(NltError):
    def __init__(self, path, reason):
        self.message = f'Corrupt checkpoint "{path}": {reason}'

    def __str__(self):
        return self.message
