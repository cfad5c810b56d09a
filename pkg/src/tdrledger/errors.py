"""Shared error type carrying a stable machine-readable code.

Every precondition failure in the registry surfaces as a RegistryError with
one of the documented codes (NotAdmin, NonceGap, InsufficientFar, ...).
The REST layer maps codes onto HTTP statuses; the CLI prints them on stderr.
"""


class RegistryError(Exception):
    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code

    def __repr__(self):
        return f"RegistryError({self.code!r}, {str(self)!r})"


def err(code: str, message: str = "") -> RegistryError:
    return RegistryError(code, message)
