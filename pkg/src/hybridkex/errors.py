"""Exception hierarchy shared by every hybridkex module."""

from __future__ import annotations


class HybridKexError(Exception):
    """Base class for all errors raised by this package."""


class UnknownSuiteError(HybridKexError, LookupError):
    """A suite label or wire id is not in the registry."""


class PrimitiveError(HybridKexError):
    """A cryptographic provider failed.

    ``primitive`` names the failing algorithm so callers can tell which half
    of a hybrid operation broke.
    """

    def __init__(self, primitive: str, message: str) -> None:
        super().__init__(f"{primitive}: {message}")
        self.primitive = primitive


class KeygenError(PrimitiveError):
    pass


class EncapsulationError(PrimitiveError):
    pass


class DecodeError(HybridKexError, ValueError):
    """Input bytes have the wrong length or framing."""


class SignatureFormatError(DecodeError):
    """A dual signature could not be split into its components."""


class QkdError(HybridKexError):
    """Base class for key-delivery failures."""


class QkdNetworkError(QkdError):
    """The KME could not be reached."""


class QkdProtocolError(QkdError):
    """The KME answered with a non-2xx status."""

    def __init__(self, status: int, message: str) -> None:
        super().__init__(f"KME returned {status}: {message}")
        self.status = status
        self.message = message


class HandshakeError(HybridKexError):
    """Base class for handshake aborts."""


class MalformedMessageError(HandshakeError, DecodeError):
    pass


class AuthenticationError(HandshakeError):
    """A peer's dual signature did not verify against the pinned keys."""


class KeyConfirmationError(HandshakeError):
    """The peer's confirmation MAC did not match."""


class RecordAuthError(HybridKexError):
    """An AEAD record failed authentication or arrived out of order."""


class SessionExpiredError(HybridKexError):
    """The record sequence space is exhausted."""


class BenchError(HybridKexError):
    pass
