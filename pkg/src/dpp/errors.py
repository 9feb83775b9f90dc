"""Exception hierarchy shared by every module."""

from __future__ import annotations


class DPPError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(DPPError, ValueError):
    """An argument lies outside its mathematical domain."""


class ContractError(DPPError, ValueError):
    """A precondition of an operation does not hold."""


class PolicyUndefinedError(ContractError):
    """A policy was queried at a history it does not cover."""

    def __init__(self, history):
        self.history = history
        super().__init__(f"policy is undefined at history {'|'.join(history)!r}")


class RelationNotTotalError(DPPError):
    """The preference oracle failed to rank a pair it was asked about.

    ``pair`` holds the two distributions involved; ``reason`` is either
    ``"incomparable"`` or ``"intransitive"``.
    """

    def __init__(self, pair, reason: str = "incomparable", context=None):
        self.pair = pair
        self.reason = reason
        self.context = context
        super().__init__(f"relation is not total on the compared set ({reason})")


class LimitExceededError(DPPError):
    """An enumeration would exceed the configured size limit."""

    def __init__(self, count: int, limit: int, what: str = "decision histories"):
        self.count = count
        self.limit = limit
        super().__init__(f"{count} {what} exceeds the limit of {limit}")


class InputError(DPPError, ValueError):
    """A definition file is malformed; ``pointer`` is a JSON pointer to the offending field."""

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(f"{message} (at {pointer or '/'})")
        self.message = message
