"""Error types raised by the service modules, one class per contract error."""

from __future__ import annotations


class BallotLedgerError(Exception):
    """Base class; `name` is the machine-readable error identifier."""

    @property
    def name(self) -> str:
        return type(self).__name__


class NotFound(BallotLedgerError):
    pass


# ledger
class LedgerSealed(BallotLedgerError):
    pass


class EmptyBuffer(BallotLedgerError):
    pass


class LedgerCorrupt(BallotLedgerError):
    pass


# identity
class DuplicateRequest(BallotLedgerError):
    pass


class BadGroupElement(BallotLedgerError):
    pass


class SessionExists(BallotLedgerError):
    pass


class SessionNotPending(BallotLedgerError):
    pass


class NoCommitment(BallotLedgerError):
    pass


class ChallengesAlreadyIssued(BallotLedgerError):
    pass


class ChallengeMismatch(BallotLedgerError):
    pass


class SessionNotReady(BallotLedgerError):
    pass


# poll engine
class UnverifiedCreator(BallotLedgerError):
    pass


class BadOptions(BallotLedgerError):
    pass


class NotCreator(BallotLedgerError):
    pass


class WrongState(BallotLedgerError):
    pass


class UnknownVoter(BallotLedgerError):
    pass


class NoVoters(BallotLedgerError):
    pass


class PollNotOpen(BallotLedgerError):
    pass


class NotRegistered(BallotLedgerError):
    pass


class AlreadyVoted(BallotLedgerError):
    pass


class BadChoice(BallotLedgerError):
    pass


# docstore
class EmptyDocument(BallotLedgerError):
    pass


class IntegrityError(BallotLedgerError):
    pass


# costmeter
class UnknownOperation(BallotLedgerError):
    pass


# api-service
class ConfigError(BallotLedgerError):
    pass


class Unauthenticated(BallotLedgerError):
    pass


class UnknownIdentity(BallotLedgerError):
    pass
