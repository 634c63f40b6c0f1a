"""Registration and verification of identities.

A user's journey: registration request (temporary key) -> unverified id ->
interactive proof of knowledge of their secret key -> permanent id. The
registry holds the verifier-side state: identity records, indexed by each
stage's identifier, and the in-flight proof sessions. Sessions are
ephemeral; only the completed stages are recorded on the ledger.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from random import Random
from typing import Optional, Sequence

from . import canon, sigma
from .errors import (
    ChallengeMismatch,
    ChallengesAlreadyIssued,
    DuplicateRequest,
    NoCommitment,
    NotFound,
    SessionExists,
    SessionNotPending,
    SessionNotReady,
)
from .groups import GroupParams

STATUS_REQUESTED = "Requested"
STATUS_UNVERIFIED = "Unverified"
STATUS_VERIFIED = "Verified"

VERDICT_PENDING = "Pending"
VERDICT_ACCEPTED = "Accepted"
VERDICT_REJECTED = "Rejected"


@dataclass
class IdentityRecord:
    request_id: str
    tmp_key: bytes
    status: str = STATUS_REQUESTED
    unv_id: Optional[str] = None
    permanent_id: Optional[str] = None
    public_key: Optional[int] = None
    report_hash: Optional[bytes] = None


@dataclass
class ProofSession:
    session_id: str
    unv_id: str
    sig_zkp: bool = True
    commitments: list[int] = field(default_factory=list)
    challenges: list[int] = field(default_factory=list)
    answers: list[int] = field(default_factory=list)
    verdict: str = VERDICT_PENDING


@dataclass(frozen=True)
class VerificationOutcome:
    accepted: bool
    record: IdentityRecord
    session: ProofSession
    report: Optional[bytes] = None
    permanent_id: Optional[str] = None
    report_hash: Optional[bytes] = None


def derive_tmp_key(device_credentials: bytes, timestamp: int, nonce: bytes) -> bytes:
    return canon.digest(canon.encode([device_credentials, timestamp, nonce]))


def derive_unv_id(tmp_key: bytes, public_key: int) -> str:
    return canon.digest(canon.encode([tmp_key, public_key]))[:16].hex()


def transcript_report(session: ProofSession, public_key: int, group: GroupParams,
                      verdict: str) -> bytes:
    """Canonical verification report: the full transcript plus the verdict."""
    return canon.encode({
        "answers": list(session.answers),
        "challenges": list(session.challenges),
        "commitments": list(session.commitments),
        "group": {"g": group.g, "p": group.p, "q": group.q},
        "publicKey": public_key,
        "sessionId": session.session_id,
        "sigZkp": session.sig_zkp,
        "unvId": session.unv_id,
        "verdict": verdict,
    })


def derive_permanent_id(unv_id: str, report: bytes) -> str:
    return canon.digest(canon.encode([unv_id, report]))[:16].hex()


class IdentityRegistry:
    """Verifier-side registry: records, dedupe of pending requests, sessions."""

    def __init__(self, group: GroupParams, *, rounds: int = sigma.DEFAULT_ROUNDS,
                 challenge_bits: int = sigma.DEFAULT_CHALLENGE_BITS,
                 rng: Optional[Random] = None):
        if rounds < 1:
            raise ValueError("rounds must be >= 1")
        self.group = group
        self.rounds = rounds
        self.challenge_bits = challenge_bits
        self._rng = rng
        self.records: dict[str, IdentityRecord] = {}
        self.by_unv_id: dict[str, str] = {}
        self.by_permanent_id: dict[str, str] = {}
        self.pending_requests: dict[bytes, str] = {}  # dedupe digest -> requestId
        self.sessions: dict[str, ProofSession] = {}
        self.active_session: dict[str, str] = {}  # unvId -> pending sessionId
        self._next_request = 0
        self._next_session = 0

    # -- registration ------------------------------------------------------

    @staticmethod
    def request_dedupe_key(user_info: bytes, device_credentials: bytes) -> bytes:
        return canon.digest(canon.encode([user_info, device_credentials]))

    def send_request(self, user_info: bytes, device_credentials: bytes,
                     timestamp: int) -> tuple[IdentityRecord, bytes]:
        if not user_info:
            raise ValueError("userInfo must be non-empty")
        dedupe = self.request_dedupe_key(user_info, device_credentials)
        if dedupe in self.pending_requests:
            raise DuplicateRequest("an identical request is already pending")
        nonce = (self._rng.randbytes(16) if self._rng is not None else secrets.token_bytes(16))
        record = IdentityRecord(
            request_id=f"req-{self._next_request}",
            tmp_key=derive_tmp_key(device_credentials, timestamp, nonce),
        )
        self._next_request += 1
        self.records[record.request_id] = record
        self.pending_requests[dedupe] = record.request_id
        return record, dedupe

    def issue_unverified_id(self, request_id: str, public_key: int) -> IdentityRecord:
        record = self.records.get(request_id)
        if record is None or record.status != STATUS_REQUESTED:
            raise NotFound(f"no Requested record {request_id!r}")
        self.group.require_public_key(public_key)
        record.public_key = public_key
        record.unv_id = derive_unv_id(record.tmp_key, public_key)
        record.status = STATUS_UNVERIFIED
        self.by_unv_id[record.unv_id] = record.request_id
        self.pending_requests = {k: v for k, v in self.pending_requests.items()
                                 if v != request_id}
        return record

    # -- interactive proof sessions -----------------------------------------

    def _record_by_unv_id(self, unv_id: str) -> IdentityRecord:
        request_id = self.by_unv_id.get(unv_id)
        record = self.records.get(request_id) if request_id else None
        if record is None or record.status != STATUS_UNVERIFIED:
            raise NotFound(f"no Unverified record for {unv_id!r}")
        return record

    def begin_proof(self, unv_id: str) -> ProofSession:
        self._record_by_unv_id(unv_id)
        if unv_id in self.active_session:
            raise SessionExists(f"a proof session is already pending for {unv_id!r}")
        session = ProofSession(session_id=f"sess-{self._next_session}", unv_id=unv_id)
        self._next_session += 1
        self.sessions[session.session_id] = session
        self.active_session[unv_id] = session.session_id
        return session

    def get_session(self, session_id: str) -> ProofSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise NotFound(f"no session {session_id!r}")
        return session

    def add_commitments(self, session_id: str, commitments: Sequence[int]) -> ProofSession:
        session = self.get_session(session_id)
        if session.verdict != VERDICT_PENDING or session.commitments:
            raise SessionNotPending("session already has commitments")
        if len(commitments) != self.rounds:
            raise SessionNotPending(f"expected {self.rounds} commitments")
        if not all(0 < d < self.group.p for d in commitments):
            raise SessionNotPending("commitment outside the group range")
        session.commitments = list(commitments)
        return session

    def issue_challenges(self, session_id: str) -> list[int]:
        session = self.get_session(session_id)
        if not session.commitments:
            raise NoCommitment("commitments must arrive before challenges")
        if session.challenges:
            raise ChallengesAlreadyIssued("one commitment list gets exactly one challenge list")
        session.challenges = [sigma.random_challenge(self.challenge_bits, self._rng)
                              for _ in range(self.rounds)]
        return list(session.challenges)

    def store_answers(self, session_id: str, answers: Sequence[int],
                      challenges: Optional[Sequence[int]] = None) -> ProofSession:
        """Record the prover's answers. When the prover echoes the challenge
        list it answered, a mismatch against the issued list is rejected
        (detects tampering on the challenge leg)."""
        session = self.get_session(session_id)
        if session.verdict != VERDICT_PENDING or not session.challenges:
            raise SessionNotReady("session is not awaiting answers")
        if challenges is not None and list(challenges) != session.challenges:
            raise ChallengeMismatch("answered challenges differ from the issued ones")
        session.answers = list(answers)
        return session

    def complete_verification(self, session_id: str,
                              answers: Optional[Sequence[int]] = None) -> VerificationOutcome:
        """Check every round's equation; on success mint the permanent id and
        build the verification report. The caller persists the report and
        records the ledger transactions."""
        session = self.get_session(session_id)
        if session.verdict != VERDICT_PENDING:
            raise SessionNotReady(f"session verdict already {session.verdict}")
        if not session.commitments or not session.challenges:
            raise SessionNotReady("session is missing commitments or challenges")
        if answers is not None:
            session.answers = list(answers)
        if len(session.answers) != self.rounds:
            raise SessionNotReady("answer count does not match round count")
        record = self._record_by_unv_id(session.unv_id)
        ok = sigma.verify_transcript(self.group, record.public_key, session.commitments,
                                     session.challenges, session.answers)
        self.active_session.pop(session.unv_id, None)
        if not ok:
            session.verdict = VERDICT_REJECTED
            return VerificationOutcome(accepted=False, record=record, session=session)
        session.verdict = VERDICT_ACCEPTED
        report = transcript_report(session, record.public_key, self.group, VERDICT_ACCEPTED)
        permanent_id = derive_permanent_id(record.unv_id, report)
        record.permanent_id = permanent_id
        record.report_hash = canon.digest(report)
        record.status = STATUS_VERIFIED
        self.by_permanent_id[permanent_id] = record.request_id
        return VerificationOutcome(accepted=True, record=record, session=session,
                                   report=report, permanent_id=permanent_id,
                                   report_hash=record.report_hash)

    # -- lookups -------------------------------------------------------------

    def is_verified(self, permanent_id: str) -> bool:
        return permanent_id in self.by_permanent_id

    def record_by_permanent_id(self, permanent_id: str) -> IdentityRecord:
        request_id = self.by_permanent_id.get(permanent_id)
        if request_id is None:
            raise NotFound(f"no verified identity {permanent_id!r}")
        return self.records[request_id]

    def get_record(self, request_id: str) -> IdentityRecord:
        record = self.records.get(request_id)
        if record is None:
            raise NotFound(f"no record {request_id!r}")
        return record

    def verified_ids(self) -> list[str]:
        return sorted(self.by_permanent_id)

    # -- replay (mutations driven from recorded transactions) ----------------

    def apply_register_request(self, request_id: str, tmp_key: bytes, dedupe: bytes) -> None:
        self.records[request_id] = IdentityRecord(request_id=request_id, tmp_key=tmp_key)
        self.pending_requests[dedupe] = request_id
        self._next_request += 1

    def apply_issue_unv_id(self, request_id: str, unv_id: str, public_key: int) -> None:
        record = self.records[request_id]
        record.public_key = public_key
        record.unv_id = unv_id
        record.status = STATUS_UNVERIFIED
        self.by_unv_id[unv_id] = request_id
        self.pending_requests = {k: v for k, v in self.pending_requests.items()
                                 if v != request_id}

    def apply_proof_verified(self, unv_id: str, report_hash: bytes) -> None:
        self.records[self.by_unv_id[unv_id]].report_hash = report_hash

    def apply_issue_id(self, unv_id: str, permanent_id: str) -> None:
        request_id = self.by_unv_id[unv_id]
        record = self.records[request_id]
        record.permanent_id = permanent_id
        record.status = STATUS_VERIFIED
        self.by_permanent_id[permanent_id] = request_id

    # -- state snapshot -------------------------------------------------------

    def snapshot(self) -> dict:
        """Canonical-encodable view of the replayed state (sessions excluded:
        they are ephemeral and never recorded)."""
        return {
            "nextRequest": self._next_request,
            "pendingRequests": {k.hex(): v for k, v in sorted(self.pending_requests.items())},
            "records": {
                rid: {
                    "permanentId": r.permanent_id,
                    "publicKey": r.public_key,
                    "reportHash": r.report_hash,
                    "status": r.status,
                    "tmpKey": r.tmp_key,
                    "unvId": r.unv_id,
                }
                for rid, r in sorted(self.records.items())
            },
        }
