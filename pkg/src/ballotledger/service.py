"""The orchestrator: wires identity, polls, ledger, docstore and costmeter.

Every state-changing operation validates first, then mutates, then appends
its transaction(s) and records its charge — all under one lock — so a
failed call never touches the ledger and a successful one is durable before
the caller sees the result. Restart replays the ledger into fresh module
state, which reproduces the pre-crash state byte for byte.
"""

from __future__ import annotations

import os
import threading
import time
from typing import Optional, Sequence

from . import canon, sigma
from .config import ServiceConfig
from .costmeter import CostMeter, CostReport, CostSchedule
from .docstore import FileDocStore, MemoryDocStore
from .errors import NotFound
from .groups import load_group
from .identity import IdentityRegistry, ProofSession, VerificationOutcome
from .ledger import Ledger, VerificationReport
from .polls import Poll, PollBook


def now_ms() -> int:
    return int(time.time() * 1000)


class VotingService:
    def __init__(self, config: Optional[ServiceConfig] = None, *, clock=now_ms):
        self.config = config or ServiceConfig()
        self.clock = clock
        self.group = load_group(self.config.group)
        schedule = (CostSchedule.load(self.config.schedule_path)
                    if self.config.schedule_path else CostSchedule.default())
        self.costs = CostMeter(schedule)
        data_dir = self.config.data_dir
        if data_dir is None:
            self.docstore = MemoryDocStore()
            self.ledger = Ledger(None, seal_max_txs=self.config.seal_max_txs)
        else:
            os.makedirs(data_dir, exist_ok=True)
            self.docstore = FileDocStore(os.path.join(data_dir, "documents"))
            self.ledger = Ledger(os.path.join(data_dir, "ledger.dat"),
                                 seal_max_txs=self.config.seal_max_txs)
        self.registry = IdentityRegistry(self.group, rounds=self.config.rounds,
                                         challenge_bits=self.config.challenge_bits)
        self.polls = PollBook(is_verified=self.registry.is_verified)
        self._lock = threading.RLock()
        self._replay_all()

    def close(self) -> None:
        self.ledger.close()

    # -- identity ---------------------------------------------------------------

    def send_request(self, user_info: bytes, device_credentials: bytes,
                     timestamp: Optional[int] = None):
        with self._lock:
            self.ledger.ensure_writable()
            ts = self.clock() if timestamp is None else timestamp
            record, dedupe = self.registry.send_request(user_info, device_credentials, ts)
            tx_id = self.ledger.append(
                "RegisterRequest", record.request_id,
                {"dedupe": dedupe, "requestId": record.request_id, "tmpKey": record.tmp_key},
                ts)
            self.costs.charge("sendReq", record.request_id, tx_id)
            return record

    def issue_unverified_id(self, request_id: str, public_key: int) -> str:
        with self._lock:
            self.ledger.ensure_writable()
            record = self.registry.issue_unverified_id(request_id, public_key)
            tx_id = self.ledger.append(
                "IssueUnvId", record.unv_id,
                {"publicKey": public_key, "requestId": request_id, "unvId": record.unv_id},
                self.clock())
            self.costs.charge("genKey", request_id, tx_id)
            return record.unv_id

    def begin_proof(self, unv_id: str) -> ProofSession:
        with self._lock:
            return self.registry.begin_proof(unv_id)

    def add_commitments(self, session_id: str, commitments: Sequence[int]) -> ProofSession:
        with self._lock:
            return self.registry.add_commitments(session_id, commitments)

    def issue_challenges(self, session_id: str) -> list[int]:
        with self._lock:
            challenges = self.registry.issue_challenges(session_id)
            session = self.registry.get_session(session_id)
            record = self.registry.get_record(self.registry.by_unv_id[session.unv_id])
            self.costs.charge("genChng", record.request_id, None)
            return challenges

    def store_answers(self, session_id: str, answers: Sequence[int],
                      challenges: Optional[Sequence[int]] = None) -> ProofSession:
        with self._lock:
            return self.registry.store_answers(session_id, answers, challenges)

    def verify_and_issue(self, session_id: str,
                         answers: Optional[Sequence[int]] = None) -> VerificationOutcome:
        with self._lock:
            self.ledger.ensure_writable()
            outcome = self.registry.complete_verification(session_id, answers)
            if not outcome.accepted:
                return outcome
            record = outcome.record
            request_id = record.request_id
            self.docstore.put(outcome.report)
            ts = self.clock()
            self.ledger.append(
                "StoreDocument", record.unv_id,
                {"contentHash": outcome.report_hash, "size": len(outcome.report)}, ts)
            verified_tx = self.ledger.append(
                "ProofVerified", record.unv_id,
                {"reportHash": outcome.report_hash, "unvId": record.unv_id}, ts)
            issue_tx = self.ledger.append(
                "IssueId", record.unv_id,
                {"permanentId": outcome.permanent_id, "unvId": record.unv_id}, ts)
            self.costs.charge("verifyProof", request_id, verified_tx)
            self.costs.charge("regUser", request_id, issue_tx)
            return outcome

    def verify_noninteractive(self, public_key: int, context_tag: bytes,
                              proof: sigma.NIProof) -> bool:
        return sigma.verify_noninteractive(self.group, public_key, context_tag, proof,
                                           self.config.challenge_bits)

    def authenticate(self, permanent_id: str, context_tag: bytes,
                     proof: sigma.NIProof) -> str:
        """Resolve a caller: the proof must verify against the registered key."""
        from .errors import Unauthenticated, UnknownIdentity

        if not self.registry.is_verified(permanent_id):
            raise UnknownIdentity(f"no verified identity {permanent_id!r}")
        record = self.registry.record_by_permanent_id(permanent_id)
        if not self.verify_noninteractive(record.public_key, context_tag, proof):
            raise Unauthenticated("proof does not verify for this identity and request")
        return permanent_id

    # -- polls --------------------------------------------------------------------

    def create_poll(self, creator: str, name: str, description: str,
                    options: Sequence[str]) -> Poll:
        with self._lock:
            self.ledger.ensure_writable()
            poll = self.polls.create_poll(creator, name, description, options)
            tx_id = self.ledger.append(
                "CreatePoll", creator,
                {"creator": creator, "description": description, "name": name,
                 "options": list(options), "pollId": poll.poll_id},
                self.clock())
            self.costs.charge("createPoll", poll.poll_id, tx_id)
            return poll

    def register_voters(self, poll_id: str, caller: str, voters: Sequence[str]) -> int:
        with self._lock:
            self.ledger.ensure_writable()
            count = self.polls.register_voters(poll_id, caller, voters)
            tx_id = self.ledger.append(
                "RegisterVoters", caller,
                {"pollId": poll_id, "voters": list(voters)}, self.clock())
            self.costs.charge("registerVoters", poll_id, tx_id)
            return count

    def set_open(self, poll_id: str, caller: str) -> None:
        with self._lock:
            self.ledger.ensure_writable()
            self.polls.set_open(poll_id, caller)
            tx_id = self.ledger.append("SetOpen", caller, {"pollId": poll_id}, self.clock())
            self.costs.charge("setOpen", poll_id, tx_id)

    def open_poll(self, poll_id: str, caller: str) -> None:
        with self._lock:
            self.ledger.ensure_writable()
            self.polls.open_poll(poll_id, caller)
            tx_id = self.ledger.append("OpenPoll", caller, {"pollId": poll_id}, self.clock())
            self.costs.charge("OpenPoll", poll_id, tx_id)

    def cast_vote(self, poll_id: str, voter: str, choice: int) -> int:
        """Record the ballot; auto-closes a closed-electorate poll when this
        was the last registered voter. Returns the CastVote txId (the
        voter's receipt)."""
        with self._lock:
            self.ledger.ensure_writable()
            exhausted = self.polls.cast_vote(poll_id, voter, choice)
            ts = self.clock()
            tx_id = self.ledger.append(
                "CastVote", voter,
                {"choice": choice, "pollId": poll_id, "voter": voter}, ts)
            self.costs.charge("castVotes", poll_id, tx_id)
            if exhausted:
                self._close(poll_id, voter, auto=True, timestamp=ts)
            return tx_id

    def close_poll(self, poll_id: str, caller: str) -> int:
        with self._lock:
            self.ledger.ensure_writable()
            return self._close(poll_id, caller, auto=False, timestamp=self.clock())

    def _close(self, poll_id: str, actor: str, *, auto: bool, timestamp: int) -> int:
        if auto:
            result = self.polls.auto_close(poll_id)
        else:
            result = self.polls.close_poll(poll_id, actor)
        close_tx = self.ledger.append(
            "ClosePoll", actor, {"auto": auto, "pollId": poll_id}, timestamp)
        self.ledger.append(
            "PublishResult", actor, {"pollId": poll_id, "result": result}, timestamp)
        self.costs.charge("closePoll", poll_id, close_tx)
        return result

    def get_poll(self, poll_id: str) -> Poll:
        return self.polls.get(poll_id)

    def get_results(self, poll_id: str) -> Optional[tuple[int, str]]:
        with self._lock:
            result = self.polls.get_results(poll_id)
            self.costs.charge("getPollRes", poll_id, None)
            return result

    # -- documents -------------------------------------------------------------------

    def put_document(self, data: bytes, actor: str) -> bytes:
        with self._lock:
            self.ledger.ensure_writable()
            doc_hash = self.docstore.put(data)
            self.ledger.append(
                "StoreDocument", actor,
                {"contentHash": doc_hash, "size": len(data)}, self.clock())
            return doc_hash

    def get_document(self, doc_hash: bytes) -> bytes:
        return self.docstore.get(doc_hash)

    # -- reports and state ---------------------------------------------------------

    def cost_report(self, scope: str) -> CostReport:
        """Charges for a requestId or pollId scope; session, unverified and
        permanent ids resolve to the owning registration's requestId."""
        return self.costs.report(self._resolve_scope(scope))

    def _resolve_scope(self, scope: str) -> str:
        if scope in self.registry.records or scope in self.polls.polls:
            return scope
        session = self.registry.sessions.get(scope)
        if session is not None:
            return self.registry.by_unv_id[session.unv_id]
        if scope in self.registry.by_unv_id:
            return self.registry.by_unv_id[scope]
        if scope in self.registry.by_permanent_id:
            return self.registry.by_permanent_id[scope]
        raise NotFound(f"unknown scope {scope!r}")

    def verify_ledger(self) -> VerificationReport:
        return self.ledger.verify_chain()

    def snapshot(self) -> bytes:
        """Canonical bytes of all replayed module state."""
        return canon.encode({
            "identity": self.registry.snapshot(),
            "polls": self.polls.snapshot(),
        })

    def state_digest(self) -> str:
        return canon.digest(self.snapshot()).hex()

    # -- replay ----------------------------------------------------------------------

    def _replay_all(self) -> None:
        for tx in self.ledger.all_transactions():
            self._apply(tx.kind, tx.args)

    def _apply(self, kind: str, args) -> None:
        if kind == "RegisterRequest":
            self.registry.apply_register_request(args["requestId"], args["tmpKey"],
                                                 args["dedupe"])
        elif kind == "IssueUnvId":
            self.registry.apply_issue_unv_id(args["requestId"], args["unvId"],
                                             args["publicKey"])
        elif kind == "ProofVerified":
            self.registry.apply_proof_verified(args["unvId"], args["reportHash"])
        elif kind == "IssueId":
            self.registry.apply_issue_id(args["unvId"], args["permanentId"])
        elif kind == "CreatePoll":
            self.polls.apply_create(args["pollId"], args["creator"], args["name"],
                                    args["description"], args["options"])
        elif kind == "RegisterVoters":
            self.polls.apply_register(args["pollId"], args["voters"])
        elif kind == "SetOpen":
            self.polls.apply_set_open(args["pollId"])
        elif kind == "OpenPoll":
            self.polls.apply_open(args["pollId"])
        elif kind == "CastVote":
            self.polls.apply_vote(args["pollId"], args["voter"], args["choice"])
        elif kind == "ClosePoll":
            self.polls.apply_close(args["pollId"])
        elif kind == "PublishResult":
            self.polls.apply_result(args["pollId"], args["result"])
        elif kind == "StoreDocument":
            pass  # document bytes live in the docstore; nothing to rebuild
        else:
            raise NotFound(f"cannot replay transaction kind {kind!r}")
