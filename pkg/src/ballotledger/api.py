"""HTTP surface over the voting service.

Wire conventions: JSON bodies, integers as decimal strings, group elements
and hashes as lowercase hex. Mutating poll/document routes authenticate the
caller via a non-interactive proof bound to the request (method, path and
body digest), carried in the X-Caller-Id and X-Auth-Proof headers.
Registration routes are open: callers do not have an identity yet.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
from typing import Optional

from fastapi import Depends, FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import canon, errors, sigma
from .service import VotingService

_STATUS_BY_ERROR = {
    "BadOptions": 400, "BadChoice": 400, "BadGroupElement": 400,
    "EmptyDocument": 400, "UnknownVoter": 400, "ValueError": 400,
    "CanonError": 400,
    "Unauthenticated": 401,
    "NotCreator": 403, "UnverifiedCreator": 403, "NotRegistered": 403,
    "NotFound": 404, "UnknownIdentity": 404,
    "DuplicateRequest": 409, "SessionExists": 409, "SessionNotPending": 409,
    "NoCommitment": 409, "ChallengesAlreadyIssued": 409,
    "ChallengeMismatch": 409, "SessionNotReady": 409, "WrongState": 409,
    "PollNotOpen": 409, "AlreadyVoted": 409, "NoVoters": 409,
    "LedgerSealed": 409, "EmptyBuffer": 409, "ProofRejected": 409,
    "IntegrityError": 500, "LedgerCorrupt": 500,
}


def _error_response(name: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=_STATUS_BY_ERROR.get(name, 500),
                        content={"error": name, "detail": detail})


def auth_context_tag(method: str, path: str, body: bytes) -> bytes:
    return method.encode() + b"\n" + path.encode() + b"\n" + canon.digest(body)


def parse_proof_header(raw: str) -> sigma.NIProof:
    try:
        obj = json.loads(raw)
        return sigma.NIProof(commitments=[int(d, 16) for d in obj["d"]],
                             answers=[int(s) for s in obj["s"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise errors.Unauthenticated(f"malformed proof header: {exc}") from exc


def encode_proof_header(proof: sigma.NIProof) -> str:
    return json.dumps({"d": [format(d, "x") for d in proof.commitments],
                       "s": [str(s) for s in proof.answers]})


class RegisterRequestBody(BaseModel):
    userInfo: str
    deviceCredentials: str
    timestamp: Optional[str] = None


class UnvIdBody(BaseModel):
    requestId: str
    publicKey: str


class SessionBody(BaseModel):
    unvId: str


class CommitBody(BaseModel):
    sessionId: str
    commitments: list[str]


class RespondBody(BaseModel):
    sessionId: str
    answers: list[str]
    challenges: Optional[list[str]] = None  # echo of the answered challenges


class VerifyBody(BaseModel):
    sessionId: str
    answers: Optional[list[str]] = None


class NIVerifyBody(BaseModel):
    publicKey: str
    contextTag: str
    proof: dict


class CreatePollBody(BaseModel):
    name: str
    description: str = ""
    options: list[str]


class VotersBody(BaseModel):
    voters: list[str]


class VoteBody(BaseModel):
    choice: str


def create_app(service: VotingService) -> FastAPI:
    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        interval = service.config.seal_interval_s

        async def sealer():
            while True:
                await asyncio.sleep(interval / 4)
                service.ledger.seal_if_stale(interval)

        task = asyncio.create_task(sealer())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task
            service.close()

    app = FastAPI(title="ballotledger", lifespan=lifespan)

    # the web client is served as static assets from elsewhere; auth is
    # per-request proofs, not cookies, so permissive CORS is safe here
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(errors.BallotLedgerError)
    async def _domain_error(_req, exc: errors.BallotLedgerError):
        return _error_response(exc.name, str(exc))

    @app.exception_handler(ValueError)
    async def _value_error(_req, exc: ValueError):
        return _error_response(type(exc).__name__, str(exc))

    async def authenticated(request: Request) -> str:
        caller = request.headers.get("x-caller-id")
        proof_raw = request.headers.get("x-auth-proof")
        if not caller or not proof_raw:
            raise errors.Unauthenticated("missing X-Caller-Id or X-Auth-Proof header")
        body = await request.body()
        tag = auth_context_tag(request.method, request.url.path, body)
        return service.authenticate(caller, tag, parse_proof_header(proof_raw))

    # -- meta ------------------------------------------------------------

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.get("/params")
    async def params():
        g = service.group
        return {"group": g.name, "p": str(g.p), "q": str(g.q), "g": str(g.g),
                "rounds": str(service.config.rounds),
                "challengeBits": str(service.config.challenge_bits)}

    @app.get("/ledger/verify")
    async def ledger_verify():
        report = service.verify_ledger()
        out = {"ok": report.ok}
        if report.first_bad_height is not None:
            out["firstBadHeight"] = str(report.first_bad_height)
        if report.detail:
            out["detail"] = report.detail
        return out

    # -- registration ------------------------------------------------------

    @app.post("/register/request")
    async def register_request(body: RegisterRequestBody):
        ts = int(body.timestamp) if body.timestamp is not None else None
        record = service.send_request(bytes.fromhex(body.userInfo),
                                      bytes.fromhex(body.deviceCredentials), ts)
        return {"requestId": record.request_id, "tmpKey": record.tmp_key.hex()}

    @app.post("/register/unvid")
    async def register_unvid(body: UnvIdBody):
        unv_id = service.issue_unverified_id(body.requestId, int(body.publicKey, 16))
        return {"unvId": unv_id}

    @app.post("/register/session")
    async def register_session(body: SessionBody):
        session = service.begin_proof(body.unvId)
        return {"sessionId": session.session_id, "sigZkp": session.sig_zkp}

    @app.post("/register/commit")
    async def register_commit(body: CommitBody):
        session = service.add_commitments(body.sessionId,
                                          [int(d, 16) for d in body.commitments])
        return {"sessionId": session.session_id, "rounds": str(len(session.commitments))}

    @app.get("/register/challenge/{session_id}")
    async def register_challenge(session_id: str):
        challenges = service.issue_challenges(session_id)
        return {"challenges": [str(c) for c in challenges]}

    @app.post("/register/respond")
    async def register_respond(body: RespondBody):
        echo = ([int(c) for c in body.challenges]
                if body.challenges is not None else None)
        service.store_answers(body.sessionId, [int(s) for s in body.answers], echo)
        return {"sessionId": body.sessionId, "stored": True}

    @app.post("/register/verify")
    async def register_verify(body: VerifyBody):
        answers = [int(s) for s in body.answers] if body.answers is not None else None
        outcome = service.verify_and_issue(body.sessionId, answers)
        if not outcome.accepted:
            return _error_response("ProofRejected", "proof verification failed")
        return {"verdict": outcome.session.verdict,
                "permanentId": outcome.permanent_id,
                "reportHash": outcome.report_hash.hex()}

    @app.post("/register/ni-verify")
    async def register_ni_verify(body: NIVerifyBody):
        try:
            proof = sigma.NIProof(commitments=[int(d, 16) for d in body.proof["d"]],
                                  answers=[int(s) for s in body.proof["s"]])
        except (KeyError, TypeError, ValueError):
            return {"valid": False}
        valid = service.verify_noninteractive(int(body.publicKey, 16),
                                              bytes.fromhex(body.contextTag), proof)
        return {"valid": valid}

    # -- polls ----------------------------------------------------------------

    @app.post("/polls")
    async def create_poll(body: CreatePollBody, caller: str = Depends(authenticated)):
        poll = service.create_poll(caller, body.name, body.description, body.options)
        return {"pollId": poll.poll_id, "status": poll.status}

    @app.post("/polls/{poll_id}/voters")
    async def register_voters(poll_id: str, body: VotersBody,
                              caller: str = Depends(authenticated)):
        count = service.register_voters(poll_id, caller, body.voters)
        return {"pollId": poll_id, "registered": str(count)}

    @app.post("/polls/{poll_id}/set-open")
    async def set_open(poll_id: str, caller: str = Depends(authenticated)):
        service.set_open(poll_id, caller)
        return {"pollId": poll_id, "isOpenToAll": True}

    @app.post("/polls/{poll_id}/open")
    async def open_poll(poll_id: str, caller: str = Depends(authenticated)):
        service.open_poll(poll_id, caller)
        return {"pollId": poll_id, "status": "Open"}

    @app.post("/polls/{poll_id}/votes")
    async def cast_vote(poll_id: str, body: VoteBody,
                        caller: str = Depends(authenticated)):
        tx_id = service.cast_vote(poll_id, caller, int(body.choice))
        poll = service.get_poll(poll_id)
        return {"pollId": poll_id, "txId": str(tx_id), "status": poll.status}

    @app.post("/polls/{poll_id}/close")
    async def close_poll(poll_id: str, caller: str = Depends(authenticated)):
        result = service.close_poll(poll_id, caller)
        poll = service.get_poll(poll_id)
        return {"pollId": poll_id, "result": str(result),
                "option": poll.options[result]}

    @app.get("/polls/{poll_id}/results")
    async def poll_results(poll_id: str):
        result = service.get_results(poll_id)
        poll = service.get_poll(poll_id)
        if result is None:
            return {"pollId": poll_id, "status": poll.status, "result": None}
        index, option = result
        counts = poll.vote_counts()
        return {"pollId": poll_id, "status": poll.status,
                "result": {"index": str(index), "option": option},
                "counts": [str(c) for c in counts]}

    @app.get("/polls/{poll_id}")
    async def poll_detail(poll_id: str,
                          as_voter: Optional[str] = Query(None, alias="as")):
        poll = service.get_poll(poll_id)
        out = {
            "pollId": poll.poll_id,
            "name": poll.name,
            "description": poll.description,
            "options": list(poll.options),
            "creator": poll.creator,
            "status": poll.status,
            "isOpenToAll": poll.is_open_to_all,
            "registeredVoters": sorted(poll.registered_voters),
            "voteCount": str(len(poll.votes)),
            "counts": [str(c) for c in poll.vote_counts()],
            "result": None if poll.result is None else str(poll.result),
        }
        if as_voter is not None:
            eligible = service.registry.is_verified(as_voter) and (
                poll.is_open_to_all or as_voter in poll.registered_voters)
            out["eligible"] = eligible
            out["hasVoted"] = as_voter in poll.votes
        return out

    # -- documents ---------------------------------------------------------------

    @app.post("/documents")
    async def put_document(request: Request, caller: str = Depends(authenticated)):
        data = await request.body()
        doc_hash = service.put_document(data, caller)
        return {"hash": doc_hash.hex()}

    @app.get("/documents/{doc_hash}")
    async def get_document(doc_hash: str):
        data = service.get_document(bytes.fromhex(doc_hash))
        return Response(content=data, media_type="application/octet-stream")

    # -- costs ----------------------------------------------------------------------

    @app.get("/costs/{scope}")
    async def costs(scope: str):
        report = service.cost_report(scope)
        return {
            "scope": scope,
            "entries": [{"operation": e.operation, "gas": str(e.gas),
                         "txId": None if e.tx_id is None else str(e.tx_id)}
                        for e in report.entries],
            "total": str(report.total),
        }

    return app
