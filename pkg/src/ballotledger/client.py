"""Synchronous HTTP client for the service API.

Knows the wire conventions (decimal-string integers, hex group elements)
and how to authenticate mutating calls: a fresh non-interactive proof bound
to the method, path and body digest of each request.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import httpx

from . import sigma
from .api import auth_context_tag, encode_proof_header
from .groups import GroupParams


class ApiError(Exception):
    def __init__(self, status: int, name: str, detail: str = ""):
        super().__init__(f"{name}: {detail}" if detail else name)
        self.status = status
        self.name = name
        self.detail = detail


@dataclass
class Identity:
    """Client-side identity: the secret never leaves this process."""
    name: str
    secret_key: int
    public_key: int
    request_id: Optional[str] = None
    unv_id: Optional[str] = None
    permanent_id: Optional[str] = None


def raise_for_error(resp: httpx.Response) -> dict:
    if resp.status_code >= 400:
        try:
            body = resp.json()
            raise ApiError(resp.status_code, body.get("error", "HTTPError"),
                           body.get("detail", ""))
        except (json.JSONDecodeError, AttributeError):
            raise ApiError(resp.status_code, "HTTPError", resp.text[:200]) from None
    return resp.json()


class ApiClient:
    def __init__(self, base_url: str = "", transport: Optional[httpx.BaseTransport] = None,
                 timeout: float = 30.0, http: Optional[httpx.Client] = None):
        self._http = http or httpx.Client(base_url=base_url, transport=transport,
                                          timeout=timeout)
        self._params: Optional[dict] = None

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- plumbing ---------------------------------------------------------

    def _get(self, path: str) -> dict:
        return raise_for_error(self._http.get(path))

    def _post(self, path: str, body: Optional[dict] = None) -> dict:
        return raise_for_error(self._http.post(path, json=body or {}))

    def _post_authed(self, path: str, identity: Identity,
                     body: Optional[dict] = None, raw: Optional[bytes] = None) -> dict:
        if raw is None:
            raw = json.dumps(body or {}).encode()
            content_type = "application/json"
        else:
            content_type = "application/octet-stream"
        tag = auth_context_tag("POST", path, raw)
        prover = sigma.Prover(self.group, identity.secret_key)
        proof = prover.prove_noninteractive(tag, self.rounds, self.challenge_bits)
        headers = {
            "X-Caller-Id": identity.permanent_id,
            "X-Auth-Proof": encode_proof_header(proof),
            "Content-Type": content_type,
        }
        return raise_for_error(self._http.post(path, content=raw, headers=headers))

    # -- params -------------------------------------------------------------

    def params(self) -> dict:
        if self._params is None:
            self._params = self._get("/params")
        return self._params

    @property
    def group(self) -> GroupParams:
        p = self.params()
        return GroupParams(name=p["group"], p=int(p["p"]), q=int(p["q"]), g=int(p["g"]))

    @property
    def rounds(self) -> int:
        return int(self.params()["rounds"])

    @property
    def challenge_bits(self) -> int:
        return int(self.params()["challengeBits"])

    def health(self) -> dict:
        return self._get("/health")

    # -- registration ----------------------------------------------------------

    def register_request(self, user_info: bytes, device: bytes,
                         timestamp: Optional[int] = None) -> dict:
        body = {"userInfo": user_info.hex(), "deviceCredentials": device.hex()}
        if timestamp is not None:
            body["timestamp"] = str(timestamp)
        return self._post("/register/request", body)

    def issue_unvid(self, request_id: str, public_key: int) -> str:
        return self._post("/register/unvid", {
            "requestId": request_id, "publicKey": format(public_key, "x")})["unvId"]

    def begin_session(self, unv_id: str) -> str:
        return self._post("/register/session", {"unvId": unv_id})["sessionId"]

    def send_commitments(self, session_id: str, commitments: Sequence[int]) -> dict:
        return self._post("/register/commit", {
            "sessionId": session_id,
            "commitments": [format(d, "x") for d in commitments]})

    def get_challenges(self, session_id: str) -> list[int]:
        out = self._get(f"/register/challenge/{session_id}")
        return [int(c) for c in out["challenges"]]

    def send_answers(self, session_id: str, answers: Sequence[int],
                     challenges: Optional[Sequence[int]] = None) -> dict:
        body = {"sessionId": session_id, "answers": [str(s) for s in answers]}
        if challenges is not None:
            body["challenges"] = [str(c) for c in challenges]
        return self._post("/register/respond", body)

    def verify_session(self, session_id: str) -> dict:
        return self._post("/register/verify", {"sessionId": session_id})

    def prove_identity(self, identity: Identity,
                       on_step=None) -> tuple[str, list[dict]]:
        """Run the interactive proof for an identity at the Unverified stage;
        returns the permanent id and the printable transcript."""
        transcript: list[dict] = []

        def step(label, payload):
            transcript.append({"step": label, **payload})
            if on_step:
                on_step(label, payload)

        prover = sigma.Prover(self.group, identity.secret_key)
        session_id = self.begin_session(identity.unv_id)
        step("session", {"sessionId": session_id})
        commitments = prover.commit(self.rounds)
        self.send_commitments(session_id, commitments)
        step("commit", {"commitments": [format(d, "x") for d in commitments]})
        challenges = self.get_challenges(session_id)
        step("challenge", {"challenges": [str(c) for c in challenges]})
        answers = prover.respond(challenges)
        self.send_answers(session_id, answers, challenges)
        step("respond", {"answers": [str(s) for s in answers]})
        outcome = self.verify_session(session_id)
        step("verify", outcome)
        identity.permanent_id = outcome["permanentId"]
        return identity.permanent_id, transcript

    def register_identity(self, name: str, user_info: bytes, device: bytes,
                          on_step=None) -> Identity:
        """Full happy-path registration: request, key generation, unverified
        id, interactive proof, permanent id."""
        group = self.group
        secret = group.random_secret()
        identity = Identity(name=name, secret_key=secret,
                            public_key=pow(group.g, secret, group.p))
        out = self.register_request(user_info, device)
        identity.request_id = out["requestId"]
        identity.unv_id = self.issue_unvid(identity.request_id, identity.public_key)
        self.prove_identity(identity, on_step=on_step)
        return identity

    def ni_verify(self, public_key: int, context_tag: bytes, proof: sigma.NIProof) -> bool:
        return self._post("/register/ni-verify", {
            "publicKey": format(public_key, "x"),
            "contextTag": context_tag.hex(),
            "proof": {"d": [format(d, "x") for d in proof.commitments],
                      "s": [str(s) for s in proof.answers]},
        })["valid"]

    # -- polls ---------------------------------------------------------------------

    def create_poll(self, identity: Identity, name: str, description: str,
                    options: Sequence[str]) -> str:
        return self._post_authed("/polls", identity, {
            "name": name, "description": description, "options": list(options)})["pollId"]

    def register_voters(self, identity: Identity, poll_id: str,
                        voters: Sequence[str]) -> int:
        out = self._post_authed(f"/polls/{poll_id}/voters", identity,
                                {"voters": list(voters)})
        return int(out["registered"])

    def set_open(self, identity: Identity, poll_id: str) -> None:
        self._post_authed(f"/polls/{poll_id}/set-open", identity)

    def open_poll(self, identity: Identity, poll_id: str) -> None:
        self._post_authed(f"/polls/{poll_id}/open", identity)

    def cast_vote(self, identity: Identity, poll_id: str, choice: int) -> dict:
        return self._post_authed(f"/polls/{poll_id}/votes", identity,
                                 {"choice": str(choice)})

    def close_poll(self, identity: Identity, poll_id: str) -> dict:
        return self._post_authed(f"/polls/{poll_id}/close", identity)

    def poll_results(self, poll_id: str) -> dict:
        return self._get(f"/polls/{poll_id}/results")

    def poll_detail(self, poll_id: str, as_voter: Optional[str] = None) -> dict:
        path = f"/polls/{poll_id}"
        if as_voter:
            path += f"?as={as_voter}"
        return self._get(path)

    # -- documents, costs, ledger ------------------------------------------------------

    def put_document(self, identity: Identity, data: bytes) -> str:
        return self._post_authed("/documents", identity, raw=data)["hash"]

    def get_document(self, doc_hash: str) -> bytes:
        resp = self._http.get(f"/documents/{doc_hash}")
        if resp.status_code >= 400:
            raise_for_error(resp)
        return resp.content

    def costs(self, scope: str) -> dict:
        return self._get(f"/costs/{scope}")

    def ledger_verify(self) -> dict:
        return self._get("/ledger/verify")
