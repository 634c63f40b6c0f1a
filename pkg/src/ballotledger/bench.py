"""Load-benchmark harness: open-loop request generation over a grid of
send rates and concurrent-user counts, measuring per-request latency and
achieved throughput per cell.

Open loop means arrivals fire at their scheduled times regardless of
outstanding responses; `users` bounds the transport-level parallelism and,
for write sweeps, the number of dedicated polls. Write cells vote with a
fresh (poll, voter) pair per request so the one-vote rule never throttles
the generator; the setup phase provisions the identity pool and polls
through the public API.
"""

from __future__ import annotations

import asyncio
import csv
import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import httpx

from . import sigma
from .api import auth_context_tag, encode_proof_header
from .groups import GroupParams

READ_OP = "read"
WRITE_OP = "write"


class ServiceUnreachable(Exception):
    pass


class SetupFailed(Exception):
    pass


@dataclass
class BenchConfig:
    operation: str = WRITE_OP
    send_rates: Sequence[int] = (25, 50, 75, 100)
    concurrent_users: Sequence[int] = (25,)
    duration_s: float = 2.0
    base_url: str = "http://127.0.0.1:8732"

    def __post_init__(self):
        if self.operation not in (READ_OP, WRITE_OP):
            raise ValueError("operation must be 'read' or 'write'")
        if not self.send_rates or any(r <= 0 for r in self.send_rates):
            raise ValueError("send rates must be positive")
        if not self.concurrent_users or any(u <= 0 for u in self.concurrent_users):
            raise ValueError("user counts must be positive")
        if self.duration_s < 1:
            raise ValueError("duration must be >= 1 s")

    @classmethod
    def from_file(cls, path: str) -> "BenchConfig":
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        return cls(
            operation=raw.get("operation", WRITE_OP),
            send_rates=[int(r) for r in raw["sendRates"]],
            concurrent_users=[int(u) for u in raw["concurrentUsers"]],
            duration_s=float(raw.get("durationSeconds", 2.0)),
            base_url=raw.get("baseUrl", "http://127.0.0.1:8732"),
        )


@dataclass
class CellResult:
    send_rate: int
    users: int
    sent: int
    completed: int
    errors: int
    throughput: float
    avg_latency_s: float


@dataclass
class _PoolIdentity:
    secret_key: int
    permanent_id: str


@dataclass
class _Provisioned:
    group: GroupParams
    rounds: int
    challenge_bits: int
    creator: _PoolIdentity
    pool: list[_PoolIdentity] = field(default_factory=list)
    read_poll: Optional[str] = None


async def _register_one(http: httpx.AsyncClient, group: GroupParams, rounds: int,
                        challenge_bits: int, tag: str) -> _PoolIdentity:
    secret = group.random_secret()
    public = pow(group.g, secret, group.p)
    r = await http.post("/register/request", json={
        "userInfo": f"bench-{tag}".encode().hex(),
        "deviceCredentials": f"bench-dev-{tag}".encode().hex()})
    r.raise_for_status()
    request_id = r.json()["requestId"]
    r = await http.post("/register/unvid", json={
        "requestId": request_id, "publicKey": format(public, "x")})
    r.raise_for_status()
    unv_id = r.json()["unvId"]
    r = await http.post("/register/session", json={"unvId": unv_id})
    r.raise_for_status()
    session_id = r.json()["sessionId"]
    prover = sigma.Prover(group, secret)
    commitments = prover.commit(rounds)
    r = await http.post("/register/commit", json={
        "sessionId": session_id, "commitments": [format(d, "x") for d in commitments]})
    r.raise_for_status()
    r = await http.get(f"/register/challenge/{session_id}")
    r.raise_for_status()
    challenges = [int(c) for c in r.json()["challenges"]]
    answers = prover.respond(challenges)
    r = await http.post("/register/verify", json={
        "sessionId": session_id, "answers": [str(s) for s in answers]})
    r.raise_for_status()
    return _PoolIdentity(secret_key=secret, permanent_id=r.json()["permanentId"])


def _authed_post(group: GroupParams, rounds: int, challenge_bits: int,
                 identity: _PoolIdentity, path: str, body: dict) -> tuple[bytes, dict]:
    raw = json.dumps(body).encode()
    tag = auth_context_tag("POST", path, raw)
    proof = sigma.Prover(group, identity.secret_key).prove_noninteractive(
        tag, rounds, challenge_bits)
    headers = {"X-Caller-Id": identity.permanent_id,
               "X-Auth-Proof": encode_proof_header(proof),
               "Content-Type": "application/json"}
    return raw, headers


class BenchRunner:
    def __init__(self, config: BenchConfig,
                 transport: Optional[httpx.AsyncBaseTransport] = None):
        self.config = config
        self.transport = transport

    def run(self, progress=None) -> list[CellResult]:
        return asyncio.run(self._run(progress))

    def _client(self, users: int = 64) -> httpx.AsyncClient:
        limits = httpx.Limits(max_connections=users, max_keepalive_connections=users)
        return httpx.AsyncClient(base_url=self.config.base_url, timeout=30.0,
                                 limits=limits, transport=self.transport)

    async def _run(self, progress=None) -> list[CellResult]:
        async with self._client() as http:
            try:
                r = await http.get("/health")
                r.raise_for_status()
            except (httpx.HTTPError, OSError) as exc:
                raise ServiceUnreachable(f"{self.config.base_url}: {exc}") from exc
            prov = await self._provision(http)
        results = []
        for users in self.config.concurrent_users:
            for rate in self.config.send_rates:
                cell = await self._run_cell(prov, rate, users)
                results.append(cell)
                if progress:
                    progress(cell)
        return results

    async def _provision(self, http: httpx.AsyncClient) -> _Provisioned:
        r = await http.get("/params")
        r.raise_for_status()
        p = r.json()
        group = GroupParams(name=p["group"], p=int(p["p"]), q=int(p["q"]), g=int(p["g"]))
        rounds, bits = int(p["rounds"]), int(p["challengeBits"])
        try:
            creator = await _register_one(http, group, rounds, bits, "creator")
            prov = _Provisioned(group=group, rounds=rounds, challenge_bits=bits,
                                creator=creator)
            if self.config.operation == WRITE_OP:
                pool_size = max(
                    math.ceil(rate * self.config.duration_s / users) + 2
                    for rate in self.config.send_rates
                    for users in self.config.concurrent_users)
                batch = 32
                for base in range(0, pool_size, batch):
                    chunk = await asyncio.gather(*[
                        _register_one(http, group, rounds, bits, f"v{base + i}")
                        for i in range(min(batch, pool_size - base))])
                    prov.pool.extend(chunk)
            else:
                prov.read_poll = await self._make_read_poll(http, prov)
            return prov
        except (httpx.HTTPError, OSError, KeyError) as exc:
            raise SetupFailed(f"provisioning failed: {exc}") from exc

    async def _make_read_poll(self, http: httpx.AsyncClient, prov: _Provisioned) -> str:
        mk = lambda path, body: _authed_post(prov.group, prov.rounds,
                                             prov.challenge_bits, prov.creator,
                                             path, body)
        raw, headers = mk("/polls", {"name": "bench-read", "description": "",
                                     "options": ["a", "b"]})
        r = await http.post("/polls", content=raw, headers=headers)
        r.raise_for_status()
        poll_id = r.json()["pollId"]
        raw, headers = mk(f"/polls/{poll_id}/voters",
                          {"voters": [prov.creator.permanent_id]})
        (await http.post(f"/polls/{poll_id}/voters", content=raw,
                         headers=headers)).raise_for_status()
        raw, headers = mk(f"/polls/{poll_id}/open", {})
        (await http.post(f"/polls/{poll_id}/open", content=raw,
                         headers=headers)).raise_for_status()
        raw, headers = mk(f"/polls/{poll_id}/votes", {"choice": "0"})
        (await http.post(f"/polls/{poll_id}/votes", content=raw,
                         headers=headers)).raise_for_status()
        return poll_id

    async def _setup_write_cell(self, http: httpx.AsyncClient, prov: _Provisioned,
                                rate: int, users: int) -> list[str]:
        """One dedicated poll per user, each pre-registered with enough of
        the voter pool to absorb the cell's share of arrivals."""
        per_poll = math.ceil(rate * self.config.duration_s / users) + 2
        voter_ids = [v.permanent_id for v in prov.pool[:per_poll]]
        mk = lambda path, body: _authed_post(prov.group, prov.rounds,
                                             prov.challenge_bits, prov.creator,
                                             path, body)

        async def make_poll(i: int) -> str:
            raw, headers = mk("/polls", {"name": f"bench-{rate}-{users}-{i}",
                                         "description": "", "options": ["a", "b"]})
            r = await http.post("/polls", content=raw, headers=headers)
            r.raise_for_status()
            poll_id = r.json()["pollId"]
            raw, headers = mk(f"/polls/{poll_id}/voters", {"voters": voter_ids})
            (await http.post(f"/polls/{poll_id}/voters", content=raw,
                             headers=headers)).raise_for_status()
            raw, headers = mk(f"/polls/{poll_id}/open", {})
            (await http.post(f"/polls/{poll_id}/open", content=raw,
                             headers=headers)).raise_for_status()
            return poll_id

        try:
            polls = []
            batch = 32
            for base in range(0, users, batch):
                polls.extend(await asyncio.gather(*[
                    make_poll(base + i) for i in range(min(batch, users - base))]))
            return polls
        except (httpx.HTTPError, OSError) as exc:
            raise SetupFailed(f"cell setup failed: {exc}") from exc

    async def _run_cell(self, prov: _Provisioned, rate: int, users: int) -> CellResult:
        duration = self.config.duration_s
        n_requests = int(rate * duration)
        async with self._client(users) as http:
            if self.config.operation == WRITE_OP:
                polls = await self._setup_write_cell(http, prov, rate, users)

                def request_args(j: int):
                    poll_id = polls[j % users]
                    voter = prov.pool[j // users]
                    path = f"/polls/{poll_id}/votes"
                    raw, headers = _authed_post(prov.group, prov.rounds,
                                                prov.challenge_bits, voter,
                                                path, {"choice": str(j % 2)})
                    return ("POST", path, raw, headers)
            else:
                path = f"/polls/{prov.read_poll}/results"

                def request_args(j: int):
                    return ("GET", path, None, None)

            latencies: list[float] = []
            errors = 0
            last_end = 0.0

            async def fire(j: int, scheduled: float):
                nonlocal errors, last_end
                method, path, raw, headers = request_args(j)
                t0 = time.perf_counter()
                try:
                    if method == "POST":
                        resp = await http.post(path, content=raw, headers=headers)
                    else:
                        resp = await http.get(path)
                    t1 = time.perf_counter()
                    if resp.status_code < 400:
                        latencies.append(t1 - t0)
                        last_end = max(last_end, t1)
                    else:
                        errors += 1
                except (httpx.HTTPError, OSError):
                    errors += 1

            start = time.perf_counter()
            tasks = []
            for j in range(n_requests):
                scheduled = start + j / rate
                now = time.perf_counter()
                if scheduled > now:
                    await asyncio.sleep(scheduled - now)
                tasks.append(asyncio.create_task(fire(j, scheduled)))
            await asyncio.gather(*tasks)

        elapsed = max(duration, (last_end - start) if latencies else duration)
        completed = len(latencies)
        return CellResult(
            send_rate=rate, users=users, sent=n_requests, completed=completed,
            errors=errors,
            throughput=completed / elapsed,
            avg_latency_s=(sum(latencies) / completed) if completed else 0.0,
        )


def run_sweep(config: BenchConfig,
              transport: Optional[httpx.AsyncBaseTransport] = None,
              progress=None) -> list[CellResult]:
    return BenchRunner(config, transport).run(progress)


CSV_COLUMNS = ["sendRate", "users", "throughput", "avgLatencySeconds", "errors"]


def emit_plot_data(results: Sequence[CellResult], path: str) -> None:
    """CSV with one row per cell, ready for dual-axis throughput/latency plots."""
    if not results:
        raise ValueError("empty report")
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for cell in results:
            writer.writerow([cell.send_rate, cell.users,
                             f"{cell.throughput:.3f}", f"{cell.avg_latency_s:.6f}",
                             cell.errors])


def parse_plot_data(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as f:
        return list(csv.DictReader(f))
