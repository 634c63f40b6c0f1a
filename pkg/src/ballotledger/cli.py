"""Operator command line: drive every service operation, run the bench,
verify ledgers, manage local identities."""

from __future__ import annotations

import functools
import json
import os
import sys

import click

from . import bench as bench_mod
from . import ledger as ledger_mod
from .client import ApiClient, ApiError, Identity
from .config import ServiceConfig
from .errors import BallotLedgerError, ConfigError
from .keystore import ENV_KEYSTORE, ENV_PASSPHRASE, Keystore

ENV_URL = "BALLOTLEDGER_URL"
DEFAULT_URL = "http://127.0.0.1:8732"


def _make_client(url: str) -> ApiClient:
    # tests swap this out for an in-process transport
    return ApiClient(url)


class CliState:
    def __init__(self, url: str, keystore_path: str | None, passphrase: str | None,
                 json_out: bool):
        self.url = url
        self.keystore_path = keystore_path
        self.passphrase = passphrase
        self.json_out = json_out
        self._client = None
        self._keystore = None

    @property
    def client(self) -> ApiClient:
        if self._client is None:
            self._client = _make_client(self.url)
        return self._client

    @property
    def keystore(self) -> Keystore:
        if self._keystore is None:
            if not self.keystore_path:
                raise ConfigError(f"no keystore configured (--keystore or {ENV_KEYSTORE})")
            self._keystore = Keystore(self.keystore_path, self.passphrase)
        return self._keystore

    def emit(self, data: dict, text: str) -> None:
        click.echo(json.dumps(data) if self.json_out else text)


def forward_errors(fn):
    """Domain and transport errors exit 1 with one machine-readable line."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        state: CliState = click.get_current_context().obj
        try:
            return fn(*args, **kwargs)
        except (ApiError, BallotLedgerError) as exc:
            name = exc.name if isinstance(exc, (ApiError, BallotLedgerError)) else "Error"
            detail = getattr(exc, "detail", None) or str(exc)
            if state.json_out:
                click.echo(json.dumps({"error": name, "detail": detail}))
            else:
                click.echo(f"error: {name}: {detail}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
@click.option("--json", "json_out", is_flag=True, help="structured output")
@click.option("--url", envvar=ENV_URL, default=DEFAULT_URL, show_default=True)
@click.option("--keystore", "keystore_path", envvar=ENV_KEYSTORE, default=None,
              help="identity keystore file")
@click.option("--passphrase", envvar=ENV_PASSPHRASE, default=None,
              help="keystore passphrase (enables encryption)")
@click.pass_context
def main(ctx, json_out, url, keystore_path, passphrase):
    ctx.obj = CliState(url, keystore_path, passphrase, json_out)


# -- serve ---------------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", envvar="BALLOTLEDGER_CONFIG", default=None)
@click.pass_obj
@forward_errors
def serve(state: CliState, config_path):
    """Start the voting service (replays any existing ledger first)."""
    import uvicorn

    from .api import create_app
    from .service import VotingService

    config = ServiceConfig.from_file(config_path) if config_path else ServiceConfig.from_env()
    service = VotingService(config)
    click.echo(f"serving on {config.listen_address} "
               f"(group={config.group}, data={config.data_dir or 'memory'})", err=True)
    uvicorn.run(create_app(service), host=config.host, port=config.port,
                log_level="warning")


# -- identities -------------------------------------------------------------------


@main.group("id")
def id_group():
    """Registration and proving."""


@id_group.command("register")
@click.option("--name", required=True, help="local identity name")
@click.option("--user-info", default=None, help="registration info (defaults to name)")
@click.option("--device", default=None, help="device credentials string")
@click.option("--force", is_flag=True, help="replace an existing entry")
@click.pass_obj
@forward_errors
def id_register(state: CliState, name, user_info, device, force):
    """Full registration: request, keypair, unverified id, interactive proof."""
    ks = state.keystore
    if name in ks.entries and not force:
        raise ConfigError(f"identity {name!r} already exists (use --force)")
    client = state.client
    fp = client.group.fingerprint()
    if ks.group_fingerprint and ks.group_fingerprint != fp:
        raise ConfigError("keystore was created against a different group")
    ks.group_fingerprint = fp
    steps: list[str] = []
    identity = client.register_identity(
        name, (user_info or name).encode(), (device or f"cli-{name}").encode(),
        on_step=lambda label, payload: steps.append(label))
    ks.put(identity)
    state.emit(
        {"name": name, "requestId": identity.request_id, "unvId": identity.unv_id,
         "permanentId": identity.permanent_id},
        f"registered {name}: permanentId {identity.permanent_id}")


@id_group.command("prove")
@click.option("--name", required=True)
@click.option("--manual", is_flag=True, help="print every protocol message")
@click.pass_obj
@forward_errors
def id_prove(state: CliState, name, manual):
    """Run the interactive proof for an identity awaiting verification."""
    ks = state.keystore
    identity = ks.get(name)
    if identity.unv_id is None:
        raise ConfigError(f"{name!r} has no unverified id; run `id register`")

    def on_step(label, payload):
        if manual:
            click.echo(f"{label}: {json.dumps(payload)}")

    permanent_id, transcript = state.client.prove_identity(identity, on_step=on_step)
    ks.put(identity)
    state.emit({"name": name, "permanentId": permanent_id, "transcript": transcript},
               f"verified {name}: permanentId {permanent_id}")


# -- polls ----------------------------------------------------------------------------


@main.group()
def poll():
    """Poll lifecycle."""


def _identity(state: CliState, name: str) -> Identity:
    identity = state.keystore.get(name)
    if identity.permanent_id is None:
        raise ConfigError(f"{name!r} is not verified yet")
    return identity


@poll.command("create")
@click.option("--as", "as_name", required=True, help="creator identity")
@click.option("--name", "poll_name", required=True)
@click.option("--description", default="")
@click.option("--option", "options", multiple=True, required=True)
@click.pass_obj
@forward_errors
def poll_create(state: CliState, as_name, poll_name, description, options):
    poll_id = state.client.create_poll(_identity(state, as_name), poll_name,
                                       description, list(options))
    state.emit({"pollId": poll_id}, poll_id)


@poll.command("voters")
@click.argument("poll_id")
@click.argument("voter_ids", nargs=-1, required=True)
@click.option("--as", "as_name", required=True)
@click.pass_obj
@forward_errors
def poll_voters(state: CliState, poll_id, voter_ids, as_name):
    count = state.client.register_voters(_identity(state, as_name), poll_id,
                                         list(voter_ids))
    state.emit({"pollId": poll_id, "registered": count}, f"registered: {count}")


@poll.command("set-open")
@click.argument("poll_id")
@click.option("--as", "as_name", required=True)
@click.pass_obj
@forward_errors
def poll_set_open(state: CliState, poll_id, as_name):
    state.client.set_open(_identity(state, as_name), poll_id)
    state.emit({"pollId": poll_id, "isOpenToAll": True}, "open to all verified users")


@poll.command("open")
@click.argument("poll_id")
@click.option("--as", "as_name", required=True)
@click.pass_obj
@forward_errors
def poll_open(state: CliState, poll_id, as_name):
    state.client.open_poll(_identity(state, as_name), poll_id)
    state.emit({"pollId": poll_id, "status": "Open"}, "poll open")


@poll.command("vote")
@click.argument("poll_id")
@click.argument("choice_index", type=int)
@click.option("--as", "as_name", required=True)
@click.pass_obj
@forward_errors
def poll_vote(state: CliState, poll_id, choice_index, as_name):
    out = state.client.cast_vote(_identity(state, as_name), poll_id, choice_index)
    state.emit(out, f"vote recorded, receipt tx {out['txId']}")


@poll.command("close")
@click.argument("poll_id")
@click.option("--as", "as_name", required=True)
@click.pass_obj
@forward_errors
def poll_close(state: CliState, poll_id, as_name):
    out = state.client.close_poll(_identity(state, as_name), poll_id)
    state.emit(out, f"closed; winner: option {out['result']} ({out['option']})")


@poll.command("results")
@click.argument("poll_id")
@click.pass_obj
@forward_errors
def poll_results(state: CliState, poll_id):
    out = state.client.poll_results(poll_id)
    if out["result"] is None:
        state.emit(out, "pending")
    else:
        state.emit(out, f"winner: option {out['result']['index']} "
                        f"({out['result']['option']})")


# -- ledger -----------------------------------------------------------------------------


@main.group("ledger")
def ledger_group():
    """Ledger inspection."""


@ledger_group.command("verify")
@click.argument("path", type=click.Path(exists=True))
@click.pass_obj
def ledger_verify(state: CliState, path):
    """Verify a persisted ledger file; exits non-zero on failure."""
    report = ledger_mod.verify_files(path)
    data = {"ok": report.ok}
    if report.first_bad_height is not None:
        data["firstBadHeight"] = report.first_bad_height
    if report.detail:
        data["detail"] = report.detail
    if report.ok:
        state.emit(data, "ok")
    else:
        state.emit(data, f"FAILED at height {report.first_bad_height}: {report.detail}")
        sys.exit(1)


# -- documents ------------------------------------------------------------------------------


@main.group("docstore")
def docstore_group():
    """Content-addressed document store."""


@docstore_group.command("put")
@click.argument("file", type=click.Path(exists=True))
@click.option("--as", "as_name", required=True)
@click.pass_obj
@forward_errors
def docstore_put(state: CliState, file, as_name):
    with open(file, "rb") as f:
        doc_hash = state.client.put_document(_identity(state, as_name), f.read())
    state.emit({"hash": doc_hash}, doc_hash)


@docstore_group.command("get")
@click.argument("doc_hash")
@click.option("--out", "out_path", default=None, help="write to file instead of stdout")
@click.pass_obj
@forward_errors
def docstore_get(state: CliState, doc_hash, out_path):
    data = state.client.get_document(doc_hash)
    if out_path:
        with open(out_path, "wb") as f:
            f.write(data)
        state.emit({"hash": doc_hash, "bytes": len(data), "out": out_path},
                   f"wrote {len(data)} bytes to {out_path}")
    else:
        click.get_binary_stream("stdout").write(data)


# -- costs ------------------------------------------------------------------------------------


@main.group()
def costs():
    """Gas-style cost reports."""


@costs.command("show")
@click.argument("scope")
@click.pass_obj
@forward_errors
def costs_show(state: CliState, scope):
    out = state.client.costs(scope)
    lines = [f"{e['operation']:<16} {e['gas']:>8} gas"
             + (f"  (tx {e['txId']})" if e["txId"] is not None else "")
             for e in out["entries"]]
    lines.append(f"{'total':<16} {out['total']:>8} gas")
    state.emit(out, "\n".join(lines))


# -- bench -------------------------------------------------------------------------------------


@main.group("bench")
def bench_group():
    """Load benchmarks."""


@bench_group.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True)
@click.pass_obj
@forward_errors
def bench_run(state: CliState, config_path, out_path):
    """Run the send-rate x users sweep and write the per-cell CSV."""
    config = bench_mod.BenchConfig.from_file(config_path)

    def progress(cell):
        click.echo(f"rate={cell.send_rate:>5} users={cell.users:>4} "
                   f"throughput={cell.throughput:8.2f} "
                   f"latency={cell.avg_latency_s * 1000:8.2f}ms "
                   f"errors={cell.errors}", err=True)

    try:
        results = bench_mod.run_sweep(config, progress=progress)
    except (bench_mod.ServiceUnreachable, bench_mod.SetupFailed) as exc:
        if state.json_out:
            click.echo(json.dumps({"error": type(exc).__name__, "detail": str(exc)}))
        else:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)
    bench_mod.emit_plot_data(results, out_path)
    state.emit({"cells": len(results), "out": out_path},
               f"wrote {len(results)} cells to {out_path}")


if __name__ == "__main__":
    main()
