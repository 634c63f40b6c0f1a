import random

import pytest

from ballotledger import canon
from ballotledger.config import ServiceConfig
from ballotledger.errors import LedgerCorrupt, NotFound, WrongState
from ballotledger.service import VotingService
from conftest import make_service, register_identity


def test_registration_appends_and_charges(toy_service):
    svc = toy_service
    permanent_id, _ = register_identity(svc, "alice")
    kinds = [tx.kind for tx in svc.ledger.all_transactions()]
    assert kinds == ["RegisterRequest", "IssueUnvId", "StoreDocument",
                     "ProofVerified", "IssueId"]
    report = svc.cost_report("req-0")
    assert [(e.operation, e.gas) for e in report.entries] == [
        ("sendReq", 96584), ("genKey", 184584), ("genChng", 94214),
        ("verifyProof", 65082), ("regUser", 36548)]
    assert report.total == 477012
    assert svc.registry.is_verified(permanent_id)


def test_verification_report_in_docstore(toy_service):
    svc = toy_service
    register_identity(svc, "alice")
    record = svc.registry.get_record("req-0")
    report_bytes = svc.get_document(record.report_hash)
    transcript = canon.decode(report_bytes)
    assert transcript["verdict"] == "Accepted"
    assert transcript["unvId"] == record.unv_id


def test_rejected_proof_appends_nothing(toy_service):
    svc = toy_service
    record = svc.send_request(b"eve", b"dev-eve")
    from ballotledger.sigma import Prover

    prover = Prover(svc.group, 4)
    svc.issue_unverified_id(record.request_id, prover.public_key)
    session = svc.begin_proof(record.unv_id)
    svc.add_commitments(session.session_id, prover.commit(2))
    challenges = svc.issue_challenges(session.session_id)
    answers = prover.respond(challenges)
    before = len(svc.ledger)
    outcome = svc.verify_and_issue(session.session_id,
                                   [(answers[0] + 1) % svc.group.q, answers[1]])
    assert not outcome.accepted
    assert len(svc.ledger) == before


def test_poll_flow_charges_and_scopes(verified_trio):
    svc, (alice, bob, carol) = verified_trio
    poll = svc.create_poll(alice, "q", "", ["x", "y"])
    svc.register_voters(poll.poll_id, alice, [alice, bob, carol])
    svc.open_poll(poll.poll_id, alice)
    svc.cast_vote(poll.poll_id, alice, 0)
    svc.cast_vote(poll.poll_id, bob, 1)
    svc.cast_vote(poll.poll_id, carol, 1)
    assert svc.get_results(poll.poll_id) == (1, "y")
    report = svc.cost_report(poll.poll_id)
    assert [(e.operation, e.gas) for e in report.entries] == [
        ("createPoll", 215949), ("registerVoters", 150240), ("OpenPoll", 8981),
        ("castVotes", 19214), ("castVotes", 19214), ("castVotes", 19214),
        ("closePoll", 7223), ("getPollRes", 68547)]


def test_auto_close_appends_close_and_result(verified_trio):
    svc, ids = verified_trio
    poll = svc.create_poll(ids[0], "q", "", ["x", "y"])
    svc.register_voters(poll.poll_id, ids[0], ids)
    svc.open_poll(poll.poll_id, ids[0])
    for voter in ids:
        svc.cast_vote(poll.poll_id, voter, 1)
    kinds = [tx.kind for tx in svc.ledger.all_transactions()[-3:]]
    assert kinds == ["CastVote", "ClosePoll", "PublishResult"]
    close_tx = svc.ledger.all_transactions()[-2]
    assert close_tx.args["auto"] is True
    assert svc.get_poll(poll.poll_id).status == "Closed"


def test_manual_close_after_auto_close_fails(verified_trio):
    svc, ids = verified_trio
    poll = svc.create_poll(ids[0], "q", "", ["x", "y"])
    svc.register_voters(poll.poll_id, ids[0], ids)
    svc.open_poll(poll.poll_id, ids[0])
    for voter in ids:
        svc.cast_vote(poll.poll_id, voter, 0)
    with pytest.raises(WrongState):
        svc.close_poll(poll.poll_id, ids[0])


def test_failed_operations_leave_ledger_untouched(verified_trio):
    svc, (alice, bob, _) = verified_trio
    poll = svc.create_poll(alice, "q", "", ["x", "y"])
    svc.register_voters(poll.poll_id, alice, [alice, bob])
    before = len(svc.ledger)
    for bad_call in (
        lambda: svc.create_poll("ghost", "q", "", ["x", "y"]),
        lambda: svc.create_poll(alice, "q", "", ["only-one"]),
        lambda: svc.register_voters(poll.poll_id, bob, [bob]),
        lambda: svc.register_voters(poll.poll_id, alice, ["ghost"]),
        lambda: svc.open_poll(poll.poll_id, bob),
        lambda: svc.cast_vote(poll.poll_id, alice, 0),
        lambda: svc.close_poll(poll.poll_id, alice),
    ):
        with pytest.raises(Exception):
            bad_call()
        assert len(svc.ledger) == before


def test_cost_scope_unknown(toy_service):
    with pytest.raises(NotFound):
        toy_service.cost_report("poll-77")


def test_document_round_trip(verified_trio):
    svc, (alice, _, _) = verified_trio
    before = len(svc.ledger)
    doc_hash = svc.put_document(b"minutes of the meeting", alice)
    assert svc.get_document(doc_hash) == b"minutes of the meeting"
    assert len(svc.ledger) == before + 1


# -- replay determinism -------------------------------------------------------------


def _scripted_run(svc):
    """A 20-operation script touching every replayable transaction kind."""
    alice, _ = register_identity(svc, "alice")
    bob, _ = register_identity(svc, "bob")
    poll = svc.create_poll(alice, "lunch", "pick", ["a", "b"])
    svc.register_voters(poll.poll_id, alice, [alice, bob])
    svc.open_poll(poll.poll_id, alice)
    svc.cast_vote(poll.poll_id, alice, 0)
    open_poll = svc.create_poll(bob, "open", "", ["x", "y", "z"])
    svc.set_open(open_poll.poll_id, bob)
    svc.open_poll(open_poll.poll_id, bob)
    svc.cast_vote(open_poll.poll_id, alice, 2)
    svc.cast_vote(poll.poll_id, bob, 1)  # auto-closes `poll`
    svc.close_poll(open_poll.poll_id, bob)
    svc.put_document(b"attachment", alice)


def test_restart_reproduces_state(tmp_path):
    data_dir = str(tmp_path / "data")
    svc = make_service(data_dir)
    _scripted_run(svc)
    expected = svc.snapshot()
    svc.close()

    restarted = make_service(data_dir)
    assert restarted.snapshot() == expected
    assert restarted.verify_ledger().ok
    restarted.close()


def test_restart_after_every_prefix(tmp_path):
    """Kill-restart equivalence at every acknowledged operation boundary."""
    import shutil

    data_dir = str(tmp_path / "data")
    svc = make_service(data_dir)
    snapshots = []
    alice, _ = register_identity(svc, "alice")
    snapshots.append((svc.snapshot(), self_copy(tmp_path, data_dir, len(snapshots))))
    poll = svc.create_poll(alice, "p", "", ["a", "b"])
    snapshots.append((svc.snapshot(), self_copy(tmp_path, data_dir, len(snapshots))))
    svc.register_voters(poll.poll_id, alice, [alice])
    snapshots.append((svc.snapshot(), self_copy(tmp_path, data_dir, len(snapshots))))
    svc.open_poll(poll.poll_id, alice)
    snapshots.append((svc.snapshot(), self_copy(tmp_path, data_dir, len(snapshots))))
    svc.cast_vote(poll.poll_id, alice, 1)
    snapshots.append((svc.snapshot(), self_copy(tmp_path, data_dir, len(snapshots))))
    svc.close()
    for expected, copied_dir in snapshots:
        replica = make_service(copied_dir)
        assert replica.snapshot() == expected
        replica.close()


def self_copy(tmp_path, data_dir, index):
    import shutil

    dst = str(tmp_path / f"copy-{index}")
    shutil.copytree(data_dir, dst)
    return dst


def test_replay_continues_id_sequences(tmp_path):
    data_dir = str(tmp_path / "data")
    svc = make_service(data_dir)
    alice, _ = register_identity(svc, "alice")
    poll = svc.create_poll(alice, "p", "", ["a", "b"])
    svc.close()
    restarted = make_service(data_dir)
    bob, _ = register_identity(restarted, "bob")
    record = restarted.registry.record_by_permanent_id(bob)
    assert record.request_id == "req-1"
    poll2 = restarted.create_poll(bob, "q", "", ["a", "b"])
    assert poll2.poll_id == "poll-1"
    restarted.close()


def test_tampered_ledger_refuses_start(tmp_path):
    data_dir = str(tmp_path / "data")
    svc = make_service(data_dir)
    register_identity(svc, "alice")
    svc.close()
    ledger_path = str(tmp_path / "data" / "ledger.dat")
    with open(ledger_path, "r+b") as f:
        f.seek(200)
        byte = f.read(1)
        f.seek(200)
        f.write(bytes([byte[0] ^ 0x10]))
    with pytest.raises(LedgerCorrupt):
        make_service(data_dir)


def test_poll_transactions_alone_rebuild_poll_state(toy_service):
    """Replaying only the poll-engine transaction kinds into a fresh book
    reconstructs the identical final poll state, including the result."""
    from ballotledger.polls import PollBook

    svc = toy_service
    _scripted_run(svc)
    poll_kinds = {"CreatePoll", "RegisterVoters", "SetOpen", "OpenPoll",
                  "CastVote", "ClosePoll", "PublishResult"}
    book = PollBook(is_verified=lambda _pid: True)
    for tx in svc.ledger.all_transactions():
        if tx.kind in poll_kinds:
            args = tx.args
            if tx.kind == "CreatePoll":
                book.apply_create(args["pollId"], args["creator"], args["name"],
                                  args["description"], args["options"])
            elif tx.kind == "RegisterVoters":
                book.apply_register(args["pollId"], args["voters"])
            elif tx.kind == "SetOpen":
                book.apply_set_open(args["pollId"])
            elif tx.kind == "OpenPoll":
                book.apply_open(args["pollId"])
            elif tx.kind == "CastVote":
                book.apply_vote(args["pollId"], args["voter"], args["choice"])
            elif tx.kind == "ClosePoll":
                book.apply_close(args["pollId"])
            elif tx.kind == "PublishResult":
                book.apply_result(args["pollId"], args["result"])
    assert book.snapshot() == svc.polls.snapshot()


def test_snapshot_is_deterministic(toy_service):
    svc = toy_service
    register_identity(svc, "alice")
    assert svc.snapshot() == svc.snapshot()
    assert svc.state_digest() == svc.state_digest()
