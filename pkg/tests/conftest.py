import pytest

from ballotledger.config import ServiceConfig
from ballotledger.service import VotingService
from ballotledger.sigma import Prover


def make_service(data_dir=None, **overrides) -> VotingService:
    cfg = dict(group="toy", data_dir=data_dir, seal_max_txs=4)
    cfg.update(overrides)
    return VotingService(ServiceConfig(**cfg))


def register_identity(service: VotingService, name: str, secret_key=None):
    """Full happy-path registration against the service; returns
    (permanent_id, prover)."""
    record = service.send_request(name.encode(), b"dev-" + name.encode())
    prover = Prover(service.group, secret_key)
    unv_id = service.issue_unverified_id(record.request_id, prover.public_key)
    session = service.begin_proof(unv_id)
    service.add_commitments(session.session_id, prover.commit(service.config.rounds))
    challenges = service.issue_challenges(session.session_id)
    outcome = service.verify_and_issue(session.session_id, prover.respond(challenges))
    assert outcome.accepted
    return outcome.permanent_id, prover


@pytest.fixture
def toy_service():
    service = make_service()
    yield service
    service.close()


@pytest.fixture
def verified_trio(toy_service):
    """Three verified identities on a toy-group service."""
    ids = [register_identity(toy_service, name)[0] for name in ("alice", "bob", "carol")]
    return toy_service, ids
