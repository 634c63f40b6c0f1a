import json

import pytest

from ballotledger.config import ServiceConfig
from ballotledger.errors import ConfigError
from ballotledger.groups import (
    PRODUCTION,
    TOY,
    GroupParams,
    is_probable_prime,
    load_group,
)


def test_toy_group_structure():
    group = load_group("toy")
    assert (group.p, group.q, group.g) == (23, 11, 2)
    assert pow(group.g, group.q, group.p) == 1


def test_production_group_validates():
    group = load_group("rfc5114-2048-256")
    assert group.p.bit_length() == 2048
    assert group.q.bit_length() == 256
    assert pow(group.g, group.q, group.p) == 1


def test_unknown_group():
    with pytest.raises(ConfigError):
        load_group("curve25519")


def test_validate_rejects_wrong_order():
    # 5 has order 22 mod 23, not 11
    with pytest.raises(ConfigError):
        GroupParams(name="bad", p=23, q=11, g=5).validate()


def test_validate_rejects_composite_q():
    with pytest.raises(ConfigError):
        GroupParams(name="bad", p=23, q=22, g=2).validate()


def test_is_element():
    assert TOY.is_element(8)
    assert TOY.is_element(1)
    assert not TOY.is_element(5)
    assert not TOY.is_element(0)
    assert not TOY.is_element(23)


def test_miller_rabin():
    primes = [2, 3, 5, 7, 11, 101, 7919, PRODUCTION.q]
    composites = [1, 4, 9, 15, 561, 1105, 7917]  # incl. Carmichael numbers
    assert all(is_probable_prime(p) for p in primes)
    assert not any(is_probable_prime(c) for c in composites)


def test_random_scalars_in_range():
    for _ in range(200):
        assert 0 <= TOY.random_scalar() < TOY.q
        assert 1 <= TOY.random_secret() < TOY.q


def test_fingerprint_distinguishes_groups():
    assert TOY.fingerprint() != PRODUCTION.fingerprint()


# -- service config ----------------------------------------------------------


def test_config_defaults():
    config = ServiceConfig()
    assert config.group == "rfc5114-2048-256"
    assert config.rounds == 2
    assert config.host == "127.0.0.1"
    assert config.port == 8732


def test_config_from_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"group": "toy", "listen_address": "0.0.0.0:9000",
                                "seal_max_txs": 8}))
    config = ServiceConfig.from_file(str(path))
    assert config.group == "toy"
    assert config.port == 9000
    assert config.seal_max_txs == 8


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"grup": "toy"}))
    with pytest.raises(ConfigError):
        ServiceConfig.from_file(str(path))


def test_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        ServiceConfig(rounds=0)
    with pytest.raises(ConfigError):
        ServiceConfig(seal_max_txs=0)
    with pytest.raises(ConfigError):
        ServiceConfig(listen_address="nohost").port


def test_config_from_env(tmp_path, monkeypatch):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"group": "toy"}))
    monkeypatch.setenv("BALLOTLEDGER_CONFIG", str(path))
    assert ServiceConfig.from_env().group == "toy"
    monkeypatch.delenv("BALLOTLEDGER_CONFIG")
    assert ServiceConfig.from_env().group == "rfc5114-2048-256"
