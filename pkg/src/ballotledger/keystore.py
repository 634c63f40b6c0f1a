"""Client-side keystore: named identities with their secret keys.

Stored as a canonical-serialization file. With a passphrase configured the
entry payload is encrypted (scrypt-derived Fernet key); the secret keys are
then never written in the clear.
"""

from __future__ import annotations

import base64
import os
from typing import Optional

from cryptography.fernet import Fernet, InvalidToken
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt

from . import canon
from .client import Identity
from .errors import ConfigError

ENV_KEYSTORE = "BALLOTLEDGER_KEYSTORE"
ENV_PASSPHRASE = "BALLOTLEDGER_PASSPHRASE"

_SCRYPT_N = 2**14


def _derive_key(passphrase: str, salt: bytes) -> bytes:
    kdf = Scrypt(salt=salt, length=32, n=_SCRYPT_N, r=8, p=1)
    return base64.urlsafe_b64encode(kdf.derive(passphrase.encode()))


def _entries_payload(entries: dict[str, Identity], group_fingerprint: str) -> bytes:
    return canon.encode({
        "entries": {
            name: {
                "groupFingerprint": group_fingerprint,
                "permanentId": e.permanent_id,
                "publicKey": e.public_key,
                "requestId": e.request_id,
                "secretKey": e.secret_key,
                "unvId": e.unv_id,
            }
            for name, e in sorted(entries.items())
        },
    })


def _payload_to_entries(payload: bytes) -> tuple[dict[str, Identity], str]:
    obj = canon.decode(payload)
    entries = {}
    fingerprint = ""
    for name, e in obj["entries"].items():
        entries[name] = Identity(
            name=name, secret_key=e["secretKey"], public_key=e["publicKey"],
            request_id=e["requestId"], unv_id=e["unvId"],
            permanent_id=e["permanentId"])
        fingerprint = e["groupFingerprint"]
    return entries, fingerprint


class Keystore:
    def __init__(self, path: str, passphrase: Optional[str] = None):
        self.path = path
        self.passphrase = passphrase
        self.entries: dict[str, Identity] = {}
        self.group_fingerprint = ""
        if os.path.exists(path):
            self._load()

    @classmethod
    def from_env(cls, path: Optional[str] = None,
                 passphrase: Optional[str] = None) -> "Keystore":
        path = path or os.environ.get(ENV_KEYSTORE)
        if not path:
            raise ConfigError(f"no keystore path ({ENV_KEYSTORE} unset)")
        return cls(path, passphrase or os.environ.get(ENV_PASSPHRASE))

    def _load(self) -> None:
        with open(self.path, "rb") as f:
            wrapper = canon.decode(f.read())
        if wrapper.get("format") != "ballotledger-keystore":
            raise ConfigError(f"{self.path} is not a keystore file")
        if wrapper["encrypted"]:
            if not self.passphrase:
                raise ConfigError("keystore is encrypted; passphrase required")
            key = _derive_key(self.passphrase, wrapper["salt"])
            try:
                payload = Fernet(key).decrypt(wrapper["box"])
            except InvalidToken:
                raise ConfigError("wrong keystore passphrase") from None
        else:
            payload = wrapper["payload"]
        self.entries, self.group_fingerprint = _payload_to_entries(payload)

    def save(self) -> None:
        payload = _entries_payload(self.entries, self.group_fingerprint)
        if self.passphrase:
            salt = os.urandom(16)
            box = Fernet(_derive_key(self.passphrase, salt)).encrypt(payload)
            wrapper = {"format": "ballotledger-keystore", "encrypted": True,
                       "salt": salt, "box": box}
        else:
            wrapper = {"format": "ballotledger-keystore", "encrypted": False,
                       "payload": payload}
        tmp = self.path + ".tmp"
        with open(tmp, "wb") as f:
            f.write(canon.encode(wrapper))
        os.replace(tmp, self.path)

    def put(self, identity: Identity) -> None:
        self.entries[identity.name] = identity
        self.save()

    def get(self, name: str) -> Identity:
        try:
            return self.entries[name]
        except KeyError:
            raise ConfigError(f"no identity {name!r} in keystore") from None
