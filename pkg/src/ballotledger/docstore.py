"""Content-addressed document store (local stand-in for a p2p file system).

Documents are identified by the digest of their bytes; storage is one file
per document under a two-level hex-prefix directory. Contents are immutable:
re-putting identical bytes is a no-op that returns the same hash.
"""

from __future__ import annotations

import os
import tempfile
import threading
from typing import Optional

from . import canon
from .errors import EmptyDocument, IntegrityError, NotFound


def content_hash(data: bytes) -> bytes:
    return canon.digest(data)


def verify(doc_hash: bytes, data: bytes) -> bool:
    return bool(data) and content_hash(data) == doc_hash


class MemoryDocStore:
    def __init__(self):
        self._docs: dict[bytes, bytes] = {}
        self._lock = threading.Lock()

    def put(self, data: bytes) -> bytes:
        if not data:
            raise EmptyDocument("refusing to store empty document")
        h = content_hash(data)
        with self._lock:
            self._docs.setdefault(h, data)
        return h

    def get(self, doc_hash: bytes) -> bytes:
        try:
            return self._docs[doc_hash]
        except KeyError:
            raise NotFound(f"no document {doc_hash.hex()}") from None

    def __contains__(self, doc_hash: bytes) -> bool:
        return doc_hash in self._docs


class FileDocStore:
    """Two-level hex-prefix layout: <root>/ab/cd/<fullhash>.

    Writes go to a temp file then rename, so concurrent identical puts
    resolve to one stored copy and readers never see partial content.
    """

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def _path(self, doc_hash: bytes) -> str:
        hx = doc_hash.hex()
        return os.path.join(self.root, hx[:2], hx[2:4], hx)

    def put(self, data: bytes) -> bytes:
        if not data:
            raise EmptyDocument("refusing to store empty document")
        h = content_hash(data)
        path = self._path(h)
        if not os.path.exists(path):
            os.makedirs(os.path.dirname(path), exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path))
            try:
                with os.fdopen(fd, "wb") as f:
                    f.write(data)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        return h

    def get(self, doc_hash: bytes) -> bytes:
        path = self._path(doc_hash)
        try:
            with open(path, "rb") as f:
                data = f.read()
        except FileNotFoundError:
            raise NotFound(f"no document {doc_hash.hex()}") from None
        if content_hash(data) != doc_hash:
            raise IntegrityError(f"stored bytes do not match {doc_hash.hex()}")
        return data

    def __contains__(self, doc_hash: bytes) -> bool:
        return os.path.exists(self._path(doc_hash))


DocStore = FileDocStore


def open_docstore(root: Optional[str]):
    return MemoryDocStore() if root is None else FileDocStore(root)
