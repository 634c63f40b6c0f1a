"""Append-only, hash-chained transaction log standing in for the blockchain.

Every state-changing operation is recorded as a Transaction. Transactions
buffer into an open block; sealing fixes them into the chain. The persisted
encoding embeds txId/kind/actor/timestamp inside the hashed payload, so a
flip of any stored byte is detectable: payload bytes are covered by
payloadHash, payloadHashes by txRoot, txRoot/height by blockHash, and
blockHash by the next block's prevHash link.

Persistence is two files: `<path>` holds the header plus sealed blocks,
`<path>.wal` journals the open buffer so acknowledged transactions survive
a crash before their block seals.
"""

from __future__ import annotations

import os
import struct
import threading
import time
from dataclasses import dataclass
from typing import Any, Optional

from . import canon
from .errors import EmptyBuffer, LedgerCorrupt, LedgerSealed, NotFound

TX_KINDS = frozenset({
    "RegisterRequest", "IssueUnvId", "ProofVerified", "IssueId",
    "CreatePoll", "RegisterVoters", "SetOpen", "OpenPoll",
    "CastVote", "ClosePoll", "PublishResult", "StoreDocument",
})

GENESIS_PREV_HASH = bytes(32)
DEFAULT_SEAL_MAX_TXS = 16
DEFAULT_SEAL_INTERVAL_S = 2.0

_U32 = struct.Struct(">I")

_FILE_HEADER = canon.encode({
    "digestAlgorithmId": canon.DIGEST_ALGORITHM,
    "format": "ballotledger-ledger",
    "formatVersion": 1,
})
_WAL_HEADER = canon.encode({
    "digestAlgorithmId": canon.DIGEST_ALGORITHM,
    "format": "ballotledger-wal",
    "formatVersion": 1,
})


@dataclass(frozen=True)
class Transaction:
    tx_id: int
    kind: str
    actor: str
    timestamp: int
    args: Any
    payload: bytes
    payload_hash: bytes


@dataclass(frozen=True)
class Block:
    height: int
    prev_hash: bytes
    tx_root: bytes
    transactions: tuple[Transaction, ...]
    block_hash: bytes


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    first_bad_height: Optional[int] = None
    detail: Optional[str] = None


def make_transaction(tx_id: int, kind: str, actor: str, timestamp: int, args: Any) -> Transaction:
    if kind not in TX_KINDS:
        raise ValueError(f"invalid transaction kind: {kind!r}")
    payload = canon.encode({
        "actor": actor,
        "args": args,
        "kind": kind,
        "timestamp": timestamp,
        "txId": tx_id,
    })
    return Transaction(tx_id=tx_id, kind=kind, actor=actor, timestamp=timestamp,
                       args=args, payload=payload, payload_hash=canon.digest(payload))


def transaction_from_payload(payload: bytes) -> Transaction:
    fields = canon.decode(payload)
    if not isinstance(fields, dict) or set(fields) != {"actor", "args", "kind", "timestamp", "txId"}:
        raise LedgerCorrupt("malformed transaction payload")
    kind = fields["kind"]
    if kind not in TX_KINDS:
        raise LedgerCorrupt(f"invalid transaction kind: {kind!r}")
    return Transaction(tx_id=fields["txId"], kind=kind, actor=fields["actor"],
                       timestamp=fields["timestamp"], args=fields["args"],
                       payload=payload, payload_hash=canon.digest(payload))


def compute_tx_root(transactions) -> bytes:
    return canon.digest(b"".join(tx.payload_hash for tx in transactions))


def compute_block_hash(height: int, prev_hash: bytes, tx_root: bytes) -> bytes:
    return canon.digest(canon.encode([height, prev_hash, tx_root]))


def make_block(height: int, prev_hash: bytes, transactions) -> Block:
    txs = tuple(transactions)
    tx_root = compute_tx_root(txs)
    return Block(height=height, prev_hash=prev_hash, tx_root=tx_root, transactions=txs,
                 block_hash=compute_block_hash(height, prev_hash, tx_root))


def _encode_block(block: Block) -> bytes:
    return canon.encode({
        "blockHash": block.block_hash,
        "height": block.height,
        "prevHash": block.prev_hash,
        "transactions": [[tx.payload, tx.payload_hash] for tx in block.transactions],
        "txRoot": block.tx_root,
    })


def _frame(record: bytes) -> bytes:
    return _U32.pack(len(record)) + record


class Ledger:
    """Single-writer transaction log; appends serialize under one lock.

    path=None keeps everything in memory (tests, throwaway runs).
    """

    def __init__(self, path: Optional[str] = None, *,
                 seal_max_txs: int = DEFAULT_SEAL_MAX_TXS, fsync: bool = False):
        if seal_max_txs < 1:
            raise ValueError("seal_max_txs must be >= 1")
        self._lock = threading.RLock()
        self.path = path
        self.seal_max_txs = seal_max_txs
        self.fsync = fsync
        self.blocks: list[Block] = []
        self.buffer: list[Transaction] = []
        self._next_tx_id = 0
        self._heights: dict[int, int] = {}
        self._by_id: dict[int, Transaction] = {}
        self._writes_closed = False
        self._buffer_opened_at = 0.0
        self._data_file = None
        self._wal_file = None
        if path is not None:
            self._open_files()

    # -- persistence ------------------------------------------------------

    @property
    def wal_path(self) -> Optional[str]:
        return None if self.path is None else self.path + ".wal"

    def _open_files(self) -> None:
        fresh = not os.path.exists(self.path)
        if fresh:
            os.makedirs(os.path.dirname(os.path.abspath(self.path)), exist_ok=True)
            with open(self.path, "wb") as f:
                f.write(_frame(_FILE_HEADER))
            with open(self.wal_path, "wb") as f:
                f.write(_frame(_WAL_HEADER))
        else:
            self._load()
        self._data_file = open(self.path, "ab")
        self._wal_file = open(self.wal_path, "ab")

    def _load(self) -> None:
        with open(self.path, "rb") as f:
            data = f.read()
        wal = b""
        if os.path.exists(self.wal_path):
            with open(self.wal_path, "rb") as f:
                wal = f.read()
        report = verify_encoded_chain(data, wal)
        if not report.ok:
            raise LedgerCorrupt(report.detail or "ledger verification failed")
        blocks, buffered = _parse_files(data, wal)
        for block in blocks:
            self.blocks.append(block)
            for tx in block.transactions:
                self._index(tx, block.height)
        for tx in buffered:
            self.buffer.append(tx)
            self._index(tx, None)
        self._next_tx_id = len(self._by_id)

    def _index(self, tx: Transaction, height: Optional[int]) -> None:
        self._by_id[tx.tx_id] = tx
        if height is not None:
            self._heights[tx.tx_id] = height

    def _flush(self, f) -> None:
        f.flush()
        if self.fsync:
            os.fsync(f.fileno())

    def close(self) -> None:
        with self._lock:
            if self._data_file is not None:
                self._data_file.close()
                self._data_file = None
            if self._wal_file is not None:
                self._wal_file.close()
                self._wal_file = None

    # -- write operations --------------------------------------------------

    def seal_writes(self) -> None:
        with self._lock:
            self._writes_closed = True

    def unseal_writes(self) -> None:
        with self._lock:
            self._writes_closed = False

    def ensure_writable(self) -> None:
        if self._writes_closed:
            raise LedgerSealed("ledger is closed for writes")

    def append(self, kind: str, actor: str, args: Any, timestamp: int) -> int:
        """Assign the next txId, journal the transaction, buffer it into the
        open block. Seals automatically when the buffer reaches seal_max_txs."""
        with self._lock:
            if self._writes_closed:
                raise LedgerSealed("ledger is closed for writes")
            tx = make_transaction(self._next_tx_id, kind, actor, timestamp, args)
            self._validate_tx(tx)
            if self._wal_file is not None:
                self._wal_file.write(_frame(canon.encode([tx.payload, tx.payload_hash])))
                self._flush(self._wal_file)
            if not self.buffer:
                self._buffer_opened_at = time.monotonic()
            self.buffer.append(tx)
            self._index(tx, None)
            self._next_tx_id += 1
            if len(self.buffer) >= self.seal_max_txs:
                self.seal_block()
            return tx.tx_id

    def seal_if_stale(self, max_age_s: float) -> Optional[bytes]:
        """Seal the open block once it has been open for max_age_s (the
        time half of the N-transactions-or-interval sealing policy)."""
        with self._lock:
            if self.buffer and time.monotonic() - self._buffer_opened_at >= max_age_s:
                return self.seal_block()
            return None

    @staticmethod
    def _validate_tx(tx: Transaction) -> None:
        if not tx.payload:
            raise ValueError("empty payload")
        if tx.kind not in TX_KINDS:
            raise ValueError(f"invalid transaction kind: {tx.kind!r}")

    def seal_block(self) -> bytes:
        with self._lock:
            if not self.buffer:
                raise EmptyBuffer("no buffered transactions to seal")
            prev = self.blocks[-1].block_hash if self.blocks else GENESIS_PREV_HASH
            block = make_block(len(self.blocks), prev, self.buffer)
            if self._data_file is not None:
                self._data_file.write(_frame(_encode_block(block)))
                self._flush(self._data_file)
                self._wal_file.seek(0)
                self._wal_file.truncate()
                self._wal_file.write(_frame(_WAL_HEADER))
                self._flush(self._wal_file)
            self.blocks.append(block)
            for tx in block.transactions:
                self._heights[tx.tx_id] = block.height
            self.buffer.clear()
            return block.block_hash

    # -- read operations ----------------------------------------------------

    def __len__(self) -> int:
        return self._next_tx_id

    def get_transaction(self, tx_id: int) -> tuple[Transaction, Optional[int]]:
        """Returns the stored transaction and its block height (None while buffered)."""
        tx = self._by_id.get(tx_id)
        if tx is None:
            raise NotFound(f"no transaction {tx_id}")
        return tx, self._heights.get(tx_id)

    def all_transactions(self) -> list[Transaction]:
        return [self._by_id[i] for i in range(self._next_tx_id)]

    def verify_chain(self) -> VerificationReport:
        with self._lock:
            expected_id = 0
            prev = GENESIS_PREV_HASH
            for h, block in enumerate(self.blocks):
                if block.height != h:
                    return VerificationReport(False, h, "height mismatch")
                if block.prev_hash != prev:
                    return VerificationReport(False, h, "broken prevHash link")
                for tx in block.transactions:
                    if canon.digest(tx.payload) != tx.payload_hash:
                        return VerificationReport(False, h, "payloadHash mismatch")
                    if tx.tx_id != expected_id:
                        return VerificationReport(False, h, "txId out of sequence")
                    expected_id += 1
                if compute_tx_root(block.transactions) != block.tx_root:
                    return VerificationReport(False, h, "txRoot mismatch")
                if compute_block_hash(h, block.prev_hash, block.tx_root) != block.block_hash:
                    return VerificationReport(False, h, "blockHash mismatch")
                prev = block.block_hash
            open_height = len(self.blocks)
            for tx in self.buffer:
                if canon.digest(tx.payload) != tx.payload_hash:
                    return VerificationReport(False, open_height, "buffered payloadHash mismatch")
                if tx.tx_id != expected_id:
                    return VerificationReport(False, open_height, "buffered txId out of sequence")
                expected_id += 1
            return VerificationReport(True)


# -- byte-level verification (CLI `ledger verify`, startup, tamper tests) ----
#
# Walks the persisted encoding directly and exact-matches all structural
# bytes, so any single-bit flip in either file fails verification. Kept
# allocation-light: the exhaustive flip sweep runs this tens of thousands
# of times.

_B_HEADER = _frame(_FILE_HEADER)
_B_WAL_HEADER = _frame(_WAL_HEADER)
_K_BLOCKHASH = b"S\x00\x00\x00\tblockHash"
_K_HEIGHT = b"S\x00\x00\x00\x06height"
_K_PREVHASH = b"S\x00\x00\x00\x08prevHash"
_K_TRANSACTIONS = b"S\x00\x00\x00\x0ctransactions"
_K_TXROOT = b"S\x00\x00\x00\x06txRoot"
_B_DICT5 = b"D\x00\x00\x00\x05"
_B_HASH32 = b"Y\x00\x00\x00\x20"
_B_PAIR = b"L\x00\x00\x00\x02Y"


def _expected_txid_suffix(tx_id: int) -> bytes:
    body = str(tx_id).encode()
    return b"S\x00\x00\x00\x04txId" + b"I" + _U32.pack(len(body)) + body


def verify_encoded_chain(data: bytes, wal: bytes = b"") -> VerificationReport:
    from hashlib import sha256

    def fail(height, msg):
        return VerificationReport(False, height, msg)

    if data[: len(_B_HEADER)] != _B_HEADER:
        return fail(None, "bad ledger header")
    pos, end = len(_B_HEADER), len(data)
    expected_id = 0
    prev_hash = GENESIS_PREV_HASH
    height = 0
    while pos < end:
        if pos + 4 > end:
            return fail(height, "truncated block frame")
        rec_len = _U32.unpack_from(data, pos)[0]
        pos += 4
        rec_end = pos + rec_len
        if rec_end > end:
            return fail(height, "block frame overruns file")
        # dict {blockHash, height, prevHash, transactions, txRoot}
        if data[pos : pos + 5] != _B_DICT5:
            return fail(height, "bad block structure")
        pos += 5
        if data[pos : pos + 14] != _K_BLOCKHASH:
            return fail(height, "bad block structure")
        pos += 14
        if data[pos : pos + 5] != _B_HASH32:
            return fail(height, "bad block structure")
        pos += 5
        stored_block_hash = data[pos : pos + 32]
        pos += 32
        if data[pos : pos + 11] != _K_HEIGHT:
            return fail(height, "bad block structure")
        pos += 11
        hdigits = str(height).encode()
        expect_h = b"I" + _U32.pack(len(hdigits)) + hdigits
        if data[pos : pos + len(expect_h)] != expect_h:
            return fail(height, "height mismatch")
        pos += len(expect_h)
        if data[pos : pos + 13] != _K_PREVHASH:
            return fail(height, "bad block structure")
        pos += 13
        if data[pos : pos + 5] != _B_HASH32:
            return fail(height, "bad block structure")
        pos += 5
        if data[pos : pos + 32] != prev_hash:
            return fail(height, "broken prevHash link")
        pos += 32
        if data[pos : pos + 17] != _K_TRANSACTIONS:
            return fail(height, "bad block structure")
        pos += 17
        if data[pos : pos + 1] != b"L" or pos + 5 > rec_end:
            return fail(height, "bad block structure")
        tx_count = _U32.unpack_from(data, pos + 1)[0]
        pos += 5
        if tx_count == 0:
            return fail(height, "empty block")
        root_hasher = sha256()
        for _ in range(tx_count):
            if data[pos : pos + 6] != _B_PAIR or pos + 10 > rec_end:
                return fail(height, "bad transaction structure")
            plen = _U32.unpack_from(data, pos + 6)[0]
            pos += 10
            if pos + plen > rec_end:
                return fail(height, "truncated transaction payload")
            payload = data[pos : pos + plen]
            pos += plen
            if data[pos : pos + 5] != _B_HASH32 or pos + 37 > rec_end:
                return fail(height, "bad transaction structure")
            stored_hash = data[pos + 5 : pos + 37]
            pos += 37
            if sha256(payload).digest() != stored_hash:
                return fail(height, "payloadHash mismatch")
            if not payload.endswith(_expected_txid_suffix(expected_id)):
                return fail(height, "txId out of sequence")
            root_hasher.update(stored_hash)
            expected_id += 1
        if data[pos : pos + 11] != _K_TXROOT:
            return fail(height, "bad block structure")
        pos += 11
        if data[pos : pos + 5] != _B_HASH32:
            return fail(height, "bad block structure")
        pos += 5
        tx_root = data[pos : pos + 32]
        pos += 32
        if pos != rec_end:
            return fail(height, "block frame length mismatch")
        if root_hasher.digest() != tx_root:
            return fail(height, "txRoot mismatch")
        if sha256(canon.encode([height, bytes(prev_hash), bytes(tx_root)])).digest() != stored_block_hash:
            return fail(height, "blockHash mismatch")
        prev_hash = stored_block_hash
        height += 1

    if wal:
        open_height = height
        if wal[: len(_B_WAL_HEADER)] != _B_WAL_HEADER:
            return fail(open_height, "bad wal header")
        pos, end = len(_B_WAL_HEADER), len(wal)
        while pos < end:
            if pos + 4 > end:
                return fail(open_height, "truncated wal frame")
            rec_len = _U32.unpack_from(wal, pos)[0]
            pos += 4
            rec_end = pos + rec_len
            if rec_end > end:
                return fail(open_height, "wal frame overruns file")
            if wal[pos : pos + 6] != _B_PAIR or pos + 10 > rec_end:
                return fail(open_height, "bad wal record")
            plen = _U32.unpack_from(wal, pos + 6)[0]
            pos += 10
            if pos + plen > rec_end:
                return fail(open_height, "truncated wal payload")
            payload = wal[pos : pos + plen]
            pos += plen
            if wal[pos : pos + 5] != _B_HASH32 or pos + 37 != rec_end:
                return fail(open_height, "bad wal record")
            stored_hash = wal[pos + 5 : pos + 37]
            pos += 37
            if sha256(payload).digest() != stored_hash:
                return fail(open_height, "wal payloadHash mismatch")
            if not payload.endswith(_expected_txid_suffix(expected_id)):
                return fail(open_height, "wal txId out of sequence")
            expected_id += 1
    return VerificationReport(True)


def _parse_files(data: bytes, wal: bytes) -> tuple[list[Block], list[Transaction]]:
    """Reconstruct blocks and the open buffer; caller verified the bytes."""
    blocks: list[Block] = []
    pos = len(_B_HEADER)
    while pos < len(data):
        rec_len = _U32.unpack_from(data, pos)[0]
        body = canon.decode(data[pos + 4 : pos + 4 + rec_len])
        pos += 4 + rec_len
        txs = tuple(transaction_from_payload(bytes(p)) for p, _h in body["transactions"])
        blocks.append(Block(height=body["height"], prev_hash=bytes(body["prevHash"]),
                            tx_root=bytes(body["txRoot"]), transactions=txs,
                            block_hash=bytes(body["blockHash"])))
    buffered: list[Transaction] = []
    if wal:
        pos = len(_B_WAL_HEADER)
        while pos < len(wal):
            rec_len = _U32.unpack_from(wal, pos)[0]
            payload, _h = canon.decode(wal[pos + 4 : pos + 4 + rec_len])
            pos += 4 + rec_len
            buffered.append(transaction_from_payload(bytes(payload)))
    return blocks, buffered


def verify_files(path: str) -> VerificationReport:
    """Verify a persisted ledger (data file plus sidecar WAL) from disk."""
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as exc:
        return VerificationReport(False, None, f"cannot read ledger: {exc}")
    wal = b""
    wal_path = path + ".wal"
    if os.path.exists(wal_path):
        with open(wal_path, "rb") as f:
            wal = f.read()
    return verify_encoded_chain(data, wal)
