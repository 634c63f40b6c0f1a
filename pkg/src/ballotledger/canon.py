"""Canonical byte encoding used for every hashed artifact in the system.

Deterministic, length-prefixed, field-ordered: the same value always
encodes to the same bytes, so payload hashes, block hashes, Fiat-Shamir
challenges and stored reports are reproducible. Decoding is strict and
rejects anything the encoder could not have produced.
"""

from __future__ import annotations

import hashlib
import struct

DIGEST_ALGORITHM = "sha-256"
DIGEST_SIZE = 32

_U32 = struct.Struct(">I")

TAG_NONE = ord("N")
TAG_BOOL = ord("B")
TAG_INT = ord("I")
TAG_BYTES = ord("Y")
TAG_STR = ord("S")
TAG_LIST = ord("L")
TAG_DICT = ord("D")


class CanonError(ValueError):
    """Value cannot be canonically encoded, or bytes are not a canonical encoding."""


def digest(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def encode(value) -> bytes:
    out = bytearray()
    _encode_into(out, value)
    return bytes(out)


def _encode_into(out: bytearray, value) -> None:
    if value is None:
        out.append(TAG_NONE)
    elif value is True or value is False:
        out.append(TAG_BOOL)
        out.append(1 if value else 0)
    elif isinstance(value, int):
        body = str(value).encode("ascii")
        out.append(TAG_INT)
        out += _U32.pack(len(body))
        out += body
    elif isinstance(value, (bytes, bytearray, memoryview)):
        body = bytes(value)
        out.append(TAG_BYTES)
        out += _U32.pack(len(body))
        out += body
    elif isinstance(value, str):
        body = value.encode("utf-8")
        out.append(TAG_STR)
        out += _U32.pack(len(body))
        out += body
    elif isinstance(value, (list, tuple)):
        out.append(TAG_LIST)
        out += _U32.pack(len(value))
        for item in value:
            _encode_into(out, item)
    elif isinstance(value, dict):
        keys = list(value.keys())
        if any(not isinstance(k, str) for k in keys):
            raise CanonError("dict keys must be strings")
        keys.sort()
        out.append(TAG_DICT)
        out += _U32.pack(len(keys))
        for k in keys:
            kb = k.encode("utf-8")
            out.append(TAG_STR)
            out += _U32.pack(len(kb))
            out += kb
            _encode_into(out, value[k])
    else:
        raise CanonError(f"unsupported type: {type(value).__name__}")


def decode(data: bytes):
    """Strict inverse of encode(); raises CanonError on any malformation."""
    value, pos = _decode_from(data, 0, len(data))
    if pos != len(data):
        raise CanonError("trailing bytes after canonical value")
    return value


def _read_len(data: bytes, pos: int, end: int) -> tuple[int, int]:
    if pos + 4 > end:
        raise CanonError("truncated length prefix")
    return _U32.unpack_from(data, pos)[0], pos + 4


def _decode_from(data: bytes, pos: int, end: int):
    if pos >= end:
        raise CanonError("truncated value")
    tag = data[pos]
    pos += 1
    if tag == TAG_NONE:
        return None, pos
    if tag == TAG_BOOL:
        if pos >= end or data[pos] not in (0, 1):
            raise CanonError("bad bool")
        return data[pos] == 1, pos + 1
    if tag == TAG_INT:
        n, pos = _read_len(data, pos, end)
        if pos + n > end:
            raise CanonError("truncated int")
        body = bytes(data[pos : pos + n])
        text = body.decode("ascii", errors="strict") if _is_canonical_int(body) else None
        if text is None:
            raise CanonError("non-canonical int")
        return int(text), pos + n
    if tag == TAG_BYTES:
        n, pos = _read_len(data, pos, end)
        if pos + n > end:
            raise CanonError("truncated bytes")
        return bytes(data[pos : pos + n]), pos + n
    if tag == TAG_STR:
        n, pos = _read_len(data, pos, end)
        if pos + n > end:
            raise CanonError("truncated str")
        try:
            return bytes(data[pos : pos + n]).decode("utf-8"), pos + n
        except UnicodeDecodeError as exc:
            raise CanonError("invalid utf-8") from exc
    if tag == TAG_LIST:
        n, pos = _read_len(data, pos, end)
        items = []
        for _ in range(n):
            item, pos = _decode_from(data, pos, end)
            items.append(item)
        return items, pos
    if tag == TAG_DICT:
        n, pos = _read_len(data, pos, end)
        entries = {}
        prev_key = None
        for _ in range(n):
            if pos >= end or data[pos] != TAG_STR:
                raise CanonError("dict key must be str")
            key, pos = _decode_from(data, pos, end)
            if prev_key is not None and key <= prev_key:
                raise CanonError("dict keys out of order")
            prev_key = key
            entries[key], pos = _decode_from(data, pos, end)
        return entries, pos
    raise CanonError(f"unknown tag 0x{tag:02x}")


def _is_canonical_int(body: bytes) -> bool:
    if not body:
        return False
    digits = body[1:] if body[:1] == b"-" else body
    if not digits or not digits.isdigit():
        return False
    # no leading zeros, no "-0"
    if len(digits) > 1 and digits[0] == ord("0"):
        return False
    if body[:1] == b"-" and digits == b"0":
        return False
    return True
