import pytest
from hypothesis import given, strategies as st

from ballotledger import canon


def values(depth=3):
    base = (st.none() | st.booleans() | st.integers() | st.binary(max_size=64)
            | st.text(max_size=32))
    return st.recursive(
        base,
        lambda inner: st.lists(inner, max_size=4)
        | st.dictionaries(st.text(max_size=8), inner, max_size=4),
        max_leaves=16)


@given(values())
def test_round_trip(value):
    encoded = canon.encode(value)
    decoded = canon.decode(encoded)
    assert decoded == value
    # canonical: re-encoding the decoded value is byte-identical
    assert canon.encode(decoded) == encoded


def test_deterministic_key_order():
    a = canon.encode({"b": 1, "a": 2})
    b = canon.encode({"a": 2, "b": 1})
    assert a == b


def test_distinct_types_never_collide():
    assert canon.encode(1) != canon.encode("1")
    assert canon.encode(b"1") != canon.encode("1")
    assert canon.encode([]) != canon.encode({})
    assert canon.encode(True) != canon.encode(1)
    assert canon.encode(None) != canon.encode(False)


def test_nested_structures():
    value = {"tx": [1, -5, b"\x00\xff", {"k": None}], "ok": True}
    assert canon.decode(canon.encode(value)) == value


def test_rejects_trailing_bytes():
    with pytest.raises(canon.CanonError):
        canon.decode(canon.encode(1) + b"x")


def test_rejects_truncation():
    encoded = canon.encode({"key": b"value"})
    for cut in range(1, len(encoded)):
        with pytest.raises(canon.CanonError):
            canon.decode(encoded[:cut])


def test_rejects_non_canonical_ints():
    # "01" and "-0" are not canonical decimal encodings
    bad_leading_zero = b"I\x00\x00\x00\x0201"
    with pytest.raises(canon.CanonError):
        canon.decode(bad_leading_zero)
    with pytest.raises(canon.CanonError):
        canon.decode(b"I\x00\x00\x00\x02-0")


def test_rejects_unsorted_dict_keys():
    good = canon.encode({"a": 1, "b": 2})
    # swap the two entries: D <count> Sa I1 Sb I2 -> manually craft reversed
    swapped = (b"D\x00\x00\x00\x02"
               + b"S\x00\x00\x00\x01b" + b"I\x00\x00\x00\x012"
               + b"S\x00\x00\x00\x01a" + b"I\x00\x00\x00\x011")
    assert canon.decode(good) == {"a": 1, "b": 2}
    with pytest.raises(canon.CanonError):
        canon.decode(swapped)


def test_rejects_unencodable():
    with pytest.raises(canon.CanonError):
        canon.encode(1.5)
    with pytest.raises(canon.CanonError):
        canon.encode({1: "non-string key"})


def test_digest_is_sha256():
    import hashlib

    assert canon.digest(b"abc") == hashlib.sha256(b"abc").digest()
    assert canon.DIGEST_SIZE == 32
