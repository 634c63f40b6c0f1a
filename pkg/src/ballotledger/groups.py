"""Prime-order subgroup parameters for the identification protocol.

Two built-in groups: a brute-forceable toy group (p=23, q=11, g=2) for
tests and demos, and the RFC 5114 2048-bit MODP group with a 256-bit
prime-order subgroup for production use.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass

from .errors import BadGroupElement, ConfigError

_MR_ROUNDS = 40


def is_probable_prime(n: int, rounds: int = _MR_ROUNDS) -> bool:
    """Miller-Rabin with random bases (plus small-prime trial division)."""
    if n < 2:
        return False
    small_primes = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small_primes:
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for _ in range(rounds):
        a = secrets.randbelow(n - 3) + 2
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class GroupParams:
    """Schnorr group: generator g of prime order q in Z_p^*."""

    name: str
    p: int
    q: int
    g: int

    def validate(self) -> "GroupParams":
        if (self.p - 1) % self.q != 0:
            raise ConfigError("q does not divide p-1")
        if not (1 < self.g < self.p):
            raise ConfigError("generator out of range")
        if pow(self.g, self.q, self.p) != 1:
            raise ConfigError("generator does not have order q")
        if not is_probable_prime(self.q):
            raise ConfigError("q is not prime")
        if not is_probable_prime(self.p):
            raise ConfigError("p is not prime")
        return self

    def is_element(self, y: int) -> bool:
        """Membership in the order-q subgroup (identity excluded by callers that want it)."""
        return 0 < y < self.p and pow(y, self.q, self.p) == 1

    def require_public_key(self, y: int) -> None:
        """Subgroup membership plus the degenerate-key policy (y = 1 rejected)."""
        if y == 1 or not self.is_element(y):
            raise BadGroupElement(f"not a valid public key for group {self.name}")

    def random_scalar(self) -> int:
        """Uniform in [0, q-1]."""
        return secrets.randbelow(self.q)

    def random_secret(self) -> int:
        """Uniform in [1, q-1]: secret keys exclude zero."""
        return secrets.randbelow(self.q - 1) + 1

    def fingerprint(self) -> str:
        from . import canon

        return canon.digest(canon.encode([self.p, self.q, self.g]))[:8].hex()


TOY = GroupParams(name="toy", p=23, q=11, g=2)

# RFC 5114 section 2.3: 2048-bit MODP group, 256-bit prime-order subgroup.
_RFC5114_P = int(
    "87A8E61DB4B6663CFFBBD19C651959998CEEF608660DD0F25D2CEED4435E3B00"
    "E00DF8F1D61957D4FAF7DF4561B2AA3016C3D91134096FAA3BF4296D830E9A7C"
    "209E0C6497517ABD5A8A9D306BCF67ED91F9E6725B4758C022E0B1EF4275BF7B"
    "6C5BFC11D45F9088B941F54EB1E59BB8BC39A0BF12307F5C4FDB70C581B23F76"
    "B63ACAE1CAA6B7902D52526735488A0EF13C6D9A51BFA4AB3AD8347796524D8E"
    "F6A167B5A41825D967E144E5140564251CCACB83E6B486F6B3CA3F7971506026"
    "C0B857F689962856DED4010ABD0BE621C3A3960A54E710C375F26375D7014103"
    "A4B54330C198AF126116D2276E11715F693877FAD7EF09CADB094AE91E1A1597",
    16,
)
_RFC5114_G = int(
    "3FB32C9B73134D0B2E77506660EDBD484CA7B18F21EF205407F4793A1A0BA125"
    "10DBC15077BE463FFF4FED4AAC0BB555BE3A6C1B0C6B47B1BC3773BF7E8C6F62"
    "901228F8C28CBB18A55AE31341000A650196F931C77A57F2DDF463E5E9EC144B"
    "777DE62AAAB8A8628AC376D282D6ED3864E67982428EBC831D14348F6F2F9193"
    "B5045AF2767164E1DFC967C1FB3F2E55A4BD1BFFE83B9C80D052B985D182EA0A"
    "DB2A3B7313D3FE14C8484B1E052588B9B7D2BBD2DF016199ECD06E1557CD0915"
    "B3353BBB64E0EC377FD028370DF92B52C7891428CDC67EB6184B523D1DB246C3"
    "2F63078490F00EF8D647D148D47954515E2327CFEF98C582664B4C0F6CC41659",
    16,
)
_RFC5114_Q = int("8CF83642A709A097B447997640129DA299B1A47D1EB3750BA308B0FE64F5FBD3", 16)

PRODUCTION = GroupParams(name="rfc5114-2048-256", p=_RFC5114_P, q=_RFC5114_Q, g=_RFC5114_G)

_BUILTIN = {g.name: g for g in (TOY, PRODUCTION)}


def load_group(name: str) -> GroupParams:
    try:
        return _BUILTIN[name].validate()
    except KeyError:
        raise ConfigError(f"unknown group: {name!r}") from None
